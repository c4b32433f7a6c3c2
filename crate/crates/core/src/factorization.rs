//! The mean-value point η, the point β, the α-sequence and the
//! factorization report.
//!
//! Starting from a window [η, η + H] on which (∫ Z)² equals its mean value
//! 2πH, the window is pulled back k times through the ladder to [A, B].
//! The integrand Z(φ₁^k(t)) Π_{r<k} Z̃²(φ₁^r(t)) is integrated over [A, B]
//! and β is a mean-value point of it; the ladder images of β form the
//! α-sequence whose |ζ| values enter the factorization
//!
//! ```text
//! √(Λ / |ζ(1/2 + iα₀)|) ≈ Π_{r=1}^{k} |ζ(1/2 + iα_r)|,   Λ = √(2π) √H ln^k T / H_k.
//! ```

use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ladder::{Direction, Ladder};
use crate::quadrature::{
    check_admissible, integrate_oscillatory, panel_edges, u0, window_integral,
    window_scan, QuadConfig,
};
use crate::roots::{brent, RootOptions};
use crate::special_fn::{em_zeta_half, riemann_siegel_z, tau};

pub const FACREP_FORMAT: &str = "facrep-v1";

/// Span of one chunk of the η scan; the scan stops at the first chunk that
/// contains a sign change.
const ETA_SCAN_CHUNK: f64 = 64.0;

/// Samples per quadrature panel when bracketing roots for β.
const BETA_SAMPLES_PER_PANEL: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorizationConfig {
    /// α_r closer than this to a zero of Z (in |ζ|) are rejected.
    pub zero_threshold: f64,
    /// Number of alternative β roots tried after a rejection.
    pub max_retries: usize,
    pub quad: QuadConfig,
}

impl Default for FactorizationConfig {
    fn default() -> Self {
        Self {
            zero_threshold: 1e-6,
            max_retries: 5,
            quad: QuadConfig::default(),
        }
    }
}

impl FactorizationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.zero_threshold >= 0.0) {
            return Err(Error::domain(format!(
                "zero_threshold must be nonnegative, got {}",
                self.zero_threshold
            )));
        }
        self.quad.validate()
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    Ok(())
}

/// η ∈ (T, T + U₀) with (∫_η^{η+H} Z)² = 2πH: the first sign change of
/// g(x) = W(x)² − 2πH on the sliding grid, refined by Brent's method.
pub fn find_eta(t: f64, h: f64, ladder: &Ladder, cfg: &FactorizationConfig) -> Result<f64> {
    check_admissible(t, h)?;
    let rs = ladder.moment().rs_config();
    let target = TAU * h;
    let end = t + u0(t);
    let mut g_min = f64::INFINITY;
    let mut g_max = f64::NEG_INFINITY;
    let mut start = t;
    while start < end {
        let span = ETA_SCAN_CHUNK.min(end - start);
        let scan = window_scan(start, span, h, &cfg.quad, rs)?;
        let g: Vec<f64> = scan.values.iter().map(|w| w * w - target).collect();
        for i in 0..scan.cells() {
            g_min = g_min.min(g[i]);
            g_max = g_max.max(g[i]);
            let (a, b) = (scan.node(i), scan.node(i + 1));
            if g[i + 1] == 0.0 && b < end {
                return Ok(b);
            }
            if g[i] * g[i + 1] < 0.0 {
                let f = |x: f64| {
                    let w = window_integral(x, h, &cfg.quad, rs)?;
                    Ok(w * w - target)
                };
                let eta = brent(
                    f,
                    a,
                    b,
                    RootOptions {
                        x_tol: 4.0 * f64::EPSILON * b,
                        ..Default::default()
                    },
                )?;
                let w = window_integral(eta, h, &cfg.quad, rs)?;
                let q = w.abs() / target.sqrt();
                if (q - 1.0).abs() > 1e-4 {
                    return Err(Error::precision(
                        format!("eta refinement at {eta}"),
                        q,
                        (q - 1.0).abs(),
                    ));
                }
                if eta > t && eta < end {
                    return Ok(eta);
                }
            }
        }
        if let Some(&last) = g.last() {
            g_min = g_min.min(last);
            g_max = g_max.max(last);
        }
        start += span;
    }
    Err(Error::Existence {
        from: t,
        to: end,
        g_min,
        g_max,
    })
}

/// Z(φ₁^k(t)) Π_{r=0}^{k−1} Z̃²(φ₁^r(t)).
pub fn iterated_integrand(t: f64, k: usize, ladder: &Ladder) -> Result<f64> {
    let chain = ladder.phi1_iterates(t, k, Direction::Forward)?;
    let rs = ladder.moment().rs_config();
    let mut value = riemann_siegel_z(chain[k], rs)?.z;
    for &x in &chain[..k] {
        value *= ladder.ztilde_sq(x)?;
    }
    Ok(value)
}

/// The pulled-back window and the mean value of the integrand on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaPoint {
    pub eta: f64,
    pub beta: f64,
    /// [A, B] = [φ₁^{−k}(η), φ₁^{−k}(η + H)].
    pub a: f64,
    pub b: f64,
    #[serde(rename = "Hk")]
    pub hk: f64,
    /// F = ∫_A^B of the iterated integrand.
    pub integral: f64,
    /// |F| / √(2πH), expected near 1.
    pub lemma_ratio: f64,
}

/// Roots of integrand − F/H_k on [A, B], in increasing order.
fn mean_value_roots(
    k: usize,
    ladder: &Ladder,
    cfg: &FactorizationConfig,
    a: f64,
    b: f64,
    mean: f64,
) -> Result<Vec<f64>> {
    let h = |x: f64| Ok(iterated_integrand(x, k, ladder)? - mean);
    let edges = panel_edges(a, b, cfg.quad.osc_factor);
    let mut grid = Vec::with_capacity((edges.len() - 1) * BETA_SAMPLES_PER_PANEL + 1);
    for w in edges.windows(2) {
        for j in 0..BETA_SAMPLES_PER_PANEL {
            grid.push(w[0] + (w[1] - w[0]) * j as f64 / BETA_SAMPLES_PER_PANEL as f64);
        }
    }
    grid.push(b);
    // Endpoints are excluded: β must lie strictly inside.
    let vals: Vec<f64> = grid.iter().map(|&x| h(x)).collect::<Result<_>>()?;
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        let (x0, x1) = (grid[i], grid[i + 1]);
        let (v0, v1) = (vals[i], vals[i + 1]);
        if v1 == 0.0 && i + 1 < grid.len() - 1 {
            roots.push(x1);
        } else if v0 * v1 < 0.0 {
            let r = brent(
                h,
                x0,
                x1,
                RootOptions {
                    x_tol: 4.0 * f64::EPSILON * x1,
                    ..Default::default()
                },
            )?;
            roots.push(r);
        }
    }
    Ok(roots)
}

/// Pulls [η, η + H] back k times, integrates the iterated integrand and
/// returns the mean-value root nearest the midpoint, skipping `excluded`.
fn find_beta_excluding(
    t: f64,
    h: f64,
    k: usize,
    ladder: &Ladder,
    cfg: &FactorizationConfig,
    eta: f64,
    excluded: &[f64],
) -> Result<BetaPoint> {
    let a = *ladder.phi1_iterates(eta, k, Direction::Inverse)?.last().expect("k + 1 iterates");
    let b = *ladder
        .phi1_iterates(eta + h, k, Direction::Inverse)?
        .last()
        .expect("k + 1 iterates");
    let hk = b - a;
    if !(hk > 0.0) {
        return Err(Error::Internal(format!("pulled-back window collapsed: [{a}, {b}]")));
    }
    let f = |x: f64| iterated_integrand(x, k, ladder);
    let integral = integrate_oscillatory(&f, a, b, &cfg.quad)?.value;
    let mean = integral / hk;
    let roots = mean_value_roots(k, ladder, cfg, a, b, mean)?;
    let mid = 0.5 * (a + b);
    let min_sep = 1e-9 * hk;
    let beta = roots
        .iter()
        .copied()
        .filter(|r| excluded.iter().all(|e| (r - e).abs() > min_sep))
        .min_by(|x, y| (x - mid).abs().total_cmp(&(y - mid).abs()));
    let Some(beta) = beta else {
        return Err(if roots.is_empty() {
            Error::precision(
                format!("no mean-value root of the iterated integrand on [{a}, {b}] (T = {t})"),
                mean,
                cfg.quad.abs_tol,
            )
        } else {
            Error::Degenerate {
                retries: excluded.len(),
                reason: format!("all {} mean-value roots were rejected", roots.len()),
            }
        });
    };
    let residual = (f(beta)? - mean).abs();
    let bound = 1e-6 * mean.abs() + 1e-10;
    if residual > bound {
        return Err(Error::precision(format!("beta refinement at {beta}"), beta, residual));
    }
    Ok(BetaPoint {
        eta,
        beta,
        a,
        b,
        hk,
        integral,
        lemma_ratio: integral.abs() / (TAU * h).sqrt(),
    })
}

/// β ∈ (A, B) with integrand(β)·H_k = ∫_A^B integrand.
pub fn find_beta(t: f64, h: f64, k: usize, ladder: &Ladder, cfg: &FactorizationConfig) -> Result<BetaPoint> {
    check_k(k)?;
    cfg.validate()?;
    let eta = find_eta(t, h, ladder, cfg)?;
    find_beta_excluding(t, h, k, ladder, cfg, eta, &[])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSequence {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub k: usize,
    pub eta: f64,
    pub beta: f64,
    /// α₀ < α₁ < … < α_k.
    pub alphas: Vec<f64>,
    #[serde(rename = "Hk")]
    pub hk: f64,
}

impl AlphaSequence {
    /// Checks the ordering and window invariants (not zero proximity).
    pub fn validate(&self) -> Result<()> {
        let end = self.t + u0(self.t);
        if !(self.eta > self.t && self.eta < end) {
            return Err(Error::Internal(format!("eta = {} outside ({}, {end})", self.eta, self.t)));
        }
        if self.alphas.len() != self.k + 1 {
            return Err(Error::Internal(format!(
                "{} alphas for k = {}",
                self.alphas.len(),
                self.k
            )));
        }
        if !(self.hk > 0.0) {
            return Err(Error::Internal(format!("Hk = {} is not positive", self.hk)));
        }
        let a0 = self.alphas[0];
        if !(a0 > self.eta && a0 < self.eta + self.h) {
            return Err(Error::Internal(format!("alpha_0 = {a0} outside (eta, eta + H)")));
        }
        if !(self.t < a0) || self.alphas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Internal(format!(
                "alpha chain is not strictly increasing above T: {:?}",
                self.alphas
            )));
        }
        Ok(())
    }
}

/// Mean-value construction of α_r = φ₁^{k−r}(β), retrying with another β
/// whenever some |ζ(1/2 + iα_r)| is at or below the zero threshold.
pub fn build_alpha_sequence(
    t: f64,
    h: f64,
    k: usize,
    ladder: &Ladder,
    cfg: &FactorizationConfig,
) -> Result<(AlphaSequence, BetaPoint)> {
    check_k(k)?;
    cfg.validate()?;
    let eta = find_eta(t, h, ladder, cfg)?;
    let mut excluded = Vec::new();
    loop {
        let bp = match find_beta_excluding(t, h, k, ladder, cfg, eta, &excluded) {
            Err(Error::Degenerate { reason, .. }) => {
                return Err(Error::Degenerate {
                    retries: excluded.len(),
                    reason,
                })
            }
            other => other?,
        };
        let mut alphas = ladder.phi1_iterates(bp.beta, k, Direction::Forward)?;
        alphas.reverse();
        let seq = AlphaSequence {
            t,
            h,
            k,
            eta,
            beta: bp.beta,
            alphas,
            hk: bp.hk,
        };
        seq.validate()?;
        let near_zero = seq
            .alphas
            .iter()
            .map(|&x| Ok((x, em_zeta_half(x)?.norm())))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .find(|&(_, z)| z <= cfg.zero_threshold);
        match near_zero {
            None => return Ok((seq, bp)),
            Some((x, z)) => {
                if excluded.len() >= cfg.max_retries {
                    return Err(Error::Degenerate {
                        retries: excluded.len(),
                        reason: format!(
                            "|zeta| = {z} at alpha = {x} is within the zero threshold {}",
                            cfg.zero_threshold
                        ),
                    });
                }
                excluded.push(bp.beta);
            }
        }
    }
}

/// Λ = √(2π) √H ln^k T / H_k.
pub fn lambda_factor(h: f64, hk: f64, k: usize, t: f64) -> Result<f64> {
    if !(h > 0.0 && hk > 0.0 && t > 0.0) || k == 0 {
        return Err(Error::domain(format!(
            "lambda_factor needs H, Hk, T > 0 and k >= 1, got H = {h}, Hk = {hk}, k = {k}, T = {t}"
        )));
    }
    Ok(TAU.sqrt() * h.sqrt() * t.ln().powi(k as i32) / hk)
}

/// Both sides of the factorization from Λ and [|ζ(α₀)|, …, |ζ(α_k)|]:
/// (√(Λ/|ζ(α₀)|), Π_{r≥1} |ζ(α_r)|, lhs/rhs).
pub fn factorization_sides(lambda: f64, zeta_abs: &[f64]) -> (f64, f64, f64) {
    let lhs = (lambda / zeta_abs[0]).sqrt();
    let rhs: f64 = zeta_abs[1..].iter().product();
    (lhs, rhs, lhs / rhs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub seq: AlphaSequence,
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// |ratio_RS / ratio − 1| with every |ζ| replaced by the absolute
    /// Riemann-Siegel value.
    pub metamorphosis_residual: f64,
    /// |ζ(1/2 + iα_r)| for r = 0..=k.
    pub zeta_abs: Vec<f64>,
    /// |F| / √(2πH) from the β step.
    pub lemma_ratio: f64,
}

#[derive(Serialize, Deserialize)]
struct FacrepDocument {
    schema: String,
    #[serde(flatten)]
    report: FactorizationReport,
}

impl FactorizationReport {
    /// JSON document tagged with the `facrep-v1` schema.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&FacrepDocument {
            schema: FACREP_FORMAT.to_string(),
            report: self.clone(),
        })
        .expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FacrepDocument =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.schema != FACREP_FORMAT {
            return Err(Error::Parse(format!("unsupported schema '{}'", doc.schema)));
        }
        Ok(doc.report)
    }

    pub fn csv_header(k: usize) -> String {
        let mut s = String::from("T,H,k,eta,beta,Hk");
        for r in 0..=k {
            let _ = write!(s, ",alpha_{r}");
        }
        s.push_str(",lambda,lhs,rhs,ratio,meta_residual");
        s
    }

    pub fn csv_row(&self) -> String {
        let q = &self.seq;
        let mut s = format!("{},{},{},{},{},{}", q.t, q.h, q.k, q.eta, q.beta, q.hk);
        for a in &q.alphas {
            let _ = write!(s, ",{a}");
        }
        let _ = write!(
            s,
            ",{},{},{},{},{}",
            self.lambda, self.lhs, self.rhs, self.ratio, self.metamorphosis_residual
        );
        s
    }
}

/// Full pipeline: η, β, the α-sequence, Λ and both sides of the
/// factorization.
pub fn factorize(t: f64, h: f64, k: usize, ladder: &Ladder, cfg: &FactorizationConfig) -> Result<FactorizationReport> {
    let (seq, bp) = build_alpha_sequence(t, h, k, ladder, cfg)?;
    let lambda = lambda_factor(h, seq.hk, k, t)?;
    let zeta_abs = seq
        .alphas
        .iter()
        .map(|&x| Ok(em_zeta_half(x)?.norm()))
        .collect::<Result<Vec<f64>>>()?;
    let (lhs, rhs, ratio) = factorization_sides(lambda, &zeta_abs);
    let rs = ladder.moment().rs_config();
    let rs_abs = seq
        .alphas
        .iter()
        .map(|&x| Ok(riemann_siegel_z(x, rs)?.z.abs()))
        .collect::<Result<Vec<f64>>>()?;
    let (_, _, ratio_rs) = factorization_sides(lambda, &rs_abs);
    Ok(FactorizationReport {
        seq,
        lambda,
        lhs,
        rhs,
        ratio,
        metamorphosis_residual: (ratio_rs / ratio - 1.0).abs(),
        zeta_abs,
        lemma_ratio: bp.lemma_ratio,
    })
}

/// G(x₁, …, x_k) = Π |Z(x_r)|, k ≥ 2.
pub fn multiform_g(xs: &[f64], ladder: &Ladder) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::domain(format!("multiform needs k >= 2 heights, got {}", xs.len())));
    }
    let rs = ladder.moment().rs_config();
    let mut g = 1.0;
    for &x in xs {
        if !(x > 4.0 * TAU) {
            return Err(Error::domain(format!("multiform heights must exceed 8π, got {x}")));
        }
        g *= riemann_siegel_z(x, rs)?.z.abs();
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub n: u64,
    pub omega_nr: f64,
}

/// ω_{n,r} = ln(τ(x_r)/n) for n = 1, …, ⌊τ(x_r)⌋; empty below 2π.
pub fn local_spectrum(x: f64) -> Result<Vec<SpectrumEntry>> {
    let tau = tau(x)?;
    let n_max = tau.floor() as u64;
    Ok((1..=n_max)
        .map(|n| SpectrumEntry {
            n,
            omega_nr: (tau / n as f64).ln(),
        })
        .collect())
}
