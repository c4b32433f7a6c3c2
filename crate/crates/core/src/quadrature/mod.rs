//! Oscillation-aware quadrature over Z and Z².
//!
//! Every integration range is cut at the points t = 2πn², where the
//! Riemann-Siegel main sum gains a term, and each piece is divided into
//! equal panels whose width keeps the phase advance of Z (local angular
//! frequency θ′(t) ≈ ½ ln(t/2π)) at or below `osc_factor`. Each panel is
//! integrated by the 15-point Gauss–Kronrod rule and bisected adaptively
//! while the Kronrod/Gauss error estimate exceeds its share of the
//! tolerance. Panels are evaluated in parallel and reduced in panel order,
//! so results do not depend on the number of worker threads.

mod kronrod;
mod moment;
mod table;

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::{hardy_z, theta_prime, RSConfig};
use crate::sum::CompensatedSum;

pub use moment::{
    admissible_h_range, check_admissible, hl_moment, u0, window_integral, window_scan,
    MomentReport, WindowScan, U0_EXPONENT,
};
pub use table::{
    table_fingerprint, SecondMoment, SecondMomentTable, CHECKPOINT_STRIDE, SMTABLE_FORMAT,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a <= b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain(format!("invalid interval [{a}, {b}]")));
        }
        Ok(Self { a, b })
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_empty(&self) -> bool {
        self.a == self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    /// Upper bound on θ′(t) × panel width, in radians.
    pub osc_factor: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            max_depth: 24,
            osc_factor: 0.5,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::domain("abs_tol and rel_tol must be positive"));
        }
        if self.max_depth < 4 {
            return Err(Error::domain(format!(
                "max_depth must be at least 4, got {}",
                self.max_depth
            )));
        }
        if !(self.osc_factor > 0.0 && self.osc_factor <= 1.0) {
            return Err(Error::domain(format!(
                "osc_factor must lie in (0, 1], got {}",
                self.osc_factor
            )));
        }
        Ok(())
    }
}

/// An integral with its accumulated error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
}

/// Angular frequency used to size panels; floored at 1 rad per unit
/// where θ′ is small or negative.
pub(crate) fn panel_frequency(t: f64) -> f64 {
    theta_prime(t.max(TAU)).max(1.0)
}

/// Heights 2πn² strictly inside (a, b).
pub(crate) fn breakpoints(a: f64, b: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut n = (a.max(0.0) / TAU).sqrt().floor() as u64;
    loop {
        let x = TAU * (n * n) as f64;
        if x >= b {
            break;
        }
        if x > a {
            out.push(x);
        }
        n += 1;
    }
    out
}

/// Panel edges for [a, b] with the given frequency multiplier (1 for Z,
/// panels are shared with Z²).
pub(crate) fn panel_edges(a: f64, b: f64, osc_factor: f64) -> Vec<f64> {
    let mut cuts = vec![a];
    cuts.extend(breakpoints(a, b));
    cuts.push(b);
    let mut edges = vec![a];
    for pair in cuts.windows(2) {
        let (l, r) = (pair[0], pair[1]);
        if r <= l {
            continue;
        }
        let count = ((r - l) * panel_frequency(r) / osc_factor).ceil().max(1.0) as usize;
        let w = (r - l) / count as f64;
        for i in 1..count {
            edges.push(l + w * i as f64);
        }
        edges.push(r);
    }
    edges
}

struct PanelOutcome {
    value: f64,
    error: f64,
    converged: bool,
}

fn adaptive_panel<F>(f: &F, a: f64, b: f64, tol: f64, cfg: &QuadConfig, depth: u32) -> Result<PanelOutcome>
where
    F: Fn(f64) -> Result<f64> + Sync + ?Sized,
{
    let r = kronrod::rule(f, a, b)?;
    let err = r.error();
    let target = tol.max(cfg.rel_tol * r.resabs);
    if err <= target {
        return Ok(PanelOutcome {
            value: r.kronrod,
            error: err,
            converged: true,
        });
    }
    let mid = 0.5 * (a + b);
    let too_narrow = (b - a) <= 1e3 * f64::EPSILON * a.abs().max(b.abs()).max(1.0);
    if depth >= cfg.max_depth || too_narrow {
        return Ok(PanelOutcome {
            value: r.kronrod,
            error: err,
            converged: false,
        });
    }
    let left = adaptive_panel(f, a, mid, 0.5 * tol, cfg, depth + 1)?;
    let right = adaptive_panel(f, mid, b, 0.5 * tol, cfg, depth + 1)?;
    Ok(PanelOutcome {
        value: left.value + right.value,
        error: left.error + right.error,
        converged: left.converged && right.converged,
    })
}

/// Integrates `f` over the given panel edges. Returns per-panel values
/// (in order) alongside the total.
pub(crate) fn integrate_on_edges<F>(f: &F, edges: &[f64], cfg: &QuadConfig) -> Result<(Vec<f64>, QuadEstimate)>
where
    F: Fn(f64) -> Result<f64> + Sync + ?Sized,
{
    if edges.len() < 2 {
        return Ok((Vec::new(), QuadEstimate { value: 0.0, error: 0.0 }));
    }
    let span = edges[edges.len() - 1] - edges[0];
    let outcomes: Vec<Result<PanelOutcome>> = edges
        .par_windows(2)
        .map(|p| {
            let share = if span > 0.0 { cfg.abs_tol * (p[1] - p[0]) / span } else { cfg.abs_tol };
            adaptive_panel(f, p[0], p[1], share, cfg, 0)
        })
        .collect();
    let mut values = Vec::with_capacity(outcomes.len());
    let mut total = CompensatedSum::new();
    let mut error = CompensatedSum::new();
    let mut converged = true;
    for o in outcomes {
        let o = o?;
        total.add(o.value);
        error.add(o.error);
        converged &= o.converged;
        values.push(o.value);
    }
    let est = QuadEstimate {
        value: total.value(),
        error: error.value(),
    };
    if !converged && est.error > cfg.abs_tol.max(cfg.rel_tol * est.value.abs()) {
        return Err(Error::precision(
            format!("tolerance not reached within max_depth = {}", cfg.max_depth),
            est.value,
            est.error,
        ));
    }
    Ok((values, est))
}

/// Integrates `f` over [a, b] using the standard panel decomposition.
pub fn integrate_oscillatory<F>(f: &F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadEstimate>
where
    F: Fn(f64) -> Result<f64> + Sync + ?Sized,
{
    cfg.validate()?;
    if a == b {
        return Ok(QuadEstimate { value: 0.0, error: 0.0 });
    }
    let edges = panel_edges(a, b, cfg.osc_factor);
    integrate_on_edges(f, &edges, cfg).map(|(_, e)| e)
}

/// ∫ Z(u) du over the interval; requires `iv.a ≥ 10`.
pub fn integrate_z(iv: Interval, cfg: &QuadConfig, rs: &RSConfig) -> Result<QuadEstimate> {
    if iv.a < 10.0 {
        return Err(Error::OutOfRange {
            what: "interval start",
            value: iv.a,
            min: 10.0,
        });
    }
    rs.validate()?;
    let f = |t: f64| Ok(hardy_z(t, rs));
    integrate_oscillatory(&f, iv.a, iv.b, cfg)
}

/// ∫ Z(u)² du = ∫ |ζ(1/2 + iu)|² du over the interval; requires `iv.a ≥ 0`.
pub fn integrate_z2(iv: Interval, cfg: &QuadConfig, rs: &RSConfig) -> Result<QuadEstimate> {
    if iv.a < 0.0 {
        return Err(Error::OutOfRange {
            what: "interval start",
            value: iv.a,
            min: 0.0,
        });
    }
    rs.validate()?;
    let f = |t: f64| {
        let z = hardy_z(t, rs);
        Ok(z * z)
    };
    integrate_oscillatory(&f, iv.a, iv.b, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_rejects_reversed() {
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(1.0, 1.0).unwrap().is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(QuadConfig::default().validate().is_ok());
        let bad = QuadConfig { max_depth: 3, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = QuadConfig { osc_factor: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn edges_respect_phase_bound_and_breakpoints() {
        let edges = panel_edges(100.0, 1000.0, 0.5);
        for w in edges.windows(2) {
            assert!(w[1] > w[0]);
            assert!((w[1] - w[0]) * panel_frequency(w[1]) <= 0.5 + 1e-12);
        }
        for bp in breakpoints(100.0, 1000.0) {
            assert!(edges.contains(&bp));
        }
    }

    #[test]
    fn breakpoints_are_squares() {
        let bps = breakpoints(0.0, TAU * 16.0 + 1.0);
        assert_eq!(bps.len(), 4);
        assert_eq!(bps[0], TAU);
        assert_eq!(bps[3], TAU * 16.0);
    }

    #[test]
    fn smooth_integral() {
        let f = |x: f64| Ok((3.0 * x).sin());
        let r = integrate_oscillatory(&f, 10.0, 20.0, &QuadConfig::default()).unwrap();
        let exact = ((30.0f64).cos() - (60.0f64).cos()) / 3.0;
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn reports_precision_failure_on_jump() {
        let cfg = QuadConfig { max_depth: 4, abs_tol: 1e-14, rel_tol: 1e-14, ..Default::default() };
        let f = |x: f64| Ok(if x < 10.123_456 { 0.0 } else { 1.0 });
        let r = integrate_oscillatory(&f, 10.0, 10.3, &cfg);
        assert!(matches!(r, Err(Error::Precision { .. })));
    }
}
