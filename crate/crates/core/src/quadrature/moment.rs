//! The Hardy–Littlewood moment J̄(T, H) = ∫_T^{T+U₀} (∫_t^{t+H} Z)² dt.
//!
//! The window integral W(t) = ∫_t^{t+H} Z is carried along a uniform grid
//! by the sliding update W(t + h) = W(t) - ∫_t^{t+h} Z + ∫_{t+H}^{t+H+h} Z,
//! so every Z evaluation is shared between the inner and the outer integral.
//! Inside a grid cell the running integrals to the Kronrod nodes are read
//! off the same node values through a spectral integration matrix.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kronrod::{self, partial_integration_matrix};
use super::{breakpoints, integrate_oscillatory, panel_frequency, QuadConfig, QuadEstimate};
use crate::error::{Error, Result};
use crate::special_fn::{hardy_z, RSConfig};
use crate::sum::CompensatedSum;

pub const U0_EXPONENT: f64 = 0.5001;

/// U₀ = T^0.5001.
pub fn u0(t: f64) -> f64 {
    t.powf(U0_EXPONENT)
}

/// Open range (ln ln T / ln T, T^{1/ln ln T}) of admissible window lengths.
pub fn admissible_h_range(t: f64) -> (f64, f64) {
    let ln_t = t.ln();
    let lnln = ln_t.ln();
    (lnln / ln_t, (ln_t / lnln).exp())
}

pub fn check_admissible(t: f64, h: f64) -> Result<()> {
    if !(t > std::f64::consts::E.exp()) {
        return Err(Error::domain(format!(
            "T = {t} is too small for the admissible H range (needs ln ln T > 1)"
        )));
    }
    let (lo, hi) = admissible_h_range(t);
    if !(h > lo && h < hi) {
        return Err(Error::domain(format!(
            "H = {h} outside the admissible range ({lo}, {hi}) for T = {t}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "U0")]
    pub u0: f64,
    pub jbar: f64,
    /// jbar / (2π H U₀).
    pub ratio: f64,
    pub jbar_error: f64,
}

/// W(x) = ∫_x^{x+H} Z by direct adaptive quadrature.
pub fn window_integral(x: f64, h: f64, cfg: &QuadConfig, rs: &RSConfig) -> Result<f64> {
    let f = |t: f64| Ok(hardy_z(t, rs));
    Ok(integrate_oscillatory(&f, x, x + h, cfg)?.value)
}

/// Window integrals on a uniform grid over [start, start + span].
#[derive(Debug, Clone)]
pub struct WindowScan {
    pub start: f64,
    pub step: f64,
    pub window: f64,
    /// W at the grid nodes start + i·step, i = 0..=cells.
    pub values: Vec<f64>,
    /// Running integrals from each cell's left node to its Kronrod nodes:
    /// (left window, shifted window). Empty for irregular cells.
    cell_partials: Vec<Option<([f64; 15], [f64; 15])>>,
}

impl WindowScan {
    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    /// W at an arbitrary x inside the scanned range, by direct quadrature
    /// from the nearest grid node on the left.
    pub fn window_at(&self, x: f64, cfg: &QuadConfig, rs: &RSConfig) -> Result<f64> {
        let i = (((x - self.start) / self.step).floor().max(0.0) as usize).min(self.cells() - 1);
        let xi = self.node(i);
        let f = |t: f64| Ok(hardy_z(t, rs));
        let left = integrate_oscillatory(&f, xi, x, cfg)?.value;
        let right = integrate_oscillatory(&f, xi + self.window, x + self.window, cfg)?.value;
        Ok(self.values[i] - left + right)
    }
}

fn cell_is_regular(a: f64, b: f64) -> bool {
    breakpoints(a, b).is_empty()
}

/// Builds the sliding window grid. Cells are sized so that W² advances by
/// at most `osc_factor` radians per cell.
pub fn window_scan(start: f64, span: f64, window: f64, cfg: &QuadConfig, rs: &RSConfig) -> Result<WindowScan> {
    cfg.validate()?;
    rs.validate()?;
    if !(span > 0.0) || !(window > 0.0) {
        return Err(Error::domain("window scan needs positive span and window"));
    }
    if start < 10.0 {
        return Err(Error::OutOfRange {
            what: "scan start",
            value: start,
            min: 10.0,
        });
    }
    let freq = 2.0 * panel_frequency(start + span + window);
    let cells = (span * freq / cfg.osc_factor).ceil().max(1.0) as usize;
    let step = span / cells as f64;
    let nodes = kronrod::nodes();
    let wk = kronrod::kronrod_weights();
    let wg = kronrod::gauss_weights();
    let s = partial_integration_matrix();
    let half = 0.5 * step;
    let z = |t: f64| Ok(hardy_z(t, rs));
    let cell_tol = cfg.abs_tol * step / span;

    // Per cell: increments of both windows and, when the cell is smooth,
    // the running integrals to each node.
    type Cell = (f64, f64, Option<([f64; 15], [f64; 15])>);
    let cells_data: Vec<Result<Cell>> = (0..cells)
        .into_par_iter()
        .map(|i| {
            let a = start + step * i as f64;
            let b = a + step;
            let regular = cell_is_regular(a, b) && cell_is_regular(a + window, b + window);
            if regular {
                let centre = a + half;
                let mut fl = [0.0; 15];
                let mut fr = [0.0; 15];
                for m in 0..15 {
                    let x = centre + half * nodes[m];
                    fl[m] = hardy_z(x, rs);
                    fr[m] = hardy_z(x + window, rs);
                }
                let inc = |v: &[f64; 15]| -> (f64, f64) {
                    let k: f64 = (0..15).map(|m| wk[m] * v[m]).sum();
                    let g: f64 = (0..15).map(|m| wg[m] * v[m]).sum();
                    (k * half, ((k - g) * half).abs())
                };
                let (il, el) = inc(&fl);
                let (ir, er) = inc(&fr);
                if el.max(er) <= cell_tol.max(cfg.rel_tol * il.abs().max(ir.abs())) {
                    let mut pl = [0.0; 15];
                    let mut pr = [0.0; 15];
                    for j in 0..15 {
                        let mut sl = 0.0;
                        let mut sr = 0.0;
                        for m in 0..15 {
                            sl += s[j][m] * fl[m];
                            sr += s[j][m] * fr[m];
                        }
                        pl[j] = sl * half;
                        pr[j] = sr * half;
                    }
                    return Ok((il, ir, Some((pl, pr))));
                }
            }
            let il = integrate_oscillatory(&z, a, b, cfg)?.value;
            let ir = integrate_oscillatory(&z, a + window, b + window, cfg)?.value;
            Ok((il, ir, None))
        })
        .collect();

    let w0 = window_integral(start, window, cfg, rs)?;
    let mut values = Vec::with_capacity(cells + 1);
    let mut partials = Vec::with_capacity(cells);
    let mut acc = CompensatedSum::new();
    acc.add(w0);
    values.push(w0);
    for c in cells_data {
        let (il, ir, p) = c?;
        acc.add(-il);
        acc.add(ir);
        values.push(acc.value());
        partials.push(p);
    }
    Ok(WindowScan {
        start,
        step,
        window,
        values,
        cell_partials: partials,
    })
}

/// Outer integral of W² over the scanned range.
fn integrate_window_square(scan: &WindowScan, cfg: &QuadConfig, rs: &RSConfig) -> Result<QuadEstimate> {
    let span = scan.step * scan.cells() as f64;
    let half = 0.5 * scan.step;
    let cell_tol = cfg.abs_tol * scan.step / span;
    let results: Vec<Result<(f64, f64)>> = (0..scan.cells())
        .into_par_iter()
        .map(|i| {
            let wi = scan.values[i];
            if let Some((pl, pr)) = &scan.cell_partials[i] {
                let mut g = [0.0; 15];
                for j in 0..15 {
                    let w = wi - pl[j] + pr[j];
                    g[j] = w * w;
                }
                let r = kronrod::apply(&g, half);
                let err = r.error();
                if err <= cell_tol.max(cfg.rel_tol * r.resabs) {
                    return Ok((r.kronrod, err));
                }
            }
            let a = scan.node(i);
            let f = |x: f64| {
                let w = scan.window_at(x, cfg, rs)?;
                Ok(w * w)
            };
            let est = integrate_oscillatory(&f, a, a + scan.step, cfg)?;
            Ok((est.value, est.error))
        })
        .collect();
    let mut total = CompensatedSum::new();
    let mut error = CompensatedSum::new();
    for r in results {
        let (v, e) = r?;
        total.add(v);
        error.add(e);
    }
    Ok(QuadEstimate {
        value: total.value(),
        error: error.value(),
    })
}

/// J̄(T, H) with U₀ = T^0.5001, and its ratio to 2πHU₀.
pub fn hl_moment(t: f64, h: f64, cfg: &QuadConfig, rs: &RSConfig) -> Result<MomentReport> {
    if !(t >= 100.0) {
        return Err(Error::OutOfRange {
            what: "T",
            value: t,
            min: 100.0,
        });
    }
    check_admissible(t, h)?;
    let span = u0(t);
    let scan = window_scan(t, span, h, cfg, rs)?;
    let est = integrate_window_square(&scan, cfg, rs)?;
    let jbar = est.value.max(0.0);
    Ok(MomentReport {
        t,
        h,
        u0: span,
        jbar,
        ratio: jbar / (TAU * h * span),
        jbar_error: est.error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissible_range_at_1e5() {
        let (lo, hi) = admissible_h_range(1e5);
        assert!(lo < 1.0 && lo > 0.2);
        assert!(hi > 100.0 && hi < 120.0);
        assert!(check_admissible(1e5, 2.0).is_ok());
        assert!(matches!(check_admissible(1e5, 1e5), Err(Error::Domain(_))));
        assert!(check_admissible(1e5, 0.1).is_err());
    }

    #[test]
    fn sliding_values_match_direct_windows() {
        let cfg = QuadConfig::default();
        let rs = RSConfig::default();
        let scan = window_scan(1000.0, 20.0, 2.0, &cfg, &rs).unwrap();
        for i in [0, 7, scan.cells() / 2, scan.cells()] {
            let direct = window_integral(scan.node(i), 2.0, &cfg, &rs).unwrap();
            assert!((scan.values[i] - direct).abs() < 1e-9, "node {i}");
        }
        let x = 1013.3;
        let direct = window_integral(x, 2.0, &cfg, &rs).unwrap();
        assert!((scan.window_at(x, &cfg, &rs).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn spectral_partials_match_direct() {
        let cfg = QuadConfig::default();
        let rs = RSConfig::default();
        let scan = window_scan(5000.0, 3.0, 1.5, &cfg, &rs).unwrap();
        let nodes = kronrod::nodes();
        for (i, p) in scan.cell_partials.iter().enumerate().step_by(5) {
            let Some((pl, pr)) = p else { continue };
            let a = scan.node(i);
            for j in [0usize, 7, 14] {
                let x = a + 0.5 * scan.step * (1.0 + nodes[j]);
                let w = window_integral(x, 1.5, &cfg, &rs).unwrap();
                assert!((scan.values[i] - pl[j] + pr[j] - w).abs() < 1e-10);
            }
        }
    }
}
