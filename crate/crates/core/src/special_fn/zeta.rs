//! Euler–Maclaurin evaluation of ζ(1/2 + it), used as an oracle for the
//! Riemann-Siegel main sum.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

const MAX_TAIL_TERMS: usize = 40;

/// Terms smaller than this (absolute) end the Bernoulli tail.
const TAIL_CUTOFF: f64 = 1e-17;

/// Budget on the direct sum; beyond it the oracle refuses.
const MAX_DIRECT_TERMS: usize = 50_000_000;

/// `B_{2k} / (2k)!` for k = 1..=MAX_TAIL_TERMS, from
/// `B_{2k}/(2k)! = (-1)^{k+1} 2 ζ(2k) / (2π)^{2k}`.
fn bernoulli_ratios() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let two_pi = 2.0 * std::f64::consts::PI;
        (1..=MAX_TAIL_TERMS)
            .map(|k| {
                let s = 2 * k as i32;
                let zeta = even_zeta(s);
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * 2.0 * zeta / two_pi.powi(s)
            })
            .collect()
    })
}

fn even_zeta(s: i32) -> f64 {
    let pi = std::f64::consts::PI;
    match s {
        2 => pi * pi / 6.0,
        4 => pi.powi(4) / 90.0,
        6 => pi.powi(6) / 945.0,
        8 => pi.powi(8) / 9450.0,
        _ => {
            // Direct head plus an Euler–Maclaurin estimate of the tail.
            let head: f64 = (1..=20).rev().map(|n| (n as f64).powi(-s)).sum();
            let m = 21.0f64;
            let tail = m.powi(1 - s) / (s - 1) as f64 + 0.5 * m.powi(-s);
            head + tail
        }
    }
}

/// ζ(1/2 + it) by Euler–Maclaurin summation with cutoff N ≈ t/π + 10.
///
/// The truncation keeps |s|/(2πN) ≤ 1/2 so the Bernoulli tail decays
/// geometrically; the direct sum uses compensated accumulation in
/// ascending n.
pub fn em_zeta_half(t: f64) -> Result<Complex64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("em_zeta_half requires t >= 0, got {t}")));
    }
    let n_cut = (t / std::f64::consts::PI).ceil() as usize + 10;
    if n_cut > MAX_DIRECT_TERMS {
        return Err(Error::precision(
            format!("t = {t} needs {n_cut} direct terms, above the budget"),
            f64::NAN,
            f64::INFINITY,
        ));
    }
    let s = Complex64::new(0.5, t);

    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for n in 1..n_cut {
        let (ln_n, inv_sqrt) = super::log_table_entry(n);
        let (sin, cos) = (t * ln_n).sin_cos();
        re.add(inv_sqrt * cos);
        im.add(-inv_sqrt * sin);
    }

    let n = n_cut as f64;
    let ln_n = n.ln();
    // N^{-s}
    let n_pow_s = Complex64::from_polar(n.sqrt().recip(), -t * ln_n);
    let mut total = Complex64::new(re.value(), im.value());
    total += n_pow_s * n / (s - 1.0);
    total += n_pow_s * 0.5;

    let ratios = bernoulli_ratios();
    let mut poch = s; // s (s+1) ... (s+2k-2)
    let mut npow = n_pow_s / n; // N^{-s-2k+1}
    let inv_n2 = 1.0 / (n * n);
    let mut prev = f64::INFINITY;
    for (k, &b) in ratios.iter().enumerate() {
        let term = poch * npow * b;
        let size = term.norm();
        if size > prev {
            return Err(Error::precision(
                format!("Euler-Maclaurin tail diverges at k = {} for t = {t}", k + 1),
                total.norm(),
                prev,
            ));
        }
        total += term;
        if size < TAIL_CUTOFF {
            return Ok(total);
        }
        prev = size;
        let j = 2.0 * (k as f64 + 1.0);
        poch *= (s + (j - 1.0)) * (s + j);
        npow *= inv_n2;
    }
    Err(Error::precision(
        format!("Euler-Maclaurin tail not converged for t = {t}"),
        total.norm(),
        prev,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_ratios_match_rationals() {
        let r = bernoulli_ratios();
        // B2/2! = 1/12, B4/4! = -1/720, B6/6! = 1/30240
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(r[0], 1.0 / 12.0) < 1e-15);
        assert!(rel(r[1], -1.0 / 720.0) < 1e-15);
        assert!(rel(r[2], 1.0 / 30240.0) < 1e-15);
        // B10/10! = 5/66 / 3628800
        assert!(((r[4] - 5.0 / 66.0 / 3_628_800.0) / r[4]).abs() < 1e-14);
    }

    #[test]
    fn rejects_negative_height() {
        assert!(matches!(em_zeta_half(-1.0), Err(Error::Domain(_))));
        assert!(em_zeta_half(f64::NAN).is_err());
    }
}
