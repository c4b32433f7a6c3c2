mod common;

use proptest::prelude::*;
use zeta_ladder::ladder::{
    calibrate_c0, default_anchors, euler_gamma, geometric_anchors, pi_count, Direction,
    LadderConfig, OmegaMode, PrimePiTable,
};
use zeta_ladder::quadrature::{integrate_oscillatory, QuadConfig};
use zeta_ladder::roots::{bisect, RootOptions};
use zeta_ladder::special_fn::{riemann_siegel_z, RSConfig};
use zeta_ladder::Error;

use common::{calibrated_ladder, moment, primes};

/// Segmented sieve of Eratosthenes, independent of the odd-only table.
fn segmented_pi(limit: u64) -> u64 {
    let root = (limit as f64).sqrt() as u64 + 1;
    let mut small = vec![true; root as usize + 1];
    let mut base = Vec::new();
    for i in 2..=root as usize {
        if small[i] {
            base.push(i as u64);
            let mut j = i * i;
            while j <= root as usize {
                small[j] = false;
                j += i;
            }
        }
    }
    let seg = 32_768u64;
    let mut count = 0;
    let mut lo = 2;
    while lo <= limit {
        let hi = (lo + seg - 1).min(limit);
        let mut mark = vec![true; (hi - lo + 1) as usize];
        for &p in &base {
            let start = (p * p).max(lo.div_ceil(p) * p);
            let mut m = start;
            while m <= hi {
                mark[(m - lo) as usize] = false;
                m += p;
            }
        }
        count += mark.iter().filter(|&&b| b).count() as u64;
        lo = hi + 1;
    }
    count
}

#[test]
fn prime_counts() {
    let table = PrimePiTable::new(1_000_000);
    assert_eq!(pi_count(10, &table).unwrap(), 4);
    assert_eq!(pi_count(100, &table).unwrap(), 25);
    assert_eq!(pi_count(1, &table).unwrap(), 0);
    assert_eq!(pi_count(2, &table).unwrap(), 1);
    let expect = segmented_pi(1_000_000);
    assert_eq!(expect, 78_498);
    assert_eq!(pi_count(1_000_000, &table).unwrap(), expect);
    assert_eq!(pi_count(99_991, &table).unwrap(), segmented_pi(99_991));
    assert!(matches!(pi_count(1_000_001, &table), Err(Error::Range(_))));
}

#[test]
fn euler_constant_from_limit() {
    // Plain partial sums without acceleration converge like 1/(2N).
    let n = 1_000_000u32;
    let h: f64 = (1..=n).rev().map(|k| 1.0 / k as f64).sum();
    let crude = h - (n as f64).ln() - 0.5 / n as f64;
    let c = euler_gamma();
    assert!((c - crude).abs() < 1e-12);
    assert!(LadderConfig::default().validate().is_ok());
    assert!(LadderConfig { euler_c: 0.6, ..Default::default() }.validate().is_err());
}

#[test]
fn phi1_solves_defining_equation() {
    let ladder = calibrated_ladder();
    let sm = moment();
    for t in [1e4, 1e5] {
        let p = ladder.phi1(t).unwrap();
        let i = sm.cumulative(t).unwrap();
        let f = ladder.config().second_moment_form(p.phi1);
        assert!((f - i).abs() <= 1e-6 * i, "t = {t}");
        assert!(p.phi1 < t && p.phi1 > 0.0);
        assert_eq!(p.phi(), 2.0 * p.phi1);
    }
}

#[test]
fn complement_law() {
    let ladder = calibrated_ladder();
    let r4 = ladder.complement_ratio(1e4, primes()).unwrap();
    let r5 = ladder.complement_ratio(1e5, primes()).unwrap();
    assert!((0.6..=1.4).contains(&r4), "ratio at 1e4 = {r4}");
    assert!((0.7..=1.3).contains(&r5), "ratio at 1e5 = {r5}");
    assert!((r5 - 1.0).abs() <= (r4 - 1.0).abs());
}

#[test]
fn inverse_gap_follows_complement() {
    let ladder = calibrated_ladder();
    let x = 1e5;
    let y = ladder.phi1_inverse(x).unwrap();
    let predicted = ladder.config().complement(primes().count(100_000).unwrap());
    assert!(((y - x) / predicted - 1.0).abs() < 0.3);
    let back = ladder.phi1(y).unwrap().phi1;
    assert!((back - x).abs() <= 1e-6 * x);
}

#[test]
fn inverse_is_increasing() {
    let ladder = calibrated_ladder();
    let grid: Vec<f64> = (0..20).map(|i| 2e4 + 3e3 * i as f64).collect();
    let ys: Vec<f64> = grid.iter().map(|&x| ladder.phi1_inverse(x).unwrap()).collect();
    assert!(ys.windows(2).all(|w| w[1] > w[0]));
    assert!(ys.iter().zip(&grid).all(|(y, x)| y > x));
}

#[test]
fn iterates() {
    let ladder = calibrated_ladder();
    assert_eq!(ladder.phi1_iterates(5e4, 0, Direction::Forward).unwrap(), vec![5e4]);
    let up = ladder.phi1_iterates(1e5, 2, Direction::Inverse).unwrap();
    assert_eq!(up.len(), 3);
    let predicted = ladder.config().complement(primes().count(100_000).unwrap());
    for w in up.windows(2) {
        let gap = (w[1] - w[0]) / predicted;
        assert!((gap - 1.0).abs() < 0.3, "gap ratio {gap}");
    }
    let down = ladder.phi1_iterates(up[2], 2, Direction::Forward).unwrap();
    for (a, b) in down.iter().rev().zip(&up) {
        assert!((a - b).abs() <= 1e-6 * b);
    }
    let err = ladder.phi1_iterates(30.0, 3, Direction::Forward).unwrap_err();
    assert!(matches!(err, Error::Range(_)), "{err}");
}

#[test]
fn calibration_quality() {
    let sm = moment();
    let mut cfg = LadderConfig::default();
    let three = calibrate_c0(&geometric_anchors(1e4, 1e5, 3), &mut cfg, &sm, primes()).unwrap();
    let ten = calibrate_c0(&geometric_anchors(1e4, 1e5, 10), &mut cfg, &sm, primes()).unwrap();
    assert!(ten.rms < three.rms, "{} vs {}", ten.rms, three.rms);
    assert!(ten.standard_error < three.standard_error);
    assert_eq!(cfg.c0, ten.c0);

    // Interleaved folds of the default grid are disjoint anchor sets.
    let all = default_anchors();
    let even: Vec<f64> = all.iter().step_by(2).copied().collect();
    let odd: Vec<f64> = all.iter().skip(1).step_by(2).copied().collect();
    let full = calibrate_c0(&all, &mut cfg, &sm, primes()).unwrap().c0;
    let a = calibrate_c0(&even, &mut cfg, &sm, primes()).unwrap().c0;
    let b = calibrate_c0(&odd, &mut cfg, &sm, primes()).unwrap().c0;
    assert!((a - b).abs() < 0.05 * full.abs(), "folds {a} and {b}");

    assert!(matches!(
        calibrate_c0(&[1e4], &mut cfg, &sm, primes()),
        Err(Error::Calibration(_))
    ));
}

#[test]
fn c0_offset_is_detected() {
    let ladder = calibrated_ladder();
    let cfg = *ladder.config();
    let shifted = ladder
        .with_config(LadderConfig { c0: cfg.c0 + 1e3, ..cfg })
        .unwrap();
    let r = shifted.complement_ratio(1e4, primes()).unwrap();
    assert!(!(0.7..=1.3).contains(&r), "offset ratio {r}");
}

#[test]
fn derivative_matches_weighted_square() {
    let ladder = calibrated_ladder();
    let exact = ladder
        .with_config(LadderConfig { omega_mode: OmegaMode::LadderSlope, ..*ladder.config() })
        .unwrap();
    let h = 1e-3;
    for t in [12_345.6, 47_000.25, 99_000.0] {
        let fd = (exact.phi1(t + h).unwrap().phi1 - exact.phi1(t - h).unwrap().phi1) / (2.0 * h);
        let d = exact.ztilde_sq(t).unwrap();
        assert!((fd - d).abs() <= 1e-5 * (1.0 + d), "t = {t}: {fd} vs {d}");
        assert_eq!(d, exact.phi1_derivative(t).unwrap());
        // The leading ω = ln t differs from the slope by O(ln ln t / ln t).
        let lead = ladder.ztilde_sq(t).unwrap();
        if d > 1e-3 {
            assert!((lead / d - 1.0).abs() < 0.06);
        }
    }
}

#[test]
fn increment_is_integral_of_weighted_square() {
    let ladder = calibrated_ladder();
    let exact = ladder
        .with_config(LadderConfig { omega_mode: OmegaMode::LadderSlope, ..*ladder.config() })
        .unwrap();
    let (a, b) = (1e4, 1e4 + 100.0);
    let q = QuadConfig::default();
    let f = |t: f64| exact.ztilde_sq(t);
    let lhs = integrate_oscillatory(&f, a, b, &q).unwrap();
    let rhs = exact.phi1(b).unwrap().phi1 - exact.phi1(a).unwrap().phi1;
    assert!((lhs.value - rhs).abs() <= 1e-6 * rhs + lhs.error, "{} vs {rhs}", lhs.value);

    // With ω = ln t the same identity holds only to the size of the
    // neglected O-term.
    let g = |t: f64| ladder.ztilde_sq(t);
    let lead = integrate_oscillatory(&g, a, b, &q).unwrap().value;
    assert!((lead / rhs - 1.0).abs() < 0.06, "{lead} vs {rhs}");
}

#[test]
fn ztilde_sq_vanishes_at_zero() {
    let ladder = calibrated_ladder();
    let rs = RSConfig::default();
    let z = |t: f64| Ok(riemann_siegel_z(t, &rs)?.z);
    let mut a = 1e4;
    while z(a).unwrap().signum() == z(a + 0.05).unwrap().signum() {
        a += 0.05;
    }
    let gamma = bisect(z, a, a + 0.05, RootOptions::default()).unwrap();
    assert!(ladder.ztilde_sq(gamma).unwrap() < 1e-20);
    assert!(ladder.ztilde_sq(gamma + 0.1).unwrap() > 0.0);
    assert!(ladder.ztilde_sq(10.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi1_is_monotone(t in 1_000.0f64..100_000.0, dt in 0.0f64..50.0) {
        let ladder = calibrated_ladder();
        let a = ladder.phi1(t).unwrap().phi1;
        let b = ladder.phi1(t + dt).unwrap().phi1;
        prop_assert!(b >= a);
    }

    #[test]
    fn inverse_round_trip(x in 5_000.0f64..100_000.0) {
        let ladder = calibrated_ladder();
        let y = ladder.phi1_inverse(x).unwrap();
        let back = ladder.phi1(y).unwrap().phi1;
        prop_assert!((back - x).abs() <= 1e-6 * x);
    }

    #[test]
    fn ztilde_sq_nonnegative(t in 30.0f64..100_000.0) {
        prop_assert!(calibrated_ladder().ztilde_sq(t).unwrap() >= 0.0);
    }
}
