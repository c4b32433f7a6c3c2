use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use zeta_ladder::roots::{bisect, RootOptions};
use zeta_ladder::special_fn::{
    em_zeta_half, hl_x, oracle_z, riemann_siegel_z, theta, RSConfig, ThetaMode,
};

/// ζ(1/2) through the alternating η series, accelerated with the
/// Cohen–Rodriguez Villegas–Zagier weights: ζ(s) = η(s) / (1 - 2^{1-s}).
fn zeta_half_via_eta() -> f64 {
    let n = 40;
    let d = (3.0 + 8f64.sqrt()).powi(n);
    let d = (d + 1.0 / d) / 2.0;
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    for k in 0..n {
        c = b - c;
        s += c / ((k + 1) as f64).sqrt();
        let kf = k as f64;
        let nf = n as f64;
        b = (kf + nf) * (kf - nf) * b / ((kf + 0.5) * (kf + 1.0));
    }
    let eta = s / d;
    eta / (1.0 - 2f64.sqrt())
}

#[test]
fn em_zeta_at_half_matches_eta_oracle() {
    let oracle = zeta_half_via_eta();
    assert!((oracle - (-1.460_354_508_809_586_8)).abs() < 1e-13);
    let v = em_zeta_half(0.0).unwrap();
    assert!((v.re - oracle).abs() < 1e-12, "{} vs {}", v.re, oracle);
    assert!(v.im.abs() < 1e-15);
}

// Reference values from a 40-digit evaluation of ζ(1/2 + it).
const ZETA_REFERENCE: [(f64, f64, f64); 5] = [
    (1.5, 0.349_620_929_440_332_46, -0.482_148_161_331_776_05),
    (100.0, 2.692_619_885_681_324, -0.020_386_029_602_598_162),
    (1000.0, 0.356_334_367_194_396_05, 0.931_997_831_232_993_7),
    (12345.678, 0.877_755_482_563_393_1, -0.037_627_073_720_102_79),
    (99999.5, 2.093_241_298_385_043_8, 1.639_503_325_583_379_4),
];

#[test]
fn em_zeta_matches_reference_values() {
    for (t, re, im) in ZETA_REFERENCE {
        let v = em_zeta_half(t).unwrap();
        let err = (v - Complex64::new(re, im)).norm();
        // Phase rounding of t ln n dominates at large t.
        let tol = 1e-12 + 2e-15 * t;
        assert!(err < tol, "t = {t}: error {err:e}");
    }
}

#[test]
fn theta_exact_gamma_reference() {
    let cases: [(f64, f64); 4] = [
        (10.0, -3.067_074_396_289_895_3),
        (100.0, 87.972_165_231_787_22),
        (1000.0, 2034.546_428_038_031_6),
        (1e5, 433_752.027_229_170_8),
    ];
    for (t, expect) in cases {
        let v = theta(t, ThetaMode::ExactGamma).unwrap();
        let tol = 1e-11 * expect.abs().max(1.0);
        assert!((v - expect).abs() < tol, "t = {t}: {v} vs {expect}");
    }
}

#[test]
fn theta_derivative_at_two_pi_e() {
    let t = TAU * std::f64::consts::E;
    let h = 1e-4;
    for mode in [ThetaMode::MainTerms, ThetaMode::ExactGamma] {
        let d = (theta(t + h, mode).unwrap() - theta(t - h, mode).unwrap()) / (2.0 * h);
        assert!((d - 0.5).abs() < 1e-3 + 1.0 / t, "{mode}: {d}");
    }
}

#[test]
fn theta_derivative_tracks_log_over_range() {
    let mut t = 10.0f64;
    while t <= 1e5 {
        let h = 1e-3 * t.max(1.0).sqrt();
        let d = (theta(t + h, ThetaMode::ExactGamma).unwrap()
            - theta(t - h, ThetaMode::ExactGamma).unwrap())
            / (2.0 * h);
        let expect = 0.5 * (t / TAU).ln();
        assert!((d - expect).abs() <= (1e-6f64).max(1.0 / t), "t = {t}");
        t *= 1.37;
    }
}

#[test]
fn first_zero_by_oracle_bisection() {
    let gamma1 = bisect(oracle_z, 14.0, 14.3, RootOptions { x_tol: 1e-12, ..Default::default() }).unwrap();
    assert!((gamma1 - 14.134_725_141_734_694).abs() < 1e-6);
    let cfg = RSConfig::default();
    let z = riemann_siegel_z(gamma1, &cfg).unwrap();
    assert!(z.z.abs() <= cfg.remainder_bound(gamma1));
}

#[test]
fn first_sign_change_of_rs_sum() {
    // The Riemann-Siegel sum has its own sign change within the remainder
    // bound of γ₁; bisecting on it drives |Z| below 1e-4.
    let cfg = RSConfig::default();
    let f = |t: f64| Ok(riemann_siegel_z(t, &cfg).unwrap().z);
    let root = bisect(f, 14.0, 14.3, RootOptions { x_tol: 1e-13, ..Default::default() }).unwrap();
    assert!(riemann_siegel_z(root, &cfg).unwrap().z.abs() < 1e-4);
    assert!((root - 14.134_725_141_734_694).abs() < 1e-2);
}

#[test]
fn zero_count_below_one_hundred() {
    let cfg = RSConfig::default();
    let mut prev = riemann_siegel_z(10.0, &cfg).unwrap().z;
    let mut changes = 0;
    for i in 1..=9000 {
        let t = 10.0 + i as f64 * 0.01;
        let z = riemann_siegel_z(t, &cfg).unwrap().z;
        if z.signum() != prev.signum() {
            changes += 1;
        }
        prev = z;
    }
    assert_eq!(changes, 29);
    // Counting identity N(T) ≈ θ(T)/π + 1.
    let n_est = theta(100.0, ThetaMode::ExactGamma).unwrap() / PI + 1.0;
    assert_eq!(n_est.round() as i32, 29);
}

#[test]
fn rs_against_oracle_on_random_heights() {
    let cfg = RSConfig::default();
    let mut state = 0x2545_f491_4f6c_dd1du64;
    for _ in 0..200 {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let u = (state >> 11) as f64 / (1u64 << 53) as f64;
        let t = 50.0 + u * 4950.0;
        let z = riemann_siegel_z(t, &cfg).unwrap();
        let o = oracle_z(t).unwrap();
        assert!((z.z - o).abs() <= cfg.remainder_bound(t), "t = {t}");
    }
}

#[test]
fn modulus_agreement_at_fixed_heights() {
    let cfg = RSConfig::default();
    for t in [100.0, 1000.0] {
        let zeta = em_zeta_half(t).unwrap().norm();
        let z = riemann_siegel_z(t, &cfg).unwrap();
        assert!((zeta - z.zeta_abs).abs() <= cfg.remainder_bound(t));
        assert_eq!(z.zeta_abs, z.z.abs());
    }
}

#[test]
fn rotated_zeta_is_real_at_500() {
    let t = 500.0;
    let th = theta(t, ThetaMode::ExactGamma).unwrap();
    let v = Complex64::from_polar(1.0, th) * em_zeta_half(t).unwrap();
    assert!(v.im.abs() < 1e-8);
}

#[test]
fn order_zero_is_literal_main_sum() {
    let cfg = RSConfig {
        correction_order: 0,
        ..RSConfig::default()
    };
    let t = 1000.0f64;
    let th = theta(t, cfg.theta_mode).unwrap();
    let n = (t / TAU).sqrt().floor() as usize;
    let direct: f64 = 2.0
        * (1..=n)
            .map(|k| (k as f64).powf(-0.5) * (th - t * (k as f64).ln()).cos())
            .sum::<f64>();
    let z = riemann_siegel_z(t, &cfg).unwrap().z;
    assert!((z - direct).abs() < 1e-12);
}

#[test]
fn hl_x_vanishes_near_a_zero() {
    let cfg = RSConfig::default();
    let f = |t: f64| Ok(riemann_siegel_z(t, &cfg).unwrap().z);
    let root = bisect(f, 20.5, 21.5, RootOptions { x_tol: 1e-13, ..Default::default() }).unwrap();
    assert!(hl_x(root, &cfg).unwrap().abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reality_of_rotated_zeta(t in 10.0f64..1e5) {
        // ζ(1/2 + it) = e^{-iθ} Z(t) with Z real, so e^{iθ} ζ is real.
        let th = theta(t, ThetaMode::ExactGamma).unwrap();
        let zrot = Complex64::from_polar(1.0, th) * em_zeta_half(t).unwrap();
        prop_assert!(zrot.im.abs() <= 1e-8, "t = {}, im = {}", t, zrot.im);
    }

    #[test]
    fn theta_modes_agree(t in 10.0f64..1e6) {
        let a = theta(t, ThetaMode::MainTerms).unwrap();
        let b = theta(t, ThetaMode::ExactGamma).unwrap();
        prop_assert!((a - b).abs() <= 1.0 / t);
    }

    #[test]
    fn rs_within_remainder_of_oracle(t in 50.0f64..1e5) {
        let cfg = RSConfig::default();
        let z = riemann_siegel_z(t, &cfg).unwrap().z;
        let o = oracle_z(t).unwrap();
        prop_assert!((z - o).abs() <= cfg.remainder_bound(t));
    }
}
