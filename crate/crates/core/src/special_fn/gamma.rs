//! Complex log-gamma by the Stirling series.

use num_complex::Complex64;

/// `B_{2k} / (2k (2k-1))` for k = 1..=5 (through B10).
const STIRLING: [f64; 5] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
];

/// Below this modulus the argument is shifted upward by the recurrence
/// `ln Γ(z) = ln Γ(z + 1) - ln z` before the series is applied. At |z| ≥ 10
/// the first omitted term (B12) is below 3e-14.
const SHIFT_RADIUS: f64 = 10.0;

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Continuous branch of `ln Γ(z)` for `Re z > 0`.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    debug_assert!(z.re > 0.0);
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.norm() < SHIFT_RADIUS {
        shift += z.ln();
        z += 1.0;
    }
    let ln_z = z.ln();
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for c in STIRLING {
        series += pow * c;
        pow *= inv2;
    }
    (z - 0.5) * ln_z - z + HALF_LN_TWO_PI + series - shift
}
