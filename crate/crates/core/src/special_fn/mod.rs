//! Critical-line special functions: θ(t), the Riemann-Siegel Z(t), an
//! independent Euler–Maclaurin ζ(1/2 + it), and the Hardy–Littlewood x(t).

mod gamma;
mod zeta;

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

pub use gamma::ln_gamma;
pub use zeta::em_zeta_half;

/// Below 2π·4 the quadrature layer reads Z from the Euler–Maclaurin oracle.
pub const RS_SWITCH_HEIGHT: f64 = 8.0 * PI;

/// How θ(t) is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ThetaMode {
    /// `(t/2) ln(t/2π) - t/2 - π/8`, error O(1/t).
    MainTerms,
    /// `Im ln Γ(1/4 + it/2) - (t/2) ln π` through the Stirling series.
    ExactGamma,
}

impl std::str::FromStr for ThetaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "main_terms" | "main" => Ok(ThetaMode::MainTerms),
            "exact_gamma" | "exact" => Ok(ThetaMode::ExactGamma),
            other => Err(Error::Parse(format!("unknown theta mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for ThetaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ThetaMode::MainTerms => "main_terms",
            ThetaMode::ExactGamma => "exact_gamma",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RSConfig {
    /// Riemann-Siegel correction terms beyond the main sum (0 or 1).
    pub correction_order: u8,
    pub theta_mode: ThetaMode,
    /// C in the remainder bound `C t^{-1/4}`.
    pub error_constant: f64,
}

impl Default for RSConfig {
    fn default() -> Self {
        Self {
            correction_order: 1,
            theta_mode: ThetaMode::ExactGamma,
            error_constant: 2.0,
        }
    }
}

impl RSConfig {
    pub fn validate(&self) -> Result<()> {
        if self.correction_order > 1 {
            return Err(Error::domain(format!(
                "correction_order must be 0 or 1, got {}",
                self.correction_order
            )));
        }
        if !(self.error_constant > 0.0) {
            return Err(Error::domain(format!(
                "error_constant must be positive, got {}",
                self.error_constant
            )));
        }
        Ok(())
    }

    /// Remainder bound `C t^{-1/4}` at height t.
    pub fn remainder_bound(&self, t: f64) -> f64 {
        self.error_constant * t.powf(-0.25)
    }
}

/// A height on the critical line with its Z, θ and |ζ| values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub t: f64,
    pub z: f64,
    pub theta: f64,
    pub zeta_abs: f64,
}

/// τ(t) = √(t/2π).
pub fn tau(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("tau requires t >= 0, got {t}")));
    }
    Ok((t / TAU).sqrt())
}

pub fn theta(t: f64, mode: ThetaMode) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("theta requires t > 0, got {t}")));
    }
    Ok(theta_unchecked(t, mode))
}

pub(crate) fn theta_unchecked(t: f64, mode: ThetaMode) -> f64 {
    match mode {
        ThetaMode::MainTerms => 0.5 * t * (t / TAU).ln() - 0.5 * t - PI / 8.0,
        ThetaMode::ExactGamma => {
            gamma::ln_gamma(Complex64::new(0.25, 0.5 * t)).im - 0.5 * t * PI.ln()
        }
    }
}

/// Leading term of θ′(t) = ½ ln(t/2π); the local angular frequency of Z.
pub fn theta_prime(t: f64) -> f64 {
    0.5 * (t / TAU).ln()
}

const LOG_TABLE_LEN: usize = 4096;

fn log_table() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..LOG_TABLE_LEN)
            .map(|n| {
                let x = n.max(1) as f64;
                (x.ln(), x.sqrt().recip())
            })
            .collect()
    })
}

/// `(ln n, n^{-1/2})`.
#[inline]
pub(crate) fn log_table_entry(n: usize) -> (f64, f64) {
    if n < LOG_TABLE_LEN {
        log_table()[n]
    } else {
        let x = n as f64;
        (x.ln(), x.sqrt().recip())
    }
}

/// Taylor coefficients of C0(p) = cos(2π(p² - p - 1/16)) / cos(2πp) in
/// powers of (p - 1/2)². The function is entire, so the series is used on
/// the whole of p ∈ [0, 1) and the removable singularities at p = 1/4, 3/4
/// never surface.
const C0_SERIES: [f64; 33] = [
    0.382_683_432_365_089_77,
    1.748_961_872_310_081_8,
    2.118_025_207_685_496_4,
    -0.870_721_667_051_143_92,
    -3.473_311_224_346_516_7,
    -1.662_694_730_899_932_4,
    1.216_731_288_919_232_1,
    1.301_430_416_100_797_6,
    0.030_511_021_827_361_672,
    -0.375_580_305_154_509_52,
    -0.108_578_441_656_406_6,
    0.051_832_902_999_549_623,
    0.029_999_480_619_902_276,
    -0.002_275_939_670_612_564_2,
    -0.004_382_647_416_580_338_3,
    -0.000_406_423_018_372_984_7,
    0.000_400_609_778_542_211_39,
    8.971_057_991_388_841_3e-5,
    -2.302_565_002_723_910_7e-5,
    -9.380_006_601_906_792_5e-6,
    6.323_514_947_609_107_5e-7,
    6.551_022_819_231_501_7e-7,
    2.210_523_745_552_697_3e-8,
    -3.322_316_176_445_628_8e-8,
    -3.734_910_989_933_656_1e-9,
    1.244_506_706_079_774e-9,
    2.476_820_537_650_219_2e-10,
    -3.284_272_816_891_627_2e-11,
    -1.130_540_685_229_840_4e-11,
    4.565_463_979_588_694e-13,
    3.959_848_094_524_921_5e-13,
    7.849_566_221_259_617e-15,
    -1.105_904_315_099_123_3e-14,
];

/// First Riemann-Siegel correction function C0(p), p ∈ [0, 1].
pub fn rs_c0(p: f64) -> f64 {
    let x = p - 0.5;
    let x2 = x * x;
    C0_SERIES.iter().rev().fold(0.0, |acc, &c| acc * x2 + c)
}

/// Riemann-Siegel Z(t): main sum plus, for `correction_order = 1`, the
/// first correction term `(-1)^{N-1} τ^{-1/2} C0(τ - N)`.
pub fn riemann_siegel_z(t: f64, cfg: &RSConfig) -> Result<CriticalPoint> {
    cfg.validate()?;
    if !t.is_finite() || t < TAU {
        return Err(Error::OutOfRange {
            what: "t",
            value: t,
            min: TAU,
        });
    }
    let (z, theta) = rs_sum(t, cfg.correction_order, cfg.theta_mode);
    Ok(CriticalPoint {
        t,
        z,
        theta,
        zeta_abs: z.abs(),
    })
}

/// Unchecked Riemann-Siegel evaluation; returns (Z, θ). Requires t ≥ 2π.
#[inline]
pub(crate) fn rs_sum(t: f64, correction_order: u8, mode: ThetaMode) -> (f64, f64) {
    let th = theta_unchecked(t, mode);
    let tau = (t / TAU).sqrt();
    let n_max = tau.floor() as usize;
    let mut acc = CompensatedSum::new();
    for n in 1..=n_max {
        let (ln_n, inv_sqrt) = log_table_entry(n);
        acc.add(inv_sqrt * (th - t * ln_n).cos());
    }
    let mut z = 2.0 * acc.value();
    if correction_order >= 1 {
        let p = tau - n_max as f64;
        let sign = if n_max % 2 == 1 { 1.0 } else { -1.0 };
        z += sign * tau.sqrt().recip() * rs_c0(p);
    }
    (z, th)
}

/// Z(t) from the Euler–Maclaurin oracle: `Re(e^{iθ(t)} ζ(1/2 + it))`.
pub fn oracle_z(t: f64) -> Result<f64> {
    let zeta = em_zeta_half(t)?;
    let th = if t == 0.0 {
        0.0
    } else {
        theta_unchecked(t, ThetaMode::ExactGamma)
    };
    Ok((Complex64::from_polar(1.0, th) * zeta).re)
}

/// Z(t) for any t ≥ 0: the oracle below 2π·4, Riemann-Siegel above.
/// Used as the integrand by the quadrature layer.
#[inline]
pub(crate) fn hardy_z(t: f64, cfg: &RSConfig) -> f64 {
    if t < RS_SWITCH_HEIGHT {
        // The oracle cannot fail at these heights.
        oracle_z(t).unwrap_or(f64::NAN)
    } else {
        rs_sum(t, cfg.correction_order, cfg.theta_mode).0
    }
}

/// Magnitude of the constant in x(t) = -(π/2)^{1/4} Z(t).
pub fn hl_x_constant() -> f64 {
    (PI / 2.0).powf(0.25)
}

/// Hardy–Littlewood x(t), leading term only (the 1 + O(1/t) factor is dropped).
pub fn hl_x(t: f64, cfg: &RSConfig) -> Result<f64> {
    let cp = riemann_siegel_z(t, cfg)?;
    Ok(-hl_x_constant() * cp.z)
}
