//! The Jacob's ladder φ₁ and its companions.
//!
//! φ₁(T) is the solution y of
//!
//! ```text
//! F(y) = y ln y + (c − ln 2π) y + c₀ = I(T),   I(T) = ∫₀^T Z(u)² du,
//! ```
//!
//! where c is Euler's constant and c₀ is fitted numerically by
//! [`calibrate_c0`]. F is strictly increasing for y above its minimum
//! y* = 2π e^{−1−c} ≈ 1.30, so the solution is unique there. The inverse map
//! solves I(y) = F(x) for y.

mod calibration;
mod primes;

use std::f64::consts::{E, TAU};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::SecondMoment;
use crate::special_fn::{riemann_siegel_z, RS_SWITCH_HEIGHT};
use crate::sum::CompensatedSum;

pub use calibration::{calibrate_c0, geometric_anchors, Calibration, CalibrationArtifact};
pub use primes::{pi_count, PrimePiTable};

/// Lowest height at which ladder values, iterates and Z̃² are evaluated.
pub const LADDER_FLOOR: f64 = RS_SWITCH_HEIGHT;

/// Euler's constant from the harmonic limit H_N − ln N, with the
/// Euler–Maclaurin tail removing the leading error terms.
pub fn euler_gamma() -> f64 {
    const N: u32 = 1000;
    let mut h = CompensatedSum::new();
    for n in (1..=N).rev() {
        h.add(1.0 / n as f64);
    }
    let n = N as f64;
    let n2 = n * n;
    h.add(-n.ln());
    h.add(-1.0 / (2.0 * n));
    h.add(1.0 / (12.0 * n2));
    h.add(-1.0 / (120.0 * n2 * n2));
    h.add(1.0 / (252.0 * n2 * n2 * n2));
    h.value()
}

/// Model for the weight ω(t) in Z̃²(t) = Z(t)²/ω(t).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OmegaMode {
    /// ω(t) = ln t.
    LogLeading,
    /// ω(t) = F′(φ₁(t)) = ln φ₁(t) + 1 + c − ln 2π, the slope that makes
    /// dφ₁/dt = Z̃² exact for the ladder computed here. It equals ln t up to
    /// relative O(ln ln t / ln t).
    LadderSlope,
}

impl FromStr for OmegaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "log_leading" | "log" => Ok(OmegaMode::LogLeading),
            "ladder_slope" | "slope" => Ok(OmegaMode::LadderSlope),
            other => Err(Error::Parse(format!("unknown omega mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for OmegaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OmegaMode::LogLeading => "log_leading",
            OmegaMode::LadderSlope => "ladder_slope",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    pub euler_c: f64,
    pub c0: f64,
    pub omega_mode: OmegaMode,
}

impl Default for LadderConfig {
    /// Uncalibrated: c₀ = 0 until [`calibrate_c0`] or an artifact sets it.
    fn default() -> Self {
        Self {
            euler_c: euler_gamma(),
            c0: 0.0,
            omega_mode: OmegaMode::LogLeading,
        }
    }
}

impl LadderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.euler_c > 0.57 && self.euler_c < 0.58) {
            return Err(Error::domain(format!(
                "euler_c must lie in (0.57, 0.58), got {}",
                self.euler_c
            )));
        }
        if !self.c0.is_finite() {
            return Err(Error::domain(format!("c0 must be finite, got {}", self.c0)));
        }
        Ok(())
    }

    /// F(y) = y ln y + (c − ln 2π) y + c₀.
    pub fn second_moment_form(&self, y: f64) -> f64 {
        y * y.ln() + (self.euler_c - TAU.ln()) * y + self.c0
    }

    /// F′(y) = ln y + 1 + c − ln 2π.
    pub fn form_slope(&self, y: f64) -> f64 {
        y.ln() + 1.0 + self.euler_c - TAU.ln()
    }

    /// Minimum of F, y* = 2π e^{−1−c}.
    pub fn form_minimum(&self) -> f64 {
        TAU * (-1.0 - self.euler_c).exp()
    }

    /// (1 − c)π(T), the predicted gap T − φ₁(T).
    pub fn complement(&self, prime_count: u64) -> f64 {
        (1.0 - self.euler_c) * prime_count as f64
    }
}

/// ω(t) = ln t.
pub fn omega_log(t: f64) -> Result<f64> {
    if !(t > E) {
        return Err(Error::domain(format!("omega requires t > e, got {t}")));
    }
    Ok(t.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    #[serde(rename = "T")]
    pub t: f64,
    pub phi1: f64,
    /// F(φ₁) − I(T) after inversion.
    pub residual: f64,
}

impl LadderPoint {
    /// φ(T) = 2φ₁(T).
    pub fn phi(&self) -> f64 {
        2.0 * self.phi1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    Forward,
    Inverse,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "forward" => Ok(Direction::Forward),
            "inverse" => Ok(Direction::Inverse),
            other => Err(Error::Parse(format!("unknown direction '{other}'"))),
        }
    }
}

/// A ladder bound to a configuration and a cumulative second moment.
#[derive(Debug, Clone)]
pub struct Ladder {
    cfg: LadderConfig,
    moment: Arc<SecondMoment>,
}

impl Ladder {
    pub fn new(cfg: LadderConfig, moment: Arc<SecondMoment>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, moment })
    }

    pub fn config(&self) -> &LadderConfig {
        &self.cfg
    }

    pub fn moment(&self) -> &Arc<SecondMoment> {
        &self.moment
    }

    /// A ladder sharing the table but using a different configuration.
    pub fn with_config(&self, cfg: LadderConfig) -> Result<Self> {
        Self::new(cfg, Arc::clone(&self.moment))
    }

    /// ω(t) under the configured mode.
    pub fn omega(&self, t: f64) -> Result<f64> {
        match self.cfg.omega_mode {
            OmegaMode::LogLeading => omega_log(t),
            OmegaMode::LadderSlope => {
                if !(t > E) {
                    return Err(Error::domain(format!("omega requires t > e, got {t}")));
                }
                Ok(self.cfg.form_slope(self.phi1(t)?.phi1))
            }
        }
    }

    /// Z̃²(t) = Z(t)²/ω(t).
    pub fn ztilde_sq(&self, t: f64) -> Result<f64> {
        if !(t >= LADDER_FLOOR) {
            return Err(Error::domain(format!(
                "ztilde_sq requires t >= {LADDER_FLOOR}, got {t}"
            )));
        }
        let z = riemann_siegel_z(t, self.moment.rs_config())?.z;
        Ok(z * z / self.omega(t)?)
    }

    /// dφ₁/dt = Z(t)²/F′(φ₁(t)), by differentiating F(φ₁(t)) = I(t).
    pub fn phi1_derivative(&self, t: f64) -> Result<f64> {
        let z = riemann_siegel_z(t, self.moment.rs_config())?.z;
        Ok(z * z / self.cfg.form_slope(self.phi1(t)?.phi1))
    }

    /// φ₁(T), solved by Newton's method on F(y) = I(T) with a bisection
    /// safeguard inside [max(1, y*), T].
    pub fn phi1(&self, t: f64) -> Result<LadderPoint> {
        if !(t >= LADDER_FLOOR) || !t.is_finite() {
            return Err(Error::domain(format!("phi1 requires T >= {LADDER_FLOOR}, got {t}")));
        }
        let target = self.moment.cumulative(t)?;
        let f = |y: f64| self.cfg.second_moment_form(y) - target;
        let mut lo = self.cfg.form_minimum().max(1.0);
        let mut hi = t;
        let (f_lo, f_hi) = (f(lo), f(hi));
        if f_lo > 0.0 || f_hi < 0.0 {
            return Err(Error::Calibration(format!(
                "F(y) = I({t}) = {target} has no root in ({lo}, {t}): F ranges over [{}, {}] (c0 = {})",
                f_lo + target,
                f_hi + target,
                self.cfg.c0
            )));
        }
        let guess = t - (1.0 - self.cfg.euler_c) * t / t.ln();
        let mut y = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
        for _ in 0..200 {
            let fy = f(y);
            if fy == 0.0 {
                break;
            }
            if fy > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            let mut next = y - fy / self.cfg.form_slope(y);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - y).abs() <= 2.0 * f64::EPSILON * y;
            y = next;
            if done || hi - lo <= 2.0 * f64::EPSILON * hi {
                break;
            }
        }
        let residual = f(y);
        let bound = 1e-6 * target;
        if residual.abs() > bound {
            return Err(Error::precision(format!("phi1({t}) inversion"), y, residual.abs()));
        }
        Ok(LadderPoint { t, phi1: y, residual })
    }

    /// φ₁⁻¹(x), the height y > x with φ₁(y) = x, from I(y) = F(x).
    pub fn phi1_inverse(&self, x: f64) -> Result<f64> {
        if !(x >= LADDER_FLOOR) || !x.is_finite() {
            return Err(Error::Range(format!(
                "phi1_inverse requires x >= {LADDER_FLOOR}, got {x}"
            )));
        }
        let target = self.cfg.second_moment_form(x);
        if !(target > 0.0) {
            return Err(Error::Range(format!(
                "F({x}) = {target} is not a second-moment value"
            )));
        }
        let y = self.moment.solve(target)?;
        if !(y > x) {
            return Err(Error::Range(format!(
                "phi1_inverse({x}) = {y} does not lie above x (c0 = {})",
                self.cfg.c0
            )));
        }
        Ok(y)
    }

    /// [t, φ₁(t), …, φ₁^k(t)] or the inverse chain.
    pub fn phi1_iterates(&self, t: f64, k: usize, direction: Direction) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(k + 1);
        out.push(t);
        for r in 1..=k {
            let prev = out[r - 1];
            let next = match direction {
                Direction::Forward => self.phi1(prev).map(|p| p.phi1),
                Direction::Inverse => self.phi1_inverse(prev),
            }
            .map_err(|e| Error::Range(format!("iterate {r} from {prev} failed: {e}")))?;
            if next < LADDER_FLOOR {
                return Err(Error::Range(format!(
                    "iterate {r} = {next} fell below {LADDER_FLOOR}"
                )));
            }
            out.push(next);
        }
        Ok(out)
    }

    /// (T − φ₁(T)) / ((1 − c)π(T)).
    pub fn complement_ratio(&self, t: f64, primes: &PrimePiTable) -> Result<f64> {
        let p = self.phi1(t)?;
        Ok((t - p.phi1) / self.cfg.complement(primes.count_real(t)?))
    }
}

/// Default calibration anchors: forty heights spaced geometrically over
/// [10⁴, 10⁵].
pub fn default_anchors() -> Vec<f64> {
    geometric_anchors(1e4, 1e5, 40)
}
