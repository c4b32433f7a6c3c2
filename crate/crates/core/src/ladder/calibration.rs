//! Numerical determination of the additive constant c₀.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{primes::PrimePiTable, LadderConfig};
use crate::error::{Error, Result};
use crate::quadrature::SecondMoment;
use crate::sum::compensated_sum;

/// Fit of c₀ over a set of anchor heights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub c0: f64,
    pub anchors: Vec<f64>,
    /// Per-anchor misfit I(T) − F(y_T) with the fitted c₀.
    pub residuals: Vec<f64>,
    pub rms: f64,
    /// Standard error of the fitted constant, rms / √(n − 1).
    pub standard_error: f64,
}

/// Least-squares c₀ over `anchors`.
///
/// At each anchor the ladder value is pinned by the complement relation,
/// y_T = T − (1 − c)π(T), and c₀ is the constant minimizing
/// Σ (F_{c₀}(y_T) − I(T))². Since F is affine in c₀ the minimizer is the
/// mean of I(T) − F₀(y_T). The fitted value is written into `cfg`.
pub fn calibrate_c0(
    anchors: &[f64],
    cfg: &mut LadderConfig,
    moment: &SecondMoment,
    primes: &PrimePiTable,
) -> Result<Calibration> {
    if anchors.len() < 2 {
        return Err(Error::Calibration(format!(
            "need at least two anchors, got {}",
            anchors.len()
        )));
    }
    let mut offsets = Vec::with_capacity(anchors.len());
    for &t in anchors {
        if !(t > std::f64::consts::E.powf(std::f64::consts::E)) || !t.is_finite() {
            return Err(Error::Calibration(format!("anchor {t} is too small")));
        }
        let y = t - (1.0 - cfg.euler_c) * primes.count_real(t)? as f64;
        let i = moment.cumulative(t)?;
        let uncalibrated = LadderConfig { c0: 0.0, ..*cfg };
        offsets.push(i - uncalibrated.second_moment_form(y));
    }
    let n = offsets.len() as f64;
    let c0 = compensated_sum(offsets.iter().copied()) / n;
    let residuals: Vec<f64> = offsets.iter().map(|o| o - c0).collect();
    let rms = (compensated_sum(residuals.iter().map(|r| r * r)) / n).sqrt();
    if !c0.is_finite() || !rms.is_finite() {
        return Err(Error::Calibration("least-squares fit did not converge".into()));
    }
    cfg.c0 = c0;
    Ok(Calibration {
        c0,
        anchors: anchors.to_vec(),
        residuals,
        rms,
        standard_error: rms / (n - 1.0).sqrt(),
    })
}

/// `count` anchors spaced geometrically over [lo, hi].
pub fn geometric_anchors(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| {
                if i + 1 == count {
                    hi
                } else {
                    (lo.ln() + (hi / lo).ln() * i as f64 / (count - 1) as f64).exp().round()
                }
            })
            .collect(),
    }
}

/// The pinned calibration result, stored as `key=value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationArtifact {
    pub euler_c: f64,
    pub c0: f64,
    pub smtable_fingerprint: String,
    pub anchors: Vec<f64>,
}

impl CalibrationArtifact {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "euler_c={}", self.euler_c);
        let _ = writeln!(out, "c0={}", self.c0);
        let _ = writeln!(out, "smtable_fingerprint={}", self.smtable_fingerprint);
        let anchors: Vec<String> = self.anchors.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(out, "calibrated_at_anchors={}", anchors.join(","));
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut euler_c = None;
        let mut c0 = None;
        let mut fingerprint = None;
        let mut anchors = None;
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{line}'")))?;
            let num = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{k}: {e}")))
            };
            match k.trim() {
                "euler_c" => euler_c = Some(num(v)?),
                "c0" => c0 = Some(num(v)?),
                "smtable_fingerprint" => fingerprint = Some(v.trim().to_string()),
                "calibrated_at_anchors" => {
                    anchors = Some(
                        v.split(',')
                            .filter(|s| !s.trim().is_empty())
                            .map(num)
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                _ => {}
            }
        }
        let missing = |key: &str| Error::Parse(format!("calibration artifact lacks {key}"));
        Ok(Self {
            euler_c: euler_c.ok_or_else(|| missing("euler_c"))?,
            c0: c0.ok_or_else(|| missing("c0"))?,
            smtable_fingerprint: fingerprint.ok_or_else(|| missing("smtable_fingerprint"))?,
            anchors: anchors.unwrap_or_default(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
        std::fs::write(&tmp, self.to_text())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Fails unless the artifact was produced against `fingerprint`.
    pub fn check_fingerprint(&self, fingerprint: &str) -> Result<()> {
        if self.smtable_fingerprint != fingerprint {
            return Err(Error::Integrity(format!(
                "calibration was made against table {}, current table is {fingerprint}",
                self.smtable_fingerprint
            )));
        }
        Ok(())
    }
}
