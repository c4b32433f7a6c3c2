//! Effective configuration: command-line flags override a `key=value`
//! config file, which overrides built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use zeta_ladder::factorization::FactorizationConfig;
use zeta_ladder::ladder::{LadderConfig, OmegaMode};
use zeta_ladder::quadrature::QuadConfig;
use zeta_ladder::special_fn::{RSConfig, ThetaMode};

use crate::error::{CliError, CliResult};

pub const DEFAULT_CACHE_DIR: &str = ".zlcache";

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Plain key=value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Cache directory for second-moment tables, calibrations and results.
    #[arg(long, global = true, env = "ZL_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Primary output file (stdout when omitted).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Where to write the run manifest.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_depth: Option<u32>,
    #[arg(long, global = true)]
    pub osc_factor: Option<f64>,
    #[arg(long, global = true)]
    pub correction_order: Option<u8>,
    /// main_terms or exact_gamma.
    #[arg(long, global = true)]
    pub theta_mode: Option<String>,
    #[arg(long, global = true)]
    pub error_constant: Option<f64>,
    /// Fixes c₀ instead of reading or producing a calibration.
    #[arg(long, global = true)]
    pub c0: Option<f64>,
    /// log_leading or ladder_slope.
    #[arg(long, global = true)]
    pub omega_mode: Option<String>,
    /// Calibration artifact to read c₀ from.
    #[arg(long, global = true)]
    pub calibration: Option<PathBuf>,
    #[arg(long, global = true)]
    pub zero_threshold: Option<f64>,
    #[arg(long, global = true)]
    pub max_retries: Option<usize>,
}

/// Parses `key=value` lines; `#` starts a comment line.
pub fn parse_config_file(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", n + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

const KNOWN_KEYS: &[&str] = &[
    "cache_dir",
    "abs_tol",
    "rel_tol",
    "max_depth",
    "osc_factor",
    "correction_order",
    "theta_mode",
    "error_constant",
    "c0",
    "omega_mode",
    "calibration",
    "zero_threshold",
    "max_retries",
];

#[derive(Debug, Clone)]
pub struct Settings {
    pub quad: QuadConfig,
    pub rs: RSConfig,
    pub omega_mode: OmegaMode,
    /// c₀ given explicitly by flag or config file.
    pub c0: Option<f64>,
    pub calibration: Option<PathBuf>,
    pub factor: FactorizationConfig,
    pub cache_dir: PathBuf,
}

fn pick<T: std::str::FromStr>(
    flag: Option<T>,
    file: &BTreeMap<String, String>,
    key: &str,
) -> CliResult<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|e| CliError::Usage(format!("config key {key}: {e}"))),
        None => Ok(None),
    }
}

impl Settings {
    pub fn resolve(args: &GlobalArgs) -> CliResult<Self> {
        let file = match &args.config {
            Some(path) => parse_config_file(&std::fs::read_to_string(path)?)?,
            None => BTreeMap::new(),
        };
        if let Some(k) = file.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(CliError::Usage(format!("unknown config key '{k}'")));
        }
        let dq = QuadConfig::default();
        let quad = QuadConfig {
            abs_tol: pick(args.abs_tol, &file, "abs_tol")?.unwrap_or(dq.abs_tol),
            rel_tol: pick(args.rel_tol, &file, "rel_tol")?.unwrap_or(dq.rel_tol),
            max_depth: pick(args.max_depth, &file, "max_depth")?.unwrap_or(dq.max_depth),
            osc_factor: pick(args.osc_factor, &file, "osc_factor")?.unwrap_or(dq.osc_factor),
        };
        quad.validate()?;
        let dr = RSConfig::default();
        let theta_mode = match pick(args.theta_mode.clone(), &file, "theta_mode")? {
            Some(s) => s.parse::<ThetaMode>()?,
            None => dr.theta_mode,
        };
        let rs = RSConfig {
            correction_order: pick(args.correction_order, &file, "correction_order")?
                .unwrap_or(dr.correction_order),
            theta_mode,
            error_constant: pick(args.error_constant, &file, "error_constant")?
                .unwrap_or(dr.error_constant),
        };
        rs.validate()?;
        let omega_mode = match pick(args.omega_mode.clone(), &file, "omega_mode")? {
            Some(s) => s.parse::<OmegaMode>()?,
            None => LadderConfig::default().omega_mode,
        };
        let df = FactorizationConfig::default();
        let factor = FactorizationConfig {
            zero_threshold: pick(args.zero_threshold, &file, "zero_threshold")?
                .unwrap_or(df.zero_threshold),
            max_retries: pick(args.max_retries, &file, "max_retries")?.unwrap_or(df.max_retries),
            quad,
        };
        factor.validate()?;
        let cache_dir = args
            .cache_dir
            .clone()
            .or_else(|| file.get("cache_dir").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR));
        Ok(Self {
            quad,
            rs,
            omega_mode,
            c0: pick(args.c0, &file, "c0")?,
            calibration: args
                .calibration
                .clone()
                .or_else(|| file.get("calibration").map(PathBuf::from)),
            factor,
            cache_dir,
        })
    }

    pub fn cache_dir(&self) -> &Path {
        &self.cache_dir
    }

    /// The effective configuration as manifest parameters.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("abs_tol".into(), self.quad.abs_tol.to_string());
        m.insert("rel_tol".into(), self.quad.rel_tol.to_string());
        m.insert("max_depth".into(), self.quad.max_depth.to_string());
        m.insert("osc_factor".into(), self.quad.osc_factor.to_string());
        m.insert("correction_order".into(), self.rs.correction_order.to_string());
        m.insert("theta_mode".into(), self.rs.theta_mode.to_string());
        m.insert("error_constant".into(), self.rs.error_constant.to_string());
        m.insert("omega_mode".into(), self.omega_mode.to_string());
        m.insert("zero_threshold".into(), self.factor.zero_threshold.to_string());
        m.insert("max_retries".into(), self.factor.max_retries.to_string());
        m.insert("cache_dir".into(), self.cache_dir.display().to_string());
        if let Some(c0) = self.c0 {
            m.insert("c0".into(), c0.to_string());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let dir = std::env::temp_dir().join(format!("zl-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "# comment\nabs_tol=1e-9\nosc_factor = 0.25\nc0=12.5\n").unwrap();
        let args = GlobalArgs {
            config: Some(path),
            osc_factor: Some(0.4),
            ..Default::default()
        };
        let s = Settings::resolve(&args).unwrap();
        assert_eq!(s.quad.abs_tol, 1e-9);
        assert_eq!(s.quad.osc_factor, 0.4);
        assert_eq!(s.quad.rel_tol, QuadConfig::default().rel_tol);
        assert_eq!(s.c0, Some(12.5));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn rejects_unknown_and_malformed_keys() {
        assert!(parse_config_file("novalue").is_err());
        let dir = std::env::temp_dir().join(format!("zl-cfg2-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.conf");
        std::fs::write(&path, "abs_tolerance=1\n").unwrap();
        let args = GlobalArgs { config: Some(path), ..Default::default() };
        assert!(Settings::resolve(&args).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
