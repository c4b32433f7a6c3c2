//! Subcommand implementations. Every command writes its primary output
//! (to `--output` or stdout) and a [`RunManifest`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use clap::Args;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use zeta_ladder::factorization::{
    build_alpha_sequence, factorize, local_spectrum, FactorizationReport,
};
use zeta_ladder::ladder::{
    calibrate_c0, default_anchors, Calibration, CalibrationArtifact, Ladder, LadderConfig,
    PrimePiTable,
};
use zeta_ladder::quadrature::{hl_moment, table_fingerprint, SecondMoment};
use zeta_ladder::special_fn::{em_zeta_half, oracle_z, riemann_siegel_z};

use crate::config::{GlobalArgs, Settings};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::plot::{render_svg, spec_from_csv, PlotKind};
use crate::Command;

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
}

#[derive(Debug, Clone, Args)]
pub struct MomentArgs {
    #[arg(long = "T")]
    pub t: f64,
    #[arg(long = "H", default_value_t = 2.0)]
    pub h: f64,
    /// Recompute even if a cached result exists.
    #[arg(long)]
    pub fresh: bool,
}

#[derive(Debug, Clone, Args)]
pub struct LadderArgs {
    /// Comma-separated heights.
    #[arg(long = "T", value_delimiter = ',', default_value = "10000,30000,100000")]
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct AlphasArgs {
    #[arg(long = "T")]
    pub t: f64,
    #[arg(long = "H", default_value_t = 2.0)]
    pub h: f64,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Debug, Clone, Args)]
pub struct FactorizeArgs {
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long = "H", default_value_t = 2.0)]
    pub h: f64,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// `KEY=start:stop:count` over T, H or k (evenly spaced, inclusive);
    /// writes one CSV row per point.
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub x: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    /// Comma-separated anchor heights (default: 40 geometric points on
    /// [1e4, 1e5]).
    #[arg(long, value_delimiter = ',')]
    pub anchors: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub x: String,
    /// Comma-separated y columns, one series each.
    #[arg(long, value_delimiter = ',', required = true)]
    pub y: Vec<String>,
    /// line or scatter.
    #[arg(long, default_value = "line")]
    pub kind: String,
    #[arg(long)]
    pub title: Option<String>,
}

/// Shared state of one invocation.
pub struct Context {
    pub settings: Settings,
    global: GlobalArgs,
    moment: OnceLock<Arc<SecondMoment>>,
}

/// Where the ladder's c₀ came from.
#[derive(Debug, Clone)]
pub enum C0Source {
    Explicit,
    Artifact(PathBuf),
    Calibrated(PathBuf),
}

impl Context {
    pub fn new(settings: Settings, global: GlobalArgs) -> Self {
        Self {
            settings,
            global,
            moment: OnceLock::new(),
        }
    }

    pub fn fingerprint(&self) -> String {
        table_fingerprint(&self.settings.quad, &self.settings.rs)
    }

    pub fn moment(&self) -> CliResult<Arc<SecondMoment>> {
        if let Some(m) = self.moment.get() {
            return Ok(Arc::clone(m));
        }
        let m = Arc::new(SecondMoment::with_cache_dir(
            self.settings.quad,
            self.settings.rs,
            self.settings.cache_dir(),
        )?);
        Ok(Arc::clone(self.moment.get_or_init(|| m)))
    }

    pub fn default_calibration_path(&self) -> PathBuf {
        self.settings
            .cache_dir()
            .join(format!("calibration-{}.txt", self.fingerprint()))
    }

    fn base_ladder_config(&self) -> LadderConfig {
        LadderConfig {
            omega_mode: self.settings.omega_mode,
            ..LadderConfig::default()
        }
    }

    /// Ladder with c₀ from (in order) an explicit value, a given artifact,
    /// the cached artifact, or a fresh calibration on the default anchors.
    pub fn ladder(&self) -> CliResult<(Ladder, C0Source)> {
        let mut cfg = self.base_ladder_config();
        let moment = self.moment()?;
        let source = if let Some(c0) = self.settings.c0 {
            cfg.c0 = c0;
            C0Source::Explicit
        } else {
            let path = self
                .settings
                .calibration
                .clone()
                .unwrap_or_else(|| self.default_calibration_path());
            if path.exists() {
                let art = CalibrationArtifact::load(&path)?;
                art.check_fingerprint(moment.fingerprint())?;
                cfg.euler_c = art.euler_c;
                cfg.c0 = art.c0;
                C0Source::Artifact(path)
            } else if self.settings.calibration.is_some() {
                return Err(CliError::Usage(format!(
                    "calibration file {} does not exist",
                    path.display()
                )));
            } else {
                eprintln!("zladder: no calibration found; calibrating c0 on the default anchors");
                let anchors = default_anchors();
                let (cal, art) = self.calibrate(&anchors, &mut cfg)?;
                art.save(&path)?;
                eprintln!("zladder: c0 = {} (rms residual {})", cal.c0, cal.rms);
                C0Source::Calibrated(path)
            }
        };
        Ok((Ladder::new(cfg, moment)?, source))
    }

    fn calibrate(&self, anchors: &[f64], cfg: &mut LadderConfig) -> CliResult<(Calibration, CalibrationArtifact)> {
        let moment = self.moment()?;
        let limit = anchors.iter().copied().fold(0.0, f64::max).ceil() as u64 + 1;
        let primes = PrimePiTable::new(limit);
        let cal = calibrate_c0(anchors, cfg, &moment, &primes)?;
        let art = CalibrationArtifact {
            euler_c: cfg.euler_c,
            c0: cal.c0,
            smtable_fingerprint: moment.fingerprint().to_string(),
            anchors: anchors.to_vec(),
        };
        Ok((cal, art))
    }

    fn manifest_path(&self, command: &str) -> PathBuf {
        if let Some(p) = &self.global.manifest {
            return p.clone();
        }
        if let Some(out) = &self.global.output {
            let mut s = out.clone().into_os_string();
            s.push(".manifest.json");
            return PathBuf::from(s);
        }
        self.settings
            .cache_dir()
            .join("manifests")
            .join(format!("{command}.manifest.json"))
    }

    /// Writes the primary output and returns its location for the manifest.
    fn emit(&self, text: &str) -> CliResult<String> {
        match &self.global.output {
            Some(path) => {
                if let Some(dir) = path.parent() {
                    if !dir.as_os_str().is_empty() {
                        std::fs::create_dir_all(dir)?;
                    }
                }
                std::fs::write(path, text)?;
                Ok(path.display().to_string())
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok("-".into())
            }
        }
    }

    fn finish(
        &self,
        command: &str,
        mut params: BTreeMap<String, String>,
        outputs: Vec<String>,
    ) -> CliResult<()> {
        for (k, v) in self.settings.to_map() {
            params.entry(k).or_insert(v);
        }
        let mut m = RunManifest::new(command, params, &self.fingerprint());
        m.outputs = outputs;
        m.write(&self.manifest_path(command))
    }

    pub fn dispatch(&self, command: &Command) -> CliResult<()> {
        let name = command.name();
        let (params, outputs) = match command {
            Command::Eval(a) => self.eval(a)?,
            Command::Moment(a) => self.moment_cmd(a)?,
            Command::Ladder(a) => self.ladder_cmd(a)?,
            Command::Alphas(a) => self.alphas(a)?,
            Command::Factorize(a) => self.factorize_cmd(a)?,
            Command::Spectrum(a) => self.spectrum(a)?,
            Command::Calibrate(a) => self.calibrate_cmd(a)?,
            Command::Plot(a) => self.plot(a)?,
        };
        self.finish(name, params, outputs)
    }

    fn eval(&self, a: &EvalArgs) -> CliResult<(BTreeMap<String, String>, Vec<String>)> {
        if !(a.step > 0.0) || !a.from.is_finite() || !a.to.is_finite() {
            return Err(CliError::Usage(format!(
                "eval needs finite --from/--to and a positive --step, got {}, {}, {}",
                a.from, a.to, a.step
            )));
        }
        let n = if a.to < a.from {
            0
        } else {
            ((a.to - a.from) / a.step + 1e-9).floor() as usize + 1
        };
        let rs = self.settings.rs;
        let rows: Vec<CliResult<String>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let t = a.from + a.step * i as f64;
                let p = riemann_siegel_z(t, &rs)?;
                let zeta = em_zeta_half(t)?;
                let diff = (p.z - oracle_z(t)?).abs();
                Ok(format!("{t},{},{},{},{diff}\n", p.z, p.theta, zeta.norm()))
            })
            .collect();
        let mut text = String::from("t,Z,theta,abs_zeta,oracle_diff\n");
        for r in rows {
            text.push_str(&r?);
        }
        let out = self.emit(&text)?;
        let params = params([("from", a.from.to_string()), ("to", a.to.to_string()), ("step", a.step.to_string())]);
        Ok((params, vec![out]))
    }

    fn moment_cmd(&self, a: &MomentArgs) -> CliResult<(BTreeMap<String, String>, Vec<String>)> {
        let key = {
            let mut h = Sha256::new();
            h.update(self.fingerprint().as_bytes());
            h.update(a.t.to_bits().to_le_bytes());
            h.update(a.h.to_bits().to_le_bytes());
            h.finalize().iter().take(8).fold(String::new(), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
        };
        let cache = self.settings.cache_dir().join(format!("moment-{key}.json"));
        let cached = if a.fresh { None } else { std::fs::read_to_string(&cache).ok() };
        let text = match cached {
            Some(t) => t,
            None => {
                let r = hl_moment(a.t, a.h, &self.settings.quad, &self.settings.rs)?;
                let t = serde_json::to_string_pretty(&r)? + "\n";
                std::fs::create_dir_all(self.settings.cache_dir())?;
                let tmp = cache.with_extension(format!("tmp.{}", std::process::id()));
                std::fs::write(&tmp, &t)?;
                std::fs::rename(&tmp, &cache)?;
                t
            }
        };
        let out = self.emit(&text)?;
        Ok((params([("T", a.t.to_string()), ("H", a.h.to_string())]), vec![out]))
    }

    fn ladder_cmd(&self, a: &LadderArgs) -> CliResult<(BTreeMap<String, String>, Vec<String>)> {
        let (ladder, source) = self.ladder()?;
        let limit = a.t.iter().copied().fold(0.0, f64::max).ceil() as u64 + 1;
        let primes = PrimePiTable::new(limit);
        let cfg = *ladder.config();
        let rows: Vec<CliResult<String>> = a
            .t
            .par_iter()
            .map(|&t| {
                let p = ladder.phi1(t)?;
                let pi = primes.count_real(t)?;
                let ratio = (t - p.phi1) / cfg.complement(pi);
                Ok(format!("{t},{},{},{pi},{ratio}\n", p.phi1, p.residual))
            })
            .collect();
        let mut text = String::from("T,phi1,residual,pi_T,complement_ratio\n");
        for r in rows {
            text.push_str(&r?);
        }
        let out = self.emit(&text)?;
        let mut p = params([("T", join(&a.t))]);
        add_ladder_params(&mut p, &cfg, &source);
        Ok((p, vec![out]))
    }

    fn alphas(&self, a: &AlphasArgs) -> CliResult<(BTreeMap<String, String>, Vec<String>)> {
        let (ladder, source) = self.ladder()?;
        let (seq, _) = build_alpha_sequence(a.t, a.h, a.k, &ladder, &self.settings.factor)?;
        let primes = PrimePiTable::new(a.t.ceil() as u64 + 1);
        let comp = ladder.config().complement(primes.count_real(a.t)?);
        let mut text = String::from("r,alpha,abs_zeta,gap_ratio\n");
        for (r, &x) in seq.alphas.iter().enumerate() {
            let gap = if r == 0 {
                String::new()
            } else {
                ((x - seq.alphas[r - 1]) / comp).to_string()
            };
            let _ = writeln!(text, "{r},{x},{},{gap}", em_zeta_half(x)?.norm());
        }
        let out = self.emit(&text)?;
        let mut p = params([
            ("T", a.t.to_string()),
            ("H", a.h.to_string()),
            ("k", a.k.to_string()),
            ("eta", seq.eta.to_string()),
            ("beta", seq.beta.to_string()),
            ("Hk", seq.hk.to_string()),
        ]);
        add_ladder_params(&mut p, ladder.config(), &source);
        Ok((p, vec![out]))
    }

    fn factorize_cmd(&self, a: &FactorizeArgs) -> CliResult<(BTreeMap<String, String>, Vec<String>)> {
        let (ladder, source) = self.ladder()?;
        let cfg = self.settings.factor;
        let mut p = params([("H", a.h.to_string()), ("k", a.k.to_string())]);
        if let Some(t) = a.t {
            p.insert("T".into(), t.to_string());
        }
        add_ladder_params(&mut p, ladder.config(), &source);
        let text = match &a.sweep {
            None => {
                let t = a
                    .t
                    .ok_or_else(|| CliError::Usage("factorize needs --T or --sweep".into()))?;
                factorize(t, a.h, a.k, &ladder, &cfg)?.to_json() + "\n"
            }
            Some(spec) => {
                p.insert("sweep".into(), spec.clone());
                let points = sweep_points(spec, a)?;
                let k_max = points.iter().map(|q| q.2).max().unwrap_or(a.k);
                let results: Vec<CliResult<FactorizationReport>> = points
                    .par_iter()
                    .map(|&(t, h, k)| {
                        let r = factorize(t, h, k, &ladder, &cfg).map_err(CliError::from);
                        match &r {
                            Ok(rep) => eprintln!("factorize T={t} H={h} k={k}: ratio {}", rep.ratio),
                            Err(e) => eprintln!("factorize T={t} H={h} k={k}: {e}"),
                        }
                        r
                    })
                    .collect();
                if let Some(Err(_)) = results.iter().find(|r| r.is_err()) {
                    if results.iter().all(|r| r.is_err()) {
                        return Err(results.into_iter().find_map(|r| r.err()).expect("an error"));
                    }
                }
                let mut text = FactorizationReport::csv_header(k_max) + "\n";
                for r in results.into_iter().flatten() {
                    let mut row = r.csv_row();
                    // Pad alpha columns when k varies across the sweep.
                    if r.seq.k < k_max {
                        let mut fields: Vec<&str> = row.split(',').collect();
                        let pad = vec![""; k_max - r.seq.k];
                        let at = 7 + r.seq.k;
                        fields.splice(at..at, pad);
                        row = fields.join(",");
                    }
                    text.push_str(&row);
                    text.push('\n');
                }
                text
            }
        };
        let out = self.emit(&text)?;
        Ok((p, vec![out]))
    }

    fn spectrum(&self, a: &SpectrumArgs) -> CliResult<(BTreeMap<String, String>, Vec<String>)> {
        let mut text = String::from("n,omega_nr\n");
        for e in local_spectrum(a.x)? {
            let _ = writeln!(text, "{},{}", e.n, e.omega_nr);
        }
        let out = self.emit(&text)?;
        Ok((params([("x", a.x.to_string())]), vec![out]))
    }

    fn calibrate_cmd(&self, a: &CalibrateArgs) -> CliResult<(BTreeMap<String, String>, Vec<String>)> {
        let anchors = if a.anchors.is_empty() { default_anchors() } else { a.anchors.clone() };
        let mut cfg = self.base_ladder_config();
        let (cal, art) = self.calibrate(&anchors, &mut cfg)?;
        let path = self
            .global
            .output
            .clone()
            .unwrap_or_else(|| self.default_calibration_path());
        art.save(&path)?;
        eprintln!(
            "zladder: c0 = {} from {} anchors (rms residual {}, standard error {}); wrote {}",
            cal.c0,
            anchors.len(),
            cal.rms,
            cal.standard_error,
            path.display()
        );
        let p = params([
            ("anchors", join(&anchors)),
            ("c0", cal.c0.to_string()),
            ("rms", cal.rms.to_string()),
        ]);
        Ok((p, vec![path.display().to_string()]))
    }

    fn plot(&self, a: &PlotArgs) -> CliResult<(BTreeMap<String, String>, Vec<String>)> {
        let kind: PlotKind = a.kind.parse()?;
        let text = std::fs::read_to_string(&a.input)?;
        let spec = spec_from_csv(&text, &a.x, &a.y, kind, a.title.as_deref())?;
        let svg = render_svg(&spec)?;
        let out = self.emit(&svg)?;
        let p = params([
            ("input", a.input.display().to_string()),
            ("x", a.x.clone()),
            ("y", a.y.join(",")),
            ("kind", a.kind.clone()),
        ]);
        Ok((p, vec![out]))
    }
}

fn params<const N: usize>(items: [(&str, String); N]) -> BTreeMap<String, String> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn add_ladder_params(p: &mut BTreeMap<String, String>, cfg: &LadderConfig, source: &C0Source) {
    p.insert("c0".into(), cfg.c0.to_string());
    p.insert("euler_c".into(), cfg.euler_c.to_string());
    let src = match source {
        C0Source::Explicit => "explicit".to_string(),
        C0Source::Artifact(path) => format!("artifact:{}", path.display()),
        C0Source::Calibrated(path) => format!("calibrated:{}", path.display()),
    };
    p.insert("c0_source".into(), src);
}

/// Expands `KEY=start:stop:count` into (T, H, k) points.
pub fn sweep_points(spec: &str, a: &FactorizeArgs) -> CliResult<Vec<(f64, f64, usize)>> {
    let bad = || CliError::Usage(format!("sweep '{spec}' is not KEY=start:stop:count"));
    let (key, range) = spec.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 {
        return Err(bad());
    }
    let values: Vec<f64> = (0..count)
        .map(|i| {
            if count == 1 {
                start
            } else if i + 1 == count {
                stop
            } else {
                start + (stop - start) * i as f64 / (count - 1) as f64
            }
        })
        .collect();
    let need_t = || a.t.ok_or_else(|| CliError::Usage("sweeping H or k needs --T".into()));
    match key.trim() {
        "T" => Ok(values.into_iter().map(|t| (t, a.h, a.k)).collect()),
        "H" => {
            let t = need_t()?;
            Ok(values.into_iter().map(|h| (t, h, a.k)).collect())
        }
        "k" => {
            let t = need_t()?;
            values
                .into_iter()
                .map(|k| {
                    if k.fract() != 0.0 || k < 1.0 {
                        Err(CliError::Usage(format!("sweep value k = {k} is not a positive integer")))
                    } else {
                        Ok((t, a.h, k as usize))
                    }
                })
                .collect()
        }
        other => Err(CliError::Usage(format!("cannot sweep over '{other}' (use T, H or k)"))),
    }
}
