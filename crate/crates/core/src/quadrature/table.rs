//! Cumulative second moment I(T) = ∫₀^T Z(u)² du with persistent checkpoints.
//!
//! Checkpoints sit at multiples of [`CHECKPOINT_STRIDE`]. Each stride
//! segment has a fixed panel decomposition, so the value at a checkpoint
//! depends only on the checkpoint before it and is identical whether it was
//! computed in this process or loaded from the cache file. Panel-edge values
//! inside a segment are kept in memory so that I(t) at an arbitrary t costs
//! a single partial panel.
//!
//! Cache file layout (`smtable-v1`), one file per configuration fingerprint:
//!
//! ```text
//! #smtable-v1 fingerprint=<16 hex> stride=64 tolerance=<abs_tol>
//! t,I
//! 0,0
//! 64,<I(64)>
//! ...
//! ```
//!
//! Numbers use shortest round-trip formatting.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{adaptive_panel, integrate_on_edges, panel_edges, QuadConfig};
use crate::error::{Error, Result};
use crate::roots::{brent, RootOptions};
use crate::special_fn::{hardy_z, RSConfig};
use crate::sum::CompensatedSum;

pub const CHECKPOINT_STRIDE: f64 = 64.0;
pub const SMTABLE_FORMAT: &str = "smtable-v1";

/// Fingerprint of everything that changes the tabulated values.
pub fn table_fingerprint(quad: &QuadConfig, rs: &RSConfig) -> String {
    let canonical = format!(
        "{SMTABLE_FORMAT}|abs_tol={:e}|rel_tol={:e}|max_depth={}|osc_factor={:e}|stride={:e}|correction_order={}|theta_mode={}",
        quad.abs_tol,
        quad.rel_tol,
        quad.max_depth,
        quad.osc_factor,
        CHECKPOINT_STRIDE,
        rs.correction_order,
        rs.theta_mode,
    );
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().take(8).fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondMomentTable {
    pub fingerprint: String,
    pub stride: f64,
    pub tolerance: f64,
    checkpoints: Vec<(f64, f64)>,
}

impl SecondMomentTable {
    pub fn new(fingerprint: impl Into<String>, tolerance: f64) -> Self {
        Self {
            fingerprint: fingerprint.into(),
            stride: CHECKPOINT_STRIDE,
            tolerance,
            checkpoints: vec![(0.0, 0.0)],
        }
    }

    /// Builds a table from raw rows, validating it.
    pub fn from_checkpoints(
        fingerprint: impl Into<String>,
        tolerance: f64,
        checkpoints: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let table = Self {
            fingerprint: fingerprint.into(),
            stride: CHECKPOINT_STRIDE,
            tolerance,
            checkpoints,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn checkpoints(&self) -> &[(f64, f64)] {
        &self.checkpoints
    }

    /// Largest tabulated height.
    pub fn reach(&self) -> f64 {
        self.checkpoints.last().map(|c| c.0).unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        match self.checkpoints.first() {
            Some(&(t, i)) if t == 0.0 && i == 0.0 => {}
            _ => return Err(Error::Integrity("table must start at (0, 0)".into())),
        }
        for (k, w) in self.checkpoints.windows(2).enumerate() {
            let (t0, i0) = w[0];
            let (t1, i1) = w[1];
            if !(t1 > t0) || t1 != self.stride * (k + 1) as f64 {
                return Err(Error::Integrity(format!(
                    "checkpoint {} at t = {t1} is not on the stride grid",
                    k + 1
                )));
            }
            if !(i1 > i0) || !i1.is_finite() {
                return Err(Error::Integrity(format!(
                    "I is not strictly increasing at checkpoint {} ({i0} -> {i1})",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "#{SMTABLE_FORMAT} fingerprint={} stride={} tolerance={}\nt,I\n",
            self.fingerprint, self.stride, self.tolerance
        );
        for (t, i) in &self.checkpoints {
            let _ = writeln!(out, "{t},{i}");
        }
        out
    }

    /// Parses a cache file, rejecting format or fingerprint mismatches.
    pub fn from_csv(text: &str, expected_fingerprint: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Integrity("empty table file".into()))?;
        let rest = header
            .strip_prefix(&format!("#{SMTABLE_FORMAT}"))
            .ok_or_else(|| Error::Integrity(format!("missing {SMTABLE_FORMAT} header")))?;
        let mut fingerprint = None;
        let mut stride = None;
        let mut tolerance = None;
        for kv in rest.split_whitespace() {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Integrity(format!("malformed header field '{kv}'")))?;
            match k {
                "fingerprint" => fingerprint = Some(v.to_string()),
                "stride" => stride = v.parse::<f64>().ok(),
                "tolerance" => tolerance = v.parse::<f64>().ok(),
                _ => {}
            }
        }
        let fingerprint =
            fingerprint.ok_or_else(|| Error::Integrity("header lacks fingerprint".into()))?;
        if fingerprint != expected_fingerprint {
            return Err(Error::Integrity(format!(
                "fingerprint mismatch: file has {fingerprint}, expected {expected_fingerprint}"
            )));
        }
        if stride != Some(CHECKPOINT_STRIDE) {
            return Err(Error::Integrity(format!("unsupported stride {stride:?}")));
        }
        let tolerance = tolerance.ok_or_else(|| Error::Integrity("header lacks tolerance".into()))?;
        if lines.next().map(str::trim) != Some("t,I") {
            return Err(Error::Integrity("missing column header 't,I'".into()));
        }
        let mut checkpoints = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::Integrity(format!("row {n}: expected 't,I'")))?;
            let t = a.trim().parse::<f64>().map_err(|e| Error::Integrity(format!("row {n}: {e}")))?;
            let i = b.trim().parse::<f64>().map_err(|e| Error::Integrity(format!("row {n}: {e}")))?;
            checkpoints.push((t, i));
        }
        Self::from_checkpoints(fingerprint, tolerance, checkpoints)
    }

    pub fn load(path: &Path, expected_fingerprint: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv(&text, expected_fingerprint)
    }

    /// Writes the file atomically (temporary file plus rename).
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
        std::fs::write(&tmp, self.to_csv())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

/// Panel edges of one stride segment and I at each edge.
#[derive(Debug)]
struct Segment {
    edges: Vec<f64>,
    cumulative: Vec<f64>,
}

/// The cumulative second moment with a growing checkpoint table.
///
/// Extension is serialized behind a write lock; lookups take read locks and
/// may run concurrently.
#[derive(Debug)]
pub struct SecondMoment {
    quad: QuadConfig,
    rs: RSConfig,
    fingerprint: String,
    table: RwLock<SecondMomentTable>,
    segments: RwLock<HashMap<usize, Arc<Segment>>>,
    cache_path: Option<PathBuf>,
}

impl SecondMoment {
    pub fn new(quad: QuadConfig, rs: RSConfig) -> Result<Self> {
        quad.validate()?;
        rs.validate()?;
        let fingerprint = table_fingerprint(&quad, &rs);
        let table = SecondMomentTable::new(fingerprint.clone(), quad.abs_tol);
        Ok(Self {
            quad,
            rs,
            fingerprint,
            table: RwLock::new(table),
            segments: RwLock::new(HashMap::new()),
            cache_path: None,
        })
    }

    /// Starts from an existing table, which must carry this configuration's
    /// fingerprint.
    pub fn from_table(quad: QuadConfig, rs: RSConfig, table: SecondMomentTable) -> Result<Self> {
        let mut sm = Self::new(quad, rs)?;
        if table.fingerprint != sm.fingerprint {
            return Err(Error::Integrity(format!(
                "table fingerprint {} does not match configuration {}",
                table.fingerprint, sm.fingerprint
            )));
        }
        table.validate()?;
        sm.table = RwLock::new(table);
        Ok(sm)
    }

    /// Uses `<dir>/smtable-<fingerprint>.csv` as a persistent cache,
    /// loading it when present and rewriting it after every extension.
    pub fn with_cache_dir(quad: QuadConfig, rs: RSConfig, dir: &Path) -> Result<Self> {
        let mut sm = Self::new(quad, rs)?;
        let path = dir.join(format!("smtable-{}.csv", sm.fingerprint));
        if path.exists() {
            let table = SecondMomentTable::load(&path, &sm.fingerprint)?;
            sm.table = RwLock::new(table);
        }
        sm.cache_path = Some(path);
        Ok(sm)
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn quad_config(&self) -> &QuadConfig {
        &self.quad
    }

    pub fn rs_config(&self) -> &RSConfig {
        &self.rs
    }

    pub fn cache_path(&self) -> Option<&Path> {
        self.cache_path.as_deref()
    }

    /// Immutable copy of the current checkpoint table.
    pub fn snapshot(&self) -> SecondMomentTable {
        self.table.read().expect("table lock poisoned").clone()
    }

    fn segment_edges(&self, index: usize) -> Vec<f64> {
        let a = CHECKPOINT_STRIDE * index as f64;
        panel_edges(a, a + CHECKPOINT_STRIDE, self.quad.osc_factor)
    }

    fn integrand(&self) -> impl Fn(f64) -> Result<f64> + Sync + '_ {
        move |t: f64| {
            let z = hardy_z(t, &self.rs);
            Ok(z * z)
        }
    }

    fn build_segment(&self, index: usize, start_value: f64) -> Result<Segment> {
        let edges = self.segment_edges(index);
        let f = self.integrand();
        let (values, _) = integrate_on_edges(&f, &edges, &self.quad)?;
        let mut cumulative = Vec::with_capacity(edges.len());
        let mut acc = CompensatedSum::new();
        acc.add(start_value);
        cumulative.push(start_value);
        for v in values {
            acc.add(v);
            cumulative.push(acc.value());
        }
        Ok(Segment { edges, cumulative })
    }

    /// Extends the checkpoint table so that it reaches at least `t`.
    pub fn ensure(&self, t: f64) -> Result<()> {
        let needed = (t / CHECKPOINT_STRIDE).ceil().max(0.0) as usize;
        if self.table.read().expect("table lock poisoned").checkpoints.len() > needed {
            return Ok(());
        }
        let mut table = self.table.write().expect("table lock poisoned");
        let have = table.checkpoints.len() - 1;
        if have >= needed {
            return Ok(());
        }
        // Panels of all missing segments are independent; only the prefix
        // sums are sequential.
        let f = self.integrand();
        let per_segment: Vec<Result<(Vec<f64>, Vec<f64>)>> = (have..needed)
            .into_par_iter()
            .map(|i| {
                let edges = self.segment_edges(i);
                let (values, _) = integrate_on_edges(&f, &edges, &self.quad)?;
                Ok((edges, values))
            })
            .collect();
        let mut segments = self.segments.write().expect("segment lock poisoned");
        for (offset, seg) in per_segment.into_iter().enumerate() {
            let (edges, values) = seg?;
            let index = have + offset;
            let start_value = table.checkpoints[index].1;
            let mut cumulative = Vec::with_capacity(edges.len());
            let mut acc = CompensatedSum::new();
            acc.add(start_value);
            cumulative.push(start_value);
            for v in values {
                acc.add(v);
                cumulative.push(acc.value());
            }
            let end = *cumulative.last().expect("segment has edges");
            table
                .checkpoints
                .push((CHECKPOINT_STRIDE * (index + 1) as f64, end));
            segments.insert(index, Arc::new(Segment { edges, cumulative }));
        }
        drop(segments);
        if let Some(path) = &self.cache_path {
            table.save(path)?;
        }
        Ok(())
    }

    fn segment(&self, index: usize) -> Result<Arc<Segment>> {
        if let Some(s) = self.segments.read().expect("segment lock poisoned").get(&index) {
            return Ok(Arc::clone(s));
        }
        self.ensure(CHECKPOINT_STRIDE * (index + 1) as f64)?;
        let start = self.table.read().expect("table lock poisoned").checkpoints[index].1;
        let seg = Arc::new(self.build_segment(index, start)?);
        let mut map = self.segments.write().expect("segment lock poisoned");
        Ok(Arc::clone(map.entry(index).or_insert(seg)))
    }

    fn partial(&self, seg: &Segment, j: usize, t: f64) -> Result<f64> {
        let a = seg.edges[j];
        if t <= a {
            return Ok(seg.cumulative[j]);
        }
        let f = self.integrand();
        let share = self.quad.abs_tol * (t - a) / CHECKPOINT_STRIDE;
        let p = adaptive_panel(&f, a, t, share, &self.quad, 0)?;
        Ok(seg.cumulative[j] + p.value)
    }

    /// I(t) = ∫₀^t Z².
    pub fn cumulative(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("cumulative_I requires t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let index = (t / CHECKPOINT_STRIDE).floor() as usize;
        let seg = self.segment(index)?;
        let j = seg.edges.partition_point(|&e| e <= t).saturating_sub(1);
        let j = j.min(seg.edges.len() - 2);
        self.partial(&seg, j, t)
    }

    /// Smallest y with I(y) = target, extending the table as needed.
    pub fn solve(&self, target: f64) -> Result<f64> {
        if !(target >= 0.0) || !target.is_finite() {
            return Err(Error::domain(format!("cannot invert I at {target}")));
        }
        if target == 0.0 {
            return Ok(0.0);
        }
        // Grow until the last checkpoint exceeds the target.
        loop {
            let table = self.table.read().expect("table lock poisoned");
            let (reach, last) = *table.checkpoints.last().expect("table is never empty");
            drop(table);
            if last >= target {
                break;
            }
            // I(t) grows roughly like t ln t; overshoot a little.
            let guess = (target - last) / (reach.max(CHECKPOINT_STRIDE) / std::f64::consts::TAU).ln().max(1.0);
            self.ensure(reach + guess.max(CHECKPOINT_STRIDE))?;
        }
        let index = {
            let table = self.table.read().expect("table lock poisoned");
            table.checkpoints.partition_point(|c| c.1 < target) - 1
        };
        let seg = self.segment(index)?;
        let j = seg.cumulative.partition_point(|&c| c < target).saturating_sub(1);
        let j = j.min(seg.edges.len() - 2);
        let (a, b) = (seg.edges[j], seg.edges[j + 1]);
        let fb = self.partial(&seg, j, b)? - target;
        if fb <= 0.0 {
            return Ok(b);
        }
        let fa = seg.cumulative[j] - target;
        if fa >= 0.0 {
            return Ok(a);
        }
        brent(
            |x| Ok(self.partial(&seg, j, x)? - target),
            a,
            b,
            RootOptions {
                x_tol: 4.0 * f64::EPSILON * b,
                ..Default::default()
            },
        )
    }
}
