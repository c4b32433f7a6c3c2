use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;
use std::time::Instant;

use zeta_ladder::quadrature::{QuadConfig, SecondMoment};
use zeta_ladder::special_fn::RSConfig;

fn cache_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("zlcache")
}

/// Extends the shared on-disk table once, before any binary runs.
fn warm_cache() -> &'static Path {
    static WARM: OnceLock<PathBuf> = OnceLock::new();
    WARM.get_or_init(|| {
        let dir = cache_dir();
        let sm = SecondMoment::with_cache_dir(QuadConfig::default(), RSConfig::default(), &dir).unwrap();
        sm.ensure(1.1e5).unwrap();
        dir
    })
}

fn zladder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zladder"))
        .args(args)
        .env("ZL_CACHE_DIR", warm_cache())
        .output()
        .expect("run zladder")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

#[test]
fn eval_grid_and_oracle_column() {
    let out = stdout(&zladder(&["eval", "--from", "100", "--to", "101", "--step", "0.5"]));
    assert!(out.starts_with("t,Z,theta,abs_zeta,oracle_diff\n"));
    let r = rows(&out);
    assert_eq!(r.len(), 3);
    for row in r {
        assert!(row[4] <= 2.0 * row[0].powf(-0.25));
    }
    let empty = stdout(&zladder(&["eval", "--from", "200", "--to", "100"]));
    assert_eq!(empty, "t,Z,theta,abs_zeta,oracle_diff\n");
    let bad = zladder(&["eval", "--from", "1", "--to", "3", "--step", "1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("6.28"));
}

#[test]
fn moment_json_and_warm_cache() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let run = || {
        let start = Instant::now();
        let o = Command::new(env!("CARGO_BIN_EXE_zladder"))
            .args(["moment", "--T", "1e5", "--H", "2", "--cache-dir", dir])
            .output()
            .unwrap();
        (stdout(&o), start.elapsed())
    };
    let (cold, t_cold) = run();
    let (warm, t_warm) = run();
    assert_eq!(cold, warm);
    assert!(t_cold >= 5 * t_warm, "cold {t_cold:?}, warm {t_warm:?}");
    let v: serde_json::Value = serde_json::from_str(&cold).unwrap();
    assert!(v["ratio"].is_f64());
    assert_eq!(v["U0"].as_f64().unwrap(), 1e5f64.powf(0.5001));
    assert!(tmp.path().join("manifests/moment.manifest.json").exists());

    let bad = zladder(&["moment", "--T", "1e5", "--H", "1e5"]);
    assert_eq!(bad.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&bad.stderr);
    assert!(msg.contains("0.2122") && msg.contains("111.24"), "{msg}");
}

#[test]
fn precision_failure_exit_code() {
    let o = zladder(&[
        "moment", "--T", "200", "--H", "1", "--abs-tol", "1e-300", "--rel-tol", "1e-300",
        "--max-depth", "4", "--fresh",
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn ladder_rows() {
    let out = stdout(&zladder(&["ladder"]));
    assert!(out.starts_with("T,phi1,residual,pi_T,complement_ratio\n"));
    let r = rows(&out);
    assert_eq!(r.len(), 3);
    assert!(r.windows(2).all(|w| w[1][1] > w[0][1]));
    for row in &r {
        assert!((0.6..=1.4).contains(&row[4]), "{row:?}");
        assert!(row[1] < row[0]);
    }
}

#[test]
fn factorize_json_schema() {
    let out = stdout(&zladder(&["factorize", "--T", "1e5", "--H", "2", "--k", "1"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], "facrep-v1");
    for key in ["lambda", "lhs", "rhs", "ratio", "metamorphosis_residual"] {
        assert!(v[key].is_f64(), "{key}");
    }
    let seq = &v["seq"];
    for key in ["T", "H", "eta", "beta", "Hk"] {
        assert!(seq[key].is_f64(), "{key}");
    }
    assert_eq!(seq["k"], 1);
    assert_eq!(seq["alphas"].as_array().unwrap().len(), 2);
}

#[test]
fn factorize_sweep_and_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("sweep.csv");
    let o = zladder(&["factorize", "--sweep", "T=1e4:1e5:5", "-o", csv.to_str().unwrap()]);
    stdout(&o);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("T,H,k,eta,beta,Hk,alpha_0,alpha_1,lambda,lhs,rhs,ratio,meta_residual\n"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("sweep.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "factorize");
    assert_eq!(manifest["outputs"][0], csv.to_str().unwrap());
    assert!(manifest["timestamp"].as_str().unwrap().contains('T'));

    // Ratio against T from the sweep; its log-deviation shrinks with T.
    let r = rows(&text);
    let dev: Vec<f64> = r.iter().map(|row| row[11].ln().abs()).collect();
    assert!(dev.windows(2).all(|w| w[1] <= w[0]), "{dev:?}");
    let svg = tmp.path().join("ratio.svg");
    stdout(&zladder(&[
        "plot", "--input", csv.to_str().unwrap(), "--x", "T", "--y", "ratio,lhs", "-o",
        svg.to_str().unwrap(),
    ]));
    let s = std::fs::read_to_string(&svg).unwrap();
    assert!(s.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 600\""));
    assert_eq!(s.matches("<path").count(), 2);
}

#[test]
fn plot_rejects_nan() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("bad.csv");
    std::fs::write(&csv, "T,ratio\n1,1.0\n2,NaN\n").unwrap();
    let o = zladder(&["plot", "--input", csv.to_str().unwrap(), "--x", "T", "--y", "ratio"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn degenerate_exit_code() {
    let o = zladder(&["factorize", "--T", "3e4", "--zero-threshold", "1e3", "--max-retries", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("after 2 retries"));
}

#[test]
fn calibration_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("cal.txt");
    let p = path.to_str().unwrap();
    let anchors = "10000,20000,40000,70000,100000";
    stdout(&zladder(&["calibrate", "--anchors", anchors, "-o", p]));
    let first = std::fs::read(&path).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    for key in ["euler_c=", "c0=", "smtable_fingerprint=", "calibrated_at_anchors="] {
        assert!(text.contains(key), "{key}");
    }
    stdout(&zladder(&["calibrate", "--anchors", anchors, "-o", p]));
    assert_eq!(std::fs::read(&path).unwrap(), first);

    // The ladder accepts the artifact explicitly.
    let out = stdout(&zladder(&["ladder", "--T", "50000", "--calibration", p]));
    assert_eq!(rows(&out).len(), 1);

    // Disjoint interleaved anchor folds agree within 5%.
    let grid: Vec<f64> = zeta_ladder::ladder::default_anchors();
    let fold = |start: usize| -> f64 {
        let a: Vec<String> = grid.iter().skip(start).step_by(2).map(|x| x.to_string()).collect();
        let f = tmp.path().join(format!("fold{start}.txt"));
        stdout(&zladder(&["calibrate", "--anchors", &a.join(","), "-o", f.to_str().unwrap()]));
        let art = zeta_ladder::ladder::CalibrationArtifact::load(&f).unwrap();
        art.c0
    };
    let (a, b) = (fold(0), fold(1));
    assert!((a - b).abs() < 0.05 * (0.5 * (a + b)).abs(), "{a} vs {b}");
}

#[test]
fn spectrum_rows() {
    let out = stdout(&zladder(&["spectrum", "--x", &(8.0 * std::f64::consts::PI).to_string()]));
    assert_eq!(out, format!("n,omega_nr\n1,{}\n2,0\n", 2f64.ln()));
}

#[test]
fn config_file_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("run.conf");
    std::fs::write(&conf, "c0=1500\nosc_factor=0.25\n").unwrap();
    let manifest = tmp.path().join("m.json");
    let args = [
        "spectrum", "--x", "1000", "--config", conf.to_str().unwrap(), "--osc-factor", "0.4",
        "--manifest", manifest.to_str().unwrap(),
    ];
    stdout(&zladder(&args));
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["parameters"]["osc_factor"], "0.4");
    assert_eq!(m["parameters"]["c0"], "1500");
    assert_eq!(m["parameters"]["rel_tol"], "0.00000001");

    std::fs::write(&conf, "bogus_key=1\n").unwrap();
    let o = zladder(&["spectrum", "--x", "1000", "--config", conf.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
