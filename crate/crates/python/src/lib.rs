//! Python bindings for the zeta-ladder core.

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use zeta_ladder::factorization::{
    build_alpha_sequence, factorize, lambda_factor, local_spectrum, multiform_g,
    FactorizationConfig,
};
use zeta_ladder::ladder::{
    calibrate_c0, default_anchors, Direction, Ladder, LadderConfig, OmegaMode, PrimePiTable,
};
use zeta_ladder::quadrature::{hl_moment, integrate_z, integrate_z2, Interval, QuadConfig, SecondMoment};
use zeta_ladder::special_fn::{self, RSConfig, ThetaMode};
use zeta_ladder::Error;

create_exception!(zeta_ladder, ZetaLadderError, PyException);
create_exception!(zeta_ladder, DegenerateError, ZetaLadderError);
create_exception!(zeta_ladder, PrecisionError, ZetaLadderError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::OutOfRange { .. } | Error::Range(_) | Error::Parse(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::Degenerate { .. } | Error::Existence { .. } => DegenerateError::new_err(e.to_string()),
        Error::Precision { .. } => PrecisionError::new_err(e.to_string()),
        _ => ZetaLadderError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let items = a.iter().map(|x| json_to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, json_to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn serialize<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| ZetaLadderError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

fn rs_config(correction_order: u8, theta_mode: &str) -> PyResult<RSConfig> {
    let cfg = RSConfig {
        correction_order,
        theta_mode: theta_mode.parse().map_err(to_py)?,
        ..RSConfig::default()
    };
    cfg.validate().map_err(to_py)?;
    Ok(cfg)
}

/// τ(t) = √(t/2π).
#[pyfunction]
fn tau(t: f64) -> PyResult<f64> {
    special_fn::tau(t).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (t, mode = "exact_gamma"))]
fn theta(t: f64, mode: &str) -> PyResult<f64> {
    let mode: ThetaMode = mode.parse().map_err(to_py)?;
    special_fn::theta(t, mode).map_err(to_py)
}

/// Z(t) by the Riemann-Siegel formula, with θ and |ζ|.
#[pyfunction]
#[pyo3(signature = (t, correction_order = 1, theta_mode = "exact_gamma"))]
fn riemann_siegel_z<'py>(
    py: Python<'py>,
    t: f64,
    correction_order: u8,
    theta_mode: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = rs_config(correction_order, theta_mode)?;
    serialize(py, &special_fn::riemann_siegel_z(t, &cfg).map_err(to_py)?)
}

/// ζ(1/2 + it) by Euler–Maclaurin summation.
#[pyfunction]
fn em_zeta_half(t: f64) -> PyResult<Complex64> {
    special_fn::em_zeta_half(t).map_err(to_py)
}

#[pyfunction]
fn oracle_z(t: f64) -> PyResult<f64> {
    special_fn::oracle_z(t).map_err(to_py)
}

#[pyfunction]
fn hl_x(t: f64) -> PyResult<f64> {
    special_fn::hl_x(t, &RSConfig::default()).map_err(to_py)
}

/// ∫_a^b Z(t) dt, returned as (value, error).
#[pyfunction]
fn integrate_z_py(a: f64, b: f64) -> PyResult<(f64, f64)> {
    let iv = Interval::new(a, b).map_err(to_py)?;
    let q = integrate_z(iv, &QuadConfig::default(), &RSConfig::default()).map_err(to_py)?;
    Ok((q.value, q.error))
}

/// ∫_a^b Z(t)² dt, returned as (value, error).
#[pyfunction]
fn integrate_z2_py(a: f64, b: f64) -> PyResult<(f64, f64)> {
    let iv = Interval::new(a, b).map_err(to_py)?;
    let q = integrate_z2(iv, &QuadConfig::default(), &RSConfig::default()).map_err(to_py)?;
    Ok((q.value, q.error))
}

#[pyfunction]
#[pyo3(name = "hl_moment", signature = (t, h = 2.0))]
fn hl_moment_py<'py>(py: Python<'py>, t: f64, h: f64) -> PyResult<Bound<'py, PyAny>> {
    let rep = py
        .detach(|| hl_moment(t, h, &QuadConfig::default(), &RSConfig::default()))
        .map_err(to_py)?;
    serialize(py, &rep)
}

#[pyfunction]
#[pyo3(name = "lambda_factor")]
fn lambda_factor_py(h: f64, hk: f64, k: usize, t: f64) -> PyResult<f64> {
    lambda_factor(h, hk, k, t).map_err(to_py)
}

/// [(n, ω_n)] for n = 1..⌊τ(x)⌋.
#[pyfunction]
#[pyo3(name = "local_spectrum")]
fn local_spectrum_py(x: f64) -> PyResult<Vec<(u64, f64)>> {
    Ok(local_spectrum(x)
        .map_err(to_py)?
        .into_iter()
        .map(|e| (e.n, e.omega_nr))
        .collect())
}

/// Ladder, second-moment table and factorization pipeline sharing one cache.
#[pyclass(module = "zeta_ladder", frozen)]
struct Lab {
    ladder: Ladder,
    primes: PrimePiTable,
    factor: FactorizationConfig,
}

#[pymethods]
impl Lab {
    /// Without `c0`, the constant is calibrated on the default anchors.
    #[new]
    #[pyo3(signature = (cache_dir = None, c0 = None, omega_mode = "log_leading", prime_limit = 2_000_000))]
    fn new(
        py: Python<'_>,
        cache_dir: Option<PathBuf>,
        c0: Option<f64>,
        omega_mode: &str,
        prime_limit: u64,
    ) -> PyResult<Self> {
        let omega_mode: OmegaMode = omega_mode.parse().map_err(to_py)?;
        py.detach(|| {
            let (quad, rs) = (QuadConfig::default(), RSConfig::default());
            let moment = match &cache_dir {
                Some(dir) => SecondMoment::with_cache_dir(quad, rs, dir)?,
                None => SecondMoment::new(quad, rs)?,
            };
            let primes = PrimePiTable::new(prime_limit);
            let mut cfg = LadderConfig { omega_mode, ..LadderConfig::default() };
            match c0 {
                Some(c) => cfg.c0 = c,
                None => {
                    calibrate_c0(&default_anchors(), &mut cfg, &moment, &primes)?;
                }
            }
            Ok(Lab {
                ladder: Ladder::new(cfg, Arc::new(moment))?,
                primes,
                factor: FactorizationConfig::default(),
            })
        })
        .map_err(to_py)
    }

    #[getter]
    fn c0(&self) -> f64 {
        self.ladder.config().c0
    }

    #[getter]
    fn euler_c(&self) -> f64 {
        self.ladder.config().euler_c
    }

    #[getter]
    fn fingerprint(&self) -> String {
        self.ladder.moment().fingerprint().to_string()
    }

    /// I(T) = ∫_0^T Z² from the checkpoint table.
    fn cumulative(&self, py: Python<'_>, t: f64) -> PyResult<f64> {
        py.detach(|| self.ladder.moment().cumulative(t)).map_err(to_py)
    }

    fn phi1(&self, py: Python<'_>, t: f64) -> PyResult<f64> {
        py.detach(|| self.ladder.phi1(t)).map(|p| p.phi1).map_err(to_py)
    }

    fn phi1_inverse(&self, py: Python<'_>, x: f64) -> PyResult<f64> {
        py.detach(|| self.ladder.phi1_inverse(x)).map_err(to_py)
    }

    #[pyo3(signature = (t, k, direction = "forward"))]
    fn phi1_iterates(&self, py: Python<'_>, t: f64, k: usize, direction: &str) -> PyResult<Vec<f64>> {
        let d: Direction = direction.parse().map_err(to_py)?;
        py.detach(|| self.ladder.phi1_iterates(t, k, d)).map_err(to_py)
    }

    fn ztilde_sq(&self, t: f64) -> PyResult<f64> {
        self.ladder.ztilde_sq(t).map_err(to_py)
    }

    fn complement_ratio(&self, py: Python<'_>, t: f64) -> PyResult<f64> {
        py.detach(|| self.ladder.complement_ratio(t, &self.primes)).map_err(to_py)
    }

    #[pyo3(signature = (t, h = 2.0, k = 1))]
    fn alphas<'py>(&self, py: Python<'py>, t: f64, h: f64, k: usize) -> PyResult<Bound<'py, PyAny>> {
        let (seq, _) = py
            .detach(|| build_alpha_sequence(t, h, k, &self.ladder, &self.factor))
            .map_err(to_py)?;
        serialize(py, &seq)
    }

    /// The facrep-v1 report as a dict.
    #[pyo3(signature = (t, h = 2.0, k = 1))]
    fn factorize<'py>(&self, py: Python<'py>, t: f64, h: f64, k: usize) -> PyResult<Bound<'py, PyAny>> {
        let rep = py
            .detach(|| factorize(t, h, k, &self.ladder, &self.factor))
            .map_err(to_py)?;
        let v: serde_json::Value =
            serde_json::from_str(&rep.to_json()).map_err(|e| ZetaLadderError::new_err(e.to_string()))?;
        json_to_py(py, &v)
    }

    /// Π |Z(x_r)|.
    fn multiform(&self, xs: Vec<f64>) -> PyResult<f64> {
        multiform_g(&xs, &self.ladder).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let cfg = self.ladder.config();
        format!("Lab(c0={}, omega_mode='{}', fingerprint='{}')", cfg.c0, cfg.omega_mode, self.fingerprint())
    }
}

#[pymodule]
#[pyo3(name = "zeta_ladder")]
fn zeta_ladder_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ZetaLadderError", m.py().get_type::<ZetaLadderError>())?;
    m.add("DegenerateError", m.py().get_type::<DegenerateError>())?;
    m.add("PrecisionError", m.py().get_type::<PrecisionError>())?;
    m.add_function(wrap_pyfunction!(tau, m)?)?;
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    m.add_function(wrap_pyfunction!(riemann_siegel_z, m)?)?;
    m.add_function(wrap_pyfunction!(em_zeta_half, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_z, m)?)?;
    m.add_function(wrap_pyfunction!(hl_x, m)?)?;
    m.add("integrate_z", wrap_pyfunction!(integrate_z_py, m)?)?;
    m.add("integrate_z2", wrap_pyfunction!(integrate_z2_py, m)?)?;
    m.add_function(wrap_pyfunction!(hl_moment_py, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_factor_py, m)?)?;
    m.add_function(wrap_pyfunction!(local_spectrum_py, m)?)?;
    m.add_class::<Lab>()?;
    Ok(())
}
