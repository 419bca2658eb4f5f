//! Python bindings: `import spinsync_py`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use spinsync::correlations::{self, DiscordOptions};
use spinsync::experiment::{self, DressingChannel, DressingParams};
use spinsync::liouvillian::{self, DEFAULT_KERNEL_TOL};
use spinsync::meanfield::{self, MeanFieldSpec, DEFAULT_TOL_FP};
use spinsync::network::{self, Coupling, JumpKind};
use spinsync::spin::Spin;
use spinsync::sweep::{self, export, Config, SweepRequest};
use spinsync::sync;
use spinsync::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Validation { .. }
        | Error::Parse { .. }
        | Error::InvalidSpin(_)
        | Error::SiteOutOfRange { .. }
        | Error::InvalidBipartition(_)
        | Error::EmptySelection
        | Error::WrongDimension(_)
        | Error::DimensionMismatch { .. }
        | Error::ZeroDetuning(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_jump(name: &str) -> PyResult<JumpKind> {
    match name {
        "jpm_jz" => Ok(JumpKind::JpmJz),
        "jpm" => Ok(JumpKind::Jpm),
        _ => Err(PyValueError::new_err(format!(
            "unknown jump kind {name:?} (jpm_jz or jpm)"
        ))),
    }
}

/// Network of spin-J oscillators with gain/damping and pairwise XYZ couplings.
#[pyclass(name = "NetworkSpec", from_py_object)]
#[derive(Clone)]
struct PyNetworkSpec {
    inner: network::NetworkSpec,
}

#[pymethods]
impl PyNetworkSpec {
    #[new]
    #[pyo3(signature = (spin, gains, damps, jump = "jpm_jz", epsilon = 0.0, omegas = None))]
    fn new(
        spin: f64,
        gains: Vec<f64>,
        damps: Vec<f64>,
        jump: &str,
        epsilon: f64,
        omegas: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        let spin = Spin::new(spin).map_err(py_err)?;
        let mut inner = network::NetworkSpec::uncoupled(spin, gains, damps, parse_jump(jump)?).with_epsilon(epsilon);
        if let Some(w) = omegas {
            inner = inner.with_omegas(w);
        }
        inner.validate().map_err(py_err)?;
        Ok(PyNetworkSpec { inner })
    }

    #[pyo3(signature = (k, l, ux, uy, uz = 0.0))]
    fn add_coupling(&mut self, k: usize, l: usize, ux: f64, uy: f64, uz: f64) -> PyResult<()> {
        self.push(Coupling::new(k, l, ux, uy, uz))
    }

    /// Coupling on `|ux+uy|+|ux-uy| = 1` with `ux/uy = ratio`.
    #[pyo3(signature = (k, l, ratio, uz = 0.0))]
    fn add_ratio_coupling(&mut self, k: usize, l: usize, ratio: f64, uz: f64) -> PyResult<()> {
        self.push(Coupling::from_ratio(k, l, ratio, uz))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn sites(&self) -> usize {
        self.inner.sites
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    #[setter]
    fn set_epsilon(&mut self, value: f64) -> PyResult<()> {
        let mut next = self.inner.clone();
        next.epsilon = value;
        next.validate().map_err(py_err)?;
        self.inner = next;
        Ok(())
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("spec serializes")
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: network::NetworkSpec =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(py_err)?;
        Ok(PyNetworkSpec { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "NetworkSpec(spin={}, sites={}, epsilon={}, couplings={})",
            self.inner.spin.value(),
            self.inner.sites,
            self.inner.epsilon,
            self.inner.couplings.len()
        )
    }
}

impl PyNetworkSpec {
    fn push(&mut self, c: Coupling) -> PyResult<()> {
        let next = self.inner.clone().with_coupling(c);
        next.validate().map_err(py_err)?;
        self.inner = next;
        Ok(())
    }
}

/// Steady state of a network together with the spec it was solved for.
#[pyclass(name = "SteadyState", from_py_object)]
#[derive(Clone)]
struct PySteadyState {
    spec: network::NetworkSpec,
    result: liouvillian::SteadyStateResult,
}

#[pymethods]
impl PySteadyState {
    #[getter]
    fn kernel_dim(&self) -> usize {
        self.result.kernel_dim
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.result.residual
    }

    #[getter]
    fn degenerate(&self) -> bool {
        self.result.degenerate
    }

    /// Density matrix as nested lists of complex numbers.
    fn rho(&self) -> Vec<Vec<Complex64>> {
        let m = self.result.rho.matrix();
        (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
            .collect()
    }

    /// `(S_max, phi_star)` of the relative-phase profile of `pair`.
    #[pyo3(signature = (pair = (0, 1)))]
    fn sync_peak(&self, pair: (usize, usize)) -> PyResult<(f64, f64)> {
        let h = sync::s2_from_correlators_pair(&self.result.rho, &self.spec, pair).map_err(py_err)?;
        Ok(sync::harmonic_peak(&h))
    }

    /// `[(p, <(J1+ J2-)^p>, A_p)]` for `p = 1 .. 2J`.
    #[pyo3(signature = (pair = (0, 1)))]
    fn harmonics(&self, pair: (usize, usize)) -> PyResult<Vec<(usize, Complex64, Complex64)>> {
        let h = sync::s2_from_correlators_pair(&self.result.rho, &self.spec, pair).map_err(py_err)?;
        Ok(h.iter().map(|h| (h.order, h.correlator, h.coefficient)).collect())
    }

    /// `S_2(phi)` on `phis` from the harmonic series.
    #[pyo3(signature = (phis, pair = (0, 1)))]
    fn s2(&self, phis: Vec<f64>, pair: (usize, usize)) -> PyResult<Vec<f64>> {
        let h = sync::s2_from_correlators_pair(&self.result.rho, &self.spec, pair).map_err(py_err)?;
        Ok(phis.iter().map(|&p| sync::reconstruct(&h, p)).collect())
    }

    /// Negativity across `{first} | {second}` of the reduced pair state.
    #[pyo3(signature = (pair = (0, 1)))]
    fn negativity(&self, pair: (usize, usize)) -> PyResult<f64> {
        let r = liouvillian::reduced_density(&self.result.rho, &[pair.0, pair.1], &self.spec).map_err(py_err)?;
        let two = network::NetworkSpec::uncoupled(self.spec.spin, vec![0.0; 2], vec![0.0; 2], self.spec.jump);
        correlations::negativity(&r, &[0], &two).map_err(py_err)
    }

    #[pyo3(signature = (pair = (0, 1)))]
    fn mutual_information(&self, pair: (usize, usize)) -> PyResult<f64> {
        correlations::mutual_information_pair(&self.result.rho, &self.spec, pair).map_err(py_err)
    }

    /// Discord estimate (an upper bound from a seeded local search).
    #[pyo3(signature = (pair = (0, 1), seed = 0, restarts = 16))]
    fn discord(&self, pair: (usize, usize), seed: u64, restarts: usize) -> PyResult<f64> {
        let opts = DiscordOptions {
            pair,
            seed,
            restarts,
            ..DiscordOptions::default()
        };
        Ok(correlations::discord(&self.result.rho, &self.spec, &opts)
            .map_err(py_err)?
            .value)
    }
}

#[pyfunction]
#[pyo3(signature = (spec, tol = DEFAULT_KERNEL_TOL))]
fn steady_state(py: Python<'_>, spec: &PyNetworkSpec, tol: f64) -> PyResult<PySteadyState> {
    let spec = spec.inner.clone();
    let result = py
        .detach(|| liouvillian::build_liouvillian(&spec).and_then(|l| liouvillian::steady_state(&l, tol)))
        .map_err(py_err)?;
    Ok(PySteadyState { spec, result })
}

/// Leading-order `S_2(phi)` for two resonant spin-1 oscillators.
#[pyfunction]
fn analytic_s2(spec: &PyNetworkSpec, phi: f64) -> PyResult<f64> {
    spinsync::perturbation::analytic_s2(&spec.inner, phi).map_err(py_err)
}

/// Integrate the mean-field equation and classify the attractor.
/// Returns `(kind, area, period, circularity, residual_amplitude, final_modulus)`.
#[pyfunction]
#[pyo3(signature = (epsilon, ux, uy, gain, damp, t_max, dt = 0.01, tol_fp = DEFAULT_TOL_FP))]
#[allow(clippy::too_many_arguments)]
fn mean_field(
    py: Python<'_>,
    epsilon: f64,
    ux: f64,
    uy: f64,
    gain: f64,
    damp: f64,
    t_max: f64,
    dt: f64,
    tol_fp: f64,
) -> PyResult<(String, f64, f64, f64, f64, f64)> {
    let spec = MeanFieldSpec::new(epsilon, ux, uy, gain, damp, t_max, dt);
    let r = py
        .detach(|| meanfield::mf_evolve(&spec).and_then(|t| meanfield::classify_attractor(&t, tol_fp)))
        .map_err(py_err)?;
    let kind = serde_json::to_value(r.kind).expect("kind serializes");
    Ok((
        kind.as_str().unwrap_or_default().to_string(),
        r.area,
        r.period,
        r.circularity,
        r.residual_amplitude,
        r.final_modulus,
    ))
}

/// `(u_pp, u_pm)` from dressing parameters; `channels` holds
/// `(c_pp, c_mm, c_pm, c_mp, delta2)` tuples.
#[pyfunction]
fn effective_couplings(
    omega_plus: f64,
    omega_minus: f64,
    delta_plus: f64,
    delta_minus: f64,
    channels: Vec<(f64, f64, f64, f64, f64)>,
) -> PyResult<(f64, f64)> {
    let params = DressingParams {
        omega_plus,
        omega_minus,
        delta_plus,
        delta_minus,
        channels: channels
            .into_iter()
            .map(|(c_pp, c_mm, c_pm, c_mp, delta2)| DressingChannel {
                c_pp,
                c_mm,
                c_pm,
                c_mp,
                delta2,
            })
            .collect(),
    };
    let u = experiment::effective_couplings(&params).map_err(py_err)?;
    Ok((u.u_pp, u.u_pm))
}

/// Run a sweep described by a config document; returns the CSV text.
#[pyfunction]
#[pyo3(signature = (config_json, jobs = 1))]
fn run_sweep(py: Python<'_>, config_json: &str, jobs: usize) -> PyResult<String> {
    let config = config_json.parse::<Config>().map_err(py_err)?;
    let req = SweepRequest::new(config, jobs).map_err(py_err)?;
    let result = py.detach(|| sweep::run_sweep(&req)).map_err(py_err)?;
    Ok(String::from_utf8(export::to_csv(&result)).expect("csv is utf-8"))
}

#[pymodule]
fn spinsync_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetworkSpec>()?;
    m.add_class::<PySteadyState>()?;
    m.add_function(wrap_pyfunction!(steady_state, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_s2, m)?)?;
    m.add_function(wrap_pyfunction!(mean_field, m)?)?;
    m.add_function(wrap_pyfunction!(effective_couplings, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
