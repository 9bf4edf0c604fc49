//! Python bindings for `devcorr`.

use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use devcorr::correlations::{correlations_exact, quantum_correlation_q};
use devcorr::pipeline::{self, StateSpec};
use devcorr::relaxation::{self, RelaxationParams};
use devcorr::state::{Mat4, Party, ThermalState};
use devcorr::{Error, FitConfig, OptimizerConfig, RunConfig};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(m) => PyOSError::new_err(m),
        Error::OptimizerFailure(_)
        | Error::FitDivergence(_)
        | Error::DegenerateSignal(_)
        | Error::InconsistentFits { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn party(name: &str) -> PyResult<Party> {
    match name {
        "A" | "a" => Ok(Party::A),
        "B" | "b" => Ok(Party::B),
        _ => Err(PyValueError::new_err(format!("party must be 'A' or 'B', got '{name}'"))),
    }
}

fn params(c: f64, j0: f64, j1: f64, j2: f64) -> PyResult<RelaxationParams> {
    RelaxationParams::new(c, j0, j1, j2).map_err(to_py)
}

/// Traceless Hermitian 4x4 deviation matrix in the basis |00>, |01>, |10>, |11>.
#[pyclass(name = "DeviationMatrix", module = "devcorr_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyDeviation(devcorr::DeviationMatrix);

#[pymethods]
impl PyDeviation {
    /// Validates hermiticity and tracelessness of a 4x4 nested list.
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
            return Err(PyValueError::new_err("expected a 4x4 nested list"));
        }
        let m = Mat4::from_fn(|i, j| rows[i][j]);
        devcorr::DeviationMatrix::new(m).map(PyDeviation).map_err(to_py)
    }

    /// Named state: psi+, psi-, phi+, phi-, x-random, computational:ij or equilibrium.
    #[staticmethod]
    #[pyo3(signature = (name, alpha = 1.0, seed = devcorr::config::K_ABOVE_Q_SEED))]
    fn prepare(name: &str, alpha: f64, seed: u64) -> PyResult<Self> {
        let spec: StateSpec = name.parse().map_err(to_py)?;
        let cfg = RunConfig { alpha, seed, ..RunConfig::default() };
        pipeline::prepare(spec, &cfg).map(PyDeviation).map_err(to_py)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        devcorr::io::parse_deviation(text).map(PyDeviation).map_err(to_py)
    }

    fn to_text(&self) -> String {
        devcorr::io::format_deviation(&self.0)
    }

    fn to_list(&self) -> Vec<Vec<Complex64>> {
        (0..4).map(|i| (0..4).map(|j| self.0.get(i, j)).collect()).collect()
    }

    /// Reduced 2x2 matrix of the kept party ("A" or "B").
    fn partial_trace(&self, keep: &str) -> PyResult<Vec<Vec<Complex64>>> {
        let m = self.0.partial_trace(party(keep)?);
        Ok((0..2).map(|i| (0..2).map(|j| m[(i, j)]).collect()).collect())
    }

    fn __getitem__(&self, idx: (usize, usize)) -> PyResult<Complex64> {
        if idx.0 > 3 || idx.1 > 3 {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.0.get(idx.0, idx.1))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("DeviationMatrix({:?})", self.to_list())
    }
}

/// Total, classical and quantum correlation with the optimal local basis.
#[pyclass(name = "CorrelationReport", module = "devcorr_py", frozen, get_all)]
struct PyCorrelationReport {
    total_i: f64,
    classical_k: f64,
    quantum_q: f64,
    /// `(theta_A, phi_A, theta_B, phi_B)`
    basis: (f64, f64, f64, f64),
    units: &'static str,
}

#[pymethods]
impl PyCorrelationReport {
    fn __repr__(&self) -> String {
        format!(
            "CorrelationReport(I={}, K={}, Q={}, units='{}')",
            self.total_i, self.classical_k, self.quantum_q, self.units
        )
    }
}

impl From<devcorr::CorrelationReport> for PyCorrelationReport {
    fn from(r: devcorr::CorrelationReport) -> Self {
        let b = r.optimal_basis;
        PyCorrelationReport {
            total_i: r.total_i,
            classical_k: r.classical_k,
            quantum_q: r.quantum_q,
            basis: (b.theta_a, b.phi_a, b.theta_b, b.phi_b),
            units: match r.units {
                devcorr::Units::Bits => "bits",
                devcorr::Units::EpsSquaredOverLn2 => "eps^2/ln2",
            },
        }
    }
}

/// I, K and Q from the leading-order expansion, in units of eps^2/ln2.
#[pyfunction]
fn correlations(py: Python<'_>, d: &PyDeviation) -> PyResult<PyCorrelationReport> {
    let d = d.0;
    py.detach(|| quantum_correlation_q(&d, &OptimizerConfig::default()))
        .map(Into::into)
        .map_err(to_py)
}

/// I, K and Q of `1/4 + epsilon * d` from exact entropies, in bits.
#[pyfunction]
fn correlations_exact_bits(py: Python<'_>, d: &PyDeviation, epsilon: f64) -> PyResult<PyCorrelationReport> {
    let s = ThermalState::new(epsilon, d.0).map_err(to_py)?;
    py.detach(|| correlations_exact(&s, &OptimizerConfig::default(), None))
        .map(Into::into)
        .map_err(to_py)
}

/// One-sided quantum discord in bits, measuring `party`.
#[pyfunction]
fn discord(py: Python<'_>, d: &PyDeviation, epsilon: f64, party_name: &str) -> PyResult<f64> {
    let s = ThermalState::new(epsilon, d.0).map_err(to_py)?;
    let p = party(party_name)?;
    py.detach(|| devcorr::correlations::discord_exact(&s, p, &OptimizerConfig::default()))
        .map_err(to_py)
}

/// `(tau_L1, tau_L2, tau_T)` in seconds.
#[pyfunction]
#[pyo3(signature = (c = 12e9, j1 = 3.0e-9, j2 = 3.4e-9))]
fn time_constants(c: f64, j1: f64, j2: f64) -> PyResult<(f64, f64, f64)> {
    let t = relaxation::time_constants(&params(c, 0.0, j1, j2)?).map_err(to_py)?;
    Ok((t.tau_l1, t.tau_l2, t.tau_t))
}

/// Relaxed deviation matrix after `t` seconds.
#[pyfunction]
#[pyo3(signature = (d, t, c = 12e9, j0 = 17e-9, j1 = 3.0e-9, j2 = 3.4e-9))]
fn evolve(d: &PyDeviation, t: f64, c: f64, j0: f64, j1: f64, j2: f64) -> PyResult<PyDeviation> {
    relaxation::evolve(&d.0, &params(c, j0, j1, j2)?, t)
        .map(PyDeviation)
        .map_err(to_py)
}

/// `[(k dt, D(k dt)) for k in 1..=n]`.
#[pyfunction]
#[pyo3(signature = (d, dt = 1.5e-3, n = 40, c = 12e9, j0 = 17e-9, j1 = 3.0e-9, j2 = 3.4e-9))]
fn time_series(
    d: &PyDeviation,
    dt: f64,
    n: usize,
    c: f64,
    j0: f64,
    j1: f64,
    j2: f64,
) -> PyResult<Vec<(f64, PyDeviation)>> {
    let s = relaxation::time_series(&d.0, &params(c, j0, j1, j2)?, dt, n).map_err(to_py)?;
    Ok(s.into_iter().map(|(t, d)| (t, PyDeviation(d))).collect())
}

/// Fitted spectral densities and population amplitudes with uncertainties.
#[pyclass(name = "FitReport", module = "devcorr_py", frozen, get_all)]
struct PyFitReport {
    j0: (f64, f64),
    j1: (f64, f64),
    j2: (f64, f64),
    j1_population: (f64, f64),
    j2_population: (f64, f64),
    r1: (f64, f64),
    r2: (f64, f64),
    r3: (f64, f64),
    consistency_gap: f64,
    consistent: bool,
}

#[pymethods]
impl PyFitReport {
    fn __repr__(&self) -> String {
        format!(
            "FitReport(J0={:e}, J1={:e}, J2={:e}, gap={:.3})",
            self.j0.0, self.j1.0, self.j2.0, self.consistency_gap
        )
    }
}

/// Fits J0, J1, J2 and R1..R3 to a series of `(t, DeviationMatrix)`,
/// optionally after adding seeded Gaussian noise of size `noise`.
#[pyfunction]
#[pyo3(signature = (series, c = 12e9, noise = None, seed = 0, consistency_threshold = 0.25))]
fn fit(
    py: Python<'_>,
    series: Vec<(f64, PyDeviation)>,
    c: f64,
    noise: Option<f64>,
    seed: u64,
    consistency_threshold: f64,
) -> PyResult<PyFitReport> {
    let series: Vec<_> = series.into_iter().map(|(t, d)| (t, d.0)).collect();
    let r = py
        .detach(|| {
            let data = match noise {
                Some(sigma) => devcorr::add_noise(&series, sigma, seed)?,
                None => series,
            };
            let cfg = FitConfig { consistency_threshold, strict: false };
            devcorr::estimate_parameters(&data, c, &cfg)
        })
        .map_err(to_py)?;
    let e = |x: devcorr::fitting::Estimate| (x.value, x.uncertainty);
    Ok(PyFitReport {
        j0: e(r.j0),
        j1: e(r.j1),
        j2: e(r.j2),
        j1_population: e(r.j1_population),
        j2_population: e(r.j2_population),
        r1: e(r.r1),
        r2: e(r.r2),
        r3: e(r.r3),
        consistency_gap: r.consistency_gap,
        consistent: r.consistent,
    })
}

#[pymodule]
fn devcorr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDeviation>()?;
    m.add_class::<PyCorrelationReport>()?;
    m.add_class::<PyFitReport>()?;
    m.add_function(wrap_pyfunction!(correlations, m)?)?;
    m.add_function(wrap_pyfunction!(correlations_exact_bits, m)?)?;
    m.add_function(wrap_pyfunction!(discord, m)?)?;
    m.add_function(wrap_pyfunction!(time_constants, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(time_series, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    Ok(())
}
