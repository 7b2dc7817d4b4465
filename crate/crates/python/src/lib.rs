//! Python bindings: vorticity distributions, stream data, spectral data,
//! wave branches and the flow-force region.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cuspwave::config::RunConfig;
use cuspwave::region::{
    build_region_with, contains_exact, flow_force_variation, flow_force_wave, CuspRegion,
};
use cuspwave::spectral::{mu0, mu1, spectral_point};
use cuspwave::stream::{bernoulli_of_lambda, conjugate_streams_with, critical_data, depth, CriticalData};
use cuspwave::vorticity::{make_vorticity, VorticityFn, VorticitySpec};
use cuspwave::wave::{check_invariants, continue_branch, solitary_approx, WaveGrid, WaveSetup};
use cuspwave::Error;

fn to_py(e: Error) -> PyErr {
    if e.is_solver_failure() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// A vorticity distribution ω(p) on [0, 1] with its critical data.
#[pyclass(frozen)]
struct Vorticity {
    v: VorticityFn,
    cd: CriticalData,
}

impl Vorticity {
    fn build(spec: VorticitySpec) -> PyResult<Self> {
        let v = make_vorticity(spec).map_err(to_py)?;
        let cd = critical_data(&v).map_err(to_py)?;
        Ok(Self { v, cd })
    }

    fn setup(&self, r: f64, np: usize) -> PyResult<std::sync::Arc<WaveSetup>> {
        WaveSetup::with_critical(&self.v, &self.cd, r, np).map_err(to_py)
    }
}

#[pymethods]
impl Vorticity {
    #[staticmethod]
    fn zero() -> PyResult<Self> {
        Self::build(VorticitySpec::Zero)
    }

    #[staticmethod]
    fn constant(b: f64) -> PyResult<Self> {
        Self::build(VorticitySpec::Constant { b })
    }

    /// ω(p) = a + b·p
    #[staticmethod]
    fn affine(a: f64, b: f64) -> PyResult<Self> {
        Self::build(VorticitySpec::Affine { a, b })
    }

    #[staticmethod]
    fn samples(p: Vec<f64>, omega: Vec<f64>) -> PyResult<Self> {
        Self::build(VorticitySpec::Samples { p, omega })
    }

    fn omega(&self, p: f64) -> f64 {
        self.v.omega(p)
    }

    fn big_omega(&self, tau: f64) -> f64 {
        self.v.big_omega(tau)
    }

    #[getter]
    fn omega_class(&self) -> &'static str {
        self.v.class.as_str()
    }

    fn depth(&self, lam: f64) -> PyResult<f64> {
        depth(&self.v, lam).map_err(to_py)
    }

    fn bernoulli(&self, lam: f64) -> PyResult<f64> {
        bernoulli_of_lambda(&self.v, lam).map_err(to_py)
    }

    fn critical<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        let cd = &self.cd;
        d.set_item("lambda0", cd.lambda0)?;
        d.set_item("lambda_c", cd.lambda_c)?;
        d.set_item("r_c", cd.r_c)?;
        d.set_item("d_c", cd.d_c)?;
        d.set_item("d0", cd.d0)?;
        d.set_item("r0", cd.r0)?;
        d.set_item("tie", self.v.tie)?;
        Ok(d)
    }

    fn conjugate_streams<'py>(&self, py: Python<'py>, r: f64) -> PyResult<Bound<'py, PyDict>> {
        let pair = conjugate_streams_with(&self.v, &self.cd, r).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("lambda_plus", pair.lambda_plus)?;
        d.set_item("lambda_minus", pair.lambda_minus)?;
        d.set_item("d_plus", pair.d_plus)?;
        d.set_item("d_minus", pair.d_minus)?;
        Ok(d)
    }

    /// μ₀, μ₁ and k* of the Sturm–Liouville problem at λ.
    #[pyo3(signature = (lam, np = 64))]
    fn spectrum<'py>(&self, py: Python<'py>, lam: f64, np: usize) -> PyResult<Bound<'py, PyDict>> {
        let (m0, shot) = mu0(&self.v, lam, np).map_err(to_py)?;
        let sp = spectral_point(&self.v, lam, np).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("mu0", m0)?;
        d.set_item("mu1", mu1(&self.v, lam).map_err(to_py)?)?;
        d.set_item("k_star", sp.k_star)?;
        d.set_item("p", shot.p)?;
        d.set_item("phi0", shot.v)?;
        Ok(d)
    }

    /// Boundary curves of the flow-force region up to `r_max`.
    #[pyo3(signature = (r_max, n = 64))]
    fn region(&self, r_max: f64, n: usize) -> PyResult<Region> {
        build_region_with(&self.v, &self.cd, r_max, n)
            .map(|inner| Region { inner })
            .map_err(to_py)
    }

    /// Position of (r, s) relative to the region, from the exact stream flow forces.
    fn classify(&self, r: f64, s: f64) -> PyResult<String> {
        let p = contains_exact(&self.v, &self.cd, r, s).map_err(to_py)?;
        Ok(format!("{:?}", p.position))
    }

    /// Stokes waves at the crest heights `targets`; returns the waves and the
    /// truncation reason, if the branch stopped early.
    #[pyo3(signature = (r, targets, np = 64, nq = 256))]
    fn stokes_branch(&self, r: f64, targets: Vec<f64>, np: usize, nq: usize) -> PyResult<(Vec<Wave>, Option<String>)> {
        let setup = self.setup(r, np)?;
        let mut cfg = RunConfig::new(self.v.spec.clone());
        cfg.grid.nq = nq;
        let br = continue_branch(&setup, &targets, &cfg.branch_options()).map_err(to_py)?;
        let waves = br.waves.into_iter().map(|inner| Wave { inner }).collect();
        Ok((waves, br.truncated.map(|t| t.reason)))
    }

    /// Long-period approximation of the solitary wave: (wave, tail error, converged).
    #[pyo3(signature = (r, tail_tol = 1e-3, np = 64, nq = 256))]
    fn solitary(&self, r: f64, tail_tol: f64, np: usize, nq: usize) -> PyResult<(Wave, f64, bool)> {
        let setup = self.setup(r, np)?;
        let mut cfg = RunConfig::new(self.v.spec.clone());
        cfg.grid.nq = nq;
        let s = solitary_approx(&setup, tail_tol, &cfg.branch_options()).map_err(to_py)?;
        Ok((Wave { inner: s.wave }, s.tail_error, s.converged))
    }
}

#[pyclass(frozen)]
struct Region {
    inner: CuspRegion,
}

#[pymethods]
impl Region {
    #[getter]
    fn r(&self) -> Vec<f64> {
        self.inner.r_grid.clone()
    }

    #[getter]
    fn s_minus(&self) -> Vec<f64> {
        self.inner.s_minus.clone()
    }

    #[getter]
    fn s_plus(&self) -> Vec<f64> {
        self.inner.s_plus.clone()
    }

    #[getter]
    fn r0(&self) -> f64 {
        self.inner.r0
    }
}

/// One converged wave on the (q, p) grid.
#[pyclass(frozen)]
struct Wave {
    inner: WaveGrid,
}

#[pymethods]
impl Wave {
    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.as_str()
    }

    #[getter]
    fn half_period(&self) -> f64 {
        self.inner.half_period()
    }

    #[getter]
    fn crest_height(&self) -> f64 {
        self.inner.crest_height()
    }

    /// Surface elevation at the q-nodes, crest first.
    #[getter]
    fn eta(&self) -> Vec<f64> {
        self.inner.eta()
    }

    #[getter]
    fn flow_force(&self) -> f64 {
        flow_force_wave(&self.inner)
    }

    #[getter]
    fn flow_force_variation(&self) -> f64 {
        flow_force_variation(&self.inner)
    }

    /// Names of the violated invariants; empty when the wave is admissible.
    #[pyo3(signature = (slope_bound = 1.0))]
    fn invariant_failures(&self, slope_bound: f64) -> Vec<&'static str> {
        check_invariants(&self.inner, slope_bound).failures()
    }
}

/// Runs the flow-force verification for a JSON run configuration and
/// returns the verdict as a JSON string.
#[pyfunction]
#[pyo3(signature = (config_json, r, targets, tail_tol = 1e-3))]
fn verify_bl(py: Python<'_>, config_json: &str, r: f64, targets: Vec<f64>, tail_tol: f64) -> PyResult<String> {
    let cfg = RunConfig::from_json(config_json).map_err(to_py)?;
    let v = cfg.vorticity_fn().map_err(to_py)?;
    py.detach(|| {
        let cd = critical_data(&v)?;
        let setup = WaveSetup::with_critical(&v, &cd, r, cfg.grid.np)?;
        let verdict = cuspwave::cli::verify_bl(&cfg, &v, &cd, &setup, &targets, tail_tol)?;
        Ok(cuspwave::output::render_json(&verdict.to_json()))
    })
    .map_err(to_py)
}

#[pymodule]
fn cuspwave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Vorticity>()?;
    m.add_class::<Region>()?;
    m.add_class::<Wave>()?;
    m.add_function(wrap_pyfunction!(verify_bl, m)?)?;
    Ok(())
}
