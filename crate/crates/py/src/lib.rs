//! Python bindings: metrics, working points, cycle optimization, the
//! degenerate-level engine and the scaling helpers.

use carnot_ld::bound_opt::find_working_point;
use carnot_ld::cycle_opt::{self, CyclePerformance};
use carnot_ld::explicit_sim::{self, ExplicitEngine};
use carnot_ld::metrics::{kmb_metric, ControlBasis, GeneratorModel, MetricRecipe};
use carnot_ld::models::{self, IsingMode};
use carnot_ld::optimize::OptimizerConfig;
use carnot_ld::scaling;
use carnot_ld::thermo_core::{self as tc, HermitianOperator};
use carnot_ld::Error;
use nalgebra::DMatrix;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::DimensionMismatch { .. } | Error::Size(_) | Error::Parse { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Real symmetric matrix from nested rows.
fn operator(rows: &[Vec<f64>]) -> carnot_ld::Result<HermitianOperator> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput("operator must be a square matrix".into()));
    }
    HermitianOperator::from_real(nalgebra_matrix(rows))
}

fn nalgebra_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

fn basis(ops: &[Vec<Vec<f64>>]) -> carnot_ld::Result<ControlBasis> {
    let ops = ops.iter().map(|m| operator(m)).collect::<carnot_ld::Result<Vec<_>>>()?;
    ControlBasis::unlabeled(ops)
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

#[pyclass(name = "BathPair", frozen, get_all)]
struct PyBathPair {
    t_h: f64,
    t_c: f64,
}

impl PyBathPair {
    fn inner(&self) -> PyResult<cycle_opt::BathPair> {
        cycle_opt::BathPair::new(self.t_h, self.t_c).map_err(to_py)
    }
}

#[pymethods]
impl PyBathPair {
    #[new]
    fn new(t_h: f64, t_c: f64) -> PyResult<Self> {
        cycle_opt::BathPair::new(t_h, t_c).map_err(to_py)?;
        Ok(Self { t_h, t_c })
    }

    fn carnot(&self) -> PyResult<f64> {
        Ok(self.inner()?.carnot())
    }

    fn curzon_ahlborn(&self) -> PyResult<f64> {
        Ok(self.inner()?.curzon_ahlborn())
    }

    fn gamma_ca(&self) -> PyResult<f64> {
        Ok(self.inner()?.gamma_ca())
    }

    fn __repr__(&self) -> String {
        format!("BathPair(t_h={}, t_c={})", self.t_h, self.t_c)
    }
}

#[pyclass(name = "Performance", frozen, get_all)]
struct PyPerformance {
    delta_s: f64,
    sigma_c: f64,
    sigma_h: f64,
    tau_c: f64,
    tau_h: f64,
    q_h: f64,
    q_c: f64,
    w: f64,
    p: f64,
    eta: f64,
}

impl From<CyclePerformance> for PyPerformance {
    fn from(c: CyclePerformance) -> Self {
        Self {
            delta_s: c.delta_s,
            sigma_c: c.sigma_c,
            sigma_h: c.sigma_h,
            tau_c: c.tau_c,
            tau_h: c.tau_h,
            q_h: c.q_h,
            q_c: c.q_c,
            w: c.w,
            p: c.p,
            eta: c.eta,
        }
    }
}

#[pymethods]
impl PyPerformance {
    fn __repr__(&self) -> String {
        format!("Performance(p={}, eta={}, tau_c={}, tau_h={})", self.p, self.eta, self.tau_c, self.tau_h)
    }
}

#[pyclass(name = "WorkingPoint", frozen, get_all)]
struct PyWorkingPoint {
    lambda_star: Vec<f64>,
    figure_of_merit: f64,
    direction_mu: Vec<f64>,
}

#[pyclass(name = "Engine", frozen, get_all)]
struct PyEngine {
    n: u32,
    gamma: f64,
    p_ideal: f64,
    p_ld: f64,
    p_exact: f64,
    eta: f64,
    tau_c: f64,
    tau_h: f64,
    sigma_w2: f64,
    warnings: Vec<String>,
}

impl From<ExplicitEngine> for PyEngine {
    fn from(e: ExplicitEngine) -> Self {
        Self {
            n: e.n,
            gamma: e.gamma,
            p_ideal: e.p_ideal,
            p_ld: e.p_ld,
            p_exact: e.p_exact,
            eta: e.eta,
            tau_c: e.tau_c,
            tau_h: e.tau_h,
            sigma_w2: e.sigma_w2,
            warnings: e.warnings,
        }
    }
}

#[pyclass(name = "ExplicitProtocol", frozen)]
struct PyExplicitProtocol(explicit_sim::ExplicitProtocol);

#[pymethods]
impl PyExplicitProtocol {
    #[new]
    #[pyo3(signature = (n, epsilon=0.1, gamma_rate=1.0, m=101))]
    fn new(n: u32, epsilon: f64, gamma_rate: f64, m: usize) -> PyResult<Self> {
        explicit_sim::ExplicitProtocol::new(n, epsilon, gamma_rate, m)
            .map(Self)
            .map_err(to_py)
    }

    fn grid(&self) -> Vec<f64> {
        self.0.grid()
    }

    fn slow_driving_population(&self, tau: f64, order: usize) -> PyResult<Vec<f64>> {
        Ok(explicit_sim::slow_driving_population(&self.0, tau, order).map_err(to_py)?.values)
    }

    fn exact_population(&self, tau: f64) -> PyResult<Vec<f64>> {
        explicit_sim::exact_population_ode(&self.0, tau).map_err(to_py)
    }

    fn heat_by_order(&self, tau: f64, j: usize) -> PyResult<f64> {
        explicit_sim::heat_by_order(&self.0, tau, j).map_err(to_py)
    }

    fn delta_s(&self) -> f64 {
        explicit_sim::delta_s_ld(&self.0)
    }

    fn sigma(&self) -> f64 {
        explicit_sim::sigma_ld(&self.0)
    }

    fn engine(&self, r: f64, gamma: f64) -> PyResult<PyEngine> {
        explicit_sim::assemble_engine(&self.0, r, gamma).map(Into::into).map_err(to_py)
    }
}

/// `(ln Z, <G>, entropy, heat capacity)` of `exp(-G)/Z`.
#[pyfunction]
fn gibbs_summary(g: Vec<Vec<f64>>) -> PyResult<(f64, f64, f64, f64)> {
    let p = tc::gibbs_point(&operator(&g).map_err(to_py)?);
    Ok((p.log_z(), p.mean_generator(), tc::entropy(&p), tc::heat_capacity(&p)))
}

#[pyfunction]
fn kmb(operators: Vec<Vec<Vec<f64>>>, lam: Vec<f64>, tau_eq: f64) -> PyResult<Vec<Vec<f64>>> {
    let b = basis(&operators).map_err(to_py)?;
    Ok(rows(kmb_metric(&b, &lam, tau_eq).map_err(to_py)?.matrix()))
}

#[pyfunction]
#[pyo3(signature = (operators, lam, ohmicity, gamma0=1.0))]
fn bosonic_metric(operators: Vec<Vec<Vec<f64>>>, lam: Vec<f64>, ohmicity: f64, gamma0: f64) -> PyResult<Vec<Vec<f64>>> {
    let b = basis(&operators).map_err(to_py)?;
    let recipe = MetricRecipe::Lindblad {
        model: GeneratorModel::Bosonic { ohmicity, gamma0, temperature: 1.0 },
    };
    Ok(rows(recipe.evaluate(&b, &lam).map_err(to_py)?.matrix()))
}

/// Maximizes `s^T m^-1 s` under the single-timescale metric.
#[pyfunction]
#[pyo3(signature = (operators, lambda0, tau_eq=1.0, seed=0))]
fn working_point(operators: Vec<Vec<Vec<f64>>>, lambda0: Vec<f64>, tau_eq: f64, seed: u64) -> PyResult<PyWorkingPoint> {
    let b = basis(&operators).map_err(to_py)?;
    let cfg = OptimizerConfig { seed, ..Default::default() };
    let wp = find_working_point(&b, &lambda0, &MetricRecipe::Kmb { tau_eq }, &cfg).map_err(to_py)?;
    Ok(PyWorkingPoint {
        lambda_star: wp.lambda_star,
        figure_of_merit: wp.figure_of_merit,
        direction_mu: wp.direction_mu,
    })
}

#[pyfunction]
fn max_power_at_efficiency(delta_s: f64, sigma: f64, baths: &PyBathPair, gamma: f64) -> PyResult<PyPerformance> {
    cycle_opt::max_power_at_efficiency(delta_s, sigma, baths.inner()?, gamma)
        .map(Into::into)
        .map_err(to_py)
}

/// Unconstrained maximum power; `sigma_h` defaults to `sigma_c`.
#[pyfunction]
#[pyo3(signature = (delta_s, sigma_c, baths, sigma_h=None))]
fn max_power(delta_s: f64, sigma_c: f64, baths: &PyBathPair, sigma_h: Option<f64>) -> PyResult<PyPerformance> {
    cycle_opt::max_power_asymmetric(delta_s, sigma_c, sigma_h.unwrap_or(sigma_c), baths.inner()?)
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
fn optimal_degenerate_gap(levels: u64) -> PyResult<(f64, f64)> {
    models::optimal_degenerate_gap(levels).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n, exact=false, seed=0))]
fn ising_max_capacity(n: u32, exact: bool, seed: u64) -> PyResult<(f64, f64, f64)> {
    let mode = if exact { IsingMode::Exact } else { IsingMode::Transfer };
    let cfg = OptimizerConfig { seed, ..Default::default() };
    models::ising_max_capacity(n, mode, &cfg).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (ohmicity=1.0, gamma0=1.0, seed=0))]
fn three_level_optimum(ohmicity: f64, gamma0: f64, seed: u64) -> PyResult<PyWorkingPoint> {
    let cfg = OptimizerConfig { seed, ..Default::default() };
    let wp = models::three_level_optimum(ohmicity, gamma0, &cfg).map_err(to_py)?;
    Ok(PyWorkingPoint {
        lambda_star: wp.lambda_star,
        figure_of_merit: wp.figure_of_merit,
        direction_mu: wp.direction_mu,
    })
}

/// Degenerate-level engines at `gamma = 1 - 1/N`.
#[pyfunction]
#[pyo3(signature = (ns, epsilon=0.1, r=0.9, gamma_rate=1.0))]
fn efficiency_sweep(ns: Vec<u32>, epsilon: f64, r: f64, gamma_rate: f64) -> PyResult<Vec<PyEngine>> {
    let engines = explicit_sim::efficiency_sweep(&ns, epsilon, r, gamma_rate).map_err(to_py)?;
    Ok(engines.into_iter().map(Into::into).collect())
}

/// `(alpha_c - z nu - 1, supralinear)`.
#[pyfunction]
fn criticality_check(alpha_c: f64, nu: f64, z: f64) -> (f64, bool) {
    let v = scaling::criticality_check(alpha_c, nu, z);
    (v.margin, v.supralinear)
}

#[pymodule]
#[pyo3(name = "carnot_ld")]
fn carnot_ld_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBathPair>()?;
    m.add_class::<PyPerformance>()?;
    m.add_class::<PyWorkingPoint>()?;
    m.add_class::<PyEngine>()?;
    m.add_class::<PyExplicitProtocol>()?;
    m.add_function(wrap_pyfunction!(gibbs_summary, m)?)?;
    m.add_function(wrap_pyfunction!(kmb, m)?)?;
    m.add_function(wrap_pyfunction!(bosonic_metric, m)?)?;
    m.add_function(wrap_pyfunction!(working_point, m)?)?;
    m.add_function(wrap_pyfunction!(max_power_at_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(max_power, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_degenerate_gap, m)?)?;
    m.add_function(wrap_pyfunction!(ising_max_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(three_level_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(efficiency_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(criticality_check, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_rows_round_trip() {
        let m = vec![vec![0.0, 0.5], vec![0.5, 2.0]];
        assert_eq!(rows(&nalgebra_matrix(&m)), m);
        assert!(operator(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn basis_builds_metric() {
        let ops = vec![vec![vec![0.0, 0.0], vec![0.0, 1.0]]];
        let b = basis(&ops).unwrap();
        let m = kmb_metric(&b, &[2.4], 1.0).unwrap();
        assert!((m.matrix()[(0, 0)] * 2.4 * 2.4 - 0.4392).abs() < 1e-3);
    }
}
