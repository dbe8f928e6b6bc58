//! The Cauchy-Schwarz bound on `dS^2 / Sigma`, the figure of merit
//! `s^T m^-1 s` and the search for an optimal working point.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::metrics::{entropy_gradient, ControlBasis, MetricRecipe, ThermoMetric};
use crate::optimize::{multistart_max, OptimizerConfig};
use crate::protocol::{integrate_dissipation, proportional_cycle, Shape};
use crate::thermo_core::{gibbs_point, heat_capacity, HermitianOperator};

/// `C(G) / tau_eq`.
pub fn cs_bound_single_timescale(g: &HermitianOperator, tau_eq: f64) -> Result<f64> {
    if !(tau_eq > 0.0) {
        return invalid("tau_eq must be positive");
    }
    Ok(heat_capacity(&gibbs_point(g)) / tau_eq)
}

/// `C(G) / tau_eq(G)` for a state-dependent relaxation time.
pub fn cs_bound_point_dependent<F>(g: &HermitianOperator, tau_eq: F) -> Result<f64>
where
    F: Fn(&HermitianOperator) -> f64,
{
    cs_bound_single_timescale(g, tau_eq(g))
}

/// Solves `m mu = s` on the range of `m` and returns `(s^T mu, mu)`.
///
/// Eigenvalues below `1e-12 |m|` are treated as zero; `s` must then have
/// no component along them.
pub fn solve_metric(m: &DMatrix<f64>, s: &[f64]) -> Result<(f64, Vec<f64>)> {
    let k = s.len();
    if m.nrows() != k || m.ncols() != k {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: k,
        });
    }
    let sv = DVector::from_column_slice(s);
    let eig = SymmetricEigen::new(m.clone());
    let norm = eig.eigenvalues.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    let floor = 1e-12 * norm;
    let snorm = sv.norm();
    let mut value = 0.0;
    let mut mu = DVector::zeros(k);
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        let proj = v.dot(&sv);
        if lam > floor {
            value += proj * proj / lam;
            mu += v * (proj / lam);
        } else if proj.abs() > 1e-10 * snorm.max(f64::MIN_POSITIVE) {
            return Err(Error::SingularMetric(format!(
                "entropy gradient has a component {proj:.3e} along a null direction of the metric"
            )));
        }
    }
    Ok((value, mu.iter().copied().collect()))
}

/// `s^T m^-1 s` at `lambda`.
pub fn general_figure_of_merit(
    basis: &ControlBasis,
    lambda: &[f64],
    metric: &ThermoMetric,
) -> Result<f64> {
    let s = entropy_gradient(basis, lambda)?;
    Ok(solve_metric(metric.matrix(), &s)?.0)
}

/// Value and unit-norm optimal direction at a point.
fn fom_and_direction(
    basis: &ControlBasis,
    lambda: &[f64],
    recipe: &MetricRecipe,
) -> Result<(f64, Vec<f64>)> {
    let metric = recipe.evaluate(basis, lambda)?;
    let s = entropy_gradient(basis, lambda)?;
    let (value, mu) = solve_metric(metric.matrix(), &s)?;
    Ok((value, normalize_direction(&mu)))
}

/// Unit Euclidean norm with the sign fixed so the components sum to a
/// nonnegative number.
pub fn normalize_direction(mu: &[f64]) -> Vec<f64> {
    let n = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        return mu.to_vec();
    }
    let sign = if mu.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    mu.iter().map(|x| sign * x / n).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct WorkingPoint {
    pub lambda_star: Vec<f64>,
    pub figure_of_merit: f64,
    pub direction_mu: Vec<f64>,
}

/// Maximizes `s^T m^-1 s` over the controls. Golden section for one control,
/// Nelder-Mead otherwise, from seeded multi-starts.
pub fn find_working_point(
    basis: &ControlBasis,
    lambda0: &[f64],
    recipe: &MetricRecipe,
    cfg: &OptimizerConfig,
) -> Result<WorkingPoint> {
    if lambda0.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            got: lambda0.len(),
        });
    }
    fom_and_direction(basis, lambda0, recipe)?;
    let obj = |x: &[f64]| match fom_and_direction(basis, x, recipe) {
        Ok((v, _)) => v,
        Err(_) => f64::NEG_INFINITY,
    };
    let best = multistart_max(obj, lambda0, cfg)?;
    let (value, mu) = fom_and_direction(basis, &best.x, recipe)?;
    Ok(WorkingPoint {
        lambda_star: best.x,
        figure_of_merit: value,
        direction_mu: mu,
    })
}

/// `[dS^2 / Sigma] / [C(G0) / tau_eq]` for a small proportional cycle with
/// constant logarithmic speed.
pub fn saturation_ratio(g0: &HermitianOperator, tau_eq: f64, epsilon: f64, m: usize) -> Result<f64> {
    saturation_ratio_with_shape(g0, tau_eq, epsilon, m, Shape::Geometric)
}

pub fn saturation_ratio_with_shape(
    g0: &HermitianOperator,
    tau_eq: f64,
    epsilon: f64,
    m: usize,
    shape: Shape,
) -> Result<f64> {
    if !(epsilon > 0.0) {
        return invalid("epsilon must be positive");
    }
    let p = proportional_cycle(g0, epsilon, m, shape)?.with_metric(MetricRecipe::Kmb { tau_eq });
    let d = integrate_dissipation(&p)?;
    let bound = cs_bound_single_timescale(g0, tau_eq)?;
    Ok(d.delta_s * d.delta_s / d.sigma / bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit_basis() -> ControlBasis {
        ControlBasis::new(
            vec![HermitianOperator::from_diagonal(&[0.0, 1.0]).unwrap()],
            vec!["w".into()],
        )
        .unwrap()
    }

    #[test]
    fn single_timescale_values() {
        let g = HermitianOperator::from_diagonal(&[0.0, 2.40]).unwrap();
        assert!((cs_bound_single_timescale(&g, 1.0).unwrap() - 0.4392).abs() < 1e-4);
        let c = HermitianOperator::identity(3).scale(2.0);
        assert_eq!(cs_bound_single_timescale(&c, 1.0).unwrap(), 0.0);
        let dep = cs_bound_point_dependent(&g, |_| 2.0).unwrap();
        assert!((dep - cs_bound_single_timescale(&g, 1.0).unwrap() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn proportional_control_reduces_to_capacity() {
        let g0 = HermitianOperator::from_diagonal(&[0.0, 0.4, 1.9, 3.0]).unwrap();
        let basis = ControlBasis::new(vec![g0.clone()], vec!["g".into()]).unwrap();
        let m = crate::metrics::kmb_metric(&basis, &[1.0], 1.7).unwrap();
        let f = general_figure_of_merit(&basis, &[1.0], &m).unwrap();
        let c = cs_bound_single_timescale(&g0, 1.7).unwrap();
        assert!((f - c).abs() < 1e-10 * c);
    }

    #[test]
    fn zero_generator_has_zero_merit() {
        let basis = qubit_basis();
        let m = crate::metrics::kmb_metric(&basis, &[0.0], 1.0).unwrap();
        assert_eq!(general_figure_of_merit(&basis, &[0.0], &m).unwrap(), 0.0);
    }

    #[test]
    fn singular_metric_detected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(solve_metric(&m, &[1.0, 1.0]), Err(Error::SingularMetric(_))));
        let (v, mu) = solve_metric(&m, &[2.0, 0.0]).unwrap();
        assert_eq!(v, 4.0);
        assert_eq!(mu, vec![2.0, 0.0]);
    }

    #[test]
    fn qubit_working_point() {
        let wp = find_working_point(
            &qubit_basis(),
            &[1.0],
            &MetricRecipe::Kmb { tau_eq: 1.0 },
            &OptimizerConfig::default(),
        )
        .unwrap();
        assert!((wp.lambda_star[0] - 2.40).abs() < 0.01);
        assert!((wp.figure_of_merit - 0.4392).abs() < 1e-3);
    }

    #[test]
    fn saturation_near_optimum() {
        let g = HermitianOperator::from_diagonal(&[0.0, 2.3994]).unwrap();
        let r = saturation_ratio(&g, 1.0, 1e-3, 201).unwrap();
        assert!(r > 0.999 && r <= 1.0 + 1e-9);
        let big = saturation_ratio(&g, 1.0, 0.5, 201).unwrap();
        assert!(big < 1.0);
    }
}
