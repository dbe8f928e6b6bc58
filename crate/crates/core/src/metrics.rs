//! Thermodynamic metrics `m_ij` at a control point and the entropy gradient.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::superops::{j_omega_eig, rate_matrix_bosonic_at, vectorize, RateMatrix, Superoperator};
use crate::thermo_core::{check_dim, gibbs_point, CMat, GibbsPoint, HermitianOperator};

/// Control operators `X_j` with `G = sum_j lambda_j X_j`.
#[derive(Clone, Debug)]
pub struct ControlBasis {
    operators: Vec<HermitianOperator>,
    labels: Vec<String>,
}

impl ControlBasis {
    pub fn new(operators: Vec<HermitianOperator>, labels: Vec<String>) -> Result<Self> {
        if operators.is_empty() {
            return invalid("control basis is empty");
        }
        if labels.len() != operators.len() {
            return invalid(format!(
                "{} labels for {} operators",
                labels.len(),
                operators.len()
            ));
        }
        let n = operators[0].dim();
        for op in &operators {
            check_dim(n, op.dim())?;
        }
        let k = operators.len();
        let gram = DMatrix::from_fn(k, k, |i, j| operators[i].hs_inner(&operators[j]));
        let ev = SymmetricEigen::new(gram).eigenvalues;
        let (lo, hi) = ev
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e.abs())));
        if !(lo > 0.0) || hi / lo > 1e12 {
            return invalid("control operators are linearly dependent");
        }
        Ok(Self { operators, labels })
    }

    /// Basis with labels `x0, x1, ...`.
    pub fn unlabeled(operators: Vec<HermitianOperator>) -> Result<Self> {
        let labels = (0..operators.len()).map(|i| format!("x{i}")).collect();
        Self::new(operators, labels)
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    pub fn operators(&self) -> &[HermitianOperator] {
        &self.operators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_diagonal(&self) -> bool {
        self.operators.iter().all(HermitianOperator::is_diagonal)
    }

    pub fn generator(&self, lambda: &[f64]) -> Result<HermitianOperator> {
        if lambda.iter().any(|x| !x.is_finite()) {
            return invalid("control vector has non-finite entries");
        }
        HermitianOperator::linear_combination(&self.operators, lambda)
    }

    pub fn point(&self, lambda: &[f64]) -> Result<GibbsPoint> {
        Ok(gibbs_point(&self.generator(lambda)?))
    }

    /// Basis with operators (and labels) reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Self::new(
            perm.iter().map(|&i| self.operators[i].clone()).collect(),
            perm.iter().map(|&i| self.labels[i].clone()).collect(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSource {
    KmbSingleTimescale,
    MultiTimescale,
    Lindbladian,
}

/// Symmetric positive-semidefinite metric (units of time).
#[derive(Clone, Debug)]
pub struct ThermoMetric {
    m: DMatrix<f64>,
    source: MetricSource,
    point: Vec<f64>,
}

impl ThermoMetric {
    pub fn new(m: DMatrix<f64>, source: MetricSource, point: Vec<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return invalid("metric must be square");
        }
        let norm = m.norm();
        if (&m - m.transpose()).norm() > 1e-10 * norm.max(1e-300) && norm > 0.0 {
            return Err(Error::Numerical("metric is not symmetric".into()));
        }
        let m = (&m + m.transpose()).scale(0.5);
        let ev = SymmetricEigen::new(m.clone()).eigenvalues;
        let scale = ev.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        if ev.iter().any(|&e| e < -1e-9 * scale) {
            return Err(Error::Numerical(format!(
                "metric is not positive semidefinite (min eigenvalue {:.3e})",
                ev.min()
            )));
        }
        Ok(Self { m, source, point })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn source(&self) -> MetricSource {
        self.source
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    /// `v^T m v`.
    pub fn quadratic(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        v.dot(&(&self.m * &v))
    }
}

/// Generator family used by the Lindbladian metric recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorModel {
    /// `L[X] = (omega Tr X - X)/tau_eq`.
    Exponential { tau_eq: f64 },
    /// Bosonic detailed-balance dissipator in the instantaneous eigenbasis.
    Bosonic {
        ohmicity: f64,
        gamma0: f64,
        #[serde(default = "one")]
        temperature: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// How a protocol evaluates its metric at each control point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum MetricRecipe {
    Kmb { tau_eq: f64 },
    Multiscale { taus: Vec<f64> },
    Lindblad { model: GeneratorModel },
}

impl MetricRecipe {
    pub fn evaluate(&self, basis: &ControlBasis, lambda: &[f64]) -> Result<ThermoMetric> {
        match self {
            MetricRecipe::Kmb { tau_eq } => kmb_metric(basis, lambda, *tau_eq),
            MetricRecipe::Multiscale { taus } => multiscale_metric(basis, lambda, taus),
            MetricRecipe::Lindblad { model } => {
                let point = basis.point(lambda)?;
                let g = point.generator();
                match model {
                    GeneratorModel::Bosonic {
                        ohmicity,
                        gamma0,
                        temperature,
                    } if basis.is_diagonal() => {
                        let rates =
                            rate_matrix_bosonic_at(&g.diagonal(), *ohmicity, *gamma0, *temperature)?;
                        rate_metric(basis, lambda, &rates)
                    }
                    GeneratorModel::Bosonic {
                        ohmicity,
                        gamma0,
                        temperature,
                    } => {
                        let l = Superoperator::bosonic(&point, *ohmicity, *gamma0, *temperature)?;
                        lindblad_metric(basis, lambda, &l)
                    }
                    GeneratorModel::Exponential { tau_eq } => {
                        let l = Superoperator::exponential_relaxation(&point, *tau_eq)?;
                        lindblad_metric(basis, lambda, &l)
                    }
                }
            }
        }
    }
}

fn check_lambda(basis: &ControlBasis, lambda: &[f64]) -> Result<()> {
    if lambda.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            got: lambda.len(),
        });
    }
    Ok(())
}

/// KMB covariance matrix `cov(X_i, X_j)`, i.e. the Hessian of `log Z`.
pub fn covariance_matrix(basis: &ControlBasis, point: &GibbsPoint) -> Result<DMatrix<f64>> {
    let xs: Vec<CMat> = basis
        .operators()
        .iter()
        .map(|x| point.to_eigenbasis(x))
        .collect::<Result<_>>()?;
    let k = xs.len();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let c = point.kmb_covariance_eig(&xs[i], &xs[j]);
            m[(i, j)] = c;
            m[(j, i)] = c;
        }
    }
    Ok(m)
}

pub fn kmb_metric(basis: &ControlBasis, lambda: &[f64], tau_eq: f64) -> Result<ThermoMetric> {
    check_lambda(basis, lambda)?;
    if !(tau_eq >= 0.0 && tau_eq.is_finite()) {
        return invalid("tau_eq must be nonnegative and finite");
    }
    let point = basis.point(lambda)?;
    let cov = covariance_matrix(basis, &point)?;
    ThermoMetric::new(cov.scale(tau_eq), MetricSource::KmbSingleTimescale, lambda.to_vec())
}

/// `m_ij = (tau_i + tau_j)/2 cov(X_i, X_j)`.
///
/// The form is indefinite when unequal timescales meet strongly correlated
/// controls; that case is reported as a numerical error.
pub fn multiscale_metric(basis: &ControlBasis, lambda: &[f64], taus: &[f64]) -> Result<ThermoMetric> {
    check_lambda(basis, lambda)?;
    if taus.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            got: taus.len(),
        });
    }
    if taus.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return invalid("relaxation times must be positive");
    }
    let point = basis.point(lambda)?;
    let cov = covariance_matrix(basis, &point)?;
    let m = DMatrix::from_fn(cov.nrows(), cov.ncols(), |i, j| {
        0.5 * (taus[i] + taus[j]) * cov[(i, j)]
    });
    ThermoMetric::new(m, MetricSource::MultiTimescale, lambda.to_vec())
}

/// `m_ij = (Tr(X_i L^D J[X_j]) + Tr(X_j L^D J[X_i]))/2`.
pub fn lindblad_metric(
    basis: &ControlBasis,
    lambda: &[f64],
    l: &Superoperator,
) -> Result<ThermoMetric> {
    check_lambda(basis, lambda)?;
    check_dim(basis.dim(), l.dim())?;
    let point = basis.point(lambda)?;
    let residual = l.matrix() * vectorize(&point.density());
    if residual.norm() > 1e-8 * l.matrix().norm().max(1.0) {
        return Err(Error::InconsistentGenerator(format!(
            "generator does not fix the Gibbs state (|L[omega]| = {:.3e})",
            residual.norm()
        )));
    }
    let drazin = l.drazin()?;
    let k = basis.len();
    let mut resp = Vec::with_capacity(k);
    for x in basis.operators() {
        let jt = j_omega_eig(&point, &point.to_eigenbasis(x)?);
        resp.push(drazin.apply(&point.from_eigenbasis(&jt))?);
    }
    let mut raw = DMatrix::zeros(k, k);
    for i in 0..k {
        let xi = basis.operators()[i].matrix();
        for j in 0..k {
            raw[(i, j)] = (xi * &resp[j]).trace().re;
        }
    }
    let m = (&raw + raw.transpose()).scale(0.5);
    ThermoMetric::new(m, MetricSource::Lindbladian, lambda.to_vec())
}

/// Population-sector version of [`lindblad_metric`] for diagonal controls,
/// with rates indexed like the diagonal of `G`.
pub fn rate_metric(basis: &ControlBasis, lambda: &[f64], rates: &RateMatrix) -> Result<ThermoMetric> {
    check_lambda(basis, lambda)?;
    if !basis.is_diagonal() {
        return invalid("population-sector metric needs diagonal controls");
    }
    let n = basis.dim();
    check_dim(n, rates.size())?;
    let g = basis.generator(lambda)?.diagonal();
    let gmin = g.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = g.iter().map(|e| (-(e - gmin)).exp()).collect();
    let z: f64 = w.iter().sum();
    let p = DVector::from_iterator(n, w.iter().map(|x| x / z));
    if (rates.entries() * &p).norm() > 1e-8 * rates.entries().norm().max(1.0) {
        return Err(Error::InconsistentGenerator(
            "rates do not fix the Gibbs populations".into(),
        ));
    }
    let xs: Vec<DVector<f64>> = basis
        .operators()
        .iter()
        .map(|x| DVector::from_vec(x.diagonal()))
        .collect();
    let mut resp = Vec::with_capacity(xs.len());
    for x in &xs {
        let mean = x.dot(&p);
        let jx = DVector::from_fn(n, |i, _| -(x[i] - mean) * p[i]);
        resp.push(rates.drazin_apply(&jx)?);
    }
    let k = xs.len();
    let raw = DMatrix::from_fn(k, k, |i, j| xs[i].dot(&resp[j]));
    let m = (&raw + raw.transpose()).scale(0.5);
    ThermoMetric::new(m, MetricSource::Lindbladian, lambda.to_vec())
}

/// `s_i = Tr[G J_omega[X_i]] = -cov(G, X_i)`.
pub fn entropy_gradient(basis: &ControlBasis, lambda: &[f64]) -> Result<Vec<f64>> {
    check_lambda(basis, lambda)?;
    let point = basis.point(lambda)?;
    entropy_gradient_at(basis, &point)
}

pub(crate) fn entropy_gradient_at(basis: &ControlBasis, point: &GibbsPoint) -> Result<Vec<f64>> {
    let gt = point.to_eigenbasis(point.generator())?;
    basis
        .operators()
        .iter()
        .map(|x| {
            let xt = point.to_eigenbasis(x)?;
            Ok(-point.kmb_covariance_eig(&gt, &xt))
        })
        .collect()
}

/// `s_i = Tr[(Tr[G omega] omega - G omega) X_i]`.
pub fn entropy_gradient_classical(basis: &ControlBasis, lambda: &[f64]) -> Result<Vec<f64>> {
    check_lambda(basis, lambda)?;
    let point = basis.point(lambda)?;
    let rho = point.density();
    let g = point.generator().matrix();
    let mean_g = point.mean_generator();
    let gw = g * &rho;
    basis
        .operators()
        .iter()
        .map(|x| {
            let a = (&rho * x.matrix()).trace().re;
            let b = (&gw * x.matrix()).trace().re;
            Ok(mean_g * a - b)
        })
        .collect()
}
