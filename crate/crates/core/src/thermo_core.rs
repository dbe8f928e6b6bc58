//! Gibbs-state thermodynamics over dense Hermitian operators.
//!
//! All quantities are adimensional: a generator `G` is the Hamiltonian
//! already multiplied by the inverse temperature.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Below this gap in log-populations the KMB weight uses its series limit.
const LOG_GAP_EPS: f64 = 1e-9;

/// Relative Frobenius tolerance for the Hermiticity check.
const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex Hermitian matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianJson", into = "HermitianJson")]
pub struct HermitianOperator {
    m: CMat,
}

impl HermitianOperator {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return invalid(format!(
                "operator must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            ));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("operator has non-finite entries");
        }
        let adj = m.adjoint();
        let norm = m.norm();
        let asym = (&m - &adj).norm();
        if asym > HERMITIAN_TOL * norm.max(f64::MIN_POSITIVE) && asym > 0.0 {
            return invalid(format!(
                "operator is not Hermitian (relative asymmetry {:.3e})",
                asym / norm
            ));
        }
        // Remove round-off asymmetry so downstream eigensolvers see an exact
        // Hermitian matrix.
        let m = (m + adj).scale(0.5);
        Ok(Self { m })
    }

    pub fn from_real(m: DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| C64::new(x, 0.0)))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        if d.is_empty() {
            return invalid("empty diagonal");
        }
        let v = DVector::from_iterator(d.len(), d.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(DMatrix::from_diagonal(&v))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: CMat::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: CMat::zeros(n, n),
        }
    }

    /// Projector `|i><i|` in dimension `n`.
    pub fn projector(n: usize, i: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        m[(i, i)] = C64::new(1.0, 0.0);
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            m: self.m.scale(c),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            m: &self.m + &other.m,
        })
    }

    /// `sum_j c_j X_j`.
    pub fn linear_combination(ops: &[HermitianOperator], coeffs: &[f64]) -> Result<Self> {
        if ops.is_empty() {
            return invalid("empty operator list");
        }
        if ops.len() != coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: ops.len(),
                got: coeffs.len(),
            });
        }
        let n = ops[0].dim();
        let mut m = CMat::zeros(n, n);
        for (op, &c) in ops.iter().zip(coeffs) {
            check_dim(n, op.dim())?;
            m += op.m.scale(c);
        }
        Ok(Self { m })
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// Hilbert-Schmidt inner product `Tr(A B)` (real for Hermitian pairs).
    pub fn hs_inner(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .zip(other.m.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| i == j || self.m[(i, j)] == C64::new(0.0, 0.0)))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct HermitianJson {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<HermitianJson> for HermitianOperator {
    type Error = Error;

    fn try_from(j: HermitianJson) -> Result<Self> {
        if j.entries.len() != j.dim {
            return invalid(format!("dim is {} but {} rows given", j.dim, j.entries.len()));
        }
        let mut m = CMat::zeros(j.dim, j.dim);
        for (r, row) in j.entries.iter().enumerate() {
            if row.len() != j.dim {
                return invalid(format!("row {} has {} entries, expected {}", r, row.len(), j.dim));
            }
            for (c, z) in row.iter().enumerate() {
                m[(r, c)] = C64::new(z[0], z[1]);
            }
        }
        HermitianOperator::new(m)
    }
}

impl From<HermitianOperator> for HermitianJson {
    fn from(h: HermitianOperator) -> Self {
        let n = h.dim();
        let entries = (0..n)
            .map(|r| (0..n).map(|c| [h.m[(r, c)].re, h.m[(r, c)].im]).collect())
            .collect();
        HermitianJson { dim: n, entries }
    }
}

/// Thermal state `e^{-G}/Z` stored through its eigendecomposition.
///
/// Eigenvalues are sorted ascending, so populations are nonincreasing.
#[derive(Clone, Debug)]
pub struct GibbsPoint {
    generator: HermitianOperator,
    eigvals: DVector<f64>,
    eigvecs: CMat,
    populations: DVector<f64>,
    log_pops: DVector<f64>,
    log_z: f64,
    mean_g: f64,
    entropy: f64,
    heat_capacity: f64,
}

pub fn gibbs_point(g: &HermitianOperator) -> GibbsPoint {
    let n = g.dim();
    let (vals, vecs) = if g.is_diagonal() {
        (g.diagonal(), CMat::identity(n, n))
    } else {
        let eig = SymmetricEigen::new(g.matrix().clone());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let eigvals = DVector::from_iterator(n, order.iter().map(|&i| vals[i]));
    let mut eigvecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        eigvecs.set_column(k, &vecs.column(i));
    }

    let gmin = eigvals[0];
    let sum: f64 = eigvals.iter().map(|&e| (-(e - gmin)).exp()).sum();
    let ln_sum = sum.ln();
    let log_pops = eigvals.map(|e| -(e - gmin) - ln_sum);
    let populations = log_pops.map(f64::exp);
    let log_z = -gmin + ln_sum;

    let mean_g: f64 = populations.iter().zip(eigvals.iter()).map(|(p, e)| p * e).sum();
    let heat_capacity: f64 = populations
        .iter()
        .zip(eigvals.iter())
        .map(|(p, e)| p * (e - mean_g).powi(2))
        .sum();
    let entropy: f64 = -populations
        .iter()
        .zip(log_pops.iter())
        .map(|(p, lp)| if *p > 0.0 { p * lp } else { 0.0 })
        .sum::<f64>();

    GibbsPoint {
        generator: g.clone(),
        eigvals,
        eigvecs,
        populations,
        log_pops,
        log_z,
        mean_g,
        entropy,
        heat_capacity,
    }
}

impl GibbsPoint {
    pub fn dim(&self) -> usize {
        self.eigvals.len()
    }

    pub fn generator(&self) -> &HermitianOperator {
        &self.generator
    }

    pub fn eigvals(&self) -> &DVector<f64> {
        &self.eigvals
    }

    pub fn eigvecs(&self) -> &CMat {
        &self.eigvecs
    }

    pub fn populations(&self) -> &DVector<f64> {
        &self.populations
    }

    pub fn log_populations(&self) -> &DVector<f64> {
        &self.log_pops
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// `Tr(omega G)`.
    pub fn mean_generator(&self) -> f64 {
        self.mean_g
    }

    /// The density matrix `omega` in the original basis.
    pub fn density(&self) -> CMat {
        let v = &self.eigvecs;
        let d = DMatrix::from_diagonal(&self.populations.map(|p| C64::new(p, 0.0)));
        v * d * v.adjoint()
    }

    /// `V^dagger A V`.
    pub fn to_eigenbasis(&self, a: &HermitianOperator) -> Result<CMat> {
        check_dim(self.dim(), a.dim())?;
        Ok(self.eigvecs.adjoint() * a.matrix() * &self.eigvecs)
    }

    /// `V A V^dagger`.
    pub fn from_eigenbasis(&self, a: &CMat) -> CMat {
        &self.eigvecs * a * self.eigvecs.adjoint()
    }

    pub fn expectation(&self, a: &HermitianOperator) -> Result<f64> {
        let at = self.to_eigenbasis(a)?;
        Ok(self.expectation_eig(&at))
    }

    pub(crate) fn expectation_eig(&self, at: &CMat) -> f64 {
        self.populations
            .iter()
            .enumerate()
            .map(|(i, p)| p * at[(i, i)].re)
            .sum()
    }

    /// KMB weight `f(p_m, p_n)` from stored log-populations.
    pub fn kmb_weight(&self, m: usize, n: usize) -> f64 {
        let (lm, ln) = (self.log_pops[m], self.log_pops[n]);
        let (pm, pn) = (self.populations[m], self.populations[n]);
        if (lm - ln).abs() < LOG_GAP_EPS {
            0.5 * (pm + pn)
        } else {
            (pm - pn) / (lm - ln)
        }
    }

    /// KMB covariance of two operators already expressed in the eigenbasis.
    pub(crate) fn kmb_covariance_eig(&self, at: &CMat, bt: &CMat) -> f64 {
        let n = self.dim();
        let ma = self.expectation_eig(at);
        let mb = self.expectation_eig(bt);
        let mut total = 0.0;
        for m in 0..n {
            for k in 0..n {
                let mut a = at[(m, k)];
                let mut b = bt[(k, m)];
                if m == k {
                    a -= ma;
                    b -= mb;
                }
                total += (a * b).re * self.kmb_weight(m, k);
            }
        }
        total
    }
}

pub fn kmb_covariance(
    point: &GibbsPoint,
    a: &HermitianOperator,
    b: &HermitianOperator,
) -> Result<f64> {
    let at = point.to_eigenbasis(a)?;
    let bt = point.to_eigenbasis(b)?;
    Ok(point.kmb_covariance_eig(&at, &bt))
}

/// Variance of the generator in its own thermal state.
pub fn heat_capacity(point: &GibbsPoint) -> f64 {
    point.heat_capacity
}

/// Von Neumann entropy `-sum p ln p`.
pub fn entropy(point: &GibbsPoint) -> f64 {
    point.entropy
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> HermitianOperator {
        HermitianOperator::from_diagonal(d).unwrap()
    }

    fn pauli_x() -> HermitianOperator {
        HermitianOperator::from_real(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
    }

    #[test]
    fn qubit_populations_and_log_z() {
        let p = gibbs_point(&diag(&[0.0, 2.40]));
        let e = (-2.40f64).exp();
        assert!((p.populations()[0] - 1.0 / (1.0 + e)).abs() < 1e-14);
        assert!((p.populations()[0] - 0.9168).abs() < 1e-4);
        assert!((p.populations()[1] - 0.0832).abs() < 1e-4);
        assert!((p.log_z() - (1.0 + e).ln()).abs() < 1e-14);
        assert!((p.populations().sum() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_generator_is_maximally_mixed() {
        let p = gibbs_point(&HermitianOperator::zeros(3));
        for &x in p.populations().iter() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((entropy(&p) - 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn degenerate_ground_population() {
        let (d, x) = (5usize, 1.3);
        let mut levels = vec![0.0];
        levels.extend(std::iter::repeat_n(x, d));
        let p = gibbs_point(&diag(&levels));
        let expected = 1.0 / (1.0 + d as f64 * (-x).exp());
        assert!((p.populations()[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn large_generator_does_not_overflow() {
        let p = gibbs_point(&diag(&[900.0, 901.0]));
        assert!((p.log_z() - (-900.0 + (1.0 + (-1f64).exp()).ln())).abs() < 1e-10);
        assert!(p.populations().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn qubit_heat_capacity_at_optimal_gap() {
        let g = diag(&[0.0, 2.40]);
        let p = gibbs_point(&g);
        let c = kmb_covariance(&p, &g, &g).unwrap();
        assert!((c - 0.4392).abs() < 1e-4);
        assert!((c - heat_capacity(&p)).abs() < 1e-14);
        let c2 = heat_capacity(&gibbs_point(&diag(&[0.0, 2.399])));
        assert!((c2 - 0.4392).abs() < 1e-4);
    }

    #[test]
    fn identity_has_zero_covariance() {
        let g = diag(&[0.3, 1.7]);
        let p = gibbs_point(&g);
        let i = HermitianOperator::identity(2);
        assert!(kmb_covariance(&p, &i, &i).unwrap().abs() < 1e-15);
        assert!(kmb_covariance(&p, &i, &pauli_x()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn kmb_matches_simpson_quadrature() {
        // cov(A,A) = int_0^1 Tr(A w^{1-s} (A - <A>) w^s) ds with w diagonal.
        let g = diag(&[1.0, -1.0]);
        let p = gibbs_point(&g);
        let a = pauli_x();
        let kmb = kmb_covariance(&p, &a, &a).unwrap();
        let w = [(-1f64).exp(), 1f64.exp()];
        let z = w[0] + w[1];
        let (p0, p1) = (w[0] / z, w[1] / z);
        // <sigma_x> = 0, so only off-diagonal terms remain.
        let f = |s: f64| p0.powf(1.0 - s) * p1.powf(s) + p1.powf(1.0 - s) * p0.powf(s);
        let n = 200;
        let h = 1.0 / n as f64;
        let mut acc = f(0.0) + f(1.0);
        for k in 1..n {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
        }
        let quad = acc * h / 3.0;
        assert!((kmb - quad).abs() < 1e-8, "{kmb} vs {quad}");
    }

    #[test]
    fn constant_generator_has_zero_capacity() {
        let g = HermitianOperator::identity(4).scale(3.7);
        assert!(heat_capacity(&gibbs_point(&g)).abs() < 1e-14);
    }

    #[test]
    fn truncated_oscillator_capacity() {
        let w = 1.0;
        let levels: Vec<f64> = (0..60).map(|n| w * n as f64).collect();
        let c = heat_capacity(&gibbs_point(&diag(&levels)));
        let exact = 1.0 / (2.0 * (w / 2.0f64).sinh()).powi(2);
        assert!((c - exact).abs() < 1e-10);
        assert!((c - 0.92067).abs() < 1e-5);
    }

    #[test]
    fn entropy_values() {
        let p = gibbs_point(&diag(&[0.0, 2.40]));
        let alt = p.log_z() + p.mean_generator();
        assert!((entropy(&p) - alt).abs() < 1e-10);
        let e = (-2.40f64).exp();
        let (p0, p1) = (1.0 / (1.0 + e), e / (1.0 + e));
        let direct = -p0 * p0.ln() - p1 * p1.ln();
        assert!((entropy(&p) - direct).abs() < 1e-14);
        assert!((entropy(&p) - 0.286451).abs() < 1e-6);

        let n = 6u32;
        let d = (1u64 << n) - 1;
        let x = (d as f64).ln();
        let mut levels = vec![0.0];
        levels.extend(std::iter::repeat_n(x, d as usize));
        let p = gibbs_point(&diag(&levels));
        assert!((p.populations()[0] - 0.5).abs() < 1e-14);
        let expected = 2f64.ln() + 0.5 * (d as f64).ln();
        assert!((entropy(&p) - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            HermitianOperator::from_real(m),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = gibbs_point(&diag(&[0.0, 1.0]));
        let a = HermitianOperator::identity(3);
        assert!(matches!(
            kmb_covariance(&p, &a, &a),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn json_round_trip_checks_dim() {
        let g = HermitianOperator::new(CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.5, -0.25),
                C64::new(0.5, 0.25),
                C64::new(-1.0, 0.0),
            ],
        ))
        .unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: HermitianOperator = serde_json::from_str(&s).unwrap();
        assert_eq!(g, back);
        let bad = r#"{"dim":3,"entries":[[[0,0],[0,0]],[[0,0],[0,0]]]}"#;
        assert!(serde_json::from_str::<HermitianOperator>(bad).is_err());
    }
}
