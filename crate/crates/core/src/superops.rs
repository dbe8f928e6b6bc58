//! Superoperators on vectorized operators, the `J_omega` map, Markovian rate
//! matrices and their Drazin inverses.
//!
//! Vectorization is column-stacking: `vec(X)[i + n*j] = X[i, j]`, which is
//! the storage order of `nalgebra` matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen, LU};

use crate::error::{invalid, Error, Result};
use crate::thermo_core::{check_dim, CMat, GibbsPoint, HermitianOperator, C64};

const TRACE_TOL: f64 = 1e-9;

pub fn vectorize(x: &CMat) -> DVector<C64> {
    DVector::from_column_slice(x.as_slice())
}

pub fn unvectorize(v: &DVector<C64>, n: usize) -> CMat {
    CMat::from_column_slice(n, n, v.as_slice())
}

fn vec_identity(n: usize) -> DVector<C64> {
    let mut v = DVector::zeros(n * n);
    for i in 0..n {
        v[i + n * i] = C64::new(1.0, 0.0);
    }
    v
}

/// `J_omega[A] = -int_0^1 omega^{1-x} (A - <A>) omega^x dx`.
pub fn j_omega(point: &GibbsPoint, a: &HermitianOperator) -> Result<HermitianOperator> {
    let at = point.to_eigenbasis(a)?;
    let out = j_omega_eig(point, &at);
    HermitianOperator::new(point.from_eigenbasis(&out))
}

pub(crate) fn j_omega_eig(point: &GibbsPoint, at: &CMat) -> CMat {
    let n = point.dim();
    let mean = point.expectation_eig(at);
    let mut out = at.clone();
    for i in 0..n {
        out[(i, i)] -= mean;
    }
    for j in 0..n {
        for i in 0..n {
            out[(i, j)] *= -point.kmb_weight(i, j);
        }
    }
    out
}

/// Linear map on `n x n` operators stored as an `n^2 x n^2` matrix.
#[derive(Clone, Debug)]
pub struct Superoperator {
    n: usize,
    matrix: CMat,
    fixed_point: Option<GibbsPoint>,
}

impl Superoperator {
    pub fn new(n: usize, matrix: CMat, fixed_point: Option<GibbsPoint>) -> Result<Self> {
        if n == 0 || matrix.nrows() != n * n || matrix.ncols() != n * n {
            return invalid(format!(
                "superoperator for dim {n} must be {}x{}",
                n * n,
                n * n
            ));
        }
        let scale = matrix.norm().max(1.0);
        let tr = vec_identity(n).transpose() * &matrix;
        if tr.norm() > 1e-10 * scale {
            return invalid(format!(
                "generator is not trace preserving (|I^T L| = {:.3e})",
                tr.norm()
            ));
        }
        if let Some(fp) = &fixed_point {
            check_dim(n, fp.dim())?;
            let r = &matrix * vectorize(&fp.density());
            if r.norm() > 1e-10 * scale {
                return Err(Error::InconsistentGenerator(format!(
                    "|L[omega]| = {:.3e}",
                    r.norm()
                )));
            }
        }
        Ok(Self {
            n,
            matrix,
            fixed_point,
        })
    }

    /// `L[X] = (omega Tr X - X) / tau_eq`.
    pub fn exponential_relaxation(point: &GibbsPoint, tau_eq: f64) -> Result<Self> {
        if !(tau_eq > 0.0 && tau_eq.is_finite()) {
            return invalid("tau_eq must be positive and finite");
        }
        let n = point.dim();
        let w = vectorize(&point.density());
        let m = (w * vec_identity(n).transpose() - CMat::identity(n * n, n * n)).unscale(tau_eq);
        Self::new(n, m, Some(point.clone()))
    }

    /// Dissipator with jumps `sqrt(Gamma_ij) |v_i><v_j|` between eigenvectors
    /// of the point, where `Gamma_ij` is the rate `j -> i` of `rates` and the
    /// levels follow the (ascending) order of the point's eigenvalues.
    pub fn from_rates(point: &GibbsPoint, rates: &RateMatrix) -> Result<Self> {
        let n = point.dim();
        check_dim(n, rates.size())?;
        let g = rates.entries();
        let mut le = CMat::zeros(n * n, n * n);
        for a in 0..n {
            for b in 0..n {
                let idx = a + n * b;
                if a == b {
                    for c in 0..n {
                        le[(idx, c + n * c)] = C64::new(g[(a, c)], 0.0);
                    }
                } else {
                    le[(idx, idx)] = C64::new(0.5 * (g[(a, a)] + g[(b, b)]), 0.0);
                }
            }
        }
        let v = point.eigvecs();
        let s = v.map(|z| z.conj()).kronecker(v);
        let m = &s * le * s.adjoint();
        Self::new(n, m, Some(point.clone()))
    }

    /// Bosonic detailed-balance dissipator in the instantaneous eigenbasis.
    pub fn bosonic(point: &GibbsPoint, alpha: f64, gamma0: f64, temperature: f64) -> Result<Self> {
        let levels: Vec<f64> = point.eigvals().iter().copied().collect();
        let rates = rate_matrix_bosonic_at(&levels, alpha, gamma0, temperature)?;
        Self::from_rates(point, &rates)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn fixed_point(&self) -> Option<&GibbsPoint> {
        self.fixed_point.as_ref()
    }

    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        check_dim(self.n, x.nrows())?;
        Ok(unvectorize(&(&self.matrix * vectorize(x)), self.n))
    }

    /// Factorizes the bordered system used by [`Drazin::apply`].
    ///
    /// The stationary state is taken from the fixed point when present and
    /// from the null space of the generator otherwise.
    pub fn drazin(&self) -> Result<Drazin> {
        let n = self.n;
        let omega = match &self.fixed_point {
            Some(fp) => vectorize(&fp.density()),
            None => self.null_vector()?,
        };
        let dim = n * n;
        let mut b = CMat::zeros(dim + 1, dim + 1);
        b.view_mut((0, 0), (dim, dim)).copy_from(&self.matrix);
        b.view_mut((0, dim), (dim, 1)).copy_from(&omega);
        b.view_mut((dim, 0), (1, dim))
            .copy_from(&vec_identity(n).transpose());
        let lu = b.clone().lu();
        // A singular bordered system means the zero eigenvalue is not simple.
        let probe = DVector::from_fn(dim + 1, |i, _| {
            if i < dim {
                C64::new(1.0 / (1.0 + i as f64), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        match lu.solve(&probe) {
            Some(x) if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => {
                let res = (&b * &x - &probe).norm();
                if res > 1e-6 * (1.0 + x.norm()) * b.norm().max(1.0) {
                    return Err(Error::DegenerateGenerator(
                        "bordered system is numerically singular".into(),
                    ));
                }
            }
            _ => {
                return Err(Error::DegenerateGenerator(
                    "zero eigenvalue of the generator is not simple".into(),
                ))
            }
        }
        Ok(Drazin {
            n,
            lu,
            omega,
            scale: self.matrix.norm().max(1.0),
        })
    }

    fn null_vector(&self) -> Result<DVector<C64>> {
        let n = self.n;
        let dim = n * n;
        // Replace one row by the trace functional to pin normalization.
        let mut a = self.matrix.clone();
        let mut rhs = DVector::zeros(dim);
        a.row_mut(0).copy_from(&vec_identity(n).transpose());
        rhs[0] = C64::new(1.0, 0.0);
        a.lu()
            .solve(&rhs)
            .ok_or_else(|| Error::DegenerateGenerator("no unique stationary state".into()))
    }
}

/// Factorized inverse of a generator on the traceless subspace.
pub struct Drazin {
    n: usize,
    lu: LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    omega: DVector<C64>,
    scale: f64,
}

impl Drazin {
    /// Unique traceless `X` with `L[X] = Y`; `Y` must be traceless.
    pub fn apply(&self, y: &CMat) -> Result<CMat> {
        let n = self.n;
        check_dim(n, y.nrows())?;
        let tr = y.trace();
        if tr.norm() > TRACE_TOL * y.norm().max(1.0) {
            return invalid(format!("argument is not traceless (Tr = {:.3e})", tr.norm()));
        }
        let x = self.solve_vec(&vectorize(y))?;
        Ok(unvectorize(&x, n))
    }

    fn solve_vec(&self, y: &DVector<C64>) -> Result<DVector<C64>> {
        let dim = self.n * self.n;
        let mut rhs = DVector::zeros(dim + 1);
        rhs.rows_mut(0, dim).copy_from(y);
        let sol = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::DegenerateGenerator("bordered solve failed".into()))?;
        let c = sol[dim];
        if c.norm() > 1e-8 * (1.0 + y.norm()) * self.scale {
            return Err(Error::DegenerateGenerator(format!(
                "bordered multiplier did not vanish ({:.3e})",
                c.norm()
            )));
        }
        Ok(sol.rows(0, dim).into_owned())
    }

    /// Matrix of `L^D P` with `P = I - omega Tr(.)`, acting on all operators.
    pub fn operator(&self) -> Result<CMat> {
        let dim = self.n * self.n;
        let tr = vec_identity(self.n);
        let mut out = CMat::zeros(dim, dim);
        for k in 0..dim {
            let mut e = DVector::zeros(dim);
            e[k] = C64::new(1.0, 0.0);
            let y = &e - &self.omega * tr[k];
            out.set_column(k, &self.solve_vec(&y)?);
        }
        Ok(out)
    }
}

pub fn drazin_apply(l: &Superoperator, y: &HermitianOperator) -> Result<HermitianOperator> {
    let x = l.drazin()?.apply(y.matrix())?;
    HermitianOperator::new(x)
}

/// Classical master-equation generator with `Gamma_ij` the rate `j -> i`.
#[derive(Clone, Debug)]
pub struct RateMatrix {
    entries: DMatrix<f64>,
    stationary: DVector<f64>,
}

impl RateMatrix {
    pub fn new(entries: DMatrix<f64>, stationary: DVector<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n || stationary.len() != n {
            return invalid("rate matrix must be square and match the stationary vector");
        }
        let scale = entries.abs().max().max(1.0);
        for j in 0..n {
            for i in 0..n {
                if i != j && entries[(i, j)] < 0.0 {
                    return invalid(format!("negative rate {} -> {}", j, i));
                }
            }
            let s: f64 = entries.column(j).sum();
            if s.abs() > 1e-12 * scale {
                return invalid(format!("column {j} does not sum to zero ({s:.3e})"));
            }
        }
        let r = &entries * &stationary;
        if r.norm() > 1e-10 * scale {
            return Err(Error::InconsistentGenerator(format!(
                "stationary vector residual {:.3e}",
                r.norm()
            )));
        }
        Ok(Self {
            entries,
            stationary,
        })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn stationary(&self) -> &DVector<f64> {
        &self.stationary
    }

    /// Unique `x` with `sum x = 0` and `Gamma x = y`; `y` must sum to zero.
    pub fn drazin_apply(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.size();
        check_dim(n, y.len())?;
        if y.sum().abs() > TRACE_TOL * y.norm().max(1.0) {
            return invalid("argument does not sum to zero");
        }
        let mut b = DMatrix::zeros(n + 1, n + 1);
        b.view_mut((0, 0), (n, n)).copy_from(&self.entries);
        b.view_mut((0, n), (n, 1)).copy_from(&self.stationary);
        b.view_mut((n, 0), (1, n)).fill(1.0);
        let mut rhs = DVector::zeros(n + 1);
        rhs.rows_mut(0, n).copy_from(y);
        let sol = b.lu().solve(&rhs).ok_or_else(|| {
            Error::DegenerateGenerator("zero eigenvalue of the rate matrix is not simple".into())
        })?;
        if sol[n].abs() > 1e-8 * (1.0 + y.norm()) {
            return Err(Error::DegenerateGenerator(format!(
                "bordered multiplier did not vanish ({:.3e})",
                sol[n]
            )));
        }
        Ok(sol.rows(0, n).into_owned())
    }

    /// Eigenvalues of the detailed-balance symmetrization, descending.
    pub fn relaxation_spectrum(&self) -> Vec<f64> {
        let sq = self.stationary.map(f64::sqrt);
        let n = self.size();
        let s = DMatrix::from_fn(n, n, |i, j| self.entries[(i, j)] * sq[j] / sq[i]);
        let s = (&s + s.transpose()).scale(0.5);
        let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }
}

/// `lim` aware evaluation of `N(w) w^alpha` and `(N(w)+1) w^alpha` with
/// `N(w) = 1/(e^w - 1)`, for `w >= 0`.
fn bose_rates(w: f64, alpha: f64) -> Result<(f64, f64)> {
    if w == 0.0 {
        return if alpha == 1.0 {
            Ok((1.0, 1.0))
        } else if alpha > 1.0 {
            Ok((0.0, 0.0))
        } else {
            Err(Error::SingularRate(format!(
                "zero gap with ohmicity {alpha} < 1 gives a divergent rate"
            )))
        };
    }
    let p = w.powf(alpha);
    let up = p / w.exp_m1();
    let down = -p / (-w).exp_m1();
    Ok((up, down))
}

pub fn rate_matrix_bosonic(levels: &[f64], alpha: f64, gamma0: f64) -> Result<RateMatrix> {
    rate_matrix_bosonic_at(levels, alpha, gamma0, 1.0)
}

/// Bosonic rates between every pair of levels (adimensional energies) for a
/// bath of ohmicity `alpha` at physical temperature `temperature`; the
/// spectral density is evaluated at the physical gap, giving a factor
/// `temperature^alpha`.
pub fn rate_matrix_bosonic_at(
    levels: &[f64],
    alpha: f64,
    gamma0: f64,
    temperature: f64,
) -> Result<RateMatrix> {
    let n = levels.len();
    if n == 0 {
        return invalid("no levels");
    }
    if levels.iter().any(|e| !e.is_finite()) || !alpha.is_finite() {
        return invalid("levels and ohmicity must be finite");
    }
    if !(gamma0 > 0.0 && gamma0.is_finite()) {
        return invalid("Gamma0 must be positive");
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return invalid("temperature must be positive");
    }
    let tf = temperature.powf(alpha);
    let mut g = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            let w = (levels[j] - levels[i]).abs();
            let (up, down) = bose_rates(w, alpha)?;
            // j -> i is a decay when level j lies above level i.
            g[(i, j)] = gamma0 * tf * if levels[j] > levels[i] { down } else { up };
        }
    }
    for j in 0..n {
        let s: f64 = g.column(j).sum();
        g[(j, j)] = -s;
    }
    let emin = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = levels.iter().map(|e| (-(e - emin)).exp()).collect();
    let z: f64 = w.iter().sum();
    let stationary = DVector::from_iterator(n, w.iter().map(|x| x / z));
    RateMatrix::new(g, stationary)
}
