//! Working substances: independent qubits, the periodic Ising chain, fully
//! controlled degenerate spectra, and bosonic-bath qubit, oscillator and
//! three-level models.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bound_opt::{normalize_direction, solve_metric, WorkingPoint};
use crate::error::{invalid, Error, Result};
use crate::hyperdual::HyperDual;
use crate::metrics::{
    entropy_gradient_classical, rate_metric, ControlBasis, GeneratorModel, MetricRecipe,
    ThermoMetric,
};
use crate::optimize::{multistart_max, OptimizerConfig};
use crate::superops::RateMatrix;
use crate::thermo_core::HermitianOperator;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    IndependentQubits { n: u32 },
    IsingChain { n: u32, #[serde(default = "yes")] periodic: bool },
    DegenerateLevels { d: u64 },
    QubitBosonic { ohmicity: f64, gamma0: f64 },
    OscillatorBosonic { ohmicity: f64, gamma0: f64, truncation: usize },
    ThreeLevelBosonic { ohmicity: f64, gamma0: f64 },
}

fn yes() -> bool {
    true
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        let pos = |g: f64| g > 0.0 && g.is_finite();
        match *self {
            ModelSpec::IndependentQubits { n } if n >= 1 => Ok(()),
            ModelSpec::IsingChain { n, periodic } if n >= 3 && periodic => Ok(()),
            ModelSpec::IsingChain { periodic: false, .. } => {
                invalid("only periodic Ising chains are supported")
            }
            ModelSpec::DegenerateLevels { d } if d >= 2 => Ok(()),
            ModelSpec::QubitBosonic { ohmicity, gamma0 }
            | ModelSpec::ThreeLevelBosonic { ohmicity, gamma0 }
                if ohmicity.is_finite() && pos(gamma0) =>
            {
                Ok(())
            }
            ModelSpec::OscillatorBosonic {
                ohmicity,
                gamma0,
                truncation,
            } if ohmicity.is_finite() && pos(gamma0) && truncation >= 40 => Ok(()),
            _ => invalid(format!("invalid model parameters: {self:?}")),
        }
    }
}

// ---------------------------------------------------------------- Ising

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsingMode {
    Exact,
    Transfer,
}

/// Largest chain handled by exhaustive enumeration.
pub const ISING_EXACT_MAX: u32 = 20;

/// `log Tr T^N` for `T = [[e^{l1+l2}, e^{-l1}], [e^{-l1}, e^{l1-l2}]]`,
/// written as `N (l1 + ln m) + ln(1 + r^N)` with `m` the scaled leading
/// eigenvalue and `r` the eigenvalue ratio, so nothing overflows.
fn ising_log_z_hd(l1: HyperDual, l2: HyperDual, n: u32) -> HyperDual {
    let q = (l1.scale(-4.0)).exp();
    let sh = l2.sinh();
    let m = l2.cosh() + (sh * sh + q).sqrt();
    let r = (HyperDual::constant(1.0) - q) / (m * m);
    l1.scale(n as f64) + m.ln().scale(n as f64) + r.powi(n as u64).ln_1p()
}

fn check_ising(n: u32, mode: IsingMode) -> Result<()> {
    if n < 3 {
        return invalid("periodic Ising chain needs N >= 3");
    }
    if mode == IsingMode::Exact && n > ISING_EXACT_MAX {
        return Err(Error::Size(format!(
            "exact enumeration is limited to N <= {ISING_EXACT_MAX}, got {n}"
        )));
    }
    Ok(())
}

/// Sufficient statistics `(sum s_i s_{i+1}, sum s_i)` for every state.
fn ising_states(n: u32) -> impl Iterator<Item = (f64, f64)> {
    (0u64..(1u64 << n)).map(move |s| {
        let spin = |i: u32| if (s >> (i % n)) & 1 == 1 { 1.0 } else { -1.0 };
        let mut bond = 0.0;
        let mut mag = 0.0;
        for i in 0..n {
            bond += spin(i) * spin(i + 1);
            mag += spin(i);
        }
        (bond, mag)
    })
}

/// `(log Z, mean, covariance)` of `(bond, magnetization)` by enumeration.
fn ising_exact_stats(l1: f64, l2: f64, n: u32) -> (f64, [f64; 2], [[f64; 3]; 1]) {
    let states: Vec<(f64, f64)> = ising_states(n).collect();
    let e: Vec<f64> = states.iter().map(|(b, m)| l1 * b + l2 * m).collect();
    let emax = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = e.iter().map(|x| (x - emax).exp()).collect();
    let z: f64 = w.iter().sum();
    let mut mean = [0.0; 2];
    for ((b, m), wi) in states.iter().zip(&w) {
        mean[0] += wi * b;
        mean[1] += wi * m;
    }
    mean[0] /= z;
    mean[1] /= z;
    let mut cov = [0.0; 3];
    for ((b, m), wi) in states.iter().zip(&w) {
        let (db, dm) = (b - mean[0], m - mean[1]);
        cov[0] += wi * db * db;
        cov[1] += wi * db * dm;
        cov[2] += wi * dm * dm;
    }
    for c in &mut cov {
        *c /= z;
    }
    (emax + z.ln(), mean, [cov])
}

pub fn ising_log_z(l1: f64, l2: f64, n: u32, mode: IsingMode) -> Result<f64> {
    check_ising(n, mode)?;
    Ok(match mode {
        IsingMode::Exact => ising_exact_stats(l1, l2, n).0,
        IsingMode::Transfer => {
            ising_log_z_hd(HyperDual::constant(l1), HyperDual::constant(l2), n).re
        }
    })
}

/// Hessian of `log Z` in `(lambda1, lambda2)`.
pub fn ising_hessian(l1: f64, l2: f64, n: u32, mode: IsingMode) -> Result<[[f64; 2]; 2]> {
    check_ising(n, mode)?;
    match mode {
        IsingMode::Exact => {
            let (_, _, [c]) = ising_exact_stats(l1, l2, n);
            Ok([[c[0], c[1]], [c[1], c[2]]])
        }
        IsingMode::Transfer => {
            let d2 = |v1: f64, v2: f64| {
                ising_log_z_hd(HyperDual::variable(l1, v1), HyperDual::variable(l2, v2), n).e12
            };
            let h11 = d2(1.0, 0.0);
            let h22 = d2(0.0, 1.0);
            let h12 = 0.5 * (d2(1.0, 1.0) - h11 - h22);
            Ok([[h11, h12], [h12, h22]])
        }
    }
}

/// Heat capacity `sum_ij lambda_i lambda_j d^2 log Z / d lambda_i d lambda_j`
/// of `H = -lambda1 sum s_i s_{i+1} - lambda2 sum s_i` (periodic).
pub fn ising_heat_capacity(l1: f64, l2: f64, n: u32, mode: IsingMode) -> Result<f64> {
    check_ising(n, mode)?;
    match mode {
        IsingMode::Transfer => {
            let r = ising_log_z_hd(HyperDual::variable(l1, l1), HyperDual::variable(l2, l2), n);
            // A variance; deep in the ordered phase only rounding noise is left.
            Ok(r.e12.max(0.0))
        }
        IsingMode::Exact => {
            let h = ising_hessian(l1, l2, n, mode)?;
            Ok(l1 * l1 * h[0][0] + 2.0 * l1 * l2 * h[0][1] + l2 * l2 * h[1][1])
        }
    }
}

/// Maximum of `C/N` over both couplings; returns `(lambda1, lambda2, C/N)`
/// with the field sign fixed nonnegative (the capacity is even in it).
pub fn ising_max_capacity(n: u32, mode: IsingMode, cfg: &OptimizerConfig) -> Result<(f64, f64, f64)> {
    check_ising(n, mode)?;
    let obj = |x: &[f64]| {
        ising_heat_capacity(x[0], x[1], n, mode).map_or(f64::NEG_INFINITY, |c| c / n as f64)
    };
    let best = multistart_max(obj, &[1.0, 0.5], cfg)?;
    Ok((best.x[0], best.x[1].abs(), best.value))
}

// ---------------------------------------------------- degenerate levels

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Heat capacity of one ground state and `d = e^{ln_d}` levels at gap `x`.
pub fn degenerate_capacity_ln(x: f64, ln_d: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return invalid("gap must be positive and finite");
    }
    // Excited-manifold population.
    let p = logistic(ln_d - x);
    Ok(x * x * p * (1.0 - p))
}

pub fn degenerate_capacity(x: f64, d: u64) -> Result<f64> {
    if d == 0 {
        return invalid("degeneracy must be positive");
    }
    degenerate_capacity_ln(x, (d as f64).ln())
}

/// Optimal gap and maximal capacity for `D` levels, `D - 1` of them
/// degenerate, from `e^x = (D-1)(x+2)/(x-2)`.
pub fn optimal_degenerate_gap(d_levels: u64) -> Result<(f64, f64)> {
    if d_levels < 2 {
        return invalid("need D >= 2");
    }
    optimal_degenerate_gap_ln(((d_levels - 1) as f64).ln())
}

/// As [`optimal_degenerate_gap`] with `ln(D - 1)` given directly.
pub fn optimal_degenerate_gap_ln(ln_dm1: f64) -> Result<(f64, f64)> {
    if !(ln_dm1 >= 0.0 && ln_dm1.is_finite()) {
        return invalid("ln(D-1) must be finite and nonnegative");
    }
    // Log form of the stationarity condition; strictly increasing on (2, inf).
    let f = |x: f64| x - ln_dm1 - (x + 2.0).ln() + (x - 2.0).ln();
    let df = |x: f64| 1.0 - 1.0 / (x + 2.0) + 1.0 / (x - 2.0);
    let (mut lo, mut hi) = (2.0, 2.0 + 20.0 + ln_dm1);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx.abs() < 1e-15 * x {
            break;
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - fx / df(x);
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo) < 1e-13 * x {
            break;
        }
    }
    let p = logistic(ln_dm1 - x);
    Ok((x, x * x * p * (1.0 - p)))
}

// --------------------------------------------------------- bosonic baths

/// `C_Q(w) w^alpha (2 N(w) + 1) = w^{2+alpha} / (2 sinh w)`, in units of `Gamma0`.
pub fn qubit_bosonic_fom(w: f64, alpha: f64) -> Result<f64> {
    if !(w > 0.0) {
        return invalid("gap must be positive");
    }
    if w > 700.0 {
        return Ok(0.0);
    }
    Ok(w.powf(2.0 + alpha) / (2.0 * w.sinh()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ObjectiveValue {
    pub value: f64,
    /// The supremum over the gap diverges as `w -> 0`.
    pub unbounded: bool,
}

/// `C_HO(w) w^alpha` with `C_HO = (2 sinh(w/2))^-2`, in units of `Gamma0`.
pub fn oscillator_bosonic_fom(w: f64, alpha: f64) -> Result<ObjectiveValue> {
    if !(w > 0.0) {
        return invalid("frequency must be positive");
    }
    let value = if w > 1400.0 {
        0.0
    } else {
        w.powf(alpha) / (2.0 * (w / 2.0).sinh()).powi(2)
    };
    Ok(ObjectiveValue {
        value,
        unbounded: alpha < 2.0,
    })
}

/// Levels needed so the truncated tail carries less than `1e-14` population.
pub fn oscillator_truncation(w: f64) -> usize {
    let n = (1e14f64.ln() / w).ceil() as usize + 2;
    n.max(40)
}

/// Ladder rates for a damped oscillator truncated to `levels` states.
pub fn oscillator_rate_matrix(w: f64, levels: usize, alpha: f64, gamma0: f64) -> Result<RateMatrix> {
    if !(w > 0.0) || levels < 2 {
        return invalid("need w > 0 and at least two levels");
    }
    let nb = 1.0 / w.exp_m1();
    let k = gamma0 * w.powf(alpha);
    let mut g = DMatrix::zeros(levels, levels);
    for n in 0..levels - 1 {
        let f = (n + 1) as f64;
        g[(n, n + 1)] = k * (nb + 1.0) * f;
        g[(n + 1, n)] = k * nb * f;
    }
    for j in 0..levels {
        let s: f64 = g.column(j).sum();
        g[(j, j)] = -s;
    }
    let wts: Vec<f64> = (0..levels).map(|n| (-(w * n as f64)).exp()).collect();
    let z: f64 = wts.iter().sum();
    RateMatrix::new(g, DVector::from_iterator(levels, wts.iter().map(|x| x / z)))
}

/// Number operator as the single control, `G = w n`.
pub fn oscillator_basis(levels: usize) -> Result<ControlBasis> {
    let n: Vec<f64> = (0..levels).map(|i| i as f64).collect();
    ControlBasis::new(vec![HermitianOperator::from_diagonal(&n)?], vec!["w".into()])
}

/// Metric element `m_ww` of the damped oscillator.
pub fn oscillator_metric(w: f64, alpha: f64, gamma0: f64) -> Result<ThermoMetric> {
    let levels = oscillator_truncation(w);
    let rates = oscillator_rate_matrix(w, levels, alpha, gamma0)?;
    rate_metric(&oscillator_basis(levels)?, &[w], &rates)
}

pub fn three_level_basis() -> ControlBasis {
    ControlBasis::new(
        vec![
            HermitianOperator::projector(3, 1),
            HermitianOperator::projector(3, 2),
        ],
        vec!["E1".into(), "E2".into()],
    )
    .expect("projectors are independent")
}

pub fn three_level_recipe(alpha: f64, gamma0: f64) -> MetricRecipe {
    MetricRecipe::Lindblad {
        model: GeneratorModel::Bosonic {
            ohmicity: alpha,
            gamma0,
            temperature: 1.0,
        },
    }
}

/// Metric over `(E1, E2)` for `G = diag(0, E1, E2)` under bosonic rates,
/// and the entropy gradient.
pub fn three_level_assembly(e1: f64, e2: f64, alpha: f64, gamma0: f64) -> Result<(ThermoMetric, Vec<f64>)> {
    if !(e1 >= 0.0 && e2 >= 0.0) {
        return invalid("level energies must be nonnegative");
    }
    let basis = three_level_basis();
    let lam = [e1, e2];
    let m = three_level_recipe(alpha, gamma0).evaluate(&basis, &lam)?;
    let s = entropy_gradient_classical(&basis, &lam)?;
    Ok((m, s))
}

pub fn three_level_fom(e1: f64, e2: f64, alpha: f64, gamma0: f64) -> Result<f64> {
    let (m, s) = three_level_assembly(e1, e2, alpha, gamma0)?;
    Ok(solve_metric(m.matrix(), &s)?.0)
}

/// Optimal `(E1, E2)` for the three-level engine.
pub fn three_level_optimum(alpha: f64, gamma0: f64, cfg: &OptimizerConfig) -> Result<WorkingPoint> {
    let obj = |x: &[f64]| three_level_fom(x[0], x[1], alpha, gamma0).unwrap_or(f64::NEG_INFINITY);
    let best = multistart_max(obj, &[2.0, 2.5], cfg)?;
    let (m, s) = three_level_assembly(best.x[0], best.x[1], alpha, gamma0)?;
    let (value, mu) = solve_metric(m.matrix(), &s)?;
    Ok(WorkingPoint {
        lambda_star: best.x,
        figure_of_merit: value,
        direction_mu: normalize_direction(&mu),
    })
}
