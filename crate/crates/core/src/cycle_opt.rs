//! Stroke-duration optimization and full-cycle performance of a
//! low-dissipation Carnot engine, including asymmetric dissipation.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::optimize::{golden_section_max, scan_then_golden};
use crate::thermo_core::{heat_capacity, GibbsPoint};

/// Hot and cold bath temperatures (`k_B = 1`).
///
/// `t_h == t_c` is accepted as the degenerate limit where every output
/// vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathPair {
    pub t_h: f64,
    pub t_c: f64,
}

impl BathPair {
    pub fn new(t_h: f64, t_c: f64) -> Result<Self> {
        if !(t_c > 0.0 && t_c.is_finite() && t_h.is_finite()) || t_h < t_c {
            return invalid(format!("need T_h >= T_c > 0, got T_h = {t_h}, T_c = {t_c}"));
        }
        Ok(Self { t_h, t_c })
    }

    pub fn carnot(&self) -> f64 {
        1.0 - self.t_c / self.t_h
    }

    pub fn curzon_ahlborn(&self) -> f64 {
        1.0 - (self.t_c / self.t_h).sqrt()
    }

    pub fn delta_t(&self) -> f64 {
        self.t_h - self.t_c
    }

    /// Efficiency fraction `gamma` reached at unconstrained maximum power.
    pub fn gamma_ca(&self) -> f64 {
        self.curzon_ahlborn() / self.carnot()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CyclePerformance {
    pub delta_s: f64,
    pub sigma_c: f64,
    pub sigma_h: f64,
    pub tau_c: f64,
    pub tau_h: f64,
    pub q_h: f64,
    pub q_c: f64,
    pub w: f64,
    pub p: f64,
    pub eta: f64,
    /// Work variance, filled in by callers that know the modulation.
    pub sigma_w2: Option<f64>,
}

impl CyclePerformance {
    /// Whether the cycle extracts work from the hot bath.
    pub fn is_engine(&self) -> bool {
        self.delta_s > 0.0 && self.w > 0.0 && self.q_h > 0.0
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || x.is_nan() {
        return invalid(format!("{name} must be positive, got {x}"));
    }
    Ok(())
}

/// Heats, work, power and efficiency for given stroke durations.
/// Infinite durations are the quasistatic limit.
pub fn performance(
    delta_s: f64,
    sigma_c: f64,
    sigma_h: f64,
    tau_c: f64,
    tau_h: f64,
    baths: BathPair,
) -> Result<CyclePerformance> {
    check_positive("tau_c", tau_c)?;
    check_positive("tau_h", tau_h)?;
    if sigma_c < 0.0 || sigma_h < 0.0 {
        return invalid("dissipation must be nonnegative");
    }
    let q_h = baths.t_h * delta_s - baths.t_h * sigma_h / tau_h;
    let q_c = -baths.t_c * delta_s - baths.t_c * sigma_c / tau_c;
    let w = q_h + q_c;
    let total = tau_c + tau_h;
    let p = if total.is_infinite() { 0.0 } else { w / total };
    let eta = if q_h > 0.0 { w / q_h } else { 0.0 };
    Ok(CyclePerformance {
        delta_s,
        sigma_c,
        sigma_h,
        tau_c,
        tau_h,
        q_h,
        q_c,
        w,
        p,
        eta,
        sigma_w2: None,
    })
}

fn quasistatic(delta_s: f64, sigma_c: f64, sigma_h: f64, baths: BathPair) -> Result<CyclePerformance> {
    performance(delta_s, sigma_c, sigma_h, f64::INFINITY, f64::INFINITY, baths)
}

/// Power-optimal durations for asymmetric dissipation,
/// `tau_x = 2 A sqrt(T_x Sigma_x) / (dT dS)` with
/// `A = sqrt(T_c Sigma_c) + sqrt(T_h Sigma_h)`.
pub fn max_power_asymmetric(
    delta_s: f64,
    sigma_c: f64,
    sigma_h: f64,
    baths: BathPair,
) -> Result<CyclePerformance> {
    check_positive("delta_S", delta_s)?;
    check_positive("Sigma_c", sigma_c)?;
    check_positive("Sigma_h", sigma_h)?;
    let dt = baths.delta_t();
    if dt == 0.0 {
        return quasistatic(delta_s, sigma_c, sigma_h, baths);
    }
    let rc = (baths.t_c * sigma_c).sqrt();
    let rh = (baths.t_h * sigma_h).sqrt();
    let a = rc + rh;
    let tau_c = 2.0 * a * rc / (dt * delta_s);
    let tau_h = 2.0 * a * rh / (dt * delta_s);
    performance(delta_s, sigma_c, sigma_h, tau_c, tau_h, baths)
}

/// `dS^2 dT^2 / (4 (sqrt(T_c Sigma_c) + sqrt(T_h Sigma_h))^2)`.
pub fn max_power_asymmetric_closed_form(delta_s: f64, sigma_c: f64, sigma_h: f64, baths: BathPair) -> f64 {
    let dt = baths.delta_t();
    let a = (baths.t_c * sigma_c).sqrt() + (baths.t_h * sigma_h).sqrt();
    delta_s * delta_s * dt * dt / (4.0 * a * a)
}

pub fn max_power_unconstrained(delta_s: f64, sigma: f64, baths: BathPair) -> Result<CyclePerformance> {
    max_power_asymmetric(delta_s, sigma, sigma, baths)
}

/// `dS^2 (sqrt(T_h) - sqrt(T_c))^2 / (4 Sigma)`.
pub fn max_power_unconstrained_closed_form(delta_s: f64, sigma: f64, baths: BathPair) -> f64 {
    let d = baths.t_h.sqrt() - baths.t_c.sqrt();
    delta_s * delta_s * d * d / (4.0 * sigma)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return invalid(format!("gamma must lie in (0, 1], got {gamma}"));
    }
    Ok(())
}

/// Maximum power at efficiency `gamma eta_C` for symmetric dissipation.
/// `gamma = 1` returns the quasistatic sentinel (infinite durations, P = 0).
pub fn max_power_at_efficiency(
    delta_s: f64,
    sigma: f64,
    baths: BathPair,
    gamma: f64,
) -> Result<CyclePerformance> {
    check_gamma(gamma)?;
    check_positive("delta_S", delta_s)?;
    check_positive("Sigma", sigma)?;
    if gamma == 1.0 || baths.delta_t() == 0.0 {
        return quasistatic(delta_s, sigma, sigma, baths);
    }
    let ratio = baths.t_h / baths.t_c;
    let tau_c = 2.0 * sigma / (delta_s * (ratio - 1.0) * (1.0 - gamma));
    let tau_h = tau_c * (ratio * (1.0 - gamma) + gamma);
    performance(delta_s, sigma, sigma, tau_c, tau_h, baths)
}

/// `(dS^2/4 Sigma) dT^2 gamma (1 - gamma) / (gamma T_c + (1 - gamma) T_h)`.
pub fn power_at_efficiency_closed_form(delta_s: f64, sigma: f64, baths: BathPair, gamma: f64) -> f64 {
    let dt = baths.delta_t();
    delta_s * delta_s / (4.0 * sigma) * dt * dt * gamma * (1.0 - gamma)
        / (gamma * baths.t_c + (1.0 - gamma) * baths.t_h)
}

/// Work per cycle at the power-optimal durations for efficiency `gamma eta_C`.
pub fn work_at_efficiency_closed_form(delta_s: f64, baths: BathPair, gamma: f64) -> f64 {
    let (th, tc) = (baths.t_h, baths.t_c);
    delta_s * (th - tc) * gamma * (tc * (1.0 + gamma) + th * (1.0 - gamma))
        / (2.0 * (th + gamma * (tc - th)))
}

/// Leading-order power near Carnot efficiency for `Sigma_c = sigma_ratio Sigma_h`,
/// with `Sigma` the hot-stroke dissipation.
pub fn max_power_proportional_high_eff(
    delta_s: f64,
    sigma: f64,
    sigma_ratio: f64,
    baths: BathPair,
    gamma: f64,
) -> Result<f64> {
    check_gamma(gamma)?;
    check_positive("Sigma", sigma)?;
    check_positive("sigma ratio", sigma_ratio)?;
    let r = baths.t_c / baths.t_h;
    let d = 1.0 + sigma_ratio.sqrt();
    Ok(baths.t_h * delta_s * delta_s / sigma * (1.0 - r).powi(2) * (1.0 - gamma) / (r * d * d))
}

/// Dissipation ratio `Sigma_c / Sigma_h = (T_h/T_c)^alpha` for a bath of
/// ohmicity `alpha` (the hot-stroke metric is smaller by `(T_c/T_h)^alpha`).
pub fn ohmic_sigma_ratio(alpha: f64, baths: BathPair) -> f64 {
    (baths.t_h / baths.t_c).powf(alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperBranch {
    /// `K / (4 min(a, b))`, tighter when `1/3 <= a/b <= 3`.
    Min,
    /// `K / (a + b)`.
    Sum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymmetricBounds {
    pub upper: f64,
    pub lower: f64,
    pub upper_branch: UpperBranch,
}

/// Upper and lower bounds on the asymmetric maximum power in terms of
/// `a = T_c Sigma_c`, `b = T_h Sigma_h` and `K = dS^2 dT^2 / 4`.
pub fn asymmetric_bounds(
    delta_s: f64,
    sigma_c: f64,
    sigma_h: f64,
    baths: BathPair,
) -> Result<AsymmetricBounds> {
    check_positive("Sigma_c", sigma_c)?;
    check_positive("Sigma_h", sigma_h)?;
    let a = baths.t_c * sigma_c;
    let b = baths.t_h * sigma_h;
    let dt = baths.delta_t();
    let k = delta_s * delta_s * dt * dt / 4.0;
    let u_min = k / (4.0 * a.min(b));
    let u_sum = k / (a + b);
    let (upper, upper_branch) = if u_min <= u_sum {
        (u_min, UpperBranch::Min)
    } else {
        (u_sum, UpperBranch::Sum)
    };
    let lower = (k / (4.0 * a.max(b))).max(k / (2.0 * (a + b)));
    Ok(AsymmetricBounds {
        upper,
        lower,
        upper_branch,
    })
}

/// Numerical maximization of the power over stroke durations.
///
/// With `gamma = Some(g)` the cold duration is eliminated through the
/// efficiency constraint `W = g eta_C Q_h`, leaving a 1-D search over
/// `tau_h`; with `None` both durations are free (nested golden sections).
pub fn numeric_time_optimum(
    delta_s: f64,
    sigma_c: f64,
    sigma_h: f64,
    baths: BathPair,
    gamma: Option<f64>,
) -> Result<CyclePerformance> {
    check_positive("Sigma_c", sigma_c)?;
    check_positive("Sigma_h", sigma_h)?;
    let (th, tc) = (baths.t_h, baths.t_c);
    let power = |tau_c: f64, tau_h: f64| {
        let w = (th - tc) * delta_s - th * sigma_h / tau_h - tc * sigma_c / tau_c;
        w / (tau_c + tau_h)
    };
    match gamma {
        Some(g) => {
            check_gamma(g)?;
            let kappa = (1.0 - g * baths.carnot()) * th / tc;
            if !(delta_s > 0.0) || kappa <= 1.0 {
                return Err(Error::Infeasible(format!(
                    "efficiency {g} x eta_C is not reachable in finite time"
                )));
            }
            // x = Sigma/tau; x_c is fixed by x_h through the constraint.
            let x_max = delta_s * (1.0 - 1.0 / kappa);
            let tau_min = sigma_h / x_max;
            let taus = |u: f64| {
                let tau_h = tau_min * (1.0 + u.exp());
                let x_c = kappa * (delta_s - sigma_h / tau_h) - delta_s;
                (sigma_c / x_c, tau_h)
            };
            let obj = |u: f64| {
                let (a, b) = taus(u);
                if a > 0.0 && a.is_finite() {
                    power(a, b)
                } else {
                    f64::NEG_INFINITY
                }
            };
            let (u, _) = scan_then_golden(obj, -40.0, 40.0, 800, 1e-12);
            let (tau_c, tau_h) = taus(u);
            performance(delta_s, sigma_c, sigma_h, tau_c, tau_h, baths)
        }
        None => {
            check_positive("delta_S", delta_s)?;
            if baths.delta_t() == 0.0 {
                return quasistatic(delta_s, sigma_c, sigma_h, baths);
            }
            let scale = (sigma_c.max(sigma_h) / delta_s).ln();
            let inner = |lh: f64| {
                let th_ = lh.exp();
                scan_then_golden(|lc| power(lc.exp(), th_), scale - 30.0, scale + 30.0, 240, 1e-12)
            };
            let (lh, _) = scan_then_golden(|lh| inner(lh).1, scale - 30.0, scale + 30.0, 240, 1e-12);
            let (lh, _) = golden_section_max(|x| inner(x).1, lh - 1e-3, lh + 1e-3, 1e-13);
            let (lc, _) = inner(lh);
            performance(delta_s, sigma_c, sigma_h, lc.exp(), lh.exp(), baths)
        }
    }
}

/// Work variance of the two bath switches, `2 dT^2 Var(G)`.
pub fn quench_work_fluctuation(point: &GibbsPoint, baths: BathPair) -> f64 {
    let dt = baths.delta_t();
    2.0 * dt * dt * heat_capacity(point)
}
