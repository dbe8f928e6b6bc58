//! Exactly solvable engine: a ground state and `d = 2^N - 1` degenerate
//! excited levels, relaxing as `rho' = Gamma (omega - rho)`, driven so the
//! equilibrium ground population is `q(s) = (1 + eps cos(pi s)) / 2`.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::cycle_opt::{max_power_at_efficiency, power_at_efficiency_closed_form, BathPair, CyclePerformance};
use crate::error::{invalid, Result};
use crate::models::optimal_degenerate_gap_ln;
use crate::ode::dopri5;

/// Highest order of the slow-driving series.
pub const MAX_ORDER: usize = 6;

/// Simpson intervals used for the heat integrals.
const QUAD_INTERVALS: usize = 4000;

/// Largest `tau_eq / tau` considered consistent with slow driving.
pub const SLOW_DRIVING_LIMIT: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExplicitProtocol {
    n: u32,
    epsilon: f64,
    gamma_rate: f64,
    m: usize,
}

impl ExplicitProtocol {
    pub fn new(n: u32, epsilon: f64, gamma_rate: f64, m: usize) -> Result<Self> {
        if n < 1 {
            return invalid("need N >= 1");
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return invalid(format!("modulation must lie in (0, 1), got {epsilon}"));
        }
        if !(gamma_rate > 0.0 && gamma_rate.is_finite()) {
            return invalid("relaxation rate must be positive");
        }
        if m < 2 {
            return invalid("need at least two grid points");
        }
        Ok(Self {
            n,
            epsilon,
            gamma_rate,
            m,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma_rate(&self) -> f64 {
        self.gamma_rate
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = 1.0 / (self.m - 1) as f64;
        (0..self.m).map(|i| i as f64 * h).collect()
    }

    /// `ln(2^N - 1)` without overflow.
    pub fn ln_degeneracy(&self) -> f64 {
        let n = self.n as f64;
        n * LN_2 + (-(-n * LN_2).exp()).ln_1p()
    }

    pub fn q(&self, s: f64) -> f64 {
        0.5 * (1.0 + self.epsilon * (PI * s).cos())
    }

    /// `j`-th s-derivative of `q`.
    pub fn q_derivative(&self, j: usize, s: f64) -> f64 {
        if j == 0 {
            return self.q(s);
        }
        0.5 * self.epsilon * PI.powi(j as i32) * (PI * s + j as f64 * PI / 2.0).cos()
    }

    /// Gap in units of the temperature, `E = ln(d q / (1 - q))`.
    pub fn gap(&self, s: f64) -> f64 {
        let q = self.q(s);
        self.ln_degeneracy() + (q / (1.0 - q)).ln()
    }
}

/// Samples of `(q, E)` on the protocol grid.
pub fn driving_fields(p: &ExplicitProtocol) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = p.grid();
    let q: Vec<f64> = grid.iter().map(|&s| p.q(s)).collect();
    if q.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
        return invalid("ground population left (0, 1)");
    }
    let e = grid.iter().map(|&s| p.gap(s)).collect();
    Ok((q, e))
}

#[derive(Clone, Debug, Serialize)]
pub struct Sampled {
    pub values: Vec<f64>,
    pub warning: Option<String>,
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return invalid("stroke duration must be positive and finite");
    }
    Ok(())
}

/// Order-`J` slow-driving population `sum_j (-tau Gamma)^-j d^j q / ds^j`.
pub fn slow_driving_population(p: &ExplicitProtocol, tau: f64, order: usize) -> Result<Sampled> {
    check_tau(tau)?;
    if order > MAX_ORDER {
        return invalid(format!("series order must be <= {MAX_ORDER}"));
    }
    let k = tau * p.gamma_rate;
    let warning = (k <= PI).then(|| {
        format!("tau Gamma = {k:.3} <= pi: slow-driving series does not converge")
    });
    let values = p
        .grid()
        .iter()
        .map(|&s| {
            (0..=order)
                .map(|j| (-k).powi(-(j as i32)) * p.q_derivative(j, s))
                .sum()
        })
        .collect();
    Ok(Sampled { values, warning })
}

/// Ground population at `s = 0` on the periodic (slow-manifold) solution.
fn manifold_start(p: &ExplicitProtocol, k: f64, sign: f64) -> f64 {
    let x = PI / k;
    0.5 + sign * 0.5 * p.epsilon / (1.0 + x * x)
}

/// Integrates `dp/ds = tau Gamma (q - p)` from the slow-manifold start.
pub fn exact_population_ode(p: &ExplicitProtocol, tau: f64) -> Result<Vec<f64>> {
    exact_population_ode_tol(p, tau, 1e-10)
}

pub fn exact_population_ode_tol(p: &ExplicitProtocol, tau: f64, tol: f64) -> Result<Vec<f64>> {
    check_tau(tau)?;
    let k = tau * p.gamma_rate;
    let ys = dopri5(
        |s, y, dy| dy[0] = k * (p.q(s) - y[0]),
        &p.grid(),
        &[manifold_start(p, k, 1.0)],
        tol,
    )?;
    Ok(ys.into_iter().map(|y| y[0]).collect())
}

fn simpson<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut acc = f(0.0) + f(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0
}

/// Order-`j` heat in units of the bath temperature,
/// `-int E (-tau Gamma)^-j d^(j+1) q / ds^(j+1) ds`.
pub fn heat_by_order(p: &ExplicitProtocol, tau: f64, j: usize) -> Result<f64> {
    check_tau(tau)?;
    let k = tau * p.gamma_rate;
    let c = -(-k).powi(-(j as i32));
    Ok(c * simpson(|s| p.gap(s) * p.q_derivative(j + 1, s), QUAD_INTERVALS))
}

/// Low-dissipation entropy change, `(pi eps / 2) int E sin(pi s) ds`.
pub fn delta_s_ld(p: &ExplicitProtocol) -> f64 {
    0.5 * PI * p.epsilon * simpson(|s| p.gap(s) * (PI * s).sin(), QUAD_INTERVALS)
}

/// Low-dissipation coefficient, `(pi^2 eps / 2 Gamma) int E cos(pi s) ds`.
pub fn sigma_ld(p: &ExplicitProtocol) -> f64 {
    0.5 * PI * PI * p.epsilon / p.gamma_rate
        * simpson(|s| p.gap(s) * (PI * s).cos(), QUAD_INTERVALS)
}

/// Heat of one stroke (units of the bath temperature) summed to all orders,
/// `a (dS - Sigma/tau)` forward and `-a (dS + Sigma/tau)` reversed, with
/// `a = 1 / (1 + (pi / tau Gamma)^2)`.
pub fn full_series_heat(p: &ExplicitProtocol, tau: f64, reversed: bool) -> Result<f64> {
    check_tau(tau)?;
    let x = PI / (tau * p.gamma_rate);
    let (ds, sig) = (delta_s_ld(p), sigma_ld(p));
    let q = if reversed {
        -(ds + sig / tau)
    } else {
        ds - sig / tau
    };
    Ok(q / (1.0 + x * x))
}

/// Stroke heat `-int E dp` from the exact dynamics, integrated alongside the
/// population. The reversed stroke runs the protocol backwards.
pub fn exact_stroke_heat(p: &ExplicitProtocol, tau: f64, reversed: bool) -> Result<f64> {
    check_tau(tau)?;
    let k = tau * p.gamma_rate;
    let sign = if reversed { -1.0 } else { 1.0 };
    let map = |s: f64| if reversed { 1.0 - s } else { s };
    let ys = dopri5(
        |s, y, dy| {
            let dp = k * (p.q(map(s)) - y[0]);
            dy[0] = dp;
            dy[1] = -p.gap(map(s)) * dp;
        },
        &[0.0, 1.0],
        &[manifold_start(p, k, sign), 0.0],
        1e-12,
    )?;
    Ok(ys[1][1])
}

/// Geometric decay rate of the heat series: `exp` of the least-squares
/// slope of `ln |Q^(j)|` over `j = 0..4`.
pub fn heat_order_ratio(p: &ExplicitProtocol, tau: f64) -> Result<f64> {
    let logs = (0..5)
        .map(|j| heat_by_order(p, tau, j).map(|q| q.abs().ln()))
        .collect::<Result<Vec<_>>>()?;
    let slope: f64 = logs
        .iter()
        .enumerate()
        .map(|(j, l)| (j as f64 - 2.0) * l)
        .sum::<f64>()
        / 10.0;
    Ok(slope.exp())
}

#[derive(Clone, Debug, Serialize)]
pub struct ExplicitEngine {
    pub n: u32,
    pub gamma: f64,
    /// Power bound from the maximal heat capacity (vanishing modulation).
    pub p_ideal: f64,
    pub p_ld: f64,
    /// Power with the stroke heats of the exact dynamics.
    pub p_exact: f64,
    pub eta: f64,
    pub tau_c: f64,
    pub tau_h: f64,
    pub sigma_w2: f64,
    pub delta_s: f64,
    pub sigma: f64,
    pub performance: CyclePerformance,
    pub warnings: Vec<String>,
}

/// Assembles the engine at efficiency `gamma eta_C` with `T_h = 1`,
/// `T_c = r`: hot stroke runs the protocol, cold stroke reverses it.
pub fn assemble_engine(p: &ExplicitProtocol, r: f64, gamma: f64) -> Result<ExplicitEngine> {
    if !(r > 0.0 && r < 1.0) {
        return invalid("temperature ratio must lie in (0, 1)");
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return invalid("gamma must lie in (0, 1)");
    }
    let baths = BathPair::new(1.0, r)?;
    let ds = delta_s_ld(p);
    let sig = sigma_ld(p);
    let perf = max_power_at_efficiency(ds, sig, baths, gamma)?;
    let (tau_c, tau_h) = (perf.tau_c, perf.tau_h);

    let mut warnings = Vec::new();
    let ratio = 1.0 / (p.gamma_rate * tau_c.min(tau_h));
    if ratio > SLOW_DRIVING_LIMIT {
        warnings.push(format!(
            "tau_eq/tau = {ratio:.3} exceeds {SLOW_DRIVING_LIMIT}: slow driving is not consistent"
        ));
    }

    let (_, c_max) = optimal_degenerate_gap_ln(p.ln_degeneracy())?;
    let p_ideal = power_at_efficiency_closed_form(1.0, 1.0 / (c_max * p.gamma_rate), baths, gamma);

    let q_h = baths.t_h * exact_stroke_heat(p, tau_h, false)?;
    let q_c = baths.t_c * exact_stroke_heat(p, tau_c, true)?;
    let p_exact = (q_h + q_c) / (tau_c + tau_h);

    // Each bath switch is a quench of `dT E Pi` at fixed state.
    let cap = |s: f64| {
        let (e, q) = (p.gap(s), p.q(s));
        e * e * q * (1.0 - q)
    };
    let dt = baths.delta_t();
    let sigma_w2 = dt * dt * (cap(0.0) + cap(1.0));

    let mut performance = perf;
    performance.sigma_w2 = Some(sigma_w2);
    Ok(ExplicitEngine {
        n: p.n,
        gamma,
        p_ideal,
        p_ld: performance.p,
        p_exact,
        eta: performance.eta,
        tau_c,
        tau_h,
        sigma_w2,
        delta_s: ds,
        sigma: sig,
        performance,
        warnings,
    })
}

/// Engines for each `N` at `gamma = 1 - 1/N`.
pub fn efficiency_sweep(ns: &[u32], epsilon: f64, r: f64, gamma_rate: f64) -> Result<Vec<ExplicitEngine>> {
    if ns.iter().any(|&n| n < 2) {
        return invalid("the sweep needs N >= 2 so that gamma > 0");
    }
    ns.par_iter()
        .map(|&n| {
            let p = ExplicitProtocol::new(n, epsilon, gamma_rate, 2)?;
            assemble_engine(&p, r, 1.0 - 1.0 / n as f64)
        })
        .collect()
}
