//! Large-N scaling of power, stroke times, work and fluctuations, the
//! criticality condition for supralinear power, and the Otto comparison.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycle_opt::{max_power_at_efficiency, BathPair};
use crate::error::{invalid, Result};
use crate::explicit_sim::{sigma_ld, ExplicitProtocol};
use crate::thermo_core::{gibbs_point, heat_capacity, HermitianOperator};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponents {
    pub alpha_c: f64,
    pub nu: f64,
    pub z: f64,
    pub dim: f64,
}

impl CriticalExponents {
    fn check(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.dim > 0.0) {
            return invalid("nu and dim must be positive");
        }
        Ok(())
    }

    /// `(a, b, xi) = (alpha_c / (dim nu), z / dim, 1 / (dim nu))`.
    pub fn mapped(&self) -> (f64, f64, f64) {
        let dn = self.dim * self.nu;
        (self.alpha_c / dn, self.z / self.dim, 1.0 / dn)
    }
}

/// `C = c0 N^(1+a)`, `tau_eq = tau0 N^b`, `1 - gamma = N^-xi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingExponents {
    pub a: f64,
    pub b: f64,
    pub xi: f64,
    pub c0: f64,
    pub tau0: f64,
    #[serde(default)]
    pub critical: Option<CriticalExponents>,
}

impl ScalingExponents {
    pub fn new(a: f64, b: f64, xi: f64, c0: f64, tau0: f64) -> Result<Self> {
        let e = Self {
            a,
            b,
            xi,
            c0,
            tau0,
            critical: None,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn from_critical(c: CriticalExponents, c0: f64, tau0: f64) -> Result<Self> {
        c.check()?;
        let (a, b, xi) = c.mapped();
        let e = Self {
            a,
            b,
            xi,
            c0,
            tau0,
            critical: Some(c),
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.a, self.b, self.xi, self.c0, self.tau0].iter().all(|x| x.is_finite()) {
            return invalid("exponents must be finite");
        }
        if !(self.xi > 0.0 && self.c0 > 0.0 && self.tau0 > 0.0) {
            return invalid("xi, c0 and tau0 must be positive");
        }
        if let Some(c) = self.critical {
            c.check()?;
            let (a, b, _) = c.mapped();
            if (a - self.a).abs() > 1e-12 || (b - self.b).abs() > 1e-12 {
                return invalid(format!(
                    "exponents (a, b) = ({}, {}) disagree with the critical mapping ({a}, {b})",
                    self.a, self.b
                ));
            }
        }
        Ok(())
    }

    /// The Otto comparison needs `1 - gamma ~ N^(-1/(dim nu))`; reports
    /// a mismatch in critical mode.
    pub fn warnings(&self) -> Vec<String> {
        match self.critical {
            Some(c) if (c.mapped().2 - self.xi).abs() > 1e-12 => vec![format!(
                "xi = {} but the Otto comparison requires 1/(dim nu) = {}",
                self.xi,
                c.mapped().2
            )],
            _ => Vec::new(),
        }
    }

    /// Exponent of the power, `1 + a - b - xi`.
    pub fn power_exponent(&self) -> f64 {
        1.0 + self.a - self.b - self.xi
    }

    pub fn capacity(&self, n: f64) -> f64 {
        self.c0 * n.powf(1.0 + self.a)
    }

    pub fn tau_eq(&self, n: f64) -> f64 {
        self.tau0 * n.powf(self.b)
    }

    pub fn gamma(&self, n: f64) -> f64 {
        1.0 - n.powf(-self.xi)
    }
}

/// Control amplitude as a function of size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum EpsilonLaw {
    Constant { c: f64 },
    InverseN { c: f64 },
    /// `c N^(-1/(dim nu))`.
    Critical { c: f64, nu: f64, dim: f64 },
}

impl EpsilonLaw {
    pub fn exponent(&self) -> f64 {
        match *self {
            EpsilonLaw::Constant { .. } => 0.0,
            EpsilonLaw::InverseN { .. } => -1.0,
            EpsilonLaw::Critical { nu, dim, .. } => -1.0 / (dim * nu),
        }
    }

    pub fn value(&self, n: f64) -> f64 {
        let c = match *self {
            EpsilonLaw::Constant { c } | EpsilonLaw::InverseN { c } | EpsilonLaw::Critical { c, .. } => c,
        };
        c * n.powf(self.exponent())
    }

    fn check(&self) -> Result<()> {
        let ok = match *self {
            EpsilonLaw::Constant { c } | EpsilonLaw::InverseN { c } => c > 0.0,
            EpsilonLaw::Critical { c, nu, dim } => c > 0.0 && nu > 0.0 && dim > 0.0,
        };
        if ok {
            Ok(())
        } else {
            invalid("epsilon law parameters must be positive")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: u64,
    pub epsilon: f64,
    pub p: f64,
    pub tau_c: f64,
    pub tau_h: f64,
    pub w: f64,
    pub sigma_w2: f64,
    pub f_w: f64,
}

fn check_ns(ns: &[u64]) -> Result<()> {
    if ns.iter().any(|&n| n < 1) {
        return invalid("N must be >= 1");
    }
    Ok(())
}

/// Leading-order values in `N`.
pub fn asymptotic_table(
    e: &ScalingExponents,
    baths: BathPair,
    eps: EpsilonLaw,
    ns: &[u64],
) -> Result<Vec<ScalingRow>> {
    e.validate()?;
    eps.check()?;
    check_ns(ns)?;
    let (th, tc) = (baths.t_h, baths.t_c);
    let dt = th - tc;
    Ok(ns
        .par_iter()
        .map(|&n| {
            let nf = n as f64;
            let ep = eps.value(nf);
            let p = e.c0 * dt * dt / (4.0 * e.tau0 * tc) * nf.powf(e.power_exponent());
            let tau = if dt > 0.0 {
                2.0 * ep * tc / dt * e.tau0 * nf.powf(e.b + e.xi)
            } else {
                f64::INFINITY
            };
            let w = dt * e.c0 * ep * nf.powf(1.0 + e.a);
            let sigma_w2 = 2.0 * dt * w / ep;
            ScalingRow {
                n,
                epsilon: ep,
                p,
                tau_c: tau,
                tau_h: tau,
                w,
                sigma_w2,
                f_w: fluctuation_ratio(w, ep, baths),
            }
        })
        .collect())
}

/// Finite-N values from the exact cycle formulas with `dS = eps C` and
/// `Sigma = eps^2 C tau_eq`.
pub fn exact_table(
    e: &ScalingExponents,
    baths: BathPair,
    eps: EpsilonLaw,
    ns: &[u64],
) -> Result<Vec<ScalingRow>> {
    e.validate()?;
    eps.check()?;
    check_ns(ns)?;
    let dt = baths.delta_t();
    ns.par_iter()
        .map(|&n| {
            let nf = n as f64;
            let ep = eps.value(nf);
            let c = e.capacity(nf);
            let gamma = e.gamma(nf).max(f64::MIN_POSITIVE);
            let perf = max_power_at_efficiency(ep * c, ep * ep * c * e.tau_eq(nf), baths, gamma)?;
            let sigma_w2 = 2.0 * dt * dt * c;
            Ok(ScalingRow {
                n,
                epsilon: ep,
                p: perf.p,
                tau_c: perf.tau_c,
                tau_h: perf.tau_h,
                w: perf.w,
                sigma_w2,
                f_w: if perf.w > 0.0 { sigma_w2.sqrt() / perf.w } else { f64::INFINITY },
            })
        })
        .collect()
}

/// Exponents of the explicit degenerate-level engine: `dS = eps ln d`
/// and `Sigma` independent of `N`, so `C ~ N^2`, `tau_eq` constant and
/// `gamma = 1 - 1/N`.
pub fn explicit_engine_exponents(epsilon_mod: f64, gamma_rate: f64) -> Result<ScalingExponents> {
    let p = ExplicitProtocol::new(1, epsilon_mod, gamma_rate, 2)?;
    let sigma_hat = sigma_ld(&p) * gamma_rate;
    ScalingExponents::new(
        1.0,
        0.0,
        1.0,
        epsilon_mod * epsilon_mod * LN_2 * LN_2 / sigma_hat,
        1.0 / gamma_rate,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalityVerdict {
    /// `alpha_c - z nu - 1`.
    pub margin: f64,
    pub supralinear: bool,
}

pub fn criticality_check(alpha_c: f64, nu: f64, z: f64) -> CriticalityVerdict {
    let margin = alpha_c - z * nu - 1.0;
    CriticalityVerdict {
        margin,
        supralinear: margin > 0.0,
    }
}

/// Relative work fluctuations `sqrt(2 (T_h - T_c) / (eps W))`.
pub fn fluctuation_ratio(w: f64, epsilon: f64, baths: BathPair) -> f64 {
    (2.0 * baths.delta_t() / (epsilon * w)).sqrt()
}

/// Relative fluctuations of the work summed over `m` cycles.
pub fn multi_cycle_ratio(f_w: f64, m: u64) -> f64 {
    f_w / (m.max(1) as f64).sqrt()
}

/// `N` exponent of the relative fluctuations when `C ~ N^(1+a)` and
/// `eps ~ N^eps_exponent`: `-(1 + a)/2 - eps_exponent`.
pub fn fluctuation_exponent(a: f64, eps_exponent: f64) -> f64 {
    -0.5 * (1.0 + a) - eps_exponent
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OttoComparison {
    pub w_exact: f64,
    pub w_linear: f64,
    pub p_otto: f64,
    pub p_carnot: f64,
    /// `P_carnot / P_otto`, zero when the Otto power vanishes.
    pub ratio: f64,
}

/// Internal energy of `H` in the state `exp(-x H) / Z`.
fn energy_at(h: &HermitianOperator, x: f64) -> f64 {
    let g = gibbs_point(&h.scale(x));
    g.expectation(h).expect("operator shares the state dimension")
}

/// Otto cycle with working points `lambda_h H` (hot) and `lambda_h (1 -
/// eta_C gamma) H` (cold) against a Carnot-like cycle at `gamma eta_C`,
/// both relaxing on `tau_eq`.
pub fn otto_comparison(
    h: &HermitianOperator,
    lambda_h: f64,
    beta_h: f64,
    beta_c: f64,
    gamma: f64,
    kappa: f64,
    tau_eq: f64,
) -> Result<OttoComparison> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return invalid("gamma must lie in (0, 1)");
    }
    if !(kappa >= 1.0) {
        return invalid("kappa must be >= 1");
    }
    if !(beta_h > 0.0 && beta_c >= beta_h && tau_eq > 0.0) {
        return invalid("need 0 < beta_h <= beta_c and tau_eq > 0");
    }
    let eta_c = 1.0 - beta_h / beta_c;
    let d_eta = eta_c * (1.0 - gamma);
    let x = beta_h * lambda_h;
    let w_exact =
        -lambda_h * eta_c * gamma * (energy_at(h, x + beta_c * lambda_h * d_eta) - energy_at(h, x));
    let c = heat_capacity(&gibbs_point(&h.scale(x)));
    let w_linear = eta_c * eta_c * beta_c / (beta_h * beta_h) * gamma * (1.0 - gamma) * c;
    let p_otto = w_exact / (2.0 * kappa * tau_eq);
    let (th, tc) = (1.0 / beta_h, 1.0 / beta_c);
    let dt = th - tc;
    let p_carnot =
        c / (4.0 * tau_eq) * dt * dt * gamma * (1.0 - gamma) / (gamma * tc + (1.0 - gamma) * th);
    let ratio = if p_otto == 0.0 { 0.0 } else { p_carnot / p_otto };
    Ok(OttoComparison {
        w_exact,
        w_linear,
        p_otto,
        p_carnot,
        ratio,
    })
}
