//! Derivative-free maximization: golden section, Nelder-Mead and a seeded
//! multi-start driver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximizes a unimodal `f` on `[a, b]`; returns `(x, f(x))`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..400 {
        if (b - a).abs() <= tol * (1.0 + c.abs().max(d.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Grid scan on `[a, b]` followed by golden section around the best cell.
pub fn scan_then_golden<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cells: usize, tol: f64) -> (f64, f64) {
    let h = (b - a) / cells as f64;
    let mut best = (a, f64::NEG_INFINITY);
    for i in 0..=cells {
        let x = a + i as f64 * h;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let lo = (best.0 - h).max(a);
    let hi = (best.0 + h).min(b);
    let r = golden_section_max(&f, lo, hi, tol);
    if r.1 >= best.1 {
        r
    } else {
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 8,
            seed: 0,
            tol: 1e-8,
            max_iter: 20_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Maximum {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Largest coordinate magnitude treated as divergence.
const DIVERGED: f64 = 1e6;

fn sanitize(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::NEG_INFINITY
    }
}

/// 1-D maximization from `x0`: expand a bracket uphill, then golden section.
/// Returns `None` when the objective keeps increasing without bound.
pub fn maximize_1d<F: Fn(f64) -> f64>(f: F, x0: f64, tol: f64) -> Option<(f64, f64)> {
    let f = |x: f64| sanitize(f(x));
    let mut h = 0.05 * x0.abs().max(0.1);
    let (mut a, mut fa) = (x0, f(x0));
    let (mut b, mut fb) = (x0 + h, f(x0 + h));
    if fb < fa {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
        h = -h;
    }
    // Now f(b) >= f(a); walk from a through b until the value drops.
    let mut c = b + h;
    let mut fc = f(c);
    let mut iter = 0;
    while fc >= fb {
        iter += 1;
        if iter > 200 || c.abs() > DIVERGED {
            return None;
        }
        h *= 1.6;
        a = b;
        b = c;
        fb = fc;
        c = b + h;
        fc = f(c);
    }
    let (lo, hi) = if a < c { (a, c) } else { (c, a) };
    Some(golden_section_max(f, lo, hi, tol))
}

/// Nelder-Mead maximization. Returns `None` on divergence.
pub fn nelder_mead_max<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], tol: f64, max_iter: usize) -> Option<Maximum> {
    let f = |x: &[f64]| sanitize(f(x));
    let k = x0.len();
    let mut best: Option<Maximum> = None;
    let mut start = x0.to_vec();
    // One restart from the converged point guards against collapsed simplices.
    for _ in 0..2 {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k + 1);
        simplex.push((start.clone(), f(&start)));
        for i in 0..k {
            let mut x = start.clone();
            x[i] += 0.1 * x[i].abs().max(0.1);
            let v = f(&x);
            simplex.push((x, v));
        }
        let mut iter = 0;
        loop {
            simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
            let diam = simplex
                .iter()
                .skip(1)
                .map(|(x, _)| {
                    x.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            let scale = 1.0 + simplex[0].0.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let spread = (simplex[0].1 - simplex[k].1).abs();
            if (diam <= tol * scale && spread <= 1e-14 * (1.0 + simplex[0].1.abs()))
                || iter >= max_iter
            {
                break;
            }
            if scale > DIVERGED {
                return None;
            }
            iter += 1;
            let centroid: Vec<f64> = (0..k)
                .map(|j| simplex[..k].iter().map(|(x, _)| x[j]).sum::<f64>() / k as f64)
                .collect();
            let worst = simplex[k].clone();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let xr = along(1.0);
            let fr = f(&xr);
            if fr > simplex[0].1 {
                let xe = along(2.0);
                let fe = f(&xe);
                simplex[k] = if fe > fr { (xe, fe) } else { (xr, fr) };
            } else if fr > simplex[k - 1].1 {
                simplex[k] = (xr, fr);
            } else {
                let (xc, fc) = if fr > worst.1 {
                    let x = along(0.5);
                    let v = f(&x);
                    (x, v)
                } else {
                    let x = along(-0.5);
                    let v = f(&x);
                    (x, v)
                };
                if fc > worst.1.max(fr) {
                    simplex[k] = (xc, fc);
                } else {
                    let x0 = simplex[0].0.clone();
                    for item in simplex.iter_mut().skip(1) {
                        let x: Vec<f64> =
                            item.0.iter().zip(&x0).map(|(a, b)| b + 0.5 * (a - b)).collect();
                        let v = f(&x);
                        *item = (x, v);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let (x, v) = simplex.swap_remove(0);
        start = x.clone();
        if best.as_ref().is_none_or(|b| v >= b.value) {
            best = Some(Maximum { x, value: v });
        }
    }
    best.filter(|b| b.value.is_finite())
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Seeded multi-start maximization. The first start is `x0`; the others
/// scale each coordinate by `4^u` with `u` uniform in `[-1, 1]` (additive
/// perturbation for zero coordinates). Starts run in parallel and the best
/// value wins, ties going to the lexicographically smallest point.
pub fn multistart_max<F>(f: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<Maximum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = vec![x0.to_vec()];
    for _ in 1..cfg.starts.max(1) {
        let s: Vec<f64> = x0
            .iter()
            .map(|&x| {
                let u: f64 = rng.random_range(-1.0..=1.0);
                if x == 0.0 {
                    u
                } else {
                    x * 4f64.powf(u)
                }
            })
            .collect();
        starts.push(s);
    }
    let results: Vec<Option<Maximum>> = starts
        .par_iter()
        .map(|s| {
            if s.len() == 1 {
                maximize_1d(|x| f(&[x]), s[0], cfg.tol).map(|(x, value)| Maximum { x: vec![x], value })
            } else {
                nelder_mead_max(&f, s, cfg.tol, cfg.max_iter)
            }
        })
        .collect();
    let mut best: Option<Maximum> = None;
    for r in results.into_iter().flatten() {
        best = match best {
            None => Some(r),
            Some(b) => {
                let tie = (r.value - b.value).abs() <= 1e-12 * b.value.abs().max(1e-300);
                if (!tie && r.value > b.value) || (tie && lex_less(&r.x, &b.x)) {
                    Some(r)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.ok_or_else(|| {
        Error::Unbounded(format!(
            "all {} starts diverged from {:?}",
            cfg.starts.max(1),
            x0
        ))
    })
}
