//! Adaptive Dormand-Prince 5(4) integrator for small nonstiff systems.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 10_000_000;

/// Integrates `y' = f(t, y)` from `ts[0]`, returning the state at every
/// output time in `ts` (which must be nondecreasing). `tol` is used as both
/// the absolute and relative local error tolerance.
pub fn dopri5<F>(f: F, ts: &[f64], y0: &[f64], tol: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut out = Vec::with_capacity(ts.len());
    if ts.is_empty() {
        return Ok(out);
    }
    let mut t = ts[0];
    let mut y = y0.to_vec();
    out.push(y.clone());
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let span = (ts[ts.len() - 1] - ts[0]).abs().max(1e-300);
    let mut h = 1e-3 * span;
    let mut steps = 0usize;

    for &target in &ts[1..] {
        while t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Numerical("ODE step limit exceeded".into()));
            }
            let last = t + h >= target;
            let hs = if last { target - t } else { h };
            f(t, &y, &mut k[0]);
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (r, kr) in k.iter().enumerate().take(s) {
                        acc += hs * A[s][r] * kr[i];
                    }
                    tmp[i] = acc;
                }
                f(t + C[s] * hs, &tmp, &mut k[s]);
            }
            let mut err = 0.0f64;
            let mut y5 = vec![0.0; n];
            for i in 0..n {
                let mut a5 = 0.0;
                let mut a4 = 0.0;
                for s in 0..7 {
                    a5 += B5[s] * k[s][i];
                    a4 += B4[s] * k[s][i];
                }
                y5[i] = y[i] + hs * a5;
                let sc = tol * (1.0 + y[i].abs().max(y5[i].abs()));
                err = err.max((hs * (a5 - a4)).abs() / sc);
            }
            if err <= 1.0 || hs < 1e-14 * span {
                t = if last { target } else { t + hs };
                y = y5;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !last || err > 1.0 {
                h = hs * factor;
            }
            if !y.iter().all(|v| v.is_finite()) {
                return Err(Error::Numerical("ODE solution diverged".into()));
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
