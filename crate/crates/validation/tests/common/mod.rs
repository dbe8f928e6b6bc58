#![allow(dead_code)]

use carnot_ld::thermo_core::{gibbs_point, HermitianOperator, C64};
use nalgebra::DMatrix;

/// Hermitian matrix from `n*n` real and `n*n` imaginary parts.
pub fn hermitian(n: usize, re: &[f64], im: &[f64]) -> HermitianOperator {
    let m = DMatrix::from_fn(n, n, |i, j| C64::new(re[i * n + j], im[i * n + j]));
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    HermitianOperator::new(h).unwrap()
}

pub fn diagonal(d: &[f64]) -> HermitianOperator {
    HermitianOperator::from_diagonal(d).unwrap()
}

pub fn log_z(ops: &[HermitianOperator], lambda: &[f64]) -> f64 {
    let g = HermitianOperator::linear_combination(ops, lambda).unwrap();
    gibbs_point(&g).log_z()
}

/// Fourth-order central differences for the Hessian of `log Z`.
pub fn log_z_hessian(ops: &[HermitianOperator], lambda: &[f64], h: f64) -> DMatrix<f64> {
    let k = lambda.len();
    let f = |di: &[(usize, f64)]| {
        let mut x = lambda.to_vec();
        for &(i, d) in di {
            x[i] += d;
        }
        log_z(ops, &x)
    };
    let mut out = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            out[(i, j)] = if i == j {
                (-f(&[(i, 2.0 * h)]) + 16.0 * f(&[(i, h)]) - 30.0 * f(&[]) + 16.0 * f(&[(i, -h)])
                    - f(&[(i, -2.0 * h)]))
                    / (12.0 * h * h)
            } else {
                let c = |a: f64, b: f64| f(&[(i, a * h), (j, b * h)]);
                (8.0 * (c(1.0, -2.0) + c(2.0, -1.0) + c(-2.0, 1.0) + c(-1.0, 2.0))
                    - 8.0 * (c(-1.0, -2.0) + c(-2.0, -1.0) + c(1.0, 2.0) + c(2.0, 1.0))
                    - (c(2.0, -2.0) + c(-2.0, 2.0) - c(-2.0, -2.0) - c(2.0, 2.0))
                    + 64.0 * (c(-1.0, -1.0) + c(1.0, 1.0) - c(1.0, -1.0) - c(-1.0, 1.0)))
                    / (144.0 * h * h)
            };
        }
    }
    out
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
