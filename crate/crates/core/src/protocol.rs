//! Sampled control protocols and the entropy-change and dissipation
//! (thermodynamic length) integrals along them.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::metrics::{entropy_gradient_at, ControlBasis, MetricRecipe};
use crate::thermo_core::{entropy, HermitianOperator};

/// Control coefficients `lambda_j(s_m)` on the uniform grid
/// `s_m = m/(M-1)`, together with the metric recipe.
#[derive(Clone, Debug)]
pub struct ControlProtocol {
    basis: ControlBasis,
    samples: Vec<Vec<f64>>,
    metric: MetricRecipe,
}

impl ControlProtocol {
    pub fn new(basis: ControlBasis, samples: Vec<Vec<f64>>, metric: MetricRecipe) -> Result<Self> {
        if samples.len() < 3 {
            return invalid(format!("protocol needs at least 3 samples, got {}", samples.len()));
        }
        for (m, row) in samples.iter().enumerate() {
            if row.len() != basis.len() {
                return invalid(format!(
                    "sample {m} has {} coefficients for {} controls",
                    row.len(),
                    basis.len()
                ));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return invalid(format!("sample {m} is not finite"));
            }
        }
        if let MetricRecipe::Multiscale { taus } = &metric {
            if taus.len() != basis.len() {
                return invalid("one relaxation time per control is required");
            }
        }
        Ok(Self {
            basis,
            samples,
            metric,
        })
    }

    pub fn basis(&self) -> &ControlBasis {
        &self.basis
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn metric(&self) -> &MetricRecipe {
        &self.metric
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn with_metric(mut self, metric: MetricRecipe) -> Self {
        self.metric = metric;
        self
    }

    /// The time-reversed protocol `lambda(1 - s)`.
    pub fn reversed(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        Self {
            basis: self.basis.clone(),
            samples,
            metric: self.metric.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProtocolFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })?;
        let labels = if file.labels.is_empty() {
            (0..file.basis.len()).map(|i| format!("x{i}")).collect()
        } else {
            file.labels
        };
        let basis = ControlBasis::new(file.basis, labels)?;
        Self::new(basis, file.samples, file.metric)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ProtocolFile {
            basis: self.basis.operators().to_vec(),
            labels: self.basis.labels().to_vec(),
            samples: self.samples.clone(),
            metric: self.metric.clone(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Numerical(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct ProtocolFile {
    basis: Vec<HermitianOperator>,
    #[serde(default)]
    labels: Vec<String>,
    samples: Vec<Vec<f64>>,
    metric: MetricRecipe,
}

/// Entropy change and dissipation of a protocol.
#[derive(Clone, Debug, Serialize)]
pub struct DissipationSummary {
    pub delta_s: f64,
    pub sigma: f64,
    /// `S(end) - S(start)` from the endpoint Gibbs states.
    pub delta_s_endpoints: f64,
    /// Richardson estimates (absolute); present when `M` is odd and >= 5.
    pub delta_s_error: Option<f64>,
    pub sigma_error: Option<f64>,
    /// `lambda_dot^T m lambda_dot` at each sample.
    pub sigma_density: Vec<f64>,
    /// `s . lambda_dot` at each sample.
    pub entropy_rate: Vec<f64>,
}

/// Centered differences, second-order one-sided at the ends.
fn derivatives(samples: &[Vec<f64>], h: f64) -> Vec<Vec<f64>> {
    let m = samples.len();
    let k = samples[0].len();
    (0..m)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let x = |t: usize| samples[t][j];
                    if i == 0 {
                        (-3.0 * x(0) + 4.0 * x(1) - x(2)) / (2.0 * h)
                    } else if i == m - 1 {
                        (3.0 * x(m - 1) - 4.0 * x(m - 2) + x(m - 3)) / (2.0 * h)
                    } else {
                        (x(i + 1) - x(i - 1)) / (2.0 * h)
                    }
                })
                .collect()
        })
        .collect()
}

/// Pairwise summation, independent of evaluation order.
pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    let mut w: Vec<f64> = values.to_vec();
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    h * pairwise_sum(&w)
}

struct SampleData {
    metric: nalgebra::DMatrix<f64>,
    grad: Vec<f64>,
    entropy: f64,
}

fn integrands(
    data: &[SampleData],
    rates: &[Vec<f64>],
) -> (Vec<f64>, Vec<f64>) {
    data.iter()
        .zip(rates)
        .map(|(d, r)| {
            let v = DVector::from_column_slice(r);
            let sig = v.dot(&(&d.metric * &v));
            let ent: f64 = d.grad.iter().zip(r).map(|(a, b)| a * b).sum();
            (sig, ent)
        })
        .unzip()
}

pub fn integrate_dissipation(p: &ControlProtocol) -> Result<DissipationSummary> {
    integrate_dissipation_with_tol(p, None)
}

/// As [`integrate_dissipation`]; with `tol` set, a Richardson estimate of
/// the relative quadrature error above `tol` is reported as a resolution
/// error carrying a suggested sample count.
pub fn integrate_dissipation_with_tol(
    p: &ControlProtocol,
    tol: Option<f64>,
) -> Result<DissipationSummary> {
    let m = p.len();
    let h = 1.0 / (m - 1) as f64;
    let data: Vec<SampleData> = p
        .samples
        .par_iter()
        .map(|lam| {
            let metric = p.metric.evaluate(&p.basis, lam)?;
            let point = p.basis.point(lam)?;
            let grad = entropy_gradient_at(&p.basis, &point)?;
            Ok(SampleData {
                metric: metric.matrix().clone(),
                grad,
                entropy: entropy(&point),
            })
        })
        .collect::<Result<_>>()?;

    let rates = derivatives(&p.samples, h);
    let (sigma_density, entropy_rate) = integrands(&data, &rates);
    let sigma = trapezoid(&sigma_density, h);
    let delta_s = trapezoid(&entropy_rate, h);

    let (mut sigma_error, mut delta_s_error) = (None, None);
    if m % 2 == 1 && m >= 5 {
        let coarse_samples: Vec<Vec<f64>> = p.samples.iter().step_by(2).cloned().collect();
        let coarse_data: Vec<SampleData> = data
            .iter()
            .step_by(2)
            .map(|d| SampleData {
                metric: d.metric.clone(),
                grad: d.grad.clone(),
                entropy: d.entropy,
            })
            .collect();
        let coarse_rates = derivatives(&coarse_samples, 2.0 * h);
        let (cs, ce) = integrands(&coarse_data, &coarse_rates);
        sigma_error = Some((sigma - trapezoid(&cs, 2.0 * h)).abs() / 3.0);
        delta_s_error = Some((delta_s - trapezoid(&ce, 2.0 * h)).abs() / 3.0);
    }

    if let (Some(tol), Some(es), Some(ed)) = (tol, sigma_error, delta_s_error) {
        let rel = (es / sigma.abs().max(1e-300)).max(ed / delta_s.abs().max(1e-300));
        let rel = if sigma == 0.0 && delta_s == 0.0 { 0.0 } else { rel };
        if rel > tol {
            // Trapezoid error scales as h^2.
            let factor = (rel / tol).sqrt() * 1.2;
            let mut suggested = ((m - 1) as f64 * factor).ceil() as usize + 1;
            if suggested % 2 == 0 {
                suggested += 1;
            }
            return Err(Error::Resolution {
                estimate: rel,
                tol,
                suggested_m: suggested,
            });
        }
    }

    Ok(DissipationSummary {
        delta_s,
        sigma,
        delta_s_endpoints: data[m - 1].entropy - data[0].entropy,
        delta_s_error,
        sigma_error,
        sigma_density,
        entropy_rate,
    })
}

/// Monotone shape `lambda(s)` with `lambda(0) = 1`, `lambda(1) = 1 + eps`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// `(1 + eps)^s`: constant logarithmic speed, so `dG/ds` stays
    /// proportional to `G` with a fixed ratio.
    #[default]
    Geometric,
    /// `1 + eps s`.
    Linear,
    /// `1 + eps (1 - cos(pi s))/2`; vanishing speed at both ends.
    RaisedCosine,
}

impl Shape {
    pub fn value(self, eps: f64, s: f64) -> f64 {
        match self {
            Shape::Geometric => ((1.0 + eps).ln() * s).exp(),
            Shape::Linear => 1.0 + eps * s,
            Shape::RaisedCosine => 1.0 + eps * 0.5 * (1.0 - (std::f64::consts::PI * s).cos()),
        }
    }
}

/// Single-control protocol `G(s) = lambda(s) G0` with a unit-time KMB
/// metric; swap the recipe with [`ControlProtocol::with_metric`].
pub fn proportional_cycle(
    g0: &HermitianOperator,
    epsilon: f64,
    m: usize,
    shape: Shape,
) -> Result<ControlProtocol> {
    if !epsilon.is_finite() || epsilon <= -1.0 {
        return invalid("epsilon must be finite and greater than -1");
    }
    if m < 3 {
        return invalid("at least 3 samples are required");
    }
    let basis = ControlBasis::new(vec![g0.clone()], vec!["g".into()])?;
    let samples = (0..m)
        .map(|i| vec![shape.value(epsilon, i as f64 / (m - 1) as f64)])
        .collect();
    ControlProtocol::new(basis, samples, MetricRecipe::Kmb { tau_eq: 1.0 })
}
