//! Binary logistic regression by iteratively reweighted least squares.
//!
//! An intercept column is appended after the supplied features. Standard errors
//! come from the inverse of the observed information `XᵀWX` at the estimate and
//! p-values from the two-sided normal tail of the Wald statistic.

use nalgebra::{DMatrix, DVector};

use crate::special::normal_two_sided;
use crate::StatsError;

/// Fitted probability this close to 0 or 1 marks (quasi-)complete separation.
const SEPARATION_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogitOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the max-norm of the score vector.
    pub score_tolerance: f64,
}

impl Default for LogitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            score_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogitFit {
    /// Feature coefficients in input order, then the intercept.
    pub coefficients: Vec<Coefficient>,
    pub log_likelihood: f64,
    /// Log-likelihood of the intercept-only model.
    pub null_log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub separation: bool,
    pub score_max_norm: f64,
    pub n: usize,
}

impl LogitFit {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }
}

/// Row-major features plus trailing intercept column.
pub fn design_matrix(features: &[Vec<f64>]) -> DMatrix<f64> {
    let n = features.len();
    let k = features.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, k + 1, |i, j| if j < k { features[i][j] } else { 1.0 })
}

fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Bernoulli log-likelihood `Σ yη − log(1 + e^η)` with `η = Xβ`.
pub fn log_likelihood(x: &DMatrix<f64>, labels: &[bool], beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter()
        .zip(labels)
        .map(|(&e, &y)| if y { e } else { 0.0 } - log1p_exp(e))
        .sum()
}

/// Gradient of [`log_likelihood`]: `Xᵀ(y − p)`.
pub fn score(x: &DMatrix<f64>, labels: &[bool], beta: &DVector<f64>) -> DVector<f64> {
    let eta = x * beta;
    let resid = DVector::from_iterator(
        labels.len(),
        eta.iter()
            .zip(labels)
            .map(|(&e, &y)| f64::from(u8::from(y)) - sigmoid(e)),
    );
    x.transpose() * resid
}

fn information(x: &DMatrix<f64>, beta: &DVector<f64>) -> DMatrix<f64> {
    let eta = x * beta;
    let mut weighted = x.clone();
    for (i, &e) in eta.iter().enumerate() {
        let p = sigmoid(e);
        let w = p * (1.0 - p);
        weighted.row_mut(i).scale_mut(w);
    }
    x.transpose() * weighted
}

fn default_names(k: usize) -> Vec<String> {
    (0..k).map(|j| format!("x{j}")).collect()
}

/// Maximum-likelihood logistic regression.
///
/// `names`, when given, labels the feature columns; the intercept is always named
/// `"intercept"`.
pub fn logistic_fit(
    features: &[Vec<f64>],
    labels: &[bool],
    names: Option<&[String]>,
    options: LogitOptions,
) -> Result<LogitFit, StatsError> {
    let n = features.len();
    if n != labels.len() {
        return Err(StatsError::LengthMismatch {
            left: n,
            right: labels.len(),
        });
    }
    let k = features.first().map_or(0, Vec::len);
    if features.iter().any(|row| row.len() != k) {
        return Err(StatsError::RaggedTable);
    }
    if n <= k + 1 {
        return Err(StatsError::Underdetermined { n, params: k + 1 });
    }
    if let Some(i) = features
        .iter()
        .position(|row| row.iter().any(|v| !v.is_finite()))
    {
        return Err(StatsError::NonFinite(i));
    }
    let positives = labels.iter().filter(|&&y| y).count();
    if positives == 0 || positives == n {
        return Err(StatsError::SingleClass);
    }
    let names: Vec<String> = match names {
        Some(names) if names.len() == k => names.to_vec(),
        _ => default_names(k),
    };

    let x = design_matrix(features);
    let params = k + 1;
    let base_rate = positives as f64 / n as f64;
    let mut beta = DVector::zeros(params);
    beta[k] = (base_rate / (1.0 - base_rate)).ln();
    let null_log_likelihood = log_likelihood(&x, labels, &beta);
    let mut ll = null_log_likelihood;

    let mut converged = false;
    let mut iterations = 0;
    let mut grad = score(&x, labels, &beta);
    while iterations < options.max_iterations {
        if grad.amax() < options.score_tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let info = information(&x, &beta);
        let Some(chol) = info.cholesky() else {
            if fitted_extreme(&x, &beta) {
                // information collapsed because probabilities saturated
                break;
            }
            return Err(StatsError::Singular);
        };
        let step = chol.solve(&grad);
        // step halving keeps the likelihood monotone
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let candidate = &beta + &step * scale;
            let candidate_ll = log_likelihood(&x, labels, &candidate);
            if candidate_ll.is_finite() && candidate_ll >= ll {
                beta = candidate;
                ll = candidate_ll;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        grad = score(&x, labels, &beta);
        if !accepted {
            // no ascent possible at machine precision
            converged = step.amax() <= 1e-12 * (1.0 + beta.amax());
            break;
        }
        if step.amax() * scale <= 1e-14 * (1.0 + beta.amax()) {
            converged = true;
            break;
        }
    }

    let separation = fitted_extreme(&x, &beta);
    if separation {
        converged = false;
    }
    let covariance = information(&x, &beta)
        .try_inverse()
        .unwrap_or_else(|| DMatrix::from_element(params, params, f64::NAN));
    let coefficients = (0..params)
        .map(|j| {
            let estimate = beta[j];
            let std_error = covariance[(j, j)].max(0.0).sqrt();
            let z = estimate / std_error;
            Coefficient {
                name: if j < k {
                    names[j].clone()
                } else {
                    "intercept".into()
                },
                estimate,
                std_error,
                z,
                p_value: if z.is_nan() {
                    f64::NAN
                } else {
                    normal_two_sided(z)
                },
            }
        })
        .collect();
    Ok(LogitFit {
        coefficients,
        log_likelihood: ll,
        null_log_likelihood,
        iterations,
        converged,
        separation,
        score_max_norm: grad.amax(),
        n,
    })
}

fn fitted_extreme(x: &DMatrix<f64>, beta: &DVector<f64>) -> bool {
    (x * beta).iter().any(|&e| {
        let p = sigmoid(e);
        !(SEPARATION_EPS..=1.0 - SEPARATION_EPS).contains(&p)
    })
}
