//! Exponential trend `ratio(year) = a·exp(b·year + c) + d` fitted by
//! Levenberg-Marquardt damped Gauss-Newton.
//!
//! Only the product `a·e^c` is identified by data, so the solver works on the
//! three identified quantities `(k, b, d)` with `ratio = k·exp(b·(year − y0)) + d`
//! and `y0` the mean year of the input. The reported parameters use `a = k`,
//! `c = −b·y0`, which reproduces the same curve.

use nalgebra::{Matrix3, Vector3};

use crate::StatsError;

const MAX_ITERATIONS: usize = 500;
const RELATIVE_TOLERANCE: f64 = 1e-10;
const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl ExpParams {
    pub fn predict(&self, year: f64) -> f64 {
        self.a * (self.b * year + self.c).exp() + self.d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpFit {
    pub params: ExpParams,
    pub rss: f64,
    pub initial_rss: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Exponential term vanishes over the fitted domain; the fit is a constant `d`.
    pub degenerate: bool,
    /// Every prediction over the fitted years lies in `[0, 1]`.
    pub in_unit_range: bool,
    /// Residual sum of squares after each accepted step, starting with the initial guess.
    pub rss_trace: Vec<f64>,
}

impl ExpFit {
    pub fn predict(&self, year: f64) -> f64 {
        self.params.predict(year)
    }
}

struct Problem<'a> {
    t: Vec<f64>,
    y: &'a [f64],
}

impl Problem<'_> {
    fn rss(&self, p: &Vector3<f64>) -> f64 {
        self.t
            .iter()
            .zip(self.y)
            .map(|(&t, &y)| {
                let r = y - (p[0] * (p[1] * t).exp() + p[2]);
                r * r
            })
            .sum()
    }

    /// Returns `(JᵀJ, Jᵀr)` for residuals `r = y − f`.
    fn normal_equations(&self, p: &Vector3<f64>) -> (Matrix3<f64>, Vector3<f64>) {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (&t, &y) in self.t.iter().zip(self.y) {
            let e = (p[1] * t).exp();
            let row = Vector3::new(e, p[0] * t * e, 1.0);
            let r = y - (p[0] * e + p[2]);
            jtj += row * row.transpose();
            jtr += row * r;
        }
        (jtj, jtr)
    }
}

/// Fit the exponential trend to `(year, ratio)` points.
///
/// Without `init` the start is `d = min ratio`, amplitude `max − min` at the end of the
/// series the trend rises toward, and `|b| = 0.01` with the sign of the trend.
pub fn fit_exponential(
    points: &[(f64, f64)],
    init: Option<ExpParams>,
) -> Result<ExpFit, StatsError> {
    if points.len() < 5 {
        return Err(StatsError::TooFewObservations {
            needed: 5,
            got: points.len(),
        });
    }
    for (i, &(year, ratio)) in points.iter().enumerate() {
        if !year.is_finite() || !ratio.is_finite() {
            return Err(StatsError::NonFinite(i));
        }
        if !(0.0..=1.0).contains(&ratio) {
            return Err(StatsError::RatioOutOfRange {
                index: i,
                value: ratio,
            });
        }
    }
    let y0 = points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64;
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let problem = Problem {
        t: points.iter().map(|p| p.0 - y0).collect(),
        y: &y,
    };

    let mut params = match init {
        Some(p) => Vector3::new(p.a * (p.b * y0 + p.c).exp(), p.b, p.d),
        None => default_start(points, y0),
    };
    let initial_rss = problem.rss(&params);
    let mut rss = initial_rss;
    let mut rss_trace = vec![rss];
    let scale = 1.0 + y.iter().map(|v| v * v).sum::<f64>();
    let floor = 1e-28 * scale;

    let mut lambda = LAMBDA_INIT;
    let mut converged = rss <= floor;
    let mut iterations = 0;
    'outer: while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = problem.normal_equations(&params);
        let diag_max = jtj.diagonal().max();
        loop {
            let mut damped = jtj;
            for i in 0..3 {
                damped[(i, i)] += lambda * jtj[(i, i)].max(1e-12 * diag_max.max(1e-300));
            }
            let step = damped.cholesky().map(|c| c.solve(&jtr));
            if let Some(step) = step.filter(|s| s.iter().all(|v| v.is_finite())) {
                let candidate = params + step;
                let candidate_rss = problem.rss(&candidate);
                if candidate_rss.is_finite() && candidate_rss < rss {
                    let change = (rss - candidate_rss) / rss.max(f64::MIN_POSITIVE);
                    params = candidate;
                    rss = candidate_rss;
                    rss_trace.push(rss);
                    lambda = (lambda / 10.0).max(1e-15);
                    if change < RELATIVE_TOLERANCE || rss <= floor {
                        converged = true;
                    }
                    continue 'outer;
                }
            }
            lambda *= 10.0;
            if lambda > LAMBDA_MAX {
                // no descent direction left; accept only if at the rounding floor
                converged = rss <= 1e-20 * scale;
                break 'outer;
            }
        }
    }

    let (k, b, d) = (params[0], params[1], params[2]);
    let max_term = problem
        .t
        .iter()
        .map(|&t| (k * (b * t).exp()).abs())
        .fold(0.0f64, f64::max);
    let degenerate = max_term < 1e-9;
    let fitted = ExpParams {
        a: if degenerate { 0.0 } else { k },
        b,
        c: -b * y0,
        d,
    };
    let in_unit_range = points
        .iter()
        .all(|&(year, _)| (0.0..=1.0).contains(&fitted.predict(year)));
    Ok(ExpFit {
        params: fitted,
        rss,
        initial_rss,
        iterations,
        converged,
        degenerate,
        in_unit_range,
        rss_trace,
    })
}

fn default_start(points: &[(f64, f64)], y0: f64) -> Vector3<f64> {
    let (min, max) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.1), hi.max(p.1))
        });
    let mut sorted: Vec<(f64, f64)> = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let third = (sorted.len() / 3).max(1);
    let head = sorted[..third].iter().map(|p| p.1).sum::<f64>() / third as f64;
    let tail = sorted[sorted.len() - third..]
        .iter()
        .map(|p| p.1)
        .sum::<f64>()
        / third as f64;
    let (b, anchor_year) = if tail >= head {
        (0.01, sorted[sorted.len() - 1].0)
    } else {
        (-0.01, sorted[0].0)
    };
    let k = (max - min) * (-b * (anchor_year - y0)).exp();
    Vector3::new(k, b, min)
}

/// Year at which the fitted curve reaches `target`:
/// `(ln((target − d) / a) − c) / b`.
pub fn solve_parity_year(params: &ExpParams, target: f64) -> Result<f64, StatsError> {
    if params.b == 0.0 || !params.b.is_finite() {
        return Err(StatsError::Unreachable {
            target,
            reason: "growth rate b is zero, the curve is flat".into(),
        });
    }
    let ratio = (target - params.d) / params.a;
    if !ratio.is_finite() || ratio <= 0.0 {
        return Err(StatsError::Unreachable {
            target,
            reason: format!(
                "(target − d) / a = ({target} − {}) / {} must be positive",
                params.d, params.a
            ),
        });
    }
    Ok((ratio.ln() - params.c) / params.b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(p: ExpParams) -> Vec<(f64, f64)> {
        (1800..=2000)
            .step_by(10)
            .map(|y| (y as f64, p.predict(y as f64)))
            .collect()
    }

    #[test]
    fn recovers_noiseless_curve() {
        let truth = ExpParams {
            a: 0.5,
            b: 0.02,
            c: -40.0,
            d: 0.05,
        };
        let fit = fit_exponential(&synthetic(truth), None).unwrap();
        assert!(fit.converged);
        assert!(fit.rss < 1e-12, "rss {}", fit.rss);
        assert!((fit.params.b - 0.02).abs() < 1e-6);
        assert!((fit.params.d - 0.05).abs() < 1e-6);
        let product = fit.params.a * fit.params.c.exp();
        assert!((product / (0.5 * (-40f64).exp()) - 1.0).abs() < 1e-4);
        for y in 1800..=2000 {
            assert!((fit.predict(y as f64) - truth.predict(y as f64)).abs() < 1e-6);
        }
    }

    #[test]
    fn rss_never_increases() {
        let truth = ExpParams {
            a: 0.3,
            b: 0.015,
            c: -29.0,
            d: 0.1,
        };
        let pts: Vec<(f64, f64)> = synthetic(truth)
            .into_iter()
            .enumerate()
            .map(|(i, (x, y))| {
                (
                    x,
                    (y + if i % 2 == 0 { 0.004 } else { -0.004 }).clamp(0.0, 1.0),
                )
            })
            .collect();
        let fit = fit_exponential(&pts, None).unwrap();
        assert!(fit.rss_trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(fit.rss <= fit.initial_rss);
    }

    #[test]
    fn decreasing_trend_is_fitted() {
        let truth = ExpParams {
            a: 0.4,
            b: -0.03,
            c: 54.0,
            d: 0.2,
        };
        let fit = fit_exponential(&synthetic(truth), None).unwrap();
        for y in (1800..=2000).step_by(10) {
            assert!((fit.predict(y as f64) - truth.predict(y as f64)).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_series_is_degenerate() {
        let pts: Vec<(f64, f64)> = (0..8).map(|i| (1900.0 + 10.0 * i as f64, 0.25)).collect();
        let fit = fit_exponential(&pts, None).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.params.a, 0.0);
        assert!((fit.params.d - 0.25).abs() < 1e-12);
    }

    #[test]
    fn input_validation() {
        assert!(matches!(
            fit_exponential(&[(1.0, 0.1); 4], None),
            Err(StatsError::TooFewObservations { .. })
        ));
        let mut pts = vec![(1.0, 0.1), (2.0, 0.2), (3.0, 0.3), (4.0, 0.4), (5.0, 1.5)];
        assert!(matches!(
            fit_exponential(&pts, None),
            Err(StatsError::RatioOutOfRange { index: 4, .. })
        ));
        pts[4].1 = f64::NAN;
        assert!(matches!(
            fit_exponential(&pts, None),
            Err(StatsError::NonFinite(4))
        ));
    }

    #[test]
    fn parity_closed_form() {
        let p = ExpParams {
            a: 0.4,
            b: 0.02,
            c: -40.0,
            d: 0.1,
        };
        let year = solve_parity_year(&p, 0.5).unwrap();
        assert!((year - 2000.0).abs() < 1e-9);
        assert!(solve_parity_year(&p, 0.05).is_err());
        let flat = ExpParams { b: 0.0, ..p };
        assert!(solve_parity_year(&flat, 0.5).is_err());
    }
}
