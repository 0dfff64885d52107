//! Pearson and Spearman correlation with asymptotic p-values.

use crate::special::student_t_two_sided;
use crate::StatsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub coefficient: f64,
    pub n: usize,
    /// Two-sided, from the t distribution with `n - 2` degrees of freedom.
    pub p_value: f64,
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewObservations {
            needed: 3,
            got: x.len(),
        });
    }
    if let Some(i) = x.iter().chain(y).position(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(i % x.len()));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    check_pair(x, y)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(StatsError::ZeroVariance { which: "x" });
    }
    if syy == 0.0 {
        return Err(StatsError::ZeroVariance { which: "y" });
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(CorrelationResult {
        coefficient: r,
        n: x.len(),
        p_value: correlation_p_value(r, x.len()),
    })
}

fn correlation_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let denom = 1.0 - r * r;
    if denom <= 0.0 {
        return 0.0;
    }
    student_t_two_sided(r * (df / denom).sqrt(), df)
}

/// 1-based ranks with tied values sharing the average of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end (0-based) share rank mean((start+1)..=end)
        let rank = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    check_pair(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pearson_perfect_lines() {
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert_eq!(r.coefficient, 1.0);
        assert_eq!(r.p_value, 0.0);
        let r = pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(r.coefficient, -1.0);
    }

    #[test]
    fn pearson_rejects_constant_and_short_input() {
        assert_eq!(
            pearson(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]),
            Err(StatsError::ZeroVariance { which: "y" })
        );
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::TooFewObservations { .. })
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(StatsError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn spearman_small_cases() {
        let r = spearman(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((r.coefficient - 0.5).abs() < 1e-15);
        let r = spearman(&[0.1, 5.0, 9.0, 100.0], &[-3.0, -2.0, 7.0, 8.0]).unwrap();
        assert_eq!(r.coefficient, 1.0);
    }

    #[test]
    fn average_ranks_share_ties() {
        assert_eq!(
            average_ranks(&[10.0, 20.0, 10.0, 5.0]),
            vec![2.5, 4.0, 2.5, 1.0]
        );
    }

    #[test]
    fn p_value_shrinks_as_correlation_grows() {
        let x: Vec<f64> = (0..12).map(f64::from).collect();
        let weak: Vec<f64> = x.iter().map(|v| (v * 7.0) % 5.0 + v * 0.1).collect();
        let strong: Vec<f64> = x.iter().map(|v| (v * 7.0) % 5.0 * 0.1 + v).collect();
        let pw = pearson(&x, &weak).unwrap();
        let ps = pearson(&x, &strong).unwrap();
        assert!(ps.coefficient.abs() > pw.coefficient.abs());
        assert!(ps.p_value < pw.p_value);
    }

    proptest! {
        #[test]
        fn spearman_is_rank_invariant(
            pairs in prop::collection::vec((-100i32..100, -100i32..100), 4..40)
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
            let y: Vec<f64> = pairs.iter().map(|p| f64::from(p.1)).collect();
            prop_assume!(x.iter().any(|&v| v != x[0]) && y.iter().any(|&v| v != y[0]));
            let base = spearman(&x, &y).unwrap().coefficient;
            let tx: Vec<f64> = x.iter().map(|v| (v / 50.0).exp() + 3.0).collect();
            let ty: Vec<f64> = y.iter().map(|v| v * v * v - 2.0).collect();
            let moved = spearman(&tx, &ty).unwrap().coefficient;
            prop_assert!((base - moved).abs() < 1e-12);
        }

        #[test]
        fn pearson_is_affine_invariant(
            pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..50),
            scale in 0.01f64..100.0,
            shift in -1e3f64..1e3,
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            if let Ok(base) = pearson(&x, &y) {
                let tx: Vec<f64> = x.iter().map(|v| v * scale + shift).collect();
                let moved = pearson(&tx, &y).unwrap();
                prop_assert!((base.coefficient - moved.coefficient).abs() < 1e-12);
                prop_assert!(base.coefficient.abs() <= 1.0);
                prop_assert!((0.0..=1.0).contains(&base.p_value));
            }
        }
    }
}
