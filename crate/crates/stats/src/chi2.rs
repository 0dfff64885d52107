//! Pearson chi-squared test of independence on an r×c contingency table.

use crate::special::chi_square_sf;
use crate::StatsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Expected counts come from the row and column margins; `df = (r-1)(c-1)`.
pub fn chi_squared(table: &[Vec<u64>]) -> Result<ChiSquareResult, StatsError> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 {
        return Err(StatsError::TooFewObservations {
            needed: 2,
            got: rows.min(cols),
        });
    }
    if table.iter().any(|row| row.len() != cols) {
        return Err(StatsError::RaggedTable);
    }
    let row_sums: Vec<f64> = table
        .iter()
        .map(|row| row.iter().map(|&v| v as f64).sum())
        .collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|row| row[j] as f64).sum())
        .collect();
    if let Some(i) = row_sums.iter().position(|&s| s == 0.0) {
        return Err(StatsError::ZeroMargin {
            axis: "row",
            index: i,
        });
    }
    if let Some(j) = col_sums.iter().position(|&s| s == 0.0) {
        return Err(StatsError::ZeroMargin {
            axis: "column",
            index: j,
        });
    }
    let total: f64 = row_sums.iter().sum();
    let mut statistic = 0.0;
    for (row, &rs) in table.iter().zip(&row_sums) {
        for (&observed, &cs) in row.iter().zip(&col_sums) {
            let expected = rs * cs / total;
            let diff = observed as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    let df = (rows - 1) * (cols - 1);
    Ok(ChiSquareResult {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df as f64),
    })
}
