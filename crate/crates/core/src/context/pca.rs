use serde::{Deserialize, Serialize};

use super::eigen::eigen_sym;
use super::ContextError;
use crate::minilang::Stmt;

/// Eigenvalues at or below this (relative to the largest) count as zero
/// variance and never contribute loadings.
const RANK_TOL: f64 = 1e-10;

/// Contributions are compared after rounding to this many units so that
/// numerically equal loadings tie and fall back to index order.
pub const CONTRIBUTION_QUANTUM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticalContext {
    /// Selected statements, by descending contribution then ascending index.
    pub stm_pca: Vec<Stmt>,
    /// Columns of X at `stm_pca`, row-major M×K''.
    pub matrix: Vec<Vec<u8>>,
    /// `c_i` for every input column, in column order.
    pub contributions: Vec<f64>,
    /// Number of leading eigenvectors actually summed (clamped to the
    /// numerical rank of the covariance).
    pub m: usize,
}

/// Sample covariance of the columns of `x` (rows are observations).
pub fn covariance(x: &[Vec<u8>]) -> Vec<Vec<f64>> {
    let rows = x.len();
    let cols = x.first().map_or(0, Vec::len);
    let mean: Vec<f64> = (0..cols)
        .map(|j| x.iter().map(|r| f64::from(r[j])).sum::<f64>() / rows as f64)
        .collect();
    let denom = (rows.max(2) - 1) as f64;
    let mut cov = vec![vec![0.0; cols]; cols];
    for i in 0..cols {
        for j in i..cols {
            let s: f64 =
                x.iter().map(|r| (f64::from(r[i]) - mean[i]) * (f64::from(r[j]) - mean[j])).sum();
            cov[i][j] = s / denom;
            cov[j][i] = cov[i][j];
        }
    }
    cov
}

/// Orders column indices by quantized contribution (descending), then index.
pub fn contribution_order(contributions: &[f64]) -> Vec<usize> {
    let key = |c: f64| (c / CONTRIBUTION_QUANTUM).round() as i64;
    let mut order: Vec<usize> = (0..contributions.len()).collect();
    order.sort_by(|&a, &b| key(contributions[b]).cmp(&key(contributions[a])).then(a.cmp(&b)));
    order
}

/// Fewest leading eigenvalues (at least one) whose sum reaches `fraction`
/// of the total variance.
pub fn m_for_variance(values: &[f64], fraction: f64) -> usize {
    let total: f64 = values.iter().map(|v| v.max(0.0)).sum();
    if total <= 0.0 {
        return 1;
    }
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        acc += v.max(0.0);
        if acc >= fraction * total - 1e-12 {
            return i + 1;
        }
    }
    values.len().max(1)
}

/// Default variance fraction used to pick `m` when none is given.
pub const VARIANCE_FRACTION: f64 = 0.95;

/// Revised-PCA feature selection: sums absolute loadings of each column over
/// the `m` leading covariance eigenvectors and keeps the `k` largest. With
/// `m = None` the leading eigenvectors covering 95% of the variance are used.
pub fn contribution_select(
    x: &[Vec<u8>],
    stmts: &[Stmt],
    m: Option<usize>,
    k: usize,
) -> Result<StatisticalContext, ContextError> {
    if x.len() < 2 {
        return Err(ContextError::DegenerateData(x.len()));
    }
    let n = stmts.len();
    if let Some(bad) = x.iter().position(|r| r.len() != n) {
        return Err(ContextError::WidthMismatch { row: bad, width: x[bad].len(), expected: n });
    }
    if let Some(m) = m.filter(|&m| m == 0 || m > n) {
        return Err(ContextError::InvalidParameter(format!("m = {m} outside 1..={n}")));
    }
    if k == 0 || k > n {
        return Err(ContextError::InvalidParameter(format!("K'' = {k} outside 1..={n}")));
    }
    let eig = eigen_sym(&covariance(x))?;
    let top = eig.values.first().copied().unwrap_or(0.0);
    let rank = eig.values.iter().filter(|&&l| l > RANK_TOL * top.max(1.0)).count();
    let m = m.unwrap_or_else(|| m_for_variance(&eig.values, VARIANCE_FRACTION));
    let m_used = m.min(rank);

    let mut contributions = vec![0.0; n];
    for v in eig.vectors.iter().take(m_used) {
        for (c, comp) in contributions.iter_mut().zip(v) {
            *c += comp.abs();
        }
    }
    let order = contribution_order(&contributions);
    let chosen: Vec<usize> = order.into_iter().take(k).collect();
    Ok(StatisticalContext {
        stm_pca: chosen.iter().map(|&j| stmts[j]).collect(),
        matrix: x.iter().map(|r| chosen.iter().map(|&j| r[j]).collect()).collect(),
        contributions,
        m: m_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stmts(n: usize) -> Vec<Stmt> {
        (1..=n).map(Stmt).collect()
    }

    #[test]
    fn constant_column_ranks_after_varying_ones() {
        let x = vec![vec![1, 0, 1], vec![1, 1, 0], vec![1, 1, 1], vec![1, 0, 0]];
        let ctx = contribution_select(&x, &stmts(3), Some(2), 3).unwrap();
        assert_eq!(ctx.contributions[0], 0.0);
        assert_eq!(*ctx.stm_pca.last().unwrap(), Stmt(1));
    }

    #[test]
    fn identical_columns_tie_by_index() {
        let x = vec![vec![0, 1, 1], vec![1, 0, 0], vec![1, 1, 1], vec![0, 0, 0]];
        let ctx = contribution_select(&x, &stmts(3), Some(1), 3).unwrap();
        let (c2, c3) = (ctx.contributions[1], ctx.contributions[2]);
        assert!((c2 - c3).abs() < 1e-12);
        let p2 = ctx.stm_pca.iter().position(|s| *s == Stmt(2)).unwrap();
        let p3 = ctx.stm_pca.iter().position(|s| *s == Stmt(3)).unwrap();
        assert!(p2 < p3);
    }

    #[test]
    fn projection_matches_selected_columns() {
        let x = vec![vec![1, 0, 1, 0], vec![0, 1, 1, 0], vec![1, 1, 0, 1]];
        let ctx = contribution_select(&x, &stmts(4), Some(2), 2).unwrap();
        for (r, row) in ctx.matrix.iter().enumerate() {
            for (k, s) in ctx.stm_pca.iter().enumerate() {
                assert_eq!(row[k], x[r][s.col()]);
            }
        }
    }

    #[test]
    fn single_row_is_degenerate() {
        assert!(matches!(
            contribution_select(&[vec![1, 0]], &stmts(2), Some(1), 2),
            Err(ContextError::DegenerateData(1))
        ));
    }

    #[test]
    fn m_is_clamped_to_rank() {
        // rank-1 covariance: only column 2 varies
        let x = vec![vec![1, 0, 1], vec![1, 1, 1]];
        let ctx = contribution_select(&x, &stmts(3), Some(3), 3).unwrap();
        assert_eq!(ctx.m, 1);
        assert_eq!(ctx.stm_pca, vec![Stmt(2), Stmt(1), Stmt(3)]);
    }
}
