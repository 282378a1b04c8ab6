//! Chi-square geometry of contingency tables (correspondence analysis).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{classical_mds, Configuration, SquaredDistanceMatrix, Weights};

/// Nonnegative counts `n_ig` with labels. Every margin is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    counts: DMatrix<f64>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl ContingencyTable {
    pub fn new(counts: DMatrix<f64>, row_labels: Vec<String>, col_labels: Vec<String>) -> Result<Self> {
        let (n, m) = counts.shape();
        if n == 0 || m == 0 {
            return Err(Error::InvalidTable("empty table".into()));
        }
        if row_labels.len() != n || col_labels.len() != m {
            return Err(Error::InvalidTable(format!(
                "{} row labels and {} column labels for a {n}x{m} table",
                row_labels.len(),
                col_labels.len()
            )));
        }
        for i in 0..n {
            for g in 0..m {
                let v = counts[(i, g)];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidTable(format!(
                        "cell ({}, {}) = {v} is not a nonnegative number",
                        i + 1,
                        g + 1
                    )));
                }
            }
        }
        for (i, s) in counts.row_iter().map(|r| r.sum()).enumerate() {
            if s <= 0.0 {
                return Err(Error::InvalidTable(format!("row `{}` has zero margin", row_labels[i])));
            }
        }
        for (g, s) in counts.column_iter().map(|c| c.sum()).enumerate() {
            if s <= 0.0 {
                return Err(Error::InvalidTable(format!("column `{}` has zero margin", col_labels[g])));
            }
        }
        Ok(ContingencyTable {
            counts,
            row_labels,
            col_labels,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidTable("ragged rows".into()));
        }
        Self::new(
            DMatrix::from_fn(n, m, |i, g| rows[i][g]),
            (1..=n).map(|i| format!("r{i}")).collect(),
            (1..=m).map(|g| format!("c{g}")).collect(),
        )
    }

    pub fn counts(&self) -> &DMatrix<f64> {
        &self.counts
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn nrows(&self) -> usize {
        self.counts.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.counts.ncols()
    }

    pub fn total(&self) -> f64 {
        self.counts.sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.counts.row_iter().map(|r| r.sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        self.counts.column_iter().map(|c| c.sum()).collect()
    }
}

/// `fᵢ = n_i• / n_••`
pub fn row_weights(table: &ContingencyTable) -> Result<Weights> {
    Weights::normalized(table.row_sums())
}

/// `D_ij = Σ_g ρ_g (n_ig n_•• / (n_i• n_•g) − n_jg n_•• / (n_j• n_•g))²`
/// with `ρ_g = n_•g / n_••`.
pub fn chi_square_distances(table: &ContingencyTable) -> Result<SquaredDistanceMatrix> {
    let (n, m) = table.counts.shape();
    let total = table.total();
    let rows = table.row_sums();
    let cols = table.col_sums();
    let rho: Vec<f64> = cols.iter().map(|c| c / total).collect();
    // quotient of row profile by column mass
    let q = DMatrix::from_fn(n, m, |i, g| table.counts[(i, g)] * total / (rows[i] * cols[g]));
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (0..m).map(|g| rho[g] * (q[(i, g)] - q[(j, g)]).powi(2)).sum()
        }
    });
    let d = (&d + d.transpose()) * 0.5;
    SquaredDistanceMatrix::new(d, table.row_labels.clone())
}

/// Inertia of the chi-square cloud under the row weights; equals Pearson's
/// χ² divided by the total count.
pub fn ca_inertia(table: &ContingencyTable) -> Result<f64> {
    let d = chi_square_distances(table)?;
    crate::geometry::inertia(&d, &row_weights(table)?)
}

/// Factorial coordinates: weighted MDS of the chi-square distances under the
/// row weights.
pub fn factorial_coordinates(table: &ContingencyTable, dim: usize) -> Result<Configuration> {
    let max_dim = table.nrows().min(table.ncols()).saturating_sub(1);
    if dim == 0 || dim > max_dim {
        return Err(Error::InvalidParameter(format!(
            "factorial dimension must lie in 1..={max_dim}, got {dim}"
        )));
    }
    let d = chi_square_distances(table)?;
    classical_mds(&d, &row_weights(table)?, dim)
}

/// Centroid projections `Σᵢ αᵢ x_iβ` on the first `dims` axes.
pub fn project_trajectory(alpha: &[f64], config: &Configuration, dims: usize) -> Result<Vec<f64>> {
    if dims > config.dim() {
        return Err(Error::SizeMismatch {
            expected: config.dim(),
            got: dims,
        });
    }
    let mut p = config.weighted_mean(alpha)?;
    p.truncate(dims);
    Ok(p)
}

/// Synthetic table with one dominant row and `rows − 1` noisy rows. All
/// rows scatter around a common base profile; the dominant row carries its
/// own fixed tilt so that it sits away from the origin of the CA map. `dominance` is the ratio of the
/// dominant row total to the sum of all other row totals.
///
/// This is a synthetic stand-in for real publication-count data.
pub fn synthetic_dominant_table(
    rows: usize,
    cols: usize,
    dominant: usize,
    dominance: f64,
    seed: u64,
) -> Result<ContingencyTable> {
    if rows < 2 || cols < 2 || dominant >= rows || dominance.is_nan() || dominance <= 0.0 {
        return Err(Error::InvalidParameter(
            "synthetic table needs rows, cols >= 2, a valid dominant row and dominance > 0".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<f64> = (0..cols).map(|_| 0.5 + rng.gen::<f64>()).collect();
    let base_sum: f64 = base.iter().sum();
    let mass: Vec<f64> = base.iter().map(|b| b / base_sum).collect();
    let tilt: Vec<f64> = mass
        .iter()
        .map(|m| m * (2.0 * rng.gen::<f64>() - 1.0).exp())
        .collect();
    let tilt_sum: f64 = tilt.iter().sum();

    let mut counts = DMatrix::zeros(rows, cols);
    let mut others = 0.0;
    for i in (0..rows).filter(|&i| i != dominant) {
        let size = 50.0 + 450.0 * rng.gen::<f64>();
        let raw: Vec<f64> = mass
            .iter()
            .map(|m| m * (2.0 * (2.0 * rng.gen::<f64>() - 1.0)).exp())
            .collect();
        let s: f64 = raw.iter().sum();
        for g in 0..cols {
            counts[(i, g)] = (size * raw[g] / s).round();
        }
        others += counts.row(i).sum();
    }
    let dom_total = dominance * others;
    for g in 0..cols {
        counts[(dominant, g)] = (dom_total * tilt[g] / tilt_sum).round().max(1.0);
    }
    // rounding can empty a small row
    for i in 0..rows {
        if counts.row(i).sum() == 0.0 {
            counts[(i, 0)] = 1.0;
        }
    }
    let row_labels = (0..rows)
        .map(|i| {
            if i == dominant {
                "dominant".to_string()
            } else {
                format!("row{:02}", i + 1)
            }
        })
        .collect();
    let col_labels = (1..=cols).map(|g| format!("col{g:02}")).collect();
    ContingencyTable::new(counts, row_labels, col_labels)
}
