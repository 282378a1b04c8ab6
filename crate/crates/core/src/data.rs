//! Embedded datasets and the `Dataset` bundle consumed by the CLI.

use crate::ca::{self, ContingencyTable};
use crate::error::{Error, Result};
use crate::geometry::{
    aggregate_configuration_ties, aggregate_ties, sq_euclidean, Configuration, SquaredDistanceMatrix,
    Weights,
};
use nalgebra::DMatrix;

/// Copper concentrations in wholemeal flour (`chem` in R's MASS package,
/// Analytical Methods Committee 1989), sorted, 24 values.
pub const COPPER: [f64; 24] = [
    2.20, 2.20, 2.40, 2.40, 2.50, 2.70, 2.80, 2.90, 3.03, 3.03, 3.10, 3.37, 3.40, 3.40, 3.40, 3.50,
    3.60, 3.70, 3.70, 3.70, 3.70, 3.77, 5.28, 28.95,
];

/// CSV text of the copper data as served for `@copper`.
pub fn copper_csv() -> String {
    let mut s = String::from("label,copper\n");
    for (i, v) in COPPER.iter().enumerate() {
        s.push_str(&format!("{},{v:.2}\n", i + 1));
    }
    s
}

/// Where the distances came from; decides how ties are merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Points,
    Distances,
    Table,
}

/// Distances, weights and (optionally) coordinates for projections.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub distances: SquaredDistanceMatrix,
    pub weights: Weights,
    pub config: Option<Configuration>,
    pub kind: SourceKind,
    /// Original observation indices behind each row (singletons until ties
    /// are aggregated).
    pub groups: Vec<Vec<usize>>,
}

impl Dataset {
    pub fn from_points(config: Configuration, weights: Weights) -> Result<Self> {
        if config.len() != weights.len() {
            return Err(Error::SizeMismatch {
                expected: config.len(),
                got: weights.len(),
            });
        }
        let n = config.len();
        Ok(Dataset {
            distances: sq_euclidean(&config),
            weights,
            config: Some(config),
            kind: SourceKind::Points,
            groups: (0..n).map(|i| vec![i]).collect(),
        })
    }

    pub fn from_distances(distances: SquaredDistanceMatrix, weights: Weights) -> Result<Self> {
        if distances.len() != weights.len() {
            return Err(Error::SizeMismatch {
                expected: distances.len(),
                got: weights.len(),
            });
        }
        let n = distances.len();
        Ok(Dataset {
            distances,
            weights,
            config: None,
            kind: SourceKind::Distances,
            groups: (0..n).map(|i| vec![i]).collect(),
        })
    }

    /// Chi-square distances and row weights, with factorial coordinates on
    /// up to `dim` axes for projections.
    pub fn from_table(table: &ContingencyTable, dim: usize) -> Result<Self> {
        let distances = ca::chi_square_distances(table)?;
        let weights = ca::row_weights(table)?;
        let max_dim = table.nrows().min(table.ncols()).saturating_sub(1);
        let config = if max_dim >= 1 {
            Some(ca::factorial_coordinates(table, dim.clamp(1, max_dim))?)
        } else {
            None
        };
        let n = distances.len();
        Ok(Dataset {
            distances,
            weights,
            config,
            kind: SourceKind::Table,
            groups: (0..n).map(|i| vec![i]).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    /// Merges tied observations (see [`aggregate_ties`]).
    pub fn aggregated(&self, eps_tie: f64) -> Result<Self> {
        let (agg, config) = match (self.kind, &self.config) {
            (SourceKind::Points, Some(c)) => {
                let (agg, reduced) = aggregate_configuration_ties(c, &self.weights, eps_tie)?;
                (agg, Some(reduced))
            }
            (_, config) => {
                let agg = aggregate_ties(&self.distances, &self.weights, eps_tie)?;
                let reduced = match config {
                    Some(c) => {
                        let coords = DMatrix::from_fn(agg.groups.len(), c.dim(), |g, k| {
                            c.coords[(agg.groups[g][0], k)]
                        });
                        let mut r = Configuration::new(coords, agg.distances.labels().to_vec())?;
                        r.eigenvalues = c.eigenvalues.clone();
                        r.total_inertia = c.total_inertia;
                        Some(r)
                    }
                    None => None,
                };
                (agg, reduced)
            }
        };
        let groups = agg
            .groups
            .iter()
            .map(|g| g.iter().flat_map(|&k| self.groups[k].iter().copied()).collect())
            .collect();
        Ok(Dataset {
            distances: agg.distances,
            weights: agg.weights,
            config,
            kind: self.kind,
            groups,
        })
    }

    /// Centroid coordinates `Σᵢ αᵢ xᵢ`, when coordinates are available.
    pub fn project(&self, alpha: &crate::geometry::Profile) -> Result<Vec<f64>> {
        match &self.config {
            Some(c) => c.weighted_mean(alpha.as_slice()),
            None => Err(Error::NotApplicable("dataset carries no coordinates".into())),
        }
    }
}

/// The raw (unaggregated) copper sample with uniform weights.
pub fn copper() -> Dataset {
    let rows: Vec<Vec<f64>> = COPPER.iter().map(|v| vec![*v]).collect();
    let mut config = Configuration::from_rows(&rows).expect("static data");
    config.labels = COPPER.iter().map(|v| format!("{v:.2}")).collect();
    Dataset::from_points(config, Weights::uniform(COPPER.len())).expect("static data")
}

/// Synthetic 29×22 table with a dominant first row (seed 0).
pub fn synthetic_ca_table() -> ContingencyTable {
    ca::synthetic_dominant_table(29, 22, 0, 1.0, 0).expect("static parameters")
}
