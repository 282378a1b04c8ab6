#![allow(dead_code)]

use nalgebra::DMatrix;
use proptest::prelude::*;
use schoenloc::geometry::{sq_euclidean, Configuration, SquaredDistanceMatrix, Weights};

/// Squared distances and configuration of points on a line.
pub fn line(xs: &[f64]) -> (SquaredDistanceMatrix, Configuration) {
    let rows: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x]).collect();
    let c = Configuration::from_rows(&rows).unwrap();
    (sq_euclidean(&c), c)
}

/// Sorted distinct copper values with tie counts as weights.
pub fn copper_aggregated() -> (Vec<f64>, Weights) {
    let mut xs: Vec<f64> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    for &v in schoenloc::data::COPPER.iter() {
        match xs.iter().position(|x| *x == v) {
            Some(k) => counts[k] += 1.0,
            None => {
                xs.push(v);
                counts.push(1.0);
            }
        }
    }
    let w = Weights::new(counts.iter().map(|c| c / 24.0).collect()).unwrap();
    (xs, w)
}

/// Γ(a) for 1-D data evaluated directly from the coordinates.
pub fn gamma_1d(xs: &[f64], w: &[f64], phi: impl Fn(f64) -> f64, a: f64) -> f64 {
    xs.iter().zip(w).map(|(x, f)| f * phi((x - a) * (x - a))).sum()
}

/// Pairwise squared distances computed straight from rows.
pub fn pairwise(rows: &DMatrix<f64>) -> DMatrix<f64> {
    let n = rows.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        (0..rows.ncols())
            .map(|k| (rows[(i, k)] - rows[(j, k)]).powi(2))
            .sum()
    })
}

pub fn config_strategy(max_n: usize, max_p: usize) -> impl Strategy<Value = Configuration> {
    (2..=max_n, 1..=max_p).prop_flat_map(|(n, p)| {
        prop::collection::vec(-5.0f64..5.0, n * p).prop_map(move |v| {
            Configuration::new(DMatrix::from_row_slice(n, p, &v), (1..=n).map(|i| i.to_string()).collect())
                .unwrap()
        })
    })
}

pub fn weights_strategy(n: usize) -> impl Strategy<Value = Weights> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|v| Weights::normalized(v).unwrap())
}

pub fn config_and_weights(max_n: usize, max_p: usize) -> impl Strategy<Value = (Configuration, Weights)> {
    config_strategy(max_n, max_p).prop_flat_map(|c| {
        let n = c.len();
        (Just(c), weights_strategy(n))
    })
}

pub fn profile_strategy(n: usize) -> impl Strategy<Value = schoenloc::geometry::Profile> {
    prop::collection::vec(0.0f64..1.0, n).prop_map(|mut v| {
        v[0] += 1e-3;
        schoenloc::geometry::Profile::normalized(v).unwrap()
    })
}

/// Contingency tables with positive margins, up to `max` rows and columns.
pub fn table_strategy(max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2..=max, 2..=max).prop_flat_map(|(n, m)| {
        prop::collection::vec(prop::collection::vec(0u32..20, m), n).prop_map(move |rows| {
            let mut t: Vec<Vec<f64>> = rows
                .into_iter()
                .map(|r| r.into_iter().map(f64::from).collect())
                .collect();
            // one guaranteed count per row and per column keeps margins positive
            for i in 0..n {
                t[i][i % m] += 1.0;
            }
            for j in 0..m {
                t[j % n][j] += 1.0;
            }
            t
        })
    })
}
