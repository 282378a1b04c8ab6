//! Robust multivariate location estimation from squared Euclidean distances.
//!
//! A location estimate is a centroid `a = Σ αᵢ xᵢ` minimizing the transformed
//! inertia `Γ(a) = Σ fᵢ φ(D_ia)`, where `φ` is a Schoenberg transformation
//! (a map sending squared Euclidean distances to squared Euclidean
//! distances). Only the distance matrix `D` and the weights `f` are consumed;
//! coordinates are optional and used for reporting projections.
//!
//! The crate is organised as:
//!
//! - [`transforms`]: transformation families, derivatives, ψ and χ functions.
//! - [`geometry`]: weighted distance geometry, Huygens identities, MDS, ties.
//! - [`estimator`]: the fixed-point solver, regimes and stability checks.
//! - [`diagnostics`]: entropy, strain and parameter sweeps.
//! - [`ca`]: chi-square geometry of contingency tables.
//! - [`io`], [`data`], [`cli`]: file formats, embedded datasets and the CLI.
//!
//! ```
//! use schoenloc::{data, estimator, transforms::TransformSpec};
//!
//! let ds = data::copper().aggregated(0.0).unwrap();
//! let spec = TransformSpec::Identity;
//! let res = estimator::estimate(&ds.distances, &ds.weights, &spec, &Default::default()).unwrap();
//! let centroid = ds.project(&res.alpha).unwrap()[0];
//! assert!((centroid - 4.2804).abs() < 1e-3);
//! ```

pub mod ca;
pub mod cli;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod io;
pub mod transforms;

pub use error::{Error, Result};
