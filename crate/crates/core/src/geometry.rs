//! Weighted squared-Euclidean geometry on distance matrices.
//!
//! Everything here works from a squared distance matrix `D` and weights;
//! coordinates are only needed to build `D` or to check identities against
//! their coordinate-based forms.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Relative PSD tolerance: min eigenvalue must be ≥ −1e-8 · max eigenvalue.
pub const PSD_TOLERANCE: f64 = 1e-8;

/// Eigenvalues below this fraction of the largest are treated as zero rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Positive observation weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidWeights("no weights".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidWeights(format!(
                "weights must be finite and > 0, got {v}"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights must sum to 1, got {sum}"
            )));
        }
        Ok(Weights(values))
    }

    /// Rescales positive values to sum to one.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidWeights(format!(
                "weights must be finite and > 0, got {v}"
            )));
        }
        let sum: f64 = values.iter().sum();
        Weights::new(values.into_iter().map(|v| v / sum).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Weights(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.0.iter().map(|f| f * f).sum()
    }
}

/// A probability vector over observations identifying the centroid
/// `a = Σ αᵢ xᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile(Vec<f64>);

impl Profile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidProfile("empty profile".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidProfile(format!(
                "profile entries must be finite and >= 0, got {v}"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidProfile(format!(
                "profile must sum to 1, got {sum}"
            )));
        }
        Ok(Profile(values))
    }

    /// Rescales nonnegative values to sum to one.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        let sum: f64 = values.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "cannot normalise a profile with total {sum}"
            )));
        }
        Profile::new(values.into_iter().map(|v| v / sum).collect())
    }

    pub fn vertex(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Profile(v)
    }

    /// `(1 − s)·eᵢ + s·w`
    pub fn smoothed_vertex(w: &Weights, i: usize, s: f64) -> Self {
        let mut v: Vec<f64> = w.as_slice().iter().map(|f| s * f).collect();
        v[i] += 1.0 - s;
        Profile(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.0.iter().enumerate() {
            if *v > self.0[best] {
                best = i;
            }
        }
        best
    }

    pub fn max_abs_diff(&self, other: &Profile) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl From<&Weights> for Profile {
    fn from(w: &Weights) -> Self {
        Profile(w.0.clone())
    }
}

/// Symmetric, zero-diagonal matrix of squared distances with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredDistanceMatrix {
    d: DMatrix<f64>,
    labels: Vec<String>,
}

impl SquaredDistanceMatrix {
    /// Validates shape, finiteness, nonnegativity, zero diagonal and
    /// symmetry (to 1e-12 relative). The stored matrix is symmetrised.
    pub fn new(d: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let n = d.nrows();
        if d.ncols() != n {
            return Err(Error::InvalidDistances(format!(
                "matrix is {}x{}, not square",
                n,
                d.ncols()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidDistances("empty matrix".into()));
        }
        if labels.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: labels.len(),
            });
        }
        let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            if d[(i, i)] != 0.0 {
                return Err(Error::InvalidDistances(format!(
                    "nonzero diagonal entry at {} ({})",
                    i + 1,
                    d[(i, i)]
                )));
            }
            for j in 0..n {
                let v = d[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidDistances(format!(
                        "entry ({}, {}) = {v} is not a finite nonnegative number",
                        i + 1,
                        j + 1
                    )));
                }
                if (v - d[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidDistances(format!(
                        "not symmetric at ({}, {}): {} vs {}",
                        i + 1,
                        j + 1,
                        v,
                        d[(j, i)]
                    )));
                }
            }
        }
        let d = (&d + d.transpose()) * 0.5;
        Ok(SquaredDistanceMatrix { d, labels })
    }

    pub fn unlabeled(d: DMatrix<f64>) -> Result<Self> {
        let labels = (1..=d.nrows()).map(|i| i.to_string()).collect();
        Self::new(d, labels)
    }

    pub fn len(&self) -> usize {
        self.d.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.d.nrows() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[(i, j)]
    }

    pub fn max_entry(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean_off_diagonal(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        self.d.sum() / (n * (n - 1)) as f64
    }

    pub fn has_ties(&self) -> bool {
        let n = self.len();
        (0..n).any(|i| (i + 1..n).any(|j| self.d[(i, j)] == 0.0))
    }

    /// Componentwise image `φ(D)`.
    pub fn map<F: Fn(f64) -> Result<f64>>(&self, f: F) -> Result<Self> {
        let n = self.len();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = f(self.d[(i, j)])?;
            }
        }
        Self::new(out, self.labels.clone())
    }

    fn check_len(&self, m: usize) -> Result<()> {
        if m == self.len() {
            Ok(())
        } else {
            Err(Error::SizeMismatch {
                expected: self.len(),
                got: m,
            })
        }
    }

    /// Absolute tolerance for round-off in quadratic forms of `D`.
    pub(crate) fn roundoff_tolerance(&self) -> f64 {
        1e-12 * self.max_entry().max(f64::MIN_POSITIVE) * self.len() as f64
    }
}

/// Coordinates `X` (n×p), optionally with the MDS eigenvalues that produced
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub coords: DMatrix<f64>,
    pub eigenvalues: Option<Vec<f64>>,
    /// Sum of the full MDS spectrum (the inertia), when produced by MDS.
    pub total_inertia: Option<f64>,
    pub labels: Vec<String>,
}

impl Configuration {
    pub fn new(coords: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != coords.nrows() {
            return Err(Error::SizeMismatch {
                expected: coords.nrows(),
                got: labels.len(),
            });
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coordinate".into()));
        }
        Ok(Configuration {
            coords,
            eigenvalues: None,
            total_inertia: None,
            labels,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidParameter("ragged coordinate rows".into()));
        }
        let coords = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
        Self::new(coords, (1..=n).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    /// Share of the total inertia carried by each dimension, when produced
    /// by MDS.
    pub fn explained_inertia(&self) -> Option<Vec<f64>> {
        self.eigenvalues.as_ref().map(|ev| {
            let total = self.total_inertia.unwrap_or_else(|| ev.iter().sum());
            ev.iter()
                .map(|l| if total > 0.0 { l / total } else { 0.0 })
                .collect()
        })
    }

    /// Per-dimension average of the coordinates under `alpha`.
    pub fn weighted_mean(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        if alpha.len() != self.len() {
            return Err(Error::SizeMismatch {
                expected: self.len(),
                got: alpha.len(),
            });
        }
        Ok((0..self.dim())
            .map(|b| {
                alpha
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a * self.coords[(i, b)])
                    .sum()
            })
            .collect())
    }
}

/// Exact pairwise squared distances of a configuration.
pub fn sq_euclidean(config: &Configuration) -> SquaredDistanceMatrix {
    let n = config.len();
    let x = &config.coords;
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (0..x.ncols()).map(|k| (x[(i, k)] - x[(j, k)]).powi(2)).sum()
        }
    });
    SquaredDistanceMatrix {
        d,
        labels: config.labels.clone(),
    }
}

/// `Δ(w) = ½ Σᵢⱼ wᵢ wⱼ D_ij`.
pub fn inertia(d: &SquaredDistanceMatrix, w: &Weights) -> Result<f64> {
    d.check_len(w.len())?;
    let f = DVector::from_column_slice(w.as_slice());
    Ok(0.5 * f.dot(&(d.matrix() * &f)))
}

/// `D_ia = Σⱼ αⱼ D_ij − ½ Σⱼₖ αⱼ αₖ D_jk` for every observation `i`.
///
/// Small negative values from round-off are clamped to zero; anything below
/// the tolerance means `D` is not squared Euclidean.
pub fn centroid_sq_distances(d: &SquaredDistanceMatrix, alpha: &[f64]) -> Result<Vec<f64>> {
    d.check_len(alpha.len())?;
    let a = DVector::from_column_slice(alpha);
    let r = d.matrix() * &a;
    let half_quad = 0.5 * a.dot(&r);
    let tol = d.roundoff_tolerance();
    r.iter()
        .enumerate()
        .map(|(i, v)| {
            let di = v - half_quad;
            if di >= 0.0 {
                Ok(di)
            } else if di >= -tol {
                Ok(0.0)
            } else {
                Err(Error::InvalidDistances(format!(
                    "negative centroid distance {di:e} at observation {}: not squared Euclidean",
                    i + 1
                )))
            }
        })
        .collect()
}

/// Squared distance between the centroids of two profiles,
/// `D_ab = −½ Σⱼₖ zⱼ zₖ D_jk` with `z = β − α`.
pub fn profile_sq_distance(d: &SquaredDistanceMatrix, alpha: &[f64], beta: &[f64]) -> Result<f64> {
    d.check_len(alpha.len())?;
    d.check_len(beta.len())?;
    let z = DVector::from_iterator(alpha.len(), beta.iter().zip(alpha).map(|(b, a)| b - a));
    let v = -0.5 * z.dot(&(d.matrix() * &z));
    Ok(if v < 0.0 && v >= -d.roundoff_tolerance() {
        0.0
    } else {
        v
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HuygensReport {
    /// `|½ Σ wᵢwⱼD_ij − Σ wᵢ‖xᵢ − x̄‖²|`
    pub weak_deviation: f64,
    /// `maxᵢ |Σⱼ wⱼD_ij − ‖xᵢ − x̄‖² − Δ(w)|`
    pub strong_deviation: f64,
}

impl HuygensReport {
    pub fn max_deviation(&self) -> f64 {
        self.weak_deviation.max(self.strong_deviation)
    }
}

/// Compares the distance-only forms of the Huygens identities with their
/// coordinate-based counterparts.
pub fn verify_huygens(config: &Configuration, w: &Weights) -> Result<HuygensReport> {
    if config.len() != w.len() {
        return Err(Error::SizeMismatch {
            expected: config.len(),
            got: w.len(),
        });
    }
    let d = sq_euclidean(config);
    let mean = config.weighted_mean(w.as_slice())?;
    let d_if: Vec<f64> = (0..config.len())
        .map(|i| {
            (0..config.dim())
                .map(|k| (config.coords[(i, k)] - mean[k]).powi(2))
                .sum()
        })
        .collect();
    let delta = inertia(&d, w)?;
    let coord_inertia: f64 = w.as_slice().iter().zip(&d_if).map(|(f, x)| f * x).sum();
    let weak_deviation = (delta - coord_inertia).abs();
    let strong_deviation = (0..config.len())
        .map(|i| {
            let lhs: f64 = (0..config.len()).map(|j| w.as_slice()[j] * d.get(i, j)).sum();
            (lhs - d_if[i] - delta).abs()
        })
        .fold(0.0, f64::max);
    Ok(HuygensReport {
        weak_deviation,
        strong_deviation,
    })
}

/// Cosine of the angle at `a` between `xᵢ − a` and `b − a`, from squared
/// side lengths.
pub fn cos_angle(d_ab: f64, d_ia: f64, d_ib: f64) -> Result<f64> {
    if !(d_ab > 0.0 && d_ia > 0.0) {
        return Err(Error::DegenerateAngle(format!(
            "angle undefined with D_ab = {d_ab}, D_ia = {d_ia}"
        )));
    }
    let c = (d_ab + d_ia - d_ib) / (2.0 * (d_ab * d_ia).sqrt());
    if !c.is_finite() || c.abs() > 1.0 + 1e-9 {
        return Err(Error::DegenerateAngle(format!(
            "cosine {c} out of range: sides violate the triangle inequality"
        )));
    }
    Ok(c.clamp(-1.0, 1.0))
}

/// Weighted double-centering `B = −½ (I − 1wᵀ) D (I − w1ᵀ)`, so that
/// `Σᵢ wᵢ B_ij = 0` and `B_ij = (xᵢ − x̄_w)·(xⱼ − x̄_w)` for Euclidean `D`.
pub fn double_center(d: &SquaredDistanceMatrix, w: &Weights) -> Result<DMatrix<f64>> {
    d.check_len(w.len())?;
    let n = d.len();
    let f = DVector::from_column_slice(w.as_slice());
    let r = d.matrix() * &f;
    let s = f.dot(&r);
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (d.get(i, j) - r[i] - r[j] + s));
    Ok((&b + b.transpose()) * 0.5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanCertificate {
    /// Eigenvalues of `diag(√w) B diag(√w)`, sorted decreasing.
    pub eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub passed: bool,
}

impl EuclideanCertificate {
    /// Numerical rank at [`RANK_TOLERANCE`].
    pub fn rank(&self) -> usize {
        let cut = RANK_TOLERANCE * self.max_eigenvalue.max(0.0);
        self.eigenvalues
            .iter()
            .filter(|l| **l > cut && **l > 0.0)
            .count()
    }
}

fn weighted_gram_eigen(d: &SquaredDistanceMatrix, w: &Weights) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let b = double_center(d, w)?;
    let sw: Vec<f64> = w.as_slice().iter().map(|f| f.sqrt()).collect();
    let n = d.len();
    let m = DMatrix::from_fn(n, n, |i, j| sw[i] * b[(i, j)] * sw[j]);
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// PSD test of the weighted double-centered matrix: passes when the smallest
/// eigenvalue is ≥ −1e-8 times the largest.
pub fn certify_euclidean(d: &SquaredDistanceMatrix, w: &Weights) -> Result<EuclideanCertificate> {
    let (eigenvalues, _) = weighted_gram_eigen(d, w)?;
    let max_eigenvalue = eigenvalues.first().copied().unwrap_or(0.0);
    let min_eigenvalue = eigenvalues.last().copied().unwrap_or(0.0);
    let passed = min_eigenvalue >= -PSD_TOLERANCE * max_eigenvalue.max(0.0);
    Ok(EuclideanCertificate {
        eigenvalues,
        min_eigenvalue,
        max_eigenvalue,
        passed,
    })
}

/// Weighted classical MDS.
///
/// Coordinates are `w`-centered and `w`-uncorrelated; the eigenvalue of
/// dimension `β` is `Σᵢ wᵢ x_iβ²`, so eigenvalues sum to `Δ(w)`. Dimensions
/// beyond the numerical rank come out as zero columns.
pub fn classical_mds(d: &SquaredDistanceMatrix, w: &Weights, dim: usize) -> Result<Configuration> {
    let n = d.len();
    if dim == 0 || (n > 1 && dim > n - 1) || (n == 1 && dim > 1) {
        return Err(Error::InvalidParameter(format!(
            "MDS dimension must lie in 1..={}, got {dim}",
            n.saturating_sub(1).max(1)
        )));
    }
    let (values, vectors) = weighted_gram_eigen(d, w)?;
    let max = values.first().copied().unwrap_or(0.0).max(0.0);
    let min = values.last().copied().unwrap_or(0.0);
    if min < -PSD_TOLERANCE * max {
        return Err(Error::NonEuclidean {
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    let cut = RANK_TOLERANCE * max;
    let kept: Vec<f64> = values
        .iter()
        .take(dim)
        .map(|&l| if l > cut { l } else { 0.0 })
        .collect();
    let fw = w.as_slice();
    let mut coords = DMatrix::from_fn(n, dim, |i, b| vectors[(i, b)] * kept[b].sqrt() / fw[i].sqrt());
    // fix the sign so that the largest-magnitude coordinate is positive
    for b in 0..dim {
        let col = coords.column(b);
        let pivot = col.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if pivot < 0.0 {
            coords.column_mut(b).neg_mut();
        }
    }
    let total: f64 = values.iter().filter(|l| **l > cut).sum();
    let mut c = Configuration::new(coords, d.labels().to_vec())?;
    c.eigenvalues = Some(kept);
    c.total_inertia = Some(total);
    Ok(c)
}

/// Result of merging tied observations.
#[derive(Debug, Clone, PartialEq)]
pub struct TieAggregation {
    pub distances: SquaredDistanceMatrix,
    pub weights: Weights,
    /// Original indices merged into each reduced observation.
    pub groups: Vec<Vec<usize>>,
}

impl TieAggregation {
    pub fn is_identity(&self) -> bool {
        self.groups.iter().all(|g| g.len() == 1)
    }
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut k = i;
    while parent[k] != r {
        let next = parent[k];
        parent[k] = r;
        k = next;
    }
    r
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}

fn groups_from_parent(parent: &mut [usize]) -> Vec<Vec<usize>> {
    let n = parent.len();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn reduce(d: &SquaredDistanceMatrix, w: &Weights, groups: Vec<Vec<usize>>) -> Result<TieAggregation> {
    let m = groups.len();
    let reps: Vec<usize> = groups.iter().map(|g| g[0]).collect();
    let dm = DMatrix::from_fn(m, m, |a, b| if a == b { 0.0 } else { d.get(reps[a], reps[b]) });
    let labels = groups
        .iter()
        .map(|g| {
            g.iter()
                .map(|&i| d.labels()[i].as_str())
                .collect::<Vec<_>>()
                .join("+")
        })
        .collect();
    // no merge leaves the weights bit-for-bit untouched
    let weights = if m == w.len() {
        w.clone()
    } else {
        Weights::new(
            groups
                .iter()
                .map(|g| g.iter().map(|&i| w.as_slice()[i]).sum())
                .collect(),
        )?
    };
    Ok(TieAggregation {
        distances: SquaredDistanceMatrix::new(dm, labels)?,
        weights,
        groups,
    })
}

/// Merges observations with `D_ij ≤ eps_tie · mean off-diagonal D`
/// (transitively), summing their weights and joining labels with `+`.
pub fn aggregate_ties(d: &SquaredDistanceMatrix, w: &Weights, eps_tie: f64) -> Result<TieAggregation> {
    d.check_len(w.len())?;
    let n = d.len();
    let threshold = eps_tie.max(0.0) * d.mean_off_diagonal();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if d.get(i, j) <= threshold {
                union(&mut parent, i, j);
            }
        }
    }
    reduce(d, w, groups_from_parent(&mut parent))
}

/// Tie aggregation on coordinates: bitwise-identical rows are merged first,
/// then the distance threshold of [`aggregate_ties`] applies. Returns the
/// reduced configuration (first member of each group) alongside.
pub fn aggregate_configuration_ties(
    config: &Configuration,
    w: &Weights,
    eps_tie: f64,
) -> Result<(TieAggregation, Configuration)> {
    if config.len() != w.len() {
        return Err(Error::SizeMismatch {
            expected: config.len(),
            got: w.len(),
        });
    }
    let n = config.len();
    let d = sq_euclidean(config);
    let threshold = eps_tie.max(0.0) * d.mean_off_diagonal();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            let same_bits = (0..config.dim())
                .all(|k| config.coords[(i, k)].to_bits() == config.coords[(j, k)].to_bits());
            if same_bits || d.get(i, j) <= threshold {
                union(&mut parent, i, j);
            }
        }
    }
    let agg = reduce(&d, w, groups_from_parent(&mut parent))?;
    let coords = DMatrix::from_fn(agg.groups.len(), config.dim(), |g, k| {
        config.coords[(agg.groups[g][0], k)]
    });
    let reduced = Configuration::new(coords, agg.distances.labels().to_vec())?;
    Ok((agg, reduced))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line(xs: &[f64]) -> Configuration {
        Configuration::from_rows(&xs.iter().map(|x| vec![*x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn sq_euclidean_examples() {
        let d = sq_euclidean(&line(&[0.0, 1.0, 2.0]));
        assert_eq!(
            d.matrix(),
            &DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 4.0, 1.0, 0.0, 1.0, 4.0, 1.0, 0.0])
        );
        assert_eq!(sq_euclidean(&line(&[5.0])).matrix(), &DMatrix::zeros(1, 1));
        let c = Configuration::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(sq_euclidean(&c).get(0, 1), 25.0);
    }

    #[test]
    fn inertia_examples() {
        let d = sq_euclidean(&line(&[0.0, 1.0, 2.0]));
        // ½ · (1/9) · (2 + 8 + 2)
        assert_relative_eq!(inertia(&d, &Weights::uniform(3)).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(inertia(&sq_euclidean(&line(&[1.0])), &Weights::uniform(1)).unwrap(), 0.0);
        let d = sq_euclidean(&line(&[0.0, 3.0]));
        assert_relative_eq!(inertia(&d, &Weights::uniform(2)).unwrap(), 9.0 / 4.0);
        assert!(inertia(&d, &Weights::uniform(3)).is_err());
    }

    #[test]
    fn centroid_distances_examples() {
        let d = sq_euclidean(&line(&[0.0, 1.0, 2.0]));
        let v = centroid_sq_distances(&d, Profile::vertex(3, 2).as_slice()).unwrap();
        assert_eq!(v, vec![4.0, 1.0, 0.0]);
        let v = centroid_sq_distances(&d, &[1.0 / 3.0; 3]).unwrap();
        for (got, want) in v.iter().zip([1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        let w = Weights::new(vec![0.5, 0.25, 0.25]).unwrap();
        let v = centroid_sq_distances(&d, w.as_slice()).unwrap();
        let lhs: f64 = v.iter().zip(w.as_slice()).map(|(a, b)| a * b).sum();
        assert_relative_eq!(lhs, inertia(&d, &w).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn non_euclidean_detected_by_centroid_distances() {
        // violates the triangle inequality badly
        let d = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 100.0, 1.0, 0.0, 1.0, 100.0, 1.0, 0.0]);
        let d = SquaredDistanceMatrix::unlabeled(d).unwrap();
        assert!(centroid_sq_distances(&d, &[0.0, 1.0, 0.0]).is_ok());
        let err = centroid_sq_distances(&d, &[0.5, 0.0, 0.5]).unwrap_err();
        assert!(matches!(err, Error::InvalidDistances(_)));
        assert!(!certify_euclidean(&d, &Weights::uniform(3)).unwrap().passed);
        assert!(matches!(
            classical_mds(&d, &Weights::uniform(3), 1),
            Err(Error::NonEuclidean { .. })
        ));
    }

    #[test]
    fn matrix_validation() {
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(SquaredDistanceMatrix::unlabeled(asym).is_err());
        let diag = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        assert!(SquaredDistanceMatrix::unlabeled(diag).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        assert!(SquaredDistanceMatrix::unlabeled(neg).is_err());
        assert!(Weights::new(vec![0.5, 0.6]).is_err());
        assert!(Weights::normalized(vec![1.0, 0.0]).is_err());
        assert!(Profile::new(vec![0.5, 0.6]).is_err());
        assert!(Profile::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn cos_angle_examples() {
        assert_eq!(cos_angle(1.0, 1.0, 4.0).unwrap(), -1.0);
        assert_eq!(cos_angle(1.0, 1.0, 2.0).unwrap(), 0.0);
        assert_eq!(cos_angle(1.0, 1.0, 0.0).unwrap(), 1.0);
        assert!(cos_angle(0.0, 1.0, 1.0).is_err());
        assert!(cos_angle(1.0, 1.0, 9.0).is_err());
    }

    #[test]
    fn double_center_examples() {
        let d = sq_euclidean(&line(&[-1.0, 1.0]));
        let b = double_center(&d, &Weights::uniform(2)).unwrap();
        assert_eq!(b, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        let b = double_center(&sq_euclidean(&line(&[3.0])), &Weights::uniform(1)).unwrap();
        assert_eq!(b, DMatrix::zeros(1, 1));
        let w = Weights::new(vec![0.2, 0.3, 0.5]).unwrap();
        let d = sq_euclidean(&line(&[0.0, 1.0, 5.0]));
        let b = double_center(&d, &w).unwrap();
        for j in 0..3 {
            let s: f64 = (0..3).map(|i| w.as_slice()[i] * b[(i, j)]).sum();
            assert!(s.abs() < 1e-14);
        }
    }

    #[test]
    fn mds_on_a_line() {
        // eigen oracle: B = [[1,0,-1],[0,0,0],[-1,0,1]], top eigenvector (1,0,-1)/√2
        let d = sq_euclidean(&line(&[0.0, 1.0, 2.0]));
        let c = classical_mds(&d, &Weights::uniform(3), 1).unwrap();
        let x: Vec<f64> = c.coords.column(0).iter().copied().collect();
        let sign = x[2].signum();
        for (got, want) in x.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got * sign - want).abs() < 1e-12, "{x:?}");
        }
        let e = c.explained_inertia().unwrap();
        assert!((e.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(classical_mds(&d, &Weights::uniform(3), 3).is_err());
        assert!(classical_mds(&d, &Weights::uniform(3), 0).is_err());
    }

    #[test]
    fn ties_examples() {
        let c = line(&[1.0, 1.0, 2.0, 3.0, 3.0, 3.0]);
        let w = Weights::uniform(6);
        let (agg, reduced) = aggregate_configuration_ties(&c, &w, 0.0).unwrap();
        assert_eq!(agg.groups, vec![vec![0, 1], vec![2], vec![3, 4, 5]]);
        assert_relative_eq!(agg.weights.as_slice()[2], 0.5, epsilon = 1e-15);
        assert_eq!(reduced.len(), 3);
        assert_eq!(agg.distances.labels()[0], "1+2");
        assert!(!agg.distances.has_ties());

        let d = sq_euclidean(&line(&[0.0, 1.0, 2.0]));
        let agg = aggregate_ties(&d, &Weights::uniform(3), 1e-12).unwrap();
        assert!(agg.is_identity());

        let same = line(&[4.0, 4.0, 4.0]);
        let (agg, _) = aggregate_configuration_ties(&same, &Weights::uniform(3), 1e-12).unwrap();
        assert_eq!(agg.groups.len(), 1);
        assert_eq!(agg.weights.as_slice(), &[1.0]);
    }
}
