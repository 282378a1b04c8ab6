//! Fixed-point solver for the transformed inertia `Γ(a) = Σ fᵢ φ(D_ia)`.
//!
//! Each step reweights the observations by `fᵢ φ′(D_ia)` and recomputes the
//! centroid distances from the profile alone:
//!
//! ```text
//! αᵢ ← fᵢ φ′(D_ia) / Σⱼ fⱼ φ′(D_ja)
//! D_ia = Σⱼ αⱼ D_ij − ½ Σⱼₖ αⱼ αₖ D_jk
//! ```
//!
//! Because every Schoenberg transformation is concave, this is a
//! majorize-minimize step and `Γ` does not increase; a halving safeguard
//! covers round-off and the piecewise families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::geometry::{
    centroid_sq_distances, certify_euclidean, cos_angle, profile_sq_distance, Profile,
    SquaredDistanceMatrix, Weights,
};
use crate::transforms::{Extended, LogSlope, TransformSpec};

/// Relative slack allowed on `Γ` before a step counts as an increase.
const DESCENT_SLACK: f64 = 1e-12;

/// Consecutive steps with `|ΔΓ|/|Γ| < tol_objective` that end the iteration.
pub const STALL_WINDOW: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Weights,
    Observation(usize),
    Custom(Profile),
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Damping {
    /// On an increase of `Γ`, average the candidate with the current profile
    /// up to `max_halvings` times, then give up.
    Halving { max_halvings: u32 },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOptions {
    pub init: Init,
    pub tol_alpha: f64,
    pub tol_objective: f64,
    pub max_iter: usize,
    /// Concentration threshold, relative to the mean off-diagonal distance.
    pub eps_concentrated: f64,
    pub damping: Damping,
    /// Squared extrapolation between plain steps, kept only when it lowers
    /// `Γ` further than the plain step did.
    pub accelerate: bool,
    /// Random profiles probed by the directional stability check.
    pub stability_probes: usize,
    pub seed: u64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            init: Init::Weights,
            tol_alpha: 1e-12,
            tol_objective: 1e-14,
            max_iter: 10_000,
            eps_concentrated: 1e-10,
            damping: Damping::Halving { max_halvings: 30 },
            accelerate: true,
            stability_probes: 32,
            seed: 0,
        }
    }
}

impl EstimateOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_alpha > 0.0 && self.tol_objective > 0.0 && self.eps_concentrated > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be > 0".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_init(&self, init: Init) -> Self {
        EstimateOptions {
            init,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Strictly positive profile satisfying the fixed-point identities.
    Distributed,
    /// Profile concentrated on observation `i0` (and on any observation
    /// tied with it when ties were not aggregated).
    Concentrated(usize),
    /// Distributed solution of the power transformation at `q = 1/2`,
    /// whose minimum may be flat.
    Boundary,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Distributed => "distributed",
            Regime::Concentrated(_) => "concentrated",
            Regime::Boundary => "boundary",
        }
    }

    pub fn is_concentrated(&self) -> bool {
        matches!(self, Regime::Concentrated(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// `Σᵢ fᵢ [φ′(D_ia) + 2φ″(D_ia) D_ia]`
    pub sufficient_lhs: f64,
    /// Smallest `Σᵢ fᵢ [φ′ + 2φ″ D_ia cos²θ]` over the probed directions.
    pub directional_min: f64,
    pub stable: bool,
    /// Number of directions `b` evaluated.
    pub probes: usize,
    /// True when the configuration is one-dimensional, where
    /// `cos²θ = 1` and `directional_min = sufficient_lhs` exactly.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub alpha: Profile,
    /// `D_ia` for every observation.
    pub d_centroid: Vec<f64>,
    pub gamma: f64,
    pub regime: Regime,
    pub iterations: usize,
    pub converged: bool,
    /// `None` for concentrated results, where the check does not apply.
    pub stability: Option<StabilityReport>,
    pub entropy: f64,
    /// `None` when the transformed inertia of the weights vanishes (n = 1).
    pub strain: Option<f64>,
}

/// Outcome of one reweighting step.
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Update(Profile),
    /// Some `φ′(D_ia)` is infinite: the centroid sits on these observations.
    Singular(Vec<usize>),
}

fn check_sizes(d: &SquaredDistanceMatrix, w: &Weights, alpha: Option<&Profile>) -> Result<()> {
    if d.len() != w.len() {
        return Err(Error::SizeMismatch {
            expected: d.len(),
            got: w.len(),
        });
    }
    if let Some(a) = alpha {
        if a.len() != d.len() {
            return Err(Error::SizeMismatch {
                expected: d.len(),
                got: a.len(),
            });
        }
    }
    Ok(())
}

fn gamma_from_distances(spec: &TransformSpec, w: &Weights, dists: &[f64]) -> Result<f64> {
    let mut g = 0.0;
    for (f, di) in w.as_slice().iter().zip(dists) {
        g += f * spec.phi(*di)?;
    }
    Ok(g)
}

/// `Γ = Σᵢ wᵢ φ(D_ia)`.
pub fn objective(
    d: &SquaredDistanceMatrix,
    w: &Weights,
    spec: &TransformSpec,
    alpha: &Profile,
) -> Result<f64> {
    check_sizes(d, w, Some(alpha))?;
    let dists = centroid_sq_distances(d, alpha.as_slice())?;
    gamma_from_distances(spec, w, &dists)
}

fn reweight(spec: &TransformSpec, w: &Weights, dists: &[f64], current: &Profile) -> Result<Step> {
    let mut logs = Vec::with_capacity(dists.len());
    let mut singular = Vec::new();
    for (i, (f, di)) in w.as_slice().iter().zip(dists).enumerate() {
        match spec.log_phi_prime(*di)? {
            LogSlope::Infinite => singular.push(i),
            LogSlope::Log(l) => logs.push(f.ln() + l),
        }
    }
    if !singular.is_empty() {
        return Ok(Step::Singular(singular));
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        // φ′ vanishes at every observation: Γ is locally flat
        return Ok(Step::Update(current.clone()));
    }
    let raw: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    Ok(Step::Update(Profile::normalized(raw)?))
}

/// One fixed-point step `αᵢ ∝ wᵢ φ′(D_ia)`.
///
/// Weights are normalised in log space so that tiny slopes do not underflow
/// the whole profile.
pub fn iterate_once(
    d: &SquaredDistanceMatrix,
    w: &Weights,
    spec: &TransformSpec,
    alpha: &Profile,
) -> Result<Step> {
    check_sizes(d, w, Some(alpha))?;
    let dists = centroid_sq_distances(d, alpha.as_slice())?;
    reweight(spec, w, &dists, alpha)
}

fn random_profile(n: usize, seed: u64) -> Profile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // flat Dirichlet through normalised exponentials
    let raw: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-300)
        .collect();
    Profile::normalized(raw).expect("positive exponential draws")
}

/// The starting profile selected by `init`.
pub fn initial_profile(w: &Weights, init: &Init) -> Result<Profile> {
    let n = w.len();
    match init {
        Init::Weights => Ok(Profile::from(w)),
        Init::Observation(i) => {
            if *i >= n {
                Err(Error::InvalidParameter(format!(
                    "initial observation {} out of range 1..={n}",
                    i + 1
                )))
            } else {
                Ok(Profile::vertex(n, *i))
            }
        }
        Init::Custom(p) => {
            if p.len() != n {
                Err(Error::SizeMismatch {
                    expected: n,
                    got: p.len(),
                })
            } else {
                Ok(p.clone())
            }
        }
        Init::Random(seed) => Ok(random_profile(n, *seed)),
    }
}

fn concentrated_profile(w: &Weights, group: &[usize]) -> Result<Profile> {
    let mut v = vec![0.0; w.len()];
    for &i in group {
        v[i] = w.as_slice()[i];
    }
    Profile::normalized(v)
}

fn is_boundary(spec: &TransformSpec) -> bool {
    matches!(spec, TransformSpec::Power { q } if *q == 0.5)
}

/// Exponent `r` of `φ(t²) ≈ c·tʳ` as `t → 0`. A vertex is always a local
/// minimum when `r < 1`, only under a median-type balance when `r = 1`, and
/// only when the pull of the other observations vanishes when `r > 1`.
fn vertex_order(spec: &TransformSpec) -> f64 {
    match spec {
        TransformSpec::Power { q } => 2.0 * q,
        TransformSpec::Discrete => 0.0,
        _ => 2.0,
    }
}

fn vertex_regime(spec: &TransformSpec, i0: usize) -> Regime {
    if is_boundary(spec) {
        Regime::Boundary
    } else {
        Regime::Concentrated(i0)
    }
}

enum VertexMove {
    /// The vertex is a local minimum; the profile to report.
    Stay(Profile),
    /// A strictly better profile next to the vertex.
    Leave(Profile),
}

/// Decides whether the centroid sitting on `group` is a local minimum and,
/// if not, steps off the vertex toward the pull of the other observations.
fn settle_at_vertex(
    d: &SquaredDistanceMatrix,
    w: &Weights,
    spec: &TransformSpec,
    group: &[usize],
    gamma_here: f64,
) -> Result<VertexMove> {
    let vertex = concentrated_profile(w, group)?;
    let order = vertex_order(spec);
    if order < 1.0 {
        return Ok(VertexMove::Stay(vertex));
    }
    let n = d.len();
    let fw = w.as_slice();
    let vd = centroid_sq_distances(d, vertex.as_slice())?;
    // pull profile β ∝ wⱼφ′(D_j,vertex) over the other observations
    let mut pull = vec![0.0; n];
    let mut total = 0.0;
    for j in (0..n).filter(|j| !group.contains(j)) {
        if vd[j] <= 0.0 {
            continue;
        }
        let c = fw[j] * spec.phi_prime(vd[j])?.to_f64();
        pull[j] = c;
        total += c;
    }
    if !(total > 0.0 && total.is_finite()) {
        return Ok(VertexMove::Stay(vertex));
    }
    let beta = Profile::normalized(pull)?;
    let gap = profile_sq_distance(d, vertex.as_slice(), beta.as_slice())?;
    let f_group: f64 = group.iter().map(|&i| fw[i]).sum();
    // |∇ of the rest| = 2·total·√gap; for √D the vertex term grows as f·t
    let is_min = if order == 1.0 {
        2.0 * total * gap.sqrt() <= f_group * (1.0 + 1e-9)
    } else {
        gap <= d.roundoff_tolerance()
    };
    if is_min {
        return Ok(VertexMove::Stay(vertex));
    }
    let base = objective(d, w, spec, &vertex)?.min(gamma_here);
    let mut s = 0.5;
    for _ in 0..80 {
        let mix: Vec<f64> = vertex
            .as_slice()
            .iter()
            .zip(beta.as_slice())
            .map(|(v, b)| (1.0 - s) * v + s * b)
            .collect();
        let cand = Profile::normalized(mix)?;
        if objective(d, w, spec, &cand)? < base {
            return Ok(VertexMove::Leave(cand));
        }
        s *= 0.5;
    }
    Ok(VertexMove::Stay(vertex))
}

/// One squared-extrapolation step from three consecutive plain iterates,
/// followed by a plain step from the extrapolated profile. Returns `None`
/// unless the result beats `gamma2`, the objective at `p2`.
#[allow(clippy::type_complexity)]
fn extrapolate(
    d: &SquaredDistanceMatrix,
    w: &Weights,
    spec: &TransformSpec,
    p0: &Profile,
    p1: &Profile,
    p2: &Profile,
    gamma2: f64,
) -> Result<Option<(Profile, Vec<f64>, f64)>> {
    let (a0, a1, a2) = (p0.as_slice(), p1.as_slice(), p2.as_slice());
    let r: Vec<f64> = a1.iter().zip(a0).map(|(x, y)| x - y).collect();
    let v: Vec<f64> = (0..a0.len()).map(|i| a2[i] - 2.0 * a1[i] + a0[i]).collect();
    let norm = |u: &[f64]| u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (nr, nv) = (norm(&r), norm(&v));
    if !(nr > 0.0 && nv > 0.0) {
        return Ok(None);
    }
    let mut s = -(nr / nv);
    for _ in 0..4 {
        if s >= -1.0 {
            break;
        }
        let raw: Vec<f64> = (0..a0.len())
            .map(|i| (a0[i] - 2.0 * s * r[i] + s * s * v[i]).max(0.0))
            .collect();
        if let Ok(jump) = Profile::normalized(raw) {
            let jd = centroid_sq_distances(d, jump.as_slice())?;
            if let Step::Update(next) = reweight(spec, w, &jd, &jump)? {
                let nd = centroid_sq_distances(d, next.as_slice())?;
                let ng = gamma_from_distances(spec, w, &nd)?;
                if ng < gamma2 {
                    return Ok(Some((next, nd, ng)));
                }
            }
        }
        s = 0.5 * (s - 1.0);
    }
    Ok(None)
}

struct Outcome {
    alpha: Profile,
    regime: Regime,
    iterations: usize,
    converged: bool,
}

fn finish(
    d: &SquaredDistanceMatrix,
    w: &Weights,
    spec: &TransformSpec,
    out: Outcome,
    opts: &EstimateOptions,
) -> Result<EstimateResult> {
    let d_centroid = centroid_sq_distances(d, out.alpha.as_slice())?;
    let gamma = gamma_from_distances(spec, w, &d_centroid)?;
    let entropy = diagnostics::entropy(&out.alpha);
    let strain = match diagnostics::strain(gamma, d, w, spec) {
        Ok(s) => Some(s),
        Err(Error::UndefinedStrain) => None,
        Err(e) => return Err(e),
    };
    let stability = if out.regime.is_concentrated() {
        None
    } else {
        stability_from_distances(d, w, spec, &out.alpha, &d_centroid, opts.stability_probes, opts.seed)
            .ok()
    };
    Ok(EstimateResult {
        alpha: out.alpha,
        d_centroid,
        gamma,
        regime: out.regime,
        iterations: out.iterations,
        converged: out.converged,
        stability,
        entropy,
        strain,
    })
}

/// Minimises `Γ` by fixed-point iteration from `opts.init`.
///
/// Non-convergence within `max_iter` (or a failed damping) is reported
/// through `converged = false`, not as an error.
pub fn estimate(
    d: &SquaredDistanceMatrix,
    w: &Weights,
    spec: &TransformSpec,
    opts: &EstimateOptions,
) -> Result<EstimateResult> {
    check_sizes(d, w, None)?;
    spec.validate()?;
    opts.validate()?;
    let n = d.len();

    if n == 1 {
        let regime = if spec.is_rectifiable() {
            Regime::Distributed
        } else {
            Regime::Concentrated(0)
        };
        let out = Outcome {
            alpha: Profile::vertex(1, 0),
            regime,
            iterations: 0,
            converged: true,
        };
        return finish(d, w, spec, out, opts);
    }

    if let TransformSpec::Discrete = spec {
        // Γ(xᵢ) = 1 − wᵢ: the heaviest observation wins
        let fw = w.as_slice();
        let mut i0 = 0;
        for i in 1..n {
            if fw[i] > fw[i0] {
                i0 = i;
            }
        }
        let out = Outcome {
            alpha: Profile::vertex(n, i0),
            regime: Regime::Concentrated(i0),
            iterations: 0,
            converged: true,
        };
        return finish(d, w, spec, out, opts);
    }

    let rectifiable = spec.is_rectifiable();
    let threshold = opts.eps_concentrated * d.mean_off_diagonal();
    let mut alpha = initial_profile(w, &opts.init)?;
    let mut dists = centroid_sq_distances(d, alpha.as_slice())?;
    let mut gamma = gamma_from_distances(spec, w, &dists)?;
    let mut iterations = 0;
    let mut converged = false;
    let mut stalled = 0;
    // the iterate before `alpha`, when `alpha` came from a plain step
    let mut previous: Option<Profile> = None;

    let order = vertex_order(spec);
    loop {
        // near-vertex detection only where a vertex can be a minimum without
        // an exact balance of forces
        if !rectifiable && order <= 1.0 {
            let group: Vec<usize> = (0..n).filter(|&i| dists[i] < threshold).collect();
            if !group.is_empty() {
                match settle_at_vertex(d, w, spec, &group, gamma)? {
                    VertexMove::Stay(out_alpha) => {
                        let out = Outcome {
                            alpha: out_alpha,
                            regime: vertex_regime(spec, group[0]),
                            iterations,
                            converged: true,
                        };
                        return finish(d, w, spec, out, opts);
                    }
                    VertexMove::Leave(next) => {
                        alpha = next;
                        dists = centroid_sq_distances(d, alpha.as_slice())?;
                        gamma = gamma_from_distances(spec, w, &dists)?;
                        iterations += 1;
                        stalled = 0;
                        previous = None;
                        continue;
                    }
                }
            }
        }
        if iterations >= opts.max_iter {
            break;
        }

        let mut candidate = match reweight(spec, w, &dists, &alpha)? {
            Step::Update(p) => p,
            Step::Singular(group) => match settle_at_vertex(d, w, spec, &group, gamma)? {
                VertexMove::Stay(out_alpha) => {
                    let out = Outcome {
                        alpha: out_alpha,
                        regime: vertex_regime(spec, group[0]),
                        iterations,
                        converged: true,
                    };
                    return finish(d, w, spec, out, opts);
                }
                VertexMove::Leave(next) => {
                    alpha = next;
                    dists = centroid_sq_distances(d, alpha.as_slice())?;
                    gamma = gamma_from_distances(spec, w, &dists)?;
                    iterations += 1;
                    stalled = 0;
                    previous = None;
                    continue;
                }
            },
        };
        let mut cand_dists = centroid_sq_distances(d, candidate.as_slice())?;
        let mut cand_gamma = gamma_from_distances(spec, w, &cand_dists)?;
        let mut damped = false;
        let slack = DESCENT_SLACK * gamma.abs().max(f64::MIN_POSITIVE);

        if cand_gamma > gamma + slack {
            let mut recovered = false;
            if let Damping::Halving { max_halvings } = opts.damping {
                for _ in 0..max_halvings {
                    let mid: Vec<f64> = alpha
                        .as_slice()
                        .iter()
                        .zip(candidate.as_slice())
                        .map(|(a, c)| 0.5 * (a + c))
                        .collect();
                    candidate = Profile::normalized(mid)?;
                    cand_dists = centroid_sq_distances(d, candidate.as_slice())?;
                    cand_gamma = gamma_from_distances(spec, w, &cand_dists)?;
                    if cand_gamma <= gamma + slack {
                        recovered = true;
                        damped = true;
                        break;
                    }
                }
            }
            if !recovered {
                iterations += 1;
                break;
            }
        }

        let step = alpha.max_abs_diff(&candidate);
        let rel_change = (gamma - cand_gamma).abs() / gamma.abs().max(f64::MIN_POSITIVE);
        let before = std::mem::replace(&mut alpha, candidate);
        dists = cand_dists;
        gamma = cand_gamma;
        iterations += 1;

        if step < opts.tol_alpha {
            converged = true;
            break;
        }
        let mut accelerated = false;
        previous = if damped || !opts.accelerate {
            None
        } else {
            match previous.take() {
                Some(p0) => match extrapolate(d, w, spec, &p0, &before, &alpha, gamma)? {
                    Some((a, ds, g)) => {
                        alpha = a;
                        dists = ds;
                        gamma = g;
                        accelerated = true;
                        None
                    }
                    None => Some(before),
                },
                None => Some(before),
            }
        };
        if accelerated {
            stalled = 0;
            continue;
        }
        if rel_change < opts.tol_objective {
            stalled += 1;
            if stalled >= STALL_WINDOW {
                converged = true;
                break;
            }
        } else {
            stalled = 0;
        }
    }

    // a final check for a vertex reached on the last step
    if !rectifiable && order <= 1.0 {
        let group: Vec<usize> = (0..n).filter(|&i| dists[i] < threshold).collect();
        if !group.is_empty() {
            if let VertexMove::Stay(out_alpha) = settle_at_vertex(d, w, spec, &group, gamma)? {
                let out = Outcome {
                    alpha: out_alpha,
                    regime: vertex_regime(spec, group[0]),
                    iterations,
                    converged: true,
                };
                return finish(d, w, spec, out, opts);
            }
        }
    }

    // a smooth family can still settle exactly on an observation, e.g. when
    // a redescending φ′ gives zero weight to everything else
    let landed: Vec<usize> = (0..n).filter(|&i| dists[i] == 0.0).collect();
    if !landed.is_empty() && !is_boundary(spec) {
        let vertex = concentrated_profile(w, &landed)?;
        if objective(d, w, spec, &vertex)? <= gamma + DESCENT_SLACK * gamma.abs() {
            let out = Outcome {
                alpha: vertex,
                regime: Regime::Concentrated(landed[0]),
                iterations,
                converged,
            };
            return finish(d, w, spec, out, opts);
        }
    }

    let regime = if is_boundary(spec) {
        Regime::Boundary
    } else {
        Regime::Distributed
    };
    let out = Outcome {
        alpha,
        regime,
        iterations,
        converged,
    };
    finish(d, w, spec, out, opts)
}

/// Default multi-start set: the weights plus every smoothed vertex
/// `0.99·eᵢ + 0.01·w`.
pub fn default_starts(w: &Weights) -> Vec<Profile> {
    let mut starts = vec![Profile::from(w)];
    starts.extend((0..w.len()).map(|i| Profile::smoothed_vertex(w, i, 0.01)));
    starts
}

/// Runs [`estimate`] from each start and returns the distinct fixed points
/// sorted by `Γ`.
///
/// Two results are the same when their centroids are closer than
/// `1e-6 · mean off-diagonal D` (squared); the lower-`Γ` one is kept.
pub fn multi_start(
    d: &SquaredDistanceMatrix,
    w: &Weights,
    spec: &TransformSpec,
    opts: &EstimateOptions,
    starts: Option<&[Profile]>,
) -> Result<Vec<EstimateResult>> {
    let owned;
    let starts = match starts {
        Some(s) => s,
        None => {
            owned = default_starts(w);
            &owned
        }
    };
    let results: Vec<EstimateResult> = starts
        .par_iter()
        .map(|s| estimate(d, w, spec, &opts.with_init(Init::Custom(s.clone()))))
        .collect::<Result<Vec<_>>>()?;

    let eps_dedup = 1e-6 * d.mean_off_diagonal();
    let mut distinct: Vec<EstimateResult> = Vec::new();
    for r in results {
        let mut merged = false;
        for kept in distinct.iter_mut() {
            let gap = profile_sq_distance(d, kept.alpha.as_slice(), r.alpha.as_slice())?;
            if gap < eps_dedup {
                if r.gamma < kept.gamma {
                    *kept = r.clone();
                }
                merged = true;
                break;
            }
        }
        if !merged {
            distinct.push(r);
        }
    }
    distinct.sort_by(|a, b| {
        a.gamma
            .total_cmp(&b.gamma)
            .then(a.alpha.argmax().cmp(&b.alpha.argmax()))
    });
    Ok(distinct)
}

/// Stability of a returned result; concentrated results are rejected.
pub fn stability_check(
    result: &EstimateResult,
    d: &SquaredDistanceMatrix,
    w: &Weights,
    spec: &TransformSpec,
    probes: usize,
    seed: u64,
) -> Result<StabilityReport> {
    if result.regime.is_concentrated() {
        return Err(Error::NotApplicable(
            "stability condition applies to distributed solutions only".into(),
        ));
    }
    stability_at(d, w, spec, &result.alpha, probes, seed)
}

/// Evaluates the stability conditions at an arbitrary profile.
pub fn stability_at(
    d: &SquaredDistanceMatrix,
    w: &Weights,
    spec: &TransformSpec,
    alpha: &Profile,
    probes: usize,
    seed: u64,
) -> Result<StabilityReport> {
    check_sizes(d, w, Some(alpha))?;
    let dists = centroid_sq_distances(d, alpha.as_slice())?;
    stability_from_distances(d, w, spec, alpha, &dists, probes, seed)
}

fn stability_from_distances(
    d: &SquaredDistanceMatrix,
    w: &Weights,
    spec: &TransformSpec,
    alpha: &Profile,
    dists: &[f64],
    probes: usize,
    seed: u64,
) -> Result<StabilityReport> {
    let n = d.len();
    let fw = w.as_slice();
    let mut first = Vec::with_capacity(n);
    let mut curv = Vec::with_capacity(n);
    for &di in dists {
        match (spec.phi_prime(di)?, spec.phi_second(di)?) {
            (Extended::Finite(p), Extended::Finite(s)) => {
                first.push(p);
                curv.push(2.0 * s * di);
            }
            _ => {
                return Err(Error::NotApplicable(
                    "infinite slope at an observation: the centroid is concentrated".into(),
                ))
            }
        }
    }
    let sufficient_lhs: f64 = (0..n).map(|i| fw[i] * (first[i] + curv[i])).sum();

    let exact = n < 3 || certify_euclidean(d, w)?.rank() <= 1;
    if exact {
        return Ok(StabilityReport {
            sufficient_lhs,
            directional_min: sufficient_lhs,
            stable: sufficient_lhs >= -stability_tolerance(fw, &first),
            probes: 0,
            exact: true,
        });
    }

    let mut directions: Vec<Profile> = (0..n).map(|j| Profile::vertex(n, j)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..probes {
        directions.push(random_profile(n, rng.gen()));
    }
    let floor = d.roundoff_tolerance();
    let base: f64 = (0..n).map(|i| fw[i] * first[i]).sum();
    let mut directional_min = f64::INFINITY;
    let mut used = 0;
    for beta in &directions {
        let d_ab = profile_sq_distance(d, alpha.as_slice(), beta.as_slice())?;
        if d_ab <= floor {
            continue;
        }
        let d_ib = centroid_sq_distances(d, beta.as_slice())?;
        let mut value = base;
        for i in 0..n {
            if dists[i] <= floor || curv[i] == 0.0 {
                continue;
            }
            let c = match cos_angle(d_ab, dists[i], d_ib[i]) {
                Ok(c) => c,
                // round-off slightly outside [-1, 1]
                Err(_) => ((d_ab + dists[i] - d_ib[i]) / (2.0 * (d_ab * dists[i]).sqrt())).clamp(-1.0, 1.0),
            };
            value += fw[i] * curv[i] * c * c;
        }
        used += 1;
        directional_min = directional_min.min(value);
    }
    if used == 0 {
        directional_min = sufficient_lhs;
    }
    Ok(StabilityReport {
        sufficient_lhs,
        directional_min,
        stable: directional_min >= -stability_tolerance(fw, &first),
        probes: used,
        exact: false,
    })
}

fn stability_tolerance(fw: &[f64], first: &[f64]) -> f64 {
    1e-10 * fw.iter().zip(first).map(|(f, p)| f * p).sum::<f64>().max(1.0)
}

/// `Γ(a) = Σᵢ wᵢ φ((xᵢ − a)²)` for every grid point `a`, from 1-D
/// coordinates directly.
pub fn grid_scan_1d(x: &[f64], w: &Weights, spec: &TransformSpec, grid: &[f64]) -> Result<Vec<f64>> {
    if x.len() != w.len() {
        return Err(Error::SizeMismatch {
            expected: x.len(),
            got: w.len(),
        });
    }
    grid.iter()
        .map(|a| {
            x.iter()
                .zip(w.as_slice())
                .map(|(xi, f)| spec.phi((xi - a).powi(2)).map(|v| f * v))
                .sum()
        })
        .collect()
}
