//! Entropy, strain and parameter sweeps.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{estimate, multi_start, EstimateOptions, EstimateResult, Init, Regime};
use crate::geometry::{Configuration, Profile, SquaredDistanceMatrix, Weights};
use crate::transforms::{SweepFamily, TransformSpec};

/// `H(α) = −Σ αⱼ ln αⱼ` with `0 ln 0 = 0`.
pub fn entropy(alpha: &Profile) -> f64 {
    let h: f64 = alpha
        .as_slice()
        .iter()
        .filter(|a| **a > 0.0)
        .map(|a| -a * a.ln())
        .sum();
    h.max(0.0)
}

/// `Δ̃(w) = ½ Σᵢⱼ wᵢ wⱼ φ(D_ij)`, the minimal dispersion in the embedded
/// space.
pub fn transformed_inertia(d: &SquaredDistanceMatrix, w: &Weights, spec: &TransformSpec) -> Result<f64> {
    if d.len() != w.len() {
        return Err(Error::SizeMismatch {
            expected: d.len(),
            got: w.len(),
        });
    }
    let f = w.as_slice();
    let n = d.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += f[i] * f[j] * spec.phi(d.get(i, j))?;
        }
    }
    Ok(s)
}

/// Strain `γ = Γ / Δ̃(w)`, which is at least one.
pub fn strain(gamma: f64, d: &SquaredDistanceMatrix, w: &Weights, spec: &TransformSpec) -> Result<f64> {
    let t = transformed_inertia(d, w, spec)?;
    if t <= 0.0 {
        return Err(Error::UndefinedStrain);
    }
    Ok(gamma / t)
}

/// Small-`q` limit of the strain of a power estimate concentrated on `i0`:
/// `2 (1 − w_{i0}) / (1 − Σⱼ wⱼ²)`.
pub fn limit_strain_concentrated(w: &Weights, i0: usize) -> Result<f64> {
    if i0 >= w.len() {
        return Err(Error::InvalidParameter(format!(
            "observation {} out of range 1..={}",
            i0 + 1,
            w.len()
        )));
    }
    let denom = 1.0 - w.sum_of_squares();
    if denom <= 0.0 {
        return Err(Error::UndefinedStrain);
    }
    Ok(2.0 * (1.0 - w.as_slice()[i0]) / denom)
}

/// Parameter grid for a sweep, e.g. `q=0.1:0.9:0.05` (linear start:stop:step)
/// or `delta=log:1e-3:1e4:50` (geometric start:stop:count).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    pub param: String,
    /// Sorted ascending, no duplicates.
    pub values: Vec<f64>,
}

impl ParamGrid {
    pub fn parse(s: &str) -> Result<Self> {
        let (param, body) = s
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("grid `{s}` must look like name=spec")))?;
        let param = param.trim().to_string();
        let parts: Vec<&str> = body.split(':').map(str::trim).collect();
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{t}` in grid `{s}`")))
        };
        let values = match parts.as_slice() {
            ["log", a, b, n] => {
                let (a, b) = (num(a)?, num(b)?);
                let n: usize = n
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad count `{n}` in grid `{s}`")))?;
                if !(a > 0.0 && b > 0.0) {
                    return Err(Error::Parse("log grid bounds must be > 0".into()));
                }
                match n {
                    0 => Vec::new(),
                    1 => vec![a],
                    _ => {
                        let (la, lb) = (a.ln(), b.ln());
                        (0..n)
                            .map(|k| (la + (lb - la) * k as f64 / (n - 1) as f64).exp())
                            .collect()
                    }
                }
            }
            [a, b, step] => {
                let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                if step.is_nan() || step <= 0.0 {
                    return Err(Error::Parse("grid step must be > 0".into()));
                }
                if b < a {
                    Vec::new()
                } else {
                    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
                    (0..count).map(|k| a + step * k as f64).collect()
                }
            }
            [single] => vec![num(single)?],
            _ => return Err(Error::Parse(format!("unrecognised grid `{s}`"))),
        };
        Self::from_values(param, values)
    }

    pub fn from_values(param: impl Into<String>, mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parse("empty parameter grid".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite grid value".into()));
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        Ok(ParamGrid {
            param: param.into(),
            values,
        })
    }
}

/// Which start produced a sweep record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Warm,
    Cold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub param: f64,
    pub gamma: f64,
    pub entropy: f64,
    pub strain: Option<f64>,
    pub regime: Regime,
    pub converged: bool,
    pub iterations: usize,
    /// `Σᵢ αᵢ x_iβ` per dimension, when coordinates were supplied.
    pub projection: Option<Vec<f64>>,
    pub alpha: Profile,
    pub branch: Branch,
    /// Distinct minima found by multi-start, when requested.
    pub n_minima: Option<usize>,
    /// Estimation failure at this grid point.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub estimate: EstimateOptions,
    /// Also run a cold start from the weights and keep the lower `Γ`.
    pub cold_start: bool,
    pub multi_start: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            estimate: EstimateOptions::default(),
            cold_start: true,
            multi_start: false,
        }
    }
}

fn record(
    param: f64,
    r: EstimateResult,
    branch: Branch,
    config: Option<&Configuration>,
) -> Result<SweepRecord> {
    let projection = match config {
        Some(c) => Some(c.weighted_mean(r.alpha.as_slice())?),
        None => None,
    };
    Ok(SweepRecord {
        param,
        gamma: r.gamma,
        entropy: r.entropy,
        strain: r.strain,
        regime: r.regime,
        converged: r.converged,
        iterations: r.iterations,
        projection,
        alpha: r.alpha,
        branch,
        n_minima: None,
        error: None,
    })
}

fn failed(param: f64, w: &Weights, e: &Error) -> SweepRecord {
    SweepRecord {
        param,
        gamma: f64::NAN,
        entropy: f64::NAN,
        strain: None,
        regime: Regime::Distributed,
        converged: false,
        iterations: 0,
        projection: None,
        alpha: Profile::from(w),
        branch: Branch::Cold,
        n_minima: None,
        error: Some(e.to_string()),
    }
}

/// Traces estimates across a parameter grid.
///
/// The grid is walked from the end closest to the identity (large `q` or
/// `δ`, small `λ`), warm-starting each point from the previous profile.
/// Cold starts from the weights run in parallel; the lower-`Γ` result is kept.
/// Records come back in ascending parameter order.
pub fn sweep(
    d: &SquaredDistanceMatrix,
    w: &Weights,
    family: SweepFamily,
    grid: &ParamGrid,
    opts: &SweepOptions,
    config: Option<&Configuration>,
) -> Result<Vec<SweepRecord>> {
    if let Some(c) = config {
        if c.len() != d.len() {
            return Err(Error::SizeMismatch {
                expected: d.len(),
                got: c.len(),
            });
        }
    }
    let mut order: Vec<usize> = (0..grid.values.len()).collect();
    if family.identity_at_high_param() {
        order.reverse();
    }

    let specs: Vec<Result<TransformSpec>> =
        grid.values.iter().map(|&p| family.instantiate(p)).collect();

    let cold: Vec<Option<Result<EstimateResult>>> = if opts.cold_start {
        specs
            .par_iter()
            .map(|s| match s {
                Ok(spec) => Some(estimate(d, w, spec, &opts.estimate.with_init(Init::Weights))),
                Err(e) => Some(Err(e.clone())),
            })
            .collect()
    } else {
        vec![None; specs.len()]
    };
    let minima: Vec<Option<usize>> = if opts.multi_start {
        specs
            .par_iter()
            .map(|s| {
                s.as_ref()
                    .ok()
                    .and_then(|spec| multi_start(d, w, spec, &opts.estimate, None).ok())
                    .map(|v| v.len())
            })
            .collect()
    } else {
        vec![None; specs.len()]
    };

    let mut records: Vec<Option<SweepRecord>> = vec![None; grid.values.len()];
    let mut previous: Option<Profile> = None;
    for &k in &order {
        let param = grid.values[k];
        let spec = match &specs[k] {
            Ok(s) => s,
            Err(e) => {
                records[k] = Some(failed(param, w, e));
                continue;
            }
        };
        let warm_init = match &previous {
            Some(p) => Init::Custom(p.clone()),
            None => Init::Weights,
        };
        let warm = estimate(d, w, spec, &opts.estimate.with_init(warm_init));
        let chosen = match (warm, cold[k].clone()) {
            (Ok(wr), Some(Ok(cr))) => {
                if cr.gamma < wr.gamma {
                    Ok((cr, Branch::Cold))
                } else {
                    Ok((wr, Branch::Warm))
                }
            }
            (Ok(wr), _) => Ok((wr, Branch::Warm)),
            (Err(_), Some(Ok(cr))) => Ok((cr, Branch::Cold)),
            (Err(e), _) => Err(e),
        };
        match chosen {
            Ok((r, branch)) => {
                previous = Some(r.alpha.clone());
                let mut rec = record(param, r, branch, config)?;
                rec.n_minima = minima[k];
                records[k] = Some(rec);
            }
            Err(e) => records[k] = Some(failed(param, w, &e)),
        }
    }
    Ok(records.into_iter().flatten().collect())
}
