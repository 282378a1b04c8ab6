//! Schoenberg transformation families.
//!
//! Every family maps a squared distance `D ≥ 0` to `φ(D)` with `φ(0) = 0`,
//! `φ′ ≥ 0` and `φ″ ≤ 0`. The scaling constant of the rectifiable and
//! bounded families is fixed so that the closed forms below hold literally:
//!
//! | family        | φ(D)                                          |
//! |---------------|-----------------------------------------------|
//! | identity      | `D`                                           |
//! | power         | `D^q`, `0 < q < 1`                            |
//! | exponential   | `1 − exp(−D/δ)`                               |
//! | logarithmic   | `ln(1 + D/δ)`                                 |
//! | tukey         | `D − D²/δ + D³/(3δ²)` for `D ≤ δ`, `δ/3` above |
//! | huber         | `D` for `D ≤ δ`, `2√(δD) − δ` above           |
//! | discrete      | `0` at `D = 0`, `1` otherwise                 |
//! | exp_mixture   | `Σₖ wₖ (1 − exp(−λₖ D)) / λₖ`                  |
//!
//! Derivatives of the piecewise families (tukey, huber) at `D = δ` are taken
//! from the left, i.e. from the `D ≤ δ` branch.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A real number extended with signed infinities.
///
/// Non-rectifiable transformations have an infinite slope at the origin;
/// that case is carried as a variant rather than as a floating overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    PosInfinity,
    NegInfinity,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    /// Lossy conversion for display and plotting.
    pub fn to_f64(self) -> f64 {
        match self {
            Extended::Finite(v) => v,
            Extended::PosInfinity => f64::INFINITY,
            Extended::NegInfinity => f64::NEG_INFINITY,
        }
    }
}

/// One atom `w (1 − exp(−λD)) / λ` of a finite exponential mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureAtom {
    pub weight: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransformSpec {
    Identity,
    Power { q: f64 },
    Exponential { delta: f64 },
    Logarithmic { delta: f64 },
    Tukey { delta: f64 },
    Huber { delta: f64 },
    Discrete,
    ExpMixture { atoms: Vec<MixtureAtom> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    /// `φ′(0) < ∞`
    pub rectifiable: bool,
    /// `φ(∞) < ∞`
    pub bounded: bool,
}

/// Slope in log space, used by the solver to normalise weights without
/// underflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum LogSlope {
    Infinite,
    /// `ln φ′(D)`; `-inf` encodes a vanishing slope.
    Log(f64),
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "delta must be finite and > 0, got {delta}"
        )))
    }
}

fn check_arg(d: f64) -> Result<()> {
    if d >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "squared distance must be >= 0, got {d}"
        )))
    }
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

impl TransformSpec {
    /// `q = 1` degenerates to the identity.
    pub fn power(q: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "power exponent must lie in (0, 1], got {q}"
            )));
        }
        if q == 1.0 {
            Ok(TransformSpec::Identity)
        } else {
            Ok(TransformSpec::Power { q })
        }
    }

    pub fn exponential(delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(TransformSpec::Exponential { delta })
    }

    /// Exponential family given by its rate `λ = 1/δ`.
    pub fn exponential_rate(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and > 0, got {lambda}"
            )));
        }
        Self::exponential(1.0 / lambda)
    }

    pub fn logarithmic(delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(TransformSpec::Logarithmic { delta })
    }

    pub fn tukey(delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(TransformSpec::Tukey { delta })
    }

    pub fn huber(delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(TransformSpec::Huber { delta })
    }

    pub fn exp_mixture(atoms: Vec<MixtureAtom>) -> Result<Self> {
        let spec = TransformSpec::ExpMixture { atoms };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TransformSpec::Identity | TransformSpec::Discrete => Ok(()),
            TransformSpec::Power { q } => {
                if *q > 0.0 && *q <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "power exponent must lie in (0, 1], got {q}"
                    )))
                }
            }
            TransformSpec::Exponential { delta }
            | TransformSpec::Logarithmic { delta }
            | TransformSpec::Tukey { delta }
            | TransformSpec::Huber { delta } => check_delta(*delta),
            TransformSpec::ExpMixture { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidParameter("empty mixture".into()));
                }
                for a in atoms {
                    if !(a.weight >= 0.0 && a.weight.is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "mixture weight must be >= 0, got {}",
                            a.weight
                        )));
                    }
                    if !(a.lambda > 0.0 && a.lambda.is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "mixture rate must be > 0, got {}",
                            a.lambda
                        )));
                    }
                }
                if atoms.iter().all(|a| a.weight == 0.0) {
                    return Err(Error::InvalidParameter(
                        "mixture needs at least one positive weight".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            TransformSpec::Identity => "identity",
            TransformSpec::Power { .. } => "power",
            TransformSpec::Exponential { .. } => "exp",
            TransformSpec::Logarithmic { .. } => "log",
            TransformSpec::Tukey { .. } => "tukey",
            TransformSpec::Huber { .. } => "huber",
            TransformSpec::Discrete => "discrete",
            TransformSpec::ExpMixture { .. } => "mix",
        }
    }

    pub fn classify(&self) -> Classification {
        let (rectifiable, bounded) = match self {
            TransformSpec::Identity => (true, false),
            TransformSpec::Power { .. } => (false, false),
            TransformSpec::Exponential { .. } => (true, true),
            TransformSpec::Logarithmic { .. } => (true, false),
            TransformSpec::Tukey { .. } => (true, true),
            TransformSpec::Huber { .. } => (true, false),
            TransformSpec::Discrete => (false, true),
            TransformSpec::ExpMixture { .. } => (true, true),
        };
        Classification {
            rectifiable,
            bounded,
        }
    }

    pub fn is_rectifiable(&self) -> bool {
        self.classify().rectifiable
    }

    /// Location of a derivative discontinuity, if any.
    pub fn kink(&self) -> Option<f64> {
        match self {
            TransformSpec::Tukey { delta } | TransformSpec::Huber { delta } => Some(*delta),
            _ => None,
        }
    }

    /// `φ(D)`.
    pub fn phi(&self, d: f64) -> Result<f64> {
        check_arg(d)?;
        if d == 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            TransformSpec::Identity => d,
            TransformSpec::Power { q } => d.powf(*q),
            TransformSpec::Exponential { delta } => -(-d / delta).exp_m1(),
            TransformSpec::Logarithmic { delta } => (d / delta).ln_1p(),
            TransformSpec::Tukey { delta } => {
                if d <= *delta {
                    let t = d / delta;
                    d * (1.0 - t + t * t / 3.0)
                } else {
                    delta / 3.0
                }
            }
            TransformSpec::Huber { delta } => {
                if d <= *delta {
                    d
                } else {
                    2.0 * (delta * d).sqrt() - delta
                }
            }
            TransformSpec::Discrete => 1.0,
            TransformSpec::ExpMixture { atoms } => atoms
                .iter()
                .map(|a| -a.weight * (-a.lambda * d).exp_m1() / a.lambda)
                .sum(),
        })
    }

    /// `φ′(D)`, with `+∞` at the origin for non-rectifiable families.
    pub fn phi_prime(&self, d: f64) -> Result<Extended> {
        check_arg(d)?;
        Ok(match self {
            TransformSpec::Identity => Extended::Finite(1.0),
            TransformSpec::Power { q } => {
                if d == 0.0 {
                    Extended::PosInfinity
                } else {
                    Extended::Finite(q * d.powf(q - 1.0))
                }
            }
            TransformSpec::Exponential { delta } => Extended::Finite((-d / delta).exp() / delta),
            TransformSpec::Logarithmic { delta } => Extended::Finite(1.0 / (delta + d)),
            TransformSpec::Tukey { delta } => {
                if d <= *delta {
                    let s = 1.0 - d / delta;
                    Extended::Finite(s * s)
                } else {
                    Extended::Finite(0.0)
                }
            }
            TransformSpec::Huber { delta } => {
                if d <= *delta {
                    Extended::Finite(1.0)
                } else {
                    Extended::Finite((delta / d).sqrt())
                }
            }
            TransformSpec::Discrete => {
                if d == 0.0 {
                    Extended::PosInfinity
                } else {
                    Extended::Finite(0.0)
                }
            }
            TransformSpec::ExpMixture { atoms } => Extended::Finite(
                atoms
                    .iter()
                    .map(|a| a.weight * (-a.lambda * d).exp())
                    .sum(),
            ),
        })
    }

    /// `φ″(D)`, with `−∞` at the origin for non-rectifiable families.
    pub fn phi_second(&self, d: f64) -> Result<Extended> {
        check_arg(d)?;
        Ok(match self {
            TransformSpec::Identity => Extended::Finite(0.0),
            TransformSpec::Power { q } => {
                if d == 0.0 {
                    Extended::NegInfinity
                } else {
                    Extended::Finite(q * (q - 1.0) * d.powf(q - 2.0))
                }
            }
            TransformSpec::Exponential { delta } => {
                Extended::Finite(-(-d / delta).exp() / (delta * delta))
            }
            TransformSpec::Logarithmic { delta } => {
                let s = delta + d;
                Extended::Finite(-1.0 / (s * s))
            }
            TransformSpec::Tukey { delta } => {
                if d <= *delta {
                    Extended::Finite(-2.0 * (1.0 - d / delta) / delta)
                } else {
                    Extended::Finite(0.0)
                }
            }
            TransformSpec::Huber { delta } => {
                if d <= *delta {
                    Extended::Finite(0.0)
                } else {
                    Extended::Finite(-0.5 * delta.sqrt() * d.powf(-1.5))
                }
            }
            TransformSpec::Discrete => {
                if d == 0.0 {
                    Extended::NegInfinity
                } else {
                    Extended::Finite(0.0)
                }
            }
            TransformSpec::ExpMixture { atoms } => Extended::Finite(
                -atoms
                    .iter()
                    .map(|a| a.weight * a.lambda * (-a.lambda * d).exp())
                    .sum::<f64>(),
            ),
        })
    }

    pub(crate) fn log_phi_prime(&self, d: f64) -> Result<LogSlope> {
        check_arg(d)?;
        Ok(match self {
            TransformSpec::Identity => LogSlope::Log(0.0),
            TransformSpec::Power { q } => {
                if d == 0.0 {
                    LogSlope::Infinite
                } else {
                    LogSlope::Log(q.ln() + (q - 1.0) * d.ln())
                }
            }
            TransformSpec::Exponential { delta } => LogSlope::Log(-d / delta - delta.ln()),
            TransformSpec::Logarithmic { delta } => LogSlope::Log(-(delta + d).ln()),
            TransformSpec::Tukey { delta } => {
                if d <= *delta {
                    LogSlope::Log(2.0 * (1.0 - d / delta).ln())
                } else {
                    LogSlope::Log(f64::NEG_INFINITY)
                }
            }
            TransformSpec::Huber { delta } => {
                if d <= *delta {
                    LogSlope::Log(0.0)
                } else {
                    LogSlope::Log(0.5 * (delta.ln() - d.ln()))
                }
            }
            TransformSpec::Discrete => {
                if d == 0.0 {
                    LogSlope::Infinite
                } else {
                    LogSlope::Log(f64::NEG_INFINITY)
                }
            }
            TransformSpec::ExpMixture { atoms } => LogSlope::Log(log_sum_exp(
                atoms
                    .iter()
                    .filter(|a| a.weight > 0.0)
                    .map(|a| a.weight.ln() - a.lambda * d),
            )),
        })
    }

    /// The ψ-function `ψ(x) = φ′(x²)·x`, extended oddly.
    ///
    /// At `x = 0` the odd extension gives `0` for every family. Huber and
    /// Tukey use their closed forms (clip and bisquare).
    pub fn psi(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        match self {
            TransformSpec::Huber { delta } => {
                let c = delta.sqrt();
                x.clamp(-c, c)
            }
            TransformSpec::Tukey { delta } => {
                if x * x <= *delta {
                    let s = 1.0 - x * x / delta;
                    x * s * s
                } else {
                    0.0
                }
            }
            _ => match self.phi_prime(x * x) {
                Ok(Extended::Finite(s)) => s * x,
                // x*x underflowed to zero
                _ => x.signum() * f64::INFINITY,
            },
        }
    }

    /// `χ(D) = φ′(D) + 2φ″(D)·D`, the derivative of `ψ(√D)` in `√D`.
    ///
    /// `D = 0` is accepted for rectifiable families only.
    pub fn chi(&self, d: f64) -> Result<f64> {
        check_arg(d)?;
        if let TransformSpec::Power { q } = self {
            if d == 0.0 {
                return Err(Error::Domain(
                    "chi of a power transformation is undefined at D = 0".into(),
                ));
            }
            return Ok(q * (2.0 * q - 1.0) * d.powf(q - 1.0));
        }
        let p = self.phi_prime(d)?;
        let s = self.phi_second(d)?;
        match (p, s) {
            (Extended::Finite(p), Extended::Finite(s)) => Ok(p + 2.0 * s * d),
            _ => Err(Error::Domain(format!(
                "chi undefined at D = {d} for a non-rectifiable transformation"
            ))),
        }
    }
}

fn fmt_param(v: f64) -> String {
    format!("{v}")
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformSpec::Identity => write!(f, "identity"),
            TransformSpec::Power { q } => write!(f, "power:q={}", fmt_param(*q)),
            TransformSpec::Exponential { delta } => write!(f, "exp:delta={}", fmt_param(*delta)),
            TransformSpec::Logarithmic { delta } => write!(f, "log:delta={}", fmt_param(*delta)),
            TransformSpec::Tukey { delta } => write!(f, "tukey:delta={}", fmt_param(*delta)),
            TransformSpec::Huber { delta } => write!(f, "huber:delta={}", fmt_param(*delta)),
            TransformSpec::Discrete => write!(f, "discrete"),
            TransformSpec::ExpMixture { atoms } => {
                write!(f, "mix:")?;
                for (k, a) in atoms.iter().enumerate() {
                    if k > 0 {
                        write!(f, ";")?;
                    }
                    write!(
                        f,
                        "w{n}={},l{n}={}",
                        fmt_param(a.weight),
                        fmt_param(a.lambda),
                        n = k + 1
                    )?;
                }
                Ok(())
            }
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("`{key}` expects a number, got `{value}`")))
}

fn parse_pairs(body: &str, sep: char) -> Result<Vec<(String, String)>> {
    body.split(sep)
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{kv}`")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn single_param(family: &str, body: &str, allowed: &[&str]) -> Result<(String, f64)> {
    let pairs = parse_pairs(body, ',')?;
    match pairs.as_slice() {
        [(k, v)] if allowed.contains(&k.as_str()) => Ok((k.clone(), parse_f64(k, v)?)),
        _ => Err(Error::Parse(format!(
            "`{family}` expects exactly one of {allowed:?}, got `{body}`"
        ))),
    }
}

impl FromStr for TransformSpec {
    type Err = Error;

    /// Parses `power:q=0.7`, `exp:delta=2`, `exp:lambda=0.5`, `log:delta=1`,
    /// `tukey:delta=1`, `huber:delta=1`, `discrete`, `identity` and
    /// `mix:w1=0.5,l1=1;w2=0.5,l2=10`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, body) = match s.split_once(':') {
            Some((f, b)) => (f.trim(), b.trim()),
            None => (s, ""),
        };
        match family {
            "identity" | "id" => {
                if body.is_empty() {
                    Ok(TransformSpec::Identity)
                } else {
                    Err(Error::Parse("identity takes no parameters".into()))
                }
            }
            "discrete" => {
                if body.is_empty() {
                    Ok(TransformSpec::Discrete)
                } else {
                    Err(Error::Parse("discrete takes no parameters".into()))
                }
            }
            "power" | "pow" => {
                let (_, q) = single_param(family, body, &["q"])?;
                TransformSpec::power(q)
            }
            "exp" | "exponential" => match single_param(family, body, &["delta", "lambda"])? {
                (k, v) if k == "lambda" => TransformSpec::exponential_rate(v),
                (_, v) => TransformSpec::exponential(v),
            },
            "log" | "logarithmic" => {
                let (_, d) = single_param(family, body, &["delta"])?;
                TransformSpec::logarithmic(d)
            }
            "tukey" => {
                let (_, d) = single_param(family, body, &["delta"])?;
                TransformSpec::tukey(d)
            }
            "huber" => {
                let (_, d) = single_param(family, body, &["delta"])?;
                TransformSpec::huber(d)
            }
            "mix" | "mixture" => {
                let mut atoms = Vec::new();
                for (k, group) in body.split(';').filter(|g| !g.trim().is_empty()).enumerate() {
                    let pairs = parse_pairs(group, ',')?;
                    let mut weight = None;
                    let mut lambda = None;
                    for (key, v) in &pairs {
                        match key.chars().next() {
                            Some('w') => weight = Some(parse_f64(key, v)?),
                            Some('l') => lambda = Some(parse_f64(key, v)?),
                            _ => {
                                return Err(Error::Parse(format!(
                                    "unknown mixture key `{key}`"
                                )))
                            }
                        }
                    }
                    match (weight, lambda) {
                        (Some(weight), Some(lambda)) => atoms.push(MixtureAtom { weight, lambda }),
                        _ => {
                            return Err(Error::Parse(format!(
                                "mixture atom {} needs both w and l",
                                k + 1
                            )))
                        }
                    }
                }
                TransformSpec::exp_mixture(atoms)
            }
            other => Err(Error::Parse(format!("unknown transformation family `{other}`"))),
        }
    }
}

/// One-parameter families that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepFamily {
    Power,
    Exponential,
    ExponentialRate,
    Logarithmic,
    Tukey,
    Huber,
}

impl SweepFamily {
    /// Resolves a family from the CLI family prefix and the grid parameter
    /// name (`q`, `delta` or `lambda`).
    pub fn resolve(family: &str, param: &str) -> Result<Self> {
        let fam = family.split(':').next().unwrap_or("").trim();
        match (fam, param) {
            ("power" | "pow", "q") => Ok(SweepFamily::Power),
            ("exp" | "exponential", "delta") => Ok(SweepFamily::Exponential),
            ("exp" | "exponential", "lambda") => Ok(SweepFamily::ExponentialRate),
            ("log" | "logarithmic", "delta") => Ok(SweepFamily::Logarithmic),
            ("tukey", "delta") => Ok(SweepFamily::Tukey),
            ("huber", "delta") => Ok(SweepFamily::Huber),
            _ => Err(Error::Parse(format!(
                "cannot sweep `{param}` for family `{fam}`"
            ))),
        }
    }

    pub fn param_name(self) -> &'static str {
        match self {
            SweepFamily::Power => "q",
            SweepFamily::ExponentialRate => "lambda",
            _ => "delta",
        }
    }

    pub fn instantiate(self, param: f64) -> Result<TransformSpec> {
        match self {
            SweepFamily::Power => TransformSpec::power(param),
            SweepFamily::Exponential => TransformSpec::exponential(param),
            SweepFamily::ExponentialRate => TransformSpec::exponential_rate(param),
            SweepFamily::Logarithmic => TransformSpec::logarithmic(param),
            SweepFamily::Tukey => TransformSpec::tukey(param),
            SweepFamily::Huber => TransformSpec::huber(param),
        }
    }

    /// True when large parameter values approach the identity (mean) end.
    pub fn identity_at_high_param(self) -> bool {
        !matches!(self, SweepFamily::ExponentialRate)
    }
}

/// Expected sign of a derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    NonNegative,
    NonPositive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeCheck {
    pub order: usize,
    pub expected: Sign,
    pub passed: bool,
    /// Largest wrong-signed finite-difference value (0 when none).
    pub worst_violation: f64,
    pub points_checked: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchoenbergReport {
    pub origin_value: f64,
    pub zero_at_origin: bool,
    pub derivatives: Vec<DerivativeCheck>,
}

impl SchoenbergReport {
    pub fn passed(&self) -> bool {
        self.zero_at_origin && self.derivatives.iter().all(|c| c.passed)
    }
}

// Central stencils (offset, coefficient), second-order accurate.
const STENCILS: [&[(i32, f64)]; 4] = [
    &[(-1, -0.5), (1, 0.5)],
    &[(-1, 1.0), (0, -2.0), (1, 1.0)],
    &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
    &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
];

fn fd_step(order: usize, d: f64) -> f64 {
    if order <= 2 {
        (1e-4f64).max(1e-4 * d)
    } else {
        d.max(1.0) * f64::EPSILON.powf(1.0 / (order as f64 + 2.0))
    }
}

/// Checks the sign pattern `φ(0) = 0`, `φ^(2r−1) ≥ 0`, `φ^(2r) ≤ 0` of the
/// given transformation by central finite differences on `grid`.
pub fn verify_schoenberg(spec: &TransformSpec, grid: &[f64], order: usize) -> SchoenbergReport {
    let kinks: Vec<f64> = spec.kink().into_iter().collect();
    verify_schoenberg_fn(|d| spec.phi(d).unwrap_or(f64::NAN), grid, order, &kinks)
}

/// As [`verify_schoenberg`] for an arbitrary function. Grid points whose
/// stencil straddles one of `kinks` are skipped.
pub fn verify_schoenberg_fn<F: Fn(f64) -> f64>(
    phi: F,
    grid: &[f64],
    order: usize,
    kinks: &[f64],
) -> SchoenbergReport {
    let order = order.clamp(2, 4);
    let origin_value = phi(0.0);
    let mut derivatives = Vec::with_capacity(order);
    for k in 1..=order {
        let stencil = STENCILS[k - 1];
        let reach = stencil.iter().map(|(o, _)| o.unsigned_abs()).max().unwrap_or(1) as f64;
        let coeff_sum: f64 = stencil.iter().map(|(_, c)| c.abs()).sum();
        let expected = if k % 2 == 1 {
            Sign::NonNegative
        } else {
            Sign::NonPositive
        };
        let mut worst: f64 = 0.0;
        let mut passed = true;
        let mut checked = 0;
        for &d in grid.iter().filter(|d| **d > 0.0) {
            // keep the stencil strictly inside (0, ∞)
            let h = fd_step(k, d).min(d / (reach + 1.0));
            if kinks.iter().any(|&c| (d - c).abs() <= reach * h * (1.0 + 1e-9)) {
                continue;
            }
            let mut acc = 0.0;
            let mut scale: f64 = 0.0;
            for &(o, c) in stencil {
                let v = phi(d + o as f64 * h);
                acc += c * v;
                scale = scale.max(v.abs());
            }
            let value = acc / h.powi(k as i32);
            let noise = 16.0 * f64::EPSILON * coeff_sum * scale / h.powi(k as i32);
            let wrong = match expected {
                Sign::NonNegative => -value,
                Sign::NonPositive => value,
            };
            checked += 1;
            if !wrong.is_finite() || value.is_nan() {
                passed = false;
                worst = f64::INFINITY;
                continue;
            }
            if wrong > 0.0 {
                worst = worst.max(wrong);
                if wrong > noise {
                    passed = false;
                }
            }
        }
        derivatives.push(DerivativeCheck {
            order: k,
            expected,
            passed,
            worst_violation: worst,
            points_checked: checked,
        });
    }
    SchoenbergReport {
        origin_value,
        zero_at_origin: origin_value == 0.0,
        derivatives,
    }
}

/// The families shipped by the crate, with representative parameters.
pub fn shipped_families() -> Vec<TransformSpec> {
    vec![
        TransformSpec::Identity,
        TransformSpec::Power { q: 0.3 },
        TransformSpec::Power { q: 0.7 },
        TransformSpec::Exponential { delta: 1.0 },
        TransformSpec::Logarithmic { delta: 1.0 },
        TransformSpec::Tukey { delta: 1.0 },
        TransformSpec::Huber { delta: 1.0 },
        TransformSpec::Discrete,
        TransformSpec::ExpMixture {
            atoms: vec![
                MixtureAtom {
                    weight: 0.5,
                    lambda: 1.0,
                },
                MixtureAtom {
                    weight: 0.5,
                    lambda: 10.0,
                },
            ],
        },
    ]
}
