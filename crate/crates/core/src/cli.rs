//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 on input or usage errors, 2 when `estimate`
//! stops without converging. `check` exits 1 when any check fails.

use crate::ca;
use crate::data::Dataset;
use crate::diagnostics::{self, ParamGrid, SweepOptions};
use crate::error::{Error, Result};
use crate::estimator::{self, Damping, EstimateOptions, EstimateResult, Init};
use crate::geometry::{self, Configuration};
use crate::io::{self, InputFormat, RunManifest, Source};
use crate::transforms::{self, SweepFamily, TransformSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "schoenloc",
    version,
    about = "Robust location estimation from squared Euclidean distances"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Points,
    Dist,
    Table,
}

impl From<FormatArg> for InputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Points => InputFormat::Points,
            FormatArg::Dist => InputFormat::Dist,
            FormatArg::Table => InputFormat::Table,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Input layout (built-in datasets pick their own by default).
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Name of the weight column (default `w` when present).
    #[arg(long)]
    pub weights_col: Option<String>,
    /// Seed for random starts and stability probes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Convergence tolerance on the profile (max abs change).
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Run several starts and report the distinct minima found.
    #[arg(long)]
    pub multi_start: bool,
    /// Keep tied observations separate.
    #[arg(long)]
    pub no_aggregate: bool,
    /// Round numbers to six decimals.
    #[arg(long)]
    pub pretty: bool,
    /// Write to a file instead of stdout.
    #[arg(long, short)]
    pub output: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a location under one transformation.
    Estimate {
        input: String,
        #[arg(long, short, default_value = "identity")]
        transform: String,
        /// Initial profile: `weights`, `random` or `obs=<index>` (1-based).
        #[arg(long, default_value = "weights")]
        init: String,
        /// With --multi-start, print one record per distinct minimum.
        #[arg(long)]
        all_minima: bool,
        /// Factorial axes kept for table inputs.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep a transformation parameter and emit one TSV row per grid point.
    Sweep {
        input: String,
        /// Family to sweep: power, exp, log, tukey or huber.
        #[arg(long, short, default_value = "power")]
        transform: String,
        /// `q=0.1:0.9:0.05`, `delta=log:1e-3:1e4:50` or a single `q=0.3`.
        #[arg(long)]
        grid: String,
        /// Follow the warm-started branch only.
        #[arg(long)]
        no_cold_start: bool,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Classical MDS coordinates of a distance matrix.
    Mds {
        input: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Correspondence analysis of a contingency table: row coordinates, or a
    /// centroid trajectory with --grid.
    Ca {
        input: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Family swept when --grid is given.
        #[arg(long, short, default_value = "power")]
        transform: String,
        #[arg(long)]
        grid: Option<String>,
        /// Follow the warm-started branch only.
        #[arg(long)]
        no_cold_start: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run identity, Schoenberg and Euclidean checks.
    Check {
        /// Optional input; the built-in copper data is used otherwise.
        input: Option<String>,
        /// Add a deliberately invalid function to the Schoenberg checks.
        #[arg(long, value_enum)]
        fixture: Option<Fixture>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Fixture {
    /// φ(D) = D², which is not a Schoenberg transformation.
    Square,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Estimate {
            input,
            transform,
            init,
            all_minima,
            dim,
            common,
        } => cmd_estimate(&input, &transform, &init, all_minima, dim, &common, out),
        Command::Sweep {
            input,
            transform,
            grid,
            no_cold_start,
            dim,
            common,
        } => cmd_sweep("sweep", &input, &transform, &grid, !no_cold_start, dim, None, &common, out),
        Command::Mds { input, dim, common } => cmd_mds(&input, dim, &common, out),
        Command::Ca {
            input,
            dim,
            transform,
            grid,
            no_cold_start,
            common,
        } => match grid {
            Some(g) => cmd_sweep(
                "ca",
                &input,
                &transform,
                &g,
                !no_cold_start,
                dim,
                Some(InputFormat::Table),
                &common,
                out,
            ),
            None => cmd_ca(&input, dim, &common, out),
        },
        Command::Check {
            input,
            fixture,
            common,
        } => cmd_check(input.as_deref(), fixture, &common, out),
    }
}

fn resolve_format(input: &str, common: &Common, default: InputFormat) -> InputFormat {
    common
        .format
        .map(InputFormat::from)
        .or_else(|| io::builtin_format(input))
        .unwrap_or(default)
}

fn estimate_options(common: &Common, init: Init) -> Result<EstimateOptions> {
    let opts = EstimateOptions {
        init,
        tol_alpha: common.tol,
        max_iter: common.max_iter,
        damping: Damping::Halving { max_halvings: 30 },
        seed: common.seed,
        ..EstimateOptions::default()
    };
    opts.validate()?;
    Ok(opts)
}

fn parse_init(s: &str, seed: u64, n: usize) -> Result<Init> {
    match s {
        "weights" | "w" => Ok(Init::Weights),
        "random" => Ok(Init::Random(seed)),
        other => {
            let idx = other
                .strip_prefix("obs=")
                .and_then(|v| v.parse::<usize>().ok())
                .ok_or_else(|| Error::Parse(format!("unknown --init `{other}`")))?;
            if idx == 0 || idx > n {
                return Err(Error::InvalidParameter(format!(
                    "--init obs index must lie in 1..={n}"
                )));
            }
            Ok(Init::Observation(idx - 1))
        }
    }
}

fn load(input: &str, format: InputFormat, common: &Common, dim: usize) -> Result<(Source, Dataset)> {
    let src = io::load_source(input)?;
    let raw = io::parse_dataset(&src.text, format, common.weights_col.as_deref(), dim)?;
    let ds = if common.no_aggregate {
        raw
    } else {
        raw.aggregated(1e-12)?
    };
    Ok((src, ds))
}

fn base_options(common: &Common, format: InputFormat) -> Vec<(String, String)> {
    vec![
        ("format".into(), format.as_str().into()),
        ("aggregate".into(), (!common.no_aggregate).to_string()),
        ("tol".into(), format!("{:e}", common.tol)),
        ("max_iter".into(), common.max_iter.to_string()),
        ("multi_start".into(), common.multi_start.to_string()),
        ("pretty".into(), common.pretty.to_string()),
        (
            "weights_col".into(),
            common.weights_col.clone().unwrap_or_else(|| "-".into()),
        ),
    ]
}

fn manifest(
    command: &str,
    src: &Source,
    format: InputFormat,
    transform: &str,
    options: Vec<(String, String)>,
    seed: u64,
) -> RunManifest {
    RunManifest {
        command: command.into(),
        input: src.name.clone(),
        format: format.as_str().into(),
        sha256: src.sha256(),
        transform: transform.into(),
        options,
        seed,
        version: env!("CARGO_PKG_VERSION").into(),
    }
}

fn emit(body: &str, common: &Common, out: &mut dyn Write) -> Result<()> {
    match &common.output {
        Some(path) => std::fs::write(path, body).map_err(|e| Error::Io(format!("{path}: {e}"))),
        None => out.write_all(body.as_bytes()).map_err(Error::from),
    }
}

fn centroid(ds: &Dataset, res: &EstimateResult) -> Option<Vec<f64>> {
    ds.config.as_ref().and_then(|_| ds.project(&res.alpha).ok())
}

fn cmd_estimate(
    input: &str,
    transform: &str,
    init: &str,
    all_minima: bool,
    dim: usize,
    common: &Common,
    out: &mut dyn Write,
) -> Result<i32> {
    let spec: TransformSpec = transform.parse()?;
    let format = resolve_format(input, common, InputFormat::Points);
    let (src, ds) = load(input, format, common, dim)?;
    let init = parse_init(init, common.seed, ds.len())?;
    let opts = estimate_options(common, init.clone())?;

    let mut options = base_options(common, format);
    options.push(("init".into(), format!("{init:?}")));
    if format == InputFormat::Table {
        options.push(("dim".into(), dim.to_string()));
    }
    let man = manifest("estimate", &src, format, &spec.to_string(), options, common.seed);
    let mut body = man.header_line();
    body.push('\n');

    let labels = ds.distances.labels().to_vec();
    let converged = if common.multi_start {
        let mut starts = estimator::default_starts(&ds.weights);
        if !matches!(init, Init::Weights) {
            starts.push(estimator::initial_profile(&ds.weights, &opts.init)?);
        }
        let minima = estimator::multi_start(&ds.distances, &ds.weights, &spec, &opts, Some(&starts))?;
        let k = minima.len();
        let shown = if all_minima { &minima[..] } else { &minima[..1] };
        for r in shown {
            let c = centroid(&ds, r);
            body.push_str(&io::result_record(&spec, r, &labels, c.as_deref(), Some(k), common.pretty));
            body.push('\n');
        }
        minima[0].converged
    } else {
        let r = estimator::estimate(&ds.distances, &ds.weights, &spec, &opts)?;
        let c = centroid(&ds, &r);
        body.push_str(&io::result_record(&spec, &r, &labels, c.as_deref(), None, common.pretty));
        body.push('\n');
        r.converged
    };
    emit(&body, common, out)?;
    Ok(if converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    command: &str,
    input: &str,
    transform: &str,
    grid: &str,
    cold_start: bool,
    dim: usize,
    forced_format: Option<InputFormat>,
    common: &Common,
    out: &mut dyn Write,
) -> Result<i32> {
    let grid = ParamGrid::parse(grid)?;
    let family = SweepFamily::resolve(transform, &grid.param)?;
    let format = forced_format.unwrap_or_else(|| resolve_format(input, common, InputFormat::Points));
    let (src, ds) = load(input, format, common, dim)?;
    let opts = SweepOptions {
        estimate: estimate_options(common, Init::Weights)?,
        cold_start,
        multi_start: common.multi_start,
    };
    let records = diagnostics::sweep(&ds.distances, &ds.weights, family, &grid, &opts, ds.config.as_ref())?;

    let mut options = base_options(common, format);
    options.push(("grid".into(), grid_descriptor(&grid)));
    options.push(("cold_start".into(), cold_start.to_string()));
    if format == InputFormat::Table {
        options.push(("dim".into(), dim.to_string()));
    }
    let family_name = transform.split(':').next().unwrap_or(transform);
    let man = manifest(command, &src, format, family_name, options, common.seed);
    let mut body = man.header_line();
    body.push('\n');
    body.push_str(&io::sweep_tsv(&records, family.param_name(), common.pretty));
    emit(&body, common, out)?;
    Ok(EXIT_OK)
}

fn grid_descriptor(grid: &ParamGrid) -> String {
    let first = grid.values.first().copied().unwrap_or(f64::NAN);
    let last = grid.values.last().copied().unwrap_or(f64::NAN);
    format!("{}:{first:e}..{last:e}/{}", grid.param, grid.values.len())
}

fn cmd_mds(input: &str, dim: usize, common: &Common, out: &mut dyn Write) -> Result<i32> {
    let format = resolve_format(input, common, InputFormat::Dist);
    let (src, ds) = load(input, format, common, dim)?;
    let config = match format {
        InputFormat::Table => ds
            .config
            .clone()
            .ok_or_else(|| Error::NotApplicable("table has no factorial axes".into()))?,
        _ => {
            let cert = geometry::certify_euclidean(&ds.distances, &ds.weights)?;
            if !cert.passed {
                return Err(Error::NonEuclidean {
                    min_eigenvalue: cert.min_eigenvalue,
                    max_eigenvalue: cert.max_eigenvalue,
                });
            }
            let dim = dim.min(ds.len().saturating_sub(1)).max(1);
            geometry::classical_mds(&ds.distances, &ds.weights, dim)?
        }
    };
    let mut options = base_options(common, format);
    options.push(("dim".into(), dim.to_string()));
    let man = manifest("mds", &src, format, "-", options, common.seed);
    let mut body = man.header_line();
    body.push('\n');
    body.push_str(&io::configuration_csv(&config, &ds.weights, common.pretty));
    emit(&body, common, out)?;
    Ok(EXIT_OK)
}

fn cmd_ca(input: &str, dim: usize, common: &Common, out: &mut dyn Write) -> Result<i32> {
    let src = io::load_source(input)?;
    let table = io::read_table(&src.text)?;
    let inertia = ca::ca_inertia(&table)?;
    let ds = Dataset::from_table(&table, dim)?;
    let ds = if common.no_aggregate {
        ds
    } else {
        ds.aggregated(1e-12)?
    };
    let config: Configuration = ds
        .config
        .clone()
        .ok_or_else(|| Error::NotApplicable("table has no factorial axes".into()))?;
    let mut options = base_options(common, InputFormat::Table);
    options.push(("dim".into(), dim.to_string()));
    let man = manifest("ca", &src, InputFormat::Table, "-", options, common.seed);
    let mut body = man.header_line();
    body.push('\n');
    body.push_str(&format!("# total_inertia,{}\n", io::fmt_float(inertia, common.pretty)));
    body.push_str(&io::configuration_csv(&config, &ds.weights, common.pretty));
    emit(&body, common, out)?;
    Ok(EXIT_OK)
}

struct CheckLine {
    name: String,
    passed: bool,
    detail: String,
}

fn cmd_check(
    input: Option<&str>,
    fixture: Option<Fixture>,
    common: &Common,
    out: &mut dyn Write,
) -> Result<i32> {
    let input = input.unwrap_or("@copper");
    let format = resolve_format(input, common, InputFormat::Points);
    let (_, ds) = load(input, format, common, 2)?;
    let mut lines = Vec::new();

    let cert = geometry::certify_euclidean(&ds.distances, &ds.weights)?;
    lines.push(CheckLine {
        name: "psd certification of input distances".into(),
        passed: cert.passed,
        detail: format!(
            "min eigenvalue {:.3e}, max {:.3e}",
            cert.min_eigenvalue, cert.max_eigenvalue
        ),
    });

    let config = match (&ds.config, format) {
        (Some(c), InputFormat::Points) => Some(c.clone()),
        _ => {
            let dim = cert.rank().max(1).min(ds.len().saturating_sub(1).max(1));
            if cert.passed && ds.len() > 1 {
                Some(geometry::classical_mds(&ds.distances, &ds.weights, dim)?)
            } else {
                None
            }
        }
    };
    if let Some(c) = config {
        let h = geometry::verify_huygens(&c, &ds.weights)?;
        let scale = geometry::inertia(&ds.distances, &ds.weights)?.max(1e-300);
        let tol = 1e-10 * scale.max(1.0);
        lines.push(CheckLine {
            name: "huygens weak identity".into(),
            passed: h.weak_deviation <= tol,
            detail: format!("deviation {:.3e}", h.weak_deviation),
        });
        lines.push(CheckLine {
            name: "huygens strong identity".into(),
            passed: h.strong_deviation <= tol,
            detail: format!("deviation {:.3e}", h.strong_deviation),
        });
    }

    let grid: Vec<f64> = (0..200).map(|k| 0.05 + 0.05 * k as f64).collect();
    for spec in transforms::shipped_families() {
        let rep = transforms::verify_schoenberg(&spec, &grid, 4);
        lines.push(schoenberg_line(&spec.to_string(), &rep));
    }
    if let Some(Fixture::Square) = fixture {
        let rep = transforms::verify_schoenberg_fn(|d| d * d, &grid, 4, &[]);
        lines.push(schoenberg_line("fixture:square", &rep));
    }

    let width = lines.iter().map(|l| l.name.len()).max().unwrap_or(0);
    let mut body = String::new();
    for l in &lines {
        body.push_str(&format!(
            "{:<4}  {:<width$}  {}\n",
            if l.passed { "PASS" } else { "FAIL" },
            l.name,
            l.detail
        ));
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    body.push_str(&format!("{} checks, {} failed\n", lines.len(), failed));
    emit(&body, common, out)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_INPUT })
}

fn schoenberg_line(name: &str, rep: &transforms::SchoenbergReport) -> CheckLine {
    let worst = rep
        .derivatives
        .iter()
        .filter(|d| !d.passed)
        .map(|d| format!("order {} violated by {:.3e}", d.order, d.worst_violation))
        .collect::<Vec<_>>();
    CheckLine {
        name: format!("schoenberg signs {name}"),
        passed: rep.passed(),
        detail: if !rep.zero_at_origin {
            format!("phi(0) = {}", rep.origin_value)
        } else if worst.is_empty() {
            "derivative signs alternate".into()
        } else {
            worst.join("; ")
        },
    }
}
