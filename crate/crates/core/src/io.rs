//! CSV/TSV readers and writers, float formatting and run manifests.
//!
//! Lines starting with `#` are comments in every input format, so files
//! written by the CLI (which start with a manifest line) read back cleanly.

use crate::ca::ContingencyTable;
use crate::data::{self, Dataset};
use crate::diagnostics::SweepRecord;
use crate::error::{Error, Result};
use crate::estimator::{EstimateResult, Regime};
use crate::geometry::{Configuration, SquaredDistanceMatrix, Weights};
use crate::transforms::TransformSpec;
use nalgebra::DMatrix;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

/// Input layouts accepted by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    /// Header row, coordinate columns, optional label and weight columns.
    #[default]
    Points,
    /// Square matrix of squared distances, optional header and label column.
    Dist,
    /// Contingency table: header of column labels, first column row labels.
    Table,
}

impl InputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            InputFormat::Points => "points",
            InputFormat::Dist => "dist",
            InputFormat::Table => "table",
        }
    }
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "points" => Ok(InputFormat::Points),
            "dist" => Ok(InputFormat::Dist),
            "table" => Ok(InputFormat::Table),
            other => Err(Error::Parse(format!("unknown format `{other}`"))),
        }
    }
}

/// Raw text of an input plus what it was called.
#[derive(Debug, Clone)]
pub struct Source {
    pub name: String,
    pub text: String,
}

impl Source {
    /// Hex SHA-256 of the text.
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.text.as_bytes()))
    }
}

/// Loads a path, or a built-in dataset (`@copper`, `@synthetic-ca`).
pub fn load_source(name: &str) -> Result<Source> {
    let text = match name {
        "@copper" => data::copper_csv(),
        "@synthetic-ca" => table_csv(&data::synthetic_ca_table(), false),
        s if s.starts_with('@') => {
            return Err(Error::Io(format!(
                "unknown built-in dataset `{s}` (available: @copper, @synthetic-ca)"
            )))
        }
        path => std::fs::read_to_string(Path::new(path))
            .map_err(|e| Error::Io(format!("{path}: {e}")))?,
    };
    Ok(Source {
        name: name.to_string(),
        text,
    })
}

/// The format a built-in dataset uses, if `name` is one.
pub fn builtin_format(name: &str) -> Option<InputFormat> {
    match name {
        "@copper" => Some(InputFormat::Points),
        "@synthetic-ca" => Some(InputFormat::Table),
        _ => None,
    }
}

struct Row {
    line: u64,
    cells: Vec<String>,
}

fn read_rows(text: &str) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::Parse(format!("line {line}: {e}"))
        })?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        rows.push(Row {
            line,
            cells: rec.iter().map(str::to_string).collect(),
        });
    }
    if rows.is_empty() {
        return Err(Error::Parse("input contains no data".into()));
    }
    Ok(rows)
}

fn parse_cell(cell: &str, line: u64, column: &str) -> Result<f64> {
    let v: f64 = cell
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: column `{column}`: `{cell}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!(
            "line {line}: column `{column}`: `{cell}` is not finite"
        )));
    }
    Ok(v)
}

fn is_numeric(cell: &str) -> bool {
    cell.parse::<f64>().is_ok()
}

fn is_label_name(name: &str) -> bool {
    matches!(
        name.to_ascii_lowercase().as_str(),
        "" | "label" | "id" | "name" | "row"
    )
}

/// Reads a points CSV. Weights come from `weights_col` (default `w`) when
/// present and are normalised; otherwise they are uniform.
pub fn read_points(text: &str, weights_col: Option<&str>) -> Result<(Configuration, Weights)> {
    let rows = read_rows(text)?;
    let header = &rows[0];
    let wname = weights_col.unwrap_or("w");
    let w_idx = header.cells.iter().position(|c| c == wname);
    if weights_col.is_some() && w_idx.is_none() {
        return Err(Error::Parse(format!(
            "line {}: weight column `{wname}` not found in header",
            header.line
        )));
    }
    let label_idx = header.cells.iter().position(|c| is_label_name(c));
    let coord_idx: Vec<usize> = (0..header.cells.len())
        .filter(|&k| Some(k) != w_idx && Some(k) != label_idx)
        .collect();
    if coord_idx.is_empty() {
        return Err(Error::Parse(format!(
            "line {}: header has no coordinate columns",
            header.line
        )));
    }
    let body = &rows[1..];
    if body.is_empty() {
        return Err(Error::Parse("points file has a header but no rows".into()));
    }
    let mut coords = DMatrix::zeros(body.len(), coord_idx.len());
    let mut weights = Vec::with_capacity(body.len());
    let mut labels = Vec::with_capacity(body.len());
    for (i, row) in body.iter().enumerate() {
        if row.cells.len() != header.cells.len() {
            return Err(Error::Parse(format!(
                "line {}: expected {} fields, found {}",
                row.line,
                header.cells.len(),
                row.cells.len()
            )));
        }
        for (k, &c) in coord_idx.iter().enumerate() {
            coords[(i, k)] = parse_cell(&row.cells[c], row.line, &header.cells[c])?;
        }
        if let Some(wi) = w_idx {
            let v = parse_cell(&row.cells[wi], row.line, wname)?;
            if v <= 0.0 {
                return Err(Error::Parse(format!(
                    "line {}: weight must be positive, got {v}",
                    row.line
                )));
            }
            weights.push(v);
        }
        labels.push(match label_idx {
            Some(li) => row.cells[li].clone(),
            None => (i + 1).to_string(),
        });
    }
    let w = if w_idx.is_some() {
        Weights::normalized(weights)?
    } else {
        Weights::uniform(body.len())
    };
    Ok((Configuration::new(coords, labels)?, w))
}

/// Reads a square distance CSV with optional header row and label column.
/// A header may also name a weight column (`weights_col`, default `w`).
pub fn read_distances(
    text: &str,
    weights_col: Option<&str>,
) -> Result<(SquaredDistanceMatrix, Weights)> {
    let rows = read_rows(text)?;
    let has_header = rows[0].cells.iter().skip(1).any(|c| !is_numeric(c))
        || (!rows[0].cells.is_empty() && rows[0].cells[0].is_empty());
    let (header, body) = if has_header {
        (Some(&rows[0]), &rows[1..])
    } else {
        (None, &rows[..])
    };
    let n = body.len();
    if n == 0 {
        return Err(Error::Parse("distance file has no rows".into()));
    }
    let wname = weights_col.unwrap_or("w");
    let w_idx = header.and_then(|h| h.cells.iter().position(|c| c == wname));
    if weights_col.is_some() && w_idx.is_none() {
        return Err(Error::Parse(format!("weight column `{wname}` not found in header")));
    }
    let mut d = DMatrix::zeros(n, n);
    let mut labels = Vec::with_capacity(n);
    let mut weights = Vec::new();
    for (i, row) in body.iter().enumerate() {
        let mut cells: Vec<&str> = row.cells.iter().map(String::as_str).collect();
        if let Some(wi) = w_idx {
            if wi >= cells.len() {
                return Err(Error::Parse(format!("line {}: missing weight field", row.line)));
            }
            let v = parse_cell(cells.remove(wi), row.line, wname)?;
            if v <= 0.0 {
                return Err(Error::Parse(format!(
                    "line {}: weight must be positive, got {v}",
                    row.line
                )));
            }
            weights.push(v);
        }
        let values = if cells.len() == n + 1 {
            labels.push(cells[0].to_string());
            &cells[1..]
        } else if cells.len() == n {
            labels.push((i + 1).to_string());
            &cells[..]
        } else {
            return Err(Error::Parse(format!(
                "line {}: expected {n} distances (plus optional label), found {} fields",
                row.line,
                cells.len()
            )));
        };
        for (j, cell) in values.iter().enumerate() {
            d[(i, j)] = parse_cell(cell, row.line, &format!("{}", j + 1))?;
        }
    }
    let dist = SquaredDistanceMatrix::new(d, labels)?;
    let w = if w_idx.is_some() {
        Weights::normalized(weights)?
    } else {
        Weights::uniform(n)
    };
    Ok((dist, w))
}

/// Reads a contingency CSV strictly: every cell numeric and nonnegative.
pub fn read_table(text: &str) -> Result<ContingencyTable> {
    let rows = read_rows(text)?;
    let header = &rows[0];
    if header.cells.len() < 2 {
        return Err(Error::Parse(format!(
            "line {}: header needs a label cell plus at least one column",
            header.line
        )));
    }
    let col_labels: Vec<String> = header.cells[1..].to_vec();
    let m = col_labels.len();
    let body = &rows[1..];
    if body.is_empty() {
        return Err(Error::Parse("table has a header but no rows".into()));
    }
    let mut counts = DMatrix::zeros(body.len(), m);
    let mut row_labels = Vec::with_capacity(body.len());
    for (i, row) in body.iter().enumerate() {
        if row.cells.len() != m + 1 {
            return Err(Error::Parse(format!(
                "line {}: expected {} fields, found {}",
                row.line,
                m + 1,
                row.cells.len()
            )));
        }
        row_labels.push(row.cells[0].clone());
        for j in 0..m {
            let v = parse_cell(&row.cells[j + 1], row.line, &col_labels[j])?;
            if v < 0.0 {
                return Err(Error::Parse(format!(
                    "line {}: column `{}`: negative count {v}",
                    row.line, col_labels[j]
                )));
            }
            counts[(i, j)] = v;
        }
    }
    ContingencyTable::new(counts, row_labels, col_labels)
}

/// Parses a source into a dataset. Table inputs get factorial coordinates on
/// `dim` axes.
pub fn parse_dataset(
    text: &str,
    format: InputFormat,
    weights_col: Option<&str>,
    dim: usize,
) -> Result<Dataset> {
    match format {
        InputFormat::Points => {
            let (c, w) = read_points(text, weights_col)?;
            Dataset::from_points(c, w)
        }
        InputFormat::Dist => {
            let (d, w) = read_distances(text, weights_col)?;
            Dataset::from_distances(d, w)
        }
        InputFormat::Table => Dataset::from_table(&read_table(text)?, dim),
    }
}

/// Full precision (17 significant digits) or, with `pretty`, six decimals.
pub fn fmt_float(x: f64, pretty: bool) -> String {
    if pretty {
        format!("{x:.6}")
    } else if x == 0.0 {
        // Avoid `-0e0` and keep zero stable.
        "0.0000000000000000e0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>, pretty: bool) -> String {
    x.map(|v| fmt_float(v, pretty)).unwrap_or_else(|| "NA".into())
}

fn join_floats(xs: &[f64], pretty: bool) -> String {
    xs.iter()
        .map(|&v| fmt_float(v, pretty))
        .collect::<Vec<_>>()
        .join(",")
}

/// Provenance line written at the top of every output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub input: String,
    pub format: String,
    pub sha256: String,
    pub transform: String,
    pub options: Vec<(String, String)>,
    pub seed: u64,
    pub version: String,
}

impl RunManifest {
    pub fn header_line(&self) -> String {
        let opts = self
            .options
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "# schoenloc manifest\tcommand={}\tinput={}\tformat={}\tsha256={}\ttransform={}\toptions={}\tseed={}\tversion={}",
            self.command,
            self.input,
            self.format,
            self.sha256,
            self.transform,
            opts,
            self.seed,
            self.version
        )
    }
}

/// One tab-separated `key=value` line describing an estimate.
pub fn result_record(
    spec: &TransformSpec,
    result: &EstimateResult,
    labels: &[String],
    centroid: Option<&[f64]>,
    n_minima: Option<usize>,
    pretty: bool,
) -> String {
    let transform = spec.to_string();
    let params = transform.split_once(':').map(|(_, p)| p).unwrap_or("");
    let mut s = String::new();
    let _ = write!(
        s,
        "transform={transform}\tparams={}\tregime={}",
        if params.is_empty() { "-" } else { params },
        result.regime.label()
    );
    if let Regime::Concentrated(i0) = result.regime {
        let _ = write!(s, "\tat={}", labels.get(i0).map(String::as_str).unwrap_or("?"));
    }
    let _ = write!(
        s,
        "\tgamma={}\tentropy={}\tstrain={}\titerations={}\tconverged={}",
        fmt_float(result.gamma, pretty),
        fmt_float(result.entropy, pretty),
        fmt_opt(result.strain, pretty),
        result.iterations,
        result.converged
    );
    if let Some(st) = &result.stability {
        let _ = write!(
            s,
            "\tstable={}\tstability_lhs={}\tdirectional_min={}",
            st.stable,
            fmt_float(st.sufficient_lhs, pretty),
            fmt_float(st.directional_min, pretty)
        );
    }
    if let Some(k) = n_minima {
        let _ = write!(s, "\tn_minima={k}");
    }
    if let Some(c) = centroid {
        let _ = write!(s, "\tcentroid={}", join_floats(c, pretty));
    }
    let _ = write!(s, "\talpha={}", join_floats(result.alpha.as_slice(), pretty));
    s
}

/// Parses a record line back into its `key=value` fields.
pub fn parse_record(line: &str) -> Vec<(String, String)> {
    line.trim_end()
        .split('\t')
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Sweep records as TSV (header plus one row per grid point).
pub fn sweep_tsv(records: &[SweepRecord], param_name: &str, pretty: bool) -> String {
    let dims = records
        .iter()
        .filter_map(|r| r.projection.as_ref().map(Vec::len))
        .max()
        .unwrap_or(0);
    let mut s = String::new();
    s.push_str(param_name);
    s.push_str("\tgamma\tentropy\tstrain\tregime\titerations\tconverged");
    for k in 1..=dims {
        let _ = write!(s, "\tproj_{k}");
    }
    s.push_str("\tbranch\tn_minima\terror\n");
    for r in records {
        let _ = write!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            fmt_float(r.param, pretty),
            fmt_float(r.gamma, pretty),
            fmt_float(r.entropy, pretty),
            fmt_opt(r.strain, pretty),
            r.regime.label(),
            r.iterations,
            r.converged
        );
        for k in 0..dims {
            let v = r.projection.as_ref().and_then(|p| p.get(k).copied());
            let _ = write!(s, "\t{}", fmt_opt(v, pretty));
        }
        let _ = writeln!(
            s,
            "\t{}\t{}\t{}",
            match r.branch {
                crate::diagnostics::Branch::Warm => "warm",
                crate::diagnostics::Branch::Cold => "cold",
            },
            r.n_minima.map(|k| k.to_string()).unwrap_or_else(|| "NA".into()),
            r.error.as_deref().unwrap_or("-").replace('\t', " ")
        );
    }
    s
}

/// Coordinates as CSV: `label,dim_1..dim_p,w`, followed by an
/// `explained_inertia` row when eigenvalues are known.
pub fn configuration_csv(config: &Configuration, w: &Weights, pretty: bool) -> String {
    let p = config.dim();
    let mut s = String::from("label");
    for k in 1..=p {
        let _ = write!(s, ",dim_{k}");
    }
    s.push_str(",w\n");
    for i in 0..config.len() {
        s.push_str(&csv_field(&config.labels[i]));
        for k in 0..p {
            let _ = write!(s, ",{}", fmt_float(config.coords[(i, k)], pretty));
        }
        let _ = writeln!(s, ",{}", fmt_float(w.as_slice()[i], pretty));
    }
    if let Some(ex) = config.explained_inertia() {
        s.push_str("# explained_inertia");
        for v in ex.iter().take(p) {
            let _ = write!(s, ",{}", fmt_float(*v, pretty));
        }
        s.push('\n');
    }
    s
}

/// A contingency table as CSV.
pub fn table_csv(table: &ContingencyTable, pretty: bool) -> String {
    let mut s = String::from("label");
    for c in table.col_labels() {
        s.push(',');
        s.push_str(&csv_field(c));
    }
    s.push('\n');
    for (i, r) in table.row_labels().iter().enumerate() {
        s.push_str(&csv_field(r));
        for j in 0..table.ncols() {
            let v = table.counts()[(i, j)];
            if v.fract() == 0.0 && v.abs() < 1e15 && !pretty {
                let _ = write!(s, ",{}", v as i64);
            } else {
                let _ = write!(s, ",{}", fmt_float(v, pretty));
            }
        }
        s.push('\n');
    }
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
