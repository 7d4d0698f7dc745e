//! File formats: CSV data, uniform-scale CSV, likelihood-surface matrices
//! and JSON artifacts.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use evdep::simulate::experiment::fmt17;

use crate::error::CliError;

/// Current version of every JSON artifact written by the tool.
pub const SCHEMA_VERSION: u32 = 1;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| CliError::Data(format!("reading stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("reading {}: {e}", path.display())))
}

/// Write to `path`, or to stdout when it is absent or `-`.
pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::write(p, text).map_err(|e| CliError::Data(format!("writing {}: {e}", p.display())))
        }
        _ => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Data(format!("writing stdout: {e}"))),
    }
}

/// Numeric table from CSV text. A first row with any non-numeric cell is
/// taken as a header; every later row must be fully numeric.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

pub fn parse_csv(text: &str) -> Result<Table, CliError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut header = None;
    let mut rows = Vec::new();
    let mut width = None;
    for (k, rec) in reader.records().enumerate() {
        let line = k + 1;
        let rec = rec.map_err(|e| CliError::Data(format!("line {line}: {e}")))?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        let parsed: Vec<Option<f64>> = rec.iter().map(|c| c.parse::<f64>().ok()).collect();
        if k == 0 && parsed.iter().any(Option::is_none) {
            header = Some(rec.iter().map(str::to_string).collect());
            continue;
        }
        if let Some(col) = parsed.iter().position(Option::is_none) {
            return Err(CliError::Data(format!("line {line}, column {}: not a number: {:?}", col + 1, &rec[col])));
        }
        let row: Vec<f64> = parsed.into_iter().map(|v| v.expect("checked")).collect();
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(CliError::Data(format!("line {line}, column {}: value is not finite", j + 1)));
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(CliError::Data(format!("line {line}: expected {w} columns, found {}", row.len())));
            }
            _ => {}
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Pairs from two 1-based columns of a table.
pub fn select_pairs(table: &Table, columns: [usize; 2]) -> Result<Vec<[f64; 2]>, CliError> {
    let Some(width) = table.rows.first().map(Vec::len) else {
        return Err(CliError::Data("the data file has no rows".into()));
    };
    for c in columns {
        if c == 0 || c > width {
            return Err(CliError::Usage(format!("column {c} is out of range for a {width}-column table")));
        }
    }
    Ok(table.rows.iter().map(|r| [r[columns[0] - 1], r[columns[1] - 1]]).collect())
}

/// `header` then one row per record, reals with 17 significant digits.
pub fn format_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&v| fmt17(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Likelihood surface: first line `lambda\alpha,a1,...,am`, then one line
/// `l_i,v_i1,...,v_im` per `λ`. Non-finite cells are written as `inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

const SURFACE_CORNER: &str = "lambda\\alpha";

pub fn format_surface(s: &Surface) -> String {
    let mut out = String::from(SURFACE_CORNER);
    for &a in &s.alphas {
        out.push(',');
        out.push_str(&fmt17(a));
    }
    out.push('\n');
    for (l, row) in s.lambdas.iter().zip(&s.values) {
        out.push_str(&fmt17(*l));
        for &v in row {
            out.push(',');
            out.push_str(&if v.is_finite() { fmt17(v) } else { "inf".to_string() });
        }
        out.push('\n');
    }
    out
}

pub fn parse_surface(text: &str) -> Result<Surface, CliError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).enumerate();
    let bad = |line: usize, msg: &str| CliError::Data(format!("surface line {}: {msg}", line + 1));
    let num = |line: usize, c: &str| c.trim().parse::<f64>().map_err(|_| bad(line, &format!("not a number: {c:?}")));
    let (_, head) = lines.next().ok_or_else(|| bad(0, "empty file"))?;
    let mut cells = head.split(',');
    if cells.next().map(str::trim) != Some(SURFACE_CORNER) {
        return Err(bad(0, "missing grid header"));
    }
    let alphas = cells.map(|c| num(0, c)).collect::<Result<Vec<_>, _>>()?;
    let (mut lambdas, mut values) = (Vec::new(), Vec::new());
    for (i, line) in lines {
        let mut cells = line.split(',');
        lambdas.push(num(i, cells.next().unwrap_or(""))?);
        let row = cells.map(|c| num(i, c)).collect::<Result<Vec<_>, _>>()?;
        if row.len() != alphas.len() {
            return Err(bad(i, "row length does not match the alpha grid"));
        }
        values.push(row);
    }
    Ok(Surface { lambdas, alphas, values })
}

/// Grid from `start:stop:count` (inclusive, evenly spaced) or a comma list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("invalid grid {spec:?}: use start:stop:count or a comma list"));
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(CliError::Usage("grid is empty".into()));
    }
    let grid = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        match n {
            0 => return Err(CliError::Usage("grid is empty".into())),
            1 => vec![a],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        spec.split(',').map(|c| c.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(grid)
}

pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(format!("serializing output: {e}")))?;
    s.push('\n');
    Ok(s)
}
