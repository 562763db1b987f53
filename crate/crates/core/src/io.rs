//! CSV input of mortality tables and output of graduation results.
//!
//! Input: header `age,qx[,ex]`, one row per integer age, ages contiguous from 0
//! once sorted. Output: header [`RESULT_HEADER`], one row per age.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{GradError, Result};
use crate::graduation::GraduationResult;
use crate::table::MortalityTable;

pub const RESULT_HEADER: [&str; 8] = [
    "age",
    "obsqx",
    "fitted",
    "exposed",
    "lowerbound",
    "upperbound",
    "residual",
    "propresidual",
];

fn parse_err(path: &Path, row: usize, column: &str, message: impl Into<String>) -> GradError {
    GradError::Parse {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

fn csv_err(path: &Path, source: csv::Error) -> GradError {
    GradError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_age(raw: &str, path: &Path, row: usize) -> Result<usize> {
    raw.parse::<usize>().map_err(|_| {
        let msg = match raw.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => format!("age `{raw}` is not an integer"),
            _ => format!("`{raw}` is not a non-negative integer age"),
        };
        parse_err(path, row, "age", msg)
    })
}

fn parse_number(raw: &str, path: &Path, row: usize, column: &str) -> Result<f64> {
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err(
            path,
            row,
            column,
            format!("`{raw}` is not a finite number"),
        )),
    }
}

/// Reads a mortality table, keeping only ages `<= omega` when `omega` is given.
///
/// Rows above `omega` are dropped before any other validation.
pub fn read_table(path: impl AsRef<Path>, omega: Option<usize>) -> Result<MortalityTable> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let age_col = find("age").ok_or_else(|| parse_err(path, 0, "age", "missing `age` column"))?;
    let qx_col = find("qx").ok_or_else(|| parse_err(path, 0, "qx", "missing `qx` column"))?;
    let ex_col = find("ex");

    let mut rows: Vec<(usize, usize, f64, Option<f64>)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let field = |col: usize, name: &str| {
            rec.get(col)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| parse_err(path, row, name, "missing value"))
        };
        let age = parse_age(field(age_col, "age")?, path, row)?;
        if omega.is_some_and(|w| age > w) {
            continue;
        }
        let qx = parse_number(field(qx_col, "qx")?, path, row, "qx")?;
        if !(0.0..=1.0).contains(&qx) {
            return Err(parse_err(path, row, "qx", format!("rate {qx} is outside [0, 1]")));
        }
        let ex = match ex_col {
            Some(c) => {
                let v = parse_number(field(c, "ex")?, path, row, "ex")?;
                if v <= 0.0 {
                    return Err(parse_err(
                        path,
                        row,
                        "ex",
                        format!("exposure {v} must be positive"),
                    ));
                }
                Some(v)
            }
            None => None,
        };
        rows.push((age, row, qx, ex));
    }

    rows.sort_by_key(|r| r.0);
    for (expected, &(age, row, _, _)) in rows.iter().enumerate() {
        if age != expected {
            let msg = if expected > 0 && age == expected - 1 {
                format!("duplicate age {age}")
            } else {
                format!("ages must be contiguous from 0; age {expected} is missing")
            };
            return Err(parse_err(path, row, "age", msg));
        }
    }
    if rows.is_empty() {
        return Err(GradError::Validation(format!("{}: no data rows", path.display())));
    }
    if let Some(w) = omega {
        if rows.len() <= w {
            return Err(GradError::Validation(format!(
                "{}: omega {w} exceeds the highest age {} in the file",
                path.display(),
                rows.len() - 1
            )));
        }
    }
    let rates = rows.iter().map(|r| r.2).collect();
    let exposures = ex_col.map(|_| rows.iter().map(|r| r.3.unwrap()).collect());
    MortalityTable::new(rates, exposures)
}

/// Scientific notation with at least 9 significant digits that parses back to
/// the same `f64`.
fn num(v: f64) -> String {
    let shortest = format!("{v:e}");
    let digits = shortest
        .split('e')
        .next()
        .unwrap_or("")
        .chars()
        .filter(char::is_ascii_digit)
        .count();
    if digits >= 9 || !v.is_finite() {
        shortest
    } else {
        format!("{v:.8e}")
    }
}

fn opt_num(v: Option<&Vec<f64>>, i: usize) -> String {
    v.map(|v| num(v[i])).unwrap_or_default()
}

/// Renders the result table as CSV text.
pub fn result_csv(result: &GraduationResult, table: &MortalityTable) -> String {
    let mut out = RESULT_HEADER.join(",");
    out.push('\n');
    for age in 0..=table.omega() {
        let exposed = table
            .exposures()
            .map(|e| format!("{}", e[age]))
            .unwrap_or_default();
        let fields = [
            age.to_string(),
            num(table.crude_rates()[age]),
            num(result.fitted[age]),
            exposed,
            opt_num(result.lower.as_ref(), age),
            opt_num(result.upper.as_ref(), age),
            num(result.residuals[age]),
            num(result.prop_residuals[age]),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_result(result: &GraduationResult, table: &MortalityTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if result.fitted.len() != table.len() {
        return Err(GradError::Domain(format!(
            "result covers {} ages but the table has {}",
            result.fitted.len(),
            table.len()
        )));
    }
    let io_err = |source| GradError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = File::create(path).map_err(io_err)?;
    f.write_all(result_csv(result, table).as_bytes()).map_err(io_err)
}

/// One parsed line of a result file.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub age: usize,
    pub obsqx: f64,
    pub fitted: f64,
    pub exposed: Option<f64>,
    pub lowerbound: Option<f64>,
    pub upperbound: Option<f64>,
    pub residual: f64,
    pub propresidual: f64,
}

pub fn read_result(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?;
    if headers.iter().ne(RESULT_HEADER) {
        return Err(parse_err(
            path,
            0,
            "header",
            format!("expected `{}`", RESULT_HEADER.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let req = |c: usize| {
            rec[c].parse::<f64>().map_err(|_| {
                parse_err(
                    path,
                    row,
                    RESULT_HEADER[c],
                    format!("`{}` is not a number", &rec[c]),
                )
            })
        };
        let opt = |c: usize| {
            if rec[c].is_empty() {
                Ok(None)
            } else {
                req(c).map(Some)
            }
        };
        rows.push(ResultRow {
            age: parse_age(&rec[0], path, row)?,
            obsqx: req(1)?,
            fitted: req(2)?,
            exposed: opt(3)?,
            lowerbound: opt(4)?,
            upperbound: opt(5)?,
            residual: req(6)?,
            propresidual: req(7)?,
        });
    }
    Ok(rows)
}
