//! CSV formats: datasets (`y,x1,…,xd`), prediction matrices
//! (`y,<learner_1>,…`), query files (learner columns, optional `y`),
//! prediction output and tuning traces (`iter,h,loss,grad`).

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::aggregate::{Prediction, PredictionMatrix};
use crate::error::{Error, Result};
use crate::simulate::Dataset;
use crate::tuning::TracePoint;

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn read_table<R: Read>(source: R, what: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::data(format!("{what}: missing header row")));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parsed = record
            .iter()
            .enumerate()
            .map(|(c, field)| {
                field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    Error::data(format!(
                        "{what}: row {} column `{}` is not a finite number: `{field}`",
                        line + 2,
                        header.get(c).map(String::as_str).unwrap_or("?")
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(parsed);
    }
    if rows.is_empty() {
        return Err(Error::data(format!("{what}: no data rows")));
    }
    Ok(Table { header, rows })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::data(format!("cannot open {}: {e}", path.display())))
}

fn y_first(t: &Table, what: &str) -> Result<()> {
    if t.header[0] != "y" {
        return Err(Error::data(format!("{what}: first column must be `y`, found `{}`", t.header[0])));
    }
    if t.header.len() < 2 {
        return Err(Error::data(format!("{what}: needs at least one column besides `y`")));
    }
    Ok(())
}

fn split_y(t: &Table) -> (DMatrix<f64>, DVector<f64>) {
    let n = t.rows.len();
    let x = DMatrix::from_fn(n, t.header.len() - 1, |i, j| t.rows[i][j + 1]);
    let y = DVector::from_fn(n, |i, _| t.rows[i][0]);
    (x, y)
}

/// Reads `y,<learner_1>,…,<learner_M>`.
pub fn read_prediction_matrix<R: Read>(source: R) -> Result<PredictionMatrix> {
    let t = read_table(source, "prediction matrix")?;
    y_first(&t, "prediction matrix")?;
    let (x, y) = split_y(&t);
    PredictionMatrix::new(x, y, t.header[1..].to_vec())
}

pub fn load_prediction_matrix(path: impl AsRef<Path>) -> Result<PredictionMatrix> {
    read_prediction_matrix(open(path.as_ref())?)
}

/// Reads a query file and returns its rows in the order of `learners`,
/// plus the `y` column when present. Extra columns are an error.
pub fn read_queries<R: Read>(source: R, learners: &[String]) -> Result<(DMatrix<f64>, Option<DVector<f64>>)> {
    let t = read_table(source, "query file")?;
    let find = |name: &str| t.header.iter().position(|h| h == name);
    let cols = learners
        .iter()
        .map(|name| find(name).ok_or_else(|| Error::data(format!("query file: missing learner column `{name}`"))))
        .collect::<Result<Vec<usize>>>()?;
    let y_col = find("y");
    let expected = learners.len() + usize::from(y_col.is_some());
    if t.header.len() != expected {
        return Err(Error::data(format!(
            "query file: expected columns {} (and optionally y), found {}",
            learners.join(","),
            t.header.join(",")
        )));
    }
    let n = t.rows.len();
    let x = DMatrix::from_fn(n, cols.len(), |i, j| t.rows[i][cols[j]]);
    let y = y_col.map(|c| DVector::from_fn(n, |i, _| t.rows[i][c]));
    Ok((x, y))
}

pub fn load_queries(path: impl AsRef<Path>, learners: &[String]) -> Result<(DMatrix<f64>, Option<DVector<f64>>)> {
    read_queries(open(path.as_ref())?, learners)
}

/// Reads `y,x1,…,xd`; feature column names are not checked.
pub fn read_dataset<R: Read>(source: R) -> Result<Dataset> {
    let t = read_table(source, "dataset")?;
    y_first(&t, "dataset")?;
    let (x, y) = split_y(&t);
    Ok(Dataset { x, y })
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    read_dataset(open(path.as_ref())?)
}

fn write_rows<W: Write>(out: W, header: Vec<String>, rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for r in rows {
        w.write_record(r.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

fn with_y(y: Option<&DVector<f64>>, x: &DMatrix<f64>, i: usize) -> Vec<f64> {
    y.map(|y| y[i]).into_iter().chain(x.row(i).iter().copied()).collect()
}

pub fn write_dataset<W: Write>(out: W, data: &Dataset) -> Result<()> {
    let header = std::iter::once("y".to_string())
        .chain((1..=data.x.ncols()).map(|j| format!("x{j}")))
        .collect();
    write_rows(out, header, (0..data.len()).map(|i| with_y(Some(&data.y), &data.x, i)))
}

pub fn write_prediction_matrix<W: Write>(out: W, pm: &PredictionMatrix) -> Result<()> {
    write_queries(out, pm.learner_names(), pm.rows(), Some(pm.responses()))
}

/// Learner columns, preceded by `y` when given.
pub fn write_queries<W: Write>(out: W, learners: &[String], rows: &DMatrix<f64>, y: Option<&DVector<f64>>) -> Result<()> {
    let header = y.map(|_| "y".to_string()).into_iter().chain(learners.iter().cloned()).collect();
    write_rows(out, header, (0..rows.nrows()).map(|i| with_y(y, rows, i)))
}

/// `prediction,zero_mass`, plus `y` when the truths are known.
pub fn write_predictions<W: Write>(out: W, pred: &Prediction, y: Option<&DVector<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["prediction", "zero_mass"];
    if y.is_some() {
        header.push("y");
    }
    w.write_record(&header)?;
    for (i, (v, z)) in pred.values.iter().zip(&pred.zero_mass).enumerate() {
        let mut rec = vec![v.to_string(), u8::from(*z).to_string()];
        if let Some(y) = y {
            rec.push(y[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `iter,h,loss,grad`; `grad` is empty for grid evaluations.
pub fn write_trace<W: Write>(out: W, trace: &[TracePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "h", "loss", "grad"])?;
    for p in trace {
        w.write_record([
            p.iter.to_string(),
            p.h.to_string(),
            p.loss.to_string(),
            p.grad.map(|g| g.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
