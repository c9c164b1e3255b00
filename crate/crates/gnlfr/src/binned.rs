//! Histogram tables and plain vector tables.
//!
//! Binned format: a first line `edges,e0,e1,…,eK`, then one line
//! `id,c1,…,cK` per subject. Vector format: a header `id,name1,…,nameP`, then
//! one line of numbers per subject.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use gnlfr_core::metric::{MetricObject, ProbGrid, QuantileObject};

use crate::error::{AppError, AppResult};

/// One subject's histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedTable {
    pub id: String,
    pub edges: Vec<f64>,
    pub counts: Vec<f64>,
}

impl BinnedTable {
    /// Quantiles of the distribution that is uniform within each bin.
    pub fn to_quantile(&self, grid: &ProbGrid) -> gnlfr_core::Result<QuantileObject> {
        let total: f64 = self.counts.iter().sum();
        let mut cdf = Vec::with_capacity(self.edges.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        for c in &self.counts {
            acc += c;
            cdf.push(acc / total);
        }
        let values = grid
            .points()
            .iter()
            .map(|&u| {
                // first bin whose upper CDF reaches u; empty bins are skipped
                let k = cdf[1..].partition_point(|&f| f < u).min(self.counts.len() - 1);
                let (f0, f1) = (cdf[k], cdf[k + 1]);
                let t = if f1 > f0 { ((u - f0) / (f1 - f0)).clamp(0.0, 1.0) } else { 0.0 };
                self.edges[k] + t * (self.edges[k + 1] - self.edges[k])
            })
            .collect();
        QuantileObject::new(grid.clone(), values)
    }
}

fn reader(path: &Path) -> AppResult<File> {
    File::open(path).map_err(|source| AppError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input)
}

fn numbers(record: &csv::StringRecord, path: &Path, line: u64, what: &str) -> AppResult<Vec<f64>> {
    record
        .iter()
        .skip(1)
        .enumerate()
        .map(|(k, field)| {
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| AppError::parse(path, line, format!("{what} column {}: '{field}' is not a finite number", k + 1)))
        })
        .collect()
}

/// Reads a binned CSV. `path` is only used in error messages.
pub fn parse_binned<R: Read>(input: R, path: &Path) -> AppResult<Vec<BinnedTable>> {
    let mut rdr = csv_reader(input);
    let mut records = rdr.records();
    let first = match records.next() {
        Some(r) => r.map_err(|e| csv_parse_error(e, path))?,
        None => return Err(AppError::parse(path, 1, "empty file")),
    };
    let line = first.position().map_or(1, |p| p.line());
    if first.get(0) != Some("edges") {
        return Err(AppError::parse(path, line, "first line must start with 'edges'"));
    }
    let edges = numbers(&first, path, line, "edge")?;
    if edges.len() < 2 {
        return Err(AppError::parse(path, line, "need at least two bin edges"));
    }
    if let Some(k) = edges.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(AppError::parse(path, line, format!("bin edges must increase strictly (edge {})", k + 1)));
    }

    let mut out: Vec<BinnedTable> = Vec::new();
    for record in records {
        let record = record.map_err(|e| csv_parse_error(e, path))?;
        let line = record.position().map_or(0, |p| p.line());
        let id = record.get(0).unwrap_or_default().to_string();
        if id.is_empty() {
            return Err(AppError::parse(path, line, "missing row id"));
        }
        let fields = record.iter().skip(1).filter(|f| !f.is_empty()).count();
        if fields == 0 {
            return Err(AppError::parse(path, line, format!("row '{id}' has no counts")));
        }
        if record.len() - 1 != edges.len() - 1 {
            return Err(AppError::parse(
                path,
                line,
                format!("row '{id}' has {} counts but there are {} bins", record.len() - 1, edges.len() - 1),
            ));
        }
        let counts = numbers(&record, path, line, &format!("row '{id}' count"))?;
        if let Some(k) = counts.iter().position(|c| *c < 0.0) {
            return Err(AppError::parse(path, line, format!("row '{id}' has a negative count in bin {}", k + 1)));
        }
        if !(counts.iter().sum::<f64>() > 0.0) {
            return Err(AppError::parse(path, line, format!("row '{id}' has zero total count")));
        }
        out.push(BinnedTable {
            id,
            edges: edges.clone(),
            counts,
        });
    }
    if out.is_empty() {
        return Err(AppError::parse(path, line, "no subject rows after the edges line"));
    }
    Ok(out)
}

fn csv_parse_error(e: csv::Error, path: &Path) -> AppError {
    let line = e.position().map_or(0, |p| p.line());
    AppError::parse(path, line, e.to_string())
}

/// Reads a binned CSV file and converts every row to quantiles on `grid`.
pub fn ingest_binned(path: &Path, grid: &ProbGrid) -> AppResult<Vec<(String, QuantileObject)>> {
    let tables = parse_binned(reader(path)?, path)?;
    tables
        .into_iter()
        .map(|t| {
            let q = t.to_quantile(grid)?;
            Ok((t.id, q))
        })
        .collect()
}

pub fn write_binned<W: Write>(out: W, tables: &[BinnedTable]) -> AppResult<()> {
    let first = tables
        .first()
        .ok_or_else(|| AppError::Output("no histograms to write".into()))?;
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let mut head = vec!["edges".to_string()];
    head.extend(first.edges.iter().map(|e| e.to_string()));
    w.write_record(&head)?;
    for t in tables {
        if t.edges != first.edges {
            return Err(AppError::Output(format!("histogram '{}' uses different edges", t.id)));
        }
        let mut row = vec![t.id.clone()];
        row.extend(t.counts.iter().map(|c| c.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a vector table with an `id,…` header.
pub fn parse_vectors<R: Read>(input: R, path: &Path) -> AppResult<Vec<(String, Vec<f64>)>> {
    let mut rdr = csv_reader(input);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_parse_error(e, path))?,
        None => return Err(AppError::parse(path, 1, "empty file")),
    };
    let width = header.len();
    if width < 2 {
        return Err(AppError::parse(path, 1, "header needs an id column and at least one value column"));
    }
    let mut out = Vec::new();
    for record in records {
        let record = record.map_err(|e| csv_parse_error(e, path))?;
        let line = record.position().map_or(0, |p| p.line());
        let id = record.get(0).unwrap_or_default().to_string();
        if record.len() != width {
            return Err(AppError::parse(
                path,
                line,
                format!("row '{id}' has {} fields, header has {width}", record.len()),
            ));
        }
        out.push((id.clone(), numbers(&record, path, line, &format!("row '{id}'"))?));
    }
    if out.is_empty() {
        return Err(AppError::parse(path, 1, "no data rows"));
    }
    Ok(out)
}

pub fn write_vectors<W: Write>(out: W, names: &[&str], rows: &[(String, Vec<f64>)]) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut head = vec!["id"];
    head.extend_from_slice(names);
    w.write_record(&head)?;
    for (id, v) in rows {
        let mut row = vec![id.clone()];
        row.extend(v.iter().map(|x| x.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads either format, telling them apart by the first field of the file.
/// Histograms become quantile objects on `grid`, vector rows Euclidean points.
pub fn read_objects(path: &Path, grid: &ProbGrid) -> AppResult<Vec<(String, MetricObject)>> {
    let mut text = String::new();
    reader(path)?
        .read_to_string(&mut text)
        .map_err(|source| AppError::Read {
            path: path.to_path_buf(),
            source,
        })?;
    let binned = text
        .lines()
        .find(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .is_some_and(|l| l.split(',').next().map(str::trim) == Some("edges"));
    if binned {
        parse_binned(text.as_bytes(), path)?
            .into_iter()
            .map(|t| Ok((t.id.clone(), t.to_quantile(grid)?.into())))
            .collect()
    } else {
        Ok(parse_vectors(text.as_bytes(), path)?
            .into_iter()
            .map(|(id, v)| (id, MetricObject::Euclidean(v)))
            .collect())
    }
}
