//! Per-node metrics records and their CSV form.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::constants::ConvergenceConstants;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "t,node,f_err,consensus_err,alpha,bound";

/// One row of the metrics table. `node` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub t: usize,
    pub node: usize,
    pub f_err: f64,
    pub consensus_err: f64,
    pub alpha: f64,
    pub bound: f64,
}

/// Result of checking every recorded `f_err` against the per-node envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    pub checked: usize,
    pub violations: usize,
    /// Smallest `envelope - f_err` seen.
    pub min_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub algorithm: String,
    pub preset: Option<String>,
    pub seed: u64,
    pub iterations: usize,
    pub stride: usize,
    pub nodes: usize,
    pub dim: usize,
    pub tau_max: usize,
    pub radius: f64,
    pub lipschitz: f64,
    pub optimum: Vec<f64>,
    pub optimal_value: f64,
    pub final_max_f_err: f64,
    pub min_f_err: f64,
    /// Guarantee at `T` for the tuned schedule with the provable constants.
    pub corollary_bound: Option<f64>,
    pub constants: Option<ConvergenceConstants>,
    pub envelope: Option<EnvelopeCheck>,
}

impl Summary {
    /// The `#`-prefixed block written above the CSV rows.
    pub fn comment_lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("# algorithm: {}", self.algorithm),
            "# note: synthetic data and initial points, untuned step scale; curves show trends only".to_string(),
            format!(
                "# preset: {}  seed: {}  T: {}  stride: {}",
                self.preset.as_deref().unwrap_or("custom"),
                self.seed,
                self.iterations,
                self.stride
            ),
            format!(
                "# m: {}  d: {}  tau_max: {}  R: {}  L: {}",
                self.nodes, self.dim, self.tau_max, self.radius, self.lipschitz
            ),
            format!("# x*: {:?}  f*: {}", self.optimum, self.optimal_value),
            format!("# final_max_f_err: {}", self.final_max_f_err),
            format!("# min_f_err: {}", self.min_f_err),
        ];
        match self.corollary_bound {
            Some(b) => out.push(format!("# corollary_bound: {b:e}")),
            None => out.push("# corollary_bound: unavailable".to_string()),
        }
        if let Some(c) = &self.constants {
            out.push(format!(
                "# constants: Omega={} C={:e} lambda={} delta_lb={:e} t*={} Gamma={:e} ln_Gamma={}",
                c.omega, c.c, c.lambda, c.delta_lb, c.t_star, c.gamma, c.ln_gamma
            ));
        }
        if let Some(e) = &self.envelope {
            out.push(format!(
                "# envelope: checked={} violations={} min_margin={:e}",
                e.checked, e.violations, e.min_margin
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub records: Vec<MetricsRecord>,
    pub summary: Summary,
}

impl MetricsTable {
    /// Largest `f_err` across nodes at each recorded `t`.
    pub fn max_f_err_series(&self) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for r in &self.records {
            match out.last_mut() {
                Some((t, v)) if *t == r.t => *v = v.max(r.f_err),
                _ => out.push((r.t, r.f_err)),
            }
        }
        out
    }

    /// Records of one node (1-based), in time order.
    pub fn node(&self, node: usize) -> impl Iterator<Item = &MetricsRecord> + '_ {
        self.records.iter().filter(move |r| r.node == node)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for line in self.summary.comment_lines() {
            writeln!(out, "{line}")?;
        }
        write_records(&self.records, out)
    }
}

pub fn write_records<W: Write>(records: &[MetricsRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for r in records {
        writer.serialize(r).map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

/// Parses a metrics CSV, skipping `#` lines.
pub fn read_records<R: Read>(input: R) -> Result<Vec<MetricsRecord>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Io(format!(
            "unexpected header `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    reader.deserialize().map(|r| r.map_err(csv_error)).collect()
}

/// The `#` lines at the top of a metrics CSV, without the prefix.
pub fn read_comments<R: Read>(input: R) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in BufReader::new(input).lines() {
        let line = line?;
        match line.strip_prefix('#') {
            Some(rest) => out.push(rest.trim().to_string()),
            None => break,
        }
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Several aligned series sharing one time axis, written as `t,<label>,...`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub labels: Vec<String>,
    pub t: Vec<usize>,
    /// `columns[k][row]`
    pub columns: Vec<Vec<f64>>,
}

impl CurveTable {
    pub fn from_series(series: Vec<(String, Vec<(usize, f64)>)>) -> Result<Self> {
        let t: Vec<usize> = series
            .first()
            .map(|s| s.1.iter().map(|p| p.0).collect())
            .unwrap_or_default();
        let mut labels = Vec::new();
        let mut columns = Vec::new();
        for (label, points) in series {
            if points.len() != t.len() || points.iter().zip(&t).any(|(p, t)| p.0 != *t) {
                return Err(Error::ShapeMismatch(format!("series `{label}` is not aligned")));
            }
            labels.push(label);
            columns.push(points.into_iter().map(|p| p.1).collect());
        }
        Ok(CurveTable { labels, t, columns })
    }

    pub fn write_csv<W: Write>(&self, comments: &[String], mut out: W) -> Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(self.labels.iter().cloned());
        writer.write_record(&header).map_err(csv_error)?;
        for (row, t) in self.t.iter().enumerate() {
            let mut fields = vec![t.to_string()];
            fields.extend(self.columns.iter().map(|c| c[row].to_string()));
            writer.write_record(&fields).map_err(csv_error)?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Last value of each column.
    pub fn finals(&self) -> Vec<f64> {
        self.columns
            .iter()
            .map(|c| c.last().copied().unwrap_or(f64::NAN))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_round_trip_exactly() {
        let records = vec![
            MetricsRecord {
                t: 1,
                node: 1,
                f_err: 0.1 + 0.2,
                consensus_err: 1e-300,
                alpha: 1.0 / 3.0,
                bound: 1.2345e188,
            },
            MetricsRecord {
                t: 1,
                node: 2,
                f_err: -0.0,
                consensus_err: 0.0,
                alpha: f64::MIN_POSITIVE,
                bound: f64::NAN,
            },
        ];
        let mut buf = Vec::new();
        write_records(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        let back = read_records(buf.as_slice()).unwrap();
        assert_eq!(back[0], records[0]);
        assert_eq!(back[1].f_err.to_bits(), records[1].f_err.to_bits());
        assert!(back[1].bound.is_nan());
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(read_records("a,b\n1,2\n".as_bytes()).is_err());
    }
}
