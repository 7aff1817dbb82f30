//! Loss samples with optional named covariates, and CSV ingestion.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positive losses plus a column-major covariate matrix with named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSample {
    pub losses: Vec<f64>,
    pub covariate_names: Vec<String>,
    /// One vector per covariate, each aligned with `losses`.
    pub covariates: Vec<Vec<f64>>,
    pub source_path: Option<String>,
}

impl LossSample {
    pub fn new(losses: Vec<f64>) -> Result<Self> {
        Self::with_covariates(losses, Vec::new(), Vec::new())
    }

    pub fn with_covariates(
        losses: Vec<f64>,
        covariate_names: Vec<String>,
        covariates: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if let Some((i, y)) = losses.iter().enumerate().find(|(_, y)| !(**y > 0.0 && y.is_finite())) {
            return Err(Error::domain(format!(
                "losses must be positive and finite; observation {i} is {y}"
            )));
        }
        if covariate_names.len() != covariates.len() {
            return Err(Error::Config(format!(
                "{} covariate names for {} covariate columns",
                covariate_names.len(),
                covariates.len()
            )));
        }
        for (name, col) in covariate_names.iter().zip(&covariates) {
            if col.len() != losses.len() {
                return Err(Error::Config(format!(
                    "covariate '{name}' has {} rows, losses have {}",
                    col.len(),
                    losses.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::domain(format!("covariate '{name}' is not finite at observation {i}")));
            }
        }
        for (i, name) in covariate_names.iter().enumerate() {
            if covariate_names[..i].contains(name) {
                return Err(Error::Config(format!("duplicate covariate name '{name}'")));
            }
        }
        Ok(Self {
            losses,
            covariate_names,
            covariates,
            source_path: None,
        })
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    pub fn covariate(&self, name: &str) -> Option<&[f64]> {
        self.covariate_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.covariates[i].as_slice())
    }
}

/// A row dropped during ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    /// 1-based line number in the file, counting the header.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ingested {
    pub sample: LossSample,
    pub rejected: Vec<RejectedRow>,
}

/// Fraction of rejected rows above which ingestion fails.
pub const MAX_REJECTED_FRACTION: f64 = 0.2;

/// Reads a headed, comma-separated file.
///
/// Rows whose loss is non-numeric or not strictly positive, or whose
/// covariates are non-numeric, are rejected and reported by line number.
pub fn ingest_csv(
    path: impl AsRef<Path>,
    loss_column: &str,
    covariate_columns: &[String],
) -> Result<Ingested> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Config(format!(
                "column '{name}' not found in {} (columns: {})",
                path.display(),
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    let loss_idx = find(loss_column)?;
    let cov_idx = covariate_columns
        .iter()
        .map(|c| find(c))
        .collect::<Result<Vec<_>>>()?;

    let mut losses = Vec::new();
    let mut covariates = vec![Vec::new(); cov_idx.len()];
    let mut rejected = Vec::new();
    let mut total = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        total += 1;
        let line = record.position().map(|p| p.line()).unwrap_or(total as u64 + 1);
        let field = |i: usize| record.get(i).unwrap_or("");
        let loss = match field(loss_idx).parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => v,
            Ok(v) => {
                rejected.push(RejectedRow { line, reason: format!("loss {v} is not positive") });
                continue;
            }
            Err(_) => {
                rejected.push(RejectedRow {
                    line,
                    reason: format!("loss '{}' is not numeric", field(loss_idx)),
                });
                continue;
            }
        };
        let mut row = Vec::with_capacity(cov_idx.len());
        let mut bad = None;
        for (&ci, name) in cov_idx.iter().zip(covariate_columns) {
            match field(ci).parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => {
                    bad = Some(format!("covariate '{name}' value '{}' is not numeric", field(ci)));
                    break;
                }
            }
        }
        if let Some(reason) = bad {
            rejected.push(RejectedRow { line, reason });
            continue;
        }
        losses.push(loss);
        for (col, v) in covariates.iter_mut().zip(row) {
            col.push(v);
        }
    }

    if total == 0 {
        return Err(Error::Ingestion(format!("{} has no data rows", path.display())));
    }
    if rejected.len() as f64 > MAX_REJECTED_FRACTION * total as f64 {
        let lines: Vec<String> = rejected.iter().take(20).map(|r| r.line.to_string()).collect();
        return Err(Error::Ingestion(format!(
            "{} of {total} rows rejected in {} (lines {}{})",
            rejected.len(),
            path.display(),
            lines.join(", "),
            if rejected.len() > 20 { ", ..." } else { "" }
        )));
    }
    let mut sample = LossSample::with_covariates(losses, covariate_columns.to_vec(), covariates)?;
    sample.source_path = Some(path.display().to_string());
    Ok(Ingested { sample, rejected })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if let csv::ErrorKind::Io(io) = e.kind() {
        return Error::Io(format!("{}: {io}", path.display()));
    }
    Error::Ingestion(format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_three_rows() {
        let f = write("loss,x\n1.0,3\n2.5,4\n10.0,5\n");
        let out = ingest_csv(f.path(), "loss", &["x".to_string()]).unwrap();
        assert_eq!(out.sample.losses, vec![1.0, 2.5, 10.0]);
        assert_eq!(out.sample.covariate("x").unwrap(), &[3.0, 4.0, 5.0]);
        assert!(out.rejected.is_empty());
    }

    #[test]
    fn zero_loss_rejected_with_line() {
        let f = write("loss\n1\n2\n0\n4\n5\n6\n");
        let out = ingest_csv(f.path(), "loss", &[]).unwrap();
        assert_eq!(out.sample.len(), 5);
        assert_eq!(out.rejected.len(), 1);
        assert_eq!(out.rejected[0].line, 4);
    }

    #[test]
    fn too_many_rejections() {
        let f = write("loss\n1\n-2\nabc\n4\n");
        assert!(matches!(ingest_csv(f.path(), "loss", &[]), Err(Error::Ingestion(_))));
    }

    #[test]
    fn missing_column_is_config_error() {
        let f = write("loss\n1\n");
        assert!(matches!(ingest_csv(f.path(), "amount", &[]), Err(Error::Config(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            ingest_csv("/nonexistent/losses.csv", "loss", &[]),
            Err(Error::Io(_))
        ));
    }
}
