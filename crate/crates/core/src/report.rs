//! Report bundle written by the command-line tool, and JSON output with
//! every float printed to 17 significant digits.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::competitors::LossDistribution;
use crate::error::{Error, Result};
use crate::family::Model;
use crate::gof::{GofReport, ModelRanking, VarBacktestRow};
use crate::inference::FitResult;
use crate::simlab::SimReport;

pub const SCHEMA_VERSION: u32 = 1;

/// A float with 17 significant digits, in exponent form.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Pretty JSON formatter that prints floats through [`format_float`].
struct Digits17<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

/// Serializes `value` as indented JSON with 17-digit floats. Non-finite
/// floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Io(format!("JSON serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON output is UTF-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch; omitted in deterministic mode.
    pub timestamp: Option<u64>,
    pub source_path: Option<String>,
    pub n_obs: Option<usize>,
    pub n_rejected_rows: Option<usize>,
}

impl Metadata {
    pub fn new(seed: Option<u64>, deterministic: bool) -> Self {
        let timestamp = (!deterministic).then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            timestamp,
            source_path: None,
            n_obs: None,
            n_rejected_rows: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedGof {
    pub name: String,
    pub report: GofReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskRow {
    pub level: f64,
    pub var: f64,
    /// Absent when the mean does not exist or the family has no closed form.
    pub tvar: Option<f64>,
    /// `E[(Y - VaR)+]`.
    pub stop_loss_at_var: Option<f64>,
    /// `E[Y - VaR | Y > VaR]`.
    pub mean_excess_at_var: Option<f64>,
}

/// VaR at each level and, for GLMGA, TVaR, stop-loss premium and mean
/// excess at the VaR.
pub fn risk_table(model: &Model, levels: &[f64]) -> Result<Vec<RiskRow>> {
    levels
        .iter()
        .map(|&p| {
            let var = model.quantile(p)?;
            let (tvar, stop_loss, mean_excess) = match model {
                Model::Glmga(g) => (g.tvar(p).ok(), g.stop_loss_premium(var).ok(), g.mean_excess(var).ok()),
                _ => (None, None, None),
            };
            Ok(RiskRow {
                level: p,
                var,
                tvar,
                stop_loss_at_var: stop_loss,
                mean_excess_at_var: mean_excess,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub command: String,
    pub metadata: Metadata,
    #[serde(default)]
    pub fits: Vec<NamedFit>,
    #[serde(default)]
    pub gof: Vec<NamedGof>,
    #[serde(default)]
    pub backtest: Vec<VarBacktestRow>,
    #[serde(default)]
    pub ranking: Option<ModelRanking>,
    #[serde(default)]
    pub risk: Vec<RiskRow>,
    /// Competitor families the tool does not implement.
    #[serde(default)]
    pub not_implemented: Vec<String>,
    #[serde(default)]
    pub simulation: Option<SimReport>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ReportBundle {
    pub fn new(command: &str, metadata: Metadata) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            metadata,
            fits: Vec::new(),
            gof: Vec::new(),
            backtest: Vec::new(),
            ranking: None,
            risk: Vec::new(),
            not_implemented: Vec::new(),
            simulation: None,
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let b: Self = serde_json::from_str(s).map_err(|e| Error::Ingestion(format!("invalid report: {e}")))?;
        if b.schema_version != SCHEMA_VERSION {
            return Err(Error::Ingestion(format!(
                "report schema version {} is not supported (expected {SCHEMA_VERSION})",
                b.schema_version
            )));
        }
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_digits_and_round_trip() {
        let x = [0.1_f64, -1234.5678e-20, 1.0 / 3.0, 6.02214076e23];
        let s = to_json(&x.to_vec()).unwrap();
        for v in &x {
            assert!(s.contains(&format!("{v:.16e}")));
        }
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x.to_vec());
    }

    #[test]
    fn non_finite_becomes_null() {
        let s = to_json(&vec![f64::NAN]).unwrap();
        assert!(s.contains("null"));
    }

    #[test]
    fn risk_rows_ordered() {
        let m = Model::from_params(crate::family::Family::Glmga, &[0.2, 1.0, 1.0]).unwrap();
        for r in risk_table(&m, &[0.95, 0.99]).unwrap() {
            assert!(r.tvar.unwrap() >= r.var);
        }
    }

    #[test]
    fn bundle_round_trip() {
        let b = ReportBundle::new("fit", Metadata::new(Some(3), true));
        let back = ReportBundle::from_json(&b.to_json().unwrap()).unwrap();
        assert_eq!(back, b);
    }
}
