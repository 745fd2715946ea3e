//! Report writers. Every float is written with 17 significant digits so a
//! rerun with the same inputs reproduces the files byte for byte.

use std::fs;
use std::path::Path;

use binloss::{Detectability, LossReport, Matrix};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::CliError;

/// `f64` serialized as `{:.16e}`; non-finite values become `null`.
#[derive(Clone, Copy, Debug)]
pub struct F17(pub f64);

pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(fmt17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub fn f17s(v: &[f64]) -> Vec<F17> {
    v.iter().copied().map(F17).collect()
}

#[derive(Serialize)]
pub struct MatrixJson {
    pub shape: [usize; 2],
    pub data: Vec<F17>,
}

impl From<&Matrix<f64>> for MatrixJson {
    fn from(m: &Matrix<f64>) -> Self {
        let (r, c) = m.shape();
        MatrixJson {
            shape: [r, c],
            data: f17s(m.as_row_major()),
        }
    }
}

#[derive(Serialize)]
pub struct DetectabilityJson {
    pub d_squared: F17,
    pub d: F17,
    pub auc: F17,
}

impl From<Detectability<f64>> for DetectabilityJson {
    fn from(d: Detectability<f64>) -> Self {
        DetectabilityJson {
            d_squared: F17(d.d_squared),
            d: F17(d.d),
            auc: F17(d.auc),
        }
    }
}

#[derive(Serialize)]
pub struct LossJson {
    pub perturbation: Vec<F17>,
    pub quadform_lm: F17,
    pub quadform_binned: F17,
    pub loss_direct: F17,
    pub loss_null_norm: F17,
    pub loss_per_bin_total: F17,
    pub loss_per_bin: Vec<F17>,
    pub relative_loss: F17,
    pub routes_agree: bool,
}

impl From<&LossReport<f64>> for LossJson {
    fn from(r: &LossReport<f64>) -> Self {
        LossJson {
            perturbation: f17s(&r.perturbation),
            quadform_lm: F17(r.quadform_lm),
            quadform_binned: F17(r.quadform_binned),
            loss_direct: F17(r.loss_direct),
            loss_null_norm: F17(r.loss_null_norm),
            loss_per_bin_total: F17(r.loss_per_bin_total),
            loss_per_bin: f17s(&r.loss_per_bin),
            relative_loss: F17(r.relative_loss()),
            routes_agree: r.routes_agree(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e.into()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes a CSV table with a header row.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}
