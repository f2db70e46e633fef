//! Power-versus-height curves and their CSV form.
//!
//! Every model in the crate, and the measurement pipeline, reduces to an
//! ordered list of (height, power) samples. On disk a curve file holds one or
//! more labelled curves:
//!
//! ```text
//! height_m,power_w,power_dbm,model
//! 20,1.2e-5,-19.2,closed-form
//! ```

use std::io::{Read, Write};

use thiserror::Error;

use crate::units::watts_to_dbm;

pub const CURVE_COLUMNS: [&str; 4] = ["height_m", "power_w", "power_dbm", "model"];

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("heights must be strictly increasing (at index {0})")]
    NotIncreasing(usize),
    #[error("power must be finite and non-negative (at index {0})")]
    BadPower(usize),
    #[error("missing column '{0}'")]
    MissingColumn(&'static str),
    #[error("column '{column}' on line {line}: {message}")]
    BadField {
        column: &'static str,
        line: u64,
        message: String,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AltitudePowerCurve {
    pub label: String,
    samples: Vec<(f64, f64)>,
}

impl AltitudePowerCurve {
    pub fn new(label: impl Into<String>, samples: Vec<(f64, f64)>) -> Result<Self, CurveError> {
        if let Some(i) = samples.windows(2).position(|w| !(w[1].0 > w[0].0)) {
            return Err(CurveError::NotIncreasing(i + 1));
        }
        if let Some(i) = samples
            .iter()
            .position(|&(_, p)| !(p.is_finite() && p >= 0.0))
        {
            return Err(CurveError::BadPower(i));
        }
        Ok(AltitudePowerCurve {
            label: label.into(),
            samples,
        })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.0)
    }

    pub fn powers_dbm(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| watts_to_dbm(s.1))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Linear interpolation of power (W) at `height`; `None` outside the curve's span.
    pub fn interpolate(&self, height: f64) -> Option<f64> {
        let s = &self.samples;
        let first = s.first()?;
        let last = s.last()?;
        if height < first.0 || height > last.0 {
            return None;
        }
        let i = s.partition_point(|p| p.0 < height);
        if s[i].0 == height {
            return Some(s[i].1);
        }
        let (h0, p0) = s[i - 1];
        let (h1, p1) = s[i];
        Some(p0 + (p1 - p0) * (height - h0) / (h1 - h0))
    }
}

/// Writes curves in the shared four-column schema.
pub fn write_curves<W: Write>(out: W, curves: &[AltitudePowerCurve]) -> Result<(), CurveError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_COLUMNS)?;
    for curve in curves {
        for &(h, p) in curve.samples() {
            w.write_record([
                h.to_string(),
                p.to_string(),
                format!("{:.6}", watts_to_dbm(p)),
                curve.label.clone(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a curve file, grouping rows by label in first-seen order.
///
/// Extra columns are ignored; missing or malformed required columns are
/// reported by name.
pub fn read_curves<R: Read>(input: R) -> Result<Vec<AltitudePowerCurve>, CurveError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let col = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or(CurveError::MissingColumn(name))
    };
    let (hc, pc, lc) = (col("height_m")?, col("power_w")?, col("model")?);

    let mut groups: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |idx: usize, column: &'static str| -> Result<f64, CurveError> {
            let field = record.get(idx).ok_or(CurveError::MissingColumn(column))?;
            field.trim().parse::<f64>().map_err(|e| CurveError::BadField {
                column,
                line,
                message: format!("'{field}': {e}"),
            })
        };
        let h = num(hc, "height_m")?;
        let p = num(pc, "power_w")?;
        let label = record.get(lc).ok_or(CurveError::MissingColumn("model"))?;
        match groups.iter_mut().find(|(l, _)| l == label) {
            Some((_, samples)) => samples.push((h, p)),
            None => groups.push((label.to_string(), vec![(h, p)])),
        }
    }
    groups
        .into_iter()
        .map(|(label, samples)| AltitudePowerCurve::new(label, samples))
        .collect()
}
