//! JSON and CSV forms of [`MomentSequence`].
//!
//! Exact values are written as `"p/q"` strings so nothing is lost; MPFR
//! values are written in decimal with enough digits to round-trip at the
//! recorded precision.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::exact::{parse_fraction, BigReal, Float, ParamValue};
use crate::reconstruct::Interval;

use super::{DysonIndex, MomentError, MomentSequence, MomentSpec, Result, Variable};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SpecRecord {
    variable: Variable,
    alpha: String,
    k: u32,
}

#[derive(Serialize, Deserialize)]
struct SequenceRecord {
    schema_version: u32,
    spec: SpecRecord,
    interval: [String; 2],
    /// Bits of precision for decimal values; absent when every value is exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    precision: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    transforms: Vec<String>,
    values: Vec<String>,
}

fn format_value(v: &ParamValue) -> String {
    match v {
        ParamValue::Exact(r) => r.to_string(),
        ParamValue::Real(x) => {
            let digits =
                (f64::from(x.precision_bits()) * std::f64::consts::LOG10_2).ceil() as usize + 2;
            x.as_float().to_string_radix(10, Some(digits))
        }
    }
}

fn parse_value(s: &str, precision: Option<u32>) -> Result<ParamValue> {
    if let Ok(r) = parse_fraction(s) {
        return Ok(ParamValue::Exact(r));
    }
    let prec = precision
        .ok_or_else(|| MomentError::Format(format!("decimal value {s:?} without a precision")))?;
    let parsed = Float::parse(s).map_err(|e| MomentError::Format(format!("{s:?}: {e}")))?;
    Ok(ParamValue::Real(BigReal::new(Float::with_val(
        prec, parsed,
    ))))
}

fn shared_precision(values: &[ParamValue]) -> Option<u32> {
    values.iter().filter_map(ParamValue::precision_bits).min()
}

fn parse_spec(variable: Variable, alpha: &str, k: u32) -> Result<MomentSpec> {
    MomentSpec::new(variable, alpha.parse::<DysonIndex>()?, k)
}

impl MomentSequence {
    pub fn to_json(&self) -> String {
        let record = SequenceRecord {
            schema_version: SCHEMA_VERSION,
            spec: SpecRecord {
                variable: self.spec.variable,
                alpha: self.spec.alpha.to_string(),
                k: self.spec.k,
            },
            interval: [self.interval.lo.to_string(), self.interval.hi.to_string()],
            precision: shared_precision(&self.values),
            transforms: self.transforms.clone(),
            values: self.values.iter().map(format_value).collect(),
        };
        serde_json::to_string_pretty(&record).expect("sequence record serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: SequenceRecord =
            serde_json::from_str(text).map_err(|e| MomentError::Format(e.to_string()))?;
        if record.schema_version != SCHEMA_VERSION {
            return Err(MomentError::Format(format!(
                "unsupported schema_version {}",
                record.schema_version
            )));
        }
        let spec = parse_spec(record.spec.variable, &record.spec.alpha, record.spec.k)?;
        let interval = Interval::new(
            parse_fraction(&record.interval[0])?,
            parse_fraction(&record.interval[1])?,
        )
        .map_err(|e| MomentError::Format(e.to_string()))?;
        let values = record
            .values
            .iter()
            .map(|s| parse_value(s, record.precision))
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(MomentError::Format("no moment values".into()));
        }
        Ok(MomentSequence {
            spec,
            values,
            interval,
            transforms: record.transforms,
        })
    }

    /// CSV with header `n,numerator,denominator`. Only exact sequences can be
    /// written this way.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| MomentError::Format(e.to_string());
        w.write_record(["n", "numerator", "denominator"])
            .map_err(csv_err)?;
        for (n, v) in self.values.iter().enumerate() {
            let r = v
                .as_rational()
                .ok_or_else(|| MomentError::Format(format!("moment {n} is not exact; use JSON")))?;
            w.write_record([n.to_string(), r.numer().to_string(), r.denom().to_string()])
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| MomentError::Format(e.to_string()))?;
        Ok(())
    }

    /// Reads the CSV written by [`Self::write_csv`]; CSV carries no metadata,
    /// so the `MomentSpec` comes from the caller. Rows must be `n = 0, 1, 2, …`.
    pub fn read_csv<R: Read>(input: R, spec: MomentSpec) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut values = Vec::new();
        for (expected, row) in r.records().enumerate() {
            let row = row.map_err(|e| MomentError::Format(e.to_string()))?;
            let field = |i: usize| {
                row.get(i)
                    .ok_or_else(|| MomentError::Format(format!("short row {expected}")))
            };
            let n: usize = field(0)?
                .trim()
                .parse()
                .map_err(|_| MomentError::Format("bad index".into()))?;
            if n != expected {
                return Err(MomentError::Format(format!(
                    "expected row n = {expected}, found {n}"
                )));
            }
            let value = parse_fraction(&format!("{}/{}", field(1)?.trim(), field(2)?.trim()))?;
            values.push(ParamValue::Exact(value));
        }
        if values.is_empty() {
            return Err(MomentError::Format("no moment values".into()));
        }
        let interval = spec.interval();
        Ok(MomentSequence {
            spec,
            values,
            interval,
            transforms: Vec::new(),
        })
    }
}
