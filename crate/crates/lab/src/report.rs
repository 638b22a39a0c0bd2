//! Reports: one record per check, each with its criteria, fitted constants and runtime.
//!
//! Numbers serialize as JSON numbers when finite and as the strings "inf", "-inf" or "nan"
//! otherwise, so reports round-trip exactly.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// An f64 that survives JSON unchanged, including non-finite values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Num(v)),
            Raw::Text(t) => match t.as_str() {
                "inf" => Ok(Num(f64::INFINITY)),
                "-inf" => Ok(Num(f64::NEG_INFINITY)),
                "nan" => Ok(Num(f64::NAN)),
                _ => Err(serde::de::Error::custom(format!("`{t}` is not a number"))),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// `value op bound`, where `bound` is `nominal` moved by `tolerance` in the lenient direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub quantity: String,
    pub value: Num,
    pub op: Op,
    pub nominal: Num,
    pub tolerance: Num,
    pub bound: Num,
    pub pass: bool,
}

impl Criterion {
    pub fn new(quantity: &str, value: f64, op: Op, nominal: f64, tolerance: f64) -> Self {
        let bound = match op {
            Op::AtMost => nominal + tolerance,
            Op::AtLeast => nominal - tolerance,
        };
        let mut c = Self {
            quantity: quantity.to_string(),
            value: Num(value),
            op,
            nominal: Num(nominal),
            tolerance: Num(tolerance),
            bound: Num(bound),
            pass: false,
        };
        c.pass = c.reevaluate();
        c
    }

    /// The verdict recomputed from the stored numbers; NaN never passes.
    pub fn reevaluate(&self) -> bool {
        match self.op {
            Op::AtMost => self.value.0 <= self.bound.0,
            Op::AtLeast => self.value.0 >= self.bound.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// The statement being checked, in words.
    pub anchor: String,
    pub pass: bool,
    pub criteria: Vec<Criterion>,
    pub constants: BTreeMap<String, Num>,
    pub runtime_ms: u64,
    /// Module error that ended the check early; such a record fails.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckRecord {
    pub fn reevaluate(&self) -> bool {
        self.error.is_none() && !self.criteria.is_empty() && self.criteria.iter().all(Criterion::reevaluate)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub description: String,
    pub pass: bool,
    pub tolerance_scale: f64,
    pub records: Vec<CheckRecord>,
    /// File name of the tidy CSV, relative to the report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_data: Option<String>,
    pub runtime_ms: u64,
}

impl Report {
    pub fn pass_vector(&self) -> Vec<bool> {
        self.records.iter().map(|r| r.pass).collect()
    }

    /// The report with every runtime zeroed, for comparisons across runs.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.runtime_ms = 0;
        for rec in &mut r.records {
            rec.runtime_ms = 0;
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// One observation of the plot data. Columns: scenario, series, x, y.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub scenario: String,
    pub series: String,
    pub x: f64,
    pub y: f64,
}

pub fn write_plot_csv(path: &Path, rows: &[PlotRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(["scenario", "series", "x", "y"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

pub fn write_report(path: &Path, report: &Report) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(report.to_json().as_bytes())?;
    f.write_all(b"\n")
}
