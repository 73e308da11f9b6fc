//! Versioned, byte-stable reports.

use std::io::Write;

use hwcore::cyclotomic::{Cyc, CycloField};
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA: &str = "hwtool.report/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub data: Value,
}

impl Check {
    pub fn new(suite: &str, name: impl Into<String>, status: Status, data: Value) -> Self {
        Check { suite: suite.into(), name: name.into(), status, reason: None, data }
    }

    pub fn with_reason(mut self, reason: impl Into<String>) -> Self {
        self.reason = Some(reason.into());
        self
    }

    /// A check that could not run; `BoundExceeded` becomes `skipped`, anything else `fail`.
    pub fn from_error(suite: &str, name: impl Into<String>, e: &hwcore::Error) -> Self {
        let status = match e {
            hwcore::Error::BoundExceeded { .. } => Status::Skipped,
            _ => Status::Fail,
        };
        let data = match e {
            hwcore::Error::OracleMismatch { t, brute, structural } => json!({"t": t, "brute": brute, "structural": structural}),
            _ => Value::Null,
        };
        Check::new(suite, name, status, data).with_reason(format!("{e:?}: {e}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub config: Value,
    pub datum: Value,
    pub checks: Vec<Check>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

impl Report {
    pub fn new(config: Value, datum: Value, checks: Vec<Check>) -> Self {
        let count = |s| checks.iter().filter(|c| c.status == s).count();
        let summary = Summary { pass: count(Status::Pass), fail: count(Status::Fail), skipped: count(Status::Skipped) };
        Report { schema: SCHEMA, config, datum, checks, summary, timing_ms: None }
    }

    /// True iff no check failed.
    pub fn ok(&self) -> bool {
        self.summary.fail == 0
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        // round trip through Value: its maps are ordered by key
        let v = serde_json::to_value(self).expect("report is serializable");
        let mut s = serde_json::to_string_pretty(&v).expect("report is serializable");
        s.push('\n');
        s
    }

    /// One row per check: suite, name, status, reason.
    pub fn to_csv_summary(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["suite", "name", "status", "reason"])?;
        for c in &self.checks {
            w.write_record([c.suite.as_str(), c.name.as_str(), c.status.as_str(), c.reason.as_deref().unwrap_or("")])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    /// Rows `check, t, c_0, ..., c_{n-1}` for every exported sequence.
    pub fn to_csv_sequences(&self) -> anyhow::Result<String> {
        let width = self
            .checks
            .iter()
            .filter_map(|c| c.data.get("sequence").and_then(Value::as_array))
            .flatten()
            .filter_map(|e| e.get("coords").and_then(Value::as_array).map(Vec::len))
            .max()
            .unwrap_or(0);
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["check".to_string(), "t".to_string()];
        header.extend((0..width).map(|i| format!("c{i}")));
        w.write_record(&header)?;
        for c in &self.checks {
            let Some(seq) = c.data.get("sequence").and_then(Value::as_array) else { continue };
            for e in seq {
                let mut row = vec![format!("{}/{}", c.suite, c.name), e.get("t").map(|t| t.to_string()).unwrap_or_default()];
                if let Some(cs) = e.get("coords").and_then(Value::as_array) {
                    row.extend(cs.iter().map(|x| x.as_str().unwrap_or_default().to_string()));
                }
                row.resize(width + 2, String::new());
                w.write_record(&row)?;
            }
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn write(&self, out: &mut dyn Write, format: Format) -> anyhow::Result<()> {
        match format {
            Format::Json => out.write_all(self.to_json().as_bytes())?,
            Format::CsvSummary => out.write_all(self.to_csv_summary()?.as_bytes())?,
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    CsvSummary,
}

/// An exact value: its display string and coordinates over `Q` in the power basis of `zeta_n`.
pub fn cyc_json(k: &CycloField, x: &Cyc) -> Value {
    let z = k.to_complex(x);
    json!({
        "exact": x.to_string(),
        "coords": x.coordinate_strings(),
        "n": x.n(),
        "approx": [round(z.re), round(z.im)],
    })
}

/// Sequence entries `{t, exact, coords}`.
pub fn sequence_json(k: &CycloField, ts: impl IntoIterator<Item = u32>, xs: &[Cyc]) -> Value {
    Value::Array(
        ts.into_iter()
            .zip(xs)
            .map(|(t, x)| {
                let mut v = cyc_json(k, x);
                v["t"] = json!(t);
                v
            })
            .collect(),
    )
}

/// Rounds to 12 significant digits, and flushes values below `1e-12` to zero.
pub fn round(x: f64) -> f64 {
    if !x.is_finite() || x.abs() < 1e-12 {
        return if x.is_finite() { 0.0 } else { x };
    }
    let s = format!("{x:.11e}");
    let r: f64 = s.parse().unwrap_or(x);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_valid() {
        let r = Report::new(json!({}), Value::Null, Vec::new());
        assert!(r.ok());
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["checks"], json!([]));
        assert_eq!(r.to_csv_summary().unwrap(), "suite,name,status,reason\n");
    }

    #[test]
    fn keys_are_sorted_and_failures_counted() {
        let c = Check::new("s", "b", Status::Fail, json!({"z": 1, "a": 2})).with_reason("x");
        let r = Report::new(json!({"y": 1, "b": 2}), Value::Null, vec![c]);
        let s = r.to_json();
        assert!(s.find("\"a\"").unwrap() < s.find("\"z\"").unwrap());
        assert!(s.find("\"checks\"").unwrap() < s.find("\"schema\"").unwrap());
        assert!(!r.ok());
    }

    #[test]
    fn rounding_is_stable() {
        assert_eq!(round(1.0000000000000002), 1.0);
        assert_eq!(round(-0.0), 0.0);
        assert_eq!(round(1e-17), 0.0);
        assert_eq!(round(1.0 / 3.0), 0.333333333333);
    }
}
