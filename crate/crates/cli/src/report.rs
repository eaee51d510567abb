//! Report documents and their JSON and CSV forms.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "ergolab-report/1";

/// A numeric acceptance check carried by a report.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `<=`, `>=` or `==`.
    pub relation: String,
    /// Uncertainty of `value`: zero for exact computations.
    pub error_bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64, error_bound: f64) -> Check {
        Check { name: name.into(), value, bound, relation: "<=".into(), error_bound, pass: value <= bound }
    }

    pub fn at_least(name: &str, value: f64, bound: f64, error_bound: f64) -> Check {
        Check { name: name.into(), value, bound, relation: ">=".into(), error_bound, pass: value >= bound }
    }

    pub fn holds(name: &str, ok: bool) -> Check {
        let v = if ok { 1.0 } else { 0.0 };
        Check { name: name.into(), value: v, bound: 1.0, relation: "==".into(), error_bound: 0.0, pass: ok }
    }
}

/// One CSV row: `n_or_window,value_re,value_im,stderr,target`.
#[derive(Clone, Debug, Serialize)]
pub struct CurveRow {
    pub n_or_window: String,
    pub value_re: f64,
    pub value_im: f64,
    pub stderr: f64,
    pub target: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timestamp {
    pub unix_seconds: u64,
    pub wall_clock_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub version: &'static str,
    pub id: String,
    pub config: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub verdict: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub curve: Vec<CurveRow>,
    /// Excluded from the canonical form.
    pub timestamp: Option<Timestamp>,
}

impl Report {
    pub fn new(id: &str, config: Value, results: Value, checks: Vec<Check>, verdict: &str) -> Report {
        Report {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            id: id.into(),
            config,
            results,
            checks,
            verdict: verdict.into(),
            curve: Vec::new(),
            timestamp: None,
        }
    }

    pub fn with_curve(mut self, curve: Vec<CurveRow>) -> Report {
        self.curve = curve;
        self
    }

    pub fn stamp(&mut self, started: SystemTime) {
        let now = SystemTime::now();
        self.timestamp = Some(Timestamp {
            unix_seconds: now.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            wall_clock_seconds: now.duration_since(started).map(|d| d.as_secs_f64()).unwrap_or(0.0),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// JSON without the timestamp: identical for identical configs and seeds.
    pub fn canonical_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Value::Object(m) = &mut v {
            m.remove("timestamp");
        }
        serde_json::to_string_pretty(&v).expect("reports serialize")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n_or_window,value_re,value_im,stderr,target\n");
        for r in &self.curve {
            out.push_str(&format!("{},{:?},{:?},{:?},{:?}\n", r.n_or_window, r.value_re, r.value_im, r.stderr, r.target));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_drops_timestamp() {
        let mut a = Report::new("x", Value::Null, Value::Null, vec![Check::at_most("c", 1.0, 2.0, 0.0)], "ok");
        let b = a.clone();
        a.stamp(SystemTime::now());
        assert_eq!(a.canonical_json(), b.canonical_json());
        assert_ne!(a.to_json(), b.to_json());
        assert!(a.all_pass());
        let csv = a.with_curve(vec![CurveRow { n_or_window: "1".into(), value_re: 0.5, value_im: 0.0, stderr: 0.0, target: 0.5 }]).to_csv();
        assert_eq!(csv.lines().count(), 2);
    }
}
