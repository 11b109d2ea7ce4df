//! JSON reports and CSV grid dumps.

use serde::Serialize;
use serde_json::Value;

pub const CSV_HEADER: &str = "r,s,phi,P,Q,Q_s,detg,sigma,f_r,S_over_u";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point {
    pub r: f64,
    pub s: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Residuals {
    pub max: f64,
    pub mean: f64,
    pub argmax: Point,
}

impl Residuals {
    /// Statistics of `|value|` over labelled samples.
    pub fn from_samples(samples: impl IntoIterator<Item = (f64, Option<f64>, f64)>) -> Self {
        let mut max = 0.0;
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut argmax = Point {
            r: f64::NAN,
            s: None,
        };
        for (r, s, v) in samples {
            let a = v.abs();
            if count == 0 || a > max || a.is_nan() {
                max = a;
                argmax = Point { r, s };
            }
            sum += a;
            count += 1;
        }
        Residuals {
            max,
            mean: if count == 0 { 0.0 } else { sum / count as f64 },
            argmax,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub config_echo: Value,
    pub command: String,
    pub verdict: &'static str,
    pub residuals: Residuals,
    pub per_radius: Vec<Value>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

pub fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

/// One row of the analysis grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridRow {
    pub r: f64,
    pub s: f64,
    pub phi: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "Q_s")]
    pub q_s: f64,
    pub detg: f64,
    pub sigma: f64,
    pub f_r: f64,
    #[serde(rename = "S_over_u")]
    pub s_over_u: f64,
    pub c: f64,
}

pub fn csv(rows: &[GridRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 220 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let cols = [
            row.r,
            row.s,
            row.phi,
            row.p,
            row.q,
            row.q_s,
            row.detg,
            row.sigma,
            row.f_r,
            row.s_over_u,
        ];
        // `+ 0.0` folds -0.0 into 0.0
        let line: Vec<String> = cols.iter().map(|v| format!("{:.16e}", v + 0.0)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
