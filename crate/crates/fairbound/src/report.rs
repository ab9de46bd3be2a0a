//! Run reports in a human-readable text form and a JSON form.
//!
//! Numbers are rounded to 12 significant digits. Non-finite values become
//! the strings `inf`, `-inf` and `nan` so that every field stays printable.

use std::fmt::Write as _;

use fairbound_core::fairness::{self, BoundsReport, CriterionReport};
use fairbound_core::surrogate::phi_loss;
use fairbound_core::{Dataset, Surrogate};
use serde_json::{Map, Value as Json};

/// Formats `v` with 12 significant digits in its shortest round-trip form.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    // normalise negative zero so reruns print identically
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    let mag = rounded.abs();
    if mag != 0.0 && !(1e-4..1e15).contains(&mag) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    /// A quantity that is undefined for this run, e.g. a ratio with an empty
    /// denominator group.
    Missing,
}

impl Value {
    fn text(&self) -> String {
        match self {
            Value::Num(v) => fmt_num(*v),
            Value::Int(i) => i.to_string(),
            Value::Text(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
            Value::Missing => "n/a".into(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Num(v) if v.is_finite() => {
                let r: f64 = fmt_num(*v).parse().expect("finite value parses");
                serde_json::Number::from_f64(r).map_or(Json::Null, Json::Number)
            }
            Value::Num(v) => Json::String(fmt_num(*v)),
            Value::Int(i) => Json::from(*i),
            Value::Text(s) => Json::String(s.clone()),
            Value::Bool(b) => Json::Bool(*b),
            Value::Missing => Json::Null,
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.into())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Missing, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<(String, Value)>,
}

impl Section {
    pub fn new(name: &str) -> Self {
        Section { name: name.into(), entries: Vec::new() }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.entries.push((key.into(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

/// Everything needed to understand and rerun one command.
///
/// `elapsed_seconds` is the only field that varies between identical runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub command: Vec<String>,
    pub sections: Vec<Section>,
    pub warnings: Vec<String>,
    pub elapsed_seconds: f64,
}

impl RunReport {
    pub fn new(command: Vec<String>) -> Self {
        RunReport { command, sections: Vec::new(), warnings: Vec::new(), elapsed_seconds: 0.0 }
    }

    pub fn push(&mut self, section: Section) {
        self.sections.push(section);
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command.join(" "));
        for s in &self.sections {
            let _ = writeln!(out, "[{}]", s.name);
            for (k, v) in &s.entries {
                let _ = writeln!(out, "  {k} = {}", v.text());
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        let _ = writeln!(out, "elapsed_seconds = {}", fmt_num(self.elapsed_seconds));
        out
    }

    pub fn to_json(&self) -> Json {
        let mut root = Map::new();
        root.insert("command".into(), Json::from(self.command.clone()));
        for s in &self.sections {
            let obj: Map<String, Json> = s.entries.iter().map(|(k, v)| (k.clone(), v.json())).collect();
            root.insert(s.name.clone(), Json::Object(obj));
        }
        root.insert("warnings".into(), Json::from(self.warnings.clone()));
        root.insert("elapsed_seconds".into(), Value::Num(self.elapsed_seconds).json());
        Json::Object(root)
    }
}

/// Accuracy, losses and every fairness metric of `predictions` on `data`.
/// `scores` enables the surrogate loss; eta estimates enable the weighted
/// risk difference.
pub fn metrics_section(
    data: &Dataset,
    predictions: &[i8],
    scores: Option<&[f64]>,
    phi: &Surrogate,
) -> fairbound_core::Result<Section> {
    let labels = data.labels();
    if predictions.len() != labels.len() {
        return Err(fairbound_core::Error::LengthMismatch { expected: labels.len(), found: predictions.len() });
    }
    let n = labels.len() as f64;
    let correct = predictions.iter().zip(labels).filter(|(a, b)| a == b).count() as f64;
    let mut s = Section::new("metrics");
    s.set("accuracy", correct / n);
    s.set("zero_one_loss", 1.0 - correct / n);
    s.set("phi_loss", scores.map(|h| phi_loss(h, labels, phi)).transpose()?);
    s.set("rd_groups", fairness::risk_difference(predictions, data.sensitive())?);
    let as_scores: Vec<f64> = predictions.iter().map(|&y| f64::from(y)).collect();
    let weighted = match data.eta() {
        Some(eta) => Some(fairness::risk_difference_weighted(&as_scores, eta, data.group_rate())?),
        None => None,
    };
    s.set("rd_weighted", weighted);
    s.set("risk_ratio", fairness::risk_ratio(predictions, data.sensitive())?);
    let eo = fairness::equalized_odds(predictions, labels, data.sensitive())?;
    s.set("eo_given_negative", eo.given_negative);
    s.set("eo_given_positive", eo.given_positive);
    s.set("equal_opportunity", fairness::equal_opportunity(predictions, labels, data.sensitive())?);
    Ok(s)
}

pub fn bounds_section(b: &BoundsReport) -> Section {
    let mut s = Section::new("bounds");
    s.set("rd_minus", b.rd_minus)
        .set("rd_plus", b.rd_plus)
        .set("lower_bound", b.lower_bound)
        .set("upper_bound", b.upper_bound)
        .set("rd_kappa_of_h", b.rd_kappa_of_h)
        .set("rd_delta_of_h", b.rd_delta_of_h)
        .set("rd_kappa_min", b.rd_kappa_min)
        .set("rd_delta_max", b.rd_delta_max)
        .set("upper_vacuous", b.upper_vacuous)
        .set("lower_vacuous", b.lower_vacuous);
    s
}

pub fn criterion_section(c: &CriterionReport) -> Section {
    let mut s = Section::new("criterion");
    s.set("verdict", if c.pass { "PASS" } else { "FAIL" })
        .set("rd_plus", c.rd_plus)
        .set("rd_minus", c.rd_minus)
        .set("c1", c.c1)
        .set("c2", c.c2)
        .set("upper_margin", c.upper_margin)
        .set("lower_margin", c.lower_margin);
    s
}

/// Warnings about clamped or saturated bound transforms.
pub fn bounds_warnings(b: &BoundsReport) -> Vec<String> {
    let mut w = Vec::new();
    if b.upper_clamped {
        w.push("upper bound transform saturated; fell back to RD+".to_string());
    }
    if b.lower_clamped {
        w.push("lower bound transform saturated; fell back to RD-".to_string());
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_num(1234567.0), "1234567");
        assert_eq!(fmt_num(-6.801302172571e-7), "-6.80130217257e-7");
        assert_eq!(fmt_num(2e20), "2e20");
        for v in [1.0 / 7.0, -3.3e-9, 12345.678901234567] {
            assert_eq!(fmt_num(fmt_num(v).parse().unwrap()), fmt_num(v));
        }
    }

    #[test]
    fn sentinels_in_json() {
        let mut r = RunReport::new(vec!["check".into()]);
        let mut s = Section::new("metrics");
        s.set("risk_ratio", f64::INFINITY).set("eo", Value::Missing).set("rd", 0.25);
        r.push(s);
        let j = r.to_json();
        assert_eq!(j["metrics"]["risk_ratio"], "inf");
        assert!(j["metrics"]["eo"].is_null());
        assert_eq!(j["metrics"]["rd"], 0.25);
        assert!(r.to_text().contains("  risk_ratio = inf"));
    }

    #[test]
    fn constant_positive_predictions() {
        let d = fairbound_core::synthetic::students();
        let preds = vec![1i8; d.n_rows()];
        let s = metrics_section(&d, &preds, None, &Surrogate::logistic()).unwrap();
        let base = d.labels().iter().filter(|&&y| y == 1).count() as f64 / d.n_rows() as f64;
        assert_eq!(s.get("rd_groups"), Some(&Value::Num(0.0)));
        assert_eq!(s.get("accuracy"), Some(&Value::Num(base)));
        assert!(metrics_section(&d, &preds[1..], None, &Surrogate::logistic()).is_err());
    }
}
