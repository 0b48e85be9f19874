use serde_json::Value;

use crate::engine::{AnalysisReport, SCHEMA_VERSION};
use crate::error::{Error, Result};

const SUMMARY_KEYS: [&str; 8] = [
    "n_methods", "n_covered", "c_rate", "n_mua", "n_pseudo", "ps_rate", "ms_pseudo", "ms_req",
];
const LABELS: [&str; 5] = ["pseudo_tested", "required", "not_covered", "excluded", "unassessable"];
const DETECTIONS: [&str; 5] = [
    "undetected",
    "detected_failure",
    "detected_timeout",
    "detected_crash",
    "compile_error",
];

/// Pretty JSON with object keys in sorted order and a trailing newline.
pub fn to_json(report: &AnalysisReport) -> Result<String> {
    // serde_json's map is ordered by key unless `preserve_order` is on.
    let value = serde_json::to_value(report)?;
    validate(&value)?;
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

pub fn from_json(text: &str) -> Result<AnalysisReport> {
    let value: Value = serde_json::from_str(text)?;
    validate(&value)?;
    Ok(serde_json::from_value(value)?)
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

fn field<'a>(obj: &'a Value, key: &str, at: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| schema(format!("{at}: missing `{key}`")))
}

fn string_array(v: &Value, at: &str) -> Result<()> {
    let items = v.as_array().ok_or_else(|| schema(format!("{at}: expected an array")))?;
    if items.iter().all(Value::is_string) {
        Ok(())
    } else {
        Err(schema(format!("{at}: expected strings only")))
    }
}

fn one_of(v: &Value, allowed: &[&str], at: &str) -> Result<()> {
    match v.as_str() {
        Some(s) if allowed.contains(&s) => Ok(()),
        _ => Err(schema(format!("{at}: unexpected value {v}"))),
    }
}

/// Structural check of an emitted report against the version-1 schema.
pub fn validate(v: &Value) -> Result<()> {
    if field(v, "schema_version", "report")?.as_u64() != Some(u64::from(SCHEMA_VERSION)) {
        return Err(schema(format!("schema_version must be {SCHEMA_VERSION}")));
    }
    if !field(v, "config", "report")?.is_object() {
        return Err(schema("config: expected an object"));
    }

    let summary = field(v, "summary", "report")?;
    let summary_obj = summary.as_object().ok_or_else(|| schema("summary: expected an object"))?;
    if summary_obj.len() != SUMMARY_KEYS.len() {
        return Err(schema("summary: unexpected keys"));
    }
    for key in SUMMARY_KEYS {
        let x = field(summary, key, "summary")?;
        let ok = if key.starts_with("n_") {
            x.is_u64()
        } else {
            x.is_null() || x.as_f64().is_some_and(|r| (0.0..=1.0).contains(&r))
        };
        if !ok {
            return Err(schema(format!("summary.{key}: bad value {x}")));
        }
    }

    let methods = field(v, "methods", "report")?
        .as_array()
        .ok_or_else(|| schema("methods: expected an array"))?;
    let mut previous: Option<&str> = None;
    for (i, m) in methods.iter().enumerate() {
        let at = format!("methods[{i}]");
        let id = field(m, "id", &at)?
            .as_str()
            .ok_or_else(|| schema(format!("{at}.id: expected a string")))?;
        if previous.is_some_and(|p| p >= id) {
            return Err(schema(format!("{at}: methods not sorted by id")));
        }
        previous = Some(id);
        let label = field(m, "classification", &at)?;
        one_of(label, &LABELS, &format!("{at}.classification"))?;
        let excluded = label == "excluded";
        if excluded != m.get("exclusion_reason").is_some() {
            return Err(schema(format!("{at}: exclusion_reason present iff excluded")));
        }
        string_array(field(m, "covering_tests", &at)?, &format!("{at}.covering_tests"))?;
        let variants = field(m, "variants", &at)?
            .as_array()
            .ok_or_else(|| schema(format!("{at}.variants: expected an array")))?;
        for (j, var) in variants.iter().enumerate() {
            let vat = format!("{at}.variants[{j}]");
            if !field(var, "transformation", &vat)?.is_string() {
                return Err(schema(format!("{vat}.transformation: expected a string")));
            }
            one_of(field(var, "detection", &vat)?, &DETECTIONS, &format!("{vat}.detection"))?;
            string_array(field(var, "failing_tests", &vat)?, &format!("{vat}.failing_tests"))?;
        }
    }

    string_array(field(v, "pseudo_tested", "report")?, "pseudo_tested")?;
    string_array(field(v, "warnings", "report")?, "warnings")?;
    if !field(v, "coverage", "report")?.is_object() {
        return Err(schema("coverage: expected an object"));
    }
    let timings = field(v, "timings", "report")?;
    if !(timings.is_null() || timings.is_object()) {
        return Err(schema("timings: expected null or an object"));
    }
    Ok(())
}
