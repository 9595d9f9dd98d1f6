//! Report records, assertion evaluation, and CSV tables.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::context::Effective;
use crate::schema::{Assertion, Op};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    pub settings: Effective,
    pub tasks: Vec<TaskRecord>,
    pub summary: Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub tasks: usize,
    pub errors: usize,
    pub assertions: usize,
    pub failed_assertions: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssertionResult {
    pub metric: String,
    pub op: Op,
    pub expected: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub actual: Option<Value>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskRecord {
    pub index: usize,
    pub id: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub metrics: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub assertions: Vec<AssertionResult>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    #[serde(skip)]
    pub table: Option<Table>,
}

/// Looks up `a.b.c` through nested objects.
pub fn metric<'a>(metrics: &'a BTreeMap<String, Value>, path: &str) -> Option<&'a Value> {
    let mut parts = path.split('.');
    let mut v = metrics.get(parts.next()?)?;
    for p in parts {
        v = v.get(p)?;
    }
    Some(v)
}

fn approx(a: &Value, b: &Value, tol: f64) -> bool {
    match (a, b) {
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| approx(p, q, tol)),
        _ => match (a.as_f64(), b.as_f64()) {
            (Some(p), Some(q)) => (p - q).abs() <= tol,
            _ => a == b,
        },
    }
}

pub fn check(a: &Assertion, actual: Option<&Value>) -> bool {
    let Some(actual) = actual else {
        return false;
    };
    let nums = actual.as_f64().zip(a.value.as_f64());
    match a.op {
        Op::Eq => nums.map_or(actual == &a.value, |(x, y)| x == y),
        Op::Ne => nums.map_or(actual != &a.value, |(x, y)| x != y),
        Op::Le => nums.is_some_and(|(x, y)| x <= y),
        Op::Lt => nums.is_some_and(|(x, y)| x < y),
        Op::Ge => nums.is_some_and(|(x, y)| x >= y),
        Op::Gt => nums.is_some_and(|(x, y)| x > y),
        Op::Approx => approx(actual, &a.value, a.tolerance.unwrap_or(1e-9)),
    }
}

pub fn evaluate(assertions: &[Assertion], metrics: &BTreeMap<String, Value>) -> Vec<AssertionResult> {
    assertions
        .iter()
        .map(|a| {
            let actual = metric(metrics, &a.metric);
            AssertionResult {
                metric: a.metric.clone(),
                op: a.op,
                expected: a.value.clone(),
                tolerance: a.tolerance,
                passed: check(a, actual),
                actual: actual.cloned(),
            }
        })
        .collect()
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Writes `<index>-<id>.csv` for every task with a table.
    pub fn write_tables(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>, csv::Error> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for t in &self.tasks {
            if let Some(table) = &t.table {
                let path = dir.join(format!("{:02}-{}.csv", t.index, sanitize(&t.id)));
                table.write_csv(&path)?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn assertion(metric: &str, op: Op, value: Value) -> Assertion {
        Assertion {
            metric: metric.into(),
            op,
            value,
            tolerance: Some(1e-6),
        }
    }

    #[test]
    fn nested_lookup_and_comparisons() {
        let mut m = BTreeMap::new();
        m.insert("verdict".to_string(), json!("equivalent"));
        m.insert("by_mode".to_string(), json!({"split": {"unknown": 0}}));
        m.insert("offsets".to_string(), json!([[1.0000001], [0.5]]));
        assert_eq!(metric(&m, "by_mode.split.unknown"), Some(&json!(0)));
        assert!(metric(&m, "by_mode.merge").is_none());
        let r = evaluate(
            &[
                assertion("verdict", Op::Eq, json!("equivalent")),
                assertion("by_mode.split.unknown", Op::Le, json!(0)),
                assertion("offsets", Op::Approx, json!([[1.0], [0.5]])),
                assertion("missing", Op::Eq, json!(1)),
                assertion("verdict", Op::Lt, json!(3)),
            ],
            &m,
        );
        let passed: Vec<bool> = r.iter().map(|a| a.passed).collect();
        assert_eq!(passed, [true, true, true, false, false]);
    }
}
