//! Machine-readable run reports. Field order is fixed by the struct layout
//! and the value map is sorted, so identical runs serialize to identical
//! bytes; exact rationals travel as `num/den` strings.

use num::BigRational;
use procrisk::scalar::rat_string;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: String,
    pub seed: u64,
    pub workers: usize,
    pub checks: Vec<Check>,
    pub values: BTreeMap<String, serde_json::Value>,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub witness: Option<String>,
}

impl Report {
    pub fn new(command: &str, seed: u64, workers: usize) -> Self {
        Report {
            schema_version: 1,
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            workers,
            checks: Vec::new(),
            values: BTreeMap::new(),
            passed: true,
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, witness: Option<String>) {
        self.passed &= passed;
        // A failed check must carry a witness; callers supply the real one.
        let witness = witness.or_else(|| (!passed).then(|| "check failed".to_string()));
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            witness,
        });
    }

    pub fn value_rational(&mut self, key: &str, v: &BigRational) {
        self.values
            .insert(key.to_string(), serde_json::Value::String(rat_string(v)));
    }

    pub fn value_f64(&mut self, key: &str, v: f64) {
        self.values.insert(key.to_string(), serde_json::json!(v));
    }

    pub fn value_string(&mut self, key: &str, v: String) {
        self.values
            .insert(key.to_string(), serde_json::Value::String(v));
    }

    pub fn value_usize(&mut self, key: &str, v: usize) {
        self.values.insert(key.to_string(), serde_json::json!(v));
    }

    pub fn render(&self, format: super::OutputFormat) -> String {
        match format {
            super::OutputFormat::Report => {
                serde_json::to_string_pretty(self).expect("report serializes") + "\n"
            }
            super::OutputFormat::Csv => {
                let mut out = String::from("check,passed,witness\n");
                for c in &self.checks {
                    out.push_str(&format!(
                        "{},{},{}\n",
                        c.name,
                        c.passed,
                        c.witness.as_deref().unwrap_or("")
                    ));
                }
                for (k, v) in &self.values {
                    out.push_str(&format!("value:{k},,{v}\n"));
                }
                out
            }
        }
    }
}
