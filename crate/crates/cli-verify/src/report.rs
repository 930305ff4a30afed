//! Suite reports. The content is a pure function of the configuration;
//! timings and the worker count sit in a separate `runtime` object.

use serde::Serialize;
use serde_json::{json, Value};

pub const REPORT_FORMAT_TAG: &str = "suite-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn label(self) -> &'static str {
        match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIP",
        }
    }
}

/// What a check returns.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub summary: String,
    pub window: Option<Value>,
    pub detail: Value,
}

impl Outcome {
    pub fn new(pass: bool, summary: impl Into<String>) -> Self {
        Outcome { pass, summary: summary.into(), window: None, detail: Value::Null }
    }

    pub fn window(mut self, w: impl Serialize) -> Self {
        self.window = Some(serde_json::to_value(w).expect("window serializes"));
        self
    }

    /// Sets the detail object; sub-check results from `all` are kept under
    /// "parts".
    pub fn detail(mut self, mut d: Value) -> Self {
        if let (Some(parts), Some(obj)) = (self.detail.get("parts").cloned(), d.as_object_mut()) {
            obj.insert("parts".into(), parts);
        }
        self.detail = d;
        self
    }

    /// Passes when every listed sub-check does.
    pub fn all(parts: Vec<(&str, bool)>, summary: impl Into<String>) -> Self {
        let pass = parts.iter().all(|(_, ok)| *ok);
        let failed: Vec<&str> = parts.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
        let mut summary = summary.into();
        if !failed.is_empty() {
            summary = format!("{summary}; failed: {}", failed.join(", "));
        }
        let detail = Value::Object(parts.into_iter().map(|(n, ok)| (n.to_string(), Value::Bool(ok))).collect());
        Outcome { pass, summary, window: None, detail: json!({ "parts": detail }) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: CheckStatus,
    pub summary: String,
    pub window: Option<Value>,
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Runtime {
    pub threads: usize,
    pub total_ms: u64,
    pub checks_ms: Vec<(String, u64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub format: &'static str,
    pub suite: String,
    pub config: Value,
    pub warnings: Vec<String>,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
    pub runtime: Runtime,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn content_value(&self) -> Value {
        json!({
            "format": self.format,
            "suite": self.suite,
            "config": self.config,
            "warnings": self.warnings,
            "checks": self.checks,
            "pass": self.pass,
        })
    }

    /// The deterministic part: everything except `runtime`.
    pub fn content_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.content_value()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per check, then the overall verdict. Never parsed back.
    pub fn to_text(&self) -> String {
        let mut out = format!("suite {}\n", self.suite);
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for (c, (_, ms)) in self.checks.iter().zip(&self.runtime.checks_ms) {
            out.push_str(&format!("{} {:width$}  {} ({ms} ms)\n", c.status.label(), c.name, c.summary));
        }
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        out.push_str(&format!("{verdict} {} of {} checks passed\n", self.passed(), self.checks.len()));
        out
    }

    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.status == CheckStatus::Pass).count()
    }
}
