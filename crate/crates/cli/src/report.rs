use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Worst residual behind the verdict; `null` when infinite or not applicable.
    pub residual: Option<f64>,
    pub citation: String,
    /// Skipped checks pass vacuously and say why here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, residual: f64, citation: &str) -> Self {
        Self {
            name: name.into(),
            pass,
            residual: residual.is_finite().then_some(residual),
            citation: citation.into(),
            note: None,
        }
    }

    /// Passes when `residual < tol`.
    pub fn below(name: impl Into<String>, residual: f64, tol: f64, citation: &str) -> Self {
        Self::new(name, residual < tol, residual, citation)
    }

    pub fn failed(name: impl Into<String>, citation: &str, why: impl Into<String>) -> Self {
        Self { name: name.into(), pass: false, residual: None, citation: citation.into(), note: Some(why.into()) }
    }

    pub fn skipped(name: impl Into<String>, citation: &str, why: impl Into<String>) -> Self {
        Self { name: name.into(), pass: true, residual: None, citation: citation.into(), note: Some(why.into()) }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub all_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
    pub summary: Summary,
}

impl Report {
    pub fn new(suite: &str, checks: Vec<Check>) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        let summary = Summary { total: checks.len(), passed, failed: checks.len() - passed, all_pass: passed == checks.len() };
        Self { suite: suite.into(), checks, summary }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
