use std::fmt::Write as _;

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    /// `null` in JSON when the defect is not finite.
    pub max_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub samples: usize,
    /// Raw measured value for checks whose defect is a comparison against a
    /// target (`area_identity`, `distinctness`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, max_defect: f64, tolerance: f64, samples: usize) -> Self {
        Self {
            name: name.into(),
            max_defect,
            tolerance,
            passed: max_defect <= tolerance,
            samples,
            observed: None,
            error: None,
            wall_time_ms: None,
        }
    }

    pub fn failed(name: impl Into<String>, tolerance: f64, samples: usize, error: String) -> Self {
        Self {
            error: Some(error),
            ..Self::new(name, f64::INFINITY, tolerance, samples)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            Format::Table => self.table(),
        }
    }

    fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0).max(5);
        let timed = self.checks.iter().any(|c| c.wall_time_ms.is_some());
        let mut out = format!("scenario: {}\n", self.scenario);
        let _ = write!(out, "{:<width$}  {:>12}  {:>10}  {:>7}  status", "check", "max_defect", "tolerance", "samples");
        if timed {
            out.push_str("  time_ms");
        }
        out.push('\n');
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = write!(
                out,
                "{:<width$}  {:>12.3e}  {:>10.1e}  {:>7}  {status:<6}",
                c.name, c.max_defect, c.tolerance, c.samples
            );
            if let Some(t) = c.wall_time_ms {
                let _ = write!(out, "  {t:>7}");
            }
            if let Some(v) = c.observed {
                let _ = write!(out, "  observed {v:.6}");
            }
            if let Some(e) = &c.error {
                let _ = write!(out, "  error: {e}");
            }
            out = out.trim_end().to_string();
            out.push('\n');
        }
        out
    }
}
