//! Sampled defect reports returned by the `verify_*` / `check_*` operations.

use std::fmt;

/// Named maximum defects over a sample set, compared against one tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub defects: Vec<(&'static str, f64)>,
    pub tolerance: f64,
    pub samples: usize,
}

impl VerificationReport {
    pub fn new(tolerance: f64, samples: usize) -> Self {
        Self {
            defects: Vec::new(),
            tolerance,
            samples,
        }
    }

    pub fn with(mut self, name: &'static str, defect: f64) -> Self {
        self.defects.push((name, defect));
        self
    }

    pub fn defect(&self, name: &str) -> Option<f64> {
        self.defects.iter().find(|(n, _)| *n == name).map(|(_, d)| *d)
    }

    /// Largest recorded defect; NaN defects count as infinite.
    pub fn max_defect(&self) -> f64 {
        self.defects
            .iter()
            .map(|(_, d)| if d.is_nan() { f64::INFINITY } else { *d })
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_defect() <= self.tolerance
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .defects
            .iter()
            .map(|(n, d)| format!("{n}={d:.3e}"))
            .collect();
        write!(
            f,
            "{} ({}; tol {:.1e}, {} samples)",
            if self.passed() { "PASS" } else { "FAIL" },
            parts.join(", "),
            self.tolerance,
            self.samples
        )
    }
}

/// Running maximum that treats NaN as an infinite defect.
pub(crate) fn worst(current: f64, candidate: f64) -> f64 {
    if candidate.is_nan() {
        f64::INFINITY
    } else {
        current.max(candidate)
    }
}
