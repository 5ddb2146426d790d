//! Structured verification results, serialized to the JSON report.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub statistic: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub n: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    /// |statistic − target| ≤ tolerance.
    pub fn near(name: &str, statistic: f64, target: f64, tolerance: f64, n: u64, seed: u64) -> Self {
        CheckResult {
            name: name.to_string(),
            statistic,
            target,
            tolerance,
            pass: (statistic - target).abs() <= tolerance,
            n,
            seed,
            detail: None,
        }
    }

    /// statistic ≤ bound.
    pub fn below(name: &str, statistic: f64, bound: f64, n: u64, seed: u64) -> Self {
        CheckResult {
            name: name.to_string(),
            statistic,
            target: bound,
            tolerance: bound,
            pass: statistic <= bound,
            n,
            seed,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {:<58} stat={:<12.6} target={:<12.6} tol={:.3e}{}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.statistic,
            self.target,
            self.tolerance,
            self.detail
                .as_ref()
                .map(|d| format!("  ({d})"))
                .unwrap_or_default()
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
    pub elapsed_seconds: f64,
}

impl Report {
    pub fn new(checks: Vec<CheckResult>, elapsed_seconds: f64) -> Self {
        let all_pass = checks.iter().all(|c| c.pass);
        Report {
            checks,
            all_pass,
            elapsed_seconds,
        }
    }
}
