//! Check reports: named properties with their worst measured violation.

use serde::Serialize;
use std::fmt;

/// One verified property: the largest violation found, the tolerance it was
/// held to, and (when it failed) a description of the worst case.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<String>,
}

impl PropertyCheck {
    pub fn new(name: impl Into<String>, max_violation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            max_violation,
            tolerance,
            pass: max_violation <= tolerance,
            worst: None,
        }
    }

    pub fn with_worst(mut self, worst: impl Into<String>) -> Self {
        self.worst = Some(worst.into());
        self
    }
}

/// A bundle of property checks; passes only if every check does.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub checks: Vec<PropertyCheck>,
}

impl CheckReport {
    pub fn new(checks: Vec<PropertyCheck>) -> Self {
        Self { checks }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_violation(&self) -> f64 {
        self.checks.iter().map(|c| c.max_violation).fold(0.0, f64::max)
    }

    /// The named check, if present.
    pub fn check(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<32} max violation {:.3e} (tol {:.0e}){}",
                if c.pass { "ok  " } else { "FAIL" },
                c.name,
                c.max_violation,
                c.tolerance,
                c.worst.as_deref().map(|w| format!("  [{w}]")).unwrap_or_default(),
            )?;
        }
        Ok(())
    }
}
