//! Pass/fail reports for exhaustive validation routines.

use std::fmt;

use serde::Serialize;

/// Outcome of a single named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Largest deviation observed over everything the check enumerated.
    pub max_deviation: f64,
    pub tolerance: f64,
    /// Human-readable location of the worst offender, if any.
    pub detail: Option<String>,
}

/// Collection of checks. Validation routines report failures here instead of
/// returning errors.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        name: impl Into<String>,
        max_deviation: f64,
        tolerance: f64,
        detail: Option<String>,
    ) {
        self.checks.push(Check {
            name: name.into(),
            passed: max_deviation <= tolerance,
            max_deviation,
            tolerance,
            detail,
        });
    }

    /// Records a check whose verdict is not a deviation threshold.
    pub fn push_verdict(&mut self, name: impl Into<String>, passed: bool, detail: Option<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            max_deviation: if passed { 0.0 } else { 1.0 },
            tolerance: 0.0,
            detail,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.checks.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(
                f,
                "[{}] {}: max deviation {:.3e} (tol {:.1e})",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.max_deviation,
                c.tolerance
            )?;
            if let Some(d) = &c.detail {
                write!(f, " at {d}")?;
            }
        }
        Ok(())
    }
}
