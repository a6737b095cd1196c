//! CSV assembly and acceptance checks.

use std::fmt::Write as _;

/// Reals are written with 17 significant digits.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Csv {
            text: format!("{header}\n"),
        }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        let line = fields
            .iter()
            .map(|f| f.as_ref())
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(self.text, "{line}");
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Human-readable acceptance band.
    pub threshold: String,
    pub pass: bool,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        measured: f64,
        threshold: impl Into<String>,
        pass: bool,
    ) -> Self {
        Check {
            name: name.into(),
            measured,
            threshold: threshold.into(),
            pass,
        }
    }

    /// `|measured − target| ≤ tol`.
    pub fn within(name: impl Into<String>, measured: f64, target: f64, tol: f64) -> Self {
        let pass = (measured - target).abs() <= tol;
        Check::new(name, measured, format!("{target} ± {tol}"), pass)
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: measured {} (accept {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.threshold
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub main: Csv,
    /// `(suffix, csv)`; written next to the main file as `<stem>_<suffix>.csv`.
    pub extra: Vec<(String, Csv)>,
    pub checks: Vec<Check>,
}

impl ExperimentOutput {
    pub fn new(main: Csv) -> Self {
        ExperimentOutput {
            main,
            extra: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}
