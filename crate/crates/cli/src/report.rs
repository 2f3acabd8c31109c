//! Check records and the JSON report every command writes.

use std::path::Path;

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        }
    }

    /// Fail dominates inconclusive, which dominates pass.
    pub fn worst(a: Status, b: Status) -> Status {
        match (a, b) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    /// Passes when value < threshold (NaN fails).
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        let status = if value < threshold { Status::Pass } else { Status::Fail };
        Self { name: name.into(), value, threshold, status, detail: String::new() }
    }

    /// Passes when |value − target| ≤ tol.
    pub fn near(name: &str, value: f64, target: f64, tol: f64) -> Self {
        let ok = (value - target).abs() <= tol;
        Self {
            name: name.into(),
            value,
            threshold: tol,
            status: if ok { Status::Pass } else { Status::Fail },
            detail: format!("target {target}"),
        }
    }

    pub fn flag(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            threshold: 1.0,
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        }
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    /// Hard errors become failing checks so that a suite always reports.
    pub fn error(name: &str, e: impl std::fmt::Display) -> Self {
        Self { name: name.into(), value: f64::NAN, threshold: f64::NAN, status: Status::Fail, detail: e.to_string() }
    }
}

pub fn overall(checks: &[Check]) -> Status {
    checks.iter().fold(Status::Pass, |s, c| Status::worst(s, c.status))
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub status: Status,
    pub checks: Vec<Check>,
    pub data: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, config_hash: String, seed: u64, checks: Vec<Check>, data: T) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash,
            seed,
            status: overall(&checks),
            checks,
            data,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_file(path, self.to_json().as_bytes())
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!("{:<12} {:<40} {:.3e} (threshold {:.1e})", c.status.label(), c.name, c.value, c.threshold));
            if !c.detail.is_empty() {
                out.push_str(&format!("  {}", c.detail));
            }
            out.push('\n');
        }
        out.push_str(&format!("{}: {}\n", self.command, self.status.label()));
        out
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_ordering_and_exit_codes() {
        assert_eq!(Status::worst(Status::Pass, Status::Inconclusive), Status::Inconclusive);
        assert_eq!(Status::worst(Status::Fail, Status::Inconclusive), Status::Fail);
        assert_eq!(overall(&[]), Status::Pass);
        assert_eq!([Status::Pass, Status::Fail, Status::Inconclusive].map(Status::exit_code), [0, 1, 2]);
    }

    #[test]
    fn nan_never_passes() {
        assert_eq!(Check::below("x", f64::NAN, 1.0).status, Status::Fail);
        assert_eq!(Check::near("x", f64::NAN, 2.0, 0.1).status, Status::Fail);
        assert_eq!(Check::near("x", 2.05, 2.0, 0.1).status, Status::Pass);
    }

    #[test]
    fn reports_are_stable_json() {
        let r = Report::new("t", "h".into(), 3, vec![Check::below("a", 0.5, 1.0)], 7);
        assert_eq!(r.to_json(), r.to_json());
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["status"], "pass");
        assert_eq!(v["seed"], 3);
    }
}
