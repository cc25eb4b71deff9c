//! Per-identity records and their JSON and text renderings.

use std::fmt::Write as _;

use lie_star::check::IdentityCheck;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    /// Short description of the statement being checked.
    pub anchor: String,
    pub samples: usize,
    pub status: Status,
    /// The violation is the expected outcome for this record.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub expect_violation: bool,
    /// First defect found, rendered exactly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

impl Record {
    /// `holds` is whether the identity held on every sample.
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, samples: usize, holds: bool, defect: Option<String>) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            samples,
            status: if holds { Status::Pass } else { Status::Fail },
            expect_violation: false,
            defect,
            wall_ms: None,
        }
    }
    pub fn from_check(scope: &str, c: IdentityCheck, anchor: &str) -> Self {
        Self::new(format!("{scope}/{}", c.identity), anchor, c.cases, c.passed, c.witness)
    }
    pub fn error(name: impl Into<String>, anchor: impl Into<String>, message: String) -> Self {
        Self::new(name, anchor, 0, false, Some(format!("error: {message}")))
    }
    /// Inverts the verdict: the record passes iff a witness was produced.
    pub fn expecting_violation(mut self) -> Self {
        self.expect_violation = true;
        let violated = self.status == Status::Fail && self.defect.as_deref().is_some_and(|d| !d.starts_with("error:"));
        self.status = if violated { Status::Pass } else { Status::Fail };
        self
    }
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub seed: u64,
    pub passed: bool,
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(seed: u64, mut records: Vec<Record>) -> Self {
        records.sort_by(|a, b| a.name.cmp(&b.name));
        let passed = records.iter().all(Record::passed);
        Self { version: env!("CARGO_PKG_VERSION").to_string(), seed, passed, records }
    }
    pub fn merge(reports: Vec<Report>) -> Self {
        let seed = reports.first().map(|r| r.seed).unwrap_or(0);
        Report::new(seed, reports.into_iter().flat_map(|r| r.records).collect())
    }
    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.passed())
    }
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let width = self.records.iter().map(|r| r.name.len()).max().unwrap_or(0);
        for r in &self.records {
            let tag = match (r.status, r.expect_violation) {
                (Status::Pass, false) => "PASS",
                (Status::Pass, true) => "PASS (violation expected)",
                (Status::Fail, _) => "FAIL",
            };
            let _ = write!(out, "{:<width$}  {tag}  [{} samples]", r.name, r.samples);
            if let Some(ms) = r.wall_ms {
                let _ = write!(out, "  {ms} ms");
            }
            out.push('\n');
            let _ = writeln!(out, "{:<width$}    {}", "", r.anchor);
            if let Some(d) = &r.defect {
                let _ = writeln!(out, "{:<width$}    defect: {d}", "");
            }
        }
        let n = self.records.len();
        let f = self.failures().count();
        let _ = writeln!(out, "{} of {n} records pass; suite {}", n - f, if self.passed { "PASSES" } else { "FAILS" });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_and_round_trips() {
        let r = Report::new(
            7,
            vec![Record::new("b", "second", 2, true, None), Record::new("a", "first", 1, false, Some("x".into()))],
        );
        assert_eq!(r.records[0].name, "a");
        assert!(!r.passed);
        assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
        assert!(r.to_text().contains("FAIL"));
    }

    #[test]
    fn expected_violation() {
        assert!(Record::new("a", "", 1, false, Some("w".into())).expecting_violation().passed());
        assert!(!Record::new("a", "", 1, true, None).expecting_violation().passed());
        assert!(!Record::error("a", "", "boom".into()).expecting_violation().passed());
    }
}
