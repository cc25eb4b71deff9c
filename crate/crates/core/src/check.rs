//! Pass/fail bookkeeping shared by the verification routines.

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub passed: bool,
    pub cases: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl IdentityCheck {
    pub fn new(identity: impl Into<String>) -> Self {
        Self { identity: identity.into(), passed: true, cases: 0, witness: None }
    }
    /// Records one case; the first failure keeps its description.
    pub fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            if self.passed {
                self.witness = Some(describe());
            }
            self.passed = false;
        }
    }
    pub fn merge(&mut self, other: IdentityCheck) {
        self.cases += other.cases;
        if !other.passed && self.passed {
            self.passed = false;
            self.witness = other.witness;
        }
    }
}
