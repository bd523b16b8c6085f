//! Machine-readable outcome of a bounded verification sweep.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Every report describes a finite check and says so.
pub const BOUNDED_SCOPE: &str = "bounded certificate";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Certified,
    Refuted,
    BudgetExceeded,
}

impl Verdict {
    /// Process exit code: 0 certified, 1 refuted, 3 budget exceeded.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Certified => 0,
            Verdict::Refuted => 1,
            Verdict::BudgetExceeded => 3,
        }
    }

    /// Combines verdicts of sub-checks: any refutation wins, then any exhausted budget.
    pub fn merge(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Refuted, _) | (_, Refuted) => Refuted,
            (BudgetExceeded, _) | (_, BudgetExceeded) => BudgetExceeded,
            _ => Certified,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    /// `word` (a group word literal) or `vertex` (a tree vertex).
    pub kind: String,
    pub value: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub automaton: String,
    pub check: String,
    pub params: BTreeMap<String, Value>,
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    pub counts: BTreeMap<String, u64>,
    pub seed: u64,
    pub scope: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl CertReport {
    pub fn new(automaton: impl Into<String>, check: impl Into<String>) -> Self {
        CertReport {
            automaton: automaton.into(),
            check: check.into(),
            params: BTreeMap::new(),
            verdict: Verdict::Certified,
            counterexample: None,
            counts: BTreeMap::new(),
            seed: 0,
            scope: BOUNDED_SCOPE.to_string(),
            warning: None,
            details: None,
            wall_time_ms: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn count(&mut self, key: &str, value: u64) {
        self.counts.insert(key.to_string(), value);
    }

    pub fn refute(&mut self, kind: &str, value: String, reason: impl Into<String>) {
        self.verdict = Verdict::Refuted;
        self.counterexample = Some(Counterexample {
            kind: kind.to_string(),
            value,
            reason: reason.into(),
        });
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
