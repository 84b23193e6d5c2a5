//! Machine-readable suite reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    /// Name of the statement being exercised.
    pub anchor: String,
    pub inputs: BTreeMap<String, String>,
    pub measured: BTreeMap<String, f64>,
    pub bound: String,
    pub samples: u64,
    /// Largest observed value of measured / allowed; at most 1 on a pass.
    pub worst_ratio: Option<f64>,
    pub verdict: Verdict,
}

impl Check {
    pub fn new(id: &str, anchor: &str, bound: &str) -> Self {
        Check {
            id: id.into(),
            anchor: anchor.into(),
            inputs: BTreeMap::new(),
            measured: BTreeMap::new(),
            bound: bound.into(),
            samples: 0,
            worst_ratio: None,
            verdict: Verdict::Pass,
        }
    }

    pub fn input(mut self, key: &str, value: impl ToString) -> Self {
        self.inputs.insert(key.into(), value.to_string());
        self
    }

    pub fn measure(mut self, key: &str, value: f64) -> Self {
        self.measured.insert(key.into(), value);
        self
    }

    pub fn samples(mut self, n: u64) -> Self {
        self.samples = n;
        self
    }

    pub fn ratio(mut self, r: f64) -> Self {
        self.worst_ratio = Some(r);
        self
    }

    pub fn verdict(mut self, ok: bool) -> Self {
        self.verdict = Verdict::from_bool(ok);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

impl SuiteReport {
    pub fn new(suite: &str, seed: u64, checks: Vec<Check>) -> Self {
        let passed = checks.iter().filter(|c| c.passed()).count();
        SuiteReport {
            schema_version: SCHEMA_VERSION,
            suite: suite.into(),
            seed,
            failed: checks.len() - passed,
            passed,
            checks,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    /// Concatenates reports, sorted by suite id.
    pub fn merge(suite: &str, seed: u64, mut parts: Vec<SuiteReport>) -> Self {
        parts.sort_by(|a, b| a.suite.cmp(&b.suite));
        let checks = parts
            .into_iter()
            .flat_map(|p| {
                let prefix = p.suite;
                p.checks.into_iter().map(move |mut c| {
                    c.id = format!("{prefix}/{}", c.id);
                    c
                })
            })
            .collect();
        SuiteReport::new(suite, seed, checks)
    }
}
