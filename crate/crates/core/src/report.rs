use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Failures kept verbatim in a report; the rest are only counted.
pub const MAX_RECORDED_FAILURES: usize = 32;

/// Outcome of a property check: `{lemma, instances, failures, seed}`, plus the
/// number of individual assertions and the total failure count (only the first
/// [`MAX_RECORDED_FAILURES`] are kept).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub lemma: String,
    pub instances: usize,
    pub checks: usize,
    pub failures: Vec<Failure>,
    pub failure_count: usize,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub inputs: BTreeMap<String, String>,
    pub expected: String,
    pub got: String,
}

impl Failure {
    pub fn new<K: Into<String>, V: ToString>(
        inputs: impl IntoIterator<Item = (K, V)>,
        expected: impl Into<String>,
        got: impl Into<String>,
    ) -> Self {
        Self {
            inputs: inputs
                .into_iter()
                .map(|(k, v)| (k.into(), v.to_string()))
                .collect(),
            expected: expected.into(),
            got: got.into(),
        }
    }
}

impl Report {
    pub fn new(lemma: impl Into<String>, seed: Option<u64>) -> Self {
        Self {
            lemma: lemma.into(),
            instances: 0,
            checks: 0,
            failures: Vec::new(),
            failure_count: 0,
            seed,
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    pub fn begin_instance(&mut self) {
        self.instances += 1;
    }

    /// Counts one assertion; records `failure` when present.
    pub fn check(&mut self, failure: Option<Failure>) {
        self.checks += 1;
        if let Some(f) = failure {
            self.fail(f);
        }
    }

    pub fn fail(&mut self, failure: Failure) {
        self.failure_count += 1;
        if self.failures.len() < MAX_RECORDED_FAILURES {
            self.failures.push(failure);
        }
    }

    /// Folds another report's counts and failures into this one.
    pub fn absorb(&mut self, other: Report) {
        self.instances += other.instances;
        self.checks += other.checks;
        self.failure_count += other.failure_count;
        for f in other.failures {
            if self.failures.len() < MAX_RECORDED_FAILURES {
                self.failures.push(f);
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
