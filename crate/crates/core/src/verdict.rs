use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Version tag written into every verdict document.
pub const SCHEMA: &str = "1";

/// A flagged sample: why a verdict is what it is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Note {
    /// Index into the scenario's sample series, when the note refers to one.
    pub sample: Option<usize>,
    pub t: Option<f64>,
    pub message: String,
}

/// Machine-checkable judgment of one scenario run.
///
/// `None` fields are not applicable to the scenario. Every `Some(false)`
/// is accompanied by at least one note citing a sample index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verdict {
    pub schema: String,
    pub scenario: String,
    pub monotone_dim: Option<bool>,
    pub monotone_count: Option<bool>,
    /// Non-increase of the intersection measure estimate.
    #[serde(default)]
    pub monotone_measure: Option<bool>,
    pub t0_detected: Option<f64>,
    pub fattening: Option<bool>,
    /// Outcome of a localizability check.
    #[serde(default)]
    pub localizable: Option<bool>,
    pub notes: Vec<Note>,
    pub tolerances: BTreeMap<String, f64>,
}

impl Verdict {
    pub fn new(scenario: impl Into<String>) -> Self {
        Verdict {
            schema: SCHEMA.to_string(),
            scenario: scenario.into(),
            monotone_dim: None,
            monotone_count: None,
            monotone_measure: None,
            t0_detected: None,
            fattening: None,
            localizable: None,
            notes: Vec::new(),
            tolerances: BTreeMap::new(),
        }
    }

    pub fn note(&mut self, sample: Option<usize>, t: Option<f64>, message: impl Into<String>) {
        self.notes.push(Note { sample, t, message: message.into() });
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.to_string(), value);
    }

    /// True when every false flag is backed by a note with a sample index.
    pub fn citations_ok(&self) -> bool {
        let any_false = [
            self.monotone_dim,
            self.monotone_count,
            self.monotone_measure,
            self.fattening.map(|f| !f),
            self.localizable,
        ]
        .contains(&Some(false));
        !any_false || self.notes.iter().any(|n| n.sample.is_some())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }
}

/// Outcome of a monotonicity scan over a series.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneScan {
    pub monotone: bool,
    /// Index of the first unforgiven increase.
    pub violation: Option<usize>,
    /// Indices of single-sample increases that were forgiven.
    pub forgiven: Vec<usize>,
}

/// Scan a series for increases beyond `tol`.
///
/// An increase over the last accepted value that lasts a single sample is
/// forgiven; two consecutive increased samples are a violation. `None`
/// entries are below every number.
pub fn scan_nonincreasing(values: &[Option<f64>], tol: f64) -> MonotoneScan {
    let above = |v: Option<f64>, base: Option<f64>| match (v, base) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(a), Some(b)) => a > b + tol,
    };
    let mut scan = MonotoneScan { monotone: true, violation: None, forgiven: Vec::new() };
    let Some(&first) = values.first() else {
        return scan;
    };
    let mut base = first;
    for k in 1..values.len() {
        if above(values[k], base) {
            if k + 1 < values.len() && above(values[k + 1], base) {
                scan.monotone = false;
                scan.violation = Some(k);
                return scan;
            }
            scan.forgiven.push(k);
        } else {
            base = values[k];
        }
    }
    scan
}

/// Counts as optional reals for [`scan_nonincreasing`].
pub fn counts_as_values(counts: &[usize]) -> Vec<Option<f64>> {
    counts.iter().map(|&c| Some(c as f64)).collect()
}

/// Time of the first empty sample that follows a nonempty one; 0 when the
/// series starts empty.
pub fn first_empty_time(times: &[f64], counts: &[usize]) -> Option<f64> {
    if counts.first() == Some(&0) {
        return Some(times[0]);
    }
    (1..counts.len()).find(|&k| counts[k] == 0 && counts[k - 1] > 0).map(|k| times[k])
}
