use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::verdict::{Verdict, SCHEMA};

const BUNDLED: &str = include_str!("expectations.json");

/// How a verdict compares with its scenario's expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "pass")]
    Pass,
    /// The documented violation occurred.
    #[serde(rename = "expected-fail")]
    ExpectedFail,
    #[serde(rename = "unexpected-fail")]
    UnexpectedFail,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::ExpectedFail => "expected-fail",
            Outcome::UnexpectedFail => "unexpected-fail",
        }
    }
}

/// Expected verdict flags of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub bucket: String,
    /// Outcome recorded when every expected flag matches.
    pub outcome: Outcome,
    pub expect: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    pub schema: String,
    pub scenarios: BTreeMap<String, Expectation>,
}

impl Expectations {
    /// The table shipped with the crate.
    pub fn bundled() -> Self {
        serde_json::from_str(BUNDLED).expect("bundled expectations parse")
    }
}

fn flag(v: &Verdict, name: &str) -> Option<bool> {
    match name {
        "monotone_dim" => v.monotone_dim,
        "monotone_count" => v.monotone_count,
        "monotone_measure" => v.monotone_measure,
        "fattening" => v.fattening,
        "localizable" => v.localizable,
        "t0_detected" => Some(v.t0_detected.is_some()),
        _ => None,
    }
}

/// One verdict judged against the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub run: String,
    pub scenario: String,
    pub bucket: Option<String>,
    pub outcome: Outcome,
    /// Flags that differ from the expectation, as `name: expected/actual`.
    pub mismatches: Vec<String>,
}

pub fn classify(run: &str, v: &Verdict, table: &Expectations) -> ReportRow {
    let Some(e) = table.scenarios.get(&v.scenario) else {
        return ReportRow {
            run: run.to_string(),
            scenario: v.scenario.clone(),
            bucket: None,
            outcome: Outcome::UnexpectedFail,
            mismatches: vec!["no expectation for scenario".to_string()],
        };
    };
    let mismatches: Vec<String> = e
        .expect
        .iter()
        .filter(|(name, want)| flag(v, name) != Some(**want))
        .map(|(name, want)| {
            let got = flag(v, name).map_or("n/a".to_string(), |b| b.to_string());
            format!("{name}: expected {want}, got {got}")
        })
        .collect();
    ReportRow {
        run: run.to_string(),
        scenario: v.scenario.clone(),
        bucket: Some(e.bucket.clone()),
        outcome: if mismatches.is_empty() { e.outcome } else { Outcome::UnexpectedFail },
        mismatches,
    }
}

/// Aggregated suite result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub total: usize,
    pub pass: usize,
    pub expected_fail: usize,
    pub unexpected_fail: usize,
    /// Per scenario: outcome name to count.
    pub per_scenario: BTreeMap<String, BTreeMap<String, usize>>,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width text table, one line per run plus totals.
    pub fn table(&self) -> String {
        let w = self.rows.iter().map(|r| r.run.len()).max().unwrap_or(3).max(3);
        let ws = self.rows.iter().map(|r| r.scenario.len()).max().unwrap_or(8).max(8);
        let mut s = String::new();
        let _ = writeln!(s, "{:<w$}  {:<ws$}  {:<15}  bucket", "run", "scenario", "outcome");
        for r in &self.rows {
            let _ = write!(
                s,
                "{:<w$}  {:<ws$}  {:<15}  {}",
                r.run,
                r.scenario,
                r.outcome.as_str(),
                r.bucket.as_deref().unwrap_or("-")
            );
            if !r.mismatches.is_empty() {
                let _ = write!(s, "  [{}]", r.mismatches.join("; "));
            }
            s.push('\n');
        }
        let _ = writeln!(
            s,
            "total {}: pass {}, expected-fail {}, unexpected-fail {}",
            self.total, self.pass, self.expected_fail, self.unexpected_fail
        );
        s
    }
}

/// Judge labelled verdicts against `table`. Rows keep the input order.
pub fn emit_report(verdicts: &[(String, Verdict)], table: &Expectations) -> Result<Report> {
    if verdicts.is_empty() {
        return Err(Error::EmptyVerdictList);
    }
    let rows: Vec<ReportRow> = verdicts.iter().map(|(run, v)| classify(run, v, table)).collect();
    let count = |o: Outcome| rows.iter().filter(|r| r.outcome == o).count();
    let mut per_scenario: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for r in &rows {
        *per_scenario.entry(r.scenario.clone()).or_default().entry(r.outcome.as_str().to_string()).or_default() += 1;
    }
    Ok(Report {
        schema: SCHEMA.to_string(),
        total: rows.len(),
        pass: count(Outcome::Pass),
        expected_fail: count(Outcome::ExpectedFail),
        unexpected_fail: count(Outcome::UnexpectedFail),
        per_scenario,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn verdict(scenario: &str) -> Verdict {
        Verdict::new(scenario)
    }

    #[test]
    fn ring_is_in_measure_increase_bucket() {
        let t = Expectations::bundled();
        assert_eq!(t.scenarios["marriage_ring"].bucket, "expected measure increase");
        assert_eq!(t.scenarios["marriage_ring"].outcome, Outcome::ExpectedFail);
    }

    #[test]
    fn empty_list_is_an_error() {
        assert_eq!(emit_report(&[], &Expectations::bundled()).unwrap_err(), Error::EmptyVerdictList);
    }

    #[test]
    fn mixed_suite_counts_sum() {
        let mut pair = verdict("csf_pair");
        pair.monotone_count = Some(true);
        let mut ring = verdict("marriage_ring");
        ring.monotone_measure = Some(false);
        let mut bad = verdict("csf_self");
        bad.monotone_count = Some(false);
        let unknown = verdict("mystery");
        let list: Vec<(String, Verdict)> =
            [pair, ring, bad, unknown].into_iter().enumerate().map(|(k, v)| (format!("run{k}"), v)).collect();
        let r = emit_report(&list, &Expectations::bundled()).unwrap();
        assert_eq!(r.total, 4);
        assert_eq!(r.pass + r.expected_fail + r.unexpected_fail, 4);
        assert_eq!((r.pass, r.expected_fail, r.unexpected_fail), (1, 1, 2));
        assert!(r.table().contains("unexpected-fail"));
    }
}
