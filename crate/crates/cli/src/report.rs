use std::collections::BTreeSet;
use std::fmt::Write;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use atorus_core::{Label, ResidualReport};

use crate::config::{ConfigEcho, Suite};

/// Version tag at the top of every structured report.
pub const SCHEMA: &str = "atorus-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    Chart,
    Bundle,
    Counterexample,
}

impl TargetKind {
    pub fn name(self) -> &'static str {
        match self {
            TargetKind::Chart => "chart",
            TargetKind::Bundle => "bundle",
            TargetKind::Counterexample => "counterexample",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub name: String,
    pub kind: TargetKind,
    pub dimension: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub reports: Vec<ResidualReport>,
    pub passed: bool,
}

impl SuiteOutcome {
    pub fn new(suite: Suite, reports: Vec<ResidualReport>) -> Self {
        let passed = reports.iter().all(|r| r.vacuous || r.passed);
        SuiteOutcome { suite, reports, passed }
    }

    pub fn report(&self, name: &str) -> Option<&ResidualReport> {
        self.reports.iter().find(|r| r.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationOutcome {
    pub labels: BTreeSet<Label>,
    pub expected: Option<BTreeSet<Label>>,
    pub max_conformal_p: f64,
    /// The residuals behind the labels. A failing entry here is a label
    /// outcome, not a failed check.
    pub residuals: Vec<ResidualReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleOutcome {
    pub name: String,
    pub expected_failure: String,
    pub min_residual: f64,
    pub observed_residual: Option<f64>,
    pub failed_as_expected: bool,
    pub detail: String,
    /// Reports of the check that must fail, and of controls that must pass.
    pub evidence: Vec<ResidualReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub config: ConfigEcho,
    pub target: TargetSummary,
    pub suites: Vec<SuiteOutcome>,
    pub classification: Option<ClassificationOutcome>,
    pub counterexample: Option<CounterexampleOutcome>,
    pub notes: Vec<String>,
    pub passed: bool,
    /// Wall-clock time per suite; text output only.
    #[serde(skip)]
    pub timings: Vec<(Suite, Duration)>,
}

impl RunReport {
    /// Overall verdict: every non-vacuous report passed and every
    /// counterexample failed as expected.
    pub fn verdict(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
            && self.counterexample.as_ref().is_none_or(|c| c.failed_as_expected)
    }

    pub fn suite(&self, suite: Suite) -> Option<&SuiteOutcome> {
        self.suites.iter().find(|s| s.suite == suite)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(
            out,
            "target {} ({}, dim {}) tier {:?} samples {} seed {} tol {:e}",
            self.target.name,
            self.target.kind.name(),
            self.target.dimension.map_or("-".into(), |d| d.to_string()),
            c.tier,
            c.samples,
            c.seed,
            c.tolerance
        );
        for s in &self.suites {
            let time = self
                .timings
                .iter()
                .find(|(t, _)| *t == s.suite)
                .map(|(_, d)| format!(" ({:.2}s)", d.as_secs_f64()))
                .unwrap_or_default();
            let _ = writeln!(out, "\n[{}] {}{time}", s.suite.name(), if s.passed { "pass" } else { "FAIL" });
            for r in &s.reports {
                let _ = writeln!(out, "  {}", r.line());
            }
        }
        if let Some(cl) = &self.classification {
            let _ = writeln!(out, "\nlabels: {}", join(&cl.labels));
            if let Some(e) = &cl.expected {
                let _ = writeln!(out, "expected: {}", join(e));
            }
            let _ = writeln!(out, "max |P| of Ric: {:.3e}", cl.max_conformal_p);
            for r in &cl.residuals {
                let side = if r.passed { "within" } else { "exceeds" };
                let _ = writeln!(out, "  {:<44} max {:>10.3e}  {side} tol", r.name, r.max_residual);
            }
        }
        if let Some(ce) = &self.counterexample {
            let _ = writeln!(
                out,
                "\ncounterexample {}: {} (expects {}, min residual {:e})",
                ce.name,
                if ce.failed_as_expected {
                    "expected failure observed"
                } else {
                    "expected failure NOT observed"
                },
                ce.expected_failure,
                ce.min_residual
            );
            let _ = writeln!(out, "  {}", ce.detail);
            for r in &ce.evidence {
                let _ = writeln!(out, "  {}", r.line());
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        let _ = writeln!(out, "\noverall: {}", if self.passed { "PASS" } else { "FAIL" });
        out
    }
}

fn join(labels: &BTreeSet<Label>) -> String {
    labels.iter().map(Label::to_string).collect::<Vec<_>>().join(", ")
}
