//! Check results, theorem verdicts and the aggregate verification report.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Not evaluated because a precondition failed.
    Skipped,
    /// Diagnostic value without a pass criterion.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// The identity being checked, as a formula.
    pub identity: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Non-finite residuals cannot be serialized as JSON numbers.
fn sanitize(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::MAX
    }
}

impl CheckResult {
    pub fn from_residual(name: &str, identity: &str, residual: f64, tolerance: f64) -> CheckResult {
        let status = if residual.is_finite() && residual <= tolerance { Status::Pass } else { Status::Fail };
        CheckResult {
            name: name.into(),
            identity: identity.into(),
            max_residual: sanitize(residual),
            tolerance,
            status,
            detail: None,
        }
    }

    pub fn from_outcome(name: &str, identity: &str, outcome: Result<f64>, tolerance: f64) -> CheckResult {
        match outcome {
            Ok(r) => CheckResult::from_residual(name, identity, r, tolerance),
            Err(e) => CheckResult::failed(name, identity, tolerance, e.to_string()),
        }
    }

    pub fn failed(name: &str, identity: &str, tolerance: f64, detail: impl Into<String>) -> CheckResult {
        CheckResult {
            name: name.into(),
            identity: identity.into(),
            max_residual: f64::MAX,
            tolerance,
            status: Status::Fail,
            detail: Some(detail.into()),
        }
    }

    pub fn skipped(name: &str, identity: &str, tolerance: f64, reason: impl Into<String>) -> CheckResult {
        CheckResult {
            name: name.into(),
            identity: identity.into(),
            max_residual: 0.0,
            tolerance,
            status: Status::Skipped,
            detail: Some(reason.into()),
        }
    }

    pub fn info(name: &str, identity: &str, value: f64) -> CheckResult {
        CheckResult {
            name: name.into(),
            identity: identity.into(),
            max_residual: sanitize(value),
            tolerance: 0.0,
            status: Status::Info,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> CheckResult {
        self.detail = Some(detail.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// A named predicate inside a theorem verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub holds: bool,
}

impl Predicate {
    pub fn new(name: &str, residual: f64, tolerance: f64) -> Predicate {
        Predicate { name: name.into(), residual: sanitize(residual), tolerance, holds: residual.is_finite() && residual <= tolerance }
    }

    pub fn from_outcome(name: &str, outcome: Result<f64>, tolerance: f64) -> Predicate {
        Predicate::new(name, outcome.unwrap_or(f64::INFINITY), tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremVerdict {
    pub theorem: String,
    pub statement: String,
    pub hypotheses: Vec<Predicate>,
    pub conclusions: Vec<Predicate>,
    /// Fitted quantities (e.g. the Einstein constant), averaged over samples.
    pub observed: BTreeMap<String, f64>,
    pub hypotheses_hold: bool,
    pub conclusion_holds: bool,
    /// `!hypotheses_hold || conclusion_holds`.
    pub consistent: bool,
}

impl TheoremVerdict {
    pub fn new(
        theorem: &str,
        statement: &str,
        hypotheses: Vec<Predicate>,
        conclusions: Vec<Predicate>,
        observed: BTreeMap<String, f64>,
    ) -> TheoremVerdict {
        let hypotheses_hold = hypotheses.iter().all(|p| p.holds);
        let conclusion_holds = conclusions.iter().all(|p| p.holds);
        let observed = observed.into_iter().map(|(k, v)| (k, sanitize(v))).collect();
        TheoremVerdict {
            theorem: theorem.into(),
            statement: statement.into(),
            hypotheses,
            conclusions,
            observed,
            hypotheses_hold,
            conclusion_holds,
            consistent: !hypotheses_hold || conclusion_holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub bundle_id: String,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    #[serde(default)]
    pub verdicts: Vec<TheoremVerdict>,
    pub overall_pass: bool,
    /// Wall-clock time; omitted unless requested so reports stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

impl VerificationReport {
    pub fn new(bundle_id: &str, samples: usize, seed: u64) -> VerificationReport {
        VerificationReport {
            bundle_id: bundle_id.into(),
            samples,
            seed,
            checks: Vec::new(),
            verdicts: Vec::new(),
            overall_pass: true,
            runtime_ms: None,
        }
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = CheckResult>) {
        self.checks.extend(checks);
        self.refresh();
    }

    pub fn push_check(&mut self, check: CheckResult) {
        self.extend(std::iter::once(check));
    }

    pub fn push_verdicts(&mut self, verdicts: impl IntoIterator<Item = TheoremVerdict>) {
        self.verdicts.extend(verdicts);
        self.refresh();
    }

    /// Overall pass: no failed check and no inconsistent verdict.
    pub fn refresh(&mut self) {
        self.overall_pass =
            self.checks.iter().all(|c| c.status != Status::Fail) && self.verdicts.iter().all(|v| v.consistent);
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

/// Evaluates `f` at every item in parallel and returns the maximum; the
/// first error (in item order) wins. Max is commutative, so the result does
/// not depend on scheduling.
pub fn max_over<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<f64> + Sync + Send) -> Result<f64> {
    let values: Vec<Result<f64>> = items.par_iter().map(&f).collect();
    let mut worst = 0.0f64;
    for v in values {
        let v = v?;
        worst = if v.is_nan() { f64::INFINITY } else { worst.max(v) };
    }
    Ok(worst)
}

/// Evaluates `f` at every item in parallel, keeping item order.
pub fn collect_over<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
    items.par_iter().map(f).collect()
}

/// `max − min` of a sample.
pub fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_ignores_skipped_and_info() {
        let mut r = VerificationReport::new("x", 1, 0);
        r.extend([
            CheckResult::from_residual("a", "a = 0", 1e-12, 1e-8),
            CheckResult::skipped("b", "b = 0", 1e-8, "precondition"),
            CheckResult::info("c", "|c|", 3.0),
        ]);
        assert!(r.overall_pass);
        r.extend([CheckResult::from_residual("d", "d = 0", f64::NAN, 1e-8)]);
        assert!(!r.overall_pass);
        assert_eq!(r.get("d").unwrap().max_residual, f64::MAX);
    }

    #[test]
    fn verdict_consistency() {
        let v = TheoremVerdict::new("t", "s", vec![Predicate::new("h", 1.0, 1e-8)], vec![Predicate::new("c", 1.0, 1e-7)], BTreeMap::new());
        assert!(!v.hypotheses_hold && v.consistent);
        let v = TheoremVerdict::new("t", "s", vec![Predicate::new("h", 0.0, 1e-8)], vec![Predicate::new("c", 1.0, 1e-7)], BTreeMap::new());
        assert!(v.hypotheses_hold && !v.consistent);
    }

    #[test]
    fn max_over_is_order_independent() {
        let items: Vec<f64> = (0..100).map(|i| ((i * 37) % 101) as f64).collect();
        assert_eq!(max_over(&items, |x| Ok(*x)).unwrap(), 100.0);
        assert_eq!(spread(&[1.0, 3.0, 2.0]), 2.0);
    }
}
