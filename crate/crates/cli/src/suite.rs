//! Suite orchestration: sampling, check ordering and precondition gating.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use weakcontact::fbasis::check_f_basis;
use weakcontact::kenmotsu::{beta_kenmotsu_checks, check_kenmotsu_curvature, check_riemann_invariants};
use weakcontact::report::Status;
use weakcontact::soliton::{
    beta_gate, check_einstein, check_gradient_soliton, check_soliton, einstein_fit, soliton_points, theorem_harness,
};
use weakcontact::star::{check_curvature_f_identities, check_star_ricci};
use weakcontact::structure::{check_nijenhuis, validate_wacs};
use weakcontact::{CheckResult, LocalGeometry, SolitonData, VerificationReport, WacsBundle};

use crate::error::{CliError, Result};

pub const DEFAULT_POINTS: usize = 32;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Wacs,
    Kenmotsu,
    Star,
    Soliton,
    Theorems,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Wacs,
    Kenmotsu,
    Star,
    Soliton,
    Theorems,
}

impl Suite {
    fn includes(self, family: Family) -> bool {
        match self {
            Suite::All => true,
            Suite::Wacs => family == Family::Wacs,
            Suite::Kenmotsu => family == Family::Kenmotsu,
            Suite::Star => family == Family::Star,
            Suite::Soliton => family == Family::Soliton,
            Suite::Theorems => family == Family::Theorems,
        }
    }

    fn family(self) -> Option<Family> {
        match self {
            Suite::All => None,
            Suite::Wacs => Some(Family::Wacs),
            Suite::Kenmotsu => Some(Family::Kenmotsu),
            Suite::Star => Some(Family::Star),
            Suite::Soliton => Some(Family::Soliton),
            Suite::Theorems => Some(Family::Theorems),
        }
    }

    fn needs(self, family: Family) -> bool {
        match self {
            Suite::All | Suite::Theorems => true,
            Suite::Wacs => family == Family::Wacs,
            Suite::Kenmotsu => matches!(family, Family::Wacs | Family::Kenmotsu),
            Suite::Star => matches!(family, Family::Wacs | Family::Kenmotsu | Family::Star),
            Suite::Soliton => matches!(family, Family::Wacs | Family::Kenmotsu | Family::Soliton),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
    /// Per-family overrides of `tol`, keyed by a family suite (not `all`).
    pub family_tol: BTreeMap<Suite, f64>,
    pub suite: Suite,
    /// Records wall-clock time in the report, which makes it irreproducible.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig { points: DEFAULT_POINTS, seed: DEFAULT_SEED, tol: DEFAULT_TOL, family_tol: BTreeMap::new(), suite: Suite::All, timing: false }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(CliError::schema("points", "must be at least 1"));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(CliError::schema("tol", "must be positive and finite"));
        }
        for (suite, t) in &self.family_tol {
            if *suite == Suite::All {
                return Err(CliError::schema("family_tol", "`all` is not a check family; use `tol`"));
            }
            if !(*t > 0.0) || !t.is_finite() {
                return Err(CliError::schema(format!("family_tol.{suite:?}").to_lowercase(), "must be positive and finite"));
            }
        }
        Ok(())
    }

    fn tol_for(&self, family: Family) -> f64 {
        self.family_tol.iter().find(|(s, _)| s.family() == Some(family)).map_or(self.tol, |(_, t)| *t)
    }
}

fn any_failed(checks: &[CheckResult]) -> bool {
    checks.iter().any(|c| c.status == Status::Fail)
}

fn worst_residual(checks: &[CheckResult]) -> f64 {
    if any_failed(checks) {
        return f64::INFINITY;
    }
    checks.iter().filter(|c| c.status == Status::Pass).map(|c| c.max_residual).fold(0.0, f64::max)
}

/// Rounds to 10 decimals and drops trailing zeros, e.g. `-6` or `-2.94`.
pub fn format_number(x: f64) -> String {
    let s = format!("{:.10}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// `r = −2n(2n+1)β²`, asserted only where `Ric = λ_E g` holds.
fn scalar_value_check(geos: &[LocalGeometry], tol: f64, skip: Option<String>) -> Result<CheckResult> {
    let geo = &geos[0];
    let n = geo.n() as f64;
    let name = "curvature.scalar_value";
    let beta = match (&skip, geo.beta_value()) {
        (None, Ok(b)) => b,
        (Some(reason), _) => return Ok(CheckResult::skipped(name, "r = −2n(2n+1)β²", tol, reason.clone())),
        (None, Err(e)) => return Ok(CheckResult::skipped(name, "r = −2n(2n+1)β²", tol, e.to_string())),
    };
    let target = -2.0 * n * (2.0 * n + 1.0) * beta * beta;
    let identity = format!("r = {}", format_number(target));
    let fits: Vec<_> = geos.iter().map(einstein_fit).collect();
    if fits.iter().any(|f| f.einstein_residual > tol) {
        return Ok(CheckResult::skipped(name, &identity, tol, "Ric is not Einstein"));
    }
    let r = fits.iter().map(|f| (f.r - target).abs() / target.abs().max(1.0)).fold(0.0, f64::max);
    Ok(CheckResult::from_residual(name, &identity, r, tol))
}

fn skipped_family(names: &[(&str, &str)], tol: f64, reason: &str) -> Vec<CheckResult> {
    names.iter().map(|(n, i)| CheckResult::skipped(n, i, tol, reason)).collect()
}

/// Runs the selected checks in a fixed order: weak almost contact axioms,
/// Nijenhuis tensors, β-Kenmotsu, curvature identities, *-Ricci, *-scalar,
/// soliton residuals and identities, proposition constants, theorems.
/// Checks whose preconditions fail are recorded as skipped.
pub fn run_suite(bundle: &WacsBundle, soliton: Option<&SolitonData>, config: &RunConfig) -> Result<VerificationReport> {
    config.validate()?;
    let start = Instant::now();
    let suite = config.suite;
    let mut report = VerificationReport::new(bundle.id(), config.points, config.seed);
    let points = bundle.sample_points(config.points, config.seed)?;
    let geos = bundle.locals(&points)?;

    let tol = config.tol_for(Family::Wacs);
    let mut wacs = validate_wacs(bundle, &geos, tol)?;
    let wacs_ok = !any_failed(&wacs);
    let gate = |ok: bool, reason: &str| if ok { None } else { Some(reason.to_string()) };
    if wacs_ok {
        wacs.extend(check_f_basis(&geos, tol));
        wacs.extend(check_nijenhuis(&geos, tol));
    } else {
        let reason = "weak almost contact axioms fail";
        wacs.extend(skipped_family(
            &[
                ("fbasis.gram", "Gram{e_i, fe_i/√λ_i, ξ} = I"),
                ("fbasis.f_norms", "g(fe_i, fe_i) = λ_i"),
                ("fbasis.eigenvectors", "Qe_i = λ_i e_i"),
                ("fbasis.q_reconstruction", "Q = Σλ_i(e_i⊗e_i♭ + u_i⊗u_i♭) + ξ⊗η"),
                ("nijenhuis.n1", "N1 = 0"),
            ],
            tol,
            reason,
        ));
    }
    if suite.includes(Family::Wacs) {
        report.extend(wacs.clone());
    }
    if !suite.needs(Family::Kenmotsu) {
        return Ok(finish(report, start, config));
    }

    let tol = config.tol_for(Family::Kenmotsu);
    let kenmotsu_skip = if !wacs_ok {
        Some("weak almost contact axioms fail".to_string())
    } else if bundle.beta().is_none() {
        Some("no β given".to_string())
    } else {
        None
    };
    let kenmotsu = beta_kenmotsu_checks(&geos, tol, kenmotsu_skip.clone());
    let kenmotsu_ok = kenmotsu_skip.is_none() && !any_failed(&kenmotsu);
    let constant_skip = if kenmotsu_ok { beta_gate(&geos) } else { None };
    let downstream = gate(kenmotsu_ok, "structure is not weak β-Kenmotsu").or(constant_skip);
    if suite.includes(Family::Kenmotsu) {
        report.extend(kenmotsu.clone());
        report.extend(check_riemann_invariants(&geos, tol));
        report.extend(check_kenmotsu_curvature(&geos, tol, downstream.clone()));
        report.extend(check_einstein(&geos, tol, downstream.clone()));
        report.push_check(scalar_value_check(&geos, tol, downstream.clone())?);
    }

    let tol = config.tol_for(Family::Star);
    if suite.includes(Family::Star) {
        report.extend(check_star_ricci(&geos, tol, downstream.clone()));
        report.extend(check_curvature_f_identities(&geos, tol, downstream.clone()));
    }

    if !suite.needs(Family::Soliton) {
        return Ok(finish(report, start, config));
    }
    let tol = config.tol_for(Family::Soliton);
    let Some(soliton) = soliton else {
        if suite.includes(Family::Soliton) {
            report.push_check(CheckResult::skipped("soliton.equation", "½ℒ_V g + Ric* = λg + μη⊗η", tol, "no soliton given"));
        }
        return Ok(finish(report, start, config));
    };
    let spoints = soliton_points(bundle, soliton, &points, &geos)?;
    if suite.includes(Family::Soliton) {
        report.extend(check_soliton(&spoints, tol, downstream.clone()));
        if soliton.is_gradient() {
            report.extend(check_gradient_soliton(&spoints, tol, downstream.clone()));
        }
    }
    if suite.includes(Family::Theorems) && downstream.is_none() {
        let mut structure = wacs;
        structure.extend(kenmotsu);
        report.push_verdicts(theorem_harness(&spoints, worst_residual(&structure), config.tol_for(Family::Theorems))?);
    }
    Ok(finish(report, start, config))
}

fn finish(mut report: VerificationReport, start: Instant, config: &RunConfig) -> VerificationReport {
    if config.timing {
        report.runtime_ms = Some(start.elapsed().as_millis() as u64);
    }
    report.refresh();
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_drop_trailing_zeros() {
        assert_eq!(format_number(-6.0), "-6");
        assert_eq!(format_number(-2.94), "-2.94");
        assert_eq!(format_number(-1e-13), "0");
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::default().validate().is_ok());
        assert!(RunConfig { tol: 0.0, ..RunConfig::default() }.validate().is_err());
        assert!(RunConfig { tol: f64::NAN, ..RunConfig::default() }.validate().is_err());
        let mut c = RunConfig::default();
        c.family_tol.insert(Suite::Star, -1.0);
        assert!(matches!(c.validate(), Err(CliError::Schema { path, .. }) if path == "family_tol.star"));
    }

    #[test]
    fn family_lookup_falls_back_to_the_default() {
        let mut c = RunConfig::default();
        c.family_tol.insert(Suite::Soliton, 1e-6);
        assert_eq!(c.tol_for(Family::Soliton), 1e-6);
        assert_eq!(c.tol_for(Family::Wacs), DEFAULT_TOL);
    }

    #[test]
    fn suites_pull_in_their_preconditions() {
        assert!(Suite::Star.needs(Family::Kenmotsu) && !Suite::Star.includes(Family::Kenmotsu));
        assert!(Suite::Theorems.needs(Family::Soliton));
        assert!(!Suite::Wacs.needs(Family::Kenmotsu));
    }
}
