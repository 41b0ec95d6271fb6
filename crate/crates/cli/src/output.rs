//! Text and JSON rendering of verification reports.

use std::fmt::Write as _;

use weakcontact::report::Status;
use weakcontact::VerificationReport;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

const NAME_WIDTH: usize = 38;

fn status_label(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Skipped => "SKIP",
        Status::Info => "INFO",
    }
}

fn verdict_label(holds: bool) -> &'static str {
    if holds {
        "yes"
    } else {
        "no"
    }
}

/// Serialized reports store non-finite residuals as `f64::MAX`.
fn residual_text(r: f64) -> String {
    if r == f64::MAX {
        "inf".into()
    } else {
        format!("{r:.3e}")
    }
}

/// Fixed-width table: one row per check, then one block per theorem.
pub fn render_text(report: &VerificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "bundle  {}", report.bundle_id);
    let _ = writeln!(out, "samples {}  seed {}", report.samples, report.seed);
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<6} {:<NAME_WIDTH$} {:>11} {:>9}  identity", "status", "check", "residual", "tol");
    let _ = writeln!(out, "{}", "-".repeat(6 + 1 + NAME_WIDTH + 1 + 11 + 1 + 9 + 2 + 8));
    for c in &report.checks {
        let residual = match c.status {
            Status::Skipped => "-".to_string(),
            _ => residual_text(c.max_residual),
        };
        let _ = writeln!(
            out,
            "{:<6} {:<NAME_WIDTH$} {:>11} {:>9.1e}  {}",
            status_label(c.status),
            c.name,
            residual,
            c.tolerance,
            c.identity
        );
        if let Some(d) = &c.detail {
            if c.status != Status::Pass {
                let _ = writeln!(out, "{:<6} {:<NAME_WIDTH$} {}", "", "", d);
            }
        }
    }
    for v in &report.verdicts {
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "theorem {}  hypotheses {}  conclusion {}  consistent {}",
            v.theorem,
            verdict_label(v.hypotheses_hold),
            verdict_label(v.conclusion_holds),
            verdict_label(v.consistent)
        );
        let _ = writeln!(out, "  {}", v.statement);
        for (kind, preds) in [("hyp", &v.hypotheses), ("concl", &v.conclusions)] {
            for p in preds {
                let _ = writeln!(
                    out,
                    "  {:<5} {:<4} {:<NAME_WIDTH$} {:>11} {:>9.1e}",
                    kind,
                    if p.holds { "ok" } else { "no" },
                    p.name,
                    residual_text(p.residual),
                    p.tolerance
                );
            }
        }
        for (k, val) in &v.observed {
            let _ = writeln!(out, "  {:<5} {:<4} {:<NAME_WIDTH$} {:>11.6}", "obs", "", k, val);
        }
    }
    let failures: Vec<_> = report.failures().collect();
    if !failures.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "failing checks:");
        for c in failures {
            let _ = writeln!(out, "  {}  residual {}  [{}]", c.name, residual_text(c.max_residual), c.identity);
        }
    }
    let _ = writeln!(out);
    if let Some(ms) = report.runtime_ms {
        let _ = writeln!(out, "runtime {ms} ms");
    }
    let _ = writeln!(out, "overall {}", if report.overall_pass { "PASS" } else { "FAIL" });
    out
}

pub fn render_json(report: &VerificationReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| CliError::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn emit_report(report: &VerificationReport, format: Format) -> Result<String> {
    match format {
        Format::Text => Ok(render_text(report)),
        Format::Json => render_json(report),
    }
}

/// Inverse of the JSON rendering.
pub fn parse_report(text: &str) -> Result<VerificationReport> {
    serde_json::from_str(text)
        .map_err(|e| CliError::Json { line: e.line(), column: e.column(), message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use weakcontact::CheckResult;

    fn sample() -> VerificationReport {
        let mut r = VerificationReport::new("demo", 4, 1);
        r.push_check(CheckResult::from_residual("a.ok", "x = x", 1e-12, 1e-8));
        r.push_check(CheckResult::from_residual("b.bad", "y = 0", 0.25, 1e-8));
        r.push_check(CheckResult::skipped("c.later", "z = 0", 1e-8, "b fails"));
        r.refresh();
        r
    }

    #[test]
    fn infinite_residuals_print_as_inf() {
        assert_eq!(residual_text(f64::MAX), "inf");
        assert_eq!(residual_text(0.5), "5.000e-1");
    }

    #[test]
    fn text_has_rows_failures_and_verdict() {
        let text = render_text(&sample());
        assert!(text.contains("PASS   a.ok"));
        assert!(text.contains("SKIP   c.later"));
        assert!(text.contains("failing checks:\n  b.bad  residual 2.500e-1  [y = 0]"));
        assert!(text.ends_with("overall FAIL\n"));
    }

    #[test]
    fn json_parses_back() {
        let r = sample();
        assert_eq!(parse_report(&render_json(&r).unwrap()).unwrap(), r);
        assert!(matches!(parse_report("{"), Err(CliError::Json { .. })));
    }
}
