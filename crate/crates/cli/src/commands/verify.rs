//! Cross-checks the exact coverage and SEL formulas against Monte-Carlo
//! estimates simulated from the joint law of `(G, gamma_hat)`.

use std::fs;

use anyhow::Context;
use cibound::mc::{mc_coverage_with, mc_sel, McEstimate};
use cibound::risk::{self, HalfWidth, SdDelta, WidthFunction};
use cibound::ProblemConfig;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{ensure_dir, to_json, write_out};
use crate::cache::log_run;
use crate::manifest::RunManifest;
use crate::{CliError, VerifyArgs};

pub const REPORT_NAME: &str = "verify.json";

/// Agreement threshold in standard errors.
pub const MAX_Z: f64 = 3.0;

/// Absolute slack added to `MAX_Z * SE`, covering quadrature error when the
/// Monte-Carlo standard error is zero (e.g. constant widths).
pub const ABS_SLACK: f64 = 1e-9;

pub const MIN_N: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum WidthSpec {
    SdDelta,
    Constant { value: f64 },
    Table { function: WidthFunction },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Case {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub alpha_tilde: f64,
    pub rho: f64,
    pub gamma: f64,
    pub width: WidthSpec,
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Comparison {
    pub analytic: f64,
    pub monte_carlo: McEstimate,
    pub pass: bool,
}

impl Comparison {
    pub fn new(analytic: f64, monte_carlo: McEstimate) -> Self {
        let pass = (monte_carlo.mean - analytic).abs() <= MAX_Z * monte_carlo.std_error + ABS_SLACK;
        Self {
            analytic,
            monte_carlo,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CaseReport {
    pub case: Case,
    pub coverage: Comparison,
    pub sel: Comparison,
}

impl CaseReport {
    pub fn pass(&self) -> bool {
        self.coverage.pass && self.sel.pass
    }
}

/// sd_delta at several gamma, a constant and a tabulated width.
pub fn default_cases() -> Vec<Case> {
    let mut cases: Vec<Case> = [0.0, 1.0, 2.0, 4.0]
        .iter()
        .map(|&gamma| Case {
            alpha: 0.05,
            alpha_tilde: 0.05,
            rho: 0.7,
            gamma,
            width: WidthSpec::SdDelta,
        })
        .collect();
    cases.push(Case {
        alpha: 0.05,
        alpha_tilde: 0.1,
        rho: -0.5,
        gamma: 1.5,
        width: WidthSpec::SdDelta,
    });
    cases.push(Case {
        alpha: 0.05,
        alpha_tilde: 0.05,
        rho: 0.6,
        gamma: 2.0,
        width: WidthSpec::Constant { value: 2.1 },
    });
    let cfg = ProblemConfig::new(0.05, 0.1, 0.8).expect("valid scenario");
    let bumpy = WidthFunction::from_fn(&cfg, |h| cfg.z_alpha() + 0.4 * (-(h - 1.5) * (h - 1.5)).exp())
        .expect("finite nonnegative values");
    cases.push(Case {
        alpha: 0.05,
        alpha_tilde: 0.1,
        rho: 0.8,
        gamma: 1.0,
        width: WidthSpec::Table { function: bumpy },
    });
    cases
}

/// Runs one case. `flip_bias` simulates the interval centred with the
/// opposite sign, a deliberate mutation the comparison should catch.
pub fn check_case(case: &Case, n: usize, seed: u64, flip_bias: bool) -> Result<CaseReport, CliError> {
    let cfg = ProblemConfig::new(case.alpha, case.alpha_tilde, case.rho)?;
    let width: Box<dyn HalfWidth> = match &case.width {
        WidthSpec::SdDelta => Box::new(SdDelta::new(&cfg)),
        WidthSpec::Constant { value } => Box::new(WidthFunction::constant(&cfg, *value)?),
        WidthSpec::Table { function } => {
            if function.c() != cfg.c() {
                return Err(CliError::Usage(format!("width table has c = {}, expected {}", function.c(), cfg.c())));
            }
            Box::new(function.clone())
        }
    };
    let s = width.as_ref();
    let sign = if flip_bias { -1.0 } else { 1.0 };
    let cov_mc = mc_coverage_with(s, |x| sign * cfg.b(x), case.gamma, cfg.rho(), n, seed);
    let sel_mc = mc_sel(s, case.gamma, &cfg, n, seed ^ 0x5E1);
    Ok(CaseReport {
        case: case.clone(),
        coverage: Comparison::new(risk::coverage(s, case.gamma, &cfg), cov_mc),
        sel: Comparison::new(risk::sel(s, case.gamma, &cfg), sel_mc),
    })
}

pub fn load_cases(path: &std::path::Path) -> Result<Vec<Case>, CliError> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(CliError::Other)?;
    let cases: Vec<Case> =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed cases file {}: {e}", path.display())))?;
    if cases.is_empty() {
        return Err(CliError::Usage(format!("cases file {} lists no cases", path.display())));
    }
    Ok(cases)
}

pub fn run(a: &VerifyArgs) -> Result<(), CliError> {
    if a.n < MIN_N {
        return Err(CliError::Usage(format!("--n must be at least {MIN_N}")));
    }
    let cases = match &a.cases {
        Some(p) => load_cases(p)?,
        None => default_cases(),
    };
    let mut reports = Vec::with_capacity(cases.len());
    for (i, case) in cases.iter().enumerate() {
        let r = check_case(case, a.n, a.seed.wrapping_add(i as u64), a.flip_bias)?;
        println!(
            "case {i:>2}: coverage {:.6} vs MC {:.6} (SE {:.1e}) | SEL {:.6} vs MC {:.6} (SE {:.1e}) -> {}",
            r.coverage.analytic,
            r.coverage.monte_carlo.mean,
            r.coverage.monte_carlo.std_error,
            r.sel.analytic,
            r.sel.monte_carlo.mean,
            r.sel.monte_carlo.std_error,
            if r.pass() { "ok" } else { "FAIL" }
        );
        reports.push(r);
    }
    let failed = reports.iter().filter(|r| !r.pass()).count();

    if let Some(out) = &a.out {
        let config = json!({"n": a.n, "cases": cases, "flipBias": a.flip_bias});
        let manifest = RunManifest::new("verify", &config, Some(a.seed), &[REPORT_NAME]);
        ensure_dir(out)?;
        write_out(out, REPORT_NAME, &to_json(&json!({"manifest": manifest, "failed": failed, "reports": reports})))?;
        log_run(out, &format!("verify {} failed={failed}", manifest.config_hash)).map_err(CliError::Other)?;
    }
    if failed > 0 {
        return Err(CliError::Verification {
            failed,
            total: reports.len(),
        });
    }
    Ok(())
}
