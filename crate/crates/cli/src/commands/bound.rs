use std::path::Path;

use cibound::bound::BoundResult;
use cibound::optimizer::{self, OptimizerConfig, TraceRecord};
use cibound::risk::format_sig;
use cibound::ProblemConfig;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{ensure_dir, problem, to_json, write_out};
use crate::cache::{log_run, Cache};
use crate::manifest::RunManifest;
use crate::{BoundArgs, CliError, SearchArgs};

pub const JSON_NAME: &str = "bound.json";
pub const CSV_NAME: &str = "bound.csv";
pub const TRACE_NAME: &str = "trace.jsonl";

pub const TABLE1_HEADER: &str = "alpha_tilde,abs_rho,m1,m2,u_star_star";
pub const TABLE2_HEADER: &str = "alpha_tilde,abs_rho,u,gain_upper_bound,loss,ratio";

/// What to compute: the bound at a fixed `u`, or the threshold `u**`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    AtU(f64),
    UStarStar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundDocument {
    pub manifest: RunManifest,
    pub result: BoundResult,
}

pub fn optimizer_config(search: &SearchArgs, masses: Option<(usize, usize)>) -> Result<OptimizerConfig, CliError> {
    let mut opt = OptimizerConfig {
        multistarts: search.starts,
        max_iterations: search.max_iterations,
        seed: search.seed,
        u_passes: search.passes,
        ..OptimizerConfig::default()
    };
    if let Some((m1, m2)) = masses {
        opt.m1_range = (m1, m1);
        opt.m2_range = (m2, m2);
    }
    opt.validate()?;
    Ok(opt)
}

fn config_json(cfg: &ProblemConfig, mode: Mode, opt: &OptimizerConfig) -> serde_json::Value {
    let mode = match mode {
        Mode::AtU(u) => json!({"u": u}),
        Mode::UStarStar => json!({"uStarStar": true}),
    };
    json!({"problem": cfg, "mode": mode, "optimizer": opt})
}

/// Runs (or loads from cache) one bound computation. Returns the document
/// and whether it came from the cache. With `trace`, the cache is bypassed
/// and the optimiser trace is returned too.
pub fn compute(
    cfg: &ProblemConfig,
    mode: Mode,
    opt: &OptimizerConfig,
    cache: Option<&Cache>,
    trace: bool,
) -> Result<(BoundDocument, bool, Vec<TraceRecord>), CliError> {
    let config = config_json(cfg, mode, opt);
    let mut outputs = vec![JSON_NAME, CSV_NAME];
    if trace {
        outputs.push(TRACE_NAME);
    }
    let manifest = RunManifest::new("bound", &config, Some(opt.seed), &outputs);

    if let (Some(cache), false) = (cache, trace) {
        if let Some(text) = cache.get(&manifest.config_hash) {
            if let Ok(doc) = serde_json::from_str::<BoundDocument>(&text) {
                if doc.manifest == manifest {
                    return Ok((doc, true, Vec::new()));
                }
            }
        }
    }

    let found = match mode {
        Mode::AtU(u) => optimizer::escalate(u, cfg, opt)?,
        Mode::UStarStar => optimizer::solve_u_star_star(cfg, opt)?,
    };
    let doc = BoundDocument {
        manifest,
        result: found.result,
    };
    if let (Some(cache), false) = (cache, trace) {
        cache.put(&doc.manifest.config_hash, &to_json(&doc)).map_err(CliError::Other)?;
    }
    Ok((doc, false, found.trace))
}

pub fn table1_row(r: &BoundResult) -> String {
    format!(
        "{},{},{},{},{}\n",
        format_sig(r.alpha_tilde, 8),
        format_sig(r.rho.abs(), 8),
        r.m1,
        r.m2,
        r.u_star_star.map_or_else(|| "NA".into(), |u| format_sig(u, 8)),
    )
}

pub fn table2_row(r: &BoundResult) -> String {
    format!(
        "{},{},{},{},{},{}\n",
        format_sig(r.alpha_tilde, 8),
        format_sig(r.rho.abs(), 8),
        format_sig(r.u, 8),
        format_sig(r.gain_upper_bound, 8),
        format_sig(r.loss, 8),
        format_sig(r.ratio, 8),
    )
}

fn write_trace(dir: &Path, trace: &[TraceRecord]) -> Result<(), CliError> {
    let mut s = String::new();
    for t in trace {
        s.push_str(&serde_json::to_string(t).expect("trace records serialise"));
        s.push('\n');
    }
    write_out(dir, TRACE_NAME, &s)
}

pub fn run(a: &BoundArgs) -> Result<BoundResult, CliError> {
    let cfg = problem(&a.scenario)?;
    let mode = match (a.u, a.u_star_star) {
        (Some(u), false) if u > 0.0 && u.is_finite() => Mode::AtU(u),
        (Some(_), false) => return Err(CliError::Usage("--u must be a positive number".into())),
        _ => Mode::UStarStar,
    };
    let masses = a.m1.zip(a.m2);
    if masses.is_some_and(|(m1, m2)| m1 == 0 || m2 == 0) {
        return Err(CliError::Usage("--m1 and --m2 must be at least 1".into()));
    }
    let opt = optimizer_config(&a.search, masses)?;
    let cache = (!a.search.no_cache).then(Cache::from_env);

    let (doc, hit, trace) = compute(&cfg, mode, &opt, cache.as_ref(), a.trace)?;
    ensure_dir(&a.out)?;
    write_out(&a.out, JSON_NAME, &to_json(&doc))?;
    let csv = match mode {
        Mode::UStarStar => format!("{TABLE1_HEADER}\n{}", table1_row(&doc.result)),
        Mode::AtU(_) => format!("{TABLE2_HEADER}\n{}", table2_row(&doc.result)),
    };
    write_out(&a.out, CSV_NAME, &(doc.manifest.comment_line() + &csv))?;
    if a.trace {
        write_trace(&a.out, &trace)?;
    }

    let r = &doc.result;
    match mode {
        Mode::UStarStar => println!(
            "u** = {} (m1 = {}, m2 = {}, LB(u**) = {:.9})",
            r.u_star_star.map_or_else(|| "none".into(), |u| format_sig(u, 8)),
            r.m1,
            r.m2,
            r.lb
        ),
        Mode::AtU(u) => println!(
            "LB({u}) = {:.9}; gain upper bound {}, loss {:.4}, ratio {:.4}",
            r.lb,
            format_sig(r.gain_upper_bound, 8),
            r.loss,
            r.ratio
        ),
    }
    let status = if hit { "cache-hit" } else { "computed" };
    log_run(&a.out, &format!("bound {} {status}", doc.manifest.config_hash)).map_err(CliError::Other)?;
    Ok(doc.result)
}
