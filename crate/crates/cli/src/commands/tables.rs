//! Batch runs over the standard grid: alpha = 0.05, alpha_tilde in
//! {0.05, 0.1}, |rho| in {0.5, 0.6, 0.7, 0.8}.

use cibound::bound::BoundResult;
use cibound::ProblemConfig;
use serde_json::json;

use super::bound::{compute, optimizer_config, Mode, TABLE1_HEADER, TABLE2_HEADER};
use super::{ensure_dir, to_json, write_out};
use crate::cache::{log_run, Cache};
use crate::manifest::RunManifest;
use crate::{CliError, TableArgs};

pub const ALPHA: f64 = 0.05;

/// `(alpha_tilde, |rho|, m1, m2)` for each cell of the grid.
pub const CELLS: [(f64, f64, usize, usize); 8] = [
    (0.05, 0.5, 4, 4),
    (0.05, 0.6, 4, 4),
    (0.05, 0.7, 5, 3),
    (0.05, 0.8, 5, 3),
    (0.1, 0.5, 4, 2),
    (0.1, 0.6, 7, 4),
    (0.1, 0.7, 5, 2),
    (0.1, 0.8, 5, 2),
];

/// `(alpha_tilde, |rho|, u)`: two values of `u` per cell, above its `u**`.
pub const GAIN_POINTS: [(f64, f64, f64); 16] = [
    (0.05, 0.5, 0.079),
    (0.05, 0.5, 0.105),
    (0.05, 0.6, 0.113),
    (0.05, 0.6, 0.151),
    (0.05, 0.7, 0.171),
    (0.05, 0.7, 0.228),
    (0.05, 0.8, 0.226),
    (0.05, 0.8, 0.301),
    (0.1, 0.5, 0.041),
    (0.1, 0.5, 0.055),
    (0.1, 0.6, 0.066),
    (0.1, 0.6, 0.089),
    (0.1, 0.7, 0.095),
    (0.1, 0.7, 0.127),
    (0.1, 0.8, 0.117),
    (0.1, 0.8, 0.156),
];

pub fn masses_for(alpha_tilde: f64, rho: f64) -> Option<(usize, usize)> {
    CELLS
        .iter()
        .find(|c| c.0 == alpha_tilde && c.1 == rho.abs())
        .map(|c| (c.2, c.3))
}

fn run_batch(
    a: &TableArgs,
    name: &str,
    header: &str,
    jobs: &[(f64, f64, Mode, (usize, usize))],
    row: fn(&BoundResult) -> String,
) -> Result<(), CliError> {
    let cache = (!a.search.no_cache).then(Cache::from_env);
    let mut results = Vec::with_capacity(jobs.len());
    let mut hashes = Vec::with_capacity(jobs.len());
    for &(alpha_tilde, rho, mode, masses) in jobs {
        let cfg = ProblemConfig::new(ALPHA, alpha_tilde, rho)?;
        let opt = optimizer_config(&a.search, Some(masses))?;
        let (doc, hit, _) = compute(&cfg, mode, &opt, cache.as_ref(), false)?;
        eprint!("{}", row(&doc.result));
        hashes.push(json!({"hash": doc.manifest.config_hash, "cached": hit}));
        results.push(doc.result);
    }

    let csv_name = format!("{name}.csv");
    let json_name = format!("{name}.json");
    let config = json!({
        "jobs": jobs.iter().map(|(at, rho, mode, (m1, m2))| json!({
            "alphaTilde": at, "rho": rho, "m1": m1, "m2": m2,
            "u": match mode { Mode::AtU(u) => Some(*u), Mode::UStarStar => None },
        })).collect::<Vec<_>>(),
        "seed": a.search.seed,
        "starts": a.search.starts,
        "maxIterations": a.search.max_iterations,
        "passes": a.search.passes,
    });
    let manifest = RunManifest::new(name, &config, Some(a.search.seed), &[&csv_name, &json_name]);
    let mut csv = manifest.comment_line();
    csv.push_str(header);
    csv.push('\n');
    for r in &results {
        csv.push_str(&row(r));
    }
    ensure_dir(&a.out)?;
    write_out(&a.out, &csv_name, &csv)?;
    write_out(&a.out, &json_name, &to_json(&json!({"manifest": manifest, "rows": results})))?;
    print!("{}", &csv[csv.find('\n').map_or(0, |i| i + 1)..]);
    let cached: Vec<_> = hashes.iter().map(|h| h["cached"].as_bool().unwrap_or(false)).collect();
    log_run(&a.out, &format!("{name} {} cached={cached:?}", manifest.config_hash)).map_err(CliError::Other)?;
    Ok(())
}

pub fn table1(a: &TableArgs) -> Result<(), CliError> {
    let jobs: Vec<_> = CELLS
        .iter()
        .map(|&(at, rho, m1, m2)| (at, rho, Mode::UStarStar, (m1, m2)))
        .collect();
    run_batch(a, "table1", TABLE1_HEADER, &jobs, super::bound::table1_row)
}

pub fn table2(a: &TableArgs) -> Result<(), CliError> {
    let jobs: Vec<_> = GAIN_POINTS
        .iter()
        .map(|&(at, rho, u)| (at, rho, Mode::AtU(u), masses_for(at, rho).expect("every gain point has a cell")))
        .collect();
    run_batch(a, "table2", TABLE2_HEADER, &jobs, super::bound::table2_row)
}
