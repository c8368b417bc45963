pub mod bound;
pub mod risk_curve;
pub mod tables;
pub mod verify;

use std::fs;
use std::path::Path;

use anyhow::Context;
use cibound::ProblemConfig;

use crate::{CliError, ScenarioArgs};

pub(crate) fn problem(s: &ScenarioArgs) -> Result<ProblemConfig, CliError> {
    Ok(ProblemConfig::new(s.alpha, s.alpha_tilde, s.rho)?)
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))
        .map_err(CliError::Other)
}

pub(crate) fn write_out(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    crate::cache::write_atomic(&dir.join(name), contents).map_err(CliError::Other)
}

pub(crate) fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output documents serialise");
    s.push('\n');
    s
}
