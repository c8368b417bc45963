use std::fs;

use anyhow::Context;
use cibound::risk::{gamma_grid, risk_curve, HalfWidth, RiskCurve, SdDelta, WidthFunction};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{ensure_dir, problem, to_json, write_out};
use crate::cache::log_run;
use crate::manifest::RunManifest;
use crate::{CliError, RiskCurveArgs, WidthKind};

pub const CSV_NAME: &str = "risk_curve.csv";
pub const JSON_NAME: &str = "risk_curve.json";
pub const SUMMARY_NAME: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CurveSummary {
    pub max_sel: f64,
    pub gamma_at_max_sel: f64,
    pub sel_at_zero: f64,
    pub min_coverage: f64,
    pub gamma_at_min_coverage: f64,
}

impl CurveSummary {
    pub fn of(curve: &RiskCurve) -> Self {
        let argmax = (0..curve.sel.len()).fold(0, |b, i| if curve.sel[i] > curve.sel[b] { i } else { b });
        let argmin = (0..curve.coverage.len()).fold(0, |b, i| if curve.coverage[i] < curve.coverage[b] { i } else { b });
        Self {
            max_sel: curve.sel[argmax],
            gamma_at_max_sel: curve.gamma_grid[argmax],
            sel_at_zero: curve.sel[0],
            min_coverage: curve.coverage[argmin],
            gamma_at_min_coverage: curve.gamma_grid[argmin],
        }
    }
}

pub fn run(a: &RiskCurveArgs) -> Result<(), CliError> {
    let cfg = problem(&a.scenario)?;
    if !(a.gamma_step > 0.0) || !(a.gamma_max >= 0.0) {
        return Err(CliError::Usage("--gamma-step must be > 0 and --gamma-max >= 0".into()));
    }
    let grid = gamma_grid(a.gamma_max, a.gamma_step);

    let (width_desc, width): (serde_json::Value, Box<dyn HalfWidth>) = match a.width {
        WidthKind::SdDelta => (json!({"kind": "sdDelta"}), Box::new(SdDelta::new(&cfg))),
        WidthKind::Constant => {
            let v = a.value.unwrap_or(cfg.z_alpha());
            (json!({"kind": "constant", "value": v}), Box::new(WidthFunction::constant(&cfg, v)?))
        }
        WidthKind::File => {
            let path = a.width_file.as_ref().expect("clap requires --width-file");
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(CliError::Other)?;
            let w: WidthFunction =
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            (json!({"kind": "file", "function": w}), Box::new(w))
        }
    };
    let curve = risk_curve(width.as_ref(), &grid, &cfg)?;

    let config = json!({
        "problem": cfg,
        "width": width_desc,
        "gammaMax": a.gamma_max,
        "gammaStep": a.gamma_step,
    });
    let summary = (a.width == WidthKind::SdDelta).then(|| CurveSummary::of(&curve));
    let mut outputs = vec![CSV_NAME, JSON_NAME];
    if summary.is_some() {
        outputs.push(SUMMARY_NAME);
    }
    let manifest = RunManifest::new("risk-curve", &config, None, &outputs);

    ensure_dir(&a.out)?;
    write_out(&a.out, CSV_NAME, &(manifest.comment_line() + &curve.to_csv()))?;
    write_out(&a.out, JSON_NAME, &to_json(&json!({"manifest": manifest, "curve": curve})))?;
    let s = summary.clone().unwrap_or_else(|| CurveSummary::of(&curve));
    if let Some(summary) = &summary {
        write_out(&a.out, SUMMARY_NAME, &to_json(&json!({"manifest": manifest, "summary": summary})))?;
    }
    println!(
        "max SEL {:.8} at gamma {:.4}; SEL(0) {:.8}; min coverage {:.8} at gamma {:.4}",
        s.max_sel, s.gamma_at_max_sel, s.sel_at_zero, s.min_coverage, s.gamma_at_min_coverage
    );
    log_run(&a.out, &format!("risk-curve {}", manifest.config_hash)).map_err(CliError::Other)?;
    Ok(())
}
