#![allow(dead_code)]

use cibound::bound::PriorPair;
use cibound::risk::WidthFunction;
use cibound::ProblemConfig;
use rand::Rng;

/// A width function constant on each quadrature panel, with values drawn
/// from `[lo, hi] * z(alpha)`.
pub fn panel_constant<R: Rng>(rng: &mut R, cfg: &ProblemConfig, lo: f64, hi: f64) -> WidthFunction {
    let panels = cfg.quad().panels;
    let z = cfg.z_alpha();
    let levels: Vec<f64> = (0..panels).map(|_| z * rng.random_range(lo..hi)).collect();
    let width = cfg.c() / panels as f64;
    WidthFunction::from_fn(cfg, |h| levels[((h / width) as usize).min(panels - 1)]).unwrap()
}

pub fn random_prior<R: Rng>(rng: &mut R, m1: usize, m2: usize, nu_max: f64) -> PriorPair {
    let mut g1: Vec<f64> = (0..m1).map(|_| rng.random_range(0.0..6.0)).collect();
    g1.sort_by(f64::total_cmp);
    g1.dedup();
    let mut g2: Vec<f64> = (0..m2).map(|_| rng.random_range(0.05..6.0)).collect();
    g2.sort_by(f64::total_cmp);
    g2.dedup();
    let nu1 = (0..g1.len()).map(|_| rng.random_range(0.0..nu_max)).collect();
    let nu2 = (0..g2.len()).map(|_| rng.random_range(0.0..nu_max)).collect();
    PriorPair::new(g1, nu1, g2, nu2).unwrap()
}

/// Heavy coverage masses at spread locations: the regime where `q(., h)`
/// can have several local minima.
pub fn heavy_prior<R: Rng>(rng: &mut R) -> PriorPair {
    let mut g1: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..6.0)).collect();
    g1.sort_by(f64::total_cmp);
    let nu1 = (0..4).map(|_| 10f64.powf(rng.random_range(0.0..4.0))).collect();
    PriorPair::new(g1, nu1, vec![1.0, 2.5], vec![rng.random_range(0.0..3.0), rng.random_range(0.0..3.0)]).unwrap()
}

pub fn random_config<R: Rng>(rng: &mut R) -> ProblemConfig {
    let alpha_tilde = if rng.random_bool(0.5) { 0.05 } else { 0.1 };
    let rho = rng.random_range(-0.9..0.9);
    ProblemConfig::new(0.05, alpha_tilde, rho).unwrap()
}
