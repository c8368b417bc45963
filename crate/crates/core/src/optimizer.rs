//! Numerical maximisation over the two discrete priors, either of `LB(u)`
//! at a fixed `u` or of the threshold `u**` itself.
//!
//! Priors are searched in an unconstrained parametrisation: locations are
//! cumulative sums of exponentials (the first coverage location is a
//! square so that it can reach 0), masses are squares. Every point of the
//! search space is therefore an admissible prior, and every reported bound
//! is valid whatever the optimiser's quality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::{g_tilde, u_star_star_from, BoundResult, PriorPair, DEFAULT_MARGIN};
use crate::error::{Error, Result};
use crate::simplex::{nelder_mead, SimplexOptions};
use crate::smoothing::ProblemConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OptimizerConfig {
    pub multistarts: usize,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub stall_window: usize,
    /// Inclusive ranges searched by [`escalate`] and [`solve_u_star_star`].
    pub m1_range: (usize, usize),
    pub m2_range: (usize, usize),
    /// Recorded with results; not used by the stopping rule.
    pub epsilon: f64,
    pub seed: u64,
    /// `LB(u**) = 1 + margin`.
    pub margin: f64,
    /// Warm-started re-optimisations of `LB` at the current `u**`.
    pub u_passes: usize,
    /// Restarts of the simplex from the best point of each start.
    pub restarts: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            multistarts: 8,
            max_iterations: 2000,
            convergence_tol: 1e-7,
            stall_window: 100,
            m1_range: (3, 6),
            m2_range: (2, 4),
            epsilon: 0.05,
            seed: 20_190_417,
            margin: DEFAULT_MARGIN,
            u_passes: 1,
            restarts: 3,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.multistarts == 0 {
            return Err(Error::Config("multistarts must be >= 1".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Config("convergence tolerance must be > 0".into()));
        }
        if self.m1_range.0 == 0 || self.m2_range.0 == 0 || self.m1_range.0 > self.m1_range.1 || self.m2_range.0 > self.m2_range.1 {
            return Err(Error::Config("mass-count ranges must be nonempty and start at 1 or more".into()));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::Config("margin must be >= 0".into()));
        }
        Ok(())
    }

    fn simplex(&self) -> SimplexOptions {
        SimplexOptions {
            max_iterations: self.max_iterations,
            tol: self.convergence_tol,
            stall_window: self.stall_window,
            step: 0.4,
        }
    }
}

/// Maps an unconstrained vector of length `2 (m1 + m2)` to a prior.
///
/// Coordinates are clamped to a range well beyond anything that affects the
/// bound (gaps up to `e^5`, masses up to `1e6`), and each location is at
/// least the next float above its predecessor, so the result always validates.
pub fn decode(theta: &[f64], m1: usize, m2: usize) -> PriorPair {
    assert_eq!(theta.len(), 2 * (m1 + m2));
    let (loc1, rest) = theta.split_at(m1);
    let (loc2, rest) = rest.split_at(m2);
    let (mass1, mass2) = rest.split_at(m1);

    let gap = |a: f64| a.clamp(-LOG_GAP_MAX, LOG_GAP_MAX).exp();
    let after = |prev: f64, a: f64| (prev + gap(a)).max(prev.next_up());
    let mut gamma1: Vec<f64> = Vec::with_capacity(m1);
    for (j, a) in loc1.iter().enumerate() {
        let g = if j == 0 {
            let a = a.clamp(-ROOT_MAX, ROOT_MAX);
            a * a
        } else {
            after(gamma1[j - 1], *a)
        };
        gamma1.push(g);
    }
    let mut gamma2: Vec<f64> = Vec::with_capacity(m2);
    for (j, a) in loc2.iter().enumerate() {
        let g = if j == 0 { gap(*a) } else { after(gamma2[j - 1], *a) };
        gamma2.push(g);
    }
    let mass = |v: &f64| {
        let v = v.clamp(-MASS_ROOT_MAX, MASS_ROOT_MAX);
        v * v
    };
    PriorPair {
        gamma1,
        nu1: mass1.iter().map(mass).collect(),
        gamma2,
        nu2: mass2.iter().map(mass).collect(),
    }
}

const LOG_GAP_MAX: f64 = 5.0;
const ROOT_MAX: f64 = 12.0;
const MASS_ROOT_MAX: f64 = 1e3;

/// Inverse of [`decode`] for priors with strictly positive gaps.
pub fn encode(prior: &PriorPair) -> Vec<f64> {
    let mut theta = Vec::with_capacity(2 * (prior.m1() + prior.m2()));
    for (j, g) in prior.gamma1.iter().enumerate() {
        theta.push(if j == 0 { g.sqrt() } else { (g - prior.gamma1[j - 1]).max(1e-12).ln() });
    }
    for (j, g) in prior.gamma2.iter().enumerate() {
        theta.push(if j == 0 { g.max(1e-12).ln() } else { (g - prior.gamma2[j - 1]).max(1e-12).ln() });
    }
    theta.extend(prior.nu1.iter().map(|v| v.sqrt()));
    theta.extend(prior.nu2.iter().map(|v| v.sqrt()));
    theta
}

/// A random admissible prior: locations spread over `[0, 6]`, masses in `[0.01, 2]`.
pub fn random_prior<R: Rng>(rng: &mut R, m1: usize, m2: usize) -> PriorPair {
    let mut gamma1: Vec<f64> = (0..m1).map(|_| rng.random_range(0.0..6.0)).collect();
    gamma1.sort_by(f64::total_cmp);
    if rng.random_bool(0.5) {
        gamma1[0] = 0.0;
    }
    let mut gamma2: Vec<f64> = (0..m2).map(|_| rng.random_range(0.05..6.0)).collect();
    gamma2.sort_by(f64::total_cmp);
    let spread = |v: &mut Vec<f64>| {
        for j in 1..v.len() {
            if v[j] <= v[j - 1] + 1e-3 {
                v[j] = v[j - 1] + 1e-3;
            }
        }
    };
    spread(&mut gamma1);
    spread(&mut gamma2);
    PriorPair {
        gamma1,
        nu1: (0..m1).map(|_| rng.random_range(0.01..2.0)).collect(),
        gamma2,
        nu2: (0..m2).map(|_| rng.random_range(0.01..2.0)).collect(),
    }
}

/// What a search maximises.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Target {
    /// `LB(u)` at the given `u`.
    LowerBound(f64),
    /// `u** = (g~ - margin) / sum(nu2)`.
    Threshold,
}

/// One record of the optimiser trace, written whenever a start improves
/// its best objective value: the value and the prior attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceRecord {
    pub target: Target,
    pub m1: usize,
    pub m2: usize,
    pub start: usize,
    pub iteration: usize,
    pub value: f64,
    pub prior: PriorPair,
}

/// Best prior found by a search, evaluated from scratch, and the trace.
#[derive(Debug, Clone)]
pub struct Optimized {
    pub result: BoundResult,
    pub trace: Vec<TraceRecord>,
}

/// Negated objective; `+inf` where it is undefined.
fn objective(theta: &[f64], m1: usize, m2: usize, target: Target, cfg: &ProblemConfig, margin: f64) -> f64 {
    let prior = decode(theta, m1, m2);
    let Ok(g) = g_tilde(&prior, cfg) else {
        return f64::INFINITY;
    };
    match target {
        Target::LowerBound(u) => -(1.0 + g - prior.nu2_sum() * u),
        Target::Threshold => u_star_star_from(g, prior.nu2_sum(), margin).map_or(f64::INFINITY, |v| -v),
    }
}

fn score(r: &BoundResult, target: Target) -> f64 {
    match target {
        Target::LowerBound(_) => r.lb,
        Target::Threshold => r.u_star_star.unwrap_or(f64::NEG_INFINITY),
    }
}

fn start_seed(seed: u64, m1: usize, m2: usize, start: usize) -> u64 {
    // splitmix-style mixing keeps per-start streams distinct and scheduling-independent
    let mut z = seed ^ ((m1 as u64) << 48) ^ ((m2 as u64) << 32) ^ start as u64;
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_target(target: Target) -> Result<()> {
    match target {
        Target::LowerBound(u) if !(u > 0.0 && u.is_finite()) => Err(Error::Domain {
            name: "u",
            value: u,
            expected: "> 0",
        }),
        _ => Ok(()),
    }
}

/// Multistart simplex search over priors with `m1` coverage and `m2` SEL
/// masses. `warm` priors of matching sizes are used as extra starting
/// points ahead of `random_starts` seeded random ones.
fn search(
    target: Target,
    m1: usize,
    m2: usize,
    cfg: &ProblemConfig,
    opt: &OptimizerConfig,
    warm: &[PriorPair],
    random_starts: usize,
) -> Result<Optimized> {
    check_target(target)?;
    if m1 == 0 || m2 == 0 {
        return Err(Error::Config("m1 and m2 must be >= 1".into()));
    }
    let mut starts: Vec<Vec<f64>> = warm
        .iter()
        .filter(|p| p.m1() == m1 && p.m2() == m2)
        .map(encode)
        .collect();
    for s in 0..random_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(start_seed(opt.seed, m1, m2, s));
        starts.push(encode(&random_prior(&mut rng, m1, m2)));
    }
    if starts.is_empty() {
        return Err(Error::Config("no starting priors of the requested sizes".into()));
    }

    let simplex = opt.simplex();
    let runs: Vec<(Vec<f64>, f64, usize, Vec<TraceRecord>)> = starts
        .par_iter()
        .enumerate()
        .map(|(i, x0)| {
            let f = |t: &[f64]| objective(t, m1, m2, target, cfg, opt.margin);
            let mut x = x0.clone();
            let mut best = f64::INFINITY;
            let mut evals = 0;
            let mut trace = Vec::new();
            let mut offset = 0;
            for _ in 0..=opt.restarts {
                let previous = best;
                let r = nelder_mead(f, &x, simplex);
                evals += r.evaluations;
                for (k, value, point) in &r.improvements {
                    let value = *value;
                    if value >= best {
                        continue;
                    }
                    let prior = decode(point, m1, m2);
                    assert!(prior.validate().is_ok(), "decoded prior violates its constraints");
                    trace.push(TraceRecord {
                        target,
                        m1,
                        m2,
                        start: i,
                        iteration: offset + k,
                        value: -value,
                        prior,
                    });
                    best = value;
                }
                offset += r.iterations;
                let improved = previous - r.value;
                if r.value <= best {
                    best = r.value;
                    x = r.x;
                }
                if improved < opt.convergence_tol {
                    break;
                }
            }
            (x, best, evals, trace)
        })
        .collect();

    // associative min of the negated objective, ties to the lowest start index
    let (best_i, _) = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
        .expect("at least one start");
    let evaluations = runs.iter().map(|r| r.2).sum();
    let prior = decode(&runs[best_i].0, m1, m2);
    prior.validate()?;
    let mut result = match target {
        Target::LowerBound(u) => BoundResult::evaluate(u, prior, cfg, opt.margin)?,
        Target::Threshold => {
            let r = BoundResult::evaluate(1.0, prior, cfg, opt.margin)?;
            let u = r.u_star_star.ok_or(Error::ZeroSelMass)?;
            r.at_u(u)
        }
    };
    result.diagnostics.objective_evaluations = evaluations;
    result.diagnostics.starts = starts.len();
    let trace = runs.into_iter().flat_map(|r| r.3).collect();
    Ok(Optimized { result, trace })
}

/// Maximises `LB(u)` over priors with `m1` coverage masses and `m2` SEL
/// masses; `warm` priors of matching sizes are tried as extra starts.
pub fn optimize_prior_with(
    u: f64,
    m1: usize,
    m2: usize,
    cfg: &ProblemConfig,
    opt: &OptimizerConfig,
    warm: &[PriorPair],
) -> Result<Optimized> {
    opt.validate()?;
    search(Target::LowerBound(u), m1, m2, cfg, opt, warm, opt.multistarts)
}

pub fn optimize_prior(u: f64, m1: usize, m2: usize, cfg: &ProblemConfig, opt: &OptimizerConfig) -> Result<BoundResult> {
    Ok(optimize_prior_with(u, m1, m2, cfg, opt, &[])?.result)
}

/// Maximises `u**` directly over priors with `m1` and `m2` masses. The
/// reported bound is evaluated at `u = u**`.
pub fn maximize_u_star_star(m1: usize, m2: usize, cfg: &ProblemConfig, opt: &OptimizerConfig) -> Result<Optimized> {
    opt.validate()?;
    search(Target::Threshold, m1, m2, cfg, opt, &[], opt.multistarts)
}

/// Best `LB(u)` over every `(m1, m2)` in the configured ranges.
pub fn escalate(u: f64, cfg: &ProblemConfig, opt: &OptimizerConfig) -> Result<Optimized> {
    escalate_target(Target::LowerBound(u), cfg, opt)
}

fn escalate_target(target: Target, cfg: &ProblemConfig, opt: &OptimizerConfig) -> Result<Optimized> {
    opt.validate()?;
    let mut best: Option<BoundResult> = None;
    let mut trace = Vec::new();
    let mut evaluations = 0;
    for m1 in opt.m1_range.0..=opt.m1_range.1 {
        for m2 in opt.m2_range.0..=opt.m2_range.1 {
            // smaller priors embed in larger ones by adding negligible masses
            let seeds: Vec<PriorPair> = best.iter().filter_map(|b| embed(&b.prior, m1, m2)).collect();
            let r = search(target, m1, m2, cfg, opt, &seeds, opt.multistarts)?;
            evaluations += r.result.diagnostics.objective_evaluations;
            trace.extend(r.trace);
            if best.as_ref().is_none_or(|b| score(&r.result, target) > score(b, target)) {
                best = Some(r.result);
            }
        }
    }
    let mut result = best.expect("ranges are nonempty");
    result.diagnostics.objective_evaluations = evaluations;
    Ok(Optimized { result, trace })
}

/// Pads `prior` to `(m1, m2)` masses with small masses beyond its last location.
pub fn embed(prior: &PriorPair, m1: usize, m2: usize) -> Option<PriorPair> {
    if prior.m1() > m1 || prior.m2() > m2 {
        return None;
    }
    let mut p = prior.clone();
    let pad = |g: &mut Vec<f64>, v: &mut Vec<f64>, m: usize, first: f64| {
        while g.len() < m {
            let next = g.last().map_or(first, |l| l + 0.5);
            g.push(next);
            v.push(1e-6);
        }
    };
    pad(&mut p.gamma1, &mut p.nu1, m1, 0.0);
    pad(&mut p.gamma2, &mut p.nu2, m2, 0.5);
    Some(p)
}

/// Finds a prior with `LB(u**) = 1 + margin` and `u**` as large as the
/// search allows.
///
/// `u**` is first maximised directly over the priors (over every `(m1, m2)`
/// in range). The prior is then re-optimised for `LB` at `u = u**`
/// (`opt.u_passes` times, warm-started from the current best), which can
/// only move `u**` up since the best bound is convex and decreasing in `u`.
/// The largest `u**` found is reported, evaluated at `u = u**`.
pub fn solve_u_star_star(cfg: &ProblemConfig, opt: &OptimizerConfig) -> Result<Optimized> {
    let Optimized { mut result, mut trace } = escalate_target(Target::Threshold, cfg, opt)?;
    let mut evaluations = result.diagnostics.objective_evaluations;
    for _ in 0..opt.u_passes {
        let u = result.u_star_star.ok_or(Error::ZeroSelMass)?;
        if !(u > 0.0) {
            break;
        }
        let warm = [result.prior.clone()];
        let r = search(Target::LowerBound(u), result.m1, result.m2, cfg, opt, &warm, 0)?;
        evaluations += r.result.diagnostics.objective_evaluations;
        trace.extend(r.trace);
        match r.result.u_star_star {
            Some(v) if v > u * (1.0 + U_REL_TOL) => result = r.result.at_u(v),
            _ => break,
        }
    }
    result.diagnostics.objective_evaluations = evaluations;
    Ok(Optimized { result, trace })
}

/// Relative gain in `u**` below which further passes stop.
const U_REL_TOL: f64 = 1e-6;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_is_always_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let theta: Vec<f64> = (0..14).map(|_| rng.random_range(-800.0..800.0)).collect();
            let p = decode(&theta, 4, 3);
            p.validate().unwrap();
        }
    }

    #[test]
    fn encode_decode_round_trip() {
        let p = PriorPair::new(vec![0.0, 1.0, 2.5], vec![0.2, 0.0, 1.5], vec![0.7, 3.0], vec![0.4, 0.1]).unwrap();
        let q = decode(&encode(&p), 3, 2);
        for (a, b) in [(&p.gamma1, &q.gamma1), (&p.nu1, &q.nu1), (&p.gamma2, &q.gamma2), (&p.nu2, &q.nu2)] {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn embed_pads_with_small_masses() {
        let p = PriorPair::new(vec![0.0, 1.0], vec![1.0, 1.0], vec![2.0], vec![0.5]).unwrap();
        let e = embed(&p, 4, 2).unwrap();
        e.validate().unwrap();
        assert_eq!((e.m1(), e.m2()), (4, 2));
        assert!(embed(&p, 1, 1).is_none());
    }

    #[test]
    fn config_validation() {
        let mut o = OptimizerConfig::default();
        o.validate().unwrap();
        o.margin = -1.0;
        assert!(o.validate().is_err());
        o.margin = DEFAULT_MARGIN;
        o.multistarts = 0;
        assert!(o.validate().is_err());
        let o = OptimizerConfig {
            convergence_tol: 0.0,
            ..OptimizerConfig::default()
        };
        assert!(o.validate().is_err());
    }
}
