//! Lower bound on the scaled expected length at `gamma = 0` over all width
//! functions meeting the coverage and maximum-SEL constraints.
//!
//! For a pair of discrete priors `(gamma, nu)` the bound is
//! `LB(u) = 1 + g~(gamma, nu) - u * sum(nu2)`, where
//! `g~ = int_0^c min_{x >= 0} q(x; h, gamma, nu) dh`. The inner minimisation
//! is done pointwise in `h`: the search is confined to `[0, x~]`, candidate
//! local minima are located from sign changes of `dq/dx` on a 0.1 grid and
//! polished by Brent's method, and the smallest candidate wins.
//!
//! `h -> min_x q` is continuous but has kinks where the global minimiser
//! jumps from one local minimum to another. Quadrature panels containing
//! such a switch are bisected until their integral settles; elsewhere the
//! fixed composite rule is used as is.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::pdf;
use crate::quadrature::QuadSpec;
use crate::risk::{self, ell_unchecked, HalfWidth, WidthFunction};
use crate::roots::{brent, RootOptions};
use crate::smoothing::ProblemConfig;

/// Default margin in the `u**` threshold `LB(u**) = 1 + margin`.
pub const DEFAULT_MARGIN: f64 = 0.005;

/// Grid step used to locate sign changes of `dq/dx`.
pub const GRID_STEP: f64 = 0.1;

/// `|dq/dx|` at or below this is treated as zero.
pub const ZERO_SLOPE_TOL: f64 = 1e-12;

/// Candidates whose `q` values differ by less than this tie; smallest `x` wins.
pub const TIE_TOL: f64 = 1e-12;

/// A jump in the pointwise minimiser larger than this between neighbouring
/// nodes marks a change of branch.
const BRANCH_JUMP: f64 = 0.1;

/// Width to which a switch point between branches is bracketed; the
/// integral error from misplacing it by `d` is of order `d^2`.
const SWITCH_TOL: f64 = 1e-9;
const SWITCH_MAX_ITER: usize = 60;
const MAX_SPLIT_DEPTH: u32 = 8;

const ROOT_POLISH: RootOptions = RootOptions {
    x_tol: 1e-12,
    max_iter: 200,
};

/// Two discrete priors: point masses `nu1` at `gamma1` weighting the
/// coverage risk and `nu2` at `gamma2` weighting the SEL risk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PriorPair {
    pub gamma1: Vec<f64>,
    pub nu1: Vec<f64>,
    pub gamma2: Vec<f64>,
    pub nu2: Vec<f64>,
}

impl PriorPair {
    pub fn new(gamma1: Vec<f64>, nu1: Vec<f64>, gamma2: Vec<f64>, nu2: Vec<f64>) -> Result<Self> {
        let p = Self {
            gamma1,
            nu1,
            gamma2,
            nu2,
        };
        p.validate()?;
        Ok(p)
    }

    /// The all-zero prior, which gives `LB = 1 + g~ ~ 0`.
    pub fn empty() -> Self {
        Self {
            gamma1: vec![],
            nu1: vec![],
            gamma2: vec![],
            nu2: vec![],
        }
    }

    pub fn m1(&self) -> usize {
        self.gamma1.len()
    }

    pub fn m2(&self) -> usize {
        self.gamma2.len()
    }

    pub fn nu2_sum(&self) -> f64 {
        self.nu2.iter().sum()
    }

    /// Checks `0 <= gamma1(1) < ... < gamma1(m1)`, `0 < gamma2(1) < ...`, `nu >= 0`.
    pub fn validate(&self) -> Result<()> {
        if self.gamma1.len() != self.nu1.len() || self.gamma2.len() != self.nu2.len() {
            return Err(Error::Prior("location and mass vectors differ in length".into()));
        }
        let all_finite = self
            .gamma1
            .iter()
            .chain(&self.nu1)
            .chain(&self.gamma2)
            .chain(&self.nu2)
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Prior("non-finite entry".into()));
        }
        if self.gamma1.first().is_some_and(|g| *g < 0.0) {
            return Err(Error::Prior("gamma1(1) must be >= 0".into()));
        }
        if self.gamma2.first().is_some_and(|g| *g <= 0.0) {
            return Err(Error::Prior("gamma2(1) must be > 0".into()));
        }
        if !self.gamma1.windows(2).all(|w| w[0] < w[1]) || !self.gamma2.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Prior("locations must be strictly increasing".into()));
        }
        if self.nu1.iter().chain(&self.nu2).any(|v| *v < 0.0) {
            return Err(Error::Prior("masses must be nonnegative".into()));
        }
        Ok(())
    }

    /// Normalised probability masses of the coverage prior (`None` if all zero).
    pub fn p1(&self) -> Option<Vec<f64>> {
        normalise(&self.nu1)
    }

    /// Normalised probability masses of the SEL prior (`None` if all zero).
    pub fn p2(&self) -> Option<Vec<f64>> {
        normalise(&self.nu2)
    }
}

fn normalise(nu: &[f64]) -> Option<Vec<f64>> {
    let total: f64 = nu.iter().sum();
    (total > 0.0).then(|| nu.iter().map(|v| v / total).collect())
}

#[derive(Debug, Clone, Copy)]
struct CoverageTerm {
    /// `nu1(j) * phi(h -/+ gamma1(j))`
    weight: f64,
    /// Centre of `G~` relative to the interval centre, `+/-b(h) - rho(+/-h - gamma1(j))`.
    mu: f64,
    /// `ell_dag(+/-h, gamma1(j))`
    ell_dag: f64,
}

/// Everything in `q(x; h, gamma, nu)` that does not depend on `x`.
#[derive(Debug, Clone)]
pub struct NodeIntegrand {
    h: f64,
    z_alpha: f64,
    sigma: f64,
    /// `2 phi(h) + sum_j nu2(j) (phi(h - gamma2(j)) + phi(h + gamma2(j)))`
    sel_weight: f64,
    terms: Vec<CoverageTerm>,
    /// Max of `|mu|` over the `2 m1` terms (including zero-mass ones).
    x_star: f64,
    /// Max of `|mu|` over terms with positive weight; `t2` is decreasing
    /// beyond it too, since zero-weight terms contribute nothing.
    search_start: f64,
}

impl NodeIntegrand {
    pub fn new(h: f64, prior: &PriorPair, cfg: &ProblemConfig) -> Self {
        let rho = cfg.rho();
        let sigma = cfg.sigma();
        let z = cfg.z_alpha();
        let b = cfg.b(h);

        let sel_weight = 2.0 * pdf(h)
            + prior
                .gamma2
                .iter()
                .zip(&prior.nu2)
                .map(|(g, v)| v * (pdf(h - g) + pdf(h + g)))
                .sum::<f64>();

        let mut terms = Vec::with_capacity(2 * prior.m1());
        let mut x_star: f64 = 0.0;
        let mut search_start: f64 = 0.0;
        for (&g, &v) in prior.gamma1.iter().zip(&prior.nu1) {
            let shift_plus = -rho * (h - g);
            let shift_minus = rho * (h + g);
            let mu_plus = b + shift_plus;
            let mu_minus = -b + shift_minus;
            x_star = x_star.max(mu_plus.abs()).max(mu_minus.abs());
            for (weight, mu, shift) in [(v * pdf(h - g), mu_plus, shift_plus), (v * pdf(h + g), mu_minus, shift_minus)] {
                if weight > 0.0 {
                    search_start = search_start.max(mu.abs());
                    terms.push(CoverageTerm {
                        weight,
                        mu,
                        ell_dag: ell_unchecked(shift, z, sigma),
                    });
                }
            }
        }
        Self {
            h,
            z_alpha: z,
            sigma,
            sel_weight,
            terms,
            x_star,
            search_start,
        }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `q(x; h, gamma, nu)`.
    pub fn q(&self, x: f64) -> f64 {
        let sel = (x / self.z_alpha - 1.0) * self.sel_weight;
        let cov: f64 = self
            .terms
            .iter()
            .map(|t| t.weight * (t.ell_dag - ell_unchecked(t.mu, x, self.sigma)))
            .sum();
        sel + cov
    }

    /// `t1`: the (constant, positive) SEL part of `dq/dx`.
    pub fn t1(&self) -> f64 {
        self.sel_weight / self.z_alpha
    }

    /// `t2(x)`: the coverage part, `sum w (d ell / dx)`.
    pub fn t2(&self, x: f64) -> f64 {
        let inv = 1.0 / self.sigma;
        inv * self
            .terms
            .iter()
            .map(|t| t.weight * (pdf((t.mu + x) * inv) + pdf((t.mu - x) * inv)))
            .sum::<f64>()
    }

    /// `dq/dx = t1 - t2(x)`.
    pub fn dq_dx(&self, x: f64) -> f64 {
        self.t1() - self.t2(x)
    }

    /// Point beyond which `t2` is decreasing.
    pub fn x_star(&self) -> f64 {
        self.x_star
    }

    /// Right end of an interval `[0, x~]` that contains a minimiser of `q`:
    /// `dq/dx > 0` for all `x > x~`.
    pub fn x_tilde(&self) -> Result<f64> {
        if self.terms.is_empty() {
            return Ok(0.0);
        }
        let lo = self.search_start;
        if self.dq_dx(lo) > 0.0 {
            return Ok(lo);
        }
        let mut width = 1.0;
        loop {
            let hi = lo + width;
            if self.dq_dx(hi) > 0.0 {
                return brent(|x| self.dq_dx(x), lo, hi, ROOT_POLISH);
            }
            if width >= 50.0 {
                return Err(Error::SearchBoundNotFound {
                    h: self.h,
                    x_star: lo,
                });
            }
            width = (2.0 * width).min(50.0);
        }
    }

    /// Global minimiser of `q` over `x >= 0`.
    pub fn minimize(&self) -> Result<PointwiseMin> {
        let x_tilde = self.x_tilde()?;
        if x_tilde == 0.0 {
            return Ok(PointwiseMin {
                x: 0.0,
                q: self.q(0.0),
                x_tilde,
                local_minima: 1,
            });
        }

        let w = (x_tilde / GRID_STEP).ceil() as usize;
        let grid: Vec<f64> = (0..=w).map(|i| i as f64 * GRID_STEP).collect();
        let slope: Vec<f64> = grid.iter().map(|&x| self.dq_dx(x)).collect();
        let sign = |v: f64| {
            if v > ZERO_SLOPE_TOL {
                1
            } else if v < -ZERO_SLOPE_TOL {
                -1
            } else {
                0
            }
        };
        let signs: Vec<i8> = slope.iter().map(|&v| sign(v)).collect();

        let mut candidates = Vec::new();
        // x = 0
        if signs[0] > 0 || (signs[0] == 0 && signs.get(1).is_none_or(|s| *s > 0)) {
            candidates.push(0.0);
        }
        for i in 0..w {
            if signs[i] < 0 && signs[i + 1] > 0 {
                candidates.push(brent(|x| self.dq_dx(x), grid[i], grid[i + 1], ROOT_POLISH)?);
            }
            if i > 0 && signs[i] == 0 && signs[i - 1] < 0 && signs[i + 1] > 0 {
                candidates.push(grid[i]);
            }
        }
        let local_minima = candidates.len();
        // x~ itself closes the search interval; q increases beyond it.
        candidates.push(x_tilde);

        let mut best = PointwiseMin {
            x: f64::NAN,
            q: f64::INFINITY,
            x_tilde,
            local_minima,
        };
        for x in candidates {
            let q = self.q(x);
            if q < best.q - TIE_TOL || (q <= best.q + TIE_TOL && x < best.x) {
                best.x = x;
                best.q = q;
            }
        }
        Ok(best)
    }
}

/// Result of the pointwise minimisation at one `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointwiseMin {
    pub x: f64,
    pub q: f64,
    pub x_tilde: f64,
    /// Number of local minimisers found by the grid scan.
    pub local_minima: usize,
}

pub fn integrand_q(x: f64, h: f64, prior: &PriorPair, cfg: &ProblemConfig) -> f64 {
    NodeIntegrand::new(h, prior, cfg).q(x)
}

pub fn dq_dx(x: f64, h: f64, prior: &PriorPair, cfg: &ProblemConfig) -> f64 {
    NodeIntegrand::new(h, prior, cfg).dq_dx(x)
}

pub fn x_star(h: f64, prior: &PriorPair, cfg: &ProblemConfig) -> f64 {
    NodeIntegrand::new(h, prior, cfg).x_star()
}

pub fn x_tilde(h: f64, prior: &PriorPair, cfg: &ProblemConfig) -> Result<f64> {
    NodeIntegrand::new(h, prior, cfg).x_tilde()
}

pub fn minimize_q(h: f64, prior: &PriorPair, cfg: &ProblemConfig) -> Result<PointwiseMin> {
    NodeIntegrand::new(h, prior, cfg).minimize()
}

/// The pointwise minimiser at every quadrature node.
pub fn pointwise_minima(prior: &PriorPair, cfg: &ProblemConfig) -> Result<Vec<PointwiseMin>> {
    cfg.rule()
        .nodes
        .par_iter()
        .map(|&h| NodeIntegrand::new(h, prior, cfg).minimize())
        .collect()
}

/// `s(gamma, nu)`: the width function minimising `g~(s, gamma, nu)`.
pub fn s_of_prior(prior: &PriorPair, cfg: &ProblemConfig) -> Result<WidthFunction> {
    let minima = pointwise_minima(prior, cfg)?;
    WidthFunction::new(
        cfg.rule().nodes.clone(),
        minima.iter().map(|m| m.x).collect(),
        cfg.z_alpha(),
        cfg.c(),
    )
}

/// `g~(s(gamma, nu), gamma, nu)`.
pub fn g_tilde(prior: &PriorPair, cfg: &ProblemConfig) -> Result<f64> {
    g_tilde_with_minima(prior, cfg).map(|(g, _)| g)
}

/// The fixed composite rule applied to the pointwise minima, i.e.
/// `g~(s, gamma, nu)` for `s = s(gamma, nu)` as represented on the nodes.
/// Less accurate than [`g_tilde`] where the minimiser changes branch.
pub fn g_tilde_on_nodes(prior: &PriorPair, cfg: &ProblemConfig) -> Result<f64> {
    let minima = pointwise_minima(prior, cfg)?;
    Ok(cfg.rule().sum_values(&minima.iter().map(|m| m.q).collect::<Vec<_>>()))
}

fn branch_changes(minima: &[PointwiseMin]) -> bool {
    minima.windows(2).any(|w| (w[1].x - w[0].x).abs() > BRANCH_JUMP)
}

/// Point in `[lo, hi]` where the pointwise minimiser switches from the
/// branch through `x_lo` to the one through `x_hi`.
fn locate_switch(mut lo: f64, mut hi: f64, x_lo: f64, x_hi: f64, prior: &PriorPair, cfg: &ProblemConfig) -> Result<f64> {
    for _ in 0..SWITCH_MAX_ITER {
        if hi - lo <= SWITCH_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let x = NodeIntegrand::new(mid, prior, cfg).minimize()?.x;
        if (x - x_lo).abs() <= (x - x_hi).abs() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `int_a^b min_x q dh`, split wherever the minimiser changes branch.
/// Switches between an end point and the first interior node are only
/// looked for when `check_ends` is set (i.e. not at a switch just found).
fn integrate_piece(a: f64, b: f64, check_ends: bool, depth: u32, prior: &PriorPair, cfg: &ProblemConfig) -> Result<f64> {
    let rule = cfg.rule();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut hs: Vec<f64> = rule.reference.0.iter().map(|x| mid + half * x).collect();
    if check_ends {
        hs.insert(0, a);
        hs.push(b);
    }
    let minima = hs
        .iter()
        .map(|&h| NodeIntegrand::new(h, prior, cfg).minimize())
        .collect::<Result<Vec<_>>>()?;
    let interior = if check_ends { &minima[1..minima.len() - 1] } else { &minima[..] };
    let gauss = half * interior.iter().zip(&rule.reference.1).map(|(m, w)| w * m.q).sum::<f64>();
    let jump = (0..minima.len() - 1).find(|&i| (minima[i + 1].x - minima[i].x).abs() > BRANCH_JUMP);
    match jump {
        Some(i) if depth < MAX_SPLIT_DEPTH => {
            let h = locate_switch(hs[i], hs[i + 1], minima[i].x, minima[i + 1].x, prior, cfg)?;
            Ok(integrate_piece(a, h, false, depth + 1, prior, cfg)? + integrate_piece(h, b, false, depth + 1, prior, cfg)?)
        }
        _ => Ok(gauss),
    }
}

/// `g~` together with the pointwise minima at the fixed nodes.
pub fn g_tilde_with_minima(prior: &PriorPair, cfg: &ProblemConfig) -> Result<(f64, Vec<PointwiseMin>)> {
    let minima = pointwise_minima(prior, cfg)?;
    let rule = cfg.rule();
    let k = rule.spec.nodes_per_panel;
    let panels = (0..rule.spec.panels)
        .into_par_iter()
        .map(|p| {
            let (lo, hi) = (p * k, (p + 1) * k);
            let whole = rule.sum_values_range(lo..hi, &minima[lo..hi].iter().map(|m| m.q).collect::<Vec<_>>());
            // include the neighbouring nodes so a switch at a panel edge is seen
            if !branch_changes(&minima[lo.saturating_sub(1)..(hi + 1).min(minima.len())]) {
                return Ok(whole);
            }
            let (a, b) = rule.panel(p);
            integrate_piece(a, b, true, 0, prior, cfg)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((panels.iter().sum(), minima))
}

/// `g~(s, gamma, nu) = int_0^c q(s(h); h, gamma, nu) dh` for a given `s`.
pub fn g_tilde_for<W: HalfWidth + ?Sized>(s: &W, prior: &PriorPair, cfg: &ProblemConfig) -> f64 {
    cfg.rule()
        .integrate(|h| NodeIntegrand::new(h, prior, cfg).q(s.at(h)))
}

/// `g~(s, gamma, nu)` assembled from the risks:
/// `R(s, 0) + sum nu1 R1(s, gamma1) + sum nu2 R2(s, gamma2)`.
pub fn g_tilde_from_risks<W: HalfWidth + ?Sized>(s: &W, prior: &PriorPair, cfg: &ProblemConfig) -> f64 {
    let cov: f64 = prior
        .gamma1
        .iter()
        .zip(&prior.nu1)
        .map(|(&g, &v)| v * risk::r1(s, g, cfg))
        .sum();
    let sel: f64 = prior
        .gamma2
        .iter()
        .zip(&prior.nu2)
        .map(|(&g, &v)| v * risk::r2(s, g, cfg))
        .sum();
    risk::r2(s, 0.0, cfg) + cov + sel
}

/// `LB(u) = 1 + g~ - u sum(nu2)` given a precomputed `g~`.
pub fn lower_bound_from(g_tilde: f64, nu2_sum: f64, u: f64) -> f64 {
    1.0 + g_tilde - nu2_sum * u
}

/// Lower bound on `inf e(0; s)` subject to coverage `>= 1 - alpha` and
/// `max SEL <= 1 + u`, valid for any admissible prior.
pub fn lower_bound(u: f64, prior: &PriorPair, cfg: &ProblemConfig) -> Result<f64> {
    prior.validate()?;
    Ok(lower_bound_from(g_tilde(prior, cfg)?, prior.nu2_sum(), u))
}

/// `u**` solving `LB(u) = 1 + margin`, i.e. `(g~ - margin) / sum(nu2)`.
pub fn u_star_star_from(g_tilde: f64, nu2_sum: f64, margin: f64) -> Result<f64> {
    if !(nu2_sum > 0.0) {
        return Err(Error::ZeroSelMass);
    }
    Ok((g_tilde - margin) / nu2_sum)
}

pub fn u_star_star(prior: &PriorPair, cfg: &ProblemConfig, margin: f64) -> Result<f64> {
    prior.validate()?;
    u_star_star_from(g_tilde(prior, cfg)?, prior.nu2_sum(), margin)
}

/// Upper bound on the squared-SEL gain, the loss `u^2 + 2u`, and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GainLoss {
    pub gain_upper_bound: f64,
    pub loss: f64,
    pub ratio: f64,
}

pub fn gain_loss(lb: f64, u: f64) -> GainLoss {
    let gain_upper_bound = 1.0 - lb * lb;
    let loss = u * u + 2.0 * u;
    GainLoss {
        gain_upper_bound,
        loss,
        ratio: gain_upper_bound / loss,
    }
}

/// Numerical settings a bound was computed under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundDiagnostics {
    pub quad: QuadSpec,
    pub objective_evaluations: usize,
    pub starts: usize,
    pub margin: f64,
    /// Nodes where the grid scan found two or more local minima.
    pub multi_minimum_nodes: usize,
}

/// A certified lower bound and everything derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundResult {
    pub alpha: f64,
    pub alpha_tilde: f64,
    pub rho: f64,
    pub m1: usize,
    pub m2: usize,
    /// The `u` the bound is reported at.
    pub u: f64,
    pub g_tilde: f64,
    pub nu2_sum: f64,
    pub lb: f64,
    /// `None` when `sum(nu2) = 0`.
    pub u_star_star: Option<f64>,
    pub gain_upper_bound: f64,
    pub loss: f64,
    pub ratio: f64,
    pub prior: PriorPair,
    pub diagnostics: BoundDiagnostics,
}

impl BoundResult {
    /// Evaluates the bound for `prior` at `u` from scratch.
    pub fn evaluate(u: f64, prior: PriorPair, cfg: &ProblemConfig, margin: f64) -> Result<Self> {
        prior.validate()?;
        let (g, minima) = g_tilde_with_minima(&prior, cfg)?;
        let mut r = Self::assemble(u, prior, cfg, g, margin);
        r.diagnostics.multi_minimum_nodes = minima.iter().filter(|m| m.local_minima >= 2).count();
        r.diagnostics.objective_evaluations = 1;
        Ok(r)
    }

    pub(crate) fn assemble(u: f64, prior: PriorPair, cfg: &ProblemConfig, g_tilde: f64, margin: f64) -> Self {
        let nu2_sum = prior.nu2_sum();
        let lb = lower_bound_from(g_tilde, nu2_sum, u);
        let gl = gain_loss(lb, u);
        Self {
            alpha: cfg.alpha(),
            alpha_tilde: cfg.alpha_tilde(),
            rho: cfg.rho(),
            m1: prior.m1(),
            m2: prior.m2(),
            u,
            g_tilde,
            nu2_sum,
            lb,
            u_star_star: u_star_star_from(g_tilde, nu2_sum, margin).ok(),
            gain_upper_bound: gl.gain_upper_bound,
            loss: gl.loss,
            ratio: gl.ratio,
            prior,
            diagnostics: BoundDiagnostics {
                quad: cfg.quad(),
                objective_evaluations: 0,
                starts: 0,
                margin,
                multi_minimum_nodes: 0,
            },
        }
    }

    /// The same prior re-reported at another `u` (no recomputation of `g~`).
    pub fn at_u(&self, u: f64) -> Self {
        let lb = lower_bound_from(self.g_tilde, self.nu2_sum, u);
        let gl = gain_loss(lb, u);
        Self {
            u,
            lb,
            gain_upper_bound: gl.gain_upper_bound,
            loss: gl.loss,
            ratio: gl.ratio,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rho: f64) -> ProblemConfig {
        ProblemConfig::new(0.05, 0.05, rho).unwrap()
    }

    fn sample_prior() -> PriorPair {
        PriorPair::new(
            vec![0.0, 1.2, 2.5, 4.0],
            vec![0.3, 0.8, 0.5, 0.2],
            vec![1.0, 3.0],
            vec![0.4, 0.2],
        )
        .unwrap()
    }

    #[test]
    fn prior_validation() {
        assert!(PriorPair::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0], vec![1.0]).is_err());
        assert!(PriorPair::new(vec![-0.1], vec![1.0], vec![1.0], vec![1.0]).is_err());
        assert!(PriorPair::new(vec![0.0], vec![1.0], vec![0.0], vec![1.0]).is_err());
        assert!(PriorPair::new(vec![0.0], vec![-1.0], vec![1.0], vec![1.0]).is_err());
        assert!(PriorPair::new(vec![0.0], vec![1.0, 2.0], vec![1.0], vec![1.0]).is_err());
        let p = sample_prior();
        let p1 = p.p1().unwrap();
        assert!((p1.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((p1[1] - 0.8 / 1.8).abs() < 1e-15);
        assert!(PriorPair::empty().p2().is_none());
    }

    #[test]
    fn zero_masses_leave_only_sel_term() {
        let c = cfg(0.7);
        let p = PriorPair::new(vec![0.5], vec![0.0], vec![1.0], vec![0.0]).unwrap();
        for h in [0.0, 0.8, 3.0] {
            let node = NodeIntegrand::new(h, &p, &c);
            for x in [0.0, 0.7, 2.0] {
                let want = (x / c.z_alpha() - 1.0) * 2.0 * pdf(h);
                assert!((node.q(x) - want).abs() < 1e-15);
                assert!((node.dq_dx(x) - node.t1()).abs() < 1e-15);
            }
            assert!(node.t1() > 0.0);
            assert_eq!(node.x_tilde().unwrap(), 0.0);
            let m = node.minimize().unwrap();
            assert_eq!(m.x, 0.0);
            assert!((m.q + 2.0 * pdf(h)).abs() < 1e-15);
        }
    }

    #[test]
    fn q_vanishes_at_z_without_coverage_masses() {
        let c = cfg(0.6);
        let p = PriorPair::new(vec![], vec![], vec![0.5, 2.0], vec![3.0, 1.0]).unwrap();
        for h in [0.1, 2.0, 7.5] {
            assert!(integrand_q(c.z_alpha(), h, &p, &c).abs() < 1e-15);
        }
    }

    #[test]
    fn q_continuous_in_x() {
        let c = cfg(0.7);
        let p = sample_prior();
        let a = integrand_q(1.3, 0.8, &p, &c);
        let b = integrand_q(1.3 + 1e-8, 0.8, &p, &c);
        assert!((a - b).abs() <= 1e-6);
    }

    #[test]
    fn slope_tends_to_t1() {
        let c = cfg(0.7);
        let p = sample_prior();
        for h in [0.0, 1.0, 5.0] {
            let node = NodeIntegrand::new(h, &p, &c);
            assert!((node.dq_dx(50.0) - node.t1()).abs() < 1e-12);
        }
    }

    #[test]
    fn x_star_examples() {
        let c0 = cfg(0.0);
        assert_eq!(x_star(2.0, &sample_prior(), &c0), 0.0);

        let c = cfg(0.7);
        let p = PriorPair::new(vec![2.0], vec![1.0], vec![1.0], vec![1.0]).unwrap();
        let (h, g, rho) = (1.0, 2.0, 0.7);
        let want = (c.b(h) - rho * (h - g)).abs().max((c.b(-h) - rho * (-h - g)).abs());
        assert!((x_star(h, &p, &c) - want).abs() < 1e-15);
    }

    #[test]
    fn x_tilde_with_uncorrelated_estimators() {
        // rho = 0: x* = 0, and x~ = 0 exactly when dq/dx(0) > 0
        let c0 = cfg(0.0);
        let light = PriorPair::new(vec![1.0], vec![0.01], vec![1.0], vec![0.1]).unwrap();
        let node = NodeIntegrand::new(0.5, &light, &c0);
        assert!(node.dq_dx(0.0) > 0.0);
        assert_eq!(node.x_tilde().unwrap(), 0.0);
        let heavy = PriorPair::new(vec![1.0], vec![20.0], vec![1.0], vec![0.1]).unwrap();
        let node = NodeIntegrand::new(0.5, &heavy, &c0);
        let xt = node.x_tilde().unwrap();
        assert!(xt > 0.0 && node.dq_dx(xt).abs() < 1e-9);
    }

    #[test]
    fn two_routes_to_g_tilde_agree() {
        let c = cfg(0.7);
        let p = sample_prior();
        let sd = risk::SdDelta::new(&c);
        let a = g_tilde_for(&sd, &p, &c);
        let b = g_tilde_from_risks(&sd, &p, &c);
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn empty_prior_bound() {
        let c = cfg(0.7);
        let p = PriorPair::empty();
        let g = g_tilde(&p, &c).unwrap();
        assert!((g + 1.0).abs() < 1e-12);
        let s = s_of_prior(&p, &c).unwrap();
        assert!(s.values().iter().all(|v| *v == 0.0));
        assert!((lower_bound(0.3, &p, &c).unwrap() - (1.0 + g)).abs() < 1e-15);
        assert!(matches!(u_star_star(&p, &c, DEFAULT_MARGIN), Err(Error::ZeroSelMass)));
    }

    #[test]
    fn gain_loss_examples() {
        assert_eq!(gain_loss(1.0, 0.2).gain_upper_bound, 0.0);
        let gl = gain_loss(0.9, 0.105);
        assert!((gl.loss - 0.221025).abs() < 1e-15);
        assert_eq!(format!("{:.4}", gl.loss), "0.2210");
        assert!((gl.ratio - (1.0 - 0.81) / 0.221025).abs() < 1e-15);
    }

    #[test]
    fn u_star_star_scaling() {
        let a = u_star_star_from(1.2, 2.0, DEFAULT_MARGIN).unwrap();
        let b = u_star_star_from(1.2, 6.0, DEFAULT_MARGIN).unwrap();
        assert!((a / b - 3.0).abs() < 1e-14);
        assert!((lower_bound_from(1.2, 2.0, a) - 1.005).abs() < 1e-15);
    }
}
