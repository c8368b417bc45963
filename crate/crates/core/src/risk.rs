//! Exact coverage and scaled expected length of the interval
//! `[theta_hat - b(gamma_hat) -/+ s(gamma_hat)]` (standard units), as
//! integrals over `[0, c]` of the width function `s`.
//!
//! Coverage is `1 - alpha - R1(s, gamma)`, scaled expected length is
//! `1 + R2(s, gamma)`; `R2` never depends on `rho`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{interval_prob, pdf};
use crate::smoothing::{r_delta, ProblemConfig};

/// An even, nonnegative half-width function equal to `z(alpha)` for `|x| >= c`.
pub trait HalfWidth: Sync {
    fn at(&self, x: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + Sync> HalfWidth for F {
    fn at(&self, x: f64) -> f64 {
        self(x)
    }
}

/// A width function in the class `D`, stored by its values at a set of
/// nodes in `[0, c]`. Between nodes it takes the value of the nearest node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WidthDoc", into = "WidthDoc")]
pub struct WidthFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
    tail: f64,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct WidthDoc {
    nodes: Vec<f64>,
    values: Vec<f64>,
    tail: f64,
    c: f64,
}

impl TryFrom<WidthDoc> for WidthFunction {
    type Error = Error;
    fn try_from(doc: WidthDoc) -> Result<Self> {
        Self::new(doc.nodes, doc.values, doc.tail, doc.c)
    }
}

impl From<WidthFunction> for WidthDoc {
    fn from(w: WidthFunction) -> Self {
        Self {
            nodes: w.nodes,
            values: w.values,
            tail: w.tail,
            c: w.c,
        }
    }
}

impl WidthFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, tail: f64, c: f64) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::Config(format!(
                "width function needs matching nonempty nodes/values (got {} and {})",
                nodes.len(),
                values.len()
            )));
        }
        if !nodes.windows(2).all(|p| p[0] < p[1]) {
            return Err(Error::Config("width nodes must be strictly increasing".into()));
        }
        if nodes[0] < 0.0 || *nodes.last().unwrap() > c {
            return Err(Error::Config(format!("width nodes must lie in [0, {c}]")));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain {
                name: "width value",
                value: *v,
                expected: "finite and >= 0",
            });
        }
        if !(tail > 0.0) {
            return Err(Error::Domain {
                name: "tail",
                value: tail,
                expected: "> 0",
            });
        }
        Ok(Self { nodes, values, tail, c })
    }

    /// Samples `f` at the quadrature nodes of `cfg`, with tail `z(alpha)`.
    pub fn from_fn<F: Fn(f64) -> f64>(cfg: &ProblemConfig, f: F) -> Result<Self> {
        let nodes = cfg.rule().nodes.clone();
        let values = nodes.iter().map(|&h| f(h)).collect();
        Self::new(nodes, values, cfg.z_alpha(), cfg.c())
    }

    pub fn constant(cfg: &ProblemConfig, value: f64) -> Result<Self> {
        Self::from_fn(cfg, |_| value)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn tail(&self) -> f64 {
        self.tail
    }
    pub fn c(&self) -> f64 {
        self.c
    }
}

impl HalfWidth for WidthFunction {
    fn at(&self, x: f64) -> f64 {
        let x = x.abs();
        if x >= self.c {
            return self.tail;
        }
        let i = self.nodes.partition_point(|&n| n < x);
        if i == 0 {
            return self.values[0];
        }
        if i == self.nodes.len() {
            return self.values[i - 1];
        }
        // nearest node, ties to the left
        if x - self.nodes[i - 1] <= self.nodes[i] - x {
            self.values[i - 1]
        } else {
            self.values[i]
        }
    }
}

/// Efron's delta-method width `z(alpha) r_delta(x)` in closed form.
#[derive(Debug, Clone, Copy)]
pub struct SdDelta {
    z_alpha: f64,
    rho: f64,
    d: f64,
    c: f64,
}

impl SdDelta {
    pub fn new(cfg: &ProblemConfig) -> Self {
        Self {
            z_alpha: cfg.z_alpha(),
            rho: cfg.rho(),
            d: cfg.d(),
            c: cfg.c(),
        }
    }
}

impl HalfWidth for SdDelta {
    fn at(&self, x: f64) -> f64 {
        if x.abs() >= self.c {
            self.z_alpha
        } else {
            self.z_alpha * r_delta(x, self.rho, self.d)
        }
    }
}

/// The sd_delta width sampled on the quadrature nodes.
pub fn sd_delta_width(cfg: &ProblemConfig) -> WidthFunction {
    let sd = SdDelta::new(cfg);
    WidthFunction::from_fn(cfg, |h| sd.at(h)).expect("sd_delta width is always valid")
}

/// `P(b(h) - x <= G~ <= b(h) + x)` for `G~ ~ N(rho (h - gamma), 1 - rho^2)`.
pub fn ell(h: f64, gamma: f64, x: f64, cfg: &ProblemConfig) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain {
            name: "x",
            value: x,
            expected: ">= 0",
        });
    }
    Ok(ell_unchecked(cfg.b(h) - cfg.rho() * (h - gamma), x, cfg.sigma()))
}

/// `ell` with the centre `mu = b(h) - rho (h - gamma)` precomputed.
#[inline]
pub(crate) fn ell_unchecked(mu: f64, x: f64, sigma: f64) -> f64 {
    interval_prob((mu - x) / sigma, (mu + x) / sigma)
}

/// `P(-z(alpha) <= G~ <= z(alpha))`, the conditional coverage of the usual interval.
pub fn ell_dag(h: f64, gamma: f64, cfg: &ProblemConfig) -> f64 {
    ell_unchecked(-cfg.rho() * (h - gamma), cfg.z_alpha(), cfg.sigma())
}

/// Coverage deficit: coverage probability is `1 - alpha - r1(s, gamma)`.
pub fn r1<W: HalfWidth + ?Sized>(s: &W, gamma: f64, cfg: &ProblemConfig) -> f64 {
    let rho = cfg.rho();
    let sigma = cfg.sigma();
    let z = cfg.z_alpha();
    cfg.rule().integrate(|h| {
        let x = s.at(h);
        let b = cfg.b(h);
        let m_plus = -rho * (h - gamma);
        let m_minus = rho * (h + gamma);
        let plus = ell_unchecked(m_plus, z, sigma) - ell_unchecked(b + m_plus, x, sigma);
        let minus = ell_unchecked(m_minus, z, sigma) - ell_unchecked(-b + m_minus, x, sigma);
        plus * pdf(h - gamma) + minus * pdf(h + gamma)
    })
}

/// Excess scaled expected length: SEL is `1 + r2(s, gamma)`.
pub fn r2<W: HalfWidth + ?Sized>(s: &W, gamma: f64, cfg: &ProblemConfig) -> f64 {
    let z = cfg.z_alpha();
    cfg.rule()
        .integrate(|h| (s.at(h) / z - 1.0) * (pdf(h - gamma) + pdf(h + gamma)))
}

pub fn coverage<W: HalfWidth + ?Sized>(s: &W, gamma: f64, cfg: &ProblemConfig) -> f64 {
    1.0 - cfg.alpha() - r1(s, gamma, cfg)
}

pub fn sel<W: HalfWidth + ?Sized>(s: &W, gamma: f64, cfg: &ProblemConfig) -> f64 {
    1.0 + r2(s, gamma, cfg)
}

/// Coverage and SEL sampled over a grid of nonnegative `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RiskCurve {
    pub gamma_grid: Vec<f64>,
    pub coverage: Vec<f64>,
    pub sel: Vec<f64>,
}

impl RiskCurve {
    pub fn max_sel(&self) -> f64 {
        self.sel.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_coverage(&self) -> f64 {
        self.coverage.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// CSV with header `gamma,coverage,sel`, 8 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gamma,coverage,sel\n");
        for ((g, c), e) in self.gamma_grid.iter().zip(&self.coverage).zip(&self.sel) {
            out.push_str(&format!(
                "{},{},{}\n",
                format_sig(*g, 8),
                format_sig(*c, 8),
                format_sig(*e, 8)
            ));
        }
        out
    }
}

pub fn risk_curve<W: HalfWidth + ?Sized>(s: &W, gamma_grid: &[f64], cfg: &ProblemConfig) -> Result<RiskCurve> {
    if gamma_grid.is_empty() {
        return Err(Error::Config("gamma grid is empty".into()));
    }
    if let Some(g) = gamma_grid.iter().find(|g| !(**g >= 0.0)) {
        return Err(Error::Domain {
            name: "gamma",
            value: *g,
            expected: ">= 0",
        });
    }
    let (coverage, sel): (Vec<f64>, Vec<f64>) = gamma_grid
        .par_iter()
        .map(|&g| (coverage(s, g, cfg), sel(s, g, cfg)))
        .unzip();
    Ok(RiskCurve {
        gamma_grid: gamma_grid.to_vec(),
        coverage,
        sel,
    })
}

/// Evenly spaced grid `0, step, 2 step, ...` up to and including `max`.
pub fn gamma_grid(max: f64, step: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

/// Fixed-point decimal with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - mag).clamp(0, 30) as usize;
    format!("{x:.decimals$}")
}
