//! The smoothed estimator's correction `k`, Efron's `q`, the delta-method
//! ratio `r_delta`, the bias function `b = rho * k`, and the scenario
//! configuration they are evaluated under.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{self, pdf};
use crate::quadrature::{CompositeRule, QuadSpec};

/// Default truncation point beyond which `k`, `q` and `r_delta - 1` are
/// treated as zero.
pub const DEFAULT_C: f64 = 10.0;

/// `k(g) = phi(d+g) - phi(d-g) + g (Phi(d-g) - Phi(-d-g))`. Odd in `g`.
pub fn k(gamma: f64, d: f64) -> f64 {
    pdf(d + gamma) - pdf(d - gamma) + gamma * normal::interval_prob(-d - gamma, d - gamma)
}

/// Efron's `q(g) = Phi(d-g) - Phi(-d-g) - d (phi(d+g) + phi(d-g))`. Even in `g`.
pub fn q_efron(gamma: f64, d: f64) -> f64 {
    normal::interval_prob(-d - gamma, d - gamma) - d * (pdf(d + gamma) + pdf(d - gamma))
}

/// `r_delta(g) = (1 - 2 rho^2 q + rho^2 q^2)^{1/2}`.
pub fn r_delta(gamma: f64, rho: f64, d: f64) -> f64 {
    let q = q_efron(gamma, d);
    let rho2 = rho * rho;
    // equals 1 - rho^2 + rho^2 (1 - q)^2 >= 1 - rho^2 > 0
    let radicand = 1.0 - rho2 + rho2 * (1.0 - q) * (1.0 - q);
    assert!(radicand >= 0.0, "negative r_delta radicand {radicand}");
    radicand.sqrt()
}

/// Preliminary-test cutoff `d` with `2 (1 - Phi(d)) = alpha_tilde`.
pub fn test_cutoff(alpha_tilde: f64) -> Result<f64> {
    normal::z(alpha_tilde)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ConfigDoc {
    alpha: f64,
    alpha_tilde: f64,
    rho: f64,
    #[serde(default = "default_c")]
    c: f64,
    #[serde(default)]
    quad: QuadSpec,
}

fn default_c() -> f64 {
    DEFAULT_C
}

/// Fixed scenario parameters: nominal non-coverage `alpha`, preliminary
/// test size `alpha_tilde`, correlation `rho`, truncation point `c` and the
/// quadrature layout on `[0, c]`. Derived constants are cached.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ConfigDoc", into = "ConfigDoc")]
pub struct ProblemConfig {
    alpha: f64,
    alpha_tilde: f64,
    rho: f64,
    c: f64,
    quad: QuadSpec,
    d: f64,
    z_alpha: f64,
    sigma: f64,
    rule: CompositeRule,
}

impl PartialEq for ProblemConfig {
    fn eq(&self, other: &Self) -> bool {
        ConfigDoc::from(self.clone()) == ConfigDoc::from(other.clone())
    }
}

impl PartialEq for ConfigDoc {
    fn eq(&self, o: &Self) -> bool {
        self.alpha == o.alpha
            && self.alpha_tilde == o.alpha_tilde
            && self.rho == o.rho
            && self.c == o.c
            && self.quad == o.quad
    }
}

impl TryFrom<ConfigDoc> for ProblemConfig {
    type Error = Error;
    fn try_from(doc: ConfigDoc) -> Result<Self> {
        Self::with_options(doc.alpha, doc.alpha_tilde, doc.rho, doc.c, doc.quad)
    }
}

impl From<ProblemConfig> for ConfigDoc {
    fn from(cfg: ProblemConfig) -> Self {
        Self {
            alpha: cfg.alpha,
            alpha_tilde: cfg.alpha_tilde,
            rho: cfg.rho,
            c: cfg.c,
            quad: cfg.quad,
        }
    }
}

impl ProblemConfig {
    /// Scenario with `c = 10` and the default 40 x 10 quadrature.
    pub fn new(alpha: f64, alpha_tilde: f64, rho: f64) -> Result<Self> {
        Self::with_options(alpha, alpha_tilde, rho, DEFAULT_C, QuadSpec::default())
    }

    pub fn with_options(alpha: f64, alpha_tilde: f64, rho: f64, c: f64, quad: QuadSpec) -> Result<Self> {
        let z_alpha = normal::z(alpha).map_err(|_| Error::Domain {
            name: "alpha",
            value: alpha,
            expected: "(0, 1)",
        })?;
        let d = test_cutoff(alpha_tilde).map_err(|_| Error::Domain {
            name: "alpha_tilde",
            value: alpha_tilde,
            expected: "(0, 1)",
        })?;
        if !(rho.abs() < 1.0) {
            return Err(Error::Domain {
                name: "rho",
                value: rho,
                expected: "|rho| < 1",
            });
        }
        if !(c >= DEFAULT_C) || !c.is_finite() {
            return Err(Error::Domain {
                name: "c",
                value: c,
                expected: "c >= 10",
            });
        }
        if quad.panels == 0 || quad.nodes_per_panel == 0 {
            return Err(Error::Config("quadrature needs at least one panel and one node".into()));
        }
        Ok(Self {
            alpha,
            alpha_tilde,
            rho,
            c,
            quad,
            d,
            z_alpha,
            sigma: (1.0 - rho * rho).sqrt(),
            rule: CompositeRule::new(0.0, c, quad),
        })
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::with_options(self.alpha, self.alpha_tilde, rho, self.c, self.quad)
    }

    pub fn with_quad(&self, quad: QuadSpec) -> Result<Self> {
        Self::with_options(self.alpha, self.alpha_tilde, self.rho, self.c, quad)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn alpha_tilde(&self) -> f64 {
        self.alpha_tilde
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn quad(&self) -> QuadSpec {
        self.quad
    }
    /// Preliminary-test cutoff.
    pub fn d(&self) -> f64 {
        self.d
    }
    /// `z(alpha)`, the half-width of the usual interval in standard units.
    pub fn z_alpha(&self) -> f64 {
        self.z_alpha
    }
    /// `(1 - rho^2)^{1/2}`, the conditional standard deviation of `G` given `gamma_hat`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn rule(&self) -> &CompositeRule {
        &self.rule
    }

    /// Bias function `b(x) = rho k(x)`, truncated to exactly 0 for `|x| >= c`.
    pub fn b(&self, x: f64) -> f64 {
        if x.abs() >= self.c {
            0.0
        } else {
            self.rho * k(x, self.d)
        }
    }
}
