//! Standard normal density, distribution function and two-sided quantile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{brent, RootOptions};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// A number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::Domain {
                name: "probability",
                value,
                expected: "[0, 1]",
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// N(0,1) density.
#[inline]
pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// N(0,1) distribution function, via the complementary error function.
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `cdf(hi) - cdf(lo)` for `lo <= hi`, evaluated on whichever tail keeps
/// both terms small so that nothing cancels when both limits are large.
#[inline]
pub fn interval_prob(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 {
        cdf(-lo) - cdf(-hi)
    } else {
        cdf(hi) - cdf(lo)
    }
}

/// Two-sided critical value `z(a) = cdf^{-1}(1 - a/2)`.
///
/// Solved by Brent's method on `cdf` over `[-40, 40]`, so it round-trips
/// exactly through [`cdf`] to solver tolerance.
pub fn z(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain {
            name: "a",
            value: a,
            expected: "(0, 1)",
        });
    }
    // Solve on the upper tail: 1 - cdf(x) = a/2.
    let target = 0.5 * a;
    brent(
        |x| cdf(-x) - target,
        -40.0,
        40.0,
        RootOptions {
            x_tol: 1e-15,
            max_iter: 400,
        },
    )
}
