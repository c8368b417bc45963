use thiserror::Error;

/// Errors surfaced by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("root not bracketed on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NotBracketed {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("no sign change of dq/dx found on [{x_star}, {x_star} + 50] at h = {h}")]
    SearchBoundNotFound { h: f64, x_star: f64 },

    #[error("invalid prior: {0}")]
    Prior(String),

    #[error("sum of the SEL prior masses is zero; u** is undefined")]
    ZeroSelMass,
}

pub type Result<T> = std::result::Result<T, Error>;
