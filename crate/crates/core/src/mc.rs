//! Monte-Carlo estimates of coverage and scaled expected length, drawn
//! directly from the joint law of `(G, gamma_hat)`:
//! `G = rho Z1 + (1 - rho^2)^{1/2} Z2`, `gamma_hat = gamma + Z1`.
//!
//! Draws are split into fixed-size chunks; chunk `i` uses ChaCha8 stream
//! `i` of the given seed, so results do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::risk::HalfWidth;
use crate::smoothing::ProblemConfig;

pub const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl McEstimate {
    /// `|mean - value|` in units of the standard error (infinite if SE = 0 and they differ).
    pub fn z_score(&self, value: f64) -> f64 {
        let diff = (self.mean - value).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }
}

/// Running mean and sum of squared deviations, mergeable across chunks.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + delta * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64,
        }
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn chunks(n: usize) -> impl IndexedParallelIterator<Item = (usize, usize)> {
    let count = n.div_ceil(CHUNK);
    (0..count)
        .into_par_iter()
        .map(move |i| (i, CHUNK.min(n - i * CHUNK)))
}

/// Coverage of `[b(gamma_hat) - s(gamma_hat), b(gamma_hat) + s(gamma_hat)]` for `G`,
/// with an arbitrary centre function `bias`.
pub fn mc_coverage_with<W, B>(s: &W, bias: B, gamma: f64, rho: f64, n: usize, seed: u64) -> McEstimate
where
    W: HalfWidth + ?Sized,
    B: Fn(f64) -> f64 + Sync,
{
    let sigma = (1.0 - rho * rho).sqrt();
    let hits: usize = chunks(n)
        .map(|(i, len)| {
            let mut rng = chunk_rng(seed, i);
            let mut hits = 0;
            for _ in 0..len {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                let g = rho * z1 + sigma * z2;
                let gh = gamma + z1;
                let (centre, half) = (bias(gh), s.at(gh));
                if centre - half <= g && g <= centre + half {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p = hits as f64 / n as f64;
    McEstimate {
        mean: p,
        std_error: (p * (1.0 - p) / n as f64).sqrt(),
        n,
    }
}

/// Coverage probability of `CI(s)` at `gamma`.
pub fn mc_coverage<W: HalfWidth + ?Sized>(s: &W, gamma: f64, cfg: &ProblemConfig, n: usize, seed: u64) -> McEstimate {
    mc_coverage_with(s, |x| cfg.b(x), gamma, cfg.rho(), n, seed)
}

/// Scaled expected length `E[s(gamma_hat)] / z(alpha)` at `gamma`.
pub fn mc_sel<W: HalfWidth + ?Sized>(s: &W, gamma: f64, cfg: &ProblemConfig, n: usize, seed: u64) -> McEstimate {
    let z = cfg.z_alpha();
    let m = chunks(n)
        .map(|(i, len)| {
            let mut rng = chunk_rng(seed, i);
            let mut m = Moments::default();
            for _ in 0..len {
                let z1: f64 = rng.sample(StandardNormal);
                m.push(s.at(gamma + z1) / z);
            }
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::default(), Moments::merge);
    let var = if m.n > 1 { m.m2 / (m.n - 1) as f64 } else { 0.0 };
    McEstimate {
        mean: m.mean,
        std_error: (var / n as f64).sqrt(),
        n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::cdf;
    use crate::risk::WidthFunction;

    #[test]
    fn exact_coverage_case() {
        let cfg = ProblemConfig::new(0.05, 0.05, 0.0).unwrap();
        let s = WidthFunction::constant(&cfg, cfg.z_alpha()).unwrap();
        let est = mc_coverage(&s, 1.0, &cfg, 1_000_000, 11);
        assert!(est.z_score(0.95) < 3.0, "{est:?}");
    }

    #[test]
    fn empty_interval() {
        let cfg = ProblemConfig::new(0.05, 0.05, 0.7).unwrap();
        let s = WidthFunction::constant(&cfg, 0.0).unwrap();
        let est = mc_coverage(&s, 0.5, &cfg, 100_000, 3);
        // only |gamma_hat| >= c can cover, with probability ~ 1e-23
        assert_eq!(est.mean, 0.0);
    }

    #[test]
    fn constant_width_sel_is_exact() {
        let cfg = ProblemConfig::new(0.05, 0.05, 0.7).unwrap();
        let s = WidthFunction::constant(&cfg, cfg.z_alpha()).unwrap();
        let est = mc_sel(&s, 0.0, &cfg, 100_000, 5);
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn zero_width_sel() {
        let cfg = ProblemConfig::new(0.05, 0.05, 0.7).unwrap();
        let s = WidthFunction::constant(&cfg, 0.0).unwrap();
        let est = mc_sel(&s, 0.0, &cfg, 100_000, 5);
        let want = 2.0 * (1.0 - cdf(10.0));
        assert!(est.mean == 0.0 && (est.mean - want).abs() < 1e-20);
    }

    #[test]
    fn deterministic_and_chunk_aligned() {
        let cfg = ProblemConfig::new(0.05, 0.1, 0.6).unwrap();
        let s = crate::risk::SdDelta::new(&cfg);
        let a = mc_coverage(&s, 1.5, &cfg, 200_003, 99);
        let b = mc_coverage(&s, 1.5, &cfg, 200_003, 99);
        assert_eq!(a, b);
        let c = mc_coverage(&s, 1.5, &cfg, 200_003, 100);
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|x| all.push(*x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..313].iter().for_each(|x| a.push(*x));
        xs[313..].iter().for_each(|x| b.push(*x));
        let m = a.merge(b);
        assert!((m.mean - all.mean).abs() < 1e-12 && (m.m2 - all.m2).abs() < 1e-8);
    }
}
