mod common;

use cibound::mc::{mc_coverage, mc_sel};
use cibound::risk::{coverage, sel, SdDelta};
use cibound::ProblemConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 1_000_000;

#[test]
fn random_widths_agree_with_exact_risks() {
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    for i in 0..6 {
        let cfg = common::random_config(&mut rng);
        let s = common::panel_constant(&mut rng, &cfg, 0.6, 1.6);
        let gamma = rng.random_range(0.0..5.0);
        let c = mc_coverage(&s, gamma, &cfg, N, 1000 + i);
        let e = mc_sel(&s, gamma, &cfg, N, 2000 + i);
        assert!(c.z_score(coverage(&s, gamma, &cfg)) <= 3.0, "case {i}: coverage {c:?}");
        assert!(e.z_score(sel(&s, gamma, &cfg)) <= 3.0, "case {i}: SEL {e:?}");
    }
}

#[test]
fn sd_delta_agrees_with_exact_risks() {
    let cfg = ProblemConfig::new(0.05, 0.05, 0.7).unwrap();
    let s = SdDelta::new(&cfg);
    for (i, gamma) in [0.0, 1.0, 2.0, 4.0].into_iter().enumerate() {
        let c = mc_coverage(&s, gamma, &cfg, N, 10 + i as u64);
        let e = mc_sel(&s, gamma, &cfg, N, 20 + i as u64);
        assert!(c.z_score(coverage(&s, gamma, &cfg)) <= 3.0, "gamma {gamma}: {c:?}");
        assert!(e.z_score(sel(&s, gamma, &cfg)) <= 3.0, "gamma {gamma}: {e:?}");
    }
}

#[test]
fn coverage_is_even_in_gamma() {
    let cfg = ProblemConfig::new(0.05, 0.1, 0.8).unwrap();
    let s = SdDelta::new(&cfg);
    for gamma in [0.7, 1.9, 3.2] {
        let a = mc_coverage(&s, gamma, &cfg, N, 40);
        let b = mc_coverage(&s, -gamma, &cfg, N, 41);
        let pooled = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() <= 4.0 * pooled);
    }
}

#[test]
fn standard_error_scales_like_inverse_root_n() {
    let cfg = ProblemConfig::new(0.05, 0.05, 0.6).unwrap();
    let s = SdDelta::new(&cfg);
    let small = mc_coverage(&s, 1.0, &cfg, 10_000, 7);
    let large = mc_coverage(&s, 1.0, &cfg, N, 7);
    let ratio = small.std_error / large.std_error;
    assert!((ratio / 10.0 - 1.0).abs() <= 0.2, "ratio {ratio}");
}

#[test]
fn rho_zero_constant_width_is_exact() {
    let cfg = ProblemConfig::new(0.05, 0.05, 0.0).unwrap();
    let s = |_: f64| cfg.z_alpha();
    for gamma in [0.0, 2.5, 7.0] {
        assert!(mc_coverage(&s, gamma, &cfg, N, 3).z_score(0.95) <= 3.0);
        let e = mc_sel(&s, gamma, &cfg, 20_000, 3);
        assert_eq!((e.mean, e.std_error), (1.0, 0.0));
    }
}
