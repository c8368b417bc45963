//! Composite Gauss-Legendre quadrature on `[0, c]`.

use serde::{Deserialize, Serialize};

/// Panel layout of the composite rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuadSpec {
    pub panels: usize,
    pub nodes_per_panel: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            panels: 40,
            nodes_per_panel: 10,
        }
    }
}

impl QuadSpec {
    pub fn refined(self) -> Self {
        Self {
            panels: 2 * self.panels,
            ..self
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// A fixed set of nodes and weights covering `[a, b]` with equal panels.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    pub lower: f64,
    pub upper: f64,
    pub spec: QuadSpec,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// The per-panel rule on `[-1, 1]`.
    pub reference: (Vec<f64>, Vec<f64>),
}

impl CompositeRule {
    pub fn new(lower: f64, upper: f64, spec: QuadSpec) -> Self {
        assert!(upper > lower && spec.panels >= 1 && spec.nodes_per_panel >= 1);
        let (gx, gw) = gauss_legendre(spec.nodes_per_panel);
        let width = (upper - lower) / spec.panels as f64;
        let mut nodes = Vec::with_capacity(spec.panels * gx.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in 0..spec.panels {
            let left = lower + p as f64 * width;
            let mid = left + 0.5 * width;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + 0.5 * width * x);
                weights.push(0.5 * width * w);
            }
        }
        Self {
            lower,
            upper,
            spec,
            nodes,
            weights,
            reference: (gx, gw),
        }
    }

    /// End points of panel `p`.
    pub fn panel(&self, p: usize) -> (f64, f64) {
        let width = (self.upper - self.lower) / self.spec.panels as f64;
        let left = self.lower + p as f64 * width;
        (left, if p + 1 == self.spec.panels { self.upper } else { left + width })
    }

    /// The per-panel rule mapped onto `[a, b]`, for a fallible integrand.
    pub fn try_integrate_on<E, F: FnMut(f64) -> Result<f64, E>>(&self, a: f64, b: f64, mut f: F) -> Result<f64, E> {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut sum = 0.0;
        for (x, w) in self.reference.0.iter().zip(&self.reference.1) {
            sum += w * f(mid + half * x)?;
        }
        Ok(half * sum)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Weighted sum over the nodes `range` of values evaluated there.
    pub fn sum_values_range(&self, range: std::ops::Range<usize>, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), range.len());
        values.iter().zip(&self.weights[range]).map(|(v, w)| v * w).sum()
    }

    /// Weighted sum of integrand values already evaluated at the nodes.
    pub fn sum_values(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal;

    #[test]
    fn five_point_rule() {
        let (x, w) = gauss_legendre(5);
        assert!((x[4] - 0.906_179_845_938_664).abs() < 1e-15);
        assert!((w[4] - 0.236_926_885_056_189_1).abs() < 1e-15);
        assert!((w[2] - 0.568_888_888_888_888_9).abs() < 1e-15);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn polynomial_exactness() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - want).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn composite_examples() {
        let rule = CompositeRule::new(0.0, 10.0, QuadSpec::default());
        assert_eq!(rule.len(), 400);
        assert!((rule.integrate(|_| 1.0) - 10.0).abs() < 1e-12);
        assert!((rule.integrate(|h| h * h * h) - 2500.0).abs() < 1e-9);
        let want = normal::cdf(10.0) - 0.5;
        assert!((rule.integrate(normal::pdf) - want).abs() < 1e-10);
    }

    #[test]
    fn nodes_are_inside_and_increasing() {
        let rule = CompositeRule::new(0.0, 10.0, QuadSpec { panels: 7, nodes_per_panel: 4 });
        assert!(rule.nodes.windows(2).all(|p| p[0] < p[1]));
        assert!(rule.nodes[0] > 0.0 && *rule.nodes.last().unwrap() < 10.0);
    }

    #[test]
    fn panels_reproduce_the_composite_rule() {
        let rule = CompositeRule::new(0.0, 10.0, QuadSpec { panels: 6, nodes_per_panel: 5 });
        let f = |h: f64| (0.7 * h).sin() * normal::pdf(h - 2.0);
        let by_panel: f64 = (0..6)
            .map(|p| {
                let (a, b) = rule.panel(p);
                rule.try_integrate_on::<(), _>(a, b, |h| Ok(f(h))).unwrap()
            })
            .sum();
        assert!((by_panel - rule.integrate(f)).abs() < 1e-15);
        assert_eq!(rule.panel(5).1, 10.0);
    }
}
