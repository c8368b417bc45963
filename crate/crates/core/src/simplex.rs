//! Nelder-Mead downhill simplex minimisation with dimension-adaptive
//! coefficients (Gao & Han, 2012).

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Stop when the best value has improved by less than this over
    /// `stall_window` iterations.
    pub tol: f64,
    pub stall_window: usize,
    /// Initial simplex edge length along each axis.
    pub step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            tol: 1e-6,
            stall_window: 50,
            step: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Best value after each iteration (nonincreasing).
    pub trace: Vec<f64>,
    /// `(iteration, value, point)` each time the best value strictly
    /// decreased, starting with the best initial vertex at iteration 0.
    pub improvements: Vec<(usize, f64, Vec<f64>)>,
}

pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n.max(1) as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p)).collect();

    let argmin = |vals: &[f64]| {
        vals.iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("simplex has at least one vertex")
    };
    let mut trace = Vec::new();
    let first = argmin(&vals);
    let mut improvements = vec![(0, vals[first], pts[first].clone())];
    let mut record = vals[first];
    let mut iterations = 0;
    while iterations < opts.max_iterations && n > 0 {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let centroid: Vec<f64> = (0..n)
            .map(|k| pts[..n].iter().map(|p| p[k]).sum::<f64>() / nf)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let fr = eval(&xr);
        if fr < vals[0] {
            let xe = along(alpha * beta);
            let fe = eval(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let xc = along(alpha * gamma);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-gamma);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    let shrunk: Vec<f64> = pts[0]
                        .iter()
                        .zip(&pts[i])
                        .map(|(b, p)| b + delta * (p - b))
                        .collect();
                    vals[i] = eval(&shrunk);
                    pts[i] = shrunk;
                }
            }
        }

        let bi = argmin(&vals);
        let best = vals[bi];
        if best < record {
            record = best;
            improvements.push((iterations, best, pts[bi].clone()));
        }
        trace.push(best);
        if trace.len() > opts.stall_window {
            let earlier = trace[trace.len() - 1 - opts.stall_window];
            if earlier - best < opts.tol {
                break;
            }
        }
    }

    let bi = argmin(&vals);
    SimplexResult {
        x: pts[bi].clone(),
        value: vals[bi],
        iterations,
        evaluations,
        trace,
        improvements,
    }
}
