//! Nelder-Mead downhill simplex minimiser.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Offset of the initial vertices from the starting point along each axis.
    pub initial_step: f64,
    /// Stop when `f_worst - f_best` over the simplex drops below this.
    pub f_tol: f64,
    pub max_iters: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            initial_step: 0.1,
            f_tol: 1e-10,
            max_iters: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn lerp(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
}

/// Minimises `f` starting from `x0`.
pub fn minimize<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert!(n >= 1, "empty parameter vector");
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut order: Vec<usize> = (0..=n).collect();

    let mut iterations = 0;
    loop {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);
        if vals[worst] - vals[best] < opts.f_tol {
            return SimplexOutcome {
                x: pts[best].clone(),
                value: vals[best],
                iterations,
                converged: true,
            };
        }
        if iterations >= opts.max_iters {
            return SimplexOutcome {
                x: pts[best].clone(),
                value: vals[best],
                iterations,
                converged: false,
            };
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&pts[i]) {
                *c += x / n as f64;
            }
        }

        let reflected = lerp(&centroid, &pts[worst], -REFLECT);
        let fr = f(&reflected);
        if fr < vals[best] {
            let expanded = lerp(&centroid, &pts[worst], -EXPAND);
            let fe = f(&expanded);
            if fe < fr {
                pts[worst] = expanded;
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[worst] = reflected;
            vals[worst] = fr;
            continue;
        }
        // contraction, outside if the reflection at least beat the worst point
        let candidate = if fr < vals[worst] {
            lerp(&centroid, &reflected, CONTRACT)
        } else {
            lerp(&centroid, &pts[worst], CONTRACT)
        };
        let fc = f(&candidate);
        if fc < vals[worst].min(fr) {
            pts[worst] = candidate;
            vals[worst] = fc;
            continue;
        }
        let anchor = pts[best].clone();
        for &i in &order[1..] {
            pts[i] = lerp(&anchor, &pts[i], SHRINK);
            vals[i] = f(&pts[i]);
        }
    }
}
