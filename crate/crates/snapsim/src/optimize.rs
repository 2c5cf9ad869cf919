//! Derivative-free minimization used by the gate-parameter searches.
//!
//! The landscapes here are two-parameter and smooth, so a deterministic
//! Nelder-Mead simplex seeded from a coarse grid is enough. No randomness:
//! the same start always walks the same path.

/// Options for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    pub max_iter: usize,
    /// Converged when the simplex collapses below this coordinate spread.
    pub x_tol: f64,
    /// And the objective spread falls below this.
    pub f_tol: f64,
    /// Initial simplex edge length.
    pub step: f64,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            x_tol: 1e-7,
            f_tol: 1e-12,
            step: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub fval: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best point after every iteration, for optimizer-trace artifacts.
    pub trace: Vec<(Vec<f64>, f64)>,
}

/// Classic Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2) minimizing `f` from `start`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, start: &[f64], opts: NmOptions) -> NmResult {
    let dim = start.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(start, &mut evaluations);
    simplex.push((start.to_vec(), f0));
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += opts.step;
        let fv = eval(&v, &mut evaluations);
        simplex.push((v, fv));
    }

    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        trace.push(simplex[0].clone());

        let x_spread = (0..dim)
            .map(|i| {
                let lo = simplex.iter().map(|s| s.0[i]).fold(f64::INFINITY, f64::min);
                let hi = simplex
                    .iter()
                    .map(|s| s.0[i])
                    .fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            })
            .fold(0.0, f64::max);
        let f_spread = simplex[dim].1 - simplex[0].1;
        if x_spread < opts.x_tol && f_spread < opts.f_tol {
            converged = true;
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = vec![0.0; dim];
        for s in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(&s.0) {
                *c += x / dim as f64;
            }
        }
        let worst = simplex[dim].clone();
        let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
        };

        let reflected = lerp(&worst.0, &centroid, 2.0);
        let f_r = eval(&reflected, &mut evaluations);
        if f_r < simplex[0].1 {
            let expanded = lerp(&worst.0, &centroid, 3.0);
            let f_e = eval(&expanded, &mut evaluations);
            simplex[dim] = if f_e < f_r {
                (expanded, f_e)
            } else {
                (reflected, f_r)
            };
        } else if f_r < simplex[dim - 1].1 {
            simplex[dim] = (reflected, f_r);
        } else {
            let contracted = if f_r < worst.1 {
                lerp(&worst.0, &centroid, 1.5)
            } else {
                lerp(&worst.0, &centroid, 0.5)
            };
            let f_c = eval(&contracted, &mut evaluations);
            if f_c < worst.1.min(f_r) {
                simplex[dim] = (contracted, f_c);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    s.0 = lerp(&best, &s.0, 0.5);
                    s.1 = eval(&s.0, &mut evaluations);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    NmResult {
        x: simplex[0].0.clone(),
        fval: simplex[0].1,
        iterations,
        evaluations,
        converged,
        trace,
    }
}

/// Exhaustive evaluation over an axis-aligned grid; returns the best point.
/// `axes` holds (lo, hi, step) per dimension, endpoints inclusive.
pub fn grid_search<F: FnMut(&[f64]) -> f64>(mut f: F, axes: &[(f64, f64, f64)]) -> (Vec<f64>, f64) {
    let counts: Vec<usize> = axes
        .iter()
        .map(|&(lo, hi, step)| ((hi - lo) / step).round() as usize + 1)
        .collect();
    let total: usize = counts.iter().product();
    let mut best_x = Vec::new();
    let mut best_f = f64::INFINITY;
    for flat in 0..total {
        let mut rem = flat;
        let x: Vec<f64> = axes
            .iter()
            .zip(&counts)
            .map(|(&(lo, _, step), &count)| {
                let i = rem % count;
                rem /= count;
                lo + i as f64 * step
            })
            .collect();
        let fv = f(&x);
        if fv < best_f {
            best_f = fv;
            best_x = x;
        }
    }
    (best_x, best_f)
}

/// Golden-section minimization of a unimodal 1-d function on [lo, hi].
pub fn golden_section_min<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    x_tol: f64,
) -> (f64, f64) {
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > x_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    (x, fx)
}
