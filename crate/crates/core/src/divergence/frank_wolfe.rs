//! Away-step conditional gradient over the convex hull of an [`AtomSet`].
//!
//! The iterate is kept as explicit atom weights. The linear minimization
//! oracle is the best atom against the current gradient, and the returned
//! gap `max_a <∇f(x), x - atom_a>` bounds `f(x) - min f` from above whenever
//! `f` is convex.

use super::atoms::AtomSet;
use crate::error::{Error, Result};

/// A differentiable objective on behavior space.
pub trait Objective {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], grad: &mut [f64]);
}

/// Adapts a pair of closures to [`Objective`].
pub struct FnObjective<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64], &mut [f64]),
{
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        (self.gradient)(x, grad)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FwOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub away_steps: bool,
}

impl Default for FwOptions {
    fn default() -> Self {
        FwOptions {
            tol: 1e-7,
            max_iter: 200_000,
            away_steps: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FwResult {
    pub weights: Vec<f64>,
    pub point: Vec<f64>,
    pub primal: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

const BISECTION_STEPS: usize = 64;
const BISECTION_RESOLUTION: f64 = 1e-15;
const RESYNC_EVERY: usize = 256;
const UNIFORM_NUDGE: f64 = 1e-12;

struct LineSearch<'a, O> {
    objective: &'a O,
    y: Vec<f64>,
    g: Vec<f64>,
}

impl<O: Objective> LineSearch<'_, O> {
    fn slope(&mut self, x: &[f64], d: &[f64], t: f64) -> f64 {
        for ((y, xi), di) in self.y.iter_mut().zip(x).zip(d) {
            *y = xi + t * di;
        }
        if !self.objective.value(&self.y).is_finite() {
            return f64::INFINITY;
        }
        self.objective.gradient(&self.y, &mut self.g);
        let s: f64 = self
            .g
            .iter()
            .zip(d)
            .map(|(g, d)| if *d == 0.0 { 0.0 } else { g * d })
            .sum();
        if s.is_nan() {
            f64::INFINITY
        } else {
            s
        }
    }

    fn value_at(&mut self, x: &[f64], d: &[f64], t: f64) -> f64 {
        for ((y, xi), di) in self.y.iter_mut().zip(x).zip(d) {
            *y = xi + t * di;
        }
        self.objective.value(&self.y)
    }

    /// Step in `[0, t_max]` that does not increase the objective, found by
    /// bisection on the sign of the directional derivative.
    fn step(&mut self, x: &[f64], d: &[f64], t_max: f64, f0: f64) -> f64 {
        if self.slope(x, d, t_max) <= 0.0 && self.value_at(x, d, t_max) <= f0 {
            return t_max;
        }
        let (mut lo, mut hi) = (0.0, t_max);
        for _ in 0..BISECTION_STEPS {
            if hi - lo <= BISECTION_RESOLUTION * t_max {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.slope(x, d, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut t = lo;
        while t > 0.0 && !(self.value_at(x, d, t) <= f0) {
            t *= 0.5;
            if t < 1e-300 {
                t = 0.0;
            }
        }
        t
    }
}

fn argmin(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s < scores[best] {
            best = i;
        }
    }
    best
}

fn nudge_toward_uniform(weights: &mut [f64]) {
    let share = UNIFORM_NUDGE / weights.len() as f64;
    for w in weights.iter_mut() {
        *w = (1.0 - UNIFORM_NUDGE) * *w + share;
    }
}

/// Minimizes `objective` over `conv(atoms)` starting from atom weights
/// `start`.
///
/// Stops once the gap drops to `tol`; otherwise returns after `max_iter`
/// iterations with `converged == false` and the last certificate. The primal
/// value never increases from one iteration to the next.
pub fn frank_wolfe_minimize<O: Objective>(
    objective: &O,
    atoms: &AtomSet,
    start: &[f64],
    opts: &FwOptions,
) -> Result<FwResult> {
    let n = atoms.len();
    if start.len() != n {
        return Err(Error::LengthMismatch(start.len(), n));
    }
    if start.iter().any(|&w| w < 0.0 || !w.is_finite())
        || (start.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(Error::InvalidArgument(
            "start weights must lie on the simplex".into(),
        ));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }

    let dim = atoms.dim();
    let mut weights = start.to_vec();
    let mut x = atoms.combine(&weights);
    let mut f = objective.value(&x);
    if !f.is_finite() {
        return Err(Error::Solver(
            "objective is not finite at the start point".into(),
        ));
    }

    let mut grad = vec![0.0; dim];
    let mut scores = vec![0.0; n];
    let mut d = vec![0.0; dim];
    let mut search = LineSearch {
        objective,
        y: vec![0.0; dim],
        g: vec![0.0; dim],
    };
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut nudged = false;

    while iterations < opts.max_iter {
        objective.gradient(&x, &mut grad);
        if grad.iter().any(|g| !g.is_finite()) {
            if nudged {
                return Err(Error::Solver("gradient is not finite".into()));
            }
            nudged = true;
            nudge_toward_uniform(&mut weights);
            x = atoms.combine(&weights);
            f = objective.value(&x);
            continue;
        }
        nudged = false;

        atoms.scores(&grad, &mut scores);
        let gx: f64 = grad.iter().zip(&x).map(|(g, x)| g * x).sum();
        let toward = argmin(&scores);
        gap = (gx - scores[toward]).max(0.0);
        if gap <= opts.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let away = if opts.away_steps {
            (0..n)
                .filter(|&a| weights[a] > 0.0)
                .max_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(b.cmp(&a)))
        } else {
            None
        };
        let use_away = matches!(away, Some(a) if scores[a] - gx > gap && weights[a] < 1.0);

        d.iter_mut().for_each(|v| *v = 0.0);
        let t_max;
        if use_away {
            let a = away.unwrap();
            for (di, xi) in d.iter_mut().zip(&x) {
                *di = *xi;
            }
            atoms.add_scaled(a, -1.0, &mut d);
            t_max = weights[a] / (1.0 - weights[a]);
        } else {
            for (di, xi) in d.iter_mut().zip(&x) {
                *di = -*xi;
            }
            atoms.add_scaled(toward, 1.0, &mut d);
            t_max = 1.0;
        }

        let t = search.step(&x, &d, t_max, f);
        if t <= 0.0 {
            // no decrease along the chosen direction at working precision
            break;
        }

        if use_away {
            let a = away.unwrap();
            for w in weights.iter_mut() {
                *w *= 1.0 + t;
            }
            weights[a] -= t;
            if t >= t_max || weights[a] < 1e-300 {
                weights[a] = 0.0;
            }
        } else {
            for w in weights.iter_mut() {
                *w *= 1.0 - t;
            }
            weights[toward] += t;
        }

        if iterations % RESYNC_EVERY == 0 {
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            x = atoms.combine(&weights);
        } else {
            for (xi, di) in x.iter_mut().zip(&d) {
                *xi += t * di;
            }
        }
        let f_new = objective.value(&x);
        if f_new.is_finite() && f_new <= f {
            f = f_new;
        } else {
            // resynchronization noise; keep the monotone record
            f = f.min(f_new);
        }
    }

    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    x = atoms.combine(&weights);
    let primal = objective.value(&x);
    if !converged {
        objective.gradient(&x, &mut grad);
        if grad.iter().all(|g| g.is_finite()) {
            atoms.scores(&grad, &mut scores);
            let gx: f64 = grad.iter().zip(&x).map(|(g, x)| g * x).sum();
            gap = (gx - scores[argmin(&scores)]).max(0.0);
            converged = gap <= opts.tol;
        }
    }

    Ok(FwResult {
        weights,
        point: x,
        primal,
        gap,
        iterations,
        converged,
    })
}
