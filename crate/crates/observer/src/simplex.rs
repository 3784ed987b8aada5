//! Derivative-free simplex (Nelder–Mead) minimization with box projection.
//!
//! Candidate points are clamped into the box before evaluation, so the
//! search can settle on a bound without constraint machinery.  The best
//! value is tracked per iteration and is non-increasing by construction,
//! which callers use as a sanity invariant.

use crate::error::{invalid, Result};

/// Termination knobs.
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Iteration cap (one reflect/expand/contract/shrink cycle each).
    pub max_iter: usize,
    /// Stop when the value spread across the simplex falls below
    /// `tol` relative to the value magnitudes (scale-free, so objectives
    /// of any size converge on the same shape).
    pub tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_iter: 400, tol: 1e-8 }
    }
}

/// Result of a simplex run.
#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    /// Best point found (inside the box).
    pub x: Vec<f64>,
    /// Objective value at `x`.
    pub value: f64,
    /// Number of objective evaluations.
    pub evaluations: usize,
    /// Best value after each iteration; non-increasing.
    pub best_history: Vec<f64>,
}

fn clamp(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(lo, hi);
    }
}

/// Minimizes `f` from `x0` with per-coordinate initial `step`, clamped to
/// `[lower, upper]`.
pub fn minimize<F>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &SimplexOptions,
) -> Result<SimplexOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let d = x0.len();
    if d == 0 || step.len() != d || lower.len() != d || upper.len() != d {
        return Err(invalid("simplex needs consistent nonempty dimensions"));
    }
    for i in 0..d {
        if !(lower[i] <= upper[i]) {
            return Err(invalid("simplex box is empty"));
        }
    }
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        let v = f(x)?;
        if v.is_nan() {
            return Err(invalid("objective returned NaN"));
        }
        Ok(v)
    };

    // Initial simplex: x0 plus one step along each coordinate, stepping
    // inward when the bound is in the way.
    let mut start = x0.to_vec();
    clamp(&mut start, lower, upper);
    let mut points: Vec<Vec<f64>> = vec![start.clone()];
    for i in 0..d {
        let mut v = start.clone();
        let stepped = v[i] + step[i];
        v[i] = if stepped > upper[i] { v[i] - step[i].abs() } else { stepped };
        clamp(&mut v, lower, upper);
        points.push(v);
    }
    let mut values = Vec::with_capacity(d + 1);
    for p in &points {
        values.push(eval(p, &mut evaluations)?);
    }

    let mut best_history = Vec::new();
    for _ in 0..opts.max_iter {
        // Ascending by value; order[0] is the best vertex.
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (best, second_worst, worst) = (order[0], order[d - 1], order[d]);
        best_history.push(values[best]);

        let scale = values[best].abs() + values[worst].abs() + f64::MIN_POSITIVE;
        let collapsed = order[1..].iter().all(|&idx| {
            points[idx]
                .iter()
                .zip(&points[best])
                .all(|(&a, &b)| (a - b).abs() <= 1e-10 * (1.0 + b.abs()))
        });
        if values[worst] - values[best] <= opts.tol * scale || collapsed {
            break;
        }

        let mut centroid = vec![0.0; d];
        for &idx in &order[..d] {
            for (c, v) in centroid.iter_mut().zip(&points[idx]) {
                *c += v / d as f64;
            }
        }
        let towards = |scale: f64| -> Vec<f64> {
            let mut v: Vec<f64> = centroid
                .iter()
                .zip(&points[worst])
                .map(|(&c, &w)| c + scale * (c - w))
                .collect();
            clamp(&mut v, lower, upper);
            v
        };

        let reflected = towards(1.0);
        let f_reflected = eval(&reflected, &mut evaluations)?;
        if f_reflected < values[best] {
            let expanded = towards(2.0);
            let f_expanded = eval(&expanded, &mut evaluations)?;
            if f_expanded < f_reflected {
                points[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                points[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[second_worst] {
            points[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        let contracted = if f_reflected < values[worst] { towards(0.5) } else { towards(-0.5) };
        let f_contracted = eval(&contracted, &mut evaluations)?;
        if f_contracted < values[worst].min(f_reflected) {
            points[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        // Shrink everything toward the best vertex (which is kept, so the
        // running best cannot regress).
        let anchor = points[best].clone();
        for &idx in &order[1..] {
            for (v, &a) in points[idx].iter_mut().zip(&anchor) {
                *v = a + 0.5 * (*v - a);
            }
            values[idx] = eval(&points[idx].clone(), &mut evaluations)?;
        }
    }

    let mut best = 0;
    for i in 1..=d {
        if values[i] < values[best] {
            best = i;
        }
    }
    best_history.push(values[best]);
    Ok(SimplexOutcome {
        x: points[best].clone(),
        value: values[best],
        evaluations,
        best_history,
    })
}
