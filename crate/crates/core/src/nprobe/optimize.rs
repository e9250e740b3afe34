//! Interrogation-time optimization: log-grid scan plus golden-section polish.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeOptimum {
    pub t_opt: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// `size` points spaced evenly in log t over [lo, hi].
pub fn log_grid(lo: f64, hi: f64, size: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || size < 2 {
        return Err(Error::Domain(format!(
            "log grid needs 0 < lo < hi and at least 2 points, got [{lo}, {hi}] with {size}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..size)
        .map(|k| (a + (b - a) * k as f64 / (size - 1) as f64).exp())
        .map(|t: f64| t.clamp(lo, hi))
        .collect())
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Scans `objective` on a log grid of `grid_size` points over [t_lo, t_hi]
/// and refines the best bracket by golden-section search in log t.
///
/// Non-finite values are treated as +∞. Returns the best point seen.
pub fn optimize_time<F>(objective: F, t_lo: f64, t_hi: f64, grid_size: usize) -> Result<TimeOptimum>
where
    F: FnMut(f64) -> f64,
{
    let grid = log_grid(t_lo, t_hi, grid_size)?;
    optimize_on_grid(objective, &grid)
}

/// [`optimize_time`] over an explicit increasing grid.
pub fn optimize_on_grid<F>(mut objective: F, grid: &[f64]) -> Result<TimeOptimum>
where
    F: FnMut(f64) -> f64,
{
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) || !(grid[0] > 0.0) {
        return Err(Error::Domain("time grid must be positive and strictly increasing".into()));
    }
    let values: Vec<f64> = grid.iter().map(|&t| sanitize(objective(t))).collect();
    let mut evaluations = grid.len();
    let (k, &best) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is nonempty");
    if !best.is_finite() {
        return Err(Error::NoOptimum);
    }
    let mut opt = TimeOptimum { t_opt: grid[k], error: best, evaluations };

    let lo = grid[k.saturating_sub(1)].ln();
    let hi = grid[(k + 1).min(grid.len() - 1)].ln();
    let (mut a, mut b) = (lo, hi);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = sanitize(objective(x1.exp()));
    let mut f2 = sanitize(objective(x2.exp()));
    evaluations += 2;
    let consider = |x: f64, f: f64, opt: &mut TimeOptimum| {
        if f < opt.error {
            opt.t_opt = x.exp();
            opt.error = f;
        }
    };
    consider(x1, f1, &mut opt);
    consider(x2, f2, &mut opt);
    while (b - a) > 1e-9 * (1.0 + a.abs().max(b.abs())) && evaluations < grid.len() + 200 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = sanitize(objective(x1.exp()));
            consider(x1, f1, &mut opt);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = sanitize(objective(x2.exp()));
            consider(x2, f2, &mut opt);
        }
        evaluations += 1;
    }
    opt.evaluations = evaluations;
    Ok(opt)
}
