//! Per-N time optimization and extraction of the scaling exponent η in
//! Δ²ω̃·T ∝ N^{−η}.

use rayon::prelude::*;

use super::bound::{channel_qfi_bound, BoundOptions};
use super::optimize::{log_grid, optimize_on_grid};
use super::parity::parity_precision;
use crate::channel::{kraus_with_derivative, TransferMap};
use crate::dynamics::{propagate, propagate_from, GeneratorFamily, PropagateOptions, Trajectory};
use crate::{Error, Result};

/// Which error curve a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    /// Lower bound t/F↑ from the channel-extension bound.
    Bound,
    /// Error of the GHZ parity measurement.
    Parity,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Bound => "bound",
            Source::Parity => "parity",
        }
    }
}

impl std::str::FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bound" => Ok(Source::Bound),
            "parity" => Ok(Source::Parity),
            other => Err(Error::Parse(format!("unknown curve source `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionPoint {
    pub n: u64,
    pub t_opt: f64,
    pub error: f64,
    pub source: Source,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub eta: f64,
    pub intercept: f64,
    /// Root-mean-square residual of log(error) about the fitted line.
    pub residual: f64,
    pub points: usize,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionCurve {
    pub source: Source,
    pub points: Vec<PrecisionPoint>,
    pub fit: ScalingFit,
}

impl PrecisionCurve {
    pub fn eta(&self) -> f64 {
        self.fit.eta
    }

    /// Local exponent −d log(error)/d log N from neighbouring points.
    pub fn running_eta(&self) -> Vec<f64> {
        running_eta(&self.points)
    }
}

pub fn running_eta(points: &[PrecisionPoint]) -> Vec<f64> {
    let m = points.len();
    (0..m)
        .map(|i| {
            if m < 2 {
                return f64::NAN;
            }
            let (a, b) = (i.saturating_sub(1), (i + 1).min(m - 1));
            let dn = (points[b].n as f64).ln() - (points[a].n as f64).ln();
            -(points[b].error.ln() - points[a].error.ln()) / dn
        })
        .collect()
}

/// Least-squares slope of log(error) against log N over the points with
/// N in `window`; η is minus the slope.
pub fn scaling_fit(points: &[PrecisionPoint], window: (f64, f64)) -> Result<ScalingFit> {
    let sel: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| (p.n as f64) >= window.0 && (p.n as f64) <= window.1)
        .map(|p| {
            if !(p.error > 0.0) || !p.error.is_finite() {
                return Err(Error::Domain(format!("error values must be positive, got {}", p.error)));
            }
            Ok(((p.n as f64).ln(), p.error.ln()))
        })
        .collect::<Result<_>>()?;
    if sel.len() < 5 {
        return Err(Error::InsufficientData { needed: 5, got: sel.len() });
    }
    let m = sel.len() as f64;
    let mx = sel.iter().map(|p| p.0).sum::<f64>() / m;
    let my = sel.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = sel.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = sel.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData { needed: 2, got: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = sel.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(ScalingFit {
        eta: -slope,
        intercept,
        residual: (rss / m).sqrt(),
        points: sel.len(),
        window,
    })
}

/// Geometric probe-count grid from `lo` to `hi` with `per_decade` points per
/// decade, rounded to integers without duplicates.
pub fn n_grid(lo: u64, hi: u64, per_decade: usize) -> Result<Vec<u64>> {
    if lo == 0 || hi < lo || per_decade == 0 {
        return Err(Error::Domain(format!("invalid N grid [{lo}, {hi}] with {per_decade} per decade")));
    }
    let decades = (hi as f64 / lo as f64).log10();
    let steps = (decades * per_decade as f64).round() as usize;
    let mut out: Vec<u64> = (0..=steps)
        .map(|k| (lo as f64 * 10f64.powf(k as f64 / per_decade as f64)).round() as u64)
        .map(|n| n.clamp(lo, hi))
        .collect();
    out.push(hi);
    out.dedup();
    Ok(out)
}

/// Channels Λ(t) with frequency derivative, as a function of time.
pub trait MapFamily: Sync {
    fn map_at(&self, t: f64) -> Result<TransferMap>;
}

/// A family given in closed form.
pub struct ClosedForm<F>(pub F);

impl<F> MapFamily for ClosedForm<F>
where
    F: Fn(f64) -> TransferMap + Sync,
{
    fn map_at(&self, t: f64) -> Result<TransferMap> {
        Ok((self.0)(t))
    }
}

/// Maps propagated once over a time grid; other times are reached by
/// continuing from the nearest earlier grid point.
pub struct SampledFamily<'g> {
    generator: &'g dyn GeneratorFamily,
    trajectory: Trajectory,
    opts: PropagateOptions,
}

impl<'g> SampledFamily<'g> {
    pub fn new(generator: &'g dyn GeneratorFamily, grid: &[f64], opts: PropagateOptions) -> Result<Self> {
        let opts = PropagateOptions { sensitivity: true, ..opts };
        let trajectory = propagate(generator, grid, &opts)?;
        Ok(SampledFamily { generator, trajectory, opts })
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }
}

impl MapFamily for SampledFamily<'_> {
    fn map_at(&self, t: f64) -> Result<TransferMap> {
        let times = &self.trajectory.times;
        let i = times.partition_point(|&s| s < t);
        if i < times.len() && times[i] == t {
            return Ok(self.trajectory.maps[i].clone());
        }
        if i == 0 {
            return Err(Error::Domain(format!("time {t} precedes the sampled grid")));
        }
        let start = &self.trajectory.maps[i - 1];
        Ok(propagate_from(self.generator, start, &[t], &self.opts)?.remove(0))
    }
}

#[derive(Debug, Clone)]
pub struct ScalingOptions {
    pub n_values: Vec<u64>,
    pub t_lo: f64,
    pub t_hi: f64,
    /// Points of the log-spaced time grid scanned before refinement.
    pub grid_size: usize,
    /// The bound curve scans every `bound_stride`-th grid point.
    pub bound_stride: usize,
    /// Choi eigenvalues below this value are dropped from the Kraus set.
    pub kraus_tolerance: f64,
    pub bound: BoundOptions,
    pub window: (f64, f64),
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            n_values: n_grid(10, 10_000, 25).expect("valid default grid"),
            t_lo: 1e-3,
            t_hi: 10.0,
            grid_size: 400,
            bound_stride: 4,
            kraus_tolerance: 1e-12,
            bound: BoundOptions::default(),
            window: (1e3, 1e4),
        }
    }
}

impl ScalingOptions {
    pub fn time_grid(&self) -> Result<Vec<f64>> {
        log_grid(self.t_lo, self.t_hi, self.grid_size)
    }

    fn grid_for(&self, source: Source) -> Result<Vec<f64>> {
        let grid = self.time_grid()?;
        Ok(match source {
            Source::Parity => grid,
            Source::Bound => {
                let stride = self.bound_stride.max(1);
                let mut g: Vec<f64> = grid.iter().copied().step_by(stride).collect();
                if g.last() != grid.last() {
                    g.push(*grid.last().expect("nonempty grid"));
                }
                g
            }
        })
    }
}

/// Lower bound t/F↑ on Δ²ω̃·T at time t.
pub fn bound_error(map: &TransferMap, n: u64, opts: &ScalingOptions) -> Result<f64> {
    let kraus = kraus_with_derivative(map, opts.kraus_tolerance)?;
    let res = channel_qfi_bound(&kraus, n, map.t, &opts.bound)?;
    Ok(if res.f_up > 0.0 { map.t / res.f_up } else { f64::INFINITY })
}

fn error_at(family: &dyn MapFamily, source: Source, n: u64, t: f64, opts: &ScalingOptions) -> f64 {
    let map = match family.map_at(t) {
        Ok(m) => m,
        Err(_) => return f64::INFINITY,
    };
    let value = match source {
        Source::Bound => bound_error(&map, n, opts),
        Source::Parity => parity_precision(&map, n, t),
    };
    value.unwrap_or(f64::INFINITY)
}

/// Time-optimized error for one probe count.
pub fn precision_point(family: &dyn MapFamily, source: Source, n: u64, opts: &ScalingOptions) -> Result<PrecisionPoint> {
    let grid = opts.grid_for(source)?;
    let opt = optimize_on_grid(|t| error_at(family, source, n, t, opts), &grid)?;
    Ok(PrecisionPoint { n, t_opt: opt.t_opt, error: opt.error, source })
}

/// Time-optimized errors over `opts.n_values` (evaluated in parallel) and
/// the fitted exponent over `opts.window`.
pub fn precision_curve(family: &dyn MapFamily, source: Source, opts: &ScalingOptions) -> Result<PrecisionCurve> {
    let points: Vec<PrecisionPoint> = opts
        .n_values
        .par_iter()
        .map(|&n| precision_point(family, source, n, opts))
        .collect::<Result<_>>()?;
    let fit = scaling_fit(&points, opts.window)?;
    Ok(PrecisionCurve { source, points, fit })
}
