use rayon::prelude::*;

use qprobe::channel::{classify, kraus_with_derivative, TransferMap};
use qprobe::dynamics::ohmic::{ohmic_pc_map, ohmic_rate};
use qprobe::dynamics::{propagate, CPTP_TOLERANCE, OhmicGenerator, PropagateOptions, Tcl2Generator};
use qprobe::nprobe::{
    channel_qfi_bound, log_grid, n_grid, parity_expectation, parity_precision, precision_curve, BoundOptions,
    ClosedForm, MapFamily, SampledFamily, ScalingOptions, Source,
};
use qprobe::qfi::{qfi_map, BlochState};
use qprobe::tcl2::gamma_set;

use crate::config::{ExperimentConfig, Model};
use crate::error::CliError;
use crate::output::{num, Table};

const KRAUS_TOLERANCE: f64 = 1e-12;

fn time_grid(cfg: &ExperimentConfig) -> Result<Vec<f64>, CliError> {
    Ok(log_grid(cfg.t_min, cfg.t_max, cfg.t_points)?)
}

fn bound_options(cfg: &ExperimentConfig) -> BoundOptions {
    BoundOptions { seed: cfg.seed, ..BoundOptions::default() }
}

fn tcl2_generator(cfg: &ExperimentConfig) -> Result<Tcl2Generator, CliError> {
    Ok(Tcl2Generator::new(cfg.bath()?, cfg.omega0, cfg.theta_coupling, cfg.secular))
}

/// Channels with ω₀-derivative on `grid`. With `freeze_rates` the derivative
/// only sees the explicit rotation (rates held at ω₀).
fn trajectory(cfg: &ExperimentConfig, grid: &[f64], freeze_rates: bool) -> Result<Vec<TransferMap>, CliError> {
    let opts = PropagateOptions::default();
    match cfg.model {
        Model::Ohmic if cfg.secular => Ok(grid.iter().map(|&t| ohmic_pc_map(&cfg.ohmic(), t)).collect()),
        Model::Ohmic => Ok(on_grid(propagate(&OhmicGenerator::new(cfg.ohmic())?, grid, &opts)?.maps, grid)),
        Model::Tcl2 => {
            let mut generator = tcl2_generator(cfg)?;
            if freeze_rates {
                generator = generator.with_rate_frequency(cfg.omega0);
            }
            Ok(on_grid(propagate(&generator, grid, &opts)?.maps, grid))
        }
    }
}

/// Drops the t = 0 identity that propagation prepends to grids starting later.
fn on_grid(mut maps: Vec<TransferMap>, grid: &[f64]) -> Vec<TransferMap> {
    maps.drain(..maps.len() - grid.len());
    maps
}

/// Runs `f` on the map family selected by `cfg`, sampled on `grid` when it
/// has to be integrated.
fn with_family<R>(
    cfg: &ExperimentConfig,
    grid: &[f64],
    f: impl FnOnce(&dyn MapFamily) -> Result<R, CliError>,
) -> Result<R, CliError> {
    let opts = PropagateOptions::default();
    match cfg.model {
        Model::Ohmic if cfg.secular => {
            let ohmic = cfg.ohmic();
            f(&ClosedForm(move |t| ohmic_pc_map(&ohmic, t)))
        }
        Model::Ohmic => {
            let generator = OhmicGenerator::new(cfg.ohmic())?;
            f(&SampledFamily::new(&generator, grid, opts)?)
        }
        Model::Tcl2 => {
            let generator = tcl2_generator(cfg)?;
            f(&SampledFamily::new(&generator, grid, opts)?)
        }
    }
}

/// Γ(0, t), Γ(±ω₀, t) by quadrature next to the closed-form Ohmic rate.
pub fn gamma(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let bath = cfg.bath()?;
    let grid = time_grid(cfg)?;
    let rows = grid
        .par_iter()
        .map(|&t| {
            let g = gamma_set(&bath, cfg.omega0, t)?;
            Ok(vec![
                num(t),
                num(g.zero.re),
                num(g.zero.im),
                num(g.plus.re),
                num(g.plus.im),
                num(g.minus.re),
                num(g.minus.im),
                num(ohmic_rate(&cfg.ohmic(), t)),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut table = Table::new(
        "gamma",
        &["t", "re_gamma_0", "im_gamma_0", "re_gamma_plus", "im_gamma_plus", "re_gamma_minus", "im_gamma_minus", "ohmic_rate"],
    );
    table.rows = rows;
    Ok(table)
}

/// The trajectory: 16 PTM entries and 16 derivative entries per time.
pub fn map(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let grid = time_grid(cfg)?;
    let maps = trajectory(cfg, &grid, false)?;
    let mut columns = vec!["t".to_string()];
    for prefix in ["m", "d"] {
        for i in 0..4 {
            for j in 0..4 {
                columns.push(format!("{prefix}{i}{j}"));
            }
        }
    }
    let mut table = Table { kind: "map".into(), columns, ..Table::default() };
    for m in &maps {
        let d = m.derivative.as_ref().ok_or_else(|| qprobe::Error::InvalidMap("missing derivative".into()))?;
        let mut row = vec![num(m.t)];
        row.extend(m.matrix.transpose().iter().map(|&v| num(v)));
        row.extend(d.transpose().iter().map(|&v| num(v)));
        table.push(row);
    }
    Ok(table)
}

/// Single-probe QFI of the configured dynamics, of its secular counterpart
/// and with the rates frozen at ω₀.
pub fn qfi_single(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let grid = time_grid(cfg)?;
    let state = cfg.state();
    let full = trajectory(cfg, &grid, false)?;
    let pc = trajectory(&cfg.secular_counterpart(), &grid, false)?;
    let frozen = match cfg.model {
        Model::Tcl2 => Some(trajectory(cfg, &grid, true)?),
        Model::Ohmic => None,
    };
    let mut table = Table::new("qfi-single", &["t", "qfi", "qfi_pc", "qfi_aux"]);
    for (k, &t) in grid.iter().enumerate() {
        let f = qfi_map(&full[k], &state)?.value;
        let f_pc = qfi_map(&pc[k], &state)?.value;
        let f_aux = match &frozen {
            Some(maps) => qfi_map(&maps[k], &state)?.value,
            None => f,
        };
        table.push(vec![num(t), num(f), num(f_pc), num(f_aux)]);
    }
    table.notes.push(format!("state theta = {}, phi = {}", cfg.state_theta, cfg.state_phi));
    Ok(table)
}

/// F↑ and the error bound t/F↑ for `n` probes along the time grid.
pub fn bound(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let grid = time_grid(cfg)?;
    let maps = trajectory(cfg, &grid, false)?;
    let opts = bound_options(cfg);
    let rows = maps
        .par_iter()
        .map(|m| {
            let kraus = kraus_with_derivative(m, KRAUS_TOLERANCE)?;
            let r = channel_qfi_bound(&kraus, cfg.n, m.t, &opts)?;
            let err = if r.f_up > 0.0 { m.t / r.f_up } else { f64::INFINITY };
            Ok(vec![num(m.t), num(r.f_up), num(err), u8::from(r.converged).to_string()])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut table = Table::new("bound", &["t", "f_up", "error", "converged"]);
    table.rows = rows;
    table.notes.push(format!("n = {}", cfg.n));
    Ok(table)
}

/// GHZ parity signal and its error-propagation estimate along the time grid.
pub fn parity(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let grid = time_grid(cfg)?;
    let maps = trajectory(cfg, &grid, false)?;
    let mut table = Table::new("parity", &["t", "expectation", "error"]);
    for m in &maps {
        let err = parity_precision(m, cfg.n, m.t)?;
        table.push(vec![num(m.t), num(parity_expectation(m, cfg.n)), num(err)]);
    }
    table.notes.push(format!("n = {}", cfg.n));
    Ok(table)
}

pub fn scaling_options(cfg: &ExperimentConfig) -> Result<ScalingOptions, CliError> {
    let n_values = n_grid(cfg.n_min, cfg.n_max, cfg.n_per_decade)?;
    let in_window = n_values
        .iter()
        .filter(|&&n| (n as f64) >= cfg.fit_min && (n as f64) <= cfg.fit_max)
        .count();
    if in_window < 5 {
        return Err(CliError::Config(format!(
            "fit window [{}, {}] holds {in_window} probe counts, need at least 5",
            cfg.fit_min, cfg.fit_max
        )));
    }
    Ok(ScalingOptions {
        n_values,
        t_lo: cfg.t_min,
        t_hi: cfg.t_max,
        grid_size: cfg.t_points,
        bound: bound_options(cfg),
        window: (cfg.fit_min, cfg.fit_max),
        ..ScalingOptions::default()
    })
}

/// Time-optimized bound and parity errors over the N grid with fitted
/// exponents.
pub fn scaling(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let opts = scaling_options(cfg)?;
    let grid = opts.time_grid()?;
    let curves = with_family(cfg, &grid, |family| {
        [Source::Bound, Source::Parity]
            .into_iter()
            .map(|s| precision_curve(family, s, &opts).map_err(CliError::from))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut table = Table::new("scaling", &["source", "N", "t_opt", "error", "eta_running"]);
    for curve in &curves {
        for (p, eta) in curve.points.iter().zip(curve.running_eta()) {
            table.push(vec![
                p.source.as_str().to_string(),
                p.n.to_string(),
                num(p.t_opt),
                num(p.error),
                num(eta),
            ]);
        }
    }
    for curve in &curves {
        table.notes.push(format!(
            "eta {} = {:.4} (residual {:.2e}, {} points in N ∈ [{}, {}])",
            curve.source.as_str(),
            curve.fit.eta,
            curve.fit.residual,
            curve.fit.points,
            curve.fit.window.0,
            curve.fit.window.1
        ));
    }
    Ok(table)
}

/// One invariant evaluated on the configured dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn record(out: &mut Vec<CheckResult>, name: &'static str, worst: f64, limit: f64, detail: String) {
    out.push(CheckResult { name, passed: worst <= limit, detail });
}

/// Structural invariants on a coarse time grid: CP, unitality, phase
/// covariance of secular maps, z-rotation invariance of the PC QFI, the
/// bound/parity ordering and F↑(1) ≥ F_Q.
pub fn check(cfg: &ExperimentConfig) -> Result<Vec<CheckResult>, CliError> {
    let grid = log_grid(cfg.t_min, cfg.t_max, cfg.t_points.min(40))?;
    let maps = trajectory(cfg, &grid, false)?;
    let secular = trajectory(&cfg.secular_counterpart(), &grid, false)?;
    let mut out = Vec::new();

    let min_eig = maps.iter().map(|m| classify(m, 1e-9).min_choi_eigenvalue).fold(f64::INFINITY, f64::min);
    record(&mut out, "cptp", -min_eig, CPTP_TOLERANCE, format!("min Choi eigenvalue {min_eig:.3e}"));

    if cfg.high_temperature {
        let v = maps.iter().map(|m| m.translation().norm()).fold(0.0, f64::max);
        record(&mut out, "unital", v, 1e-8, format!("max |v| {v:.3e}"));
    }

    let non_pc = secular.iter().filter(|m| !classify(m, 1e-9).phase_covariant).count();
    record(&mut out, "phase-covariant", non_pc as f64, 0.0, format!("{non_pc} secular maps fail the classifier"));

    let state = cfg.state();
    let mut spread: f64 = 0.0;
    for m in &secular {
        let base = qfi_map(m, &state)?.value;
        for shift in [0.3, 1.1, 2.5, 4.0] {
            let turned = BlochState::pure(cfg.state_theta, cfg.state_phi + shift);
            let f = qfi_map(m, &turned)?.value;
            spread = spread.max((f - base).abs() / base.abs().max(1e-300));
        }
    }
    record(&mut out, "pc-rotation-invariance", spread, 1e-9, format!("max relative change {spread:.3e}"));

    let opts = bound_options(cfg);
    let mut sandwich: f64 = 0.0;
    let mut single: f64 = 0.0;
    for m in maps.iter().step_by(4) {
        let kraus = kraus_with_derivative(m, KRAUS_TOLERANCE)?;
        for n in [1u64, 10, 100] {
            let f_up = channel_qfi_bound(&kraus, n, m.t, &opts)?.f_up;
            let lower = m.t / f_up;
            let upper = parity_precision(m, n, m.t)?;
            sandwich = sandwich.max((lower - upper) / lower);
            if n == 1 {
                let fq = qfi_map(m, &state)?.value;
                single = single.max((fq - f_up) / f_up.max(1e-300));
            }
        }
    }
    record(&mut out, "bound-below-parity", sandwich, 1e-6, format!("max relative violation {sandwich:.3e}"));
    record(&mut out, "bound-above-qfi", single, 1e-6, format!("max relative violation {single:.3e}"));
    Ok(out)
}
