//! Time propagation of channels and their frequency sensitivity.

pub mod ode;
pub mod ohmic;

use nalgebra::Matrix4;

use crate::bath::BathModel;
use crate::channel::{self, TransferMap};
use crate::error::{Error, Result};
use crate::tcl2;

pub use ode::OdeOptions;
pub use ohmic::{OhmicConfig, OhmicGenerator};

/// A time-dependent generator L(t) in Pauli-transfer form, parametrized by ω₀.
pub trait GeneratorFamily: Sync {
    fn omega0(&self) -> f64;

    /// L(t) with the frequency set to `omega0`.
    fn generator_at(&self, omega0: f64, t: f64) -> Result<Matrix4<f64>>;

    fn generator(&self, t: f64) -> Result<Matrix4<f64>> {
        self.generator_at(self.omega0(), t)
    }

    /// L(t) and ∂L/∂ω₀. The default uses Richardson-extrapolated central
    /// differences with step 10⁻⁵·max(ω₀, 1).
    fn generator_with_derivative(&self, t: f64) -> Result<(Matrix4<f64>, Matrix4<f64>)> {
        let w = self.omega0();
        let h = 1e-5 * w.abs().max(1.0);
        let central = |h: f64| -> Result<Matrix4<f64>> {
            Ok((self.generator_at(w + h, t)? - self.generator_at(w - h, t)?) / (2.0 * h))
        };
        let coarse = central(h)?;
        let fine = central(h / 2.0)?;
        Ok((self.generator(t)?, (fine * 4.0 - coarse) / 3.0))
    }
}

/// Generator of the TCL2 master equation for a bath model.
#[derive(Debug, Clone, PartialEq)]
pub struct Tcl2Generator {
    pub model: BathModel,
    pub omega0: f64,
    pub theta_coupling: f64,
    pub secular: bool,
    /// When set, the rates and Lamb shift are evaluated at this frequency
    /// instead of ω₀, and the derivative only sees the explicit rotation.
    pub rate_frequency: Option<f64>,
}

impl Tcl2Generator {
    pub fn new(model: BathModel, omega0: f64, theta_coupling: f64, secular: bool) -> Self {
        Tcl2Generator {
            model,
            omega0,
            theta_coupling,
            secular,
            rate_frequency: None,
        }
    }

    /// Freeze the frequency entering the rates at Ω.
    pub fn with_rate_frequency(mut self, big_omega: f64) -> Self {
        self.rate_frequency = Some(big_omega);
        self
    }

    fn truncate(&self, c: tcl2::GeneratorCoefficients) -> tcl2::GeneratorCoefficients {
        if self.secular {
            tcl2::secular_truncate(&c)
        } else {
            c
        }
    }

    fn coefficients(&self, omega0: f64, t: f64) -> Result<tcl2::GeneratorCoefficients> {
        let rate_w = self.rate_frequency.unwrap_or(omega0);
        let mut c = tcl2::dissipator_coefficients(&self.model, rate_w, self.theta_coupling, t)?;
        c.omega0 = omega0;
        Ok(self.truncate(c))
    }
}

impl GeneratorFamily for Tcl2Generator {
    fn omega0(&self) -> f64 {
        self.omega0
    }

    fn generator_at(&self, omega0: f64, t: f64) -> Result<Matrix4<f64>> {
        Ok(tcl2::generator_ptm(&self.coefficients(omega0, t)?).matrix)
    }

    fn generator_with_derivative(&self, t: f64) -> Result<(Matrix4<f64>, Matrix4<f64>)> {
        let l = tcl2::generator_ptm(&self.coefficients(self.omega0, t)?).matrix;
        let dl = match self.rate_frequency {
            Some(_) => tcl2::generator_ptm_derivative(&self.coefficients(self.omega0, t)?, false),
            None => {
                let d = tcl2::dissipator_coefficients_derivative(&self.model, self.omega0, self.theta_coupling, t)?;
                tcl2::generator_ptm_derivative(&self.truncate(d), true)
            }
        };
        Ok((l, dl.matrix))
    }
}

/// Channels along a time grid, starting from the identity at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub maps: Vec<TransferMap>,
}

impl Trajectory {
    /// CSV with columns t, m00..m33 and, when present, d00..d33.
    pub fn to_csv(&self) -> String {
        let with_deriv = self.maps.iter().all(|m| m.derivative.is_some());
        let mut header = vec!["t".to_string()];
        for prefix in if with_deriv { &["m", "d"][..] } else { &["m"][..] } {
            for i in 0..4 {
                for j in 0..4 {
                    header.push(format!("{prefix}{i}{j}"));
                }
            }
        }
        let mut out = header.join(",");
        out.push('\n');
        for map in &self.maps {
            let mut row = vec![format!("{:.12e}", map.t)];
            let mut push = |m: &Matrix4<f64>| {
                for i in 0..4 {
                    for j in 0..4 {
                        row.push(format!("{:.12e}", m[(i, j)]));
                    }
                }
            };
            push(&map.matrix);
            if with_deriv {
                push(map.derivative.as_ref().expect("checked above"));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions {
    pub sensitivity: bool,
    pub ode: OdeOptions,
    /// Reject stored maps whose Choi spectrum dips below −10⁻⁶.
    pub check_cptp: bool,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions {
            sensitivity: true,
            ode: OdeOptions::default(),
            check_cptp: true,
        }
    }
}

/// Choi-eigenvalue floor for maps produced by integration.
pub const CPTP_TOLERANCE: f64 = 1e-6;

fn unpack(y: &[f64], t: f64, sensitivity: bool) -> Result<TransferMap> {
    let m = Matrix4::from_column_slice(&y[..16]);
    let map = TransferMap::new(m, t).map_err(|e| Error::Integration {
        t,
        reason: e.to_string(),
    })?;
    Ok(if sensitivity {
        map.with_derivative(Matrix4::from_column_slice(&y[16..32]))
    } else {
        map
    })
}

fn check(map: &TransferMap) -> Result<()> {
    let min = channel::choi_eigenvalues(map).into_iter().fold(f64::INFINITY, f64::min);
    if min < -CPTP_TOLERANCE {
        return Err(Error::Integration {
            t: map.t,
            reason: format!("map left the CPTP set (Choi eigenvalue {min:e})"),
        });
    }
    Ok(())
}

/// Continue a map (and its derivative, when sensitivity is on) from
/// `start.t` to each of `times` by integrating dV/dt = L V and
/// dV̇/dt = L̇ V + L V̇.
pub fn propagate_from(
    generator: &dyn GeneratorFamily,
    start: &TransferMap,
    times: &[f64],
    opts: &PropagateOptions,
) -> Result<Vec<TransferMap>> {
    let sens = opts.sensitivity;
    let mut y0: Vec<f64> = start.matrix.as_slice().to_vec();
    if sens {
        let d = start.derivative.unwrap_or_else(Matrix4::zeros);
        y0.extend_from_slice(d.as_slice());
    }
    let mut all_times = Vec::with_capacity(times.len() + 1);
    all_times.push(start.t);
    all_times.extend_from_slice(times);
    if times.first().is_some_and(|&t| t < start.t) {
        return Err(Error::Domain("output times must not precede the start map".into()));
    }
    let states = ode::solve(
        |t, y, dy| {
            let v = Matrix4::from_column_slice(&y[..16]);
            if sens {
                let (l, dl) = generator.generator_with_derivative(t)?;
                let vd = Matrix4::from_column_slice(&y[16..32]);
                dy[..16].copy_from_slice((l * v).as_slice());
                dy[16..32].copy_from_slice((dl * v + l * vd).as_slice());
            } else {
                let l = generator.generator(t)?;
                dy[..16].copy_from_slice((l * v).as_slice());
            }
            Ok(())
        },
        &y0,
        &all_times,
        &opts.ode,
    )?;
    let mut maps = Vec::with_capacity(times.len());
    for (y, &t) in states[1..].iter().zip(times) {
        let map = unpack(y, t, sens)?;
        if opts.check_cptp {
            check(&map)?;
        }
        maps.push(map);
    }
    Ok(maps)
}

/// Propagate from the identity at t = 0 through `grid` (a leading 0 is added
/// when absent).
pub fn propagate(generator: &dyn GeneratorFamily, grid: &[f64], opts: &PropagateOptions) -> Result<Trajectory> {
    if grid.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::Domain("time grid must be nonnegative".into()));
    }
    if grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Domain("time grid must be non-decreasing".into()));
    }
    let mut times = grid.to_vec();
    if times.first() != Some(&0.0) {
        times.insert(0, 0.0);
    }
    let mut start = TransferMap::identity();
    if opts.sensitivity {
        start = start.with_derivative(Matrix4::zeros());
    }
    let mut maps = vec![start.clone()];
    maps.extend(propagate_from(generator, &start, &times[1..], opts)?);
    Ok(Trajectory { times, maps })
}
