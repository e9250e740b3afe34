//! Ohmic spectral density at high temperature with a wide cutoff: a single
//! rate γ(t) = (λ/β) arctan(ω_c t) and jump operator σ̄ = cos ϑ σ_x + sin ϑ σ_z.

use nalgebra::Matrix4;

use crate::channel::TransferMap;
use crate::error::{Error, Result};
use crate::pauli::{c, Op};
use crate::tcl2::GeneratorPTM;

use super::{ode, GeneratorFamily, OdeOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhmicConfig {
    /// Rate scale λ/β.
    pub lambda_over_beta: f64,
    pub omega_c: f64,
    pub omega0: f64,
    pub theta_coupling: f64,
    pub secular: bool,
    /// ω_c → ∞: constant rate γ_s = πλ/(2β).
    pub semigroup: bool,
}

impl OhmicConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_over_beta >= 0.0) || !self.lambda_over_beta.is_finite() {
            return Err(Error::Domain(format!("λ/β must be ≥ 0, got {}", self.lambda_over_beta)));
        }
        if !self.semigroup && !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return Err(Error::Domain(format!("ω_c must be positive, got {}", self.omega_c)));
        }
        if !self.omega0.is_finite() || !self.theta_coupling.is_finite() {
            return Err(Error::Domain("ω₀ and ϑ must be finite".into()));
        }
        Ok(())
    }

    /// Total weight α = ∫ j(ω) dω = 2λω_c/β (infinite in the semigroup limit).
    pub fn alpha(&self) -> f64 {
        if self.semigroup {
            f64::INFINITY
        } else {
            2.0 * self.lambda_over_beta * self.omega_c
        }
    }

    pub fn semigroup_rate(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 * self.lambda_over_beta
    }
}

/// γ(t) = (λ/β) arctan(ω_c t), or γ_s = πλ/(2β) in the semigroup limit.
pub fn ohmic_rate(config: &OhmicConfig, t: f64) -> f64 {
    if config.semigroup {
        config.semigroup_rate()
    } else {
        config.lambda_over_beta * (config.omega_c * t).atan()
    }
}

/// ∫₀ᵗ γ(τ) dτ = (λ/β)[t arctan(ω_c t) − ln(1 + ω_c²t²)/(2ω_c)].
pub fn integrated_rate(config: &OhmicConfig, t: f64) -> f64 {
    if config.semigroup {
        return config.semigroup_rate() * t;
    }
    let x = config.omega_c * t;
    config.lambda_over_beta * (t * x.atan() - (x * x).ln_1p() / (2.0 * config.omega_c))
}

fn generator_with_rate(config: &OhmicConfig, omega0: f64, gamma: f64) -> Matrix4<f64> {
    let (s, cs) = config.theta_coupling.sin_cos();
    let mut l = Matrix4::zeros();
    l[(1, 2)] = -omega0;
    l[(2, 1)] = omega0;
    if config.secular {
        l[(1, 1)] = -(1.0 + s * s) * gamma;
        l[(2, 2)] = l[(1, 1)];
        l[(3, 3)] = -2.0 * cs * cs * gamma;
    } else {
        l[(1, 1)] = -2.0 * gamma * s * s;
        l[(2, 2)] = -2.0 * gamma;
        l[(3, 3)] = -2.0 * gamma * cs * cs;
        l[(1, 3)] = 2.0 * gamma * s * cs;
        l[(3, 1)] = 2.0 * gamma * s * cs;
    }
    l
}

/// Time-independent generator of the semigroup limit.
pub fn semigroup_generator(config: &OhmicConfig) -> Result<GeneratorPTM> {
    if !config.semigroup {
        return Err(Error::Domain("semigroup_generator needs the semigroup flag".into()));
    }
    Ok(GeneratorPTM {
        matrix: generator_with_rate(config, config.omega0, config.semigroup_rate()),
        t: 0.0,
    })
}

/// The Ohmic generator family; its ω₀-derivative only touches the rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhmicGenerator {
    pub config: OhmicConfig,
}

impl OhmicGenerator {
    pub fn new(config: OhmicConfig) -> Result<Self> {
        config.validate()?;
        Ok(OhmicGenerator { config })
    }
}

fn rotation_derivative() -> Matrix4<f64> {
    let mut d = Matrix4::zeros();
    d[(1, 2)] = -1.0;
    d[(2, 1)] = 1.0;
    d
}

impl GeneratorFamily for OhmicGenerator {
    fn omega0(&self) -> f64 {
        self.config.omega0
    }

    fn generator_at(&self, omega0: f64, t: f64) -> Result<Matrix4<f64>> {
        Ok(generator_with_rate(&self.config, omega0, ohmic_rate(&self.config, t)))
    }

    fn generator_with_derivative(&self, t: f64) -> Result<(Matrix4<f64>, Matrix4<f64>)> {
        Ok((self.generator(t)?, rotation_derivative()))
    }
}

/// Closed-form phase-covariant map: coherences decay as e^{−(1+sin²ϑ)∫γ},
/// populations as e^{−2cos²ϑ∫γ}; includes the ω₀-derivative.
pub fn ohmic_pc_map(config: &OhmicConfig, t: f64) -> TransferMap {
    let g = integrated_rate(config, t);
    let (s, cs) = config.theta_coupling.sin_cos();
    let d = (-(1.0 + s * s) * g).exp();
    let dz = (-2.0 * cs * cs * g).exp();
    let (sn, cn) = (config.omega0 * t).sin_cos();
    let mut m = Matrix4::identity();
    m[(1, 1)] = d * cn;
    m[(2, 2)] = d * cn;
    m[(1, 2)] = -d * sn;
    m[(2, 1)] = d * sn;
    m[(3, 3)] = dz;
    let mut dm = Matrix4::zeros();
    dm[(1, 1)] = -d * t * sn;
    dm[(2, 2)] = -d * t * sn;
    dm[(1, 2)] = -d * t * cn;
    dm[(2, 1)] = d * t * cn;
    TransferMap {
        matrix: m,
        derivative: Some(dm),
        t,
    }
}

fn check_density(rho: &Op) -> Result<()> {
    let herm = (rho[(0, 1)] - rho[(1, 0)].conj()).norm() < 1e-10
        && rho[(0, 0)].im.abs() < 1e-10
        && rho[(1, 1)].im.abs() < 1e-10;
    let trace = (rho[(0, 0)].re + rho[(1, 1)].re - 1.0).abs() < 1e-10;
    let det = rho[(0, 0)].re * rho[(1, 1)].re - rho[(0, 1)].norm_sqr();
    let psd = rho[(0, 0)].re >= -1e-12 && rho[(1, 1)].re >= -1e-12 && det >= -1e-12;
    if herm && trace && psd {
        Ok(())
    } else {
        Err(Error::InvalidState("ρ must be Hermitian, unit-trace and positive".into()))
    }
}

fn density(r11: f64, r10: num_complex::Complex<f64>) -> Op {
    Op::new(c(r11, 0.0), r10, r10.conj(), c(1.0 - r11, 0.0))
}

/// Density-matrix trajectory in terms of (ρ₁₁, ρ₁₀). Non-secular dynamics
/// integrates
///   ρ̇₁₁ = 2γ sϑcϑ Re ρ₁₀ − γ c²ϑ (2ρ₁₁ − 1),
///   ρ̇₁₀ = −iω₀ρ₁₀ − γ(1 + s²ϑ)ρ₁₀ + γ c²ϑ ρ₁₀* + γ sϑcϑ (2ρ₁₁ − 1);
/// secular dynamics uses the exponential solutions directly.
pub fn ohmic_density_ode(config: &OhmicConfig, rho0: &Op, t_grid: &[f64], opts: &OdeOptions) -> Result<Vec<Op>> {
    config.validate()?;
    check_density(rho0)?;
    if t_grid.iter().any(|&t| !(t >= 0.0)) || t_grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Domain("time grid must be nonnegative and non-decreasing".into()));
    }
    let r11 = rho0[(0, 0)].re;
    let r10 = rho0[(0, 1)];
    if config.secular {
        let (s, cs) = config.theta_coupling.sin_cos();
        return Ok(t_grid
            .iter()
            .map(|&t| {
                let g = integrated_rate(config, t);
                let p = 0.5 + (r11 - 0.5) * (-2.0 * cs * cs * g).exp();
                let coh = r10 * c(-(1.0 + s * s) * g, -config.omega0 * t).exp();
                density(p, coh)
            })
            .collect());
    }
    let (s, cs) = config.theta_coupling.sin_cos();
    let w0 = config.omega0;
    let mut times = vec![0.0];
    times.extend_from_slice(t_grid);
    let states = ode::solve(
        |t, y, dy| {
            let g = ohmic_rate(config, t);
            let (p, re, im) = (y[0], y[1], y[2]);
            let pop = 2.0 * p - 1.0;
            dy[0] = 2.0 * g * s * cs * re - g * cs * cs * pop;
            // ρ₁₀ = re + i im; ρ₁₀* = re − i im.
            dy[1] = w0 * im - g * (1.0 + s * s) * re + g * cs * cs * re + g * s * cs * pop;
            dy[2] = -w0 * re - g * (1.0 + s * s) * im - g * cs * cs * im;
            Ok(())
        },
        &[r11, r10.re, r10.im],
        &times,
        opts,
    )?;
    Ok(states[1..].iter().map(|y| density(y[0], c(y[1], y[2]))).collect())
}
