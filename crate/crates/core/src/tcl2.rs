//! Second-order time-convolutionless (TCL2) master-equation coefficients and
//! the generator in Pauli-transfer form.
//!
//! The dissipator reads Σ_{kj} b_kj (σ_k ρ σ_j† − ½{σ_j†σ_k, ρ}) with
//! σ_k ∈ {σ₊, σ₋, σ_z} in that order.

use nalgebra::{Matrix3, Matrix4};

use crate::bath::{self, BathModel};
use crate::error::Result;
use crate::pauli::{self, c, Op, C64};

pub const PLUS: usize = 0;
pub const MINUS: usize = 1;
pub const Z: usize = 2;

/// The three memory integrals entering the generator: Γ(0, t), Γ(ω₀, t), Γ(−ω₀, t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSet {
    pub zero: C64,
    pub plus: C64,
    pub minus: C64,
}

impl GammaSet {
    pub fn zero() -> Self {
        let z = c(0.0, 0.0);
        GammaSet { zero: z, plus: z, minus: z }
    }
}

/// Evaluate Γ(0, t) and Γ(±ω₀, t), honouring the regime flags of `model`.
pub fn gamma_set(model: &BathModel, omega0: f64, t: f64) -> Result<GammaSet> {
    let zero = bath::gamma_integral(model, 0.0, t)?.value;
    if model.wide_cutoff {
        return Ok(GammaSet { zero, plus: zero, minus: zero });
    }
    let plus = bath::gamma_integral(model, omega0, t)?.value;
    let minus = if model.high_temperature {
        plus.conj()
    } else {
        bath::gamma_integral(model, -omega0, t)?.value
    };
    Ok(GammaSet { zero, plus, minus })
}

/// ∂/∂ω₀ of [`gamma_set`].
pub fn gamma_set_derivative(model: &BathModel, omega0: f64, t: f64) -> Result<GammaSet> {
    if model.wide_cutoff {
        return Ok(GammaSet::zero());
    }
    let plus = bath::gamma_integral_derivative(model, omega0, t)?;
    let minus = if model.high_temperature {
        plus.conj()
    } else {
        -bath::gamma_integral_derivative(model, -omega0, t)?
    };
    Ok(GammaSet {
        zero: c(0.0, 0.0),
        plus,
        minus,
    })
}

/// Dissipator matrix b and Lamb shift at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorCoefficients {
    /// Indexed by (+, −, z).
    pub b: Matrix3<C64>,
    pub h_ls: Op,
    pub t: f64,
    /// Frequency of the free Hamiltonian ω₀σ_z/2.
    pub omega0: f64,
    pub theta_coupling: f64,
}

impl GeneratorCoefficients {
    /// Build b and H^LS from the memory integrals. Both are real-linear in the
    /// Γ values, so feeding derivatives of Γ yields derivatives of b and H^LS.
    pub fn from_gammas(g: &GammaSet, omega0: f64, theta_coupling: f64, t: f64) -> Self {
        let (s, cs) = theta_coupling.sin_cos();
        let weights = [cs / 2.0, cs / 2.0, s / 2.0];
        let gammas = [g.minus, g.plus, g.zero];
        let b = Matrix3::from_fn(|k, j| (gammas[k] + gammas[j].conj()) * (weights[k] * weights[j]));

        let h11 = cs * cs / 4.0 * g.plus.im;
        let h00 = cs * cs / 4.0 * g.minus.im;
        let upper = c(0.0, s * cs / 4.0) * (c(g.zero.re, 0.0) - (g.minus + g.plus.conj()) * 0.5);
        let h_ls = Op::new(c(h11, 0.0), upper, upper.conj(), c(h00, 0.0));
        GeneratorCoefficients {
            b,
            h_ls,
            t,
            omega0,
            theta_coupling,
        }
    }
}

/// b(t) and H^LS(t) for the given bath, frequency and coupling angle.
pub fn dissipator_coefficients(
    model: &BathModel,
    omega0: f64,
    theta_coupling: f64,
    t: f64,
) -> Result<GeneratorCoefficients> {
    let g = gamma_set(model, omega0, t)?;
    Ok(GeneratorCoefficients::from_gammas(&g, omega0, theta_coupling, t))
}

/// ∂/∂ω₀ of b(t) and H^LS(t); the `omega0` field carries the point of evaluation.
pub fn dissipator_coefficients_derivative(
    model: &BathModel,
    omega0: f64,
    theta_coupling: f64,
    t: f64,
) -> Result<GeneratorCoefficients> {
    let g = gamma_set_derivative(model, omega0, t)?;
    Ok(GeneratorCoefficients::from_gammas(&g, omega0, theta_coupling, t))
}

/// The Lamb-shift Hamiltonian alone.
pub fn lamb_shift(model: &BathModel, omega0: f64, theta_coupling: f64, t: f64) -> Result<Op> {
    Ok(dissipator_coefficients(model, omega0, theta_coupling, t)?.h_ls)
}

/// Secular approximation: keep only b₊₊, b₋₋, b_zz and the diagonal of H^LS.
pub fn secular_truncate(coeffs: &GeneratorCoefficients) -> GeneratorCoefficients {
    let mut out = coeffs.clone();
    for k in 0..3 {
        for j in 0..3 {
            if k != j {
                out.b[(k, j)] = c(0.0, 0.0);
            }
        }
    }
    out.h_ls[(0, 1)] = c(0.0, 0.0);
    out.h_ls[(1, 0)] = c(0.0, 0.0);
    out
}

/// A generator in Pauli-transfer form.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorPTM {
    pub matrix: Matrix4<f64>,
    pub t: f64,
}

fn jump_operators() -> [Op; 3] {
    [pauli::sigma_plus(), pauli::sigma_minus(), pauli::sigma_z()]
}

/// Pauli-transfer matrix of X ↦ −i[H, X] + Σ b_kj(σ_k X σ_j† − ½{σ_j†σ_k, X}).
pub fn superoperator_ptm(b: &Matrix3<C64>, hamiltonian: &Op) -> Matrix4<f64> {
    let ops = jump_operators();
    let minus_i = c(0.0, -1.0);
    let mut m = pauli::transfer_matrix(|x| {
        let mut out = (hamiltonian * x - x * hamiltonian) * minus_i;
        for k in 0..3 {
            for j in 0..3 {
                let w = b[(k, j)];
                if w == c(0.0, 0.0) {
                    continue;
                }
                let dag = ops[j].adjoint();
                let prod = dag * ops[k];
                out += (ops[k] * x * dag - (prod * x + x * prod) * c(0.5, 0.0)) * w;
            }
        }
        out
    });
    // Trace preservation holds identically; drop rounding residue.
    m.set_row(0, &nalgebra::RowVector4::zeros());
    m
}

/// Full generator −i[ω₀σ_z/2 + H^LS, ·] + dissipator.
pub fn generator_ptm(coeffs: &GeneratorCoefficients) -> GeneratorPTM {
    let h = pauli::sigma_z() * c(coeffs.omega0 / 2.0, 0.0) + coeffs.h_ls;
    GeneratorPTM {
        matrix: superoperator_ptm(&coeffs.b, &h),
        t: coeffs.t,
    }
}

/// ∂L/∂ω₀ given derivative coefficients (see [`dissipator_coefficients_derivative`]).
///
/// With `rates` false only the explicit rotation ω₀σ_z/2 is differentiated,
/// which is the frozen-rate derivative behind the auxiliary QFI.
pub fn generator_ptm_derivative(derivative: &GeneratorCoefficients, rates: bool) -> GeneratorPTM {
    let rotation = pauli::sigma_z() * c(0.5, 0.0);
    let matrix = if rates {
        superoperator_ptm(&derivative.b, &(rotation + derivative.h_ls))
    } else {
        superoperator_ptm(&Matrix3::zeros(), &rotation)
    };
    GeneratorPTM {
        matrix,
        t: derivative.t,
    }
}
