//! Qubit operators and the normalized Pauli basis.
//!
//! Matrices are written in the ordered basis (|1⟩, |0⟩), so that
//! σ_z = diag(1, −1), σ₊ = |1⟩⟨0| and a Bloch vector r corresponds to
//! ρ = (𝟙 + r·σ)/2 with ρ₁₁ = (1 + z)/2.

use nalgebra::{Matrix2, Matrix4, Vector3};
use num_complex::Complex;

pub type C64 = Complex<f64>;

/// A 2×2 complex operator.
pub type Op = Matrix2<C64>;

pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity() -> Op {
    Op::identity()
}

pub fn sigma_x() -> Op {
    Op::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

pub fn sigma_y() -> Op {
    Op::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
}

pub fn sigma_z() -> Op {
    Op::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
}

/// σ₊ = |1⟩⟨0|.
pub fn sigma_plus() -> Op {
    Op::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))
}

/// σ₋ = |0⟩⟨1|.
pub fn sigma_minus() -> Op {
    Op::new(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

/// |a⟩⟨b| for computational labels a, b ∈ {0, 1}.
pub fn ket_bra(a: usize, b: usize) -> Op {
    let mut m = Op::zeros();
    m[(1 - a, 1 - b)] = c(1.0, 0.0);
    m
}

/// The normalized basis {𝟙/√2, σ_x/√2, σ_y/√2, σ_z/√2}.
pub fn basis() -> [Op; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        identity().scale(s),
        sigma_x().scale(s),
        sigma_y().scale(s),
        sigma_z().scale(s),
    ]
}

/// Hilbert–Schmidt coordinates tr(τ_α X) of an operator.
pub fn coordinates(x: &Op) -> [C64; 4] {
    let b = basis();
    std::array::from_fn(|a| (b[a] * x).trace())
}

/// Rebuild an operator from complex coordinates in the normalized basis.
pub fn from_coordinates(coords: &[C64; 4]) -> Op {
    let b = basis();
    let mut out = Op::zeros();
    for (tau, &w) in b.iter().zip(coords) {
        out += tau * w;
    }
    out
}

/// Pauli-transfer matrix of a linear map on operators, M_αβ = tr(τ_α Λ[τ_β]).
///
/// Imaginary parts are discarded; they vanish for Hermiticity-preserving maps.
pub fn transfer_matrix<F: Fn(&Op) -> Op>(map: F) -> Matrix4<f64> {
    let b = basis();
    let mut m = Matrix4::zeros();
    for beta in 0..4 {
        let image = map(&b[beta]);
        for alpha in 0..4 {
            m[(alpha, beta)] = (b[alpha] * image).trace().re;
        }
    }
    m
}

/// Apply a Pauli-transfer matrix to an arbitrary (not necessarily Hermitian) operator.
pub fn apply_transfer(m: &Matrix4<f64>, x: &Op) -> Op {
    let x_coords = coordinates(x);
    let out: [C64; 4] = std::array::from_fn(|a| {
        (0..4).map(|b| x_coords[b] * m[(a, b)]).sum()
    });
    from_coordinates(&out)
}

pub fn density_from_bloch(r: &Vector3<f64>) -> Op {
    (identity() + sigma_x() * c(r.x, 0.0) + sigma_y() * c(r.y, 0.0) + sigma_z() * c(r.z, 0.0))
        .scale(0.5)
}

pub fn bloch_from_density(rho: &Op) -> Vector3<f64> {
    Vector3::new(
        (sigma_x() * rho).trace().re,
        (sigma_y() * rho).trace().re,
        (sigma_z() * rho).trace().re,
    )
}

/// Frobenius norm of a complex 2×2 operator.
pub fn norm(x: &Op) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
