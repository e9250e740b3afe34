//! Parity measurement σ_x^{⊗N} on an N-qubit GHZ input.

use crate::channel::TransferMap;
use crate::pauli::{apply_transfer, c, ket_bra, sigma_x, C64};
use crate::{Error, Result};

/// c_ab = tr(σ_x Λ[|a⟩⟨b|]) indexed `[a][b]` by the labels a, b ∈ {0, 1}.
pub type ParityCoefficients = [[C64; 2]; 2];

fn coefficients_of(m: &nalgebra::Matrix4<f64>) -> ParityCoefficients {
    let sx = sigma_x();
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate() {
            *entry = (sx * apply_transfer(m, &ket_bra(a, b))).trace();
        }
    }
    out
}

pub fn parity_coefficients(map: &TransferMap) -> ParityCoefficients {
    coefficients_of(&map.matrix)
}

/// ∂c_ab/∂ω₀ from the derivative slot of the map.
pub fn parity_coefficient_derivatives(map: &TransferMap) -> Result<ParityCoefficients> {
    let d = map
        .derivative
        .as_ref()
        .ok_or_else(|| Error::InvalidMap("map carries no ω₀-derivative".into()))?;
    Ok(coefficients_of(d))
}

fn power(z: C64, n: u64) -> C64 {
    if n == 0 {
        return c(1.0, 0.0);
    }
    let r = z.norm();
    if r == 0.0 {
        return c(0.0, 0.0);
    }
    let nf = n as f64;
    C64::from_polar((nf * r.ln()).exp(), nf * z.arg())
}

/// ⟨P_x⟩ = ½ Σ_ab c_ab^N for the GHZ state (|0…0⟩ + |1…1⟩)/√2.
pub fn parity_expectation(map: &TransferMap, n: u64) -> f64 {
    let cs = parity_coefficients(map);
    let sum: C64 = cs.iter().flatten().map(|&z| power(z, n)).sum();
    0.5 * sum.re
}

/// d⟨P_x⟩/dω₀ = ½ Σ_ab N c_ab^{N−1} ċ_ab.
pub fn parity_expectation_derivative(map: &TransferMap, n: u64) -> Result<f64> {
    let cs = parity_coefficients(map);
    let ds = parity_coefficient_derivatives(map)?;
    let mut sum = c(0.0, 0.0);
    for a in 0..2 {
        for b in 0..2 {
            sum += power(cs[a][b], n - 1) * ds[a][b] * (n as f64);
        }
    }
    Ok(0.5 * sum.re)
}

/// The ς-type part ½(c₀₀ᴺ + c₁₁ᴺ) of the parity signal.
pub fn diagonal_contribution(map: &TransferMap, n: u64) -> f64 {
    let cs = parity_coefficients(map);
    0.5 * (power(cs[0][0], n) + power(cs[1][1], n)).re
}

/// Error-propagation estimate Δ²ω̃·T = t(1 − ⟨P⟩²)/⟨Ṗ⟩².
///
/// A vanishing slope yields `+∞`, which the time optimizer skips.
pub fn parity_precision(map: &TransferMap, n: u64, t: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("probe count must be at least 1".into()));
    }
    let p = parity_expectation(map, n);
    let dp = parity_expectation_derivative(map, n)?;
    let var = (1.0 - p * p).max(0.0);
    if dp == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(t * var / (dp * dp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::kraus_from_choi;
    use crate::channel::choi_matrix;
    use crate::dynamics::ohmic::ohmic_pc_map;
    use crate::dynamics::{propagate, OhmicConfig, OhmicGenerator, PropagateOptions};
    use crate::pauli::Op;
    use crate::qfi::classical_fi;
    use nalgebra::{DMatrix, Matrix4};

    fn rotation(omega0: f64, t: f64) -> TransferMap {
        let (s, co) = (omega0 * t).sin_cos();
        let m = Matrix4::new(
            1.0, 0.0, 0.0, 0.0, //
            0.0, co, -s, 0.0, //
            0.0, s, co, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        );
        let d = Matrix4::new(
            0.0, 0.0, 0.0, 0.0, //
            0.0, -t * s, -t * co, 0.0, //
            0.0, t * co, -t * s, 0.0, //
            0.0, 0.0, 0.0, 0.0,
        );
        TransferMap::new(m, t).unwrap().with_derivative(d)
    }

    fn config(theta: f64, secular: bool) -> OhmicConfig {
        OhmicConfig {
            lambda_over_beta: 0.1,
            omega_c: 10.0,
            omega0: 1.0,
            theta_coupling: theta,
            secular,
            semigroup: false,
        }
    }

    fn npc_map(theta: f64, t: f64) -> TransferMap {
        let generator = OhmicGenerator::new(config(theta, false)).unwrap();
        propagate(&generator, &[t], &PropagateOptions::default()).unwrap().maps.pop().unwrap()
    }

    fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
        a.kronecker(b)
    }

    fn to_dense(op: &Op) -> DMatrix<C64> {
        DMatrix::from_fn(2, 2, |i, j| op[(i, j)])
    }

    /// tr(σ_x^{⊗N} Λ^{⊗N}[GHZ]) through the 2ᴺ-dimensional state.
    fn brute_force(map: &TransferMap, n: usize) -> f64 {
        let kraus = kraus_from_choi(&choi_matrix(map), 1e-13).unwrap();
        let dim = 1 << n;
        // Index 0 is |1…1⟩ and index dim−1 is |0…0⟩ in the (|1⟩, |0⟩) ordering.
        let mut ghz = DMatrix::<C64>::zeros(dim, dim);
        for &i in &[0, dim - 1] {
            for &j in &[0, dim - 1] {
                ghz[(i, j)] = c(0.5, 0.0);
            }
        }
        let r = kraus.rank();
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        for mut idx in 0..r.pow(n as u32) {
            let mut k = DMatrix::<C64>::identity(1, 1);
            for _ in 0..n {
                k = kron(&k, &to_dense(&kraus.operators[idx % r]));
                idx /= r;
            }
            out += &k * &ghz * k.adjoint();
        }
        let mut px = DMatrix::<C64>::identity(1, 1);
        for _ in 0..n {
            px = kron(&px, &to_dense(&sigma_x()));
        }
        (px * out).trace().re
    }

    #[test]
    fn noiseless_parity_is_cosine() {
        let (w, t) = (1.3, 0.9);
        let map = rotation(w, t);
        let cs = parity_coefficients(&map);
        assert!((cs[0][1] - C64::from_polar(1.0, w * t)).norm() < 1e-14);
        assert!(cs[0][0].norm() < 1e-14);
        for n in 1..6u64 {
            let nf = n as f64;
            assert!((parity_expectation(&map, n) - (nf * w * t).cos()).abs() < 1e-12);
            let d = parity_expectation_derivative(&map, n).unwrap();
            assert!((d + nf * t * (nf * w * t).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_gives_unit_parity_for_one_probe() {
        let map = TransferMap::identity();
        assert!((parity_expectation(&map, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn noiseless_precision_is_heisenberg_limited() {
        for (n, t) in [(1u64, 1.0), (3, 0.37), (50, 0.011), (1000, 2.3)] {
            let map = rotation(0.8, t);
            let err = parity_precision(&map, n, t).unwrap();
            let hl = 1.0 / ((n * n) as f64 * t);
            assert!((err - hl).abs() < 1e-9 * hl, "N={n}: {err} vs {hl}");
        }
    }

    #[test]
    fn matches_dense_simulation() {
        for (theta, t) in [(0.0, 0.7), (0.3, 1.9), (1.2, 0.4)] {
            let map = npc_map(theta, t);
            for n in 1..=3usize {
                let exact = brute_force(&map, n);
                let ours = parity_expectation(&map, n as u64);
                assert!((ours - exact).abs() < 1e-10, "θ={theta}, N={n}: {ours} vs {exact}");
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let mut cfg = config(0.0, true);
        let (t, n, h) = (1.4, 7u64, 1e-5);
        let map = ohmic_pc_map(&cfg, t);
        let analytic = parity_expectation_derivative(&map, n).unwrap();
        cfg.omega0 += h;
        let up = parity_expectation(&ohmic_pc_map(&cfg, t), n);
        cfg.omega0 -= 2.0 * h;
        let dn = parity_expectation(&ohmic_pc_map(&cfg, t), n);
        assert!((analytic - (up - dn) / (2.0 * h)).abs() < 1e-7);
    }

    #[test]
    fn classical_fisher_information_of_parity_outcomes() {
        let map = npc_map(0.5, 1.1);
        let n = 5;
        let p = parity_expectation(&map, n);
        let dp = parity_expectation_derivative(&map, n).unwrap();
        let fi = classical_fi(&[(1.0 + p) / 2.0, (1.0 - p) / 2.0], &[dp / 2.0, -dp / 2.0]).unwrap();
        assert!((fi - dp * dp / (1.0 - p * p)).abs() < 1e-12 * fi);
        let t = 1.1;
        assert!((parity_precision(&map, n, t).unwrap() - t / fi).abs() < 1e-12 * t / fi);
    }

    #[test]
    fn diagonal_terms_cancel_for_odd_n_and_fade_for_large_n() {
        for theta in [0.0, std::f64::consts::PI / 100.0, 0.6] {
            let map = npc_map(theta, 2.0);
            for n in [1u64, 3, 101] {
                assert!(diagonal_contribution(&map, n).abs() < 1e-12);
            }
            assert!(diagonal_contribution(&map, 200).abs() < 1e-12);
        }
    }
}
