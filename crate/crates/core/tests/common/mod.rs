#![allow(dead_code)]

use nalgebra::DMatrix;
use qprobe::channel::{choi_matrix, kraus_from_choi, TransferMap};
use qprobe::dynamics::ohmic::ohmic_pc_map;
use qprobe::dynamics::{propagate, OhmicConfig, OhmicGenerator, PropagateOptions};
use qprobe::pauli::{c, sigma_x, C64};

pub fn ohmic(lambda_over_beta: f64, omega0: f64, theta: f64, secular: bool, semigroup: bool) -> OhmicConfig {
    OhmicConfig {
        lambda_over_beta,
        omega_c: 10.0,
        omega0,
        theta_coupling: theta,
        secular,
        semigroup,
    }
}

/// Maps of an Ohmic configuration on `grid` (closed form when secular).
pub fn ohmic_maps(config: OhmicConfig, grid: &[f64]) -> Vec<TransferMap> {
    if config.secular {
        return grid.iter().map(|&t| ohmic_pc_map(&config, t)).collect();
    }
    let generator = OhmicGenerator::new(config).unwrap();
    let traj = propagate(&generator, grid, &PropagateOptions::default()).unwrap();
    traj.maps.into_iter().filter(|m| m.t > 0.0).collect()
}

pub fn ohmic_map(config: OhmicConfig, t: f64) -> TransferMap {
    ohmic_maps(config, &[t]).pop().unwrap()
}

fn to_dense(op: &qprobe::pauli::Op) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| op[(i, j)])
}

/// tr(σ_x^{⊗N} Λ^{⊗N}[GHZ]) by explicit 2ᴺ-dimensional simulation.
pub fn dense_parity(map: &TransferMap, n: usize) -> f64 {
    let kraus = kraus_from_choi(&choi_matrix(map), 1e-13).unwrap();
    let dim = 1 << n;
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
            k = k.kronecker(&to_dense(&kraus.operators[idx % r]));
            idx /= r;
        }
        out += &k * &ghz * k.adjoint();
    }
    let mut px = DMatrix::<C64>::identity(1, 1);
    for _ in 0..n {
        px = px.kronecker(&to_dense(&sigma_x()));
    }
    (px * out).trace().re
}
