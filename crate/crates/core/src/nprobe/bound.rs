//! Channel-extension upper bound on the N-probe quantum Fisher information.

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::simplex::{minimize_from, SimplexOptions};
use crate::channel::KrausSet;
use crate::pauli::{c, Op, C64};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct BoundOptions {
    /// Simplex runs after the first one, each from a randomly oriented simplex
    /// around the best point found so far.
    pub restarts: usize,
    pub seed: u64,
    /// A restart counts as stagnant when it improves the value by less than
    /// this relative amount.
    pub improvement_tolerance: f64,
    /// Number of consecutive stagnant runs that ends the search early.
    pub patience: usize,
    pub simplex: SimplexOptions,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            restarts: 8,
            seed: 0x5eed,
            improvement_tolerance: 1e-8,
            patience: 1,
            simplex: SimplexOptions {
                max_evaluations: 4000,
                f_tolerance: 1e-11,
                f_floor: 0.0,
                x_tolerance: 1e-7,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundResult {
    pub f_up: f64,
    /// Optimal Hermitian gauge generator h.
    pub h_opt: DMatrix<C64>,
    pub n: u64,
    pub t: f64,
    pub converged: bool,
}

/// The objective 4[N‖α‖ + N(N−1)‖β‖²] of a fixed Kraus set, as a function
/// of the gauge generator h.
pub struct GaugeObjective<'a> {
    kraus: &'a KrausSet,
    n: f64,
}

impl<'a> GaugeObjective<'a> {
    pub fn new(kraus: &'a KrausSet, n: u64) -> Self {
        GaugeObjective { kraus, n: n as f64 }
    }

    /// Gauge-transformed derivatives K̇_i + i Σ_j h_ij K_j.
    pub fn shifted_derivatives(&self, h: &DMatrix<C64>) -> Vec<Op> {
        let ops = &self.kraus.operators;
        self.kraus
            .derivatives
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let mut out = *d;
                for (j, k) in ops.iter().enumerate() {
                    let hij = h[(i, j)];
                    if hij != c(0.0, 0.0) {
                        out += k * (c(0.0, 1.0) * hij);
                    }
                }
                out
            })
            .collect()
    }

    /// (α, β) for the gauge h.
    pub fn alpha_beta(&self, h: &DMatrix<C64>) -> (Op, Op) {
        let shifted = self.shifted_derivatives(h);
        let mut alpha = Op::zeros();
        let mut beta = Op::zeros();
        for (d, k) in shifted.iter().zip(&self.kraus.operators) {
            let da = d.adjoint();
            alpha += da * d;
            beta += da * k;
        }
        (alpha, beta * c(0.0, 1.0))
    }

    pub fn value(&self, h: &DMatrix<C64>) -> f64 {
        let (alpha, beta) = self.alpha_beta(h);
        4.0 * (self.n * spectral_norm(&alpha) + self.n * (self.n - 1.0) * spectral_norm(&beta).powi(2))
    }
}

/// Largest singular value of a 2×2 complex matrix.
pub fn spectral_norm(m: &Matrix2<C64>) -> f64 {
    let f2: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).norm();
    let disc = (f2 * f2 - 4.0 * det * det).max(0.0).sqrt();
    ((f2 + disc) / 2.0).sqrt()
}

/// Hermitian r×r basis: diagonal units, then symmetric and antisymmetric
/// off-diagonal pairs.
fn hermitian_basis(r: usize) -> Vec<DMatrix<C64>> {
    let mut out = Vec::with_capacity(r * r);
    for i in 0..r {
        let mut e = DMatrix::zeros(r, r);
        e[(i, i)] = c(1.0, 0.0);
        out.push(e);
    }
    for i in 0..r {
        for j in i + 1..r {
            let mut e = DMatrix::zeros(r, r);
            e[(i, j)] = c(1.0, 0.0);
            e[(j, i)] = c(1.0, 0.0);
            out.push(e);
            let mut e = DMatrix::zeros(r, r);
            e[(i, j)] = c(0.0, 1.0);
            e[(j, i)] = c(0.0, -1.0);
            out.push(e);
        }
    }
    out
}

fn push_op(v: &mut Vec<f64>, op: &Op) {
    for z in op.iter() {
        v.push(z.re);
        v.push(z.im);
    }
}

fn unflatten(x: &[f64]) -> Op {
    Op::new(c(x[0], x[1]), c(x[4], x[5]), c(x[2], x[3]), c(x[6], x[7]))
}

/// Affine coordinates h = center + Σ_k p_k directions_k in which the
/// quadratic surrogate N‖K̃̇‖²_F/2 + N(N−1)‖β‖²_F/2 is isotropic with
/// its minimum at p = 0.
struct Preconditioner {
    basis: Vec<DMatrix<C64>>,
    center: DVector<f64>,
    directions: DMatrix<f64>,
    surrogate_min: f64,
    // K̃̇ and β (flattened to reals) are affine in p: value = at_center + linear · p.
    d_center: DVector<f64>,
    d_linear: DMatrix<f64>,
    b_center: DVector<f64>,
    b_linear: DMatrix<f64>,
    n: f64,
}

impl Preconditioner {
    fn new(objective: &GaugeObjective) -> Self {
        let kraus = objective.kraus;
        let r = kraus.rank();
        let basis = hermitian_basis(r);
        let zero = DMatrix::<C64>::zeros(r, r);
        let flatten = |h: &DMatrix<C64>| {
            let mut d = Vec::with_capacity(8 * r);
            for op in objective.shifted_derivatives(h) {
                push_op(&mut d, &op);
            }
            let mut b = Vec::with_capacity(8);
            push_op(&mut b, &objective.alpha_beta(h).1);
            (DVector::from_vec(d), DVector::from_vec(b))
        };
        let (d0, b0) = flatten(&zero);
        let m = basis.len();
        let mut g = DMatrix::<f64>::zeros(d0.len(), m);
        let mut bm = DMatrix::<f64>::zeros(b0.len(), m);
        for (k, e) in basis.iter().enumerate() {
            let (d, b) = flatten(e);
            g.set_column(k, &(d - &d0));
            bm.set_column(k, &(b - &b0));
        }
        let n = objective.n;
        let wb = n * (n - 1.0);
        let (sd, sb) = (n.sqrt(), wb.sqrt());
        let rows = g.nrows() + bm.nrows();
        let mut stacked = DMatrix::<f64>::zeros(rows, m);
        stacked.rows_mut(0, g.nrows()).copy_from(&(&g * sd));
        stacked.rows_mut(g.nrows(), bm.nrows()).copy_from(&(&bm * sb));
        let mut rhs = DVector::<f64>::zeros(rows);
        rhs.rows_mut(0, d0.len()).copy_from(&(&d0 * sd));
        rhs.rows_mut(d0.len(), b0.len()).copy_from(&(&b0 * sb));
        let svd = stacked.svd(true, true);
        let u = svd.u.expect("left singular vectors requested");
        let v_t = svd.v_t.expect("right singular vectors requested");
        let top = svd.singular_values.max().max(f64::MIN_POSITIVE);
        let mut center = DVector::zeros(m);
        let mut directions = DMatrix::<f64>::zeros(m, m);
        for k in 0..svd.singular_values.len().min(m) {
            let s = svd.singular_values[k].max(1e-15 * top);
            let q = v_t.row(k).transpose();
            center -= &q * (u.column(k).dot(&rhs) / s);
            directions.set_column(k, &(q / s));
        }
        let d_center = &d0 + &g * &center;
        let b_center = &b0 + &bm * &center;
        let surrogate_min = 0.5 * (n * d_center.norm_squared() + wb * b_center.norm_squared());
        let d_linear = g * &directions;
        let b_linear = bm * &directions;
        Preconditioner {
            basis,
            center,
            directions,
            surrogate_min,
            d_center,
            d_linear,
            b_center,
            b_linear,
            n,
        }
    }

    /// The objective at p, using `d` and `b` as scratch space.
    fn value(&self, p: &[f64], d: &mut DVector<f64>, b: &mut DVector<f64>) -> f64 {
        let p = nalgebra::DVectorView::from_slice(p, p.len());
        d.copy_from(&self.d_center);
        d.gemv(1.0, &self.d_linear, &p, 1.0);
        b.copy_from(&self.b_center);
        b.gemv(1.0, &self.b_linear, &p, 1.0);
        let mut alpha = Op::zeros();
        for chunk in d.as_slice().chunks_exact(8) {
            let op = unflatten(chunk);
            alpha += op.adjoint() * op;
        }
        let beta = unflatten(b.as_slice());
        let n = self.n;
        4.0 * (n * spectral_norm(&alpha) + n * (n - 1.0) * spectral_norm(&beta).powi(2))
    }

    fn to_matrix(basis: &[DMatrix<C64>], x: &DVector<f64>) -> DMatrix<C64> {
        let r = basis[0].nrows();
        let mut h = DMatrix::zeros(r, r);
        for (e, &xk) in basis.iter().zip(x.iter()) {
            if xk != 0.0 {
                h += e * c(xk, 0.0);
            }
        }
        h
    }

    fn gauge(&self, p: &[f64]) -> DMatrix<C64> {
        let x = &self.center + &self.directions * DVector::from_column_slice(p);
        Self::to_matrix(&self.basis, &x)
    }
}

fn random_simplex(rng: &mut ChaCha8Rng, start: &[f64], step: f64) -> Vec<Vec<f64>> {
    let m = start.len();
    let a = DMatrix::<f64>::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
    let q = a.qr().q();
    let mut vertices = vec![start.to_vec()];
    for k in 0..m {
        vertices.push(start.iter().zip(q.column(k).iter()).map(|(s, d)| s + step * d).collect());
    }
    vertices
}

/// Upper bound F↑ = 4 min_h [N‖α‖ + N(N−1)‖β‖²] on the QFI of N probes
/// sent in parallel through the channel, minimized over the Kraus gauge.
///
/// The search starts at the minimizer of a Frobenius-norm surrogate and runs
/// a simplex search in coordinates that whiten the surrogate's curvature,
/// followed by randomized restarts. The returned value never exceeds the
/// objective at h = 0.
pub fn channel_qfi_bound(kraus: &KrausSet, n: u64, t: f64, opts: &BoundOptions) -> Result<BoundResult> {
    if n == 0 {
        return Err(Error::Domain("probe count must be at least 1".into()));
    }
    if kraus.rank() == 0 || kraus.derivatives.len() != kraus.rank() {
        return Err(Error::InvalidMap("Kraus set needs one derivative per operator".into()));
    }
    if kraus.completeness_error() > 1e-6 {
        return Err(Error::InvalidMap(format!(
            "Kraus set is not complete (error {:e})",
            kraus.completeness_error()
        )));
    }
    let objective = GaugeObjective::new(kraus, n);
    let r = kraus.rank();
    let zero = DMatrix::<C64>::zeros(r, r);
    let at_zero = objective.value(&zero);
    let pre = Preconditioner::new(&objective);
    let dim = pre.basis.len();

    let mut best_p = vec![0.0; dim];
    let mut best = objective.value(&pre.gauge(&best_p));
    let mut converged = true;
    if pre.surrogate_min > 0.0 && best > 0.0 {
        let mut d = pre.d_center.clone();
        let mut b = pre.b_center.clone();
        let mut f = |p: &[f64]| pre.value(p, &mut d, &mut b);
        let step = pre.surrogate_min.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut stagnant = 0;
        converged = false;
        for run in 0..=opts.restarts {
            let scale = step / (1 + run) as f64;
            let vertices = random_simplex(&mut rng, &best_p, scale);
            let res = minimize_from(&mut f, vertices, &opts.simplex);
            let gain = best - res.value;
            if res.value < best {
                best = res.value;
                best_p = res.x;
            }
            if gain <= opts.improvement_tolerance * best.abs() {
                stagnant += 1;
                if stagnant >= opts.patience {
                    converged = true;
                    break;
                }
            } else {
                stagnant = 0;
            }
        }
    }

    let h_best = pre.gauge(&best_p);
    let best = objective.value(&h_best);
    let (f_up, h_opt) = if at_zero <= best { (at_zero, zero) } else { (best, h_best) };
    Ok(BoundResult { f_up: f_up.max(0.0), h_opt, n, t, converged })
}
