//! Qubit channels in Pauli-transfer form, their Choi matrices and Kraus sets.

use nalgebra::{DMatrix, Matrix3, Matrix4, Rotation3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::pauli::{self, c, Op, C64};

/// Affine Bloch map r ↦ v + V r stored as a 4×4 Pauli-transfer matrix
/// [[1, 0], [v, V]], optionally with its ω₀-derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMap {
    pub matrix: Matrix4<f64>,
    pub derivative: Option<Matrix4<f64>>,
    pub t: f64,
}

impl TransferMap {
    pub fn identity() -> Self {
        TransferMap {
            matrix: Matrix4::identity(),
            derivative: None,
            t: 0.0,
        }
    }

    /// Wrap a 4×4 matrix, checking the trace-preservation row.
    pub fn new(mut matrix: Matrix4<f64>, t: f64) -> Result<Self> {
        let row = matrix.row(0) - Matrix4::<f64>::identity().row(0);
        if row.norm() > 1e-9 || matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMap(format!(
                "first row must be (1, 0, 0, 0), got {:?}",
                matrix.row(0).iter().collect::<Vec<_>>()
            )));
        }
        matrix.set_row(0, &Matrix4::<f64>::identity().row(0));
        Ok(TransferMap {
            matrix,
            derivative: None,
            t,
        })
    }

    pub fn with_derivative(mut self, mut derivative: Matrix4<f64>) -> Self {
        derivative.set_row(0, &nalgebra::RowVector4::zeros());
        self.derivative = Some(derivative);
        self
    }

    /// Translation v.
    pub fn translation(&self) -> Vector3<f64> {
        self.matrix.fixed_view::<3, 1>(1, 0).into_owned()
    }

    /// Linear block V.
    pub fn block(&self) -> Matrix3<f64> {
        self.matrix.fixed_view::<3, 3>(1, 1).into_owned()
    }

    /// Image of a Bloch vector, v + V r.
    pub fn apply(&self, r: &Vector3<f64>) -> Vector3<f64> {
        self.translation() + self.block() * r
    }

    /// ∂/∂ω₀ of the image of a fixed Bloch vector.
    pub fn apply_derivative(&self, r: &Vector3<f64>) -> Option<Vector3<f64>> {
        self.derivative.map(|d| {
            d.fixed_view::<3, 1>(1, 0).into_owned() + d.fixed_view::<3, 3>(1, 1) * r
        })
    }

    /// Action on an arbitrary 2×2 operator.
    pub fn apply_operator(&self, x: &Op) -> Op {
        pauli::apply_transfer(&self.matrix, x)
    }

    /// Composition `self ∘ first` (apply `first`, then `self`), with the
    /// product rule on derivatives when both carry one.
    pub fn compose(&self, first: &TransferMap) -> TransferMap {
        let derivative = match (self.derivative, first.derivative) {
            (Some(a), Some(b)) => Some(a * first.matrix + self.matrix * b),
            _ => None,
        };
        TransferMap {
            matrix: self.matrix * first.matrix,
            derivative,
            t: self.t + first.t,
        }
    }

    /// 16 whitespace-separated reals, row-major.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..4 {
            for j in 0..4 {
                if !out.is_empty() {
                    out.push(' ');
                }
                out.push_str(&format!("{:.17e}", self.matrix[(i, j)]));
            }
        }
        out
    }

    pub fn from_text(text: &str, t: f64) -> Result<Self> {
        let vals = text
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() != 16 {
            return Err(Error::Parse(format!("expected 16 reals, found {}", vals.len())));
        }
        TransferMap::new(Matrix4::from_row_slice(&vals), t)
    }
}

/// Third-order Dyson map for high-temperature dynamics with total bath weight α.
///
/// `secular` selects the phase-covariant variant.
pub fn short_time_map(omega0: f64, alpha: f64, theta_coupling: f64, t: f64, secular: bool) -> TransferMap {
    let (s, cs) = theta_coupling.sin_cos();
    let (t2, t3) = (t * t, t * t * t);
    let q = omega0 * t3 / 6.0 * (alpha * (1.0 + 2.0 * s * s) + omega0 * omega0);
    let dq = t3 / 6.0 * (alpha * (1.0 + 2.0 * s * s) + 3.0 * omega0 * omega0);
    let rot = 1.0 - omega0 * omega0 * t2 / 2.0;

    let mut m = Matrix4::identity();
    let mut d = Matrix4::zeros();
    m[(1, 2)] = -omega0 * t + q;
    m[(2, 1)] = omega0 * t - q;
    m[(3, 3)] = 1.0 - alpha * t2 * cs * cs / 2.0;
    d[(1, 2)] = -t + dq;
    d[(2, 1)] = t - dq;
    d[(1, 1)] = -omega0 * t2;
    d[(2, 2)] = -omega0 * t2;
    if secular {
        m[(1, 1)] = rot - alpha * t2 * (1.0 + s * s) / 4.0;
        m[(2, 2)] = m[(1, 1)];
    } else {
        m[(1, 1)] = rot - alpha * t2 * s * s / 2.0;
        m[(2, 2)] = rot - alpha * t2 / 2.0;
        m[(1, 3)] = alpha * t2 * cs * s / 2.0;
        m[(3, 1)] = alpha * t2 * cs * s / 2.0;
        m[(2, 3)] = alpha * omega0 * t3 * cs * s / 3.0;
        m[(3, 2)] = -alpha * omega0 * t3 * cs * s / 3.0;
        d[(2, 3)] = alpha * t3 * cs * s / 3.0;
        d[(3, 2)] = -alpha * t3 * cs * s / 3.0;
    }
    TransferMap {
        matrix: m,
        derivative: Some(d),
        t,
    }
}

/// Choi matrix Σ_ij |i⟩⟨j| ⊗ Λ[|i⟩⟨j|] (trace 2), indexed (i, a) ↦ 2i + a.
pub fn choi_matrix(map: &TransferMap) -> DMatrix<C64> {
    choi_of_ptm(&map.matrix)
}

/// Choi matrix of an arbitrary Pauli-transfer matrix (linear in its argument).
pub fn choi_of_ptm(m: &Matrix4<f64>) -> DMatrix<C64> {
    let mut choi = DMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            let mut e = Op::zeros();
            e[(i, j)] = c(1.0, 0.0);
            let img = pauli::apply_transfer(m, &e);
            for a in 0..2 {
                for b in 0..2 {
                    choi[(2 * i + a, 2 * j + b)] = img[(a, b)];
                }
            }
        }
    }
    choi
}

fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

/// Eigenvalues of the Choi matrix in decreasing order.
pub fn choi_eigenvalues(map: &TransferMap) -> Vec<f64> {
    hermitian_eigen(&choi_matrix(map)).0
}

/// Kraus operators K_i with frequency derivatives K̇_i.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub operators: Vec<Op>,
    pub derivatives: Vec<Op>,
}

impl KrausSet {
    pub fn rank(&self) -> usize {
        self.operators.len()
    }

    /// ‖Σ K†K − 𝟙‖.
    pub fn completeness_error(&self) -> f64 {
        let s: Op = self.operators.iter().map(|k| k.adjoint() * k).sum();
        pauli::norm(&(s - pauli::identity()))
    }

    /// ‖Σ (K̇†K + K†K̇)‖, which vanishes for a consistent derivative.
    pub fn derivative_consistency_error(&self) -> f64 {
        let s: Op = self
            .operators
            .iter()
            .zip(&self.derivatives)
            .map(|(k, d)| d.adjoint() * k + k.adjoint() * d)
            .sum();
        pauli::norm(&s)
    }

    pub fn apply(&self, x: &Op) -> Op {
        self.operators.iter().map(|k| k * x * k.adjoint()).sum()
    }

    /// Pauli-transfer matrix of the channel realized by the operators.
    pub fn transfer_matrix(&self) -> Matrix4<f64> {
        pauli::transfer_matrix(|x| self.apply(x))
    }
}

/// Choi eigenvalues down to this negative value are attributed to integration
/// error and dropped together with the small positive ones.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-8;

/// Columns √λ_k v_k of the retained eigenpairs, i.e. the "square root" A of
/// the Choi matrix with A A† = C.
struct ChoiRoot {
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

fn choi_root(choi: &DMatrix<C64>, tol: f64) -> Result<ChoiRoot> {
    let (values, vectors) = hermitian_eigen(choi);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -tol.max(NEGATIVITY_TOLERANCE) {
        return Err(Error::NotCompletelyPositive { min_eigenvalue: min });
    }
    let keep = values.iter().take_while(|&&v| v >= tol).count().max(1);
    Ok(ChoiRoot {
        values: values[..keep].to_vec(),
        vectors: vectors.columns(0, keep).into_owned(),
    })
}

fn kraus_from_column(col: &[C64]) -> Op {
    // (K)_{a,i} = A[(i, a)].
    Op::new(col[0], col[2], col[1], col[3])
}

fn root_columns(root: &ChoiRoot) -> DMatrix<C64> {
    let mut a = root.vectors.clone();
    for (k, &v) in root.values.iter().enumerate() {
        let s = v.sqrt();
        a.column_mut(k).scale_mut(s);
    }
    a
}

fn kraus_from_columns(a: &DMatrix<C64>) -> Vec<Op> {
    (0..a.ncols())
        .map(|k| {
            let col: Vec<C64> = a.column(k).iter().copied().collect();
            kraus_from_column(&col)
        })
        .collect()
}

fn check_complete(set: &KrausSet) -> Result<()> {
    let err = set.completeness_error();
    if err > 1e-8 {
        return Err(Error::InvalidMap(format!(
            "Kraus operators violate completeness by {err:e} (map not trace preserving?)"
        )));
    }
    Ok(())
}

/// Kraus decomposition from the Choi eigendecomposition; eigenvalues below
/// `tol` are dropped. Derivatives are left at zero.
pub fn kraus_from_choi(choi: &DMatrix<C64>, tol: f64) -> Result<KrausSet> {
    let root = choi_root(choi, tol)?;
    let operators = kraus_from_columns(&root_columns(&root));
    let set = KrausSet {
        derivatives: vec![Op::zeros(); operators.len()],
        operators,
    };
    check_complete(&set)?;
    Ok(set)
}

/// Kraus set with derivatives taken from the map's derivative slot.
///
/// With C = A A† and A = V Λ^{1/2}, the choice Ȧ = (𝟙 − Π/2) Ċ V Λ^{−1/2}
/// (Π the projector onto the retained eigenvectors) satisfies
/// Ȧ A† + A Ȧ† = Ċ whenever the rank is locally constant.
pub fn kraus_with_derivative(map: &TransferMap, tol: f64) -> Result<KrausSet> {
    let deriv = map
        .derivative
        .ok_or_else(|| Error::InvalidMap("map carries no ω₀-derivative".into()))?;
    let root = choi_root(&choi_matrix(map), tol)?;
    let a = root_columns(&root);
    let cdot = choi_of_ptm(&deriv);
    let proj = &root.vectors * root.vectors.adjoint();
    let left = DMatrix::<C64>::identity(4, 4) - proj * c(0.5, 0.0);
    let mut adot = left * cdot * &root.vectors;
    for (k, &v) in root.values.iter().enumerate() {
        adot.column_mut(k).scale_mut(1.0 / v.sqrt());
    }
    let set = KrausSet {
        operators: kraus_from_columns(&a),
        derivatives: kraus_from_columns(&adot),
    };
    check_complete(&set)?;
    Ok(set)
}

/// Result of [`kraus_derivative_pair`].
#[derive(Debug, Clone, PartialEq)]
pub struct KrausDerivative {
    pub kraus: KrausSet,
    /// Set when the retained rank differs across the stencil or an eigenvalue
    /// sits close to the clipping threshold; the derivative gauge may then jump.
    pub gauge_warning: bool,
}

fn polar_unitary(m: &DMatrix<C64>) -> DMatrix<C64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    u * v_t
}

/// Kraus derivatives by central differences of three neighbouring maps, with
/// the outer decompositions rotated onto the central one (orthogonal Procrustes).
pub fn kraus_derivative_pair(
    below: &TransferMap,
    center: &TransferMap,
    above: &TransferMap,
    delta: f64,
    tol: f64,
) -> Result<KrausDerivative> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {delta}")));
    }
    let r0 = choi_root(&choi_matrix(center), tol)?;
    let rank = r0.values.len();
    let a0 = root_columns(&r0);
    let mut warn = r0.values.last().is_some_and(|&v| v < 100.0 * tol);
    let mut aligned = Vec::with_capacity(2);
    for map in [below, above] {
        let (values, vectors) = hermitian_eigen(&choi_matrix(map));
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -tol.max(NEGATIVITY_TOLERANCE) {
            return Err(Error::NotCompletelyPositive { min_eigenvalue: min });
        }
        let kept = values.iter().take_while(|&&v| v >= tol).count().max(1);
        warn |= kept != rank;
        let root = ChoiRoot {
            values: values[..rank].iter().map(|v| v.max(0.0)).collect(),
            vectors: vectors.columns(0, rank).into_owned(),
        };
        let a = root_columns(&root);
        let u = polar_unitary(&(a.adjoint() * &a0));
        aligned.push(a * u);
    }
    let adot = (&aligned[1] - &aligned[0]) * c(1.0 / (2.0 * delta), 0.0);
    let kraus = KrausSet {
        operators: kraus_from_columns(&a0),
        derivatives: kraus_from_columns(&adot),
    };
    check_complete(&kraus)?;
    Ok(KrausDerivative {
        kraus,
        gauge_warning: warn,
    })
}

/// Rotations, signed scalings and translation of the affine Bloch action,
/// V = R₁ diag(d) R₂.
#[derive(Debug, Clone, PartialEq)]
pub struct MapGeometry {
    pub r1: Rotation3<f64>,
    pub r2: Rotation3<f64>,
    pub scalings: Vector3<f64>,
    pub translation: Vector3<f64>,
}

impl MapGeometry {
    pub fn of(map: &TransferMap) -> Self {
        let svd = map.block().svd(true, true);
        let mut u = svd.u.expect("u requested");
        let mut v_t = svd.v_t.expect("v_t requested");
        let mut d = svd.singular_values;
        if u.determinant() < 0.0 {
            u.column_mut(2).neg_mut();
            d[2] = -d[2];
        }
        if v_t.determinant() < 0.0 {
            v_t.row_mut(2).neg_mut();
            d[2] = -d[2];
        }
        MapGeometry {
            r1: Rotation3::from_matrix_unchecked(u),
            r2: Rotation3::from_matrix_unchecked(v_t),
            scalings: d,
            translation: map.translation(),
        }
    }

    pub fn reconstruct(&self) -> Matrix3<f64> {
        self.r1.matrix() * Matrix3::from_diagonal(&self.scalings) * self.r2.matrix()
    }

    /// (axis, angle) of R₁ and R₂; the axis is `None` for the identity.
    pub fn axis_angles(&self) -> [(Option<Vector3<f64>>, f64); 2] {
        [self.r1, self.r2].map(|r| match r.axis_angle() {
            Some((axis, angle)) => (Some(axis.into_inner()), angle),
            None => (None, 0.0),
        })
    }
}

/// Structural properties of a map.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub cptp: bool,
    pub unital: bool,
    pub phase_covariant: bool,
    pub geometry: MapGeometry,
    pub min_choi_eigenvalue: f64,
}

pub fn classify(map: &TransferMap, tol: f64) -> Classification {
    let m = &map.matrix;
    let min_choi_eigenvalue = choi_eigenvalues(map).into_iter().fold(f64::INFINITY, f64::min);
    let unital = map.translation().norm() <= tol;
    let phase_covariant = (m[(1, 1)] - m[(2, 2)]).abs() <= tol
        && (m[(1, 2)] + m[(2, 1)]).abs() <= tol
        && [(1, 3), (3, 1), (2, 3), (3, 2), (1, 0), (2, 0)]
            .iter()
            .all(|&ij| m[ij].abs() <= tol);
    Classification {
        cptp: min_choi_eigenvalue >= -tol,
        unital,
        phase_covariant,
        geometry: MapGeometry::of(map),
        min_choi_eigenvalue,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rotation_map(angle: f64, t: f64) -> TransferMap {
        let (s, cs) = angle.sin_cos();
        let mut m = Matrix4::identity();
        m[(1, 1)] = cs;
        m[(2, 2)] = cs;
        m[(1, 2)] = -s;
        m[(2, 1)] = s;
        TransferMap::new(m, t).unwrap()
    }

    fn depolarizing() -> TransferMap {
        TransferMap::new(Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 0.0, 0.0, 0.0)), 1.0).unwrap()
    }

    /// Phase-covariant dephasing e^{−2γt} with rotation ω₀t and exact derivative.
    fn dephasing(omega0: f64, gamma: f64, t: f64) -> TransferMap {
        let d = (-2.0 * gamma * t).exp();
        let (s, cs) = (omega0 * t).sin_cos();
        let mut m = Matrix4::identity();
        let mut dm = Matrix4::zeros();
        m[(1, 1)] = d * cs;
        m[(2, 2)] = d * cs;
        m[(1, 2)] = -d * s;
        m[(2, 1)] = d * s;
        dm[(1, 1)] = -d * t * s;
        dm[(2, 2)] = -d * t * s;
        dm[(1, 2)] = -d * t * cs;
        dm[(2, 1)] = d * t * cs;
        TransferMap::new(m, t).unwrap().with_derivative(dm)
    }

    #[test]
    fn identity_choi() {
        let ev = choi_eigenvalues(&TransferMap::identity());
        assert!((ev[0] - 2.0).abs() < 1e-14);
        assert!(ev[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn depolarizing_choi_and_kraus() {
        let map = depolarizing();
        let ev = choi_eigenvalues(&map);
        assert!(ev.iter().all(|v| (v - 0.5).abs() < 1e-14));
        let k = kraus_from_choi(&choi_matrix(&map), 1e-10).unwrap();
        assert_eq!(k.rank(), 4);
        assert!((k.transfer_matrix() - map.matrix).norm() < 1e-13);
    }

    #[test]
    fn unitary_kraus_is_the_unitary() {
        let map = rotation_map(0.7, 1.0);
        let k = kraus_from_choi(&choi_matrix(&map), 1e-10).unwrap();
        assert_eq!(k.rank(), 1);
        let u = Op::new(c(0.0, -0.35).exp(), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.35).exp());
        let phase = (u.adjoint() * k.operators[0]).trace() / 2.0;
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(pauli::norm(&(k.operators[0] - u * phase)) < 1e-12);
    }

    #[test]
    fn not_cp_is_rejected() {
        let mut m = Matrix4::identity();
        m[(3, 3)] = -1.0;
        let map = TransferMap::new(m, 0.0).unwrap();
        assert!(matches!(
            kraus_from_choi(&choi_matrix(&map), 1e-10),
            Err(Error::NotCompletelyPositive { .. })
        ));
    }

    #[test]
    fn dephasing_kraus_weights() {
        let (gamma, t) = (0.3, 0.8);
        let map = dephasing(1.0, gamma, t);
        let k = kraus_from_choi(&choi_matrix(&map), 1e-10).unwrap();
        assert_eq!(k.rank(), 2);
        let e = (-2.0 * gamma * t).exp();
        let weights: Vec<f64> = k.operators.iter().map(|op| pauli::norm(op).powi(2) / 2.0).collect();
        assert!((weights[0] - (1.0 + e) / 2.0).abs() < 1e-12);
        assert!((weights[1] - (1.0 - e) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_kraus_derivative_reproduces_choi_derivative() {
        let map = dephasing(1.3, 0.2, 0.9);
        let k = kraus_with_derivative(&map, 1e-10).unwrap();
        assert!(k.derivative_consistency_error() < 1e-12);
        let h = 1e-6;
        let plus = KrausSet {
            operators: k.operators.iter().zip(&k.derivatives).map(|(a, d)| a + d * c(h, 0.0)).collect(),
            derivatives: vec![],
        };
        let fd = (plus.transfer_matrix() - map.matrix) / h;
        assert!((fd - map.derivative.unwrap()).norm() < 1e-5);
    }

    #[test]
    fn unitary_derivative_pair() {
        let (w, t, delta) = (0.9, 1.4, 1e-4);
        let maps: Vec<TransferMap> = [w - delta, w, w + delta].iter().map(|&x| rotation_map(x * t, t)).collect();
        let kd = kraus_derivative_pair(&maps[0], &maps[1], &maps[2], delta, 1e-10).unwrap();
        let k = &kd.kraus;
        assert_eq!(k.rank(), 1);
        let expect = pauli::sigma_z() * k.operators[0] * c(0.0, -t / 2.0);
        let diff = k.derivatives[0] - expect;
        // Agreement up to a gauge term i h K with real h.
        let h = (k.operators[0].adjoint() * diff).trace() / 2.0;
        assert!(h.re.abs() < 1e-8);
        assert!(pauli::norm(&(diff - k.operators[0] * h)) < 1e-7);
        assert!(k.derivative_consistency_error() < 1e-6);
    }

    #[test]
    fn frequency_independent_channel_has_zero_derivatives() {
        let map = depolarizing();
        let kd = kraus_derivative_pair(&map, &map, &map, 1e-3, 1e-10).unwrap();
        assert!(kd.kraus.derivatives.iter().all(|d| pauli::norm(d) < 1e-12));
    }

    #[test]
    fn short_time_map_examples() {
        let id = short_time_map(1.3, 0.4, 0.5, 0.0, false);
        assert!((id.matrix - Matrix4::identity()).norm() == 0.0);
        let free = short_time_map(2.0, 0.0, 0.5, 0.1, false);
        assert!((free.matrix[(1, 1)] - (1.0 - 0.02)).abs() < 1e-15);
        assert!((free.matrix[(2, 1)] - (0.2 - 0.008 / 6.0)).abs() < 1e-15);
        let dephase = short_time_map(1.0, 0.5, PI / 2.0, 0.2, false);
        assert_eq!(dephase.matrix[(3, 3)], 1.0 - 0.5 * 0.04 * (PI / 2.0).cos().powi(2) / 2.0);
        assert!(dephase.matrix[(1, 3)].abs() < 1e-16 && dephase.matrix[(3, 1)].abs() < 1e-16);
    }

    #[test]
    fn short_time_map_derivative_is_exact() {
        let (w, a, th, t, h) = (1.2, 0.3, 0.7, 0.4, 1e-5);
        for sec in [false, true] {
            let m = short_time_map(w, a, th, t, sec);
            let fd = (short_time_map(w + h, a, th, t, sec).matrix - short_time_map(w - h, a, th, t, sec).matrix)
                / (2.0 * h);
            assert!((fd - m.derivative.unwrap()).norm() < 1e-9);
        }
    }

    #[test]
    fn short_time_map_is_cp() {
        for &(w, a, th, t) in &[(1.0, 1.0, 0.3, 0.3), (2.0, 0.4, 1.0, 0.25), (0.5, 10.0, 0.0, 0.1)] {
            for sec in [false, true] {
                let cl = classify(&short_time_map(w, a, th, t, sec), 1e-6);
                assert!(cl.cptp, "{:?}", cl.min_choi_eigenvalue);
            }
        }
    }

    #[test]
    fn classification_examples() {
        let sec = classify(&short_time_map(1.0, 0.5, 0.6, 0.3, true), 1e-8);
        assert!(sec.phase_covariant && sec.unital);
        let t = (0.1f64 / 0.5).sqrt();
        let npc = classify(&short_time_map(1.0, 0.5, PI / 4.0, t, false), 1e-8);
        assert!(!npc.phase_covariant);
        let id = classify(&TransferMap::identity(), 1e-8);
        assert!(id.cptp && id.unital && id.phase_covariant);
        assert!((id.geometry.scalings - Vector3::new(1.0, 1.0, 1.0)).norm() < 1e-14);
        assert!(id.geometry.axis_angles().iter().all(|(_, a)| a.abs() < 1e-14));
    }

    #[test]
    fn geometry_reconstructs() {
        let map = short_time_map(1.0, 2.0, 0.4, 0.35, false);
        let g = MapGeometry::of(&map);
        assert!((g.reconstruct() - map.block()).norm() < 1e-12);
        assert!((g.r1.matrix().determinant() - 1.0).abs() < 1e-12);
        assert!(g.scalings.iter().all(|d| d.abs() <= 1.0 + 1e-8));
    }

    #[test]
    fn text_round_trip() {
        let map = short_time_map(1.0, 2.0, 0.4, 0.35, false);
        let back = TransferMap::from_text(&map.to_text(), map.t).unwrap();
        assert_eq!(back.matrix, map.matrix);
        assert!(TransferMap::from_text("1 0 0", 0.0).is_err());
        assert!(TransferMap::from_text(&"0 ".repeat(16), 0.0).is_err());
    }
}
