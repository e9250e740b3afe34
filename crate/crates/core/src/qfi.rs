//! Single-probe quantum and classical Fisher information.

use nalgebra::{Matrix3, Vector3};

use crate::channel::TransferMap;
use crate::error::{Error, Result};

/// Below this value of 1 − |r|² the state counts as pure.
pub const PURITY_THRESHOLD: f64 = 1e-10;

/// A qubit state by its Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub r: Vector3<f64>,
}

impl BlochState {
    pub fn new(r: Vector3<f64>) -> Result<Self> {
        if !(r.norm() <= 1.0 + 1e-12) {
            return Err(Error::InvalidState(format!("Bloch vector too long: |r| = {}", r.norm())));
        }
        Ok(BlochState { r })
    }

    /// Pure state (sin θ cos φ, sin θ sin φ, cos θ).
    pub fn pure(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        BlochState {
            r: Vector3::new(st * cp, st * sp, ct),
        }
    }

    pub fn is_pure(&self) -> bool {
        (self.r.norm() - 1.0).abs() < 1e-12
    }

    /// (θ, φ) of the direction of r.
    pub fn angles(&self) -> (f64, f64) {
        let n = self.r.norm();
        if n == 0.0 {
            return (0.0, 0.0);
        }
        ((self.r.z / n).clamp(-1.0, 1.0).acos(), self.r.y.atan2(self.r.x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfiKind {
    Bloch,
    ShortTimePc,
    ShortTimeNpc,
    PcAnalytic,
    Auxiliary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiValue {
    pub value: f64,
    pub t: f64,
    pub kind: QfiKind,
}

fn bloch_formula(r: &Vector3<f64>, rdot: &Vector3<f64>) -> Result<f64> {
    let len2 = r.norm_squared();
    if len2 > 1.0 + 1e-9 {
        return Err(Error::InvalidMap(format!(
            "evolved Bloch vector leaves the ball: |r| = {}",
            len2.sqrt()
        )));
    }
    let gap = 1.0 - len2;
    let mut f = rdot.norm_squared();
    if gap >= PURITY_THRESHOLD {
        f += r.dot(rdot).powi(2) / gap;
    }
    Ok(f)
}

/// QFI of the state V r₀ for a unital map: |V̇r₀|² + (Vr₀·V̇r₀)²/(1 − |Vr₀|²).
pub fn qfi_bloch(v: &Matrix3<f64>, v_dot: &Matrix3<f64>, r0: &BlochState, t: f64) -> Result<QfiValue> {
    let value = bloch_formula(&(v * r0.r), &(v_dot * r0.r))?;
    Ok(QfiValue {
        value,
        t,
        kind: QfiKind::Bloch,
    })
}

/// QFI of the output of an affine map, using its derivative slot.
pub fn qfi_map(map: &TransferMap, r0: &BlochState) -> Result<QfiValue> {
    let rdot = map
        .apply_derivative(&r0.r)
        .ok_or_else(|| Error::InvalidMap("map carries no ω₀-derivative".into()))?;
    Ok(QfiValue {
        value: bloch_formula(&map.apply(&r0.r), &rdot)?,
        t: map.t,
        kind: QfiKind::Bloch,
    })
}

/// Fourth-order short-time QFI for an initial pure state (θ, φ).
///
/// The non-secular correction is
/// αt⁴[⅓ sin θ cos θ sin 2ϑ cos φ + sin²θ N/D] with
/// N = cos²ϑ sin²φ (sin ϑ cos θ + cos ϑ cos φ sin θ)²/4 and
/// D = (cos ϑ cos θ − sin ϑ cos φ sin θ)² + sin²φ sin²θ.
pub fn qfi_short_time(
    theta: f64,
    phi: f64,
    theta_coupling: f64,
    alpha: f64,
    omega0: f64,
    t: f64,
    secular: bool,
) -> QfiValue {
    let _ = omega0;
    let (st, ct) = theta.sin_cos();
    let (sv, cv) = theta_coupling.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let t2 = t * t;
    let t4 = t2 * t2;
    let pc = st * st * t2 - alpha * st * st * (1.0 + sv * sv) * t4 / 3.0;
    if secular {
        return QfiValue {
            value: pc,
            t,
            kind: QfiKind::ShortTimePc,
        };
    }
    let x = sv * ct + cv * cp * st;
    let den = (cv * ct - sv * cp * st).powi(2) + sp * sp * st * st;
    let ratio = if den.abs() < 1e-12 {
        if st.abs() < 1e-12 || cv.abs() < 1e-12 {
            0.0
        } else {
            cv * cv * x * x / 4.0
        }
    } else {
        st * st * cv * cv * sp * sp * x * x / (4.0 * den)
    };
    let delta = alpha * t4 * (st * ct * (2.0 * theta_coupling).sin() * cp / 3.0 + ratio);
    QfiValue {
        value: pc + delta,
        t,
        kind: QfiKind::ShortTimeNpc,
    }
}

/// Phase-covariant map data: coherence factor d, population factor d_z,
/// translation v_z, their use on an initial state with height z₀ and
/// distance r⊥ from the z axis, and the ω₀-derivatives ḋ and ż.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcQfiInputs {
    pub d: f64,
    pub d_dot: f64,
    pub d_z: f64,
    pub v_z: f64,
    pub z0: f64,
    pub z_dot: f64,
    pub r_perp0: f64,
    pub t: f64,
}

/// Analytic PC QFI. Returns (auxiliary, full) with
/// F̃ = t²D² and F = t²D² + Ḋ² + ż² + (DḊ + zż)²/(1 − D² − z²),
/// where D = |d| r⊥ and z = v_z + z₀ d_z.
pub fn qfi_pc_analytic(p: &PcQfiInputs) -> Result<(QfiValue, QfiValue)> {
    let dist = p.d.abs() * p.r_perp0;
    let dist_dot = p.d.signum() * p.d_dot * p.r_perp0;
    let z = p.v_z + p.z0 * p.d_z;
    let gap = 1.0 - dist * dist - z * z;
    if gap < -1e-10 {
        return Err(Error::InvalidState(format!("1 − D² − z² = {gap:e} < 0")));
    }
    let aux = p.t * p.t * dist * dist;
    let mut full = aux + dist_dot * dist_dot + p.z_dot * p.z_dot;
    if gap >= PURITY_THRESHOLD {
        full += (dist * dist_dot + z * p.z_dot).powi(2) / gap;
    }
    Ok((
        QfiValue {
            value: aux,
            t: p.t,
            kind: QfiKind::PcAnalytic,
        },
        QfiValue {
            value: full,
            t: p.t,
            kind: QfiKind::PcAnalytic,
        },
    ))
}

/// QFI with the rates frozen: `family(ω, Ω)` evaluates the map with rotation
/// frequency ω and rates taken at Ω. Only the first slot is differentiated
/// (Richardson-extrapolated central differences), then Ω = ω₀.
pub fn auxiliary_qfi<F>(family: F, omega0: f64, r0: &BlochState, t: f64) -> Result<QfiValue>
where
    F: Fn(f64, f64) -> Result<TransferMap>,
{
    let h = 1e-3 * omega0.abs().max(1.0);
    let center = family(omega0, omega0)?;
    let central = |h: f64| -> Result<Vector3<f64>> {
        let up = family(omega0 + h, omega0)?.apply(&r0.r);
        let dn = family(omega0 - h, omega0)?.apply(&r0.r);
        Ok((up - dn) / (2.0 * h))
    };
    let coarse = central(h)?;
    let fine = central(h / 2.0)?;
    let rdot = (fine * 4.0 - coarse) / 3.0;
    Ok(QfiValue {
        value: bloch_formula(&center.apply(&r0.r), &rdot)?,
        t,
        kind: QfiKind::Auxiliary,
    })
}

/// Classical Fisher information Σ ṗ²/p of a measurement distribution.
pub fn classical_fi(probabilities: &[f64], derivatives: &[f64]) -> Result<f64> {
    if probabilities.len() != derivatives.len() || probabilities.is_empty() {
        return Err(Error::Domain("probabilities and derivatives must have equal, nonzero length".into()));
    }
    if probabilities.iter().any(|&p| !(p >= -1e-14)) {
        return Err(Error::Domain("probabilities must be nonnegative".into()));
    }
    let total: f64 = probabilities.iter().sum();
    let flux: f64 = derivatives.iter().sum();
    if (total - 1.0).abs() > 1e-9 || flux.abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "need Σp = 1 and Σṗ = 0, got Σp = {total}, Σṗ = {flux}"
        )));
    }
    let mut fi = 0.0;
    for (k, (&p, &pd)) in probabilities.iter().zip(derivatives).enumerate() {
        if p < 1e-14 {
            if pd.abs() < 1e-14 {
                continue;
            }
            return Err(Error::InfiniteInformation { outcome: k });
        }
        fi += pd * pd / p;
    }
    Ok(fi)
}

/// Approximately optimal short-time input: θ = π/2, φ = arctan √(sin ϑ).
pub fn optimal_short_time_state(theta_coupling: f64) -> (f64, f64) {
    (std::f64::consts::FRAC_PI_2, theta_coupling.sin().max(0.0).sqrt().atan())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::short_time_map;
    use std::f64::consts::PI;

    fn rotation(w: f64, t: f64) -> (Matrix3<f64>, Matrix3<f64>) {
        let (s, c) = (w * t).sin_cos();
        let v = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
        let vd = Matrix3::new(-t * s, -t * c, 0.0, t * c, -t * s, 0.0, 0.0, 0.0, 0.0);
        (v, vd)
    }

    #[test]
    fn noiseless_equator_gives_t_squared() {
        let (v, vd) = rotation(1.3, 2.5);
        let f = qfi_bloch(&v, &vd, &BlochState::pure(PI / 2.0, 0.4), 2.5).unwrap();
        assert!((f.value - 6.25).abs() < 1e-12);
        let zero = qfi_bloch(&v, &vd, &BlochState::new(Vector3::zeros()).unwrap(), 2.5).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn rejects_expanding_maps() {
        let v = Matrix3::identity() * 1.1;
        assert!(qfi_bloch(&v, &Matrix3::zeros(), &BlochState::pure(0.3, 0.0), 1.0).is_err());
        assert!(BlochState::new(Vector3::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn short_time_examples() {
        let (a, t): (f64, f64) = (0.2, 0.3);
        for &th in &[0.0, 0.5, 1.2] {
            let f = qfi_short_time(PI / 2.0, 0.7, th, a, 1.0, t, true).value;
            let expect = t * t - a * (1.0 + th.sin().powi(2)) * t.powi(4) / 3.0;
            assert!((f - expect).abs() < 1e-15);
        }
        for &(theta, phi) in &[(0.3, 0.2), (1.0, 2.0), (PI / 2.0, 0.0)] {
            let pc = qfi_short_time(theta, phi, PI / 2.0, a, 1.0, t, true).value;
            let npc = qfi_short_time(theta, phi, PI / 2.0, a, 1.0, t, false).value;
            assert!((pc - npc).abs() < 1e-15);
        }
        let delta = qfi_short_time(PI / 2.0, PI / 4.0, 0.0, a, 1.0, t, false).value
            - qfi_short_time(PI / 2.0, PI / 4.0, 0.0, a, 1.0, t, true).value;
        assert!((delta - a * t.powi(4) / 8.0).abs() < 1e-15);
    }

    #[test]
    fn equatorial_correction_formula() {
        let (a, t): (f64, f64) = (0.7, 0.2);
        for &th in &[0.1, 0.6, 1.3] {
            for &phi in &[0.1, 1.0, 2.5] {
                let (s, c) = f64::sin_cos(th);
                let (sp, cp) = f64::sin_cos(phi);
                let expect = a * t.powi(4) / 4.0 * c.powi(4) * cp * cp * sp * sp / (s * s * cp * cp + sp * sp);
                let delta = qfi_short_time(PI / 2.0, phi, th, a, 1.0, t, false).value
                    - qfi_short_time(PI / 2.0, phi, th, a, 1.0, t, true).value;
                assert!((delta - expect).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn singular_denominator_uses_limit() {
        let (a, t, th): (f64, f64, f64) = (0.5, 0.3, 0.4);
        // D vanishes at φ = 0 and tan θ = cot ϑ.
        let theta = (1.0 / th.tan()).atan();
        let at = qfi_short_time(theta, 0.0, th, a, 1.0, t, false).value;
        let near = qfi_short_time(theta, 1e-5, th, a, 1.0, t, false).value;
        assert!((at - near).abs() < 1e-8, "{at} vs {near}");
    }

    #[test]
    fn short_time_agrees_with_map_to_leading_order() {
        let (a, w, th) = (1.0, 1.0, 0.6);
        for secular in [true, false] {
            let mut ratios = vec![];
            for &t in &[0.02, 0.01, 0.005] {
                let map = short_time_map(w, a, th, t, secular);
                let r0 = BlochState::pure(1.1, 0.5);
                let exact = qfi_map(&map, &r0).unwrap().value;
                let approx = qfi_short_time(1.1, 0.5, th, a, w, t, secular).value;
                ratios.push((exact - approx).abs() / exact / (t * t));
            }
            assert!(ratios.iter().all(|r| *r < 5.0), "{ratios:?}");
        }
    }

    #[test]
    fn pc_analytic_examples() {
        let p = PcQfiInputs {
            d: 1.0,
            d_dot: 0.0,
            d_z: 1.0,
            v_z: 0.0,
            z0: 0.0,
            z_dot: 0.0,
            r_perp0: 1.0,
            t: 1.7,
        };
        let (aux, full) = qfi_pc_analytic(&p).unwrap();
        assert!((aux.value - 1.7 * 1.7).abs() < 1e-15 && (full.value - aux.value).abs() < 1e-15);
        let q = PcQfiInputs {
            d: 0.6,
            d_dot: -0.3,
            d_z: 0.7,
            v_z: 0.1,
            z0: 0.5,
            z_dot: 0.2,
            r_perp0: 0.75f64.sqrt(),
            ..p
        };
        let (aux, full) = qfi_pc_analytic(&q).unwrap();
        assert!(full.value > aux.value);
        let bad = PcQfiInputs { d: 1.0, v_z: 0.5, z0: 0.5, r_perp0: 1.0, ..q };
        assert!(qfi_pc_analytic(&bad).is_err());
    }

    #[test]
    fn pc_analytic_matches_bloch_formula() {
        // Non-unital PC map with ω₀-dependent factors.
        let (w, t) = (1.2, 0.9);
        let build = |w: f64| {
            let d = (-0.3 * t * (1.0 + 0.2 * w)).exp();
            let dz = (-0.5 * t * w).exp();
            let vz = 0.2 * (1.0 - dz);
            let (s, c) = (w * t).sin_cos();
            let mut m = nalgebra::Matrix4::identity();
            m[(1, 1)] = d * c;
            m[(2, 2)] = d * c;
            m[(1, 2)] = -d * s;
            m[(2, 1)] = d * s;
            m[(3, 3)] = dz;
            m[(3, 0)] = vz;
            (m, d, dz, vz)
        };
        let h = 1e-5;
        let (m, d, dz, vz) = build(w);
        let (mp, dp, dzp, vzp) = build(w + h);
        let (mm, dm, dzm, vzm) = build(w - h);
        let map = TransferMap::new(m, t).unwrap().with_derivative((mp - mm) / (2.0 * h));
        let r0 = BlochState::pure(1.0, 0.3);
        let z0 = r0.r.z;
        let p = PcQfiInputs {
            d,
            d_dot: (dp - dm) / (2.0 * h),
            d_z: dz,
            v_z: vz,
            z0,
            z_dot: ((vzp + z0 * dzp) - (vzm + z0 * dzm)) / (2.0 * h),
            r_perp0: 1.0f64.sin(),
            t,
        };
        let (_, full) = qfi_pc_analytic(&p).unwrap();
        let direct = qfi_map(&map, &r0).unwrap().value;
        assert!((full.value - direct).abs() < 1e-8, "{} vs {direct}", full.value);
    }

    #[test]
    fn classical_fi_examples() {
        let (w, t): (f64, f64) = (1.1, 0.8);
        let x = w * t;
        let p = [(1.0 + x.cos()) / 2.0, (1.0 - x.cos()) / 2.0];
        let pd = [-t * x.sin() / 2.0, t * x.sin() / 2.0];
        assert!((classical_fi(&p, &pd).unwrap() - t * t).abs() < 1e-12);
        assert_eq!(classical_fi(&[0.25; 4], &[0.0; 4]).unwrap(), 0.0);
        assert_eq!(classical_fi(&[1.0, 0.0], &[-0.1, 0.1]), Err(Error::InfiniteInformation { outcome: 1 }));
        assert!(classical_fi(&[0.5, 0.6], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn optimal_state_examples() {
        assert_eq!(optimal_short_time_state(0.0), (PI / 2.0, 0.0));
        let (_, phi) = optimal_short_time_state(PI / 2.0);
        assert!((phi - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn optimal_state_is_near_grid_maximum() {
        let (a, t) = (0.05, 1.0);
        for &th in &[0.0, 0.3, 0.8, 1.2, PI / 2.0] {
            let mut best = f64::NEG_INFINITY;
            for i in 0..=200 {
                for j in 0..=400 {
                    let theta = PI * i as f64 / 200.0;
                    let phi = 2.0 * PI * j as f64 / 400.0;
                    best = best.max(qfi_short_time(theta, phi, th, a, 1.0, t, false).value);
                }
            }
            let (theta, phi) = optimal_short_time_state(th);
            let f = qfi_short_time(theta, phi, th, a, 1.0, t, false).value;
            assert!(f >= 0.999 * best, "ϑ = {th}: {f} vs {best}");
        }
    }

    #[test]
    fn angles_round_trip() {
        let s = BlochState::pure(1.0, -2.0);
        let (th, ph) = s.angles();
        assert!((th - 1.0).abs() < 1e-14 && (ph + 2.0).abs() < 1e-14);
        assert!(s.is_pure());
    }
}
