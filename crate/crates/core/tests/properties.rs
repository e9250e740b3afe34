mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use proptest::prelude::*;

use common::{dense_parity, ohmic, ohmic_map, ohmic_maps};
use qprobe::bath::{driven_frame_forward, driven_frame_parameters, gamma_integral, BathModel, SpectralDensity};
use qprobe::channel::{choi_matrix, classify, kraus_from_choi, kraus_with_derivative, short_time_map, MapGeometry};
use qprobe::dynamics::ohmic::ohmic_pc_map;
use qprobe::nprobe::bound::GaugeObjective;
use qprobe::nprobe::{channel_qfi_bound, parity_expectation, parity_precision, BoundOptions};
use qprobe::pauli::{c, C64};
use qprobe::qfi::{qfi_map, qfi_pc_analytic, qfi_short_time, BlochState, PcQfiInputs};
use qprobe::tcl2::{generator_ptm, secular_truncate, GammaSet, GeneratorCoefficients};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig::with_cases(n)
}

fn complex() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| c(re, im))
}

fn gamma_set() -> impl Strategy<Value = GammaSet> {
    (complex(), complex(), complex()).prop_map(|(zero, plus, minus)| GammaSet { zero, plus, minus })
}

fn ohmic_bath(lambda: f64, omega_c: f64, beta: f64, high_t: bool) -> BathModel {
    BathModel::new(SpectralDensity::ohmic(lambda, omega_c).unwrap(), beta)
        .unwrap()
        .high_temperature(high_t)
}

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn high_temperature_gamma_is_conjugate_symmetric(sigma in 0.1..5.0f64, t in 0.05..10.0f64) {
        let bath = ohmic_bath(0.1, 10.0, 1.0, true);
        let plus = gamma_integral(&bath, sigma, t).unwrap().value;
        let minus = gamma_integral(&bath, -sigma, t).unwrap().value;
        prop_assert!((minus - plus.conj()).norm() <= 1e-8 * plus.norm().max(1e-3));
    }

    #[test]
    fn real_gamma_zero_is_nondecreasing_at_high_temperature(omega_c in 0.5..20.0f64, beta in 0.2..5.0f64) {
        let bath = ohmic_bath(0.1, omega_c, beta, true);
        let mut last = 0.0;
        for k in 1..=12 {
            let t = 0.05 * 1.5f64.powi(k);
            let g = gamma_integral(&bath, 0.0, t).unwrap().value.re;
            prop_assert!(g >= last - 1e-10 * g.abs().max(1.0), "t = {}: {} < {}", t, g, last);
            last = g;
        }
    }

    #[test]
    fn ohmic_gamma_matches_arctan(lambda in 0.01..1.0f64, omega_c in 1.0..30.0f64, u in 0.001..1.0f64) {
        let beta = 2.0;
        let t = u * 50.0 / omega_c;
        let bath = ohmic_bath(lambda, omega_c, beta, true).wide_cutoff(true);
        let g = gamma_integral(&bath, 0.0, t).unwrap().value.re;
        let closed = 2.0 * lambda / beta * (omega_c * t).atan();
        prop_assert!((g - closed).abs() <= 1e-6 * closed, "{} vs {}", g, closed);
    }
}

#[test]
fn real_gamma_zero_can_decrease_at_low_temperature() {
    // Zero-temperature Ohmic correlations turn negative for τ > 1/ω_c.
    let bath = ohmic_bath(0.1, 10.0, 50.0, false);
    let early = gamma_integral(&bath, 0.0, 0.1).unwrap().value.re;
    let late = gamma_integral(&bath, 0.0, 2.0).unwrap().value.re;
    assert!(late < early, "{late} vs {early}");
}

proptest! {
    #[test]
    fn driven_frame_round_trip(omega0 in 1e-3..1e3f64, theta in -3.1..3.1f64) {
        let (detuning, rabi) = driven_frame_forward(omega0, theta);
        let (w, th) = driven_frame_parameters(detuning, 0.0, rabi).unwrap();
        prop_assert!((w - omega0).abs() <= 1e-12 * omega0);
        prop_assert!((th - theta).abs() <= 1e-12 * theta.abs().max(1.0));
    }

    #[test]
    fn generators_preserve_trace(g in gamma_set(), omega0 in -5.0..5.0f64, theta in -PI..PI) {
        let coeffs = GeneratorCoefficients::from_gammas(&g, omega0, theta, 1.0);
        for l in [generator_ptm(&coeffs), generator_ptm(&secular_truncate(&coeffs))] {
            for j in 0..4 {
                prop_assert!(l.matrix[(0, j)].abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn secular_truncation_is_idempotent(g in gamma_set(), omega0 in -5.0..5.0f64, theta in -PI..PI) {
        let once = secular_truncate(&GeneratorCoefficients::from_gammas(&g, omega0, theta, 1.0));
        prop_assert_eq!(secular_truncate(&once), once);
    }

    #[test]
    fn high_temperature_relations_give_unital_generators(
        zero in complex(), plus in complex(), shift in 0.05..1.0f64, omega0 in -5.0..5.0f64, theta in -1.4..1.4f64,
    ) {
        let unital = GammaSet { zero: c(zero.re, 0.0), plus, minus: plus.conj() };
        let l = generator_ptm(&GeneratorCoefficients::from_gammas(&unital, omega0, theta, 1.0)).matrix;
        prop_assert!((1..4).all(|i| l[(i, 0)].abs() <= 1e-12));
        let skewed = GammaSet { minus: plus.conj() + c(shift, 0.0), ..unital };
        let l = generator_ptm(&GeneratorCoefficients::from_gammas(&skewed, omega0, theta, 1.0)).matrix;
        prop_assert!((1..4).any(|i| l[(i, 0)].abs() > 1e-6));
    }

    #[test]
    fn secular_short_time_maps_are_phase_covariant(
        omega0 in 0.1..5.0f64, alpha in 0.0..2.0f64, theta in -PI..PI, t in 0.0..0.3f64,
    ) {
        prop_assert!(classify(&short_time_map(omega0, alpha, theta, t, true), 1e-12).phase_covariant);
    }

    #[test]
    fn pc_qfi_is_rotation_invariant(
        lob in 0.01..0.5f64, theta in -FRAC_PI_2..FRAC_PI_2, t in 0.01..20.0f64,
        state_theta in 0.05..3.1f64, phi in -PI..PI, shift in -PI..PI,
    ) {
        let map = ohmic_pc_map(&ohmic(lob, 1.0, theta, true, false), t);
        let a = qfi_map(&map, &BlochState::pure(state_theta, phi)).unwrap().value;
        let b = qfi_map(&map, &BlochState::pure(state_theta, phi + shift)).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-12));
    }

    #[test]
    fn nonsecular_short_time_qfi_dominates_at_equator(
        phi in -PI..PI, theta in -1.5..1.5f64, alpha in 0.0..2.0f64, t in 0.0..0.3f64,
    ) {
        let npc = qfi_short_time(FRAC_PI_2, phi, theta, alpha, 1.0, t, false).value;
        let pc = qfi_short_time(FRAC_PI_2, phi, theta, alpha, 1.0, t, true).value;
        prop_assert!(npc >= pc - 1e-15);
    }

    #[test]
    fn pc_full_qfi_dominates_auxiliary(
        d in -1.0..1.0f64, d_dot in -3.0..3.0f64, d_z in -1.0..1.0f64, v_z in -1.0..1.0f64,
        z0 in -1.0..1.0f64, z_dot in -3.0..3.0f64, t in 0.0..10.0f64,
    ) {
        let r_perp0 = (1.0 - z0 * z0).sqrt();
        let z = v_z + z0 * d_z;
        prop_assume!((d * r_perp0).powi(2) + z * z < 1.0 - 1e-6);
        let p = PcQfiInputs { d, d_dot, d_z, v_z, z0, z_dot, r_perp0, t };
        let (aux, full) = qfi_pc_analytic(&p).unwrap();
        prop_assert!(full.value - aux.value >= -1e-12);
    }

    #[test]
    fn qfi_is_convex_in_the_input(
        omega0 in 0.5..3.0f64, theta in -PI..PI, t in 0.05..0.3f64,
        a in (0.0..PI, -PI..PI), b in (0.0..PI, -PI..PI), p in 0.0..1.0f64,
    ) {
        let map = short_time_map(omega0, 1.0, theta, t, false);
        let (s1, s2) = (BlochState::pure(a.0, a.1), BlochState::pure(b.0, b.1));
        let mixed = BlochState::new(s1.r * p + s2.r * (1.0 - p)).unwrap();
        let f = |s: &BlochState| qfi_map(&map, s).unwrap().value;
        prop_assert!(f(&mixed) <= p * f(&s1) + (1.0 - p) * f(&s2) + 1e-12);
    }
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn pc_maps_have_bounded_scalings_and_round_trip_through_kraus(
        lob in 0.01..0.5f64, theta in -FRAC_PI_2..FRAC_PI_2, t in 0.01..30.0f64, semigroup: bool,
    ) {
        let map = ohmic_pc_map(&ohmic(lob, 1.0, theta, true, semigroup), t);
        let geom = MapGeometry::of(&map);
        prop_assert!(geom.scalings.iter().all(|d| d.abs() <= 1.0 + 1e-8));
        let kraus = kraus_from_choi(&choi_matrix(&map), 1e-10).unwrap();
        prop_assert!((kraus.transfer_matrix() - map.matrix).amax() <= 1e-8);
    }

    #[test]
    fn bound_respects_its_ordering_properties(
        lob in 0.01..0.3f64, theta in -FRAC_PI_2..FRAC_PI_2, t in 0.02..5.0f64, n in 1u64..5000, semigroup: bool,
    ) {
        let map = ohmic_pc_map(&ohmic(lob, 1.0, theta, true, semigroup), t);
        let kraus = kraus_with_derivative(&map, 1e-12).unwrap();
        let opts = BoundOptions::default();
        let res = channel_qfi_bound(&kraus, n, t, &opts).unwrap();
        let at_zero = GaugeObjective::new(&kraus, n).value(&nalgebra::DMatrix::zeros(kraus.rank(), kraus.rank()));
        prop_assert!(res.f_up >= 0.0 && res.f_up <= at_zero);
        let lower = t / res.f_up;
        let upper = parity_precision(&map, n, t).unwrap();
        prop_assert!(upper >= lower * (1.0 - 1e-6), "parity {} below bound {}", upper, lower);
        let twice = channel_qfi_bound(&kraus, 2 * n, t, &opts).unwrap();
        prop_assert!(twice.f_up / (2 * n) as f64 >= res.f_up / n as f64 * (1.0 - 1e-6));
    }
}

proptest! {
    #![proptest_config(cases(8))]

    #[test]
    fn npc_trajectories_stay_physical(lob in 0.01..0.3f64, theta in -FRAC_PI_2..FRAC_PI_2, omega0 in 0.2..3.0f64) {
        let grid: Vec<f64> = (1..=10).map(|k| 0.5 * k as f64).collect();
        for map in ohmic_maps(ohmic(lob, omega0, theta, false, false), &grid) {
            let cls = classify(&map, 1e-8);
            prop_assert!(cls.min_choi_eigenvalue >= -1e-6);
            prop_assert!(map.translation().norm() <= 1e-8);
            prop_assert!((map.matrix[(0, 0)] - 1.0).abs() <= 1e-10);
            prop_assert!((1..4).all(|j| map.matrix[(0, j)].abs() <= 1e-10));
            prop_assert!(cls.geometry.scalings.iter().all(|d| d.abs() <= 1.0 + 1e-8));
        }
    }

    #[test]
    fn parity_matches_dense_simulation(lob in 0.01..0.3f64, theta in -FRAC_PI_2..FRAC_PI_2, t in 0.05..5.0f64) {
        let map = ohmic_map(ohmic(lob, 1.0, theta, false, false), t);
        for n in 1..=3usize {
            let exact = dense_parity(&map, n);
            prop_assert!((parity_expectation(&map, n as u64) - exact).abs() <= 1e-10);
        }
    }

    #[test]
    fn single_probe_bound_dominates_qfi(
        lob in 0.01..0.3f64, theta in -FRAC_PI_2..FRAC_PI_2, t in 0.05..5.0f64, st in 0.0..PI, phi in -PI..PI,
    ) {
        let map = ohmic_map(ohmic(lob, 1.0, theta, false, false), t);
        let kraus = kraus_with_derivative(&map, 1e-12).unwrap();
        let f_up = channel_qfi_bound(&kraus, 1, t, &BoundOptions::default()).unwrap().f_up;
        let fq = qfi_map(&map, &BlochState::pure(st, phi)).unwrap().value;
        prop_assert!(f_up >= fq * (1.0 - 1e-6), "F↑ = {} < F_Q = {}", f_up, fq);
    }
}

#[test]
fn npc_trajectories_approach_pc_as_frequency_grows() {
    let grid: Vec<f64> = (1..=60).map(|k| 0.25 * k as f64).collect();
    let gap = |omega0: f64| {
        let npc = ohmic_maps(ohmic(0.1, omega0, 0.3, false, false), &grid);
        let pc = ohmic_maps(ohmic(0.1, omega0, 0.3, true, false), &grid);
        npc.iter().zip(&pc).map(|(a, b)| (a.matrix - b.matrix).norm()).fold(0.0, f64::max)
    };
    let gaps: Vec<f64> = [1.0, 2.0, 5.0, 10.0].into_iter().map(gap).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn mixed_state_has_lower_qfi_than_its_pure_parts() {
    let map = ohmic_map(ohmic(0.1, 1.0, 0.4, false, false), 1.3);
    let pure = BlochState::pure(1.2, 0.3);
    let mixed = BlochState::new(pure.r * 0.6).unwrap();
    let f = |s: &BlochState| qfi_map(&map, s).unwrap().value;
    assert!(f(&mixed) < f(&pure));
    assert_eq!(BlochState::new(Vector3::zeros()).map(|s| f(&s)).unwrap(), 0.0);
}
