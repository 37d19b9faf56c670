mod common;

use common::*;
use correlator_core::dense::string_matrix;
use correlator_core::pauli::{Pauli, PauliString, PauliSum};
use correlator_core::qite::*;
use correlator_core::state::StateVector;
use correlator_core::{Complex64, Error};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

fn zz() -> PauliString {
    PauliString::from_sites(3, &[(0, Pauli::Z), (1, Pauli::Z)]).unwrap()
}

fn unitary_infidelity(state: &StateVector, tau: f64, steps: usize) -> f64 {
    let want = nonunitary_oracle(state, &PauliSum::from_string(&zz()), tau).unwrap();
    let cfg = QiteConfig { total_tau: tau, steps, domain_radius: 1, regularization: DEFAULT_REGULARIZATION };
    let (got, _) = qite_unitary(state, &zz(), &cfg).unwrap();
    assert!((got.norm_sqr() - 1.0).abs() < 1e-10);
    1.0 - fidelity(&got, &want)
}

#[test]
fn unitary_qite_on_product_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let s = random_product(&mut rng, 3);
        let coarse = unitary_infidelity(&s, default_tau_plus(), 50);
        assert!(coarse <= 1e-3, "infidelity {coarse}");
        let fine = unitary_infidelity(&s, default_tau_plus(), 100);
        assert!(fine * 2.0 <= coarse + 1e-13, "{coarse} -> {fine}");
    }
}

#[test]
fn unitary_qite_to_unit_tau() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let s = random_product(&mut rng, 3);
    assert!(unitary_infidelity(&s, 1.0, 50) <= 1e-3);
}

#[test]
fn unitary_step_on_x_is_a_y_rotation() {
    let x = PauliString::single(1, 0, Pauli::X).unwrap();
    let cfg = QiteConfig { total_tau: 0.05, steps: 1, domain_radius: 0, regularization: DEFAULT_REGULARIZATION };
    let step = qite_step_unitary(&StateVector::zero(1).unwrap(), &x, 0.05, &cfg).unwrap();
    let (dominant, a) = step
        .coefficients
        .iter()
        .max_by(|p, q| p.1.abs().total_cmp(&q.1.abs()))
        .unwrap();
    assert_eq!(dominant.letter_string(), "Y");
    // exp(-i dtau a Y) = R_Y(2 a dtau); one linearized step is good to O(dtau^2)
    let theta = analytic_angle(AnalyticAxis::XOnZero, 0.05);
    assert!((2.0 * a * 0.05 - theta).abs() < 0.05f64.powi(2) * theta.abs());
}

#[test]
fn zero_step_is_identity() {
    let s = StateVector::plus(2).unwrap();
    let p = PauliString::single(2, 1, Pauli::Z).unwrap();
    let step = qite_step_unitary(&s, &p, 0.0, &QiteConfig::new(0.0, 1)).unwrap();
    assert!(step.coefficients.iter().all(|(_, a)| *a == 0.0));
    assert_eq!(step.state, s);
}

#[test]
fn analytic_x_on_zero_matches_oracle() {
    for tau in [-1.3, -0.2, 0.0, 0.1, default_tau_plus(), 2.5] {
        let s = StateVector::zero(3).unwrap();
        let x = PauliString::single(3, 1, Pauli::X).unwrap();
        let got = analytic_single_qubit_qite(&s, AnalyticAxis::XOnZero, 1, tau).unwrap();
        let want = nonunitary_oracle(&s, &PauliSum::from_string(&x), tau).unwrap();
        assert!(1.0 - fidelity(&got, &want) < 1e-12, "tau {tau}");
        assert!(vec_distance(got.amplitudes(), want.amplitudes()) < 1e-12);
    }
}

#[test]
fn analytic_z_on_plus_matches_oracle() {
    for tau in [-0.7, 0.0, 0.1, default_tau_plus(), 1.9] {
        let s = StateVector::plus(2).unwrap();
        let z = PauliString::single(2, 0, Pauli::Z).unwrap();
        let got = analytic_single_qubit_qite(&s, AnalyticAxis::ZOnPlus, 0, tau).unwrap();
        let want = nonunitary_oracle(&s, &PauliSum::from_string(&z), tau).unwrap();
        assert!(vec_distance(got.amplitudes(), want.amplitudes()) < 1e-12, "tau {tau}");
    }
}

#[test]
fn analytic_angles() {
    assert_eq!(analytic_angle(AnalyticAxis::XOnZero, 0.0), 0.0);
    assert!(analytic_angle(AnalyticAxis::ZOnPlus, 0.0).abs() < 1e-15);
    assert!((analytic_angle(AnalyticAxis::ZOnPlus, 20.0) - FRAC_PI_2).abs() < 1e-12);
    let s = analytic_single_qubit_qite(&StateVector::plus(1).unwrap(), AnalyticAxis::ZOnPlus, 0, 20.0).unwrap();
    assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
}

#[test]
fn analytic_rejects_wrong_input() {
    let s = StateVector::plus(1).unwrap();
    assert!(matches!(
        analytic_single_qubit_qite(&s, AnalyticAxis::XOnZero, 0, 0.3),
        Err(Error::State(_))
    ));
}

#[test]
fn oracle_examples() {
    let z = PauliSum::parse_text(1, "1 * Z").unwrap();
    let x = PauliSum::parse_text(1, "1 * X").unwrap();
    let zero = StateVector::zero(1).unwrap();
    assert_eq!(nonunitary_oracle(&zero, &x, 0.0).unwrap().amplitudes(), zero.amplitudes());
    assert!(vec_distance(nonunitary_oracle(&zero, &z, 3.0).unwrap().amplitudes(), zero.amplitudes()) < 1e-14);
    let s = nonunitary_oracle(&zero, &x, default_tau_plus()).unwrap();
    assert!((s.expectation(&x).unwrap() + 0.5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn projective_examples() {
    let z = PauliString::single(1, 0, Pauli::Z).unwrap();
    let (s, p) = qite_projective(&StateVector::plus(1).unwrap(), &z, 1).unwrap();
    assert!((p - 0.5).abs() < 1e-14);
    assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-14);
    assert!(matches!(qite_projective(&StateVector::zero(1).unwrap(), &z, -1), Err(Error::Projection)));
}

proptest! {
    #[test]
    fn projective_is_saturated_oracle((s, p) in state(3).prop_flat_map(|s| (Just(s), hermitian_string(3))), plus in any::<bool>()) {
        prop_assume!(!p.is_identity());
        let sign: i8 = if plus { 1 } else { -1 };
        let (got, prob) = match qite_projective(&s, &p, sign) {
            Ok(v) => v,
            Err(_) => return Ok(()),
        };
        prop_assume!(prob > 1e-6);
        let tau = -50.0 * sign as f64;
        let want = nonunitary_oracle(&s, &PauliSum::from_string(&p), tau).unwrap();
        prop_assert!(vec_distance(got.amplitudes(), want.amplitudes()) < 1e-10);
        // projector algebra against the dense (I + s P)/2
        let m = string_matrix(&p);
        let id = correlator_core::dense::CMatrix::identity(8, 8);
        let proj = (id + m * Complex64::new(sign as f64, 0.0)) * Complex64::new(0.5, 0.0);
        let v = proj * column(&s);
        let dense_prob = v.norm_squared() / s.norm_sqr();
        prop_assert!((prob - dense_prob).abs() < 1e-12);
    }

    #[test]
    fn oracle_variant_matches_nonunitary_oracle((s, p) in (1usize..=4).prop_flat_map(|n| (state(n), hermitian_string(n))), tau in -2.0f64..2.0) {
        let mut got = s.clone();
        QiteVariant::Oracle.apply(&mut got, &p, tau).unwrap();
        let want = nonunitary_oracle(&s, &PauliSum::from_string(&p), tau).unwrap();
        prop_assert!(vec_distance(got.amplitudes(), want.amplitudes()) < 1e-10);
    }
}
