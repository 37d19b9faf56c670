mod common;

use common::*;
use correlator_core::dense::{string_matrix, sum_matrix};
use correlator_core::evolution::ExactEigensystem;
use correlator_core::models::*;
use correlator_core::pauli::{Pauli, PauliString, PauliSum};
use correlator_core::Complex64;
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

const GOLDEN_L4: &str = include_str!("data/schwinger_l4.txt");

fn coeff(h: &PauliSum, letters: &str) -> f64 {
    let c = h.coefficient_of(letters);
    assert!(c.im.abs() < 1e-15);
    c.re
}

#[test]
fn schwinger_l4_matches_golden_terms() {
    let h = build_schwinger_truncated(&SchwingerParams { l: 4, m: 0.5, g: 0.3 }).unwrap();
    let golden = PauliSum::parse_text(8, GOLDEN_L4).unwrap();
    assert_eq!(h.len(), golden.len());
    let diff = h.sub(&golden).unwrap();
    assert!(diff.terms().iter().all(|(c, _)| c.norm() < 1e-12), "{}", diff.to_text());
}

#[test]
fn schwinger_l2_mass_and_hopping() {
    let h = build_schwinger_truncated(&SchwingerParams { l: 2, m: 0.5, g: 0.0 }).unwrap();
    for (j, want) in [0.25, -0.25, 0.25, -0.25].iter().enumerate() {
        let mut letters = vec!['I'; 4];
        letters[j] = 'Z';
        assert!((coeff(&h, &letters.iter().collect::<String>()) - want).abs() < 1e-15);
    }
    assert!((coeff(&h, "XXII") - 0.25).abs() < 1e-15);
    assert!((coeff(&h, "YYII") - 0.25).abs() < 1e-15);
}

#[test]
fn odd_schwinger_lattice_rejected() {
    assert!(build_schwinger_truncated(&SchwingerParams { l: 3, m: 0.5, g: 0.3 }).is_err());
}

/// Qubit reversal followed by X on every qubit, as a permutation matrix.
fn reflection(n: usize) -> DMatrix<Complex64> {
    let dim = 1 << n;
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let mut j = 0;
        for q in 0..n {
            let bit = (i >> (n - 1 - q)) & 1;
            j |= (1 - bit) << q;
        }
        m[(j, i)] = Complex64::new(1.0, 0.0);
    }
    m
}

#[test]
fn schwinger_is_reflection_symmetric() {
    for l in [2, 4] {
        let h = sum_matrix(&build_schwinger_truncated(&SchwingerParams { l, m: 0.5, g: 0.3 }).unwrap());
        let r = reflection(2 * l);
        let c = &r * &h - &h * &r;
        assert!(max_abs(&c) < 1e-12, "L={l}");
    }
}

/// Image of a string under the reflection: reversed letters, sign -1 per Y or Z.
fn reflected(s: &PauliString) -> (f64, PauliString) {
    let mut letters = s.letters().to_vec();
    letters.reverse();
    let flips = letters.iter().filter(|&&p| p == Pauli::Y || p == Pauli::Z).count();
    let sign = if flips % 2 == 0 { 1.0 } else { -1.0 };
    (sign, PauliString::new(letters, s.phase()).unwrap())
}

#[test]
fn schwinger_reflection_image_on_twelve_qubits() {
    let h = build_schwinger_truncated(&SchwingerParams { l: 6, m: 0.5, g: 0.3 }).unwrap();
    let image = PauliSum::from_terms(
        12,
        h.terms().iter().map(|(c, s)| {
            let (sign, r) = reflected(s);
            (c * sign, r)
        }),
    )
    .unwrap();
    assert!(h.sub(&image).unwrap().is_empty());
}

#[test]
fn built_hamiltonians_are_hermitian() {
    assert!(build_schwinger_truncated(&SchwingerParams::default()).unwrap().is_hermitian());
    assert!(build_ssh(&SshParams::default()).unwrap().is_hermitian());
    assert!(build_tim(5).unwrap().is_hermitian());
}

#[test]
fn tim_term_structure() {
    for l in 2..=9 {
        let h = build_tim(l).unwrap();
        assert_eq!(h.len(), 2 * l - 1);
        assert!(h.terms().iter().all(|(c, _)| (c.re + 1.0).abs() < 1e-15 && c.im == 0.0));
    }
    assert!((build_tim(4).unwrap().spectral_norm_bound() - 7.0).abs() < 1e-15);
    assert!(build_tim(1).is_err());
}

#[test]
fn ssh_term_structure() {
    let p = SshParams { l: 2, v: 1.0, delta: 0.8, mu: -2.5 };
    let h = build_ssh(&p).unwrap();
    assert!((coeff(&h, "XX") + 0.7).abs() < 1e-15);
    let big = build_ssh(&SshParams { l: 7, ..p }).unwrap();
    assert_eq!(big.len(), 2 * 6 + 7);
}

/// Free-fermion ground energy: `h_jj = -mu`, `h_{j,j+1} = -t_j`, plus the constant `mu L / 2`.
fn free_fermion_ground(p: &SshParams) -> f64 {
    let l = p.l;
    let mut h = DMatrix::<f64>::zeros(l, l);
    for j in 0..l {
        h[(j, j)] = -p.mu;
    }
    for j in 0..l - 1 {
        let t = p.v + if j % 2 == 0 { 0.5 * p.delta } else { -0.5 * p.delta };
        h[(j, j + 1)] = -t;
        h[(j + 1, j)] = -t;
    }
    let eps = SymmetricEigen::new(h).eigenvalues;
    0.5 * p.mu * l as f64 + eps.iter().filter(|&&e| e < 0.0).sum::<f64>()
}

#[test]
fn ssh_ground_energy_is_free_fermion() {
    for p in [
        SshParams { l: 12, v: 1.0, delta: 0.8, mu: -2.5 },
        SshParams { l: 8, v: 1.0, delta: 0.3, mu: 0.4 },
    ] {
        let eig = ExactEigensystem::new(&build_ssh(&p).unwrap()).unwrap();
        let (e0, _) = eig.ground_state();
        let want = free_fermion_ground(&p);
        assert!((e0 - want).abs() < 1e-9, "{e0} vs {want}");
    }
}

#[test]
fn ssh_single_particle_gap_opens_with_stagger() {
    // one-particle sector gap around the band centre, from the many-body spectrum
    let gap = |delta: f64| {
        let p = SshParams { l: 12, v: 1.0, delta, mu: 0.0 };
        let mut h = DMatrix::<f64>::zeros(p.l, p.l);
        for j in 0..p.l - 1 {
            let t = p.v + if j % 2 == 0 { 0.5 * delta } else { -0.5 * delta };
            h[(j, j + 1)] = -t;
            h[(j + 1, j)] = -t;
        }
        let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e[p.l / 2] - e[p.l / 2 - 1]
    };
    assert!(gap(0.0) < 2.0 * PI / 12.0 * 2.0);
    assert!(gap(0.8) > 1.5);
}

#[test]
fn hadron_operator_is_anti_hermitian() {
    let h = hadron_operator(1, 0).unwrap();
    assert!((h.coefficient_of("XX") - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    assert!((h.coefficient_of("YY") - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    let m = sum_matrix(&h);
    assert!(max_abs(&(&m + m.adjoint())) < 1e-15);
    assert!(hadron_operator(2, 2).is_err());
}

#[test]
fn momentum_weights() {
    let zero = momentum_hadron_correlator_spec(LatticeMomentum::new(0, 6).unwrap(), 3, 6).unwrap();
    assert!(zero.iter().all(|(_, w)| (w - 1.0).norm() < 1e-15));
    let k1 = momentum_hadron_correlator_spec(LatticeMomentum::new(1, 6).unwrap(), 3, 6).unwrap();
    assert_eq!(k1[0].0, 0);
    assert!((k1[0].1 + 1.0).norm() < 1e-15);
    assert_eq!(central_site(6), 3);
    assert_eq!(central_site(5), 3);
    assert!(LatticeMomentum::new(4, 6).is_err());
}

#[test]
fn product_states() {
    let plus = plus_state(4).unwrap();
    for j in 0..4 {
        let x = PauliString::single(4, j, Pauli::X).unwrap();
        assert!((plus.string_expectation(&x).unwrap().re - 1.0).abs() < 1e-14);
    }
    let zero = zero_state(3).unwrap();
    assert!((zero.amplitudes()[0] - 1.0).norm() < 1e-15);
    let m = sum_matrix(&mass_term(3, 0.5).unwrap());
    let v = column(&bare_vacuum(3).unwrap());
    assert!((v.dotc(&(m * &v)).re + 1.5).abs() < 1e-14);
    let _ = string_matrix;
}

#[test]
fn vacuum_overlap_l6() {
    let h = build_schwinger_truncated(&SchwingerParams { l: 6, m: 0.5, g: 0.3 }).unwrap();
    let (_, ground) = ExactEigensystem::new(&h).unwrap().ground_state();
    let overlap = ground.inner(&bare_vacuum(6).unwrap()).unwrap().norm();
    assert!((overlap - 0.577).abs() < 5e-4, "overlap {overlap}");
}
