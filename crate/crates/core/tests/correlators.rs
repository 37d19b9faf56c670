mod common;

use common::*;
use correlator_core::correlators::*;
use correlator_core::dense::{string_matrix, sum_matrix, CMatrix};
use correlator_core::evolution::{EvolutionBackend, Evolver, TrotterOrder};
use correlator_core::models::*;
use correlator_core::oracle::{exact_correlator_oracle, DenseOracle, DEFAULT_ORACLE_CAP};
use correlator_core::pauli::{Pauli, PauliString, PauliSum};
use correlator_core::qite::{default_tau_minus, default_tau_plus, QiteVariant};
use correlator_core::state::StateVector;
use correlator_core::Complex64;
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_4;

#[derive(Debug, Clone)]
struct Instance {
    h: PauliSum,
    ops: Vec<PauliString>,
    obs: PauliSum,
    times: Vec<f64>,
    signs: Vec<Sign>,
    state: StateVector,
}

fn sign() -> impl Strategy<Value = Sign> {
    any::<bool>().prop_map(|b| if b { Sign::Plus } else { Sign::Minus })
}

fn instance(max_qubits: usize, product: bool) -> impl Strategy<Value = Instance> {
    (1usize..=max_qubits, 2usize..=3).prop_flat_map(move |(n, len)| {
        let st = if product { product_state(n).boxed() } else { state(n).boxed() };
        (
            hermitian_sum(n, 5),
            prop::collection::vec(hermitian_string(n), len - 1),
            hermitian_sum(n, 3),
            prop::collection::vec(-1.0f64..2.0, len),
            prop::collection::vec(sign(), len - 1),
            st,
        )
            .prop_map(|(h, ops, obs, times, signs, state)| Instance { h, ops, obs, times, signs, state })
    })
}

fn product_state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((0.0f64..3.2, 0.0f64..6.3), n).prop_map(|angles| {
        let qubits: Vec<[Complex64; 2]> = angles
            .iter()
            .map(|&(th, ph)| [Complex64::new((th / 2.0).cos(), 0.0), Complex64::from_polar((th / 2.0).sin(), ph)])
            .collect();
        StateVector::product(&qubits).unwrap()
    })
}

impl Instance {
    fn spec<'a>(&self, evolver: &'a Evolver, shifts: ShiftTimes) -> BracketSpec<'a> {
        BracketSpec {
            operators: self.ops.iter().cloned().map(SlotOperator::Pauli).collect(),
            observables: vec![FinalObservable::Sum(self.obs.clone())],
            times: self.times.clone(),
            signs: self.signs.clone(),
            initial_state: self.state.clone(),
            evolver,
            shifts,
            qite: QiteVariant::Oracle,
        }
    }

    fn dense(&self) -> Complex64 {
        let oracle = DenseOracle::new(&self.h, DEFAULT_ORACLE_CAP).unwrap();
        let mut mats: Vec<CMatrix> = self.ops.iter().map(string_matrix).collect();
        mats.push(sum_matrix(&self.obs));
        let mut s = self.state.clone();
        s.normalize();
        oracle.nested_bracket(&mats, &self.times, &self.signs, &s).unwrap()
    }
}

const SHIFT_SET: [(f64, f64); 3] = [(0.0, FRAC_PI_4), (0.2, 0.3), (0.6, 0.7)];

fn shifts(i: usize) -> ShiftTimes {
    let (p, m) = SHIFT_SET[i];
    ShiftTimes { tau_plus: if p == 0.0 { default_tau_plus() } else { p }, tau_minus: m }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_matches_dense_oracle(inst in instance(4, true)) {
        let ev = Evolver::new(EvolutionBackend::exact(inst.h.clone())).unwrap();
        let got = nested_bracket(&inst.spec(&ev, ShiftTimes::default()), &mut ExactEstimator).unwrap();
        let want = inst.dense();
        prop_assert!((got - want).norm() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn bracket_matches_dense_oracle_entangled(inst in instance(3, false)) {
        let ev = Evolver::new(EvolutionBackend::exact(inst.h.clone())).unwrap();
        let got = nested_bracket(&inst.spec(&ev, ShiftTimes::default()), &mut ExactEstimator).unwrap();
        prop_assert!((got - inst.dense()).norm() < 1e-8);
    }

    #[test]
    fn bracket_is_shift_independent(inst in instance(4, true)) {
        let ev = Evolver::new(EvolutionBackend::exact(inst.h.clone())).unwrap();
        let vals: Vec<Complex64> = (0..3)
            .map(|i| nested_bracket(&inst.spec(&ev, shifts(i)), &mut ExactEstimator).unwrap())
            .collect();
        for a in &vals {
            for b in &vals {
                prop_assert!((a - b).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn hermitian_brackets_have_definite_phase(inst in instance(3, true)) {
        let ev = Evolver::new(EvolutionBackend::exact(inst.h.clone())).unwrap();
        let c = nested_bracket(&inst.spec(&ev, ShiftTimes::default()), &mut ExactEstimator).unwrap();
        // each commutator contributes a factor i
        let minus = inst.signs.iter().filter(|&&s| s == Sign::Minus).count();
        let off = if minus % 2 == 0 { c.im } else { c.re };
        prop_assert!(off.abs() < 1e-10);
    }

    #[test]
    fn two_time_correction_closed_form(inst in instance(3, true), tau in -1.0f64..1.0) {
        let ev = Evolver::new(EvolutionBackend::exact(inst.h.clone())).unwrap();
        let mut spec = inst.spec(&ev, ShiftTimes::default());
        spec.operators.truncate(1);
        spec.times.truncate(2);
        spec.signs = vec![Sign::Plus];
        let got = correction_factor(&spec, 0, &[tau], &mut ExactEstimator).unwrap();
        let mut s = inst.state.clone();
        s.normalize();
        let e0 = s.expectation(&PauliSum::from_string(&inst.ops[0])).unwrap();
        prop_assert!((got - ((2.0 * tau).cosh() - (2.0 * tau).sinh() * e0)).abs() < 1e-10);
    }

    #[test]
    fn three_time_correction_closed_form(
        (h, o0, o1, s) in (1usize..=2).prop_flat_map(|n| (hermitian_sum(n, 4), hermitian_string(n), hermitian_string(n), state(n))),
        t in prop::collection::vec(-1.0f64..2.0, 3),
        tau0 in -1.0f64..1.0,
        tau1 in -1.0f64..1.0,
    ) {
        let n = h.n_qubits();
        let ev = Evolver::new(EvolutionBackend::exact(h.clone())).unwrap();
        let mut s = s;
        s.normalize();
        let spec = BracketSpec {
            operators: vec![SlotOperator::Pauli(o0.clone()), SlotOperator::Pauli(o1.clone())],
            observables: vec![FinalObservable::Sum(PauliSum::from_string(&PauliString::single(n, 0, Pauli::Z).unwrap()))],
            times: t.clone(),
            signs: vec![Sign::Plus, Sign::Plus],
            initial_state: s.clone(),
            evolver: &ev,
            shifts: ShiftTimes::default(),
            qite: QiteVariant::Oracle,
        };
        let got = correction_factor(&spec, 1, &[tau0, tau1], &mut ExactEstimator).unwrap();

        let oracle = DenseOracle::new(&h, DEFAULT_ORACLE_CAP).unwrap();
        let a = oracle.heisenberg(&string_matrix(&o0), 0.0);
        let b = oracle.heisenberg(&string_matrix(&o1), t[1] - t[0]);
        let v = column(&s);
        let ev_of = |m: &CMatrix| v.dotc(&(m * &v)).re;
        let (c0, s0) = (tau0.cosh(), tau0.sinh());
        let want = (2.0 * tau1).cosh() * ((2.0 * tau0).cosh() - (2.0 * tau0).sinh() * ev_of(&a))
            - (2.0 * tau1).sinh()
                * (c0 * c0 * ev_of(&b) - c0 * s0 * ev_of(&(&b * &a + &a * &b)) + s0 * s0 * ev_of(&(&a * &b * &a)));
        prop_assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn correlation_is_half_sum_of_brackets(
        (h, o0, o1, s) in (1usize..=3).prop_flat_map(|n| (hermitian_sum(n, 4), sum(n, 3), sum(n, 3), state(n))),
        t1 in -1.0f64..2.0,
    ) {
        let ev = Evolver::new(EvolutionBackend::exact(h.clone())).unwrap();
        let mut s = s;
        s.normalize();
        let got = n_time_correlation(&[o0.clone(), o1.clone()], &[0.0, t1], &s, &BracketSettings::new(&ev), &mut ExactEstimator).unwrap();
        let want = exact_correlator_oracle(&[o0, o1], &[0.0, t1], &s, &h).unwrap();
        prop_assert!((got - want).norm() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn three_time_correlation_matches_oracle(
        (h, ops, s) in (1usize..=2).prop_flat_map(|n| (hermitian_sum(n, 3), prop::collection::vec(sum(n, 2), 3), state(n))),
        t in prop::collection::vec(-1.0f64..1.5, 3),
    ) {
        let ev = Evolver::new(EvolutionBackend::exact(h.clone())).unwrap();
        let mut s = s;
        s.normalize();
        let got = n_time_correlation(&ops, &t, &s, &BracketSettings::new(&ev), &mut ExactEstimator).unwrap();
        let want = exact_correlator_oracle(&ops, &t, &s, &h).unwrap();
        prop_assert!((got - want).norm() < 1e-8, "{got} vs {want}");
    }
}

#[test]
fn zero_shifts_give_plain_expectation() {
    let h = build_tim(3).unwrap();
    let ev = Evolver::new(EvolutionBackend::exact(h)).unwrap();
    let z = PauliSum::from_string(&PauliString::single(3, 2, Pauli::Z).unwrap());
    let spec = BracketSpec {
        operators: vec![SlotOperator::Pauli(PauliString::single(3, 0, Pauli::X).unwrap())],
        observables: vec![FinalObservable::Sum(z.clone())],
        times: vec![0.0, 0.8],
        signs: vec![Sign::Plus],
        initial_state: StateVector::zero(3).unwrap(),
        evolver: &ev,
        shifts: ShiftTimes::default(),
        qite: QiteVariant::Oracle,
    };
    let got = circuit_expectation(&spec, &[0.0], &mut ExactEstimator).unwrap()[0];
    let want = ev.evolved(&StateVector::zero(3).unwrap(), 0.0, 0.8).unwrap().expectation(&z).unwrap();
    assert!((got - want).abs() < 1e-12);
    assert!((correction_factor(&spec, 0, &[0.0], &mut ExactEstimator).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn trivial_brackets() {
    let z = PauliString::single(1, 0, Pauli::Z).unwrap();
    let x = PauliString::single(1, 0, Pauli::X).unwrap();
    let ev = Evolver::new(EvolutionBackend::exact(PauliSum::from_string(&x))).unwrap();
    let mk = |sign, state: StateVector| BracketSpec {
        operators: vec![SlotOperator::Pauli(z.clone())],
        observables: vec![FinalObservable::Sum(PauliSum::from_string(&z))],
        times: vec![0.3, 0.3],
        signs: vec![sign],
        initial_state: state,
        evolver: &ev,
        shifts: ShiftTimes::default(),
        qite: QiteVariant::Oracle,
    };
    let plus = StateVector::plus(1).unwrap();
    assert!(nested_bracket(&mk(Sign::Minus, plus.clone()), &mut ExactEstimator).unwrap().norm() < 1e-10);
    assert!((nested_bracket(&mk(Sign::Plus, plus), &mut ExactEstimator).unwrap() - 2.0).norm() < 1e-10);
    // rotation about Z keeps Z on |0>
    let spec = mk(Sign::Minus, StateVector::zero(1).unwrap());
    let v = circuit_expectation(&spec, &[default_tau_minus()], &mut ExactEstimator).unwrap()[0];
    assert!((v - 1.0).abs() < 1e-12);
}

#[test]
fn schwinger_hadron_commutator_matches_oracle() {
    let h = build_schwinger_truncated(&SchwingerParams { l: 2, m: 0.5, g: 0.3 }).unwrap();
    let ev = Evolver::new(EvolutionBackend::exact(h.clone())).unwrap();
    let vac = bare_vacuum(2).unwrap();
    let h1 = hadron_operator(2, 1).unwrap();
    let settings = BracketSettings::new(&ev);
    let ab = n_time_correlation(&[h1.clone(), h1.clone()], &[0.0, 1.0], &vac, &settings, &mut ExactEstimator).unwrap();
    let want = exact_correlator_oracle(&[h1.clone(), h1.clone()], &[0.0, 1.0], &vac, &h).unwrap();
    assert!((ab - want).norm() < 1e-8);
    // [h(1), h(0)] = h(1) h(0) - h(0) h(1), the second order at times (1, 0) relative to 0
    let oracle = DenseOracle::new(&h, DEFAULT_ORACLE_CAP).unwrap();
    let m = sum_matrix(&h1);
    let ht = oracle.heisenberg(&m, 1.0);
    let v = column(&vac);
    let comm = v.dotc(&((&ht * &m - &m * &ht) * &v));
    // per-term bracket expansion: -i h = K with K Hermitian, so [h(t), h] = -[K(t), K]
    let k = hadron_generator(2, 1).unwrap();
    let mut total = Complex64::new(0.0, 0.0);
    for (ca, a) in k.terms() {
        for (cb, b) in k.terms() {
            let spec = BracketSpec {
                operators: vec![SlotOperator::Pauli(a.clone())],
                observables: vec![FinalObservable::Sum(PauliSum::from_string(b))],
                times: vec![0.0, 1.0],
                signs: vec![Sign::Minus],
                initial_state: vac.clone(),
                evolver: &ev,
                shifts: ShiftTimes::default(),
                qite: QiteVariant::Oracle,
            };
            total += ca * cb * nested_bracket(&spec, &mut ExactEstimator).unwrap();
        }
    }
    assert!((-total - comm).norm() < 1e-8, "{total} vs {comm}");
}

/// `Re(i <[O_k(t), K_j0]>)` through the shifted circuits, as the spectrum pipeline does.
fn schwinger_signal(ev: &Evolver, l: usize, k: f64, t: f64) -> f64 {
    let j0 = central_site(l);
    let n = 2 * l;
    let o = correlator_core::experiments::schwinger_momentum_observable(l, k, j0).unwrap();
    let mut acc = Complex64::new(0.0, 0.0);
    for p in [Pauli::X, Pauli::Y] {
        let spec = BracketSpec {
            operators: vec![SlotOperator::Pauli(PauliString::from_sites(n, &[(2 * j0, p), (2 * j0 + 1, p)]).unwrap())],
            observables: vec![FinalObservable::Sum(o.clone())],
            times: vec![0.0, t],
            signs: vec![Sign::Minus],
            initial_state: bare_vacuum(l).unwrap(),
            evolver: ev,
            shifts: ShiftTimes::default(),
            qite: QiteVariant::Oracle,
        };
        acc += 0.5 * nested_bracket(&spec, &mut ExactEstimator).unwrap();
    }
    (Complex64::new(0.0, 1.0) * acc).re
}

#[test]
fn schwinger_signal_is_odd_in_time() {
    let l = 2;
    let h = build_schwinger_truncated(&SchwingerParams { l, m: 0.5, g: 0.3 }).unwrap();
    let ev = Evolver::new(EvolutionBackend::exact(h.clone())).unwrap();
    let oracle = DenseOracle::new(&h, DEFAULT_ORACLE_CAP).unwrap();
    let vac = column(&bare_vacuum(l).unwrap());
    for n in 0..=1 {
        let k = std::f64::consts::PI * n as f64;
        let o = sum_matrix(&correlator_core::experiments::schwinger_momentum_observable(l, k, central_site(l)).unwrap());
        let kc = sum_matrix(&hadron_generator(l, central_site(l)).unwrap());
        for t in [0.5, 1.0, 2.5, 4.0] {
            let fwd = schwinger_signal(&ev, l, k, t);
            let back = schwinger_signal(&ev, l, k, -t);
            assert!((fwd + back).abs() < 1e-8, "k={k} t={t}: {fwd} {back}");
            let ot = oracle.heisenberg(&o, t);
            let dense = (Complex64::new(0.0, 1.0) * vac.dotc(&((&ot * &kc - &kc * &ot) * &vac))).re;
            assert!((fwd - dense).abs() < 1e-8, "{fwd} vs {dense}");
        }
    }
}

#[test]
fn otoc_l4_matches_dense() {
    let l = 4;
    let h = build_tim(l).unwrap();
    let ev = Evolver::new(EvolutionBackend::exact(h.clone())).unwrap();
    let v = PauliString::single(l, 0, Pauli::Z).unwrap();
    let w = PauliString::single(l, l - 1, Pauli::X).unwrap();
    let plus = plus_state(l).unwrap();
    let oracle = DenseOracle::new(&h, DEFAULT_ORACLE_CAP).unwrap();
    let (vm, wm) = (string_matrix(&v), string_matrix(&w));
    let phi = column(&plus);
    let settings = BracketSettings { evolver: &ev, shifts: ShiftTimes::default(), qite: QiteVariant::Oracle };
    for i in 0..=30 {
        let t = 0.2 * i as f64;
        let got = otoc(&w, &v, t, &plus, &settings, &mut ExactEstimator).unwrap();
        let wt = oracle.heisenberg(&wm, t);
        let want = phi.dotc(&(&wt * &vm * &wt * &vm * &phi));
        assert!((got - want).norm() < 1e-8, "t={t}: {got} vs {want}");
    }
    let f0 = otoc(&w, &v, 0.0, &plus, &settings, &mut ExactEstimator).unwrap();
    assert!((f0 - 1.0).norm() < 1e-12);
}

#[test]
fn otoc_analytic_variant_on_trotter_backend() {
    let l = 4;
    let ev = Evolver::new(EvolutionBackend::trotter(build_tim(l).unwrap(), TrotterOrder::First, 0.2)).unwrap();
    let v = PauliString::single(l, 0, Pauli::Z).unwrap();
    let w = PauliString::single(l, l - 1, Pauli::X).unwrap();
    let plus = plus_state(l).unwrap();
    let oracle_q = BracketSettings { evolver: &ev, shifts: ShiftTimes::default(), qite: QiteVariant::Oracle };
    let analytic = BracketSettings { qite: QiteVariant::Analytic, ..oracle_q };
    for t in [0.0, 1.0, 2.4] {
        let a = otoc(&w, &v, t, &plus, &oracle_q, &mut ExactEstimator).unwrap();
        let b = otoc(&w, &v, t, &plus, &analytic, &mut ExactEstimator).unwrap();
        let direct = correlator_core::experiments::otoc_direct(&ev, &w, &v, t, &plus).unwrap();
        assert!((a - b).norm() < 1e-10 && (a - direct).norm() < 1e-10);
    }
}

#[test]
fn ssh_bracket_at_zero_time_matches_oracle() {
    let l = 8;
    let p = SshParams { l, v: 1.0, delta: 0.8, mu: -2.5 };
    let h = build_ssh(&p).unwrap();
    let ev = Evolver::new(EvolutionBackend::exact(h.clone())).unwrap();
    let zero = zero_state(l).unwrap();
    let y0 = PauliSum::from_string(&PauliString::single(l, 0, Pauli::Y).unwrap());
    for n in 0..=l as i64 / 2 {
        let k = LatticeMomentum::new(n, l).unwrap().k();
        let o = correlator_core::experiments::ssh_momentum_operator(l, k).unwrap();
        // expanded: one exact Pauli slot per term
        let mut total = Complex64::new(0.0, 0.0);
        for (c, s) in o.terms() {
            let spec = BracketSpec {
                operators: vec![SlotOperator::Pauli(s.clone())],
                observables: vec![FinalObservable::Sum(y0.clone())],
                times: vec![0.0, 0.0],
                signs: vec![Sign::Plus],
                initial_state: zero.clone(),
                evolver: &ev,
                shifts: ShiftTimes::default(),
                qite: QiteVariant::Oracle,
            };
            total += c * nested_bracket(&spec, &mut ExactEstimator).unwrap();
        }
        let (om, ym) = (sum_matrix(&o), sum_matrix(&y0));
        let v = column(&zero);
        let dense = v.dotc(&((&ym * &om + &om * &ym) * &v));
        assert!((0.5 * total - 0.5 * dense).norm() < 1e-10, "n={n}");
    }
}

#[test]
fn invalid_specs_are_rejected() {
    let ev = Evolver::new(EvolutionBackend::exact(build_tim(2).unwrap())).unwrap();
    let z = PauliString::single(2, 0, Pauli::Z).unwrap();
    let mut spec = BracketSpec {
        operators: vec![SlotOperator::Pauli(z.clone())],
        observables: vec![FinalObservable::Sum(PauliSum::from_string(&z))],
        times: vec![0.0, 1.0],
        signs: vec![Sign::Plus, Sign::Minus],
        initial_state: StateVector::zero(2).unwrap(),
        evolver: &ev,
        shifts: ShiftTimes::default(),
        qite: QiteVariant::Oracle,
    };
    assert!(nested_bracket(&spec, &mut ExactEstimator).is_err());
    spec.signs = vec![Sign::Minus];
    spec.shifts = ShiftTimes { tau_plus: 0.0, tau_minus: 0.3 };
    assert!(nested_bracket(&spec, &mut ExactEstimator).is_err());
}
