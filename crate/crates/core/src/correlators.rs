//! Nested commutators and anticommutators from shifted circuit expectations.
//!
//! A bracket of sign tuple `b` over operators `O_0 .. O_{n-1}` is
//! `[...[O_{n-1}(t_{n-1}), O_{n-2}(t_{n-2})]_{b_{n-2}} ..., O_0(t_0)]_{b_0}`.
//! Each `-` slot becomes a real-time gate `exp(-i tau O_j)` and each `+` slot a
//! normalized imaginary-time gate. The bracket is the signed sum over the
//! `2^{n-1}` shift assignments of the final expectation, weighted by the
//! normalization factors the imaginary-time gates removed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_qubits, Error, Result};
use crate::evolution::Evolver;
use crate::pauli::{PauliString, PauliSum};
use crate::qite::{default_tau_minus, default_tau_plus, qite_projective, QiteVariant};
use crate::state::{StateVector, TimeKind};

/// Bracket kind for one slot: `-` commutator, `+` anticommutator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Minus => '-',
            Sign::Plus => '+',
        }
    }

    /// All `2^len` sign tuples, `Minus` before `Plus` in each slot.
    pub fn all_tuples(len: usize) -> Vec<Vec<Sign>> {
        (0..1usize << len)
            .map(|code| {
                (0..len)
                    .map(|j| if code >> j & 1 == 1 { Sign::Plus } else { Sign::Minus })
                    .collect()
            })
            .collect()
    }

    pub fn label(signs: &[Sign]) -> String {
        signs.iter().map(|s| s.symbol()).collect()
    }
}

/// Shift magnitudes for the real-time and imaginary-time gates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftTimes {
    pub tau_plus: f64,
    pub tau_minus: f64,
}

impl Default for ShiftTimes {
    fn default() -> Self {
        ShiftTimes {
            tau_plus: default_tau_plus(),
            tau_minus: default_tau_minus(),
        }
    }
}

impl ShiftTimes {
    pub fn validate(&self) -> Result<()> {
        if (2.0 * self.tau_plus).sinh().abs() < 1e-12 {
            return Err(Error::Config("sinh(2 tau_plus) vanishes".into()));
        }
        if (2.0 * self.tau_minus).sin().abs() < 1e-12 {
            return Err(Error::Config("sin(2 tau_minus) vanishes".into()));
        }
        Ok(())
    }

    pub fn magnitude(&self, sign: Sign) -> f64 {
        match sign {
            Sign::Minus => self.tau_minus,
            Sign::Plus => self.tau_plus,
        }
    }
}

/// One of the `2^{n-1}` shift patterns: slot `j` gets `(-1)^{xi_j} tau_{b_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftAssignment {
    pub xi: Vec<bool>,
    pub taus: Vec<f64>,
}

impl ShiftAssignment {
    pub fn enumerate(signs: &[Sign], shifts: &ShiftTimes) -> Vec<ShiftAssignment> {
        (0..1usize << signs.len())
            .map(|code| {
                let xi: Vec<bool> = (0..signs.len()).map(|j| code >> j & 1 == 1).collect();
                let taus = signs
                    .iter()
                    .zip(&xi)
                    .map(|(&s, &x)| if x { -shifts.magnitude(s) } else { shifts.magnitude(s) })
                    .collect();
                ShiftAssignment { xi, taus }
            })
            .collect()
    }

    /// `(-1)^{|xi|}`.
    pub fn parity(&self) -> f64 {
        if self.xi.iter().filter(|&&x| x).count() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Operator in a non-final slot.
#[derive(Clone, Debug, PartialEq)]
pub enum SlotOperator {
    /// Hermitian Pauli string; the shift rule is exact.
    Pauli(PauliString),
    /// Hermitian sum of mutually commuting strings, gated as a product of
    /// per-term exponentials. The shift rule is then accurate to second
    /// order in the shift only.
    Commuting(PauliSum),
}

impl SlotOperator {
    fn validate(&self, n_qubits: usize) -> Result<()> {
        match self {
            SlotOperator::Pauli(p) => {
                check_qubits(n_qubits, p.n_qubits())?;
                if !p.is_hermitian() {
                    return Err(Error::NotHermitian(p.to_string()));
                }
            }
            SlotOperator::Commuting(s) => {
                check_qubits(n_qubits, s.n_qubits())?;
                s.require_hermitian()?;
                if !s.terms_commute() {
                    return Err(Error::Config("slot operator terms must commute".into()));
                }
            }
        }
        Ok(())
    }

    pub fn as_sum(&self) -> PauliSum {
        match self {
            SlotOperator::Pauli(p) => PauliSum::from_string(p),
            SlotOperator::Commuting(s) => s.clone(),
        }
    }

    /// Hermitian strings with real weights whose product of exponentials is the gate.
    fn factors(&self) -> Vec<(f64, PauliString)> {
        match self {
            SlotOperator::Pauli(p) => vec![(1.0, p.clone())],
            SlotOperator::Commuting(s) => s.terms().iter().map(|(c, p)| (c.re, p.clone())).collect(),
        }
    }
}

/// Final operator of a bracket.
#[derive(Clone, Debug, PartialEq)]
pub enum FinalObservable {
    /// Hermitian sum measured at the last time.
    Sum(PauliSum),
    /// Measures `probe` after `U(t)^dagger W U(t)`, which realizes the
    /// composite operator `W(t) probe W(t)`.
    Echo {
        butterfly: PauliString,
        probe: PauliSum,
        time: f64,
    },
}

impl FinalObservable {
    fn validate(&self, n_qubits: usize) -> Result<()> {
        match self {
            FinalObservable::Sum(s) => {
                check_qubits(n_qubits, s.n_qubits())?;
                s.require_hermitian()
            }
            FinalObservable::Echo { butterfly, probe, .. } => {
                check_qubits(n_qubits, butterfly.n_qubits())?;
                check_qubits(n_qubits, probe.n_qubits())?;
                if !butterfly.is_hermitian() {
                    return Err(Error::NotHermitian(butterfly.to_string()));
                }
                probe.require_hermitian()
            }
        }
    }

    fn measured(&self) -> &PauliSum {
        match self {
            FinalObservable::Sum(s) => s,
            FinalObservable::Echo { probe, .. } => probe,
        }
    }
}

/// Source of expectation values: exact, or sampled with noise.
pub trait Estimator {
    /// Estimate of `<state|obs|state>` for a circuit that evolved for `elapsed` time.
    fn estimate(&mut self, state: &StateVector, obs: &PauliSum, elapsed: f64) -> Result<f64>;
}

/// Noise-free expectation values.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactEstimator;

impl Estimator for ExactEstimator {
    fn estimate(&mut self, state: &StateVector, obs: &PauliSum, _elapsed: f64) -> Result<f64> {
        state.expectation(obs)
    }
}

/// An n-time bracket instance.
#[derive(Clone, Debug)]
pub struct BracketSpec<'a> {
    /// `O_0 .. O_{n-2}`.
    pub operators: Vec<SlotOperator>,
    /// Final operators measured from the same circuits; one bracket value each.
    pub observables: Vec<FinalObservable>,
    /// `t_0 .. t_{n-1}`.
    pub times: Vec<f64>,
    /// `b_0 .. b_{n-2}`.
    pub signs: Vec<Sign>,
    pub initial_state: StateVector,
    pub evolver: &'a Evolver,
    pub shifts: ShiftTimes,
    pub qite: QiteVariant,
}

impl<'a> BracketSpec<'a> {
    pub fn validate(&self) -> Result<()> {
        let n = self.operators.len() + 1;
        if self.times.len() != n || self.signs.len() != n - 1 {
            return Err(Error::Config(format!(
                "bracket with {n} operators needs {n} times and {} signs",
                n - 1
            )));
        }
        if self.observables.is_empty() {
            return Err(Error::Config("bracket needs a final observable".into()));
        }
        let q = self.evolver.n_qubits();
        check_qubits(q, self.initial_state.n_qubits())?;
        for o in &self.operators {
            o.validate(q)?;
        }
        for o in &self.observables {
            o.validate(q)?;
        }
        self.shifts.validate()
    }

    pub fn n_plus(&self) -> usize {
        self.signs.iter().filter(|&&s| s == Sign::Plus).count()
    }

    pub fn n_minus(&self) -> usize {
        self.signs.len() - self.n_plus()
    }

    fn projective(&self) -> bool {
        self.qite == QiteVariant::Projective
    }
}

/// Outcome of one shifted circuit.
struct CircuitRun {
    /// Product of the per-slot normalization weights.
    weight: f64,
    /// One expectation per final observable; empty when the circuit was cut short.
    values: Vec<f64>,
}

/// Normalization weight of a `+` slot whose operator has expectation `e` before the gate.
fn plus_weight(tau: f64, e: f64, projective: bool) -> f64 {
    if projective {
        // limit of (cosh 2tau - sinh 2tau e) / sinh 2tau as |tau| grows
        1.0 - tau.signum() * e
    } else {
        (2.0 * tau).cosh() - (2.0 * tau).sinh() * e
    }
}

fn apply_slot(
    spec: &BracketSpec<'_>,
    state: &mut StateVector,
    op: &SlotOperator,
    sign: Sign,
    tau: f64,
) -> Result<()> {
    match sign {
        Sign::Minus => {
            for (c, p) in op.factors() {
                state.apply_pauli_exponential(&p, c * tau, TimeKind::Real)?;
            }
        }
        Sign::Plus if spec.projective() => {
            let p = match op {
                SlotOperator::Pauli(p) => p,
                SlotOperator::Commuting(_) => {
                    return Err(Error::Config(
                        "projective QITE needs a Pauli-string slot operator".into(),
                    ))
                }
            };
            // exp(-tau P) with tau -> +inf keeps the -1 eigenspace
            let keep = if tau > 0.0 { -1 } else { 1 };
            *state = qite_projective(state, p, keep)?.0;
        }
        Sign::Plus => {
            for (c, p) in op.factors() {
                spec.qite.apply(state, &p, c * tau)?;
            }
        }
    }
    Ok(())
}

fn echo(spec: &BracketSpec<'_>, state: &mut StateVector, obs: &FinalObservable, t: f64) -> Result<f64> {
    match obs {
        FinalObservable::Sum(_) => Ok(0.0),
        FinalObservable::Echo { butterfly, time, .. } => {
            spec.evolver.evolve(state, t, t + time)?;
            state.apply_string(butterfly)?;
            spec.evolver.evolve(state, t + time, t)?;
            Ok(2.0 * time.abs())
        }
    }
}

/// Runs slots `0..=last` (all slots when `last` is `None`, then measures).
fn run_circuit(
    spec: &BracketSpec<'_>,
    taus: &[f64],
    last: Option<usize>,
    est: &mut dyn Estimator,
) -> Result<CircuitRun> {
    let n_slots = spec.operators.len();
    let upto = last.map_or(n_slots, |i| i + 1);
    let mut state = spec.initial_state.clone();
    let t0 = spec.times[0];
    let mut t = t0;
    let mut weight = 1.0;
    for j in 0..upto {
        spec.evolver.evolve(&mut state, t, spec.times[j])?;
        t = spec.times[j];
        if spec.signs[j] == Sign::Plus {
            let e = est.estimate(&state, &spec.operators[j].as_sum(), (t - t0).abs())?;
            weight *= plus_weight(taus[j], e, spec.projective());
            if spec.projective() && weight.abs() < 1e-14 {
                // the projection has no support; the term contributes nothing
                return Ok(CircuitRun {
                    weight: 0.0,
                    values: vec![0.0; spec.observables.len()],
                });
            }
        }
        apply_slot(spec, &mut state, &spec.operators[j], spec.signs[j], taus[j])?;
    }
    if last.is_some() {
        return Ok(CircuitRun {
            weight,
            values: Vec::new(),
        });
    }
    let t_last = spec.times[n_slots];
    spec.evolver.evolve(&mut state, t, t_last)?;
    let base = (t_last - t0).abs();
    let mut values = Vec::with_capacity(spec.observables.len());
    for obs in &spec.observables {
        let mut s = state.clone();
        let extra = echo(spec, &mut s, obs, t_last)?;
        values.push(est.estimate(&s, obs.measured(), base + extra)?);
    }
    Ok(CircuitRun { weight, values })
}

/// `<O_{n-1}>_b(tau)`: the plain shifted-circuit expectation, one value per observable.
pub fn circuit_expectation(
    spec: &BracketSpec<'_>,
    taus: &[f64],
    est: &mut dyn Estimator,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if taus.len() != spec.signs.len() {
        return Err(Error::Config(format!(
            "{} shifts given for {} slots",
            taus.len(),
            spec.signs.len()
        )));
    }
    Ok(run_circuit(spec, taus, None, est)?.values)
}

/// Normalization correction `Corr(tau_0 .. tau_i)` for a `+` slot `i`:
/// the product over `+` slots `j <= i` of `cosh 2tau_j - sinh 2tau_j E_j`,
/// where `E_j` is the expectation of `O_j(t_j)` in the circuit truncated
/// just before slot `j`.
pub fn correction_factor(
    spec: &BracketSpec<'_>,
    i: usize,
    tau_prefix: &[f64],
    est: &mut dyn Estimator,
) -> Result<f64> {
    spec.validate()?;
    if i >= spec.signs.len() || spec.signs[i] != Sign::Plus {
        return Err(Error::Config(format!("slot {i} is not an anticommutator slot")));
    }
    if tau_prefix.len() != i + 1 {
        return Err(Error::Internal(format!(
            "correction through slot {i} needs {} shifts, got {}",
            i + 1,
            tau_prefix.len()
        )));
    }
    if spec.projective() {
        return Err(Error::Config("finite correction factor undefined for projective QITE".into()));
    }
    Ok(run_circuit(spec, tau_prefix, Some(i), est)?.weight)
}

/// Bracket values, one per final observable.
pub fn nested_brackets(spec: &BracketSpec<'_>, est: &mut dyn Estimator) -> Result<Vec<Complex64>> {
    spec.validate()?;
    let mut acc = vec![0.0; spec.observables.len()];
    for shift in ShiftAssignment::enumerate(&spec.signs, &spec.shifts) {
        let run = run_circuit(spec, &shift.taus, None, est)?;
        let w = shift.parity() * run.weight;
        for (a, v) in acc.iter_mut().zip(&run.values) {
            *a += w * v;
        }
    }
    let plus_factor = if spec.projective() {
        -1.0
    } else {
        -1.0 / (2.0 * spec.shifts.tau_plus).sinh()
    };
    let minus_factor = Complex64::new(0.0, 1.0 / (2.0 * spec.shifts.tau_minus).sin());
    let prefactor = minus_factor.powu(spec.n_minus() as u32) * plus_factor.powi(spec.n_plus() as i32);
    Ok(acc.into_iter().map(|a| prefactor * a).collect())
}

/// Bracket value for a spec with a single final observable.
pub fn nested_bracket(spec: &BracketSpec<'_>, est: &mut dyn Estimator) -> Result<Complex64> {
    if spec.observables.len() != 1 {
        return Err(Error::Config(format!(
            "expected one final observable, got {}",
            spec.observables.len()
        )));
    }
    Ok(nested_brackets(spec, est)?[0])
}

/// Shared settings for correlation functions built from brackets.
#[derive(Clone, Copy, Debug)]
pub struct BracketSettings<'a> {
    pub evolver: &'a Evolver,
    pub shifts: ShiftTimes,
    pub qite: QiteVariant,
}

impl<'a> BracketSettings<'a> {
    pub fn new(evolver: &'a Evolver) -> BracketSettings<'a> {
        BracketSettings {
            evolver,
            shifts: ShiftTimes::default(),
            qite: QiteVariant::Oracle,
        }
    }
}

/// `<phi| O_{n-1}(t_{n-1}) ... O_0(t_0) |phi>` as `2^{-(n-1)} sum_b c_b`,
/// with non-final operators expanded term by term and the final operator
/// split into Hermitian and anti-Hermitian parts.
pub fn n_time_correlation(
    operators: &[PauliSum],
    times: &[f64],
    state: &StateVector,
    settings: &BracketSettings<'_>,
    est: &mut dyn Estimator,
) -> Result<Complex64> {
    let n = operators.len();
    if n < 2 {
        return Err(Error::Config("a correlation function needs at least two operators".into()));
    }
    if times.len() != n {
        return Err(Error::Config("one time per operator is required".into()));
    }
    let (herm, anti) = operators[n - 1].hermitian_parts();
    let mut observables = vec![FinalObservable::Sum(herm)];
    let has_anti = !anti.is_empty();
    if has_anti {
        observables.push(FinalObservable::Sum(anti));
    }
    // every choice of one term per non-final operator
    let mut choices: Vec<(Complex64, Vec<PauliString>)> = vec![(Complex64::new(1.0, 0.0), Vec::new())];
    for o in &operators[..n - 1] {
        let mut next = Vec::with_capacity(choices.len() * o.len());
        for (c, strings) in &choices {
            for (a, p) in o.terms() {
                let mut s = strings.clone();
                s.push(p.clone());
                next.push((c * a, s));
            }
        }
        choices = next;
    }
    let weight = 0.5f64.powi(n as i32 - 1);
    let mut total = Complex64::new(0.0, 0.0);
    for (coeff, strings) in choices {
        for signs in Sign::all_tuples(n - 1) {
            let spec = BracketSpec {
                operators: strings.iter().cloned().map(SlotOperator::Pauli).collect(),
                observables: observables.clone(),
                times: times.to_vec(),
                signs,
                initial_state: state.clone(),
                evolver: settings.evolver,
                shifts: settings.shifts,
                qite: settings.qite,
            };
            let c = nested_brackets(&spec, est)?;
            let mut value = c[0];
            if has_anti {
                value += Complex64::new(0.0, 1.0) * c[1];
            }
            total += coeff * weight * value;
        }
    }
    Ok(total)
}

/// `F(t) = <phi| W(t) V W(t) V |phi>` from one anticommutator and one commutator
/// with the composite operator realized as an echo circuit.
pub fn otoc(
    w: &PauliString,
    v: &PauliString,
    t: f64,
    state: &StateVector,
    settings: &BracketSettings<'_>,
    est: &mut dyn Estimator,
) -> Result<Complex64> {
    let spec = |sign: Sign| BracketSpec {
        operators: vec![SlotOperator::Pauli(v.clone())],
        observables: vec![FinalObservable::Echo {
            butterfly: w.clone(),
            probe: PauliSum::from_string(v),
            time: t,
        }],
        times: vec![0.0, 0.0],
        signs: vec![sign],
        initial_state: state.clone(),
        evolver: settings.evolver,
        shifts: settings.shifts,
        qite: settings.qite,
    };
    let plus = nested_bracket(&spec(Sign::Plus), est)?;
    let minus = nested_bracket(&spec(Sign::Minus), est)?;
    Ok(0.5 * (plus + minus))
}
