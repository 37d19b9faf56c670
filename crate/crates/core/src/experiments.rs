//! End-to-end runs: Schwinger hadron spectrum, SSH fermionic spectrum,
//! Ising OTOC and the randomized bracket self-test.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind, SelftestSection, SshMode};
use crate::correlators::{
    nested_bracket, nested_brackets, otoc, BracketSettings, BracketSpec, Estimator, ExactEstimator,
    FinalObservable, ShiftTimes, Sign, SlotOperator,
};
use crate::dense::{string_matrix, sum_matrix};
use crate::error::{Error, Result};
use crate::evolution::{EvolutionBackend, EvolutionKind, Evolver};
use crate::models::{
    bare_vacuum, build_schwinger_truncated, build_ssh, build_tim, central_site, hadron_generator,
    plus_state, zero_state, LatticeMomentum, SchwingerParams, SshParams,
};
use crate::noise::{task_rng, NoiseModel};
use crate::oracle::DenseOracle;
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::qite::QiteVariant;
use crate::spectral::{
    apply_window, correlation_analysis, double_signal, dft_padded, find_peaks, fit_dispersion,
    DispersionFit, Parity, Peak, SignalSeries, Spectrum, WindowKind,
};
use crate::state::StateVector;

/// Largest register the dense cross-check is attempted on by default.
pub const DEFAULT_RUN_ORACLE_CAP: usize = 10;

/// Tolerance of every noiseless cross-check that gates a run.
pub const GATE_TOLERANCE: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    /// Registers up to this size are also checked against the dense oracle.
    pub oracle_max_qubits: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            oracle_max_qubits: DEFAULT_RUN_ORACLE_CAP,
        }
    }
}

/// A numerical cross-check. Checks without a tolerance are informational.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateCheck {
    pub name: String,
    pub deviation: f64,
    pub tolerance: Option<f64>,
}

impl GateCheck {
    pub fn passed(&self) -> bool {
        self.tolerance.is_none_or(|tol| self.deviation <= tol)
    }
}

/// Per-momentum outcome of a spectrum run.
#[derive(Clone, Debug)]
pub struct MomentumSpectrum {
    pub index: i64,
    pub k: f64,
    /// One real series on `t >= 0` per independent run.
    pub runs: Vec<SignalSeries>,
    /// First run, rectangular window, normalized.
    pub raw: Spectrum,
    /// Correlation analysis of two rectangular-window spectra.
    pub ca: Option<Spectrum>,
    /// Configured window, then correlation analysis when two runs exist.
    pub processed: Spectrum,
    pub peaks: Vec<Peak>,
    /// Tallest peak above the frequency cutoff.
    pub energy: Option<f64>,
}

/// Splitting between the two tallest positive-frequency peaks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapEstimate {
    pub index: i64,
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub momenta: Vec<MomentumSpectrum>,
    pub fit: Option<DispersionFit>,
    pub gap: Option<GapEstimate>,
    pub checks: Vec<GateCheck>,
}

#[derive(Clone, Debug)]
pub struct OtocResult {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub checks: Vec<GateCheck>,
}

/// Worst deviations for one `(n, signs)` class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassSummary {
    pub n: usize,
    pub signs: String,
    pub count: usize,
    /// Largest `|circuit - dense|` over the class and every shift pair.
    pub max_oracle_deviation: f64,
    /// Largest disagreement between shift pairs for the same case.
    pub max_shift_spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub cases: usize,
    pub tolerance: f64,
    pub shift_pairs: Vec<[f64; 2]>,
    pub classes: Vec<ClassSummary>,
    pub max_oracle_deviation: f64,
    pub max_shift_spread: f64,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub enum ExperimentOutput {
    Spectrum(SpectrumResult),
    Otoc(OtocResult),
    Selftest(SelftestReport),
}

impl ExperimentOutput {
    pub fn checks(&self) -> Vec<GateCheck> {
        match self {
            ExperimentOutput::Spectrum(s) => s.checks.clone(),
            ExperimentOutput::Otoc(o) => o.checks.clone(),
            ExperimentOutput::Selftest(r) => vec![
                GateCheck {
                    name: "oracle deviation".into(),
                    deviation: r.max_oracle_deviation,
                    tolerance: Some(r.tolerance),
                },
                GateCheck {
                    name: "shift spread".into(),
                    deviation: r.max_shift_spread,
                    tolerance: Some(r.tolerance),
                },
            ],
        }
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(GateCheck::passed)
    }
}

pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutput> {
    cfg.validate()?;
    Ok(match cfg.experiment {
        ExperimentKind::SchwingerSpectrum => ExperimentOutput::Spectrum(run_schwinger_spectrum(cfg, opts)?),
        ExperimentKind::SshSpectrum => ExperimentOutput::Spectrum(run_ssh_spectrum(cfg, opts)?),
        ExperimentKind::TimOtoc => ExperimentOutput::Otoc(run_tim_otoc(cfg, opts)?),
        ExperimentKind::BracketSelftest => ExperimentOutput::Selftest(run_bracket_selftest(cfg)?),
    })
}

fn par_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Estimator for one time point of one run.
fn estimator_for(model: &NoiseModel, run: usize, sample: usize) -> Box<dyn Estimator> {
    if model.is_noiseless() {
        Box::new(ExactEstimator)
    } else {
        Box::new(model.estimator(((run as u64) << 32) | sample as u64))
    }
}

fn momenta_of(l: usize, chosen: &Option<Vec<i64>>) -> Result<Vec<LatticeMomentum>> {
    match chosen {
        Some(v) => v.iter().map(|&n| LatticeMomentum::new(n, l)).collect(),
        None => Ok(LatticeMomentum::non_negative(l)),
    }
}

/// Doubles, windows and transforms every run of one momentum, then picks peaks.
fn process_momentum(
    cfg: &ExperimentConfig,
    k: LatticeMomentum,
    runs: Vec<SignalSeries>,
    parity: Parity,
) -> Result<MomentumSpectrum> {
    let proc = &cfg.processing;
    let doubled: Vec<SignalSeries> = runs.iter().map(|r| double_signal(r, parity)).collect::<Result<_>>()?;
    let transform = |s: &SignalSeries, w: WindowKind| dft_padded(&apply_window(s, w), proc.padding);
    let raw = transform(&doubled[0], WindowKind::Rectangular).normalize();
    let (ca, processed) = if doubled.len() >= 2 {
        let rect = correlation_analysis(
            &transform(&doubled[0], WindowKind::Rectangular),
            &transform(&doubled[1], WindowKind::Rectangular),
        )?;
        let filtered = correlation_analysis(&transform(&doubled[0], proc.window), &transform(&doubled[1], proc.window))?;
        (Some(rect), filtered)
    } else {
        (None, transform(&doubled[0], proc.window).normalize())
    };
    let peaks = find_peaks(&processed, proc.peak_threshold)?;
    let energy = peaks.iter().find(|p| p.omega > proc.min_omega).map(|p| p.omega);
    Ok(MomentumSpectrum {
        index: k.index(),
        k: k.k(),
        runs,
        raw,
        ca,
        processed,
        peaks,
        energy,
    })
}

fn real_series(dt: f64, values: &[f64]) -> Result<SignalSeries> {
    SignalSeries::from_real(0.0, dt, values)
}

/// Transposes `[time][momentum]` into one series per momentum.
fn per_momentum(dt: f64, rows: &[Vec<f64>], count: usize) -> Result<Vec<SignalSeries>> {
    (0..count)
        .map(|m| real_series(dt, &rows.iter().map(|r| r[m]).collect::<Vec<_>>()))
        .collect()
}

/// `sum_j cos(k (j + j0)) K_j`, the Hermitian part of the momentum-projected hadron sum.
pub fn schwinger_momentum_observable(l: usize, k: f64, j0: usize) -> Result<PauliSum> {
    let mut acc = PauliSum::zero(2 * l);
    for j in 0..l {
        let w = (k * (j + j0) as f64).cos();
        acc = acc.add(&hadron_generator(l, j)?.scale_real(w))?;
    }
    Ok(acc)
}

fn two_site(n: usize, a: usize, b: usize, p: Pauli) -> Result<PauliString> {
    PauliString::from_sites(n, &[(a, p), (b, p)])
}

/// `Re C_k(t)` for every momentum from the commutators with the central hopping
/// generator, split into its `XX/2` and `YY/2` strings.
fn schwinger_point(
    cfg: &ExperimentConfig,
    evolver: &Evolver,
    observables: &[FinalObservable],
    j0: usize,
    state: &StateVector,
    t: f64,
    est: &mut dyn Estimator,
) -> Result<Vec<f64>> {
    let n = state.n_qubits();
    let mut acc = vec![Complex64::new(0.0, 0.0); observables.len()];
    for p in [Pauli::X, Pauli::Y] {
        let spec = BracketSpec {
            operators: vec![SlotOperator::Pauli(two_site(n, 2 * j0, 2 * j0 + 1, p)?)],
            observables: observables.to_vec(),
            times: vec![0.0, t],
            signs: vec![Sign::Minus],
            initial_state: state.clone(),
            evolver,
            shifts: cfg.qite.shifts(),
            qite: cfg.qite.variant(),
        };
        for (a, c) in acc.iter_mut().zip(nested_brackets(&spec, est)?) {
            *a += 0.5 * c;
        }
    }
    Ok(acc.iter().map(|c| (Complex64::new(0.0, 1.0) * c).re).collect())
}

/// `Re C_k(t)` from explicit state overlaps, without shifted circuits.
fn schwinger_direct(
    evolver: &Evolver,
    l: usize,
    ks: &[f64],
    j0: usize,
    state: &StateVector,
    t: f64,
) -> Result<Vec<f64>> {
    let a = evolver.evolved(state, 0.0, t)?;
    let (b, norm) = applied(state, &hadron_generator(l, j0)?)?;
    let b = evolver.evolved(&b, 0.0, t)?;
    ks.iter()
        .map(|&k| {
            let o = schwinger_momentum_observable(l, k, j0)?;
            let ab = overlap_with(&a, &o, &b)? * norm;
            let ba = overlap_with(&b, &o, &a)? * norm;
            Ok((Complex64::new(0.0, 1.0) * (ab - ba)).re)
        })
        .collect()
}

/// `O|phi>` normalized, with the norm it had.
fn applied(state: &StateVector, o: &PauliSum) -> Result<(StateVector, f64)> {
    let raw = state.apply_sum_raw(o)?;
    let norm = raw.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    Ok((StateVector::from_amplitudes(state.n_qubits(), raw)?, norm))
}

/// `<a|O|b>`.
fn overlap_with(a: &StateVector, o: &PauliSum, b: &StateVector) -> Result<Complex64> {
    let ob = b.apply_sum_raw(o)?;
    Ok(a.amplitudes().iter().zip(&ob).map(|(x, y)| x.conj() * y).sum())
}

/// Indices of a few representative samples for cross-checks.
fn check_samples(count: usize) -> Vec<usize> {
    let mut v = vec![0, count / 2, count.saturating_sub(1)];
    v.dedup();
    v
}

fn exact_dense_allowed(evolver: &Evolver, opts: &RunOptions) -> bool {
    evolver.backend().kind == EvolutionKind::Exact && evolver.n_qubits() <= opts.oracle_max_qubits
}

pub fn run_schwinger_spectrum(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SpectrumResult> {
    cfg.validate()?;
    let sec = cfg
        .schwinger
        .as_ref()
        .ok_or_else(|| Error::Config("missing [schwinger] section".into()))?;
    let params = SchwingerParams { l: sec.l, m: sec.m, g: sec.g };
    let l = params.l;
    let evolver = cfg.evolution.evolver(build_schwinger_truncated(&params)?)?;
    let momenta = momenta_of(l, &sec.momenta)?;
    let ks: Vec<f64> = momenta.iter().map(|k| k.k()).collect();
    let j0 = central_site(l);
    let observables: Vec<FinalObservable> = ks
        .iter()
        .map(|&k| Ok(FinalObservable::Sum(schwinger_momentum_observable(l, k, j0)?)))
        .collect::<Result<_>>()?;
    let vacuum = bare_vacuum(l)?;
    let times = cfg.evolution.sample_times();
    let model = cfg.noise.model(cfg.evolution.dt, cfg.seed);

    let mut runs: Vec<Vec<SignalSeries>> = Vec::with_capacity(cfg.processing.ca_runs);
    for run in 0..cfg.processing.ca_runs {
        let rows = par_map(times.len(), |i| {
            let mut est = estimator_for(&model, run, i);
            schwinger_point(cfg, &evolver, &observables, j0, &vacuum, times[i], est.as_mut())
        })?;
        runs.push(per_momentum(cfg.evolution.dt, &rows, ks.len())?);
    }

    let mut checks = Vec::new();
    if model.is_noiseless() {
        let mut dev: f64 = 0.0;
        for i in check_samples(times.len()) {
            let direct = schwinger_direct(&evolver, l, &ks, j0, &vacuum, times[i])?;
            for (m, d) in direct.iter().enumerate() {
                dev = dev.max((runs[0][m].samples[i].re - d).abs());
            }
        }
        checks.push(GateCheck {
            name: "shift rule vs direct overlaps".into(),
            deviation: dev,
            tolerance: Some(GATE_TOLERANCE),
        });
        if exact_dense_allowed(&evolver, opts) {
            let oracle = DenseOracle::new(evolver.hamiltonian(), opts.oracle_max_qubits)?;
            let k0 = hadron_generator(l, j0)?;
            let mut dev: f64 = 0.0;
            for i in check_samples(times.len()) {
                for (m, obs) in observables.iter().enumerate() {
                    let FinalObservable::Sum(o) = obs else { unreachable!() };
                    // <O(t) K0>; the reversed product is its conjugate
                    let ab = oracle.correlator(&[k0.clone(), o.clone()], &[0.0, times[i]], &vacuum)?;
                    let ba = ab.conj();
                    let want = (Complex64::new(0.0, 1.0) * (ab - ba)).re;
                    dev = dev.max((runs[0][m].samples[i].re - want).abs());
                }
            }
            checks.push(GateCheck {
                name: "dense oracle".into(),
                deviation: dev,
                tolerance: Some(GATE_TOLERANCE),
            });
        }
    }

    let spectra: Vec<MomentumSpectrum> = momenta
        .iter()
        .enumerate()
        .map(|(m, &k)| process_momentum(cfg, k, runs.iter().map(|r| r[m].clone()).collect(), Parity::Antisymmetric))
        .collect::<Result<_>>()?;
    let points: Vec<(f64, f64)> = spectra.iter().filter_map(|s| s.energy.map(|e| (s.k, e))).collect();
    let fit = fit_dispersion(&points).ok();
    Ok(SpectrumResult {
        momenta: spectra,
        fit,
        gap: None,
        checks,
    })
}

/// `Re <0| Y_0(t) O_0 |0>` from explicit overlaps.
fn ssh_direct(evolver: &Evolver, o0: &PauliSum, y0: &PauliSum, state: &StateVector, t: f64) -> Result<f64> {
    let a = evolver.evolved(state, 0.0, t)?;
    let (b, norm) = applied(state, o0)?;
    let b = evolver.evolved(&b, 0.0, t)?;
    Ok((overlap_with(&a, y0, &b)? * norm).re)
}

/// `sum_j cos(k j) X_j`.
pub fn ssh_momentum_operator(l: usize, k: f64) -> Result<PauliSum> {
    PauliSum::from_real_terms(
        l,
        (0..l)
            .map(|j| Ok(((k * j as f64).cos(), PauliString::single(l, j, Pauli::X)?)))
            .collect::<Result<Vec<_>>>()?,
    )
}

fn ssh_point(
    cfg: &ExperimentConfig,
    evolver: &Evolver,
    mode: SshMode,
    o0: &PauliSum,
    y0: &PauliString,
    state: &StateVector,
    t: f64,
    est: &mut dyn Estimator,
) -> Result<f64> {
    let observable = vec![FinalObservable::Sum(PauliSum::from_string(y0))];
    let spec = |op: SlotOperator| BracketSpec {
        operators: vec![op],
        observables: observable.clone(),
        times: vec![0.0, t],
        signs: vec![Sign::Plus],
        initial_state: state.clone(),
        evolver,
        shifts: cfg.qite.shifts(),
        qite: cfg.qite.variant(),
    };
    match mode {
        SshMode::Collective => {
            if o0.is_empty() {
                return Ok(0.0);
            }
            Ok(0.5 * nested_bracket(&spec(SlotOperator::Commuting(o0.clone())), est)?.re)
        }
        SshMode::Expanded => {
            let mut acc = 0.0;
            for (c, p) in o0.terms() {
                acc += c.re * 0.5 * nested_bracket(&spec(SlotOperator::Pauli(p.clone())), est)?.re;
            }
            Ok(acc)
        }
    }
}

pub fn run_ssh_spectrum(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SpectrumResult> {
    cfg.validate()?;
    let sec = cfg.ssh.as_ref().ok_or_else(|| Error::Config("missing [ssh] section".into()))?;
    let params = SshParams {
        l: sec.l,
        v: sec.v,
        delta: sec.delta,
        mu: sec.mu,
    };
    let l = params.l;
    let evolver = cfg.evolution.evolver(build_ssh(&params)?)?;
    let momenta = momenta_of(l, &sec.momenta)?;
    let operators: Vec<PauliSum> = momenta.iter().map(|k| ssh_momentum_operator(l, k.k())).collect::<Result<_>>()?;
    let y0 = PauliString::single(l, 0, Pauli::Y)?;
    let state = zero_state(l)?;
    let times = cfg.evolution.sample_times();
    let model = cfg.noise.model(cfg.evolution.dt, cfg.seed);

    let mut runs: Vec<Vec<SignalSeries>> = Vec::with_capacity(cfg.processing.ca_runs);
    for run in 0..cfg.processing.ca_runs {
        let rows = par_map(times.len(), |i| {
            let mut est = estimator_for(&model, run, i);
            operators
                .iter()
                .map(|o| ssh_point(cfg, &evolver, sec.mode, o, &y0, &state, times[i], est.as_mut()))
                .collect::<Result<Vec<f64>>>()
        })?;
        runs.push(per_momentum(cfg.evolution.dt, &rows, momenta.len())?);
    }

    let mut checks = Vec::new();
    if model.is_noiseless() {
        let y0s = PauliSum::from_string(&y0);
        let mut dev: f64 = 0.0;
        for i in check_samples(times.len()) {
            for (m, o) in operators.iter().enumerate() {
                let d = ssh_direct(&evolver, o, &y0s, &state, times[i])?;
                dev = dev.max((runs[0][m].samples[i].re - d).abs());
            }
        }
        // the collective gate is exact only to second order in the shift
        let exact_rule =
            sec.mode == SshMode::Expanded && !matches!(cfg.qite.variant(), QiteVariant::Unitary { .. });
        checks.push(GateCheck {
            name: "shift rule vs direct overlaps".into(),
            deviation: dev,
            tolerance: exact_rule.then_some(GATE_TOLERANCE),
        });
        if exact_dense_allowed(&evolver, opts) {
            let oracle = DenseOracle::new(evolver.hamiltonian(), opts.oracle_max_qubits)?;
            let mut dev: f64 = 0.0;
            for (m, o) in operators.iter().enumerate() {
                let want = oracle.correlator(&[o.clone(), y0s.clone()], &[0.0, 0.0], &state)?.re;
                dev = dev.max((runs[0][m].samples[0].re - want).abs());
            }
            checks.push(GateCheck {
                name: "dense oracle at t = 0".into(),
                deviation: dev,
                tolerance: Some(GATE_TOLERANCE),
            });
        }
    }

    let spectra: Vec<MomentumSpectrum> = momenta
        .iter()
        .enumerate()
        .map(|(m, &k)| process_momentum(cfg, k, runs.iter().map(|r| r[m].clone()).collect(), Parity::Antisymmetric))
        .collect::<Result<_>>()?;
    let gap = if l % 4 == 0 {
        spectra.iter().find(|s| s.index == (l / 4) as i64).and_then(gap_of)
    } else {
        None
    };
    Ok(SpectrumResult {
        momenta: spectra,
        fit: None,
        gap,
        checks,
    })
}

fn gap_of(s: &MomentumSpectrum) -> Option<GapEstimate> {
    let mut pos = s.peaks.iter().filter(|p| p.omega > 0.0);
    let a = pos.next()?;
    let b = pos.next()?;
    let (upper, lower) = if a.omega > b.omega { (a.omega, b.omega) } else { (b.omega, a.omega) };
    Some(GapEstimate {
        index: s.index,
        upper,
        lower,
        gap: upper - lower,
    })
}

/// `<phi| W(t) V W(t) V |phi>` with the evolver, by direct statevector products.
pub fn otoc_direct(evolver: &Evolver, w: &PauliString, v: &PauliString, t: f64, state: &StateVector) -> Result<Complex64> {
    let mut s = state.clone();
    for _ in 0..2 {
        s.apply_string(v)?;
        evolver.evolve(&mut s, 0.0, t)?;
        s.apply_string(w)?;
        evolver.evolve(&mut s, t, 0.0)?;
    }
    state.inner(&s)
}

pub fn run_tim_otoc(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<OtocResult> {
    cfg.validate()?;
    let sec = cfg.tim.as_ref().ok_or_else(|| Error::Config("missing [tim] section".into()))?;
    let l = sec.l;
    let evolver = cfg.evolution.evolver(build_tim(l)?)?;
    let v = PauliString::single(l, sec.probe_site, Pauli::Z)?;
    let w = PauliString::single(l, sec.butterfly(), Pauli::X)?;
    let state = plus_state(l)?;
    let times = cfg.evolution.sample_times();
    let model = cfg.noise.model(cfg.evolution.dt, cfg.seed);
    let settings = BracketSettings {
        evolver: &evolver,
        shifts: cfg.qite.shifts(),
        qite: cfg.qite.variant(),
    };
    let values = par_map(times.len(), |i| {
        let mut est = estimator_for(&model, 0, i);
        otoc(&w, &v, times[i], &state, &settings, est.as_mut())
    })?;

    let mut checks = Vec::new();
    if model.is_noiseless() {
        let exact_rule = !matches!(cfg.qite.variant(), QiteVariant::Unitary { .. });
        let dev = (0..times.len())
            .map(|i| Ok((values[i] - otoc_direct(&evolver, &w, &v, times[i], &state)?).norm()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(GateCheck {
            name: "shift rule vs direct products".into(),
            deviation: dev,
            tolerance: exact_rule.then_some(GATE_TOLERANCE),
        });
        if exact_dense_allowed(&evolver, opts) {
            let oracle = DenseOracle::new(evolver.hamiltonian(), opts.oracle_max_qubits)?;
            let (vs, ws) = (PauliSum::from_string(&v), PauliSum::from_string(&w));
            let mut dev: f64 = 0.0;
            for (i, &t) in times.iter().enumerate() {
                let f = oracle.correlator(&[vs.clone(), ws.clone(), vs.clone(), ws.clone()], &[0.0, t, 0.0, t], &state)?;
                dev = dev.max((values[i] - f).norm());
            }
            checks.push(GateCheck {
                name: "dense oracle".into(),
                deviation: dev,
                tolerance: exact_rule.then_some(GATE_TOLERANCE),
            });
        }
    }
    Ok(OtocResult { times, values, checks })
}

/// A randomly drawn bracket instance.
#[derive(Clone, Debug)]
pub struct RandomCase {
    pub hamiltonian: PauliSum,
    pub operators: Vec<PauliString>,
    pub observable: PauliSum,
    pub times: Vec<f64>,
    pub signs: Vec<Sign>,
    pub state: StateVector,
}

fn random_string<R: Rng>(rng: &mut R, n: usize) -> PauliString {
    loop {
        let letters: Vec<Pauli> = (0..n).map(|_| Pauli::ALL[rng.random_range(0..4)]).collect();
        if letters.iter().any(|&p| p != Pauli::I) {
            return PauliString::new(letters, crate::pauli::Phase::ONE).expect("hermitian phase");
        }
    }
}

fn random_sum<R: Rng>(rng: &mut R, n: usize, max_terms: usize) -> Result<PauliSum> {
    loop {
        let count = rng.random_range(1..=max_terms);
        let terms: Vec<(f64, PauliString)> = (0..count)
            .map(|_| (rng.random_range(-1.0..1.0), random_string(rng, n)))
            .collect();
        let s = PauliSum::from_real_terms(n, terms)?;
        if !s.is_empty() {
            return Ok(s);
        }
    }
}

/// Random Hermitian Hamiltonian, operators with random signs, observable,
/// times and a random normalized state on `1..=max_qubits` qubits.
pub fn random_case<R: Rng>(rng: &mut R, max_qubits: usize, signs: &[Sign]) -> Result<RandomCase> {
    let n = rng.random_range(1..=max_qubits);
    let hamiltonian = random_sum(rng, n, 4)?;
    let operators = signs
        .iter()
        .map(|_| {
            let s = random_string(rng, n);
            if rng.random_bool(0.5) {
                s.negated()
            } else {
                s
            }
        })
        .collect();
    let observable = random_sum(rng, n, 3)?;
    let times = (0..=signs.len()).map(|_| rng.random_range(-1.0..2.0)).collect();
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    Ok(RandomCase {
        hamiltonian,
        operators,
        observable,
        times,
        signs: signs.to_vec(),
        state: StateVector::from_amplitudes(n, amps)?,
    })
}

impl RandomCase {
    /// Circuit bracket with the exact backend and oracle QITE.
    pub fn circuit_value(&self, evolver: &Evolver, shifts: ShiftTimes) -> Result<Complex64> {
        let spec = BracketSpec {
            operators: self.operators.iter().cloned().map(SlotOperator::Pauli).collect(),
            observables: vec![FinalObservable::Sum(self.observable.clone())],
            times: self.times.clone(),
            signs: self.signs.clone(),
            initial_state: self.state.clone(),
            evolver,
            shifts,
            qite: QiteVariant::Oracle,
        };
        nested_bracket(&spec, &mut ExactEstimator)
    }

    pub fn oracle_value(&self) -> Result<Complex64> {
        let oracle = DenseOracle::new(&self.hamiltonian, crate::oracle::DEFAULT_ORACLE_CAP)?;
        let mut mats: Vec<_> = self.operators.iter().map(string_matrix).collect();
        mats.push(sum_matrix(&self.observable));
        oracle.nested_bracket(&mats, &self.times, &self.signs, &self.state)
    }
}

/// Sign classes for `n in {2, 3}`, cycled through by case index.
pub fn selftest_classes() -> Vec<Vec<Sign>> {
    let mut v = Sign::all_tuples(1);
    v.extend(Sign::all_tuples(2));
    v
}

pub fn run_bracket_selftest(cfg: &ExperimentConfig) -> Result<SelftestReport> {
    cfg.validate()?;
    let sec: SelftestSection = cfg.selftest.clone().unwrap_or_default();
    let classes = selftest_classes();
    let results = par_map(sec.cases, |i| {
        let signs = &classes[i % classes.len()];
        let mut rng = task_rng(cfg.seed, i as u64);
        let case = random_case(&mut rng, sec.max_qubits, signs)?;
        let evolver = Evolver::new(EvolutionBackend::exact(case.hamiltonian.clone()))?;
        let want = case.oracle_value()?;
        let got: Vec<Complex64> = sec
            .shift_pairs
            .iter()
            .map(|p| case.circuit_value(&evolver, ShiftTimes { tau_plus: p[0], tau_minus: p[1] }))
            .collect::<Result<_>>()?;
        let dev = got.iter().map(|g| (g - want).norm()).fold(0.0, f64::max);
        let spread = got
            .iter()
            .flat_map(|a| got.iter().map(move |b| (a - b).norm()))
            .fold(0.0, f64::max);
        Ok((signs.len() + 1, Sign::label(signs), dev, spread))
    })?;
    let mut by_class: BTreeMap<(usize, String), ClassSummary> = BTreeMap::new();
    for (n, label, dev, spread) in results {
        let e = by_class.entry((n, label.clone())).or_insert(ClassSummary {
            n,
            signs: label,
            count: 0,
            max_oracle_deviation: 0.0,
            max_shift_spread: 0.0,
        });
        e.count += 1;
        e.max_oracle_deviation = e.max_oracle_deviation.max(dev);
        e.max_shift_spread = e.max_shift_spread.max(spread);
    }
    let classes: Vec<ClassSummary> = by_class.into_values().collect();
    let max_oracle_deviation = classes.iter().map(|c| c.max_oracle_deviation).fold(0.0, f64::max);
    let max_shift_spread = classes.iter().map(|c| c.max_shift_spread).fold(0.0, f64::max);
    Ok(SelftestReport {
        seed: cfg.seed,
        cases: sec.cases,
        tolerance: sec.tolerance,
        shift_pairs: sec.shift_pairs.clone(),
        passed: max_oracle_deviation <= sec.tolerance && max_shift_spread <= sec.tolerance,
        classes,
        max_oracle_deviation,
        max_shift_spread,
    })
}
