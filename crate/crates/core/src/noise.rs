//! Classical noise and resource models: depolarizing decay, shot sampling,
//! spectral smearing, error bounds, bang-bang pulse schedules and QITE cost
//! estimates.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::correlators::Estimator;
use crate::error::{check_qubits, Error, Result};
use crate::evolution::{EvolutionBackend, Evolver};
use crate::pauli::{PauliString, PauliSum};
use crate::spectral::SignalSeries;
use crate::state::{StateVector, TimeKind};

/// Global depolarizing per Trotter layer plus finite sampling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Depolarizing probability per layer.
    pub p: f64,
    /// Layer duration.
    pub dt: f64,
    /// Shots per Pauli term; `None` means exact expectations.
    #[serde(default)]
    pub shots: Option<u32>,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseModel {
    pub fn noiseless(dt: f64) -> NoiseModel {
        NoiseModel {
            p: 0.0,
            dt,
            shots: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.p) {
            return Err(Error::Config(format!("depolarizing probability must be in [0, 1), got {}", self.p)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("noise layer duration must be positive, got {}", self.dt)));
        }
        if self.shots == Some(0) {
            return Err(Error::Config("shot count must be positive".into()));
        }
        Ok(())
    }

    /// Decay rate `-ln(1 - p) / dt`.
    pub fn gamma(&self) -> f64 {
        -(1.0 - self.p).ln() / self.dt
    }

    pub fn is_noiseless(&self) -> bool {
        self.p == 0.0 && self.shots.is_none()
    }

    /// Estimator for task `task`, with its own random stream.
    pub fn estimator(&self, task: u64) -> NoisyEstimator {
        NoisyEstimator {
            gamma: self.gamma(),
            shots: self.shots,
            rng: task_rng(self.seed, task),
        }
    }
}

/// Independent stream `task` of the generator seeded by `seed`.
pub fn task_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// Damps each sample by `exp(-gamma |t|)`.
pub fn depolarize_series(series: &SignalSeries, model: &NoiseModel) -> SignalSeries {
    let gamma = model.gamma();
    SignalSeries {
        samples: series
            .samples
            .iter()
            .enumerate()
            .map(|(n, x)| x * (-gamma * series.time(n).abs()).exp())
            .collect(),
        ..series.clone()
    }
}

/// `(1 - exp(-(gamma + i w) T)) / (gamma + i w)`, equal to `T` at `gamma = w = 0`.
pub fn smearing_function(omega: f64, gamma: f64, t_max: f64) -> Complex64 {
    let z = Complex64::new(gamma, omega);
    if z.norm() * t_max < 1e-8 {
        // series of (1 - e^{-zT}) / z
        return Complex64::new(t_max, 0.0) - z * (t_max * t_max / 2.0);
    }
    (Complex64::new(1.0, 0.0) - (-z * t_max).exp()) / z
}

/// Mean of `shots` draws of a `+-1` outcome with mean `expectation`.
pub fn shot_sample<R: Rng + ?Sized>(expectation: f64, shots: u32, rng: &mut R) -> Result<f64> {
    if shots == 0 {
        return Err(Error::Config("shot count must be positive".into()));
    }
    let prob_up = ((1.0 + expectation) / 2.0).clamp(0.0, 1.0);
    let ups = Binomial::new(shots as u64, prob_up)
        .map_err(|e| Error::Internal(format!("binomial: {e}")))?
        .sample(rng);
    Ok(2.0 * ups as f64 / shots as f64 - 1.0)
}

/// Samples each Pauli term separately and recombines with its real coefficient.
/// Identity terms are exact.
pub fn shot_sample_terms<R: Rng + ?Sized>(
    terms: &[(f64, f64, bool)],
    shots: Option<u32>,
    rng: &mut R,
) -> Result<f64> {
    let mut acc = 0.0;
    for &(c, e, identity) in terms {
        acc += c * match shots {
            Some(n) if !identity => shot_sample(e, n, rng)?,
            _ => e,
        };
    }
    Ok(acc)
}

/// Expectations damped by `exp(-gamma * elapsed)` on every non-identity term, then shot-sampled.
#[derive(Clone, Debug)]
pub struct NoisyEstimator {
    pub gamma: f64,
    pub shots: Option<u32>,
    rng: ChaCha8Rng,
}

impl NoisyEstimator {
    pub fn new(gamma: f64, shots: Option<u32>, rng: ChaCha8Rng) -> NoisyEstimator {
        NoisyEstimator { gamma, shots, rng }
    }
}

impl Estimator for NoisyEstimator {
    fn estimate(&mut self, state: &StateVector, obs: &PauliSum, elapsed: f64) -> Result<f64> {
        obs.require_hermitian()?;
        let damping = (-self.gamma * elapsed).exp();
        let exps = state.term_expectations(obs)?;
        let terms: Vec<(f64, f64, bool)> = obs
            .terms()
            .iter()
            .zip(exps)
            .map(|((c, p), e)| {
                let id = p.is_identity();
                (c.re, if id { e } else { damping * e }, id)
            })
            .collect();
        shot_sample_terms(&terms, self.shots, &mut self.rng)
    }
}

/// Inputs to the combined truncation and sampling bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBudget {
    /// Number of operators in the correlator.
    pub n: usize,
    /// Anticommutator slots.
    pub n_plus: usize,
    /// `None` for exact expectations.
    pub shots: Option<u32>,
    pub qite_error: f64,
    pub dt: f64,
    pub trotter_order: u32,
    pub hamiltonian_norm: f64,
    pub time_span: f64,
    pub observable_norm: f64,
    /// Constant in front of the Trotter term.
    pub trotter_constant: f64,
}

/// `2^{n-1} |O| (1/sqrt(N) + n_plus eps + C T dt^p |H|^{p+1})`.
pub fn combined_error_bound(b: &ErrorBudget) -> f64 {
    let shot = b.shots.map_or(0.0, |n| 1.0 / (n as f64).sqrt());
    let p = b.trotter_order as i32;
    let trotter = b.trotter_constant * b.time_span * b.dt.powi(p) * b.hamiltonian_norm.powi(p + 1);
    2f64.powi(b.n as i32 - 1) * b.observable_norm * (shot + b.n_plus as f64 * b.qite_error + trotter)
}

/// A pulse `strength * operator` switched on for `duration / strength` from `start`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pulse {
    pub start: f64,
    /// Target rotation angle; the pulse lasts `duration / strength`.
    pub duration: f64,
    pub operator: PauliString,
}

/// Pulses added on top of an always-on Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct BangBangSchedule {
    strength: f64,
    pulses: Vec<Pulse>,
    hamiltonian: PauliSum,
}

impl BangBangSchedule {
    pub fn new(strength: f64, pulses: Vec<Pulse>, hamiltonian: PauliSum) -> Result<BangBangSchedule> {
        if !(strength >= 1.0) {
            return Err(Error::Config(format!("pulse strength must be at least 1, got {strength}")));
        }
        hamiltonian.require_hermitian()?;
        for p in &pulses {
            check_qubits(hamiltonian.n_qubits(), p.operator.n_qubits())?;
            if !p.operator.is_hermitian() {
                return Err(Error::NotHermitian(p.operator.to_string()));
            }
            if !(p.start >= 0.0) || !p.duration.is_finite() {
                return Err(Error::Config("pulse start must be non-negative and duration finite".into()));
            }
        }
        for w in pulses.windows(2) {
            let end = w[0].start + w[0].duration.abs() / strength;
            if w[1].start < end {
                return Err(Error::Config(format!(
                    "pulses overlap or are out of order: one ends at {end}, the next starts at {}",
                    w[1].start
                )));
            }
        }
        Ok(BangBangSchedule {
            strength,
            pulses,
            hamiltonian,
        })
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    fn end(&self, p: &Pulse) -> f64 {
        p.start + p.duration.abs() / self.strength
    }
}

/// Time-ordered evolution under `H + strength * O_j` during each pulse and `H` otherwise.
/// Each constant piece is integrated exactly.
pub fn simulate_bangbang(schedule: &BangBangSchedule, state: &StateVector, t_end: f64) -> Result<StateVector> {
    check_qubits(schedule.hamiltonian.n_qubits(), state.n_qubits())?;
    let bare = Evolver::new(EvolutionBackend::exact(schedule.hamiltonian.clone()))?;
    let mut s = state.clone();
    let mut t = 0.0;
    for p in &schedule.pulses {
        if p.start >= t_end {
            break;
        }
        bare.evolve(&mut s, t, p.start)?;
        let end = schedule.end(p).min(t_end);
        let sign = p.duration.signum();
        let kicked = schedule
            .hamiltonian
            .add(&PauliSum::from_string(&p.operator).scale_real(sign * schedule.strength))?;
        Evolver::new(EvolutionBackend::exact(kicked))?.evolve(&mut s, p.start, end)?;
        t = end;
    }
    if t < t_end {
        bare.evolve(&mut s, t, t_end)?;
    }
    Ok(s)
}

/// The same schedule with each pulse replaced by an instantaneous `exp(-i duration O_j)` at its start.
pub fn ideal_kicked_evolution(schedule: &BangBangSchedule, state: &StateVector, t_end: f64) -> Result<StateVector> {
    check_qubits(schedule.hamiltonian.n_qubits(), state.n_qubits())?;
    let bare = Evolver::new(EvolutionBackend::exact(schedule.hamiltonian.clone()))?;
    let mut s = state.clone();
    let mut t = 0.0;
    for p in schedule.pulses.iter().filter(|p| p.start < t_end) {
        bare.evolve(&mut s, t, p.start)?;
        s.apply_pauli_exponential(&p.operator, p.duration, TimeKind::Real)?;
        t = p.start;
    }
    bare.evolve(&mut s, t, t_end)?;
    Ok(s)
}

/// `sum_j 2.31 |duration_j| |H| / strength`, with `|H|` the coefficient-sum bound.
pub fn bangbang_error_bound(schedule: &BangBangSchedule) -> f64 {
    let h = schedule.hamiltonian.spectral_norm_bound();
    schedule
        .pulses
        .iter()
        .map(|p| 2.31 * p.duration.abs() * h / schedule.strength)
        .sum()
}

/// Closed-form QITE cost estimates with all constants set to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResourceEstimate {
    /// Qubits in the QITE domain.
    pub domain_qubits: f64,
    /// Base-4 logarithm of the gate count.
    pub log4_gates: f64,
    /// Correlation length below which the domain stays smaller than `log N`.
    pub correlation_threshold: f64,
}

/// `k` terms of locality, correlation length `xi`, shift `tau`, target error
/// `eps`, lattice dimension `d` and register size `n`.
pub fn resource_estimate(k: f64, xi: f64, tau: f64, eps: f64, d: u32, n: f64) -> Result<ResourceEstimate> {
    if !(k > 0.0 && xi > 0.0 && tau >= 0.0 && eps > 0.0 && d > 0 && n > 0.0) {
        return Err(Error::Config("resource estimate inputs must be positive".into()));
    }
    let df = d as f64;
    let domain = k * (2.0 * xi * (2.0 * tau + (2.0 / eps).ln())).powf(df);
    Ok(ResourceEstimate {
        domain_qubits: domain,
        log4_gates: domain,
        correlation_threshold: (n.ln() / (2.0 * k * df)).powf(1.0 / df),
    })
}
