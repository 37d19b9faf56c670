//! Shared strategies and dense helpers for the integration suites.
#![allow(dead_code)]

use correlator_core::dense::{CMatrix, CVector};
use correlator_core::pauli::{Pauli, PauliString, PauliSum, Phase};
use correlator_core::state::StateVector;
use correlator_core::Complex64;
use proptest::prelude::*;
use rand::Rng;
use correlator_core::models::build_tim;
use correlator_core::noise::*;
use correlator_core::spectral::*;
use std::f64::consts::{FRAC_PI_4, PI};

pub fn pauli() -> impl Strategy<Value = Pauli> {
    (0usize..4).prop_map(|i| Pauli::ALL[i])
}

pub fn string(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(pauli(), n), 0u32..4)
        .prop_map(|(letters, k)| PauliString::new(letters, Phase::from_power(k)).unwrap())
}

/// Hermitian string: phase restricted to +-1.
pub fn hermitian_string(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(pauli(), n), any::<bool>())
        .prop_map(|(letters, neg)| PauliString::new(letters, Phase::from_power(if neg { 2 } else { 0 })).unwrap())
}

pub fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b))
}

pub fn sum(n: usize, max_terms: usize) -> impl Strategy<Value = PauliSum> {
    prop::collection::vec((complex(), string(n)), 1..=max_terms)
        .prop_map(move |terms| PauliSum::from_terms(n, terms).unwrap())
}

pub fn hermitian_sum(n: usize, max_terms: usize) -> impl Strategy<Value = PauliSum> {
    prop::collection::vec((-1.0f64..1.0, hermitian_string(n)), 1..=max_terms)
        .prop_map(move |terms| PauliSum::from_real_terms(n, terms).unwrap())
}

pub fn state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec(complex(), 1 << n).prop_filter_map("zero vector", move |amps| {
        if amps.iter().map(|a| a.norm_sqr()).sum::<f64>() < 1e-3 {
            None
        } else {
            StateVector::from_amplitudes(n, amps).ok()
        }
    })
}

pub fn column(s: &StateVector) -> CVector {
    CVector::from_column_slice(s.amplitudes())
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn vec_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// `|<a|b>|^2` for normalized inputs.
pub fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
    a.inner(b).unwrap().norm_sqr() / (a.norm_sqr() * b.norm_sqr())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Antisymmetric two-mode signal `sum sin(E t) e^{-gamma t}` at energies
/// `center -+ gap / 2`, run through doubling, window and padded transform.
pub fn two_mode_spectrum(
    center: f64,
    gap: f64,
    gamma: f64,
    dt: f64,
    t_max: f64,
    window: correlator_core::spectral::WindowKind,
) -> correlator_core::spectral::Spectrum {
    use correlator_core::spectral::*;
    let n = (t_max / dt).round() as usize + 1;
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            (((center - gap / 2.0) * t).sin() + ((center + gap / 2.0) * t).sin()) * (-gamma * t).exp()
        })
        .collect();
    let series = SignalSeries::from_real(0.0, dt, &samples).unwrap();
    let doubled = double_signal(&series, Parity::Antisymmetric).unwrap();
    dft_padded(&apply_window(&doubled, window), 8).normalize()
}

/// Peaks within 3 of `center` on the positive axis, 5% threshold.
pub fn two_mode_peak_count(center: f64, gap: f64, gamma: f64, window: correlator_core::spectral::WindowKind) -> usize {
    let t_max = if gamma >= 0.1 { 40.0 } else { 120.0 };
    let spec = two_mode_spectrum(center, gap, gamma, 0.1, t_max, window);
    correlator_core::spectral::find_peaks(&spec, 0.05)
        .unwrap()
        .iter()
        .filter(|p| p.omega > 0.0 && (p.omega - center).abs() < 3.0)
        .count()
}

/// Ratio of the off-peak noise floor (relative to the peak) in a raw
/// magnitude spectrum to the same in the correlation-analysis spectrum,
/// averaged over `trials` noise draws. The signal is a unit sinusoid at
/// `omega0` plus independent complex white noise of width `sigma` in each copy.
pub fn correlation_suppression(m: usize, omega0: f64, sigma: f64, trials: u64) -> f64 {
    use correlator_core::noise::task_rng;
    use correlator_core::spectral::*;
    use rand_distr::StandardNormal;
    let dt = 0.1;
    let draw = |seed: u64, copy: u64| {
        let mut rng = task_rng(seed, copy);
        let samples = (0..m)
            .map(|i| {
                let t = i as f64 * dt;
                let n: (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                Complex64::from_polar(1.0, omega0 * t) + sigma * Complex64::new(n.0, n.1)
            })
            .collect();
        dft(&SignalSeries::new(0.0, dt, samples).unwrap())
    };
    let floor = |spec: &correlator_core::spectral::Spectrum, mags: &[f64]| {
        let peak = mags.iter().copied().fold(0.0, f64::max);
        let off: Vec<f64> = spec
            .omegas
            .iter()
            .zip(mags)
            .filter(|(w, _)| (*w - omega0).abs() > 1.0)
            .map(|(_, v)| *v)
            .collect();
        off.iter().sum::<f64>() / off.len() as f64 / peak
    };
    let mut ratio = 0.0;
    for seed in 0..trials {
        let (a, b) = (draw(seed, 0), draw(seed, 1));
        let raw = floor(&a, &a.magnitudes());
        let ca = correlation_analysis(&a, &b).unwrap();
        ratio += raw / floor(&ca, &ca.magnitudes());
    }
    ratio / trials as f64
}

/// Full width at half maximum of `Re F` by bisection on each side of the peak.
pub fn smearing_fwhm(gamma: f64, t: f64) -> f64 {
    let half = 0.5 * smearing_function(0.0, gamma, t).re;
    let edge = |sign: f64| {
        let (mut lo, mut hi) = (0.0, 50.0 * gamma.max(1.0 / t));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if smearing_function(sign * mid, gamma, t).re > half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    edge(1.0) + edge(-1.0)
}

pub fn single_pulse(strength: f64) -> BangBangSchedule {
    let pulse = Pulse { start: 0.3, duration: FRAC_PI_4, operator: PauliString::single(2, 0, Pauli::X).unwrap() };
    BangBangSchedule::new(strength, vec![pulse], build_tim(2).unwrap()).unwrap()
}

pub fn bangbang_errors(strengths: &[f64]) -> Vec<(f64, f64)> {
    let start = StateVector::from_bits("01").unwrap();
    strengths
        .iter()
        .map(|&s| {
            let sched = single_pulse(s);
            let real = simulate_bangbang(&sched, &start, 1.5).unwrap();
            let ideal = ideal_kicked_evolution(&sched, &start, 1.5).unwrap();
            (vec_distance(real.amplitudes(), ideal.amplitudes()), bangbang_error_bound(&sched))
        })
        .collect()
}

/// Nearest unpadded-grid bin of each detected positive-frequency peak.
pub fn peak_bins(spec: &Spectrum) -> Vec<i64> {
    let mut bins: Vec<i64> = find_peaks(spec, 0.2)
        .unwrap()
        .iter()
        .filter(|p| p.omega > 0.0)
        .map(|p| (p.omega / spec.spacing()).round() as i64)
        .collect();
    bins.sort();
    bins
}

pub fn weak_damping_keeps_peaks() -> bool {
    let (dt, t_max) = (0.1, 40.0);
    let n = (t_max / dt) as usize + 1;
    let resolution = 2.0 * PI / t_max;
    let make = |gamma: f64| {
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                ((1.0 * t).sin() + 0.7 * (2.2 * t).sin()) * (-gamma * t).exp()
            })
            .collect();
        dft(&double_signal(&SignalSeries::from_real(0.0, dt, &xs).unwrap(), Parity::Antisymmetric).unwrap())
    };
    let clean = peak_bins(&make(0.0));
    clean.len() == 2 && [0.25, 0.5, 0.99].iter().all(|f| peak_bins(&make(f * resolution / 4.0)) == clean)
}

pub fn random_product<R: Rng>(rng: &mut R, n: usize) -> StateVector {
    let qubits: Vec<[Complex64; 2]> = (0..n)
        .map(|_| {
            let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            [
                Complex64::new((theta / 2.0).cos(), 0.0),
                Complex64::from_polar((theta / 2.0).sin(), phi),
            ]
        })
        .collect();
    StateVector::product(&qubits).unwrap()
}

