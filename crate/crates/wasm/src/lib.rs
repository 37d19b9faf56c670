//! Browser bindings: OTOC curves, smearing profiles and small SSH spectra.
//!
//! Every exported function returns a flat `Float64Array` of interleaved
//! columns so the page can plot without any glue code.

use correlator_core::correlators::{otoc, BracketSettings, ExactEstimator, ShiftTimes, SlotOperator};
use correlator_core::correlators::{nested_bracket, BracketSpec, FinalObservable, Sign};
use correlator_core::evolution::{EvolutionBackend, Evolver, TrotterOrder};
use correlator_core::models::{build_ssh, build_tim, plus_state, zero_state, SshParams};
use correlator_core::noise::smearing_function;
use correlator_core::pauli::{Pauli, PauliString, PauliSum};
use correlator_core::qite::QiteVariant;
use correlator_core::spectral::{dft_padded, double_signal, find_peaks, Parity, SignalSeries};
use wasm_bindgen::prelude::*;

const MAX_DEMO_QUBITS: usize = 10;

fn steps(t_max: f64, dt: f64) -> Result<usize, String> {
    if !(dt > 0.0 && t_max >= 0.0) {
        return Err("time step must be positive and the span non-negative".into());
    }
    Ok((t_max / dt).round() as usize + 1)
}

/// `[t, Re F, Im F]` rows for the Ising chain with `V = Z_0`, `W = X_{L-1}`.
pub fn otoc_rows(l: usize, dt: f64, t_max: f64) -> Result<Vec<f64>, String> {
    if !(2..=MAX_DEMO_QUBITS).contains(&l) {
        return Err(format!("chain length must be in 2..={MAX_DEMO_QUBITS}"));
    }
    let n = steps(t_max, dt)?;
    let err = |e: correlator_core::Error| e.to_string();
    let evolver = Evolver::new(EvolutionBackend::trotter(build_tim(l).map_err(err)?, TrotterOrder::First, dt)).map_err(err)?;
    let v = PauliString::single(l, 0, Pauli::Z).map_err(err)?;
    let w = PauliString::single(l, l - 1, Pauli::X).map_err(err)?;
    let state = plus_state(l).map_err(err)?;
    let settings = BracketSettings {
        evolver: &evolver,
        shifts: ShiftTimes::default(),
        qite: QiteVariant::Analytic,
    };
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        let t = i as f64 * dt;
        let f = otoc(&w, &v, t, &state, &settings, &mut ExactEstimator).map_err(err)?;
        out.extend([t, f.re, f.im]);
    }
    Ok(out)
}

/// `[omega, Re F(omega)]` rows of the smearing function.
pub fn smearing_rows(gamma: f64, t_max: f64, omega_max: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(gamma >= 0.0 && t_max > 0.0 && omega_max > 0.0 && points >= 2) {
        return Err("need gamma >= 0, positive span and range, and at least two points".into());
    }
    let mut out = Vec::with_capacity(2 * points);
    for i in 0..points {
        let w = -omega_max + 2.0 * omega_max * i as f64 / (points - 1) as f64;
        out.extend([w, smearing_function(w, gamma, t_max).re]);
    }
    Ok(out)
}

/// `[omega, normalized magnitude]` rows of the SSH fermionic spectrum at
/// momentum index `n` on an `l`-site chain, plus the detected peaks appended
/// as `[omega, height]` rows after a `[NaN, NaN]` separator.
pub fn ssh_rows(l: usize, delta: f64, n: i64, dt: f64, t_max: f64) -> Result<Vec<f64>, String> {
    if !(2..=MAX_DEMO_QUBITS).contains(&l) {
        return Err(format!("chain length must be in 2..={MAX_DEMO_QUBITS}"));
    }
    let count = steps(t_max, dt)?;
    let err = |e: correlator_core::Error| e.to_string();
    let params = SshParams {
        l,
        delta,
        ..SshParams::default()
    };
    let evolver = Evolver::new(EvolutionBackend::trotter(build_ssh(&params).map_err(err)?, TrotterOrder::First, dt)).map_err(err)?;
    let k = 2.0 * std::f64::consts::PI * n as f64 / l as f64;
    let terms: Vec<(f64, PauliString)> = (0..l)
        .map(|j| Ok(((k * j as f64).cos(), PauliString::single(l, j, Pauli::X)?)))
        .collect::<Result<_, correlator_core::Error>>()
        .map_err(err)?;
    let o0 = PauliSum::from_real_terms(l, terms).map_err(err)?;
    let y0 = PauliSum::from_string(&PauliString::single(l, 0, Pauli::Y).map_err(err)?);
    let state = zero_state(l).map_err(err)?;
    let mut samples = Vec::with_capacity(count);
    for i in 0..count {
        let spec = BracketSpec {
            operators: vec![SlotOperator::Commuting(o0.clone())],
            observables: vec![FinalObservable::Sum(y0.clone())],
            times: vec![0.0, i as f64 * dt],
            signs: vec![Sign::Plus],
            initial_state: state.clone(),
            evolver: &evolver,
            shifts: ShiftTimes {
                tau_plus: 0.1,
                ..ShiftTimes::default()
            },
            qite: QiteVariant::Analytic,
        };
        let c = if o0.is_empty() {
            0.0
        } else {
            0.5 * nested_bracket(&spec, &mut ExactEstimator).map_err(err)?.re
        };
        samples.push(c);
    }
    let series = SignalSeries::from_real(0.0, dt, &samples).map_err(err)?;
    let spectrum = dft_padded(&double_signal(&series, Parity::Antisymmetric).map_err(err)?, 8).normalize();
    let mut out = Vec::new();
    for (w, m) in spectrum.omegas.iter().zip(spectrum.magnitudes()) {
        if *w >= 0.0 {
            out.extend([*w, m]);
        }
    }
    out.extend([f64::NAN, f64::NAN]);
    for p in find_peaks(&spectrum, 0.1).map_err(err)?.into_iter().filter(|p| p.omega > 0.0) {
        out.extend([p.omega, p.height]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn otoc_curve(l: usize, dt: f64, t_max: f64) -> Result<Vec<f64>, JsError> {
    otoc_rows(l, dt, t_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn smearing_profile(gamma: f64, t_max: f64, omega_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    smearing_rows(gamma, t_max, omega_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ssh_spectrum(l: usize, delta: f64, n: i64, dt: f64, t_max: f64) -> Result<Vec<f64>, JsError> {
    ssh_rows(l, delta, n, dt, t_max).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn otoc_starts_at_one() {
        let rows = otoc_rows(4, 0.2, 1.0).unwrap();
        assert_eq!(rows.len(), 18);
        assert!((rows[1] - 1.0).abs() < 1e-12 && rows[2].abs() < 1e-12);
    }

    #[test]
    fn smearing_peak_at_zero() {
        let rows = smearing_rows(1.0, 50.0, 5.0, 101).unwrap();
        let (i, _) = rows
            .chunks(2)
            .enumerate()
            .max_by(|a, b| a.1[1].total_cmp(&b.1[1]))
            .unwrap();
        assert_eq!(i, 50);
    }

    #[test]
    fn ssh_has_peaks() {
        let rows = ssh_rows(8, 0.8, 2, 0.4, 12.0).unwrap();
        let sep = rows.chunks(2).position(|r| r[0].is_nan()).unwrap();
        assert!(rows.len() / 2 > sep + 1);
    }

    #[test]
    fn rejects_large_chains() {
        assert!(otoc_rows(20, 0.2, 1.0).is_err());
    }
}
