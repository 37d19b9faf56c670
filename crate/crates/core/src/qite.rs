//! Imaginary-time evolution: dense oracle, analytic single-qubit rotations,
//! unitary approximation through the `M a = V` system, and projection.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{sum_matrix, CVector, HermitianEigen};
use crate::error::{check_qubits, Error, Result};
use crate::oracle::DEFAULT_ORACLE_CAP;
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::state::{StateVector, TimeKind};

/// Shift that makes `sinh(2 tau) = 1`.
pub fn default_tau_plus() -> f64 {
    0.5 * (1.0 + 2f64.sqrt()).ln()
}

/// Shift that makes `sin(2 tau) = 1`.
pub fn default_tau_minus() -> f64 {
    std::f64::consts::FRAC_PI_4
}

pub const DEFAULT_REGULARIZATION: f64 = 1e-8;

/// Largest neighbourhood the unitary solver accepts.
pub const MAX_DOMAIN: usize = 6;

/// Settings for the unitary realization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QiteConfig {
    pub total_tau: f64,
    pub steps: usize,
    pub domain_radius: usize,
    pub regularization: f64,
}

impl QiteConfig {
    pub fn new(total_tau: f64, steps: usize) -> QiteConfig {
        QiteConfig {
            total_tau,
            steps,
            domain_radius: 0,
            regularization: DEFAULT_REGULARIZATION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("QITE needs at least one step".into()));
        }
        if !(self.regularization >= 0.0) {
            return Err(Error::Config("regularization must be non-negative".into()));
        }
        Ok(())
    }
}

/// Normalized `exp(-tau O)|psi>` through a dense eigendecomposition of `O`.
pub fn nonunitary_oracle(state: &StateVector, o: &PauliSum, tau: f64) -> Result<StateVector> {
    check_qubits(state.n_qubits(), o.n_qubits())?;
    o.require_hermitian()?;
    if o.n_qubits() > DEFAULT_ORACLE_CAP {
        return Err(Error::Resource {
            what: "oracle qubits",
            requested: o.n_qubits(),
            limit: DEFAULT_ORACLE_CAP,
        });
    }
    let eig = HermitianEigen::new(&sum_matrix(o));
    // shift by the extreme eigenvalue so large |tau| does not overflow
    let shift = if tau >= 0.0 {
        eig.values.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        eig.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    let prop = eig.apply_function(|e| Complex64::new((-tau * (e - shift)).exp(), 0.0));
    let v = prop * CVector::from_column_slice(state.amplitudes());
    StateVector::from_amplitudes(state.n_qubits(), v.iter().copied().collect())
}

/// Which product state the analytic rotation expects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnalyticAxis {
    /// `exp(-tau X)` on a site in `|0>`.
    XOnZero,
    /// `exp(-tau Z)` on a site in `|+>`.
    ZOnPlus,
}

/// R_Y angle reproducing the normalized imaginary-time map.
pub fn analytic_angle(axis: AnalyticAxis, tau: f64) -> f64 {
    match axis {
        AnalyticAxis::XOnZero => -2.0 * tau.tanh().atan(),
        AnalyticAxis::ZOnPlus => 2.0 * (2.0 * tau).exp().atan() - std::f64::consts::FRAC_PI_2,
    }
}

/// Per-site angle for `exp(-tau sum_j cos(k j) X_j)` on `|0...0>`.
pub fn momentum_site_angle(k: f64, site: usize, tau: f64) -> f64 {
    analytic_angle(AnalyticAxis::XOnZero, tau * (k * site as f64).cos())
}

const PRODUCT_TOL: f64 = 1e-9;

/// Applies `R_Y(theta)` with the analytic angle, after checking the site is in the expected state.
pub fn analytic_single_qubit_qite(
    state: &StateVector,
    axis: AnalyticAxis,
    site: usize,
    tau: f64,
) -> Result<StateVector> {
    let (letter, name) = match axis {
        AnalyticAxis::XOnZero => (Pauli::Z, "|0>"),
        AnalyticAxis::ZOnPlus => (Pauli::X, "|+>"),
    };
    let v = state.site_expectation(site, letter)?;
    if 1.0 - v > PRODUCT_TOL {
        return Err(Error::State(format!("site {site} is not in {name}")));
    }
    let mut out = state.clone();
    out.apply_ry(site, analytic_angle(axis, tau))?;
    Ok(out)
}

/// Result of one unitary imaginary-time step.
#[derive(Clone, Debug)]
pub struct UnitaryStep {
    pub state: StateVector,
    /// Generator coefficients `a_l` over the domain basis.
    pub coefficients: Vec<(PauliString, f64)>,
    /// Set when the regularization term dominated the solve.
    pub ill_conditioned: bool,
}

/// Sites within `radius` of the support, clipped to the register.
pub fn qite_domain(sigma: &PauliString, radius: usize) -> Vec<usize> {
    let n = sigma.n_qubits();
    let mut sites: Vec<usize> = sigma
        .support()
        .iter()
        .flat_map(|&q| q.saturating_sub(radius)..=(q + radius).min(n - 1))
        .collect();
    sites.sort_unstable();
    sites.dedup();
    sites
}

/// Every non-identity Pauli string supported on `domain`, in canonical order.
pub fn domain_basis(n_qubits: usize, domain: &[usize]) -> Vec<PauliString> {
    let count = 1usize << (2 * domain.len());
    let mut out: Vec<PauliString> = (1..count)
        .map(|code| {
            let sites: Vec<(usize, Pauli)> = domain
                .iter()
                .enumerate()
                .map(|(k, &q)| (q, Pauli::ALL[(code >> (2 * k)) & 3]))
                .filter(|(_, p)| *p != Pauli::I)
                .collect();
            PauliString::from_sites(n_qubits, &sites).expect("sites are in range")
        })
        .collect();
    out.sort_by(|a, b| a.letters().cmp(b.letters()));
    out
}

/// One step `exp(-i dtau A)` with `A = sum_l a_l sigma_l` solving the regularized `M a = V`.
pub fn qite_step_unitary(
    state: &StateVector,
    sigma: &PauliString,
    dtau: f64,
    cfg: &QiteConfig,
) -> Result<UnitaryStep> {
    check_qubits(state.n_qubits(), sigma.n_qubits())?;
    if !sigma.is_hermitian() {
        return Err(Error::NotHermitian(sigma.to_string()));
    }
    let domain = qite_domain(sigma, cfg.domain_radius);
    if domain.len() > MAX_DOMAIN {
        return Err(Error::Resource {
            what: "unitary QITE domain sites",
            requested: domain.len(),
            limit: MAX_DOMAIN,
        });
    }
    let n = state.n_qubits();
    let basis = domain_basis(n, &domain);
    if dtau == 0.0 || basis.is_empty() {
        return Ok(UnitaryStep {
            state: state.clone(),
            coefficients: basis.into_iter().map(|s| (s, 0.0)).collect(),
            ill_conditioned: false,
        });
    }
    // expectations of every string on the domain, including identity
    let mut table = std::collections::HashMap::with_capacity(basis.len() + 1);
    table.insert(PauliString::identity(n), Complex64::new(1.0, 0.0));
    for s in &basis {
        table.insert(s.clone(), state.string_expectation(s)?);
    }
    let lookup = |p: &PauliString| -> Complex64 {
        p.phase().to_complex() * table[&p.phase_free()]
    };
    let m = basis.len();
    let mut mat = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate().skip(i) {
            let v = lookup(&a.multiply(b)?).re;
            mat[(i, j)] = v;
            mat[(j, i)] = v;
        }
        rhs[i] = lookup(&a.multiply(sigma)?).im;
    }
    for i in 0..m {
        mat[(i, i)] += cfg.regularization;
    }
    let (coeffs, ill_conditioned) = match mat.clone().cholesky() {
        Some(ch) => {
            let pivot = ch.l_dirty().diagonal().iter().fold(f64::INFINITY, |a, &b| a.min(b * b));
            (ch.solve(&rhs), pivot < 1e3 * cfg.regularization.max(f64::EPSILON))
        }
        None => {
            let svd = mat.svd(true, true);
            let sol = svd
                .solve(&rhs, 1e-12)
                .map_err(|e| Error::Internal(format!("least-squares solve failed: {e}")))?;
            (sol, true)
        }
    };
    let mut out = state.clone();
    for (s, &a) in basis.iter().zip(coeffs.iter()) {
        let angle = dtau * a;
        if angle.abs() > 1e-15 {
            out.apply_pauli_exponential(s, angle, TimeKind::Real)?;
        }
    }
    Ok(UnitaryStep {
        state: out,
        coefficients: basis.into_iter().zip(coeffs.iter().copied()).collect(),
        ill_conditioned,
    })
}

/// `cfg.steps` unitary steps of size `total_tau / steps`. Returns the state and
/// whether any step was ill-conditioned.
pub fn qite_unitary(
    state: &StateVector,
    sigma: &PauliString,
    cfg: &QiteConfig,
) -> Result<(StateVector, bool)> {
    cfg.validate()?;
    let dtau = cfg.total_tau / cfg.steps as f64;
    let mut s = state.clone();
    let mut flagged = false;
    for _ in 0..cfg.steps {
        let step = qite_step_unitary(&s, sigma, dtau, cfg)?;
        flagged |= step.ill_conditioned;
        s = step.state;
    }
    Ok((s, flagged))
}

/// Projection onto the `sign` eigenspace of `sigma`, with its Born probability.
pub fn qite_projective(
    state: &StateVector,
    sigma: &PauliString,
    sign: i8,
) -> Result<(StateVector, f64)> {
    check_qubits(state.n_qubits(), sigma.n_qubits())?;
    if !sigma.is_hermitian() {
        return Err(Error::NotHermitian(sigma.to_string()));
    }
    let s = if sign >= 0 { 1.0 } else { -1.0 };
    let mut flipped = state.clone();
    flipped.apply_string(sigma)?;
    let amps: Vec<Complex64> = state
        .amplitudes()
        .iter()
        .zip(flipped.amplitudes())
        .map(|(a, b)| 0.5 * (a + s * b))
        .collect();
    let prob: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>() / state.norm_sqr();
    if prob < 1e-14 {
        return Err(Error::Projection);
    }
    Ok((StateVector::from_amplitudes(state.n_qubits(), amps)?, prob))
}

/// How a `+` gate (normalized imaginary-time map) is realized in a circuit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QiteVariant {
    /// Exact normalized exponential of the Pauli string.
    Oracle,
    /// R_Y rotation for a single-site X on `|0>` or Z on `|+>`.
    Analytic,
    /// Unitary steps from the linear system.
    Unitary {
        steps: usize,
        domain_radius: usize,
    },
    /// Infinite-shift limit realized by projective measurement.
    Projective,
}

impl QiteVariant {
    /// Normalized `exp(-tau P)` for a finite shift. Not defined for the projective variant.
    pub fn apply(&self, state: &mut StateVector, p: &PauliString, tau: f64) -> Result<()> {
        match *self {
            QiteVariant::Oracle => state.apply_pauli_exponential(p, tau, TimeKind::Imaginary),
            QiteVariant::Analytic => {
                let sign = p.sign()?;
                let support = p.support();
                let axis = match support.as_slice() {
                    [q] if p.letter(*q) == Pauli::X => (AnalyticAxis::XOnZero, *q),
                    [q] if p.letter(*q) == Pauli::Z => (AnalyticAxis::ZOnPlus, *q),
                    _ => {
                        return Err(Error::Config(format!(
                            "analytic QITE needs a single-site X or Z, got {p}"
                        )))
                    }
                };
                *state = analytic_single_qubit_qite(state, axis.0, axis.1, sign * tau)?;
                Ok(())
            }
            QiteVariant::Unitary {
                steps,
                domain_radius,
            } => {
                let cfg = QiteConfig {
                    total_tau: tau,
                    steps,
                    domain_radius,
                    regularization: DEFAULT_REGULARIZATION,
                };
                *state = qite_unitary(state, p, &cfg)?.0;
                Ok(())
            }
            QiteVariant::Projective => Err(Error::Config(
                "projective QITE has no finite-shift realization".into(),
            )),
        }
    }
}
