//! Dense Heisenberg-picture reference values.
//!
//! Every quantity here is computed from full matrices and a full eigen-
//! decomposition of `H`, independently of the circuit machinery.

use num_complex::Complex64;

use crate::correlators::Sign;
use crate::dense::{sum_matrix, CMatrix, CVector, HermitianEigen};
use crate::error::{check_qubits, Error, Result};
use crate::pauli::PauliSum;
use crate::state::StateVector;

/// Default largest register the oracle accepts.
pub const DEFAULT_ORACLE_CAP: usize = 12;

/// Full eigendecomposition of a Hamiltonian.
pub struct DenseOracle {
    n_qubits: usize,
    eigen: HermitianEigen,
}

impl DenseOracle {
    pub fn new(h: &PauliSum, cap: usize) -> Result<DenseOracle> {
        if h.n_qubits() > cap {
            return Err(Error::Resource {
                what: "oracle qubits",
                requested: h.n_qubits(),
                limit: cap,
            });
        }
        h.require_hermitian()?;
        Ok(DenseOracle {
            n_qubits: h.n_qubits(),
            eigen: HermitianEigen::new(&sum_matrix(h)),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    /// `exp(-i H t)`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.eigen.propagator(t)
    }

    /// `U(t)^dagger O U(t)`.
    pub fn heisenberg(&self, o: &CMatrix, t: f64) -> CMatrix {
        let u = self.propagator(t);
        u.adjoint() * o * u
    }

    fn vector(&self, state: &StateVector) -> Result<CVector> {
        check_qubits(self.n_qubits, state.n_qubits())?;
        Ok(CVector::from_column_slice(state.amplitudes()))
    }

    /// `<phi| O_{n-1}(t_{n-1}) ... O_0(t_0) |phi>` with `O_j(t) = U^dagger(t - t_0) O_j U(t - t_0)`.
    pub fn correlator(
        &self,
        operators: &[PauliSum],
        times: &[f64],
        state: &StateVector,
    ) -> Result<Complex64> {
        if operators.len() != times.len() || operators.is_empty() {
            return Err(Error::Config("one time per operator is required".into()));
        }
        let phi = self.vector(state)?;
        let t0 = times[0];
        let mut v = phi.clone();
        for (o, &t) in operators.iter().zip(times) {
            check_qubits(self.n_qubits, o.n_qubits())?;
            let u = self.propagator(t - t0);
            v = u.adjoint() * (sum_matrix(o) * (&u * v));
        }
        Ok(phi.dotc(&v))
    }

    /// Dense nested bracket `[...[O_{n-1}(t_{n-1}), O_{n-2}]_{b_{n-2}} ..., O_0]_{b_0}` in `|phi>`.
    pub fn nested_bracket(
        &self,
        operators: &[CMatrix],
        times: &[f64],
        signs: &[Sign],
        state: &StateVector,
    ) -> Result<Complex64> {
        let n = operators.len();
        if times.len() != n || signs.len() + 1 != n {
            return Err(Error::Config("bracket needs n operators, n times and n-1 signs".into()));
        }
        let phi = self.vector(state)?;
        let t0 = times[0];
        let heis: Vec<CMatrix> = operators
            .iter()
            .zip(times)
            .map(|(o, &t)| self.heisenberg(o, t - t0))
            .collect();
        let mut b = heis[n - 1].clone();
        for j in (0..n - 1).rev() {
            let left = &b * &heis[j];
            let right = &heis[j] * &b;
            b = match signs[j] {
                Sign::Minus => left - right,
                Sign::Plus => left + right,
            };
        }
        Ok(phi.dotc(&(b * &phi)))
    }
}

/// One-shot oracle with the default register cap.
pub fn exact_correlator_oracle(
    operators: &[PauliSum],
    times: &[f64],
    state: &StateVector,
    h: &PauliSum,
) -> Result<Complex64> {
    exact_correlator_oracle_capped(operators, times, state, h, DEFAULT_ORACLE_CAP)
}

pub fn exact_correlator_oracle_capped(
    operators: &[PauliSum],
    times: &[f64],
    state: &StateVector,
    h: &PauliSum,
    cap: usize,
) -> Result<Complex64> {
    DenseOracle::new(h, cap)?.correlator(operators, times, state)
}
