//! Dense statevector register.

use num_complex::Complex64;

use crate::error::{check_qubits, Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};

/// Which exponential `apply_pauli_exponential` realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeKind {
    /// `exp(-i tau P)`.
    Real,
    /// `exp(-tau P)`, renormalized.
    Imaginary,
}

/// Largest register the dense simulator will allocate.
pub const MAX_QUBITS: usize = 26;

/// Amplitudes over `2^n` basis states; qubit 0 is the most significant index bit.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
    norm_log: f64,
}

/// Action of a Pauli string on one basis index: `P|i> = factor(i) |i ^ flip>`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct StringAction {
    pub flip: usize,
    z: usize,
    base: Complex64,
}

impl StringAction {
    pub fn new(p: &PauliString) -> StringAction {
        let (flip, z, ny) = p.index_masks();
        let base = p.phase().to_complex() * crate::pauli::Phase::from_power(ny).to_complex();
        StringAction { flip, z, base }
    }

    #[inline]
    pub fn factor(&self, i: usize) -> Complex64 {
        if (i & self.z).count_ones() % 2 == 0 {
            self.base
        } else {
            -self.base
        }
    }
}

impl StateVector {
    fn check_size(n_qubits: usize) -> Result<()> {
        if n_qubits == 0 {
            return Err(Error::Config("register needs at least one qubit".into()));
        }
        if n_qubits > MAX_QUBITS {
            return Err(Error::Resource {
                what: "statevector qubits",
                requested: n_qubits,
                limit: MAX_QUBITS,
            });
        }
        Ok(())
    }

    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<StateVector> {
        StateVector::basis(n_qubits, 0)
    }

    /// Computational basis state by index (qubit 0 = most significant bit).
    pub fn basis(n_qubits: usize, index: usize) -> Result<StateVector> {
        Self::check_size(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Config(format!("basis index {index} outside {dim}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            n_qubits,
            amps,
            norm_log: 0.0,
        })
    }

    /// Basis state from a bit string such as `"0101"`, qubit 0 first.
    pub fn from_bits(bits: &str) -> Result<StateVector> {
        let mut index = 0usize;
        for c in bits.chars() {
            index = (index << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::Config(format!("bad bit {c:?}"))),
                };
        }
        StateVector::basis(bits.len(), index)
    }

    /// Tensor product of single-qubit states `a|0> + b|1>`, each normalized.
    pub fn product(qubits: &[[Complex64; 2]]) -> Result<StateVector> {
        let n = qubits.len();
        Self::check_size(n)?;
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for q in qubits {
            let norm = (q[0].norm_sqr() + q[1].norm_sqr()).sqrt();
            if norm == 0.0 {
                return Err(Error::Config("zero single-qubit state".into()));
            }
            let mut next = Vec::with_capacity(amps.len() * 2);
            for a in &amps {
                next.push(a * q[0] / norm);
                next.push(a * q[1] / norm);
            }
            amps = next;
        }
        Ok(StateVector {
            n_qubits: n,
            amps,
            norm_log: 0.0,
        })
    }

    /// `|+>^n`.
    pub fn plus(n_qubits: usize) -> Result<StateVector> {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        StateVector::product(&vec![[h, h]; n_qubits])
    }

    /// Wraps raw amplitudes, normalizing them.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<StateVector> {
        Self::check_size(n_qubits)?;
        if amps.len() != 1usize << n_qubits {
            return Err(Error::Config(format!(
                "{} amplitudes for {n_qubits} qubits",
                amps.len()
            )));
        }
        let mut s = StateVector {
            n_qubits,
            amps,
            norm_log: 0.0,
        };
        if s.normalize() == 0.0 {
            return Err(Error::State("zero vector".into()));
        }
        s.norm_log = 0.0;
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    /// Accumulated log of norms discarded by non-unitary maps.
    pub fn norm_log(&self) -> f64 {
        self.norm_log
    }

    pub fn reset_norm_log(&mut self) {
        self.norm_log = 0.0;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm, adds the log of the old norm to `norm_log`, returns the old norm.
    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.amps.iter_mut().for_each(|a| *a *= inv);
            self.norm_log += norm.ln();
        }
        norm
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_qubits(self.n_qubits, other.n_qubits)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|`.
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Applies any phased Pauli string (unitary, so no renormalization).
    pub fn apply_string(&mut self, p: &PauliString) -> Result<()> {
        check_qubits(self.n_qubits, p.n_qubits())?;
        let act = StringAction::new(p);
        if act.flip == 0 {
            for (i, a) in self.amps.iter_mut().enumerate() {
                *a *= act.factor(i);
            }
        } else {
            for i in 0..self.amps.len() {
                let j = i ^ act.flip;
                if i < j {
                    let (a, b) = (self.amps[i], self.amps[j]);
                    self.amps[j] = act.factor(i) * a;
                    self.amps[i] = act.factor(j) * b;
                }
            }
        }
        Ok(())
    }

    /// `O|psi>` as a raw (unnormalized) amplitude vector.
    pub fn apply_sum_raw(&self, o: &PauliSum) -> Result<Vec<Complex64>> {
        check_qubits(self.n_qubits, o.n_qubits())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (c, p) in o.terms() {
            let act = StringAction::new(p);
            for (i, a) in self.amps.iter().enumerate() {
                out[i ^ act.flip] += c * act.factor(i) * a;
            }
        }
        Ok(out)
    }

    /// `cos(tau) - i sin(tau) P` or `cosh(tau) - sinh(tau) P` (then renormalized).
    pub fn apply_pauli_exponential(
        &mut self,
        p: &PauliString,
        tau: f64,
        kind: TimeKind,
    ) -> Result<()> {
        check_qubits(self.n_qubits, p.n_qubits())?;
        if !p.is_hermitian() {
            return Err(Error::NotHermitian(p.to_string()));
        }
        let (diag, off) = match kind {
            TimeKind::Real => (
                Complex64::new(tau.cos(), 0.0),
                Complex64::new(0.0, -tau.sin()),
            ),
            TimeKind::Imaginary => (
                Complex64::new(tau.cosh(), 0.0),
                Complex64::new(-tau.sinh(), 0.0),
            ),
        };
        let act = StringAction::new(p);
        if act.flip == 0 {
            for (i, a) in self.amps.iter_mut().enumerate() {
                *a *= diag + off * act.factor(i);
            }
        } else {
            for i in 0..self.amps.len() {
                let j = i ^ act.flip;
                if i < j {
                    let (a, b) = (self.amps[i], self.amps[j]);
                    self.amps[i] = diag * a + off * act.factor(j) * b;
                    self.amps[j] = diag * b + off * act.factor(i) * a;
                }
            }
        }
        if kind == TimeKind::Imaginary {
            self.normalize();
        }
        Ok(())
    }

    /// Applies a 2x2 matrix `[[m00, m01], [m10, m11]]` to one qubit.
    pub fn apply_single_qubit(&mut self, site: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        if site >= self.n_qubits {
            return Err(Error::Config(format!("site {site} outside register")));
        }
        let bit = 1usize << (self.n_qubits - 1 - site);
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let j = i | bit;
                let (a, b) = (self.amps[i], self.amps[j]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[j] = m[1][0] * a + m[1][1] * b;
            }
        }
        Ok(())
    }

    /// `exp(-i theta Y / 2)` on one qubit.
    pub fn apply_ry(&mut self, site: usize, theta: f64) -> Result<()> {
        let (s, c) = (0.5 * theta).sin_cos();
        let c = Complex64::new(c, 0.0);
        let s = Complex64::new(s, 0.0);
        self.apply_single_qubit(site, [[c, -s], [s, c]])
    }

    /// `<psi|P|psi>` for any phased string.
    pub fn string_expectation(&self, p: &PauliString) -> Result<Complex64> {
        check_qubits(self.n_qubits, p.n_qubits())?;
        let act = StringAction::new(p);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| self.amps[i ^ act.flip].conj() * act.factor(i) * a)
            .sum())
    }

    /// `<psi|O|psi>` for a Hermitian sum.
    pub fn expectation(&self, o: &PauliSum) -> Result<f64> {
        o.require_hermitian()?;
        let mut acc = 0.0;
        for (c, p) in o.terms() {
            acc += c.re * self.string_expectation(p)?.re;
        }
        Ok(acc)
    }

    /// Per-term expectations `<P_k>` of a sum, in term order.
    pub fn term_expectations(&self, o: &PauliSum) -> Result<Vec<f64>> {
        o.terms()
            .iter()
            .map(|(_, p)| Ok(self.string_expectation(p)?.re))
            .collect()
    }

    /// Probability that qubit `site` reads `bit`.
    pub fn site_probability(&self, site: usize, bit: usize) -> Result<f64> {
        if site >= self.n_qubits {
            return Err(Error::Config(format!("site {site} outside register")));
        }
        let mask = 1usize << (self.n_qubits - 1 - site);
        let want = if bit == 0 { 0 } else { mask };
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == want)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            / self.norm_sqr())
    }

    /// Single-site expectation of X, Y or Z.
    pub fn site_expectation(&self, site: usize, p: Pauli) -> Result<f64> {
        let s = PauliString::single(self.n_qubits, site, p)?;
        Ok(self.string_expectation(&s)?.re)
    }
}
