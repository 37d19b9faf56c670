//! Model Hamiltonians, hadron operators and reference states.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{spin_hopping, Pauli, PauliString, PauliSum};
use crate::state::StateVector;

/// Truncated lattice Schwinger model on `2L` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwingerParams {
    /// Spatial sites; two qubits each.
    pub l: usize,
    /// Bare fermion mass.
    pub m: f64,
    /// Gauge coupling.
    pub g: f64,
}

impl Default for SchwingerParams {
    fn default() -> Self {
        SchwingerParams { l: 6, m: 0.5, g: 0.3 }
    }
}

impl SchwingerParams {
    pub fn validate(&self) -> Result<()> {
        if self.l < 2 || self.l % 2 != 0 {
            return Err(Error::Config(format!(
                "Schwinger lattice size must be even and at least 2, got {}",
                self.l
            )));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.l
    }
}

/// Staggered-hopping chain in spin language.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SshParams {
    pub l: usize,
    /// Mean hopping.
    pub v: f64,
    /// Hopping stagger.
    pub delta: f64,
    /// Chemical potential.
    pub mu: f64,
}

impl Default for SshParams {
    fn default() -> Self {
        SshParams {
            l: 12,
            v: 1.0,
            delta: 0.8,
            mu: -2.5,
        }
    }
}

impl SshParams {
    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::Config(format!("chain needs at least 2 sites, got {}", self.l)));
        }
        Ok(())
    }
}

/// Lattice momentum `k = 2 pi n / L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeMomentum {
    n: i64,
    l: usize,
}

impl LatticeMomentum {
    pub fn new(n: i64, l: usize) -> Result<LatticeMomentum> {
        let half = l as i64 / 2;
        if l == 0 || n < -half || n > half {
            return Err(Error::Config(format!("momentum index {n} outside [-{half}, {half}]")));
        }
        Ok(LatticeMomentum { n, l })
    }

    pub fn index(&self) -> i64 {
        self.n
    }

    pub fn k(&self) -> f64 {
        2.0 * PI * self.n as f64 / self.l as f64
    }

    /// Non-negative momenta `n = 0..=L/2`.
    pub fn non_negative(l: usize) -> Vec<LatticeMomentum> {
        (0..=(l as i64 / 2)).map(|n| LatticeMomentum { n, l }).collect()
    }
}

fn term(n: usize, c: f64, sites: &[(usize, Pauli)]) -> Result<(f64, PauliString)> {
    Ok((c, PauliString::from_sites(n, sites)?))
}

fn z(n: usize, q: usize, c: f64) -> Result<(f64, PauliString)> {
    term(n, c, &[(q, Pauli::Z)])
}

fn zz(n: usize, a: usize, b: usize, c: f64) -> Result<(f64, PauliString)> {
    term(n, c, &[(a, Pauli::Z), (b, Pauli::Z)])
}

/// `m/2 sum_j (-1)^j Z_j` over `2L` qubits.
pub fn mass_term(l: usize, m: f64) -> Result<PauliSum> {
    let n = 2 * l;
    let terms = (0..n)
        .map(|j| z(n, j, 0.5 * m * if j % 2 == 0 { 1.0 } else { -1.0 }))
        .collect::<Result<Vec<_>>>()?;
    PauliSum::from_real_terms(n, terms)
}

/// Electric energy truncated to next-next-nearest-neighbour couplings.
fn truncated_electric(l: usize, g: f64) -> Result<PauliSum> {
    let n = 2 * l;
    let half = l / 2;
    let lf = l as f64;
    let mut t = Vec::new();
    // on-site pairs of the left and right halves
    for j in 0..half {
        let jf = j as f64;
        t.push(zz(n, 2 * j, 2 * j + 1, lf / 2.0 - 0.75 - jf)?);
        t.push(zz(n, l + 2 * j, l + 2 * j + 1, jf + 0.25)?);
    }
    // bulk linear terms
    for j in 1..half.saturating_sub(1) {
        t.push(z(n, 2 * j, 1.0)?);
        t.push(z(n, 2 * j + 1, 0.5)?);
        t.push(z(n, l + 2 * j, -0.5)?);
        t.push(z(n, l + 2 * j + 1, -1.0)?);
    }
    // boundary linear terms
    t.push(z(n, 0, 1.0)?);
    t.push(z(n, 1, 0.5)?);
    t.push(z(n, l - 2, 0.5)?);
    t.push(z(n, l + 1, -0.5)?);
    t.push(z(n, 2 * l - 2, -0.5)?);
    t.push(z(n, 2 * l - 1, -1.0)?);
    // couplings reaching into the next site
    for j in 0..half.saturating_sub(1) {
        let jf = j as f64;
        for a in [2 * j, 2 * j + 1] {
            t.push(zz(n, a, 2 * j + 2, lf / 2.0 - 1.25 - jf)?);
            t.push(zz(n, a, 2 * j + 3, lf / 2.0 - 1.75 - jf)?);
        }
        for a in [l + 2 * j + 2, l + 2 * j + 3] {
            t.push(zz(n, a, l + 2 * j, jf + 0.25)?);
            t.push(zz(n, a, l + 2 * j + 1, jf + 0.75)?);
        }
    }
    Ok(PauliSum::from_real_terms(n, t)?.scale_real(0.5 * g * g))
}

/// Mass, kinetic and truncated electric terms on `2L` qubits.
pub fn build_schwinger_truncated(p: &SchwingerParams) -> Result<PauliSum> {
    p.validate()?;
    let n = p.n_qubits();
    let mut h = mass_term(p.l, p.m)?;
    for j in 0..n - 1 {
        h = h.add(&spin_hopping(n, j, j + 1)?.scale_real(0.5))?;
    }
    h.add(&truncated_electric(p.l, p.g)?)
}

/// `-sum_j (v + (-1)^j delta/2)(s+_j s-_{j+1} + h.c.) + (mu/2) sum_j Z_j`.
pub fn build_ssh(p: &SshParams) -> Result<PauliSum> {
    p.validate()?;
    let n = p.l;
    let mut h = PauliSum::zero(n);
    for j in 0..n - 1 {
        let t = p.v + if j % 2 == 0 { 0.5 * p.delta } else { -0.5 * p.delta };
        h = h.add(&spin_hopping(n, j, j + 1)?.scale_real(-t))?;
    }
    let zs = (0..n).map(|j| z(n, j, 0.5 * p.mu)).collect::<Result<Vec<_>>>()?;
    h.add(&PauliSum::from_real_terms(n, zs)?)
}

/// `-sum_j X_j X_{j+1} - sum_j Z_j` with open boundaries.
pub fn build_tim(l: usize) -> Result<PauliSum> {
    if l < 2 {
        return Err(Error::Config(format!("chain needs at least 2 sites, got {l}")));
    }
    let mut t = Vec::new();
    for j in 0..l - 1 {
        t.push(term(l, -1.0, &[(j, Pauli::X), (j + 1, Pauli::X)])?);
    }
    for j in 0..l {
        t.push(z(l, j, -1.0)?);
    }
    PauliSum::from_real_terms(l, t)
}

/// Hermitian hopping generator `(X_{2j} X_{2j+1} + Y_{2j} Y_{2j+1})/2` on `2L` qubits.
/// The hadron operator is `-i` times this.
pub fn hadron_generator(l: usize, j: usize) -> Result<PauliSum> {
    if j >= l {
        return Err(Error::Config(format!("site {j} outside lattice of {l}")));
    }
    spin_hopping(2 * l, 2 * j, 2 * j + 1)
}

/// Anti-Hermitian hadron operator `-i (s+_{2j} s-_{2j+1} + h.c.)`.
pub fn hadron_operator(l: usize, j: usize) -> Result<PauliSum> {
    Ok(hadron_generator(l, j)?.scale(Complex64::new(0.0, -1.0)))
}

/// Reference site at the chain centre, `ceil(L/2)`.
pub fn central_site(l: usize) -> usize {
    l.div_ceil(2)
}

/// Sites and phases `e^{-ik(j + j0)}` whose weighted commutators sum to the projected correlator.
pub fn momentum_hadron_correlator_spec(
    k: LatticeMomentum,
    j0: usize,
    l: usize,
) -> Result<Vec<(usize, Complex64)>> {
    if j0 >= l {
        return Err(Error::Config(format!("reference site {j0} outside lattice of {l}")));
    }
    Ok((0..l)
        .map(|j| {
            let phase = -k.k() * (j + j0) as f64;
            (j, Complex64::new(phase.cos(), phase.sin()))
        })
        .collect())
}

/// Lowest-energy basis state of a Hamiltonian made of single-site Z terms.
pub fn single_site_z_ground_state(h: &PauliSum) -> Result<StateVector> {
    let n = h.n_qubits();
    let mut field = vec![0.0; n];
    for (c, s) in h.terms() {
        let sup = s.support();
        match sup.as_slice() {
            [] => {}
            [q] if s.letter(*q) == Pauli::Z => field[*q] += c.re,
            _ => {
                return Err(Error::Config(format!(
                    "{} is not a single-site Z term",
                    s.letter_string()
                )))
            }
        }
    }
    // positive field favours Z = -1, i.e. |1>
    let bits: String = field.iter().map(|&f| if f > 0.0 { '1' } else { '0' }).collect();
    StateVector::from_bits(&bits)
}

/// Ground state of the mass term with positive mass.
pub fn bare_vacuum(l: usize) -> Result<StateVector> {
    single_site_z_ground_state(&mass_term(l, 1.0)?)
}

pub fn plus_state(l: usize) -> Result<StateVector> {
    StateVector::plus(l)
}

pub fn zero_state(l: usize) -> Result<StateVector> {
    StateVector::zero(l)
}
