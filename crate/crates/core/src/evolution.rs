//! Hamiltonian time evolution: product-formula (Trotter) and exact block diagonalization.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{CMatrix, HermitianEigen};
use crate::error::{check_qubits, Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::state::{StateVector, StringAction, TimeKind};

/// Product-formula order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrotterOrder {
    First,
    Second,
}

impl TrotterOrder {
    pub fn from_int(p: u32) -> Result<TrotterOrder> {
        match p {
            1 => Ok(TrotterOrder::First),
            2 => Ok(TrotterOrder::Second),
            _ => Err(Error::Config(format!("Trotter order must be 1 or 2, got {p}"))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            TrotterOrder::First => 1,
            TrotterOrder::Second => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EvolutionKind {
    Trotter { order: TrotterOrder, dt: f64 },
    Exact,
}

/// A Hamiltonian plus the way it is exponentiated.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionBackend {
    pub kind: EvolutionKind,
    pub hamiltonian: PauliSum,
}

impl EvolutionBackend {
    pub fn trotter(hamiltonian: PauliSum, order: TrotterOrder, dt: f64) -> EvolutionBackend {
        EvolutionBackend {
            kind: EvolutionKind::Trotter { order, dt },
            hamiltonian,
        }
    }

    pub fn exact(hamiltonian: PauliSum) -> EvolutionBackend {
        EvolutionBackend {
            kind: EvolutionKind::Exact,
            hamiltonian,
        }
    }
}

/// Splits a Hamiltonian into commuting single-basis groups, in application order:
/// the diagonal part (I/Z letters only), then X-only strings, then Y-only
/// strings, then everything else. Each group keeps canonical order.
pub fn trotter_groups(h: &PauliSum) -> (PauliSum, Vec<(f64, PauliString)>) {
    let only = |s: &PauliString, p: Pauli| s.letters().iter().all(|&l| l == Pauli::I || l == p);
    let mut diag = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut rest = Vec::new();
    for (c, s) in h.terms() {
        let entry = (c.re, s.clone());
        if only(s, Pauli::Z) {
            diag.push(entry);
        } else if only(s, Pauli::X) {
            xs.push(entry);
        } else if only(s, Pauli::Y) {
            ys.push(entry);
        } else {
            rest.push(entry);
        }
    }
    let diag = PauliSum::from_real_terms(h.n_qubits(), diag).expect("same size");
    xs.extend(ys);
    xs.extend(rest);
    (diag, xs)
}

#[derive(Clone, Debug)]
enum Step {
    /// `exp(-i tau D)` for the diagonal group.
    Diagonal(f64),
    /// `exp(-i angle P)`.
    Rotation(f64, PauliString),
}

#[derive(Clone, Debug)]
struct TrotterPlan {
    dt: f64,
    diagonal: Vec<f64>,
    steps: Vec<Step>,
}

impl TrotterPlan {
    fn new(h: &PauliSum, order: TrotterOrder, dt: f64) -> TrotterPlan {
        let (diag, others) = trotter_groups(h);
        let dim = 1usize << h.n_qubits();
        let mut diagonal = vec![0.0; dim];
        for (c, p) in diag.terms() {
            let act = StringAction::new(p);
            for (i, e) in diagonal.iter_mut().enumerate() {
                *e += c.re * act.factor(i).re;
            }
        }
        let has_diag = !diag.is_empty();
        let mut steps = Vec::new();
        match order {
            TrotterOrder::First => {
                if has_diag {
                    steps.push(Step::Diagonal(dt));
                }
                for (c, p) in &others {
                    steps.push(Step::Rotation(c * dt, p.clone()));
                }
            }
            TrotterOrder::Second => {
                let half = 0.5 * dt;
                if has_diag {
                    steps.push(Step::Diagonal(half));
                }
                for (c, p) in &others {
                    steps.push(Step::Rotation(c * half, p.clone()));
                }
                for (c, p) in others.iter().rev() {
                    steps.push(Step::Rotation(c * half, p.clone()));
                }
                if has_diag {
                    steps.push(Step::Diagonal(half));
                }
            }
        }
        TrotterPlan {
            dt,
            diagonal,
            steps,
        }
    }

    fn apply_step(&self, state: &mut StateVector, step: &Step, sign: f64) -> Result<()> {
        match step {
            Step::Diagonal(tau) => {
                let tau = sign * tau;
                for (a, e) in state.amplitudes_mut().iter_mut().zip(&self.diagonal) {
                    *a *= Complex64::new(0.0, -e * tau).exp();
                }
                Ok(())
            }
            Step::Rotation(angle, p) => {
                state.apply_pauli_exponential(p, sign * angle, TimeKind::Real)
            }
        }
    }

    fn run(&self, state: &mut StateVector, n_steps: usize, forward: bool) -> Result<()> {
        for _ in 0..n_steps {
            if forward {
                for step in &self.steps {
                    self.apply_step(state, step, 1.0)?;
                }
            } else {
                for step in self.steps.iter().rev() {
                    self.apply_step(state, step, -1.0)?;
                }
            }
        }
        Ok(())
    }
}

/// One invariant block of a Hamiltonian.
#[derive(Clone, Debug)]
struct Block {
    indices: Vec<usize>,
    values: Vec<f64>,
    vectors: CMatrix,
}

/// Eigendecomposition of a Hamiltonian, block by block over the connected
/// components of its basis-state graph.
#[derive(Clone, Debug)]
pub struct ExactEigensystem {
    n_qubits: usize,
    blocks: Vec<Block>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

impl ExactEigensystem {
    pub fn new(h: &PauliSum) -> Result<ExactEigensystem> {
        h.require_hermitian()?;
        let n = h.n_qubits();
        let dim = 1usize << n;
        let actions: Vec<(f64, StringAction)> = h
            .terms()
            .iter()
            .map(|(c, p)| (c.re, StringAction::new(p)))
            .collect();
        let mut flips: Vec<usize> = actions.iter().map(|(_, a)| a.flip).collect();
        flips.sort_unstable();
        flips.dedup();
        let groups: Vec<(usize, Vec<(f64, StringAction)>)> = flips
            .iter()
            .map(|&f| (f, actions.iter().filter(|(_, a)| a.flip == f).copied().collect()))
            .collect();
        // terms sharing a flip mask can cancel, as XX + YY does on |00>
        let element = |terms: &[(f64, StringAction)], i: usize| -> Complex64 {
            terms.iter().map(|(c, a)| a.factor(i) * *c).sum()
        };
        let mut parent: Vec<usize> = (0..dim).collect();
        for (f, terms) in groups.iter().filter(|(f, _)| *f != 0) {
            for i in 0..dim {
                if element(terms, i).norm() < PauliSum::DUST {
                    continue;
                }
                let (a, b) = (find(&mut parent, i), find(&mut parent, i ^ f));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut root_block = vec![usize::MAX; dim];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for i in 0..dim {
            let r = find(&mut parent, i);
            if root_block[r] == usize::MAX {
                root_block[r] = members.len();
                members.push(Vec::new());
            }
            members[root_block[r]].push(i);
        }
        let mut local = vec![0usize; dim];
        let mut blocks = Vec::with_capacity(members.len());
        for indices in members {
            for (k, &i) in indices.iter().enumerate() {
                local[i] = k;
            }
            let m = indices.len();
            let mut mat = CMatrix::zeros(m, m);
            for (col, &i) in indices.iter().enumerate() {
                for (f, terms) in &groups {
                    let v = element(terms, i);
                    if v.norm() >= PauliSum::DUST {
                        mat[(local[i ^ f], col)] += v;
                    }
                }
            }
            let eig = HermitianEigen::new(&mat);
            blocks.push(Block {
                indices,
                values: eig.values,
                vectors: eig.vectors,
            });
        }
        Ok(ExactEigensystem { n_qubits: n, blocks })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Sizes of the invariant blocks.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.indices.len()).collect()
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.blocks.iter().flat_map(|b| b.values.iter().copied()).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    /// Lowest eigenvalue and one eigenvector for it.
    pub fn ground_state(&self) -> (f64, StateVector) {
        let mut best = (f64::INFINITY, 0usize, 0usize);
        for (bi, b) in self.blocks.iter().enumerate() {
            for (k, &e) in b.values.iter().enumerate() {
                if e < best.0 {
                    best = (e, bi, k);
                }
            }
        }
        let b = &self.blocks[best.1];
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << self.n_qubits];
        for (r, &i) in b.indices.iter().enumerate() {
            amps[i] = b.vectors[(r, best.2)];
        }
        let state = StateVector::from_amplitudes(self.n_qubits, amps).expect("eigenvector is nonzero");
        (best.0, state)
    }

    /// `exp(-i H t)|psi>`.
    pub fn propagate(&self, state: &mut StateVector, t: f64) -> Result<()> {
        check_qubits(self.n_qubits, state.n_qubits())?;
        if t == 0.0 {
            return Ok(());
        }
        let amps = state.amplitudes_mut();
        for b in &self.blocks {
            let v = DVector::from_iterator(b.indices.len(), b.indices.iter().map(|&i| amps[i]));
            let mut w = b.vectors.ad_mul(&v);
            for (x, e) in w.iter_mut().zip(&b.values) {
                *x *= Complex64::new(0.0, -e * t).exp();
            }
            let out = &b.vectors * w;
            for (k, &i) in b.indices.iter().enumerate() {
                amps[i] = out[k];
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum Engine {
    Trotter(TrotterPlan),
    Exact(ExactEigensystem),
}

/// A prepared backend: Trotter step sequence or cached eigensystem.
#[derive(Clone, Debug)]
pub struct Evolver {
    backend: EvolutionBackend,
    engine: Engine,
}

/// Tolerance for the step-count check of the Trotter backend.
const STEP_TOL: f64 = 1e-9;

impl Evolver {
    pub fn new(backend: EvolutionBackend) -> Result<Evolver> {
        backend.hamiltonian.require_hermitian()?;
        let engine = match backend.kind {
            EvolutionKind::Trotter { order, dt } => {
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(Error::Config(format!("Trotter step must be positive, got {dt}")));
                }
                Engine::Trotter(TrotterPlan::new(&backend.hamiltonian, order, dt))
            }
            EvolutionKind::Exact => Engine::Exact(ExactEigensystem::new(&backend.hamiltonian)?),
        };
        Ok(Evolver { backend, engine })
    }

    pub fn backend(&self) -> &EvolutionBackend {
        &self.backend
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.backend.hamiltonian
    }

    pub fn n_qubits(&self) -> usize {
        self.backend.hamiltonian.n_qubits()
    }

    /// Number of Trotter steps spanning `duration`, or an error if it is not a multiple of the step.
    pub fn step_count(&self, duration: f64) -> Result<usize> {
        match &self.engine {
            Engine::Trotter(plan) => {
                let n = (duration.abs() / plan.dt).round();
                if (n * plan.dt - duration.abs()).abs() > STEP_TOL {
                    return Err(Error::Config(format!(
                        "duration {duration} is not a multiple of the Trotter step {}",
                        plan.dt
                    )));
                }
                Ok(n as usize)
            }
            Engine::Exact(_) => Ok(0),
        }
    }

    /// Evolves from `t_from` to `t_to`; backward evolution runs the inverse step sequence.
    pub fn evolve(&self, state: &mut StateVector, t_from: f64, t_to: f64) -> Result<()> {
        check_qubits(self.n_qubits(), state.n_qubits())?;
        let duration = t_to - t_from;
        match &self.engine {
            Engine::Trotter(plan) => {
                let n = self.step_count(duration)?;
                plan.run(state, n, duration >= 0.0)
            }
            Engine::Exact(eig) => eig.propagate(state, duration),
        }
    }

    pub fn evolved(&self, state: &StateVector, t_from: f64, t_to: f64) -> Result<StateVector> {
        let mut s = state.clone();
        self.evolve(&mut s, t_from, t_to)?;
        Ok(s)
    }

    /// The cached eigensystem when this is the exact backend.
    pub fn eigensystem(&self) -> Option<&ExactEigensystem> {
        match &self.engine {
            Engine::Exact(e) => Some(e),
            Engine::Trotter(_) => None,
        }
    }
}
