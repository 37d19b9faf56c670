//! Dense-matrix helpers used by the oracles.
//!
//! Matrices are assembled from explicit 2x2 single-site tables rather than the
//! bit tricks of [`crate::state`], so the two paths check each other.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::pauli::{Pauli, PauliString, PauliSum};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn entry(p: Pauli, row: usize, col: usize) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match (p, row, col) {
        (Pauli::I, 0, 0) | (Pauli::I, 1, 1) => one,
        (Pauli::X, 0, 1) | (Pauli::X, 1, 0) => one,
        (Pauli::Y, 0, 1) => -i,
        (Pauli::Y, 1, 0) => i,
        (Pauli::Z, 0, 0) => one,
        (Pauli::Z, 1, 1) => -one,
        _ => ZERO,
    }
}

fn bit_of(index: usize, n: usize, q: usize) -> usize {
    (index >> (n - 1 - q)) & 1
}

/// Dense matrix of a phased Pauli string.
pub fn string_matrix(s: &PauliString) -> CMatrix {
    let n = s.n_qubits();
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    let phase = s.phase().to_complex();
    for col in 0..dim {
        // the unique nonzero row flips every X/Y site
        let mut row = col;
        for q in 0..n {
            if matches!(s.letter(q), Pauli::X | Pauli::Y) {
                row ^= 1 << (n - 1 - q);
            }
        }
        let mut v = phase;
        for q in 0..n {
            v *= entry(s.letter(q), bit_of(row, n, q), bit_of(col, n, q));
        }
        m[(row, col)] = v;
    }
    m
}

/// Dense matrix of a Pauli sum.
pub fn sum_matrix(s: &PauliSum) -> CMatrix {
    let dim = 1usize << s.n_qubits();
    let mut m = CMatrix::zeros(dim, dim);
    for (c, p) in s.terms() {
        m += string_matrix(p) * *c;
    }
    m
}

/// Eigendecomposition of a Hermitian matrix.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> HermitianEigen {
        let real_input = m.iter().all(|z| z.im == 0.0);
        if real_input {
            let r = m.map(|z| z.re);
            let e = SymmetricEigen::new(r);
            HermitianEigen {
                values: e.eigenvalues.iter().copied().collect(),
                vectors: e.eigenvectors.map(|x| Complex64::new(x, 0.0)),
            }
        } else {
            let e = SymmetricEigen::new(m.clone());
            HermitianEigen {
                values: e.eigenvalues.iter().copied().collect(),
                vectors: e.eigenvectors,
            }
        }
    }

    /// `f(M)` for a scalar function of the eigenvalues.
    pub fn apply_function(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let d = CVector::from_iterator(self.values.len(), self.values.iter().map(|&x| f(x)));
        let scaled = CMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |r, c| {
            self.vectors[(r, c)] * d[c]
        });
        scaled * self.vectors.adjoint()
    }

    /// `exp(-i M t)`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.apply_function(|e| Complex64::new(0.0, -e * t).exp())
    }
}

/// Conjugate-linear inner product `<a|b>`.
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}
