//! Pauli strings and complex-weighted Pauli sums.
//!
//! Qubit 0 is the leftmost tensor factor and `Z|0> = +|0>`. A [`PauliSum`] is
//! always kept canonical: terms sorted lexicographically by letter sequence
//! (`I < X < Y < Z`), duplicates merged and coefficients below
//! [`PauliSum::DUST`] dropped.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{check_qubits, Error, Result};

/// Single-site Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// `self * rhs` as a phase and a letter.
    pub fn mul(self, rhs: Pauli) -> (Phase, Pauli) {
        use Pauli::*;
        match (self, rhs) {
            (I, p) | (p, I) => (Phase::ONE, p),
            (a, b) if a == b => (Phase::ONE, I),
            (X, Y) => (Phase::I, Z),
            (Y, Z) => (Phase::I, X),
            (Z, X) => (Phase::I, Y),
            (Y, X) => (Phase::MINUS_I, Z),
            (Z, Y) => (Phase::MINUS_I, X),
            (X, Z) => (Phase::MINUS_I, Y),
            _ => unreachable!(),
        }
    }

    /// Flips the computational basis bit (X or Y).
    pub fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    /// Carries a Z component (Z or Y).
    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }
}

/// A fourth root of unity, stored as the power of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u32) -> Phase {
        Phase((k % 4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    pub fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Phased tensor product of single-site Pauli operators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
    phase: Phase,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, phase: Phase) -> Result<PauliString> {
        if letters.is_empty() {
            return Err(Error::Config("a Pauli string needs at least one qubit".into()));
        }
        Ok(PauliString { letters, phase })
    }

    pub fn identity(n_qubits: usize) -> PauliString {
        assert!(n_qubits > 0, "identity on zero qubits");
        PauliString {
            letters: vec![Pauli::I; n_qubits],
            phase: Phase::ONE,
        }
    }

    /// String with the given letters at the listed sites and identity elsewhere.
    pub fn from_sites(n_qubits: usize, sites: &[(usize, Pauli)]) -> Result<PauliString> {
        if n_qubits == 0 {
            return Err(Error::Config("a Pauli string needs at least one qubit".into()));
        }
        let mut letters = vec![Pauli::I; n_qubits];
        for &(q, p) in sites {
            if q >= n_qubits {
                return Err(Error::Config(format!("site {q} outside {n_qubits} qubits")));
            }
            let (ph, l) = letters[q].mul(p);
            if ph != Phase::ONE {
                return Err(Error::Config(format!("site {q} listed twice")));
            }
            letters[q] = l;
        }
        Ok(PauliString {
            letters,
            phase: Phase::ONE,
        })
    }

    pub fn single(n_qubits: usize, site: usize, p: Pauli) -> Result<PauliString> {
        PauliString::from_sites(n_qubits, &[(site, p)])
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, q: usize) -> Pauli {
        self.letters[q]
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> PauliString {
        self.phase = phase;
        self
    }

    pub fn negated(&self) -> PauliString {
        self.clone().with_phase(self.phase.mul(Phase::MINUS_ONE))
    }

    pub fn adjoint(&self) -> PauliString {
        self.clone().with_phase(self.phase.conj())
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.letters.len())
            .filter(|&q| self.letters[q] != Pauli::I)
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Phase in {1, -1}.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    /// +1 or -1 for Hermitian strings.
    pub fn sign(&self) -> Result<f64> {
        match self.phase {
            Phase::ONE => Ok(1.0),
            Phase::MINUS_ONE => Ok(-1.0),
            _ => Err(Error::NotHermitian(self.to_string())),
        }
    }

    pub fn multiply(&self, rhs: &PauliString) -> Result<PauliString> {
        check_qubits(self.n_qubits(), rhs.n_qubits())?;
        let mut phase = self.phase.mul(rhs.phase);
        let letters = self
            .letters
            .iter()
            .zip(&rhs.letters)
            .map(|(&a, &b)| {
                let (ph, l) = a.mul(b);
                phase = phase.mul(ph);
                l
            })
            .collect();
        Ok(PauliString { letters, phase })
    }

    pub fn commutes_with(&self, rhs: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&rhs.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Same letters with phase reset to one.
    pub fn phase_free(&self) -> PauliString {
        self.clone().with_phase(Phase::ONE)
    }

    /// Bit masks in state-index space: bit `n-1-q` stands for qubit `q`.
    /// Returns (flip mask, z mask, number of Y letters).
    pub(crate) fn index_masks(&self) -> (usize, usize, u32) {
        let n = self.letters.len();
        let mut x = 0usize;
        let mut z = 0usize;
        let mut ny = 0u32;
        for (q, &p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            if p.flips() {
                x |= bit;
            }
            if p.has_z() {
                z |= bit;
            }
            if p == Pauli::Y {
                ny += 1;
            }
        }
        (x, z, ny)
    }

    pub fn letter_string(&self) -> String {
        self.letters.iter().map(|p| p.symbol()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            Phase::ONE => "",
            Phase::I => "i",
            Phase::MINUS_ONE => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.letter_string())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<PauliString> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MINUS_I, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::ONE, rest)
        } else {
            (Phase::ONE, s)
        };
        let letters = body
            .chars()
            .map(|c| {
                Pauli::from_symbol(c).ok_or_else(|| Error::Parse {
                    line: 1,
                    message: format!("unknown Pauli letter {c:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(letters, phase)
    }
}

/// Complex-weighted sum of phase-free Pauli strings in canonical form.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(Complex64, PauliString)>,
}

impl PauliSum {
    /// Coefficients with modulus below this are dropped after merging.
    pub const DUST: f64 = 1e-14;
    /// Imaginary parts below this count as real for Hermiticity.
    pub const HERMITIAN_TOL: f64 = 1e-12;

    pub fn zero(n_qubits: usize) -> PauliSum {
        PauliSum {
            n_qubits,
            terms: Vec::new(),
        }
    }

    /// Builds a canonical sum; string phases are folded into the coefficients.
    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<PauliSum>
    where
        I: IntoIterator<Item = (Complex64, PauliString)>,
    {
        let mut acc: BTreeMap<Vec<Pauli>, Complex64> = BTreeMap::new();
        for (c, s) in terms {
            check_qubits(n_qubits, s.n_qubits())?;
            *acc.entry(s.letters).or_insert(Complex64::new(0.0, 0.0)) += c * s.phase.to_complex();
        }
        Ok(Self::from_map(n_qubits, acc))
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real_terms<I>(n_qubits: usize, terms: I) -> Result<PauliSum>
    where
        I: IntoIterator<Item = (f64, PauliString)>,
    {
        Self::from_terms(
            n_qubits,
            terms.into_iter().map(|(c, s)| (Complex64::new(c, 0.0), s)),
        )
    }

    pub fn from_string(s: &PauliString) -> PauliSum {
        let n = s.n_qubits();
        Self::from_terms(n, [(Complex64::new(1.0, 0.0), s.clone())]).expect("same size")
    }

    fn from_map(n_qubits: usize, acc: BTreeMap<Vec<Pauli>, Complex64>) -> PauliSum {
        let terms = acc
            .into_iter()
            .filter(|(_, c)| c.norm() >= Self::DUST)
            .map(|(letters, c)| {
                (
                    c,
                    PauliString {
                        letters,
                        phase: Phase::ONE,
                    },
                )
            })
            .collect();
        PauliSum { n_qubits, terms }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, letters: &[Pauli]) -> Complex64 {
        self.terms
            .binary_search_by(|(_, s)| s.letters.as_slice().cmp(letters))
            .map(|i| self.terms[i].0)
            .unwrap_or_default()
    }

    /// Coefficient looked up by a letter string such as `"XXII"`.
    pub fn coefficient_of(&self, letters: &str) -> Complex64 {
        let v: Vec<Pauli> = letters.chars().filter_map(Pauli::from_symbol).collect();
        self.coefficient(&v)
    }

    /// Re-merges and re-sorts; a no-op on values built through this API.
    pub fn canonicalize(&self) -> PauliSum {
        Self::from_terms(self.n_qubits, self.terms.iter().cloned()).expect("same size")
    }

    pub fn add(&self, rhs: &PauliSum) -> Result<PauliSum> {
        check_qubits(self.n_qubits, rhs.n_qubits)?;
        Self::from_terms(
            self.n_qubits,
            self.terms.iter().chain(&rhs.terms).cloned(),
        )
    }

    pub fn sub(&self, rhs: &PauliSum) -> Result<PauliSum> {
        self.add(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> PauliSum {
        Self::from_terms(
            self.n_qubits,
            self.terms.iter().map(|(a, s)| (a * c, s.clone())),
        )
        .expect("same size")
    }

    pub fn scale_real(&self, c: f64) -> PauliSum {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn multiply(&self, rhs: &PauliSum) -> Result<PauliSum> {
        check_qubits(self.n_qubits, rhs.n_qubits)?;
        let mut acc: BTreeMap<Vec<Pauli>, Complex64> = BTreeMap::new();
        for (a, sa) in &self.terms {
            for (b, sb) in &rhs.terms {
                let p = sa.multiply(sb)?;
                *acc.entry(p.letters).or_insert(Complex64::new(0.0, 0.0)) +=
                    a * b * p.phase.to_complex();
            }
        }
        Ok(Self::from_map(self.n_qubits, acc))
    }

    /// `ab - ba`.
    pub fn commutator(&self, rhs: &PauliSum) -> Result<PauliSum> {
        self.multiply(rhs)?.sub(&rhs.multiply(self)?)
    }

    /// `ab + ba`.
    pub fn anticommutator(&self, rhs: &PauliSum) -> Result<PauliSum> {
        self.multiply(rhs)?.add(&rhs.multiply(self)?)
    }

    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|(c, s)| (c.conj(), s.clone()))
                .collect(),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.terms
            .iter()
            .all(|(c, _)| c.im.abs() <= Self::HERMITIAN_TOL)
    }

    pub fn require_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NotHermitian(format!(
                "sum with {} terms has complex coefficients",
                self.len()
            )))
        }
    }

    /// Splits `self = A + iB` with `A`, `B` Hermitian.
    pub fn hermitian_parts(&self) -> (PauliSum, PauliSum) {
        let re = self
            .terms
            .iter()
            .map(|(c, s)| (Complex64::new(c.re, 0.0), s.clone()));
        let im = self
            .terms
            .iter()
            .map(|(c, s)| (Complex64::new(c.im, 0.0), s.clone()));
        (
            Self::from_terms(self.n_qubits, re).expect("same size"),
            Self::from_terms(self.n_qubits, im).expect("same size"),
        )
    }

    /// Triangle-inequality bound on the operator norm.
    pub fn spectral_norm_bound(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.norm()).sum()
    }

    /// Whether every pair of terms commutes.
    pub fn terms_commute(&self) -> bool {
        self.terms.iter().enumerate().all(|(i, (_, a))| {
            self.terms[i + 1..].iter().all(|(_, b)| a.commutes_with(b))
        })
    }

    /// One `coeff * LETTERS` line per term.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, s) in &self.terms {
            out.push_str(&format_coefficient(*c));
            out.push_str(" * ");
            out.push_str(&s.letter_string());
            out.push('\n');
        }
        out
    }

    /// Inverse of [`PauliSum::to_text`]. Blank lines and `#` comments are skipped.
    pub fn parse_text(n_qubits: usize, text: &str) -> Result<PauliSum> {
        let mut terms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let (coeff, letters) = line
                .split_once('*')
                .ok_or_else(|| parse_err("expected `coeff * LETTERS`".into()))?;
            let c = parse_coefficient(coeff.trim()).ok_or_else(|| parse_err(format!("bad coefficient {coeff:?}")))?;
            let s: PauliString = letters
                .trim()
                .parse()
                .map_err(|e: Error| parse_err(e.to_string()))?;
            if s.n_qubits() != n_qubits {
                return Err(parse_err(format!(
                    "term has {} letters, expected {n_qubits}",
                    s.n_qubits()
                )));
            }
            terms.push((c, s));
        }
        Self::from_terms(n_qubits, terms)
    }
}

fn format_coefficient(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.im < 0.0 || (c.im == 0.0 && c.im.is_sign_negative()) {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

fn parse_coefficient(s: &str) -> Option<Complex64> {
    if let Some(body) = s.strip_suffix('i') {
        // split at the last sign that is not part of an exponent
        let bytes = body.as_bytes();
        let pos = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'))?;
        let re: f64 = body[..pos].parse().ok()?;
        let im: f64 = body[pos..].trim_start_matches('+').parse().ok()?;
        Some(Complex64::new(re, im))
    } else {
        s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0))
    }
}

/// `(X + iY)/2` on one site.
pub fn sigma_plus(n_qubits: usize, site: usize) -> Result<PauliSum> {
    PauliSum::from_terms(
        n_qubits,
        [
            (Complex64::new(0.5, 0.0), PauliString::single(n_qubits, site, Pauli::X)?),
            (Complex64::new(0.0, 0.5), PauliString::single(n_qubits, site, Pauli::Y)?),
        ],
    )
}

/// `(X - iY)/2` on one site.
pub fn sigma_minus(n_qubits: usize, site: usize) -> Result<PauliSum> {
    Ok(sigma_plus(n_qubits, site)?.adjoint())
}

/// Spin hopping `s+_a s-_b + h.c.`, expanded through the algebra.
///
/// For neighbouring sites this is the Jordan-Wigner image of a fermion
/// hopping term up to sign; for `a != b` it equals `(X_a X_b + Y_a Y_b)/2`.
pub fn spin_hopping(n_qubits: usize, a: usize, b: usize) -> Result<PauliSum> {
    let forward = sigma_plus(n_qubits, a)?.multiply(&sigma_minus(n_qubits, b)?)?;
    forward.add(&forward.adjoint())
}
