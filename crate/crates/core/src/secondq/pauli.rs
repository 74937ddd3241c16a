//! Pauli strings and weighted sums of them.
//!
//! A string is stored in symplectic form: bit `q` of `x` and `z` select
//! `X^x Z^z` on qubit `q`, and the operator is `i^{|x & z|} X^x Z^z`, so a
//! qubit with both bits set carries `Y = iXZ`.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients smaller than this are dropped after merging.
pub const MERGE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
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
}

/// Operator content of a Pauli string without its coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliPattern {
    n_qubits: usize,
    x: Box<[u64]>,
    z: Box<[u64]>,
}

fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

fn popcount(a: &[u64]) -> u32 {
    a.iter().map(|w| w.count_ones()).sum()
}

fn and_popcount(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

impl PauliPattern {
    pub fn identity(n_qubits: usize) -> Self {
        let w = words(n_qubits);
        PauliPattern {
            n_qubits,
            x: vec![0; w].into_boxed_slice(),
            z: vec![0; w].into_boxed_slice(),
        }
    }

    pub fn from_factors(factors: &[Pauli]) -> Self {
        let mut p = PauliPattern::identity(factors.len());
        for (q, f) in factors.iter().enumerate() {
            p.set(q, *f);
        }
        p
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn set(&mut self, q: usize, f: Pauli) {
        let (w, b) = (q / 64, 1u64 << (q % 64));
        let (xb, zb) = match f {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        };
        self.x[w] = if xb { self.x[w] | b } else { self.x[w] & !b };
        self.z[w] = if zb { self.z[w] | b } else { self.z[w] & !b };
    }

    pub fn factor(&self, q: usize) -> Pauli {
        let (w, b) = (q / 64, 1u64 << (q % 64));
        match (self.x[w] & b != 0, self.z[w] & b != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn factors(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.factor(q)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(self.z.iter()).all(|&w| w == 0)
    }

    /// True when the string contains only `I` and `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.x.iter().zip(self.z.iter()).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    /// Number of `X` or `Y` factors.
    pub fn off_diagonal_weight(&self) -> usize {
        popcount(&self.x) as usize
    }

    /// Qubits carrying a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|&q| self.factor(q) != Pauli::I).collect()
    }

    /// Product `self * other` as `(i^k, pattern)`, with `k` mod 4.
    pub fn multiply(&self, other: &PauliPattern) -> (u32, PauliPattern) {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        let x: Box<[u64]> = self.x.iter().zip(other.x.iter()).map(|(a, b)| a ^ b).collect();
        let z: Box<[u64]> = self.z.iter().zip(other.z.iter()).map(|(a, b)| a ^ b).collect();
        // i^{|x1 z1|} X^x1 Z^z1 i^{|x2 z2|} X^x2 Z^z2
        //   = i^{|x1 z1| + |x2 z2| + 2|z1 x2|} X^x3 Z^z3, and X^x3 Z^z3 = i^{-|x3 z3|} P3.
        let k = and_popcount(&self.x, &self.z) + and_popcount(&other.x, &other.z) + 2 * and_popcount(&self.z, &other.x)
            + 3 * and_popcount(&x, &z);
        (
            k % 4,
            PauliPattern {
                n_qubits: self.n_qubits,
                x,
                z,
            },
        )
    }

    /// Action on a computational basis state: `P|b> = phase |b'>`.
    ///
    /// Only valid for registers of at most 64 qubits.
    pub fn apply_to_basis(&self, b: u64) -> (Complex64, u64) {
        let (x, z) = (self.x[0], self.z[0]);
        let k = (x & z).count_ones() + 2 * (z & b).count_ones();
        (I_POWERS[(k % 4) as usize], b ^ x)
    }

    fn sort_key(&self) -> (bool, Vec<Pauli>) {
        (!self.is_diagonal(), self.factors())
    }
}

impl fmt::Display for PauliPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.factor(q).symbol())?;
        }
        Ok(())
    }
}

pub(crate) const I_POWERS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// Complex-weighted Pauli string.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    coefficient: Complex64,
    pattern: PauliPattern,
}

impl PauliString {
    pub fn new(coefficient: Complex64, pattern: PauliPattern) -> Self {
        PauliString { coefficient, pattern }
    }

    /// Builds a string from factor symbols, qubit 0 first (e.g. `"XZY"`).
    pub fn parse(coefficient: Complex64, factors: &str) -> Result<Self> {
        let factors = factors
            .chars()
            .map(|c| Pauli::from_symbol(c).ok_or_else(|| Error::Validation(format!("bad Pauli symbol `{c}`"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString::new(coefficient, PauliPattern::from_factors(&factors)))
    }

    pub fn coefficient(&self) -> Complex64 {
        self.coefficient
    }

    pub fn pattern(&self) -> &PauliPattern {
        &self.pattern
    }

    pub fn n_qubits(&self) -> usize {
        self.pattern.n_qubits
    }

    pub fn is_identity(&self) -> bool {
        self.pattern.is_identity()
    }
}

/// Sum of Pauli strings over a fixed register, merged and ordered.
///
/// Terms are sorted with diagonal (`I`/`Z`-only) strings first, then
/// lexicographically by factor string.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        PauliSum {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn identity(n_qubits: usize, coefficient: Complex64) -> Self {
        PauliSum::from_terms(n_qubits, [PauliString::new(coefficient, PauliPattern::identity(n_qubits))])
    }

    /// Merges equal patterns, drops negligible coefficients and sorts.
    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = PauliString>) -> Self {
        let mut acc = PauliAccumulator::new(n_qubits);
        for t in terms {
            acc.add(t.pattern, t.coefficient);
        }
        acc.finish()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn identity_coefficient(&self) -> Complex64 {
        self.terms
            .iter()
            .find(|t| t.is_identity())
            .map(|t| t.coefficient)
            .unwrap_or_default()
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        PauliSum::from_terms(
            self.n_qubits,
            self.terms.iter().map(|t| PauliString::new(t.coefficient * factor, t.pattern.clone())),
        )
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        PauliSum::from_terms(self.n_qubits, self.terms.iter().chain(other.terms.iter()).cloned())
    }

    pub fn multiply(&self, other: &PauliSum) -> PauliSum {
        let mut acc = PauliAccumulator::new(self.n_qubits);
        for a in &self.terms {
            for b in &other.terms {
                let (k, pattern) = a.pattern.multiply(&b.pattern);
                acc.add(pattern, a.coefficient * b.coefficient * I_POWERS[k as usize]);
            }
        }
        acc.finish()
    }

    /// Hermitian conjugate (every Pauli string is Hermitian).
    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| PauliString::new(t.coefficient.conj(), t.pattern.clone()))
                .collect(),
        }
    }

    /// True when every merged coefficient is real within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.iter().all(|t| t.coefficient.im.abs() <= tol)
    }

    /// Sum of `|c|` over all terms.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.norm()).sum()
    }

    /// Dense `2^n x 2^n` matrix; qubit `q` is bit `q` of the basis index.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > crate::secondq::MAX_DENSE_ORBITALS {
            return Err(Error::Capacity(format!(
                "dense matrix of {} qubits exceeds the cap of {}",
                self.n_qubits,
                crate::secondq::MAX_DENSE_ORBITALS
            )));
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for t in &self.terms {
            for col in 0..dim {
                let (phase, row) = t.pattern.apply_to_basis(col as u64);
                m[(row as usize, col)] += t.coefficient * phase;
            }
        }
        Ok(m)
    }

    /// One term per line, `(<re>,<im>) <factors>`, qubit 0 leftmost.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            out.push_str(&format!("({:?},{:?}) {}\n", t.coefficient.re, t.coefficient.im, t.pattern));
        }
        out
    }

    pub fn parse_text(n_qubits: usize, text: &str) -> Result<PauliSum> {
        let mut terms = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::parse(i + 1, format!("expected `(re,im) FACTORS`, got `{line}`"));
            let (coef, factors) = line.split_once(' ').ok_or_else(bad)?;
            let inner = coef.strip_prefix('(').and_then(|c| c.strip_suffix(')')).ok_or_else(bad)?;
            let (re, im) = inner.split_once(',').ok_or_else(bad)?;
            let c = Complex64::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?);
            let s = PauliString::parse(c, factors.trim())?;
            if s.n_qubits() != n_qubits {
                return Err(Error::parse(i + 1, format!("string length {} != register size {n_qubits}", s.n_qubits())));
            }
            terms.push(s);
        }
        Ok(PauliSum::from_terms(n_qubits, terms))
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Hash-map reduction of Pauli strings.
pub(crate) struct PauliAccumulator {
    n_qubits: usize,
    map: HashMap<PauliPattern, Complex64>,
}

impl PauliAccumulator {
    pub(crate) fn new(n_qubits: usize) -> Self {
        PauliAccumulator {
            n_qubits,
            map: HashMap::new(),
        }
    }

    pub(crate) fn add(&mut self, pattern: PauliPattern, c: Complex64) {
        *self.map.entry(pattern).or_default() += c;
    }

    pub(crate) fn finish(self) -> PauliSum {
        let mut terms: Vec<PauliString> = self
            .map
            .into_iter()
            .filter(|(_, c)| c.norm() >= MERGE_TOL)
            .map(|(p, c)| PauliString::new(c, p))
            .collect();
        terms.sort_by_cached_key(|t| t.pattern.sort_key());
        PauliSum {
            n_qubits: self.n_qubits,
            terms,
        }
    }
}
