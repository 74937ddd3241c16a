//! Fermionic operators on the direct (one qubit per spin orbital) mapping.
//!
//! Two routes to the same operator are provided: the Jordan-Wigner image as
//! a [`PauliSum`], and a matrix built by acting with creation and
//! annihilation operators on occupation bitstrings. The second route serves
//! as the exact-diagonalization oracle.

mod pauli;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamio::{MolecularHamiltonian, HERMITICITY_TOL};

pub use pauli::{Pauli, PauliPattern, PauliString, PauliSum, MERGE_TOL};
use pauli::PauliAccumulator;

/// Largest register for which full `2^n` dense matrices are built.
pub const MAX_DENSE_ORBITALS: usize = 12;

/// Largest particle-number sector built as a dense matrix.
pub const MAX_SECTOR_DIM: usize = 4096;

fn one_half() -> Complex64 {
    Complex64::new(0.5, 0.0)
}

/// The two strings of a single-mode ladder operator: `Z_{<p} X_p / 2` and
/// `∓ i Z_{<p} Y_p / 2` (minus for creation).
fn ladder_strings(p: usize, n: usize, creation: bool) -> [(Complex64, PauliPattern); 2] {
    let mut xs = PauliPattern::identity(n);
    for j in 0..p {
        xs.set(j, Pauli::Z);
    }
    let mut ys = xs.clone();
    xs.set(p, Pauli::X);
    ys.set(p, Pauli::Y);
    let yc = if creation { Complex64::new(0.0, -0.5) } else { Complex64::new(0.0, 0.5) };
    [(one_half(), xs), (yc, ys)]
}

fn check_mode(p: usize, n: usize) -> Result<()> {
    if p >= n {
        return Err(Error::Index(format!("mode {p} outside a register of {n} qubits")));
    }
    Ok(())
}

/// Jordan-Wigner image of `a†_p`: `(⊗_{j<p} Z_j) ⊗ (X_p - i Y_p) / 2`.
///
/// The occupied state of a mode is `|1>`, so `a†` maps `|0>` to `|1>`.
pub fn jw_creation(p: usize, n: usize) -> Result<PauliSum> {
    check_mode(p, n)?;
    Ok(PauliSum::from_terms(
        n,
        ladder_strings(p, n, true).into_iter().map(|(c, s)| PauliString::new(c, s)),
    ))
}

/// Jordan-Wigner image of `a_p`: `(⊗_{j<p} Z_j) ⊗ (X_p + i Y_p) / 2`.
pub fn jw_annihilation(p: usize, n: usize) -> Result<PauliSum> {
    check_mode(p, n)?;
    Ok(PauliSum::from_terms(
        n,
        ladder_strings(p, n, false).into_iter().map(|(c, s)| PauliString::new(c, s)),
    ))
}

/// Particle-number operator `sum_p a†_p a_p`.
pub fn number_operator(n: usize) -> PauliSum {
    let mut acc = PauliSum::zero(n);
    for p in 0..n {
        let term = jw_creation(p, n).unwrap().multiply(&jw_annihilation(p, n).unwrap());
        acc = acc.add(&term);
    }
    acc
}

type StringList = Vec<(Complex64, PauliPattern)>;

fn product(a: &[(Complex64, PauliPattern)], b: &[(Complex64, PauliPattern)]) -> StringList {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (ca, pa) in a {
        for (cb, pb) in b {
            let (k, p) = pa.multiply(pb);
            out.push((ca * cb * pauli::I_POWERS[k as usize], p));
        }
    }
    out
}

/// Jordan-Wigner image of the full Hamiltonian, including the core energy as
/// an identity term.
///
/// Each one- and two-body term is expanded as a symbolic product of
/// single-mode ladder operators and the result is merged.
pub fn hamiltonian_to_pauli(h: &MolecularHamiltonian) -> Result<PauliSum> {
    h.validate(HERMITICITY_TOL)?;
    let n = h.n_spin_orbitals();
    let create: Vec<StringList> = (0..n).map(|p| ladder_strings(p, n, true).to_vec()).collect();
    let destroy: Vec<StringList> = (0..n).map(|p| ladder_strings(p, n, false).to_vec()).collect();

    let mut acc = PauliAccumulator::new(n);
    acc.add(PauliPattern::identity(n), Complex64::new(h.core_energy(), 0.0));

    for ((p, q), v) in h.one_body_terms() {
        for (c, s) in product(&create[p], &destroy[q]) {
            acc.add(s, v * c);
        }
    }

    // Pair products a†_p a†_q and a_s a_r are shared across many integrals.
    let mut pair_create: Vec<Option<StringList>> = vec![None; n * n];
    let mut pair_destroy: Vec<Option<StringList>> = vec![None; n * n];
    for ((p, q, r, s), v) in h.two_body_terms() {
        if p == q || r == s {
            continue;
        }
        let left = &*pair_create[p * n + q].get_or_insert_with(|| product(&create[p], &create[q]));
        let right = &*pair_destroy[s * n + r].get_or_insert_with(|| product(&destroy[s], &destroy[r]));
        let weight = 0.5 * v;
        for (cl, pl) in left {
            for (cr, pr) in right {
                let (k, pat) = pl.multiply(pr);
                acc.add(pat, weight * cl * cr * pauli::I_POWERS[k as usize]);
            }
        }
    }
    Ok(acc.finish())
}

/// Dense Hamiltonian matrix in the occupation-number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBasisMatrix {
    n_orbitals: usize,
    matrix: DMatrix<Complex64>,
}

impl FockBasisMatrix {
    /// Wraps a Hermitian `2^n x 2^n` matrix.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || !dim.is_power_of_two() {
            return Err(Error::Validation(format!(
                "matrix of shape {}x{} is not a square register operator",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let m = FockBasisMatrix {
            n_orbitals: dim.trailing_zeros() as usize,
            matrix,
        };
        let dev = m.hermiticity_deviation();
        if dev > 1e-12 * (1.0 + m.matrix.norm()) {
            return Err(Error::Validation(format!("matrix is not Hermitian (deviation {dev:e})")));
        }
        Ok(m)
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// Largest `|H_ij - conj(H_ji)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..=i {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Diagonal element `<b|H|b>` of a determinant.
    pub fn determinant_energy(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    /// True when no element couples different particle numbers.
    pub fn conserves_particle_number(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| (i.count_ones() == j.count_ones()) || self.matrix[(i, j)].norm() <= tol))
    }
}

/// `a_p` acting on an occupation bitstring: `(sign, new bitstring)`.
#[inline]
fn annihilate(p: usize, b: u64) -> Option<(f64, u64)> {
    let bit = 1u64 << p;
    if b & bit == 0 {
        return None;
    }
    Some((parity_sign(b & (bit - 1)), b ^ bit))
}

#[inline]
fn create(p: usize, b: u64) -> Option<(f64, u64)> {
    let bit = 1u64 << p;
    if b & bit != 0 {
        return None;
    }
    Some((parity_sign(b & (bit - 1)), b | bit))
}

#[inline]
fn parity_sign(bits: u64) -> f64 {
    if bits.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Applies `H` to one occupation bitstring and reports every `(row, value)`
/// contribution.
fn apply_to_determinant(h: &MolecularHamiltonian, b: u64, mut emit: impl FnMut(u64, Complex64)) {
    if h.core_energy() != 0.0 {
        emit(b, Complex64::new(h.core_energy(), 0.0));
    }
    for ((p, q), v) in h.one_body_terms() {
        if let Some((s1, b1)) = annihilate(q, b) {
            if let Some((s2, b2)) = create(p, b1) {
                emit(b2, v * (s1 * s2));
            }
        }
    }
    for ((p, q, r, s), v) in h.two_body_terms() {
        let Some((s1, b1)) = annihilate(r, b) else { continue };
        let Some((s2, b2)) = annihilate(s, b1) else { continue };
        let Some((s3, b3)) = create(q, b2) else { continue };
        let Some((s4, b4)) = create(p, b3) else { continue };
        emit(b4, v * (0.5 * s1 * s2 * s3 * s4));
    }
}

/// Occupation-basis matrix of `h` over the whole Fock space.
pub fn build_fock_matrix(h: &MolecularHamiltonian) -> Result<FockBasisMatrix> {
    let n = h.n_spin_orbitals();
    if n > MAX_DENSE_ORBITALS {
        return Err(Error::Capacity(format!(
            "{n} spin orbitals exceed the dense Fock-space cap of {MAX_DENSE_ORBITALS}"
        )));
    }
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        apply_to_determinant(h, col as u64, |row, v| m[(row as usize, col)] += v);
    }
    Ok(FockBasisMatrix { n_orbitals: n, matrix: m })
}

/// Hamiltonian restricted to a fixed particle number.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorMatrix {
    pub n_orbitals: usize,
    pub n_electrons: usize,
    /// Occupation bitstrings spanning the sector, ascending.
    pub basis: Vec<u64>,
    pub matrix: DMatrix<Complex64>,
}

/// Occupation bitstrings of `n` orbitals holding `k` electrons, ascending.
pub fn sector_basis(n: usize, k: usize) -> Vec<u64> {
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    // Gosper's hack enumerates fixed-popcount words in increasing order.
    let mut out = Vec::new();
    let mut v: u64 = (1u64 << k) - 1;
    let limit = 1u64 << n;
    while v < limit {
        out.push(v);
        let t = v | (v - 1);
        v = (t + 1) | (((!t & (!t).wrapping_neg()) - 1) >> (v.trailing_zeros() + 1));
    }
    out
}

/// Builds the `n_electrons` block of `h`, for registers too large for
/// [`build_fock_matrix`].
pub fn build_sector_matrix(h: &MolecularHamiltonian, n_electrons: usize) -> Result<SectorMatrix> {
    let n = h.n_spin_orbitals();
    if n > 63 {
        return Err(Error::Capacity(format!("{n} spin orbitals exceed 63")));
    }
    if n_electrons > n {
        return Err(Error::Domain(format!("{n_electrons} electrons in {n} spin orbitals")));
    }
    let dim = crate::hamio::binomial(n as u64, n_electrons as u64);
    if dim > num_bigint::BigUint::from(MAX_SECTOR_DIM) {
        return Err(Error::Capacity(format!(
            "sector dimension {dim} exceeds the cap of {MAX_SECTOR_DIM}"
        )));
    }
    let basis = sector_basis(n, n_electrons);
    let mut m = DMatrix::zeros(basis.len(), basis.len());
    for (col, &b) in basis.iter().enumerate() {
        apply_to_determinant(h, b, |row, v| {
            let r = basis.binary_search(&row).expect("particle number is conserved");
            m[(r, col)] += v;
        });
    }
    Ok(SectorMatrix {
        n_orbitals: n,
        n_electrons,
        basis,
        matrix: m,
    })
}

/// Kramers projection `M_K = (N_A - N_B) / 2`, with partner A on even
/// qubits and B on odd ones.
pub fn kramers_projection(bits: u64) -> f64 {
    let a = (bits & 0x5555_5555_5555_5555).count_ones() as f64;
    let b = (bits & 0xAAAA_AAAA_AAAA_AAAA).count_ones() as f64;
    0.5 * (a - b)
}
