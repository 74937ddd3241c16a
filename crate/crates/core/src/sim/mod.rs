//! Dense statevector engine and the exact-diagonalization oracle.

mod spectral;

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Gate, Matrix2};
use crate::error::{Error, Result};

pub use spectral::{diagonalize, diagonalize_dense, matrix_exponential, spectral_unitary, SpectralDecomposition};

/// Largest register held as a dense statevector (system plus ancillas).
pub const MAX_QUBITS: usize = 24;

/// Tolerance on `‖U†U − I‖_max` for unitary blocks.
pub const UNITARY_TOL: f64 = 1e-10;

/// Deterministic generator used for every sampled quantity.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Amplitudes of an `n`-qubit register; qubit `q` is bit `q` of the index.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// Outcome of a projective single-qubit measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub bit: u8,
    /// Exact probabilities of outcomes 0 and 1 before collapse.
    pub probabilities: [f64; 2],
}

impl Measurement {
    pub fn probability(&self) -> f64 {
        self.probabilities[self.bit as usize]
    }
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "{n_qubits} qubits exceed the statevector limit of {MAX_QUBITS}"
        )));
    }
    Ok(())
}

impl Statevector {
    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Index(format!("basis index {index} outside a {n_qubits}-qubit register")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n_qubits, amps })
    }

    /// Wraps raw amplitudes, rescaling them to unit norm.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Validation(format!("amplitude count {dim} is not a power of two")));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_size(n_qubits)?;
        let mut s = Statevector { n_qubits, amps };
        let norm = s.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::Validation("state has zero or non-finite norm".into()));
        }
        s.scale(1.0 / norm);
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

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn scale(&mut self, factor: f64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    /// `<phi|self>`.
    pub fn overlap(&self, phi: &Statevector) -> Result<Complex64> {
        if phi.dim() != self.dim() {
            return Err(Error::Validation(format!(
                "overlap between registers of {} and {} qubits",
                phi.n_qubits, self.n_qubits
            )));
        }
        Ok(phi.amps.iter().zip(&self.amps).map(|(p, s)| p.conj() * s).sum())
    }

    /// Appends `extra` qubits in `|0>` above the existing ones.
    pub fn extend(&self, extra: usize) -> Result<Statevector> {
        check_size(self.n_qubits + extra)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); self.dim() << extra];
        amps[..self.dim()].copy_from_slice(&self.amps);
        Ok(Statevector {
            n_qubits: self.n_qubits + extra,
            amps,
        })
    }

    /// Marginal probability that qubit `q` reads 1.
    pub fn probability_one(&self, q: usize) -> Result<f64> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Probabilities of every basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::Index(format!("qubit {q} outside a {}-qubit register", self.n_qubits)));
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        g.validate(self.n_qubits)?;
        let mask = g.controls().iter().fold(0usize, |m, &c| m | (1 << c));
        self.apply_single(&g.target_matrix(), g.target(), mask);
        Ok(())
    }

    /// Applies every gate of `c` followed by its global phase.
    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<()> {
        if c.n_qubits() > self.n_qubits {
            return Err(Error::Index(format!(
                "{}-qubit circuit applied to a {}-qubit register",
                c.n_qubits(),
                self.n_qubits
            )));
        }
        for g in c.gates() {
            self.apply_gate(g)?;
        }
        if c.global_phase() != 0.0 {
            let ph = Complex64::from_polar(1.0, c.global_phase());
            for a in &mut self.amps {
                *a *= ph;
            }
        }
        Ok(())
    }

    fn apply_single(&mut self, u: &Matrix2, target: usize, control_mask: usize) {
        let t = 1usize << target;
        let diagonal = u[0][1] == Complex64::new(0.0, 0.0) && u[1][0] == Complex64::new(0.0, 0.0);
        for i in 0..self.amps.len() {
            if i & t != 0 || i & control_mask != control_mask {
                continue;
            }
            let (a, b) = (self.amps[i], self.amps[i | t]);
            if diagonal {
                self.amps[i] = u[0][0] * a;
                self.amps[i | t] = u[1][1] * b;
            } else {
                self.amps[i] = u[0][0] * a + u[0][1] * b;
                self.amps[i | t] = u[1][0] * a + u[1][1] * b;
            }
        }
    }

    /// Applies the dense unitary `u` to `targets` (target `j` is bit `j` of
    /// the local index of `u`) when every control qubit is set.
    pub fn apply_unitary_block(&mut self, u: &DMatrix<Complex64>, targets: &[usize], controls: &[usize]) -> Result<()> {
        let dev = unitarity_deviation(u);
        if dev > UNITARY_TOL {
            return Err(Error::Validation(format!("block deviates from unitarity by {dev:e}")));
        }
        self.apply_block_unchecked(u, targets, controls)
    }

    /// As [`Statevector::apply_unitary_block`] without the unitarity check.
    pub(crate) fn apply_block_unchecked(&mut self, u: &DMatrix<Complex64>, targets: &[usize], controls: &[usize]) -> Result<()> {
        let k = targets.len();
        if u.nrows() != 1 << k || u.ncols() != 1 << k {
            return Err(Error::Validation(format!(
                "{}x{} block does not match {k} target qubits",
                u.nrows(),
                u.ncols()
            )));
        }
        let mut seen = 0usize;
        for &q in targets.iter().chain(controls) {
            self.check_qubit(q)?;
            if seen & (1 << q) != 0 {
                return Err(Error::Index(format!("qubit {q} appears twice among targets and controls")));
            }
            seen |= 1 << q;
        }
        let target_mask = targets.iter().fold(0usize, |m, &q| m | (1 << q));
        let control_mask = controls.iter().fold(0usize, |m, &q| m | (1 << q));
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|l| {
                targets
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| l >> j & 1 == 1)
                    .fold(0, |m, (_, &q)| m | (1 << q))
            })
            .collect();
        let mut local = vec![Complex64::new(0.0, 0.0); 1 << k];
        for base in 0..self.amps.len() {
            if base & target_mask != 0 || base & control_mask != control_mask {
                continue;
            }
            for (l, off) in offsets.iter().enumerate() {
                local[l] = self.amps[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, v) in local.iter().enumerate() {
                    acc += u[(r, c)] * v;
                }
                self.amps[base | off] = acc;
            }
        }
        Ok(())
    }

    /// Projective measurement of qubit `q` with collapse and renormalization.
    pub fn measure_qubit<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<Measurement> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        let (mut p0, mut p1) = (0.0, 0.0);
        for (i, a) in self.amps.iter().enumerate() {
            if i & bit == 0 {
                p0 += a.norm_sqr();
            } else {
                p1 += a.norm_sqr();
            }
        }
        let total = p0 + p1;
        if total.is_nan() || total <= 0.0 {
            return Err(Error::Numeric("measurement on a zero-norm state".into()));
        }
        let probabilities = [p0 / total, p1 / total];
        let outcome = if probabilities[1] <= 0.0 {
            0
        } else if probabilities[0] <= 0.0 {
            1
        } else if rng.random::<f64>() < probabilities[0] {
            0
        } else {
            1
        };
        self.project(q, outcome)?;
        Ok(Measurement {
            bit: outcome,
            probabilities,
        })
    }

    /// Projects qubit `q` onto `outcome` and renormalizes; returns the
    /// probability of that branch.
    pub fn project(&mut self, q: usize, outcome: u8) -> Result<f64> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        let keep = if outcome == 0 { 0 } else { bit };
        let mut p = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit == keep {
                p += a.norm_sqr();
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if p.is_nan() || p <= 0.0 {
            return Err(Error::Numeric(format!("projection of qubit {q} onto {outcome} has zero probability")));
        }
        self.scale(1.0 / p.sqrt());
        Ok(p)
    }

    /// Returns qubit `q`, already in a definite state, to `|0>`.
    pub fn reset_qubit(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit != 0 {
                let a = std::mem::take(&mut self.amps[i]);
                self.amps[i & !bit] += a;
            }
        }
        Ok(())
    }

    /// Discards the top `k` qubits, which must all be `|0>` up to `tol`.
    pub fn truncate(&self, k: usize, tol: f64) -> Result<Statevector> {
        let n = self.n_qubits.checked_sub(k).ok_or_else(|| Error::Index("cannot drop more qubits than exist".into()))?;
        let dim = 1usize << n;
        let leak: f64 = self.amps[dim..].iter().map(|a| a.norm_sqr()).sum();
        if leak > tol {
            return Err(Error::Validation(format!("dropped qubits carry weight {leak:e}")));
        }
        Statevector::from_amplitudes(self.amps[..dim].to_vec())
    }

    /// Text dump, one `index re im` line per amplitude above `cutoff`.
    pub fn dump(&self, cutoff: f64) -> String {
        let mut out = String::new();
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() > cutoff {
                let _ = writeln!(out, "{i} {:?} {:?}", a.re, a.im);
            }
        }
        out
    }
}

/// `‖U†U − I‖_max`.
pub fn unitarity_deviation(u: &DMatrix<Complex64>) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let p = u.adjoint() * u;
    let mut dev = 0.0f64;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((p[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    dev
}
