//! Molecular Hamiltonians in second quantization, the energy window used to
//! map energies onto phases, and the combinatorics of FCI spaces.
//!
//! Spin orbitals are interleaved: spatial orbital `p` maps to spin orbital
//! `2p` (alpha, or Kramers partner A) and `2p + 1` (beta, or partner B).
//! Two-electron integrals are stored in physicist order, so `g[p,q,r,s]`
//! multiplies `a†_p a†_q a_s a_r`.

mod complex_format;
mod fci_space;
mod fcidump;
mod synthetic;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::secondq::hamiltonian_to_pauli;

pub use complex_format::parse_complex_hamiltonian;
pub use fci_space::{
    binomial, fci_dimension_nonrel, fci_dimension_rel, mk_sector_sum, rel_nonrel_ratio,
    RatioEstimate,
};
pub use fcidump::parse_fcidump;
pub use synthetic::{random_hamiltonian, SyntheticTerms};

/// Tolerance on Hermiticity of parsed integrals.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Largest magnitude of an imaginary part tolerated in non-relativistic mode.
pub const REAL_TOL: f64 = 1e-12;

/// Smallest window width produced by [`default_window`], in hartree.
pub const MIN_WINDOW_WIDTH: f64 = 1.0;

pub type OneBodyKey = (usize, usize);
pub type TwoBodyKey = (usize, usize, usize, usize);

/// Second-quantized electronic Hamiltonian over `n_spin_orbitals` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularHamiltonian {
    n_spin_orbitals: usize,
    n_electrons: usize,
    core_energy: f64,
    one_body: BTreeMap<OneBodyKey, Complex64>,
    two_body: BTreeMap<TwoBodyKey, Complex64>,
    relativistic: bool,
}

impl MolecularHamiltonian {
    /// Empty (all-zero) Hamiltonian.
    pub fn new(n_spin_orbitals: usize, n_electrons: usize, relativistic: bool) -> Self {
        MolecularHamiltonian {
            n_spin_orbitals,
            n_electrons,
            core_energy: 0.0,
            one_body: BTreeMap::new(),
            two_body: BTreeMap::new(),
            relativistic,
        }
    }

    pub fn n_spin_orbitals(&self) -> usize {
        self.n_spin_orbitals
    }

    /// Electron count declared by the source file (used for the HF guess).
    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    pub fn core_energy(&self) -> f64 {
        self.core_energy
    }

    pub fn is_relativistic(&self) -> bool {
        self.relativistic
    }

    pub fn set_core_energy(&mut self, value: f64) {
        self.core_energy = value;
    }

    /// Stores `h_pq`. Zero values remove the entry.
    pub fn set_one_body(&mut self, p: usize, q: usize, value: Complex64) -> Result<()> {
        self.check_index(&[p, q])?;
        if value == Complex64::new(0.0, 0.0) {
            self.one_body.remove(&(p, q));
        } else {
            self.one_body.insert((p, q), value);
        }
        Ok(())
    }

    /// Stores `g_pqrs` (physicist order). Zero values remove the entry.
    pub fn set_two_body(&mut self, p: usize, q: usize, r: usize, s: usize, value: Complex64) -> Result<()> {
        self.check_index(&[p, q, r, s])?;
        if value == Complex64::new(0.0, 0.0) {
            self.two_body.remove(&(p, q, r, s));
        } else {
            self.two_body.insert((p, q, r, s), value);
        }
        Ok(())
    }

    pub fn one_body(&self, p: usize, q: usize) -> Complex64 {
        self.one_body.get(&(p, q)).copied().unwrap_or_default()
    }

    pub fn two_body(&self, p: usize, q: usize, r: usize, s: usize) -> Complex64 {
        self.two_body.get(&(p, q, r, s)).copied().unwrap_or_default()
    }

    pub fn one_body_terms(&self) -> impl Iterator<Item = (OneBodyKey, Complex64)> + '_ {
        self.one_body.iter().map(|(k, v)| (*k, *v))
    }

    pub fn two_body_terms(&self) -> impl Iterator<Item = (TwoBodyKey, Complex64)> + '_ {
        self.two_body.iter().map(|(k, v)| (*k, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.core_energy == 0.0 && self.one_body.is_empty() && self.two_body.is_empty()
    }

    fn check_index(&self, idx: &[usize]) -> Result<()> {
        match idx.iter().find(|&&i| i >= self.n_spin_orbitals) {
            Some(i) => Err(Error::Index(format!(
                "orbital index {i} out of range for {} spin orbitals",
                self.n_spin_orbitals
            ))),
            None => Ok(()),
        }
    }

    /// Checks `h_pq = conj(h_qp)`, `g_pqrs = conj(g_rspq)` and, outside
    /// relativistic mode, that every integral is real.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for (&(p, q), &v) in &self.one_body {
            let partner = self.one_body(q, p).conj();
            if (v - partner).norm() > tol {
                return Err(Error::Validation(format!(
                    "one-body integral h[{p},{q}] = {v} is not the conjugate of h[{q},{p}]"
                )));
            }
        }
        for (&(p, q, r, s), &v) in &self.two_body {
            let partner = self.two_body(r, s, p, q).conj();
            if (v - partner).norm() > tol {
                return Err(Error::Validation(format!(
                    "two-body integral g[{p},{q},{r},{s}] = {v} is not the conjugate of g[{r},{s},{p},{q}]"
                )));
            }
        }
        if !self.relativistic {
            let complex = self
                .one_body
                .values()
                .chain(self.two_body.values())
                .any(|v| v.im.abs() > REAL_TOL);
            if complex {
                return Err(Error::Validation(
                    "complex integral in a non-relativistic Hamiltonian".into(),
                ));
            }
        }
        Ok(())
    }

    /// Writes the Hamiltonian in the line-oriented complex-integral format.
    ///
    /// Every stored entry is written explicitly, so parsing the output
    /// reproduces the integrals bit for bit.
    pub fn to_complex_format(&self) -> String {
        let mut out = String::new();
        let norb = self.n_spin_orbitals.div_ceil(2);
        let _ = writeln!(out, "CHAM norb={norb} nelec={}", self.n_electrons);
        if self.core_energy != 0.0 {
            let _ = writeln!(out, "core {:?}", self.core_energy);
        }
        for (&(p, q), v) in &self.one_body {
            let _ = writeln!(out, "h {p} {q} {:?} {:?}", v.re, v.im);
        }
        for (&(p, q, r, s), v) in &self.two_body {
            let _ = writeln!(out, "g {p} {q} {r} {s} {:?} {:?}", v.re, v.im);
        }
        out
    }
}

/// Interval `[e_min, e_max]` mapped onto phases in `[0, 1)` by
/// `U = exp(i tau (e_max - H))`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnergyWindow {
    e_min: f64,
    e_max: f64,
}

impl EnergyWindow {
    pub fn new(e_min: f64, e_max: f64) -> Result<Self> {
        if !(e_min.is_finite() && e_max.is_finite()) || e_max <= e_min {
            return Err(Error::Domain(format!(
                "energy window needs e_max > e_min, got [{e_min}, {e_max}]"
            )));
        }
        Ok(EnergyWindow { e_min, e_max })
    }

    pub fn e_min(&self) -> f64 {
        self.e_min
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn width(&self) -> f64 {
        self.e_max - self.e_min
    }

    /// Radians per hartree, `2 pi / (e_max - e_min)`.
    pub fn tau(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.width()
    }

    pub fn contains(&self, energy: f64) -> bool {
        energy >= self.e_min && energy <= self.e_max
    }

    /// Phase in `[0, 1)` carried by an eigenvalue `energy`.
    pub fn phase_of(&self, energy: f64) -> f64 {
        ((self.e_max - energy) / self.width()).rem_euclid(1.0)
    }
}

/// Window bracketing the whole spectrum of `h`.
///
/// The bound is `c_I ± sum |c_k|` over the non-identity Pauli strings of the
/// Jordan-Wigner image, padded to at least [`MIN_WINDOW_WIDTH`] and then
/// widened by 1% of its width.
pub fn default_window(h: &MolecularHamiltonian) -> Result<EnergyWindow> {
    let pauli = hamiltonian_to_pauli(h)?;
    let center = pauli.identity_coefficient().re;
    let radius: f64 = pauli
        .terms()
        .iter()
        .filter(|t| !t.is_identity())
        .map(|t| t.coefficient().norm())
        .sum();
    window_around(center - radius, center + radius)
}

/// Pads `[lo, hi]` to the minimum width and widens it by 1%.
pub fn window_around(mut lo: f64, mut hi: f64) -> Result<EnergyWindow> {
    if hi - lo < MIN_WINDOW_WIDTH {
        let mid = 0.5 * (lo + hi);
        lo = mid - 0.5 * MIN_WINDOW_WIDTH;
        hi = mid + 0.5 * MIN_WINDOW_WIDTH;
    }
    let pad = 0.005 * (hi - lo);
    EnergyWindow::new(lo - pad, hi + pad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn window_tau_and_phase() {
        let w = EnergyWindow::new(-2.0, 2.0).unwrap();
        assert!((w.tau() - std::f64::consts::PI / 2.0).abs() < 1e-15);
        assert_eq!(w.phase_of(2.0), 0.0);
        assert!((w.phase_of(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn window_rejects_inverted_bounds() {
        assert!(matches!(EnergyWindow::new(1.0, 1.0), Err(Error::Domain(_))));
        assert!(EnergyWindow::new(2.0, -1.0).is_err());
    }

    #[test]
    fn zero_hamiltonian_window_uses_floor() {
        let h = MolecularHamiltonian::new(2, 0, false);
        let w = default_window(&h).unwrap();
        assert!((w.e_min() + 0.505).abs() < 1e-12);
        assert!((w.e_max() - 0.505).abs() < 1e-12);
    }

    #[test]
    fn single_level_window_covers_both_occupations() {
        let mut h = MolecularHamiltonian::new(1, 1, false);
        h.set_one_body(0, 0, c(-1.0, 0.0)).unwrap();
        let w = default_window(&h).unwrap();
        assert!(w.e_min() <= -1.0 && w.e_max() >= 0.0);
    }

    #[test]
    fn validate_flags_broken_hermiticity() {
        let mut h = MolecularHamiltonian::new(2, 1, true);
        h.set_one_body(0, 1, c(0.1, 0.2)).unwrap();
        h.set_one_body(1, 0, c(0.1, -0.2)).unwrap();
        h.validate(HERMITICITY_TOL).unwrap();
        h.set_one_body(1, 0, c(0.1, 0.2)).unwrap();
        assert!(matches!(h.validate(HERMITICITY_TOL), Err(Error::Validation(_))));
    }

    #[test]
    fn validate_rejects_complex_in_nonrelativistic_mode() {
        let mut h = MolecularHamiltonian::new(2, 1, false);
        h.set_one_body(0, 1, c(0.1, 0.2)).unwrap();
        h.set_one_body(1, 0, c(0.1, -0.2)).unwrap();
        assert!(h.validate(HERMITICITY_TOL).is_err());
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let mut h = MolecularHamiltonian::new(2, 1, false);
        assert!(matches!(h.set_one_body(0, 2, c(1.0, 0.0)), Err(Error::Index(_))));
        assert!(h.set_two_body(0, 1, 0, 5, c(1.0, 0.0)).is_err());
    }
}
