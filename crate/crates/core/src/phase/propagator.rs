use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{compile_propagator, TrotterPlan};
use crate::error::{Error, Result};
use crate::hamio::{EnergyWindow, MolecularHamiltonian};
use crate::secondq::{build_fock_matrix, hamiltonian_to_pauli};
use crate::sim::{diagonalize_dense, unitarity_deviation, SpectralDecomposition, Statevector, UNITARY_TOL};

use super::PropagatorMode;

/// Source of controlled powers `U^{2^j}` acting on the lowest qubits of a
/// register.
#[derive(Debug, Clone)]
pub enum Propagator {
    /// `U = exp(iτ(E_max − H))` applied through the eigenbasis of `H`.
    /// Each power uses the exact phase `frac(2^j φ_k)`, so no precision is
    /// lost for large `j`.
    Spectral {
        eigenvectors: DMatrix<Complex64>,
        phases: Vec<f64>,
    },
    /// Arbitrary unitary with powers obtained by repeated squaring.
    Dense { powers: Vec<DMatrix<Complex64>> },
}

impl Propagator {
    pub fn spectral(decomp: &SpectralDecomposition, window: &EnergyWindow) -> Self {
        Propagator::Spectral {
            eigenvectors: decomp.eigenvectors().clone(),
            phases: decomp.eigenvalues().iter().map(|&e| window.phase_of(e)).collect(),
        }
    }

    /// Powers `u^{2^j}` for `j < n_powers`.
    pub fn from_unitary(u: DMatrix<Complex64>, n_powers: usize) -> Result<Self> {
        let dev = unitarity_deviation(&u);
        if dev > UNITARY_TOL || !u.nrows().is_power_of_two() {
            return Err(Error::Validation(format!("propagator is not a unitary on qubits (deviation {dev:e})")));
        }
        let mut powers = Vec::with_capacity(n_powers.max(1));
        powers.push(u);
        while powers.len() < n_powers {
            let last = powers.last().unwrap();
            powers.push(last * last);
        }
        Ok(Propagator::Dense { powers })
    }

    /// Propagator for `h` over `window`, either exact or from a Trotter
    /// circuit, able to apply powers `2^j` for `j < n_powers`.
    pub fn for_hamiltonian(h: &MolecularHamiltonian, window: &EnergyWindow, mode: PropagatorMode, n_powers: usize) -> Result<Self> {
        match mode {
            PropagatorMode::Dense => {
                let m = build_fock_matrix(h)?;
                Ok(Propagator::spectral(&diagonalize_dense(m.matrix())?, window))
            }
            PropagatorMode::Trotter(n) => {
                let hp = hamiltonian_to_pauli(h)?;
                let circ = compile_propagator(&hp, window, &TrotterPlan::new(n)?)?;
                Propagator::from_unitary(circ.unitary()?, n_powers)
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Propagator::Spectral { phases, .. } => phases.len(),
            Propagator::Dense { powers } => powers[0].nrows(),
        }
    }

    pub fn n_system(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn max_power(&self) -> Option<usize> {
        match self {
            Propagator::Spectral { .. } => None,
            Propagator::Dense { powers } => Some(powers.len()),
        }
    }

    /// Applies `U^{2^j}` to qubits `0..n_system` on every branch where
    /// `control` is set.
    pub fn apply_controlled_power(&self, state: &mut Statevector, j: usize, control: usize) -> Result<()> {
        let dim = self.dim();
        if control < self.n_system() || control >= state.n_qubits() {
            return Err(Error::Index(format!(
                "control qubit {control} must lie above the {}-qubit system inside a {}-qubit register",
                self.n_system(),
                state.n_qubits()
            )));
        }
        if let Some(limit) = self.max_power() {
            if j >= limit {
                return Err(Error::Capacity(format!("power 2^{j} requested but only {limit} powers were prepared")));
            }
        }
        let cbit = 1usize << control;
        let amps = state.amplitudes_mut();
        let mut buf = vec![Complex64::new(0.0, 0.0); dim];
        match self {
            Propagator::Spectral { eigenvectors, phases } => {
                let scale = 2f64.powi(j as i32);
                let factors: Vec<Complex64> = phases
                    .iter()
                    .map(|p| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (p * scale).rem_euclid(1.0)))
                    .collect();
                for block in amps.chunks_exact_mut(dim).enumerate().filter(|(b, _)| (b * dim) & cbit != 0).map(|(_, s)| s) {
                    for (k, slot) in buf.iter_mut().enumerate() {
                        let col = eigenvectors.column(k);
                        *slot = factors[k] * col.iter().zip(block.iter()).map(|(v, a)| v.conj() * a).sum::<Complex64>();
                    }
                    for (r, out) in block.iter_mut().enumerate() {
                        *out = (0..dim).map(|k| eigenvectors[(r, k)] * buf[k]).sum();
                    }
                }
            }
            Propagator::Dense { powers } => {
                let u = &powers[j];
                for block in amps.chunks_exact_mut(dim).enumerate().filter(|(b, _)| (b * dim) & cbit != 0).map(|(_, s)| s) {
                    buf.copy_from_slice(block);
                    for (r, out) in block.iter_mut().enumerate() {
                        *out = (0..dim).map(|c| u[(r, c)] * buf[c]).sum();
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    #[test]
    fn eigenvector_kicks_back_its_phase() {
        // diag(-1, 0.5) on one qubit, window [-2, 2].
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(-1.0, 0.0), Complex64::new(0.5, 0.0)]));
        let w = EnergyWindow::new(-2.0, 2.0).unwrap();
        let prop = Propagator::spectral(&diagonalize_dense(&h).unwrap(), &w);
        let mut s = Statevector::basis(2, 0).unwrap();
        s.apply_gate(&Gate::H(1)).unwrap();
        prop.apply_controlled_power(&mut s, 0, 1).unwrap();
        let a = s.amplitudes();
        let rel = a[2] / a[0];
        let phi = w.phase_of(-1.0);
        assert!((rel - Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phi)).norm() < 1e-14);
    }

    #[test]
    fn dense_and_spectral_powers_agree() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(0.3, 0.0), Complex64::new(0.1, 0.2), Complex64::new(0.1, -0.2), Complex64::new(-0.4, 0.0)],
        );
        let w = EnergyWindow::new(-1.0, 1.0).unwrap();
        let d = diagonalize_dense(&h).unwrap();
        let spectral = Propagator::spectral(&d, &w);
        let dense = Propagator::from_unitary(crate::sim::spectral_unitary(&d, |e| Complex64::from_polar(1.0, w.tau() * (w.e_max() - e))), 6).unwrap();
        for j in 0..6 {
            let mut a = Statevector::from_amplitudes(vec![Complex64::new(0.1, 0.0), Complex64::new(0.2, 0.3), Complex64::new(0.5, 0.0), Complex64::new(-0.3, 0.6)]).unwrap();
            let mut b = a.clone();
            spectral.apply_controlled_power(&mut a, j, 1).unwrap();
            dense.apply_controlled_power(&mut b, j, 1).unwrap();
            assert!((a.overlap(&b).unwrap().norm() - 1.0).abs() < 1e-12);
        }
        let mut s = Statevector::basis(2, 0).unwrap();
        assert!(matches!(dense.apply_controlled_power(&mut s, 6, 1), Err(Error::Capacity(_))));
        assert!(matches!(dense.apply_controlled_power(&mut s, 0, 0), Err(Error::Index(_))));
    }
}
