use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::Statevector;
use crate::error::{Error, Result};
use crate::hamio::EnergyWindow;
use crate::secondq::FockBasisMatrix;

/// Largest matrix dimension handed to the eigensolver.
pub const MAX_EIGEN_DIM: usize = 1 << 16;

/// Residual bound `‖Hv − λv‖` per eigenpair, relative to `max(1, ‖H‖_max)`.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvector `i` as a normalized statevector.
    pub fn eigenstate(&self, i: usize) -> Result<Statevector> {
        if i >= self.dim() {
            return Err(Error::Index(format!("eigenvector {i} of {}", self.dim())));
        }
        Statevector::from_amplitudes(self.eigenvectors.column(i).iter().copied().collect())
    }

    /// Expansion coefficients `c_i = <u_i|psi>`.
    pub fn coefficients(&self, psi: &Statevector) -> Result<Vec<Complex64>> {
        if psi.dim() != self.dim() {
            return Err(Error::Validation(format!(
                "state of dimension {} against a spectrum of dimension {}",
                psi.dim(),
                self.dim()
            )));
        }
        Ok((0..self.dim())
            .map(|i| {
                self.eigenvectors
                    .column(i)
                    .iter()
                    .zip(psi.amplitudes())
                    .map(|(v, a)| v.conj() * a)
                    .sum()
            })
            .collect())
    }

    /// Weight of `psi` in the eigenspace of the lowest eigenvalue, with
    /// eigenvalues closer than `degeneracy_tol` treated as one level.
    pub fn ground_overlap2(&self, psi: &Statevector, degeneracy_tol: f64) -> Result<f64> {
        let c = self.coefficients(psi)?;
        let e0 = self.eigenvalues[0];
        Ok(self
            .eigenvalues
            .iter()
            .zip(&c)
            .take_while(|(e, _)| **e - e0 <= degeneracy_tol)
            .map(|(_, ci)| ci.norm_sqr())
            .sum())
    }

    /// `λ_1 − λ_0`, or zero for a one-dimensional space.
    pub fn gap(&self) -> f64 {
        if self.dim() < 2 {
            0.0
        } else {
            self.eigenvalues[1] - self.eigenvalues[0]
        }
    }

    /// Largest `‖Hv − λv‖` over all pairs.
    pub fn max_residual(&self, h: &DMatrix<Complex64>) -> f64 {
        (0..self.dim())
            .map(|i| {
                let v = self.eigenvectors.column(i);
                (h * v - v * Complex64::new(self.eigenvalues[i], 0.0)).norm()
            })
            .fold(0.0, f64::max)
    }
}

pub fn diagonalize(h: &FockBasisMatrix) -> Result<SpectralDecomposition> {
    diagonalize_dense(h.matrix())
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn diagonalize_dense(h: &DMatrix<Complex64>) -> Result<SpectralDecomposition> {
    let dim = h.nrows();
    if dim != h.ncols() {
        return Err(Error::Validation(format!("{}x{} matrix is not square", h.nrows(), h.ncols())));
    }
    if dim > MAX_EIGEN_DIM {
        return Err(Error::Capacity(format!("dimension {dim} exceeds the eigensolver limit {MAX_EIGEN_DIM}")));
    }
    if dim == 0 {
        return Err(Error::Validation("empty matrix".into()));
    }
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    let decomp = SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    };
    let scale = h.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let residual = decomp.max_residual(h);
    if residual.is_nan() || residual >= RESIDUAL_TOL * scale {
        return Err(Error::Numeric(format!("eigenpair residual {residual:e} above tolerance")));
    }
    Ok(decomp)
}

/// `V f(Λ) V†`.
pub fn spectral_unitary(d: &SpectralDecomposition, f: impl Fn(f64) -> Complex64) -> DMatrix<Complex64> {
    let v = &d.eigenvectors;
    let mut scaled = v.clone();
    for (j, &e) in d.eigenvalues.iter().enumerate() {
        let fj = f(e);
        for x in scaled.column_mut(j).iter_mut() {
            *x *= fj;
        }
    }
    scaled * v.adjoint()
}

/// `U = exp(iτ(E_max − H))`.
pub fn matrix_exponential(h: &FockBasisMatrix, window: &EnergyWindow) -> Result<DMatrix<Complex64>> {
    let d = diagonalize(h)?;
    Ok(window_unitary(&d, window))
}

pub(crate) fn window_unitary(d: &SpectralDecomposition, window: &EnergyWindow) -> DMatrix<Complex64> {
    let (tau, e_max) = (window.tau(), window.e_max());
    spectral_unitary(d, |e| Complex64::from_polar(1.0, tau * (e_max - e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::unitarity_deviation;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn diagonal_spectrum() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0), c(1.0), c(2.0)]));
        let d = diagonalize_dense(&h).unwrap();
        assert_eq!(d.eigenvalues(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn hopping_pair() {
        let t = 0.37;
        let h = DMatrix::from_row_slice(2, 2, &[c(0.0), c(t), c(t), c(0.0)]);
        let d = diagonalize_dense(&h).unwrap();
        assert!((d.eigenvalues()[0] + t).abs() < 1e-15 && (d.eigenvalues()[1] - t).abs() < 1e-15);
        assert!((d.gap() - 2.0 * t).abs() < 1e-14);
    }

    #[test]
    fn complex_reconstruction() {
        let h = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(1.0),
                Complex64::new(0.2, 0.5),
                Complex64::new(0.0, -0.3),
                Complex64::new(0.2, -0.5),
                c(-0.4),
                c(0.1),
                Complex64::new(0.0, 0.3),
                c(0.1),
                c(0.25),
            ],
        );
        let d = diagonalize_dense(&h).unwrap();
        let back = spectral_unitary(&d, c);
        assert!((back - &h).iter().all(|v| v.norm() < 1e-12));
        assert!(unitarity_deviation(d.eigenvectors()) < 1e-12);
    }

    #[test]
    fn zero_hamiltonian_exponential_is_identity() {
        let h = FockBasisMatrix::from_matrix(DMatrix::zeros(4, 4)).unwrap();
        let w = EnergyWindow::new(-1.0, 0.0).unwrap();
        let u = matrix_exponential(&h, &w).unwrap();
        assert!((u - DMatrix::<Complex64>::identity(4, 4)).iter().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn window_edges_wrap() {
        // Both ends of [-1, 0] land on phase 0 mod 1.
        let h = FockBasisMatrix::from_matrix(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-1.0), c(0.0)]))).unwrap();
        let u = matrix_exponential(&h, &EnergyWindow::new(-1.0, 0.0).unwrap()).unwrap();
        assert!((u[(0, 0)] - c(1.0)).norm() < 1e-12 && (u[(1, 1)] - c(1.0)).norm() < 1e-12);
    }
}
