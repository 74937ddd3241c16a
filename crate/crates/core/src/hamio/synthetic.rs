//! Seeded random integrals with the symmetries of a physical Hamiltonian.

use num_complex::Complex64;
use rand::Rng;

use super::MolecularHamiltonian;
use crate::sim::rng_from_seed;

/// Integral content of a synthetic Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticTerms {
    OneBody,
    Full,
}

/// Random Hamiltonian over `n` spin orbitals with entries uniform in
/// `[-1, 1)` (real and imaginary parts when `complex`).
///
/// One-body integrals satisfy `h_pq = conj(h_qp)`. Two-body integrals are
/// averaged over `g_pqrs`, `g_qpsr`, `conj(g_rspq)` and `conj(g_srqp)`, which
/// makes the operator Hermitian.
pub fn random_hamiltonian(n: usize, n_electrons: usize, complex: bool, terms: SyntheticTerms, seed: u64) -> MolecularHamiltonian {
    let mut rng = rng_from_seed(seed);
    let draw = |rng: &mut crate::sim::SimRng| {
        let re = rng.random_range(-1.0..1.0);
        let im = if complex { rng.random_range(-1.0..1.0) } else { 0.0 };
        Complex64::new(re, im)
    };
    let mut h = MolecularHamiltonian::new(n, n_electrons, complex);
    h.set_core_energy(draw(&mut rng).re);
    for p in 0..n {
        for q in p..n {
            let mut v = draw(&mut rng);
            if p == q {
                v.im = 0.0;
            }
            h.set_one_body(p, q, v).expect("index in range");
            h.set_one_body(q, p, v.conj()).expect("index in range");
        }
    }
    if terms == SyntheticTerms::Full {
        let n4 = n * n * n * n;
        let raw: Vec<Complex64> = (0..n4).map(|_| draw(&mut rng)).collect();
        let at = |p: usize, q: usize, r: usize, s: usize| raw[((p * n + q) * n + r) * n + s];
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = (at(p, q, r, s) + at(q, p, s, r) + at(r, s, p, q).conj() + at(s, r, q, p).conj()) * 0.25;
                        h.set_two_body(p, q, r, s, v).expect("index in range");
                    }
                }
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamio::HERMITICITY_TOL;

    #[test]
    fn synthetic_integrals_are_hermitian() {
        for complex in [false, true] {
            let h = random_hamiltonian(4, 2, complex, SyntheticTerms::Full, 7);
            h.validate(HERMITICITY_TOL).unwrap();
            assert_eq!(h.one_body_terms().count(), 16);
            assert!(h.two_body_terms().count() > 200);
        }
        let h = random_hamiltonian(5, 1, true, SyntheticTerms::OneBody, 1);
        assert_eq!(h.two_body_terms().count(), 0);
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = random_hamiltonian(3, 1, true, SyntheticTerms::Full, 11);
        let b = random_hamiltonian(3, 1, true, SyntheticTerms::Full, 11);
        assert_eq!(a.to_complex_format(), b.to_complex_format());
    }
}
