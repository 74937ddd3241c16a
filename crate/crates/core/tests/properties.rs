mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use qfci::circuit::Gate;
use qfci::hamio::{fci_dimension_rel, mk_sector_sum, random_hamiltonian, EnergyWindow, SyntheticTerms};
use qfci::phase::{analytic_pea_distribution, encode_phase, recover_energy};
use qfci::prep::{guess_state, GuessSpec};
use qfci::secondq::{build_fock_matrix, hamiltonian_to_pauli, jw_annihilation, jw_creation, number_operator, Pauli, PauliPattern};
use qfci::sim::{diagonalize, diagonalize_dense, Statevector};

use common::max_abs_diff;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn jordan_wigner_matches_determinants(n in 1usize..=6, complex in any::<bool>(), seed in any::<u64>()) {
        let h = random_hamiltonian(n, n / 2, complex, SyntheticTerms::Full, seed);
        let jw = hamiltonian_to_pauli(&h).unwrap();
        prop_assert!(jw.is_hermitian(1e-12));
        let fock = build_fock_matrix(&h).unwrap();
        prop_assert!(max_abs_diff(&jw.to_dense().unwrap(), fock.matrix()) < 1e-10);
    }

    #[test]
    fn hamiltonians_conserve_particle_number(n in 1usize..=6, complex in any::<bool>(), seed in any::<u64>()) {
        let h = random_hamiltonian(n, n / 2, complex, SyntheticTerms::Full, seed);
        let hm = hamiltonian_to_pauli(&h).unwrap().to_dense().unwrap();
        let nm = number_operator(n).to_dense().unwrap();
        let comm = &hm * &nm - &nm * &hm;
        prop_assert!(comm.iter().all(|v| v.norm() < 1e-10));
    }

    #[test]
    fn ladder_operators_anticommute(n in 1usize..=6, p in 0usize..6, q in 0usize..6) {
        prop_assume!(p < n && q < n);
        let a = jw_annihilation(p, n).unwrap();
        let ad = jw_creation(q, n).unwrap();
        let anti = a.multiply(&ad).add(&ad.multiply(&a));
        let expected = if p == q { 1.0 } else { 0.0 };
        prop_assert!((anti.identity_coefficient() - Complex64::new(expected, 0.0)).norm() < 1e-12);
        prop_assert!(anti.terms().iter().filter(|t| !t.is_identity()).all(|t| t.coefficient().norm() < 1e-12));
    }

    #[test]
    fn creation_is_adjoint_of_annihilation(n in 1usize..=8, p in 0usize..8) {
        prop_assume!(p < n);
        let a = jw_annihilation(p, n).unwrap().to_dense().unwrap();
        let ad = jw_creation(p, n).unwrap().to_dense().unwrap();
        prop_assert!(max_abs_diff(&a.adjoint(), &ad) < 1e-15);
    }

    #[test]
    fn gap_matches_direct_diagonalization(n in 1usize..=4, complex in any::<bool>(), seed in any::<u64>()) {
        let h = random_hamiltonian(n, n / 2, complex, SyntheticTerms::Full, seed);
        let fock = build_fock_matrix(&h).unwrap();
        let d = diagonalize(&fock).unwrap();
        prop_assert!(d.max_residual(fock.matrix()) < 1e-9);
        let e = fock.matrix().clone().symmetric_eigenvalues();
        let mut e: Vec<f64> = e.iter().cloned().collect();
        e.sort_by(f64::total_cmp);
        prop_assert!((d.gap() - (e[1] - e[0])).abs() < 1e-9);
    }
}

fn pauli() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    prop_oneof![
        q.clone().prop_map(Gate::H),
        q.clone().prop_map(Gate::Y),
        (q.clone(), -5.0..5.0f64).prop_map(|(qubit, theta)| Gate::Rz { qubit, theta }),
        (q.clone(), 1u32..6, any::<bool>()).prop_map(|(qubit, j, adjoint)| Gate::Rj { qubit, j, adjoint }),
        (q.clone(), q.clone()).prop_filter("distinct", |(a, b)| a != b).prop_map(|(control, target)| Gate::Cnot { control, target }),
        (q.clone(), q, -5.0..5.0f64)
            .prop_filter("distinct", |(a, b, _)| a != b)
            .prop_map(|(control, qubit, theta)| Gate::Rz { qubit, theta }.controlled(control)),
    ]
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn pauli_products_associate(a in prop::collection::vec(pauli(), 4), b in prop::collection::vec(pauli(), 4), c in prop::collection::vec(pauli(), 4)) {
        let (pa, pb, pc) = (PauliPattern::from_factors(&a), PauliPattern::from_factors(&b), PauliPattern::from_factors(&c));
        let (k1, ab) = pa.multiply(&pb);
        let (k2, ab_c) = ab.multiply(&pc);
        let (k3, bc) = pb.multiply(&pc);
        let (k4, a_bc) = pa.multiply(&bc);
        prop_assert_eq!(ab_c, a_bc);
        prop_assert_eq!((k1 + k2) % 4, (k3 + k4) % 4);
    }

    #[test]
    fn gates_preserve_norm(gates in prop::collection::vec(gate(4), 1..40), seed in any::<u64>()) {
        let mut s = qfci::prep::random_state(4, seed).unwrap();
        for g in &gates {
            s.apply_gate(g).unwrap();
        }
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gate_then_adjoint_is_identity(gates in prop::collection::vec(gate(3), 1..20), seed in any::<u64>()) {
        let start = qfci::prep::random_state(3, seed).unwrap();
        let mut s = start.clone();
        for g in &gates {
            s.apply_gate(g).unwrap();
        }
        for g in gates.iter().rev() {
            s.apply_gate(&g.adjoint()).unwrap();
        }
        prop_assert!((start.overlap(&s).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn energy_phase_round_trip(lo in -50.0..0.0f64, width in 0.1..50.0f64, t in 0.0..1.0f64) {
        let w = EnergyWindow::new(lo, lo + width).unwrap();
        let e = lo + t * width;
        prop_assume!(e > lo);
        let phi = encode_phase(e, &w);
        prop_assert!((0.0..1.0).contains(&phi));
        prop_assert!((recover_energy(phi, &w) - e).abs() < 1e-12 * (1.0 + e.abs()));
    }

    #[test]
    fn success_bound_grows_with_register(delta in 0.0..1.0f64, m in 1usize..30) {
        let s1 = analytic_pea_distribution(delta, m).unwrap().sum();
        let s2 = analytic_pea_distribution(delta, m + 1).unwrap().sum();
        prop_assert!((0.81 - 1e-12..=1.0 + 1e-12).contains(&s1));
        // The bracketing mass only decreases towards its limit as m grows.
        prop_assert!(s2 <= s1 + 1e-12);
    }

    #[test]
    fn guess_threshold_drops_small_amplitudes(amps in prop::collection::vec(-1.0..1.0f64, 8), threshold in 0.0..0.5f64) {
        prop_assume!(amps.iter().any(|a| a.abs() > threshold));
        let terms: Vec<(String, Complex64)> = amps
            .iter()
            .enumerate()
            .map(|(i, &a)| ((0..3).map(|b| if i >> b & 1 == 1 { '1' } else { '0' }).collect(), Complex64::new(a, 0.0)))
            .collect();
        let s = guess_state(&GuessSpec { terms, normalize: true }, threshold).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        for (i, a) in amps.iter().enumerate() {
            if a.abs() <= threshold {
                prop_assert_eq!(s.amplitudes()[i], Complex64::new(0.0, 0.0));
            } else {
                prop_assert!(s.amplitudes()[i].norm() > 0.0);
            }
        }
    }

    #[test]
    fn relativistic_dimension_is_sector_sum(m in 1u64..40, n in 0u64..80) {
        prop_assume!(n <= 2 * m);
        prop_assert_eq!(fci_dimension_rel(m, n).unwrap(), mk_sector_sum(m, n));
    }
}

#[test]
fn statevector_from_dense_eigenvector_is_eigenstate() {
    let h = random_hamiltonian(3, 1, true, SyntheticTerms::Full, 9);
    let fock = build_fock_matrix(&h).unwrap();
    let d = diagonalize_dense(fock.matrix()).unwrap();
    let v: Statevector = d.eigenstate(0).unwrap();
    let c = d.coefficients(&v).unwrap();
    assert!((c[0].norm_sqr() - 1.0).abs() < 1e-12);
}
