//! Circuit representation and the compiler from Pauli sums to gates.

mod gate;

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamio::{EnergyWindow, MolecularHamiltonian, HERMITICITY_TOL};
use crate::secondq::{hamiltonian_to_pauli, Pauli, PauliString, PauliSum, MAX_DENSE_ORBITALS};
use crate::sim::Statevector;

pub use gate::{Gate, GateCount, Matrix2, CONTROLLED_ROTATION_COST, CONTROLLED_SINGLE_COST, TOFFOLI_COST};

/// Ordered gate list on a fixed register, with a tracked global phase.
///
/// The global phase is kept explicitly because it turns into a relative
/// phase once the circuit is controlled.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    global_phase: f64,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
            global_phase: 0.0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Phase `e^{i global_phase}` multiplying the whole circuit.
    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    pub fn add_global_phase(&mut self, phase: f64) {
        self.global_phase += phase;
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        g.validate(self.n_qubits)?;
        self.gates.push(g);
        Ok(())
    }

    /// Appends the gates and phase of `other`.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits > self.n_qubits {
            return Err(Error::Index(format!(
                "cannot append a {}-qubit circuit to a {}-qubit one",
                other.n_qubits, self.n_qubits
            )));
        }
        self.gates.extend_from_slice(&other.gates);
        self.global_phase += other.global_phase;
        Ok(())
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::adjoint).collect(),
            global_phase: -self.global_phase,
        }
    }

    /// Same circuit with qubit `q` moved to `offset + q` in a register of
    /// `n_qubits`.
    pub fn shifted(&self, offset: usize, n_qubits: usize) -> Result<Circuit> {
        if offset + self.n_qubits > n_qubits {
            return Err(Error::Index(format!(
                "shifting {} qubits by {offset} overflows a {n_qubits}-qubit register",
                self.n_qubits
            )));
        }
        Ok(Circuit {
            n_qubits,
            gates: self.gates.iter().map(|g| g.remap(&|q| q + offset)).collect(),
            global_phase: self.global_phase,
        })
    }

    /// Total elementary-gate equivalent of every gate in the circuit.
    pub fn cost(&self) -> GateCount {
        self.gates.iter().map(Gate::elementary_cost).fold(GateCount::default(), |a, b| a + b)
    }

    /// Dense unitary, built column by column from basis states.
    pub fn unitary(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > MAX_DENSE_ORBITALS {
            return Err(Error::Capacity(format!(
                "dense unitary of {} qubits exceeds the limit of {MAX_DENSE_ORBITALS}",
                self.n_qubits
            )));
        }
        let dim = 1usize << self.n_qubits;
        let mut u = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut s = Statevector::basis(self.n_qubits, col)?;
            s.apply_circuit(self)?;
            u.column_mut(col).copy_from_slice(s.amplitudes());
        }
        Ok(u)
    }

    /// One gate per line, `GATE q[,q2] [angle]`, preceded by the register
    /// size and global phase.
    pub fn to_text(&self) -> String {
        let mut out = format!("QUBITS {}\nGPHASE {:?}\n", self.n_qubits, self.global_phase);
        for g in &self.gates {
            let _ = writeln!(out, "{g}");
        }
        out
    }
}

fn real_coefficient(s: &PauliString) -> Result<f64> {
    let c = s.coefficient();
    if c.im.abs() > HERMITICITY_TOL {
        return Err(Error::Validation(format!("Pauli string {} has a non-real coefficient {c}", s.pattern())));
    }
    Ok(c.re)
}

/// `exp(iθ c P)` for a string `c P` with real `c`.
///
/// Each X and Y factor is rotated onto Z, the parity of the active qubits is
/// collected onto the highest one by a CNOT ladder, `R_z(−2θc)` is applied
/// there, and everything is undone in reverse.
pub fn exp_pauli_string(s: &PauliString, theta: f64) -> Result<Circuit> {
    if s.is_identity() {
        return Err(Error::Validation("identity string has no circuit; treat it as a global phase".into()));
    }
    if !theta.is_finite() {
        return Err(Error::Validation(format!("non-finite angle {theta}")));
    }
    let coef = real_coefficient(s)?;
    let pattern = s.pattern();
    let support = pattern.support();
    let mut c = Circuit::new(s.n_qubits());

    let mut into_z = Vec::new();
    let mut out_of_z = Vec::new();
    for &q in &support {
        match pattern.factor(q) {
            Pauli::X => {
                into_z.push(Gate::H(q));
                out_of_z.push(Gate::H(q));
            }
            Pauli::Y => {
                into_z.push(Gate::Ydg(q));
                out_of_z.push(Gate::Y(q));
            }
            _ => {}
        }
    }
    let ladder: Vec<Gate> = support
        .windows(2)
        .map(|w| Gate::Cnot {
            control: w[0],
            target: w[1],
        })
        .collect();
    let last = *support.last().expect("non-identity string has support");

    c.gates.extend(into_z);
    c.gates.extend(ladder.iter().cloned());
    c.gates.push(Gate::Rz {
        qubit: last,
        theta: -2.0 * theta * coef,
    });
    c.gates.extend(ladder.into_iter().rev());
    c.gates.extend(out_of_z);
    Ok(c)
}

/// Order in which the terms of a Trotter slice are applied.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TermOrdering {
    /// Diagonal strings first, then lexicographic by factors.
    #[default]
    Canonical,
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrotterPlan {
    pub n_slices: usize,
    pub ordering: TermOrdering,
}

impl TrotterPlan {
    pub fn new(n_slices: usize) -> Result<Self> {
        if n_slices == 0 {
            return Err(Error::Domain("a Trotter plan needs at least one slice".into()));
        }
        Ok(TrotterPlan {
            n_slices,
            ordering: TermOrdering::Canonical,
        })
    }
}

/// First-order Trotter circuit for `exp(iτ(E_max − H))`.
///
/// Each slice applies `exp(−iτ c_k P_k / N)` for every non-identity term.
/// `τ E_max` and the identity term go into the global phase.
pub fn compile_propagator(hp: &PauliSum, window: &EnergyWindow, plan: &TrotterPlan) -> Result<Circuit> {
    if plan.n_slices == 0 {
        return Err(Error::Domain("a Trotter plan needs at least one slice".into()));
    }
    if !hp.is_hermitian(HERMITICITY_TOL) {
        return Err(Error::Validation("propagator requested for a non-Hermitian operator".into()));
    }
    let tau = window.tau();
    let mut terms: Vec<&PauliString> = hp.terms().iter().filter(|t| !t.is_identity()).collect();
    if plan.ordering == TermOrdering::Reversed {
        terms.reverse();
    }
    let angle = -tau / plan.n_slices as f64;
    let mut slice = Circuit::new(hp.n_qubits());
    for t in &terms {
        slice.append(&exp_pauli_string(t, angle)?)?;
    }
    let mut c = Circuit::new(hp.n_qubits());
    for _ in 0..plan.n_slices {
        c.append(&slice)?;
    }
    c.global_phase = tau * (window.e_max() - hp.identity_coefficient().re);
    Ok(c)
}

/// Every gate of `c` controlled on `control`, with the global phase of `c`
/// plus `extra_phase` realized as a phase gate on the control.
pub fn controlled(c: &Circuit, control: usize, extra_phase: f64) -> Result<Circuit> {
    if c.gates.iter().any(|g| g.qubits().contains(&control)) {
        return Err(Error::Index(format!("control qubit {control} is already used by the circuit")));
    }
    let n = c.n_qubits.max(control + 1);
    let mut out = Circuit::new(n);
    out.gates = c.gates.iter().map(|g| g.clone().controlled(control)).collect();
    let phase = c.global_phase + extra_phase;
    if phase != 0.0 {
        out.gates.push(Gate::Phase { qubit: control, lambda: phase });
    }
    Ok(out)
}

/// Quantum Fourier transform without the final swaps.
///
/// With qubit `q` as bit `q` of the basis index the unitary is `F R`, where
/// `F_{jk} = e^{2πijk/2^n}/√2^n` and `R` reverses the bit order.
pub fn qft_circuit(n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::Domain("QFT needs at least one qubit".into()));
    }
    let mut c = Circuit::new(n);
    for t in 0..n {
        c.gates.push(Gate::H(t));
        for ctl in t + 1..n {
            c.gates.push(
                Gate::Rj {
                    qubit: t,
                    j: (ctl - t + 1) as u32,
                    adjoint: false,
                }
                .controlled(ctl),
            );
        }
    }
    Ok(c)
}

/// Inverse of [`qft_circuit`]: `R F†`.
pub fn inverse_qft_circuit(n: usize) -> Result<Circuit> {
    Ok(qft_circuit(n)?.inverse())
}

/// Cost of one controlled-string exponential: basis changes become
/// controlled single-qubit gates, ladder CNOTs become Toffolis, and the
/// rotation becomes a controlled rotation.
fn controlled_string_cost(weight: u64, off_diagonal: u64) -> GateCount {
    CONTROLLED_SINGLE_COST * (2 * off_diagonal) + TOFFOLI_COST * (2 * (weight - 1)) + CONTROLLED_ROTATION_COST
}

/// Elementary gates in one controlled application of the single-slice
/// propagator of `h`, counted from its Pauli strings without building the
/// circuit. The phase gate carrying `τ E_max` on the control is excluded.
pub fn count_gates(h: &MolecularHamiltonian) -> Result<GateCount> {
    Ok(count_pauli_gates(&hamiltonian_to_pauli(h)?))
}

pub fn count_pauli_gates(hp: &PauliSum) -> GateCount {
    hp.terms()
        .iter()
        .filter(|t| !t.is_identity())
        .map(|t| {
            let p = t.pattern();
            controlled_string_cost(p.weight() as u64, p.off_diagonal_weight() as u64)
        })
        .fold(GateCount::default(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{diagonalize_dense, spectral_unitary, unitarity_deviation};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn dense_exp(h: &DMatrix<Complex64>, theta: f64) -> DMatrix<Complex64> {
        let d = diagonalize_dense(h).unwrap();
        spectral_unitary(&d, |e| Complex64::from_polar(1.0, theta * e))
    }

    #[test]
    fn zz_exponential() {
        let tau = 0.3;
        let s = PauliString::parse(c(1.0, 0.0), "ZZ").unwrap();
        let circ = exp_pauli_string(&s, tau).unwrap();
        assert_eq!(circ.len(), 3);
        let u = circ.unitary().unwrap();
        let e = |x: f64| Complex64::from_polar(1.0, x);
        let expect = [e(tau), e(-tau), e(-tau), e(tau)];
        for (i, v) in expect.iter().enumerate() {
            assert!((u[(i, i)] - v).norm() < 1e-14);
        }
    }

    #[test]
    fn xx_and_mixed_strings_match_dense() {
        for (f, coef, theta) in [("XX", 1.0, 0.8), ("YZX", -0.4, 1.3), ("IYIY", 0.7, -0.6), ("XIZY", 2.0, 0.11)] {
            let s = PauliString::parse(c(coef, 0.0), f).unwrap();
            let u = exp_pauli_string(&s, theta).unwrap().unitary().unwrap();
            let m = PauliSum::from_terms(s.n_qubits(), [s.clone()]).to_dense().unwrap();
            assert!(max_diff(&u, &dense_exp(&m, theta)) < 1e-12, "{f}");
        }
    }

    #[test]
    fn zero_angle_is_identity() {
        let s = PauliString::parse(c(1.0, 0.0), "Z").unwrap();
        let u = exp_pauli_string(&s, 0.0).unwrap().unitary().unwrap();
        assert!(max_diff(&u, &DMatrix::identity(2, 2)) < 1e-15);
    }

    #[test]
    fn string_errors() {
        let id = PauliString::parse(c(1.0, 0.0), "II").unwrap();
        assert!(matches!(exp_pauli_string(&id, 1.0), Err(Error::Validation(_))));
        let cplx = PauliString::parse(c(1.0, 0.5), "XZ").unwrap();
        assert!(matches!(exp_pauli_string(&cplx, 1.0), Err(Error::Validation(_))));
    }

    #[test]
    fn commuting_propagator_is_exact() {
        let hp = PauliSum::from_terms(
            3,
            [
                PauliString::parse(c(0.5, 0.0), "III").unwrap(),
                PauliString::parse(c(-0.3, 0.0), "ZIZ").unwrap(),
                PauliString::parse(c(0.2, 0.0), "IZI").unwrap(),
                PauliString::parse(c(0.1, 0.0), "ZZZ").unwrap(),
            ],
        );
        let w = EnergyWindow::new(-1.0, 1.5).unwrap();
        let exact = {
            let h = hp.to_dense().unwrap();
            let d = diagonalize_dense(&h).unwrap();
            spectral_unitary(&d, |e| Complex64::from_polar(1.0, w.tau() * (w.e_max() - e)))
        };
        for n in [1, 3] {
            let u = compile_propagator(&hp, &w, &TrotterPlan::new(n).unwrap()).unwrap().unitary().unwrap();
            assert!(max_diff(&u, &exact) < 1e-12);
        }
    }

    #[test]
    fn trotter_error_halves_with_slices() {
        let hp = PauliSum::from_terms(
            2,
            [
                PauliString::parse(c(0.35, 0.0), "XX").unwrap(),
                PauliString::parse(c(0.35, 0.0), "YY").unwrap(),
                PauliString::parse(c(0.5, 0.0), "ZI").unwrap(),
            ],
        );
        let w = EnergyWindow::new(-1.5, 1.5).unwrap();
        let d = diagonalize_dense(&hp.to_dense().unwrap()).unwrap();
        let exact = spectral_unitary(&d, |e| Complex64::from_polar(1.0, w.tau() * (w.e_max() - e)));
        let err = |n: usize| {
            let u = compile_propagator(&hp, &w, &TrotterPlan::new(n).unwrap()).unwrap().unitary().unwrap();
            (u - &exact).singular_values().max()
        };
        for n in [4, 8, 16, 32] {
            let ratio = err(n) / err(2 * n);
            assert!((1.7..=2.3).contains(&ratio), "N = {n}: ratio {ratio}");
        }
    }

    #[test]
    fn zero_hamiltonian_propagator_is_a_phase() {
        let w = EnergyWindow::new(-0.5, 0.25).unwrap();
        let circ = compile_propagator(&PauliSum::zero(2), &w, &TrotterPlan::new(4).unwrap()).unwrap();
        assert!(circ.is_empty());
        assert!((circ.global_phase() - w.tau() * 0.25).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_propagator_rejected() {
        let hp = PauliSum::from_terms(1, [PauliString::parse(c(0.0, 1.0), "X").unwrap()]);
        let w = EnergyWindow::new(-1.0, 1.0).unwrap();
        assert!(matches!(
            compile_propagator(&hp, &w, &TrotterPlan::new(1).unwrap()),
            Err(Error::Validation(_))
        ));
        assert!(TrotterPlan::new(0).is_err());
    }

    #[test]
    fn controlled_identity_is_phase_on_control() {
        let mut c0 = Circuit::new(2);
        c0.add_global_phase(0.4);
        let cc = controlled(&c0, 2, 0.3).unwrap();
        let u = cc.unitary().unwrap();
        for i in 0..8 {
            let expect = if i & 4 != 0 { Complex64::from_polar(1.0, 0.7) } else { c(1.0, 0.0) };
            assert!((u[(i, i)] - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn controlled_cnot_is_toffoli() {
        let mut c0 = Circuit::new(2);
        c0.push(Gate::Cnot { control: 0, target: 1 }).unwrap();
        let u = controlled(&c0, 2, 0.0).unwrap().unitary().unwrap();
        let mut t = DMatrix::<Complex64>::identity(8, 8);
        t.swap_columns(5, 7);
        assert!(max_diff(&u, &t) < 1e-15);
        assert!(matches!(controlled(&c0, 1, 0.0), Err(Error::Index(_))));
    }

    #[test]
    fn controlled_propagator_is_block_diagonal() {
        let hp = PauliSum::from_terms(
            2,
            [
                PauliString::parse(c(0.2, 0.0), "XX").unwrap(),
                PauliString::parse(c(0.2, 0.0), "YY").unwrap(),
                PauliString::parse(c(-0.5, 0.0), "ZI").unwrap(),
            ],
        );
        let w = EnergyWindow::new(-1.5, 1.5).unwrap();
        let base = compile_propagator(&hp, &w, &TrotterPlan::new(1).unwrap()).unwrap();
        let inner = base.unitary().unwrap();
        let u = controlled(&base, 2, 0.0).unwrap().unitary().unwrap();
        assert!(max_diff(&u.view((0, 0), (4, 4)).into_owned(), &DMatrix::identity(4, 4)) < 1e-14);
        assert!(max_diff(&u.view((4, 4), (4, 4)).into_owned(), &inner) < 1e-14);
        assert!(u.view((0, 4), (4, 4)).iter().all(|v| v.norm() < 1e-14));
        assert!(unitarity_deviation(&u) < 1e-12);
    }

    fn bit_reverse(x: usize, n: usize) -> usize {
        (0..n).fold(0, |acc, b| acc | ((x >> b) & 1) << (n - 1 - b))
    }

    #[test]
    fn qft_is_dft_times_reversal() {
        for n in 1..=4 {
            let dim = 1usize << n;
            let u = qft_circuit(n).unwrap().unitary().unwrap();
            let f = DMatrix::from_fn(dim, dim, |j, k| {
                Complex64::from_polar(1.0 / (dim as f64).sqrt(), 2.0 * PI * (j * k) as f64 / dim as f64)
            });
            let r = DMatrix::from_fn(dim, dim, |j, k| if bit_reverse(k, n) == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
            assert!(max_diff(&u, &(&f * &r)) < 1e-12, "n = {n}");
            let inv = inverse_qft_circuit(n).unwrap().unitary().unwrap();
            assert!(max_diff(&(inv * &u), &DMatrix::identity(dim, dim)) < 1e-12);
        }
        assert_eq!(qft_circuit(1).unwrap().gates(), &[Gate::H(0)]);
        assert_eq!(qft_circuit(5).unwrap().len(), 15);
        assert!(matches!(qft_circuit(0), Err(Error::Domain(_))));
    }

    #[test]
    fn analytic_count_matches_controlled_circuit() {
        let hp = PauliSum::from_terms(
            4,
            [
                PauliString::parse(c(0.3, 0.0), "XZZY").unwrap(),
                PauliString::parse(c(-0.1, 0.0), "IZIZ").unwrap(),
                PauliString::parse(c(0.7, 0.0), "IIII").unwrap(),
                PauliString::parse(c(0.05, 0.0), "YXII").unwrap(),
            ],
        );
        let w = EnergyWindow::new(-2.0, 2.0).unwrap();
        let circ = compile_propagator(&hp, &w, &TrotterPlan::new(1).unwrap()).unwrap();
        let ctl = controlled(&circ, 4, 0.0).unwrap();
        let phase_gate = GateCount::new(1, 0);
        assert_eq!(count_pauli_gates(&hp) + phase_gate, ctl.cost());
    }

    #[test]
    fn zero_hamiltonian_costs_nothing() {
        let h = MolecularHamiltonian::new(6, 2, false);
        assert_eq!(count_gates(&h).unwrap().total(), 0);
    }

    #[test]
    fn text_dump() {
        let s = PauliString::parse(c(1.0, 0.0), "XZ").unwrap();
        let t = exp_pauli_string(&s, 0.25).unwrap().to_text();
        assert_eq!(t, "QUBITS 2\nGPHASE 0.0\nH 0\nCNOT 0,1\nRZ 1 -0.5\nCNOT 0,1\nH 0\n");
    }
}
