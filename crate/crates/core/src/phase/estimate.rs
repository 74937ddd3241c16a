use std::f64::consts::PI;

use rand::Rng;

use super::{
    bits_to_phase, bits_to_readout, feedback_angle, near_window_edge, recover_energy, PhaseConfig, PhaseMode, PhaseRecord,
    Propagator, PRUNE_TOL,
};
use crate::circuit::{inverse_qft_circuit, Gate};
use crate::error::{Error, Result};
use crate::hamio::EnergyWindow;
use crate::sim::{Statevector, MAX_QUBITS};

/// Largest bit count for which full outcome tables are built.
pub const MAX_TABLE_BITS: usize = 20;

fn check_mode(cfg: &PhaseConfig, mode: PhaseMode) -> Result<()> {
    cfg.validate()?;
    if cfg.mode != mode {
        return Err(Error::Domain(format!("configuration is for {:?}, not {mode:?}", cfg.mode)));
    }
    Ok(())
}

fn check_system(prop: &Propagator, psi0: &Statevector) -> Result<usize> {
    if psi0.dim() != prop.dim() {
        return Err(Error::Validation(format!(
            "initial state has dimension {} but the propagator acts on {}",
            psi0.dim(),
            prop.dim()
        )));
    }
    Ok(psi0.n_qubits())
}

fn check_table(bits: usize) -> Result<()> {
    if bits > MAX_TABLE_BITS {
        return Err(Error::Capacity(format!("outcome table over {bits} bits exceeds the limit of {MAX_TABLE_BITS}")));
    }
    Ok(())
}

fn reverse_bits(x: u64, m: usize) -> u64 {
    if m == 0 {
        0
    } else {
        x.reverse_bits() >> (64 - m)
    }
}

/// Final register of a multi-qubit PEA and its readout distribution.
#[derive(Debug, Clone)]
pub struct PeaOutcome {
    m_bits: usize,
    n_system: usize,
    probabilities: Vec<f64>,
    state: Statevector,
}

impl PeaOutcome {
    pub fn m_bits(&self) -> usize {
        self.m_bits
    }

    /// Exact probability of every readout `x`, the estimate being `x / 2^m`.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, x: u64) -> f64 {
        self.probabilities[x as usize]
    }

    /// Register after the inverse QFT: system qubits below the ancillas.
    pub fn state(&self) -> &Statevector {
        &self.state
    }

    /// Probability of reading `x` with the system found in `eigvec`.
    pub fn joint_probability(&self, x: u64, eigvec: &Statevector) -> Result<f64> {
        let dim = 1usize << self.n_system;
        if eigvec.dim() != dim {
            return Err(Error::Validation(format!("vector of dimension {} against a system of {dim}", eigvec.dim())));
        }
        let base = (reverse_bits(x, self.m_bits) as usize) << self.n_system;
        let amp: num_complex::Complex64 = eigvec
            .amplitudes()
            .iter()
            .zip(&self.state.amplitudes()[base..base + dim])
            .map(|(v, a)| v.conj() * a)
            .sum();
        Ok(amp.norm_sqr())
    }

    /// Draws one readout and records it like an iterative run.
    pub fn sample<R: Rng + ?Sized>(&self, cfg: &PhaseConfig, window: &EnergyWindow, rng: &mut R) -> PhaseRecord {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut x = self.probabilities.len() - 1;
        for (i, p) in self.probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                x = i;
                break;
            }
        }
        let bits = (0..self.m_bits).map(|i| ((x >> (self.m_bits - 1 - i)) & 1) as u8).collect();
        record(bits, cfg, window, self.probabilities[x])
    }
}

/// Textbook PEA with `cfg.total_bits()` ancillas above the system register.
///
/// Ancilla `j` controls `U^{2^j}`; after the inverse QFT the ancilla
/// integer holds the readout with its bits reversed.
pub fn run_pea(prop: &Propagator, psi0: &Statevector, cfg: &PhaseConfig) -> Result<PeaOutcome> {
    check_mode(cfg, PhaseMode::Pea)?;
    let n = check_system(prop, psi0)?;
    let m = cfg.total_bits();
    if n + m > MAX_QUBITS {
        return Err(Error::Capacity(format!("{n} system qubits plus {m} ancillas exceed {MAX_QUBITS}")));
    }
    let mut state = psi0.extend(m)?;
    for j in 0..m {
        state.apply_gate(&Gate::H(n + j))?;
        prop.apply_controlled_power(&mut state, j, n + j)?;
    }
    state.apply_circuit(&inverse_qft_circuit(m)?.shifted(n, n + m)?)?;

    let dim = 1usize << n;
    let mut probabilities = vec![0.0; 1 << m];
    for (a, block) in state.amplitudes().chunks_exact(dim).enumerate() {
        probabilities[reverse_bits(a as u64, m) as usize] = block.iter().map(|v| v.norm_sqr()).sum();
    }
    Ok(PeaOutcome {
        m_bits: m,
        n_system: n,
        probabilities,
        state,
    })
}

/// One iteration on `state` (system plus one ancilla at the top): H,
/// controlled `U^{2^{k−1}}`, feedback phase, H. Leaves the ancilla unmeasured.
fn iterate(prop: &Propagator, state: &mut Statevector, k: usize, omega: f64) -> Result<()> {
    let a = state.n_qubits() - 1;
    state.apply_gate(&Gate::H(a))?;
    prop.apply_controlled_power(state, k - 1, a)?;
    if omega != 0.0 {
        state.apply_gate(&Gate::Phase {
            qubit: a,
            lambda: 2.0 * PI * omega,
        })?;
    }
    state.apply_gate(&Gate::H(a))
}

fn record(bits: Vec<u8>, cfg: &PhaseConfig, window: &EnergyWindow, probability: f64) -> PhaseRecord {
    let phase = bits_to_phase(&bits);
    PhaseRecord {
        energy: recover_energy(phase, window),
        wraparound: near_window_edge(phase, cfg.m_bits),
        bits,
        phase,
        success_probability: probability,
        feedback_angles: Vec::new(),
        vote_tallies: Vec::new(),
        residual_state: None,
    }
}

/// Iterative PEA keeping the system register between iterations.
///
/// Iteration `k` runs from `m'` down to 1 and measures bit `q_k`; the system
/// collapses along with every measurement.
pub fn run_ipea_a<R: Rng + ?Sized>(
    prop: &Propagator,
    window: &EnergyWindow,
    psi0: &Statevector,
    cfg: &PhaseConfig,
    rng: &mut R,
) -> Result<PhaseRecord> {
    check_mode(cfg, PhaseMode::IpeaA)?;
    check_system(prop, psi0)?;
    let mt = cfg.total_bits();
    let mut state = psi0.extend(1)?;
    let a = state.n_qubits() - 1;
    let mut tail: Vec<u8> = Vec::with_capacity(mt);
    let mut angles = Vec::with_capacity(mt);
    let mut probability = 1.0;
    for k in (1..=mt).rev() {
        let omega = feedback_angle(&tail);
        angles.push(omega);
        iterate(prop, &mut state, k, omega)?;
        let m = state.measure_qubit(a, rng)?;
        probability *= m.probability();
        state.reset_qubit(a)?;
        tail.insert(0, m.bit);
    }
    let mut rec = record(tail, cfg, window, probability);
    rec.feedback_angles = angles;
    rec.residual_state = Some(state.truncate(1, 1e-12)?);
    Ok(rec)
}

/// Exact distribution of version-A readouts, indexed like [`run_pea`].
///
/// Both outcomes of every iteration are followed; branches less likely than
/// [`PRUNE_TOL`] are dropped.
pub fn ipea_a_distribution(prop: &Propagator, psi0: &Statevector, cfg: &PhaseConfig) -> Result<Vec<f64>> {
    check_mode(cfg, PhaseMode::IpeaA)?;
    check_system(prop, psi0)?;
    let mt = cfg.total_bits();
    check_table(mt)?;
    let mut out = vec![0.0; 1 << mt];
    let mut tail = Vec::with_capacity(mt);
    explore_a(prop, psi0.extend(1)?, mt, &mut tail, 1.0, &mut out)?;
    Ok(out)
}

fn explore_a(prop: &Propagator, mut state: Statevector, k: usize, tail: &mut Vec<u8>, prob: f64, out: &mut [f64]) -> Result<()> {
    if k == 0 {
        out[bits_to_readout(tail) as usize] += prob;
        return Ok(());
    }
    let a = state.n_qubits() - 1;
    iterate(prop, &mut state, k, feedback_angle(tail))?;
    let p1 = state.probability_one(a)?;
    for (bit, p) in [(0u8, 1.0 - p1), (1u8, p1)] {
        if prob * p < PRUNE_TOL {
            continue;
        }
        let mut branch = state.clone();
        branch.project(a, bit)?;
        branch.reset_qubit(a)?;
        tail.insert(0, bit);
        explore_a(prop, branch, k - 1, tail, prob * p, out)?;
        tail.remove(0);
    }
    Ok(())
}

/// Probability that strictly more than half of `reps` independent trials
/// succeed, each with probability `p`.
pub fn majority_probability(p: f64, reps: usize) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let mut ln_fact = vec![0.0f64; reps + 1];
    for i in 1..=reps {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    (reps / 2 + 1..=reps)
        .map(|k| (ln_fact[reps] - ln_fact[k] - ln_fact[reps - k] + k as f64 * p.ln() + (reps - k) as f64 * (-p).ln_1p()).exp())
        .sum::<f64>()
        .min(1.0)
}

/// Single-run probability that the ancilla reads 1 at iteration `k` from a
/// fresh copy of `psi0`.
fn fresh_probability_one(prop: &Propagator, psi0: &Statevector, k: usize, omega: f64) -> Result<(Statevector, f64)> {
    let mut s = psi0.extend(1)?;
    iterate(prop, &mut s, k, omega)?;
    let p1 = s.probability_one(s.n_qubits() - 1)?;
    Ok((s, p1))
}

/// Iterative PEA restarting from `psi0` for every trial, with each bit
/// fixed by a majority vote over `cfg.repetitions` trials.
pub fn run_ipea_b<R: Rng + ?Sized>(
    prop: &Propagator,
    window: &EnergyWindow,
    psi0: &Statevector,
    cfg: &PhaseConfig,
    rng: &mut R,
) -> Result<PhaseRecord> {
    check_mode(cfg, PhaseMode::IpeaB)?;
    check_system(prop, psi0)?;
    let mt = cfg.total_bits();
    let reps = cfg.repetitions;
    let mut tail: Vec<u8> = Vec::with_capacity(mt);
    let mut tallies = Vec::with_capacity(mt);
    let mut angles = Vec::with_capacity(mt);
    let mut probability = 1.0;
    for k in (1..=mt).rev() {
        let omega = feedback_angle(&tail);
        angles.push(omega);
        let (prepared, p1) = fresh_probability_one(prop, psi0, k, omega)?;
        let a = prepared.n_qubits() - 1;
        let mut ones = 0;
        for _ in 0..reps {
            let mut trial = prepared.clone();
            ones += trial.measure_qubit(a, rng)?.bit as usize;
        }
        let bit = u8::from(2 * ones > reps);
        probability *= majority_probability(if bit == 1 { p1 } else { 1.0 - p1 }, reps);
        tallies.insert(0, (reps - ones, ones));
        tail.insert(0, bit);
    }
    let mut rec = record(tail, cfg, window, probability);
    rec.feedback_angles = angles;
    rec.vote_tallies = tallies;
    Ok(rec)
}

/// Exact distribution of version-B readouts from binomial vote tails.
pub fn ipea_b_distribution(prop: &Propagator, psi0: &Statevector, cfg: &PhaseConfig) -> Result<Vec<f64>> {
    check_mode(cfg, PhaseMode::IpeaB)?;
    check_system(prop, psi0)?;
    let mt = cfg.total_bits();
    check_table(mt)?;
    let mut out = vec![0.0; 1 << mt];
    let mut tail = Vec::with_capacity(mt);
    explore_b(prop, psi0, cfg.repetitions, mt, &mut tail, 1.0, &mut out)?;
    Ok(out)
}

fn explore_b(
    prop: &Propagator,
    psi0: &Statevector,
    reps: usize,
    k: usize,
    tail: &mut Vec<u8>,
    prob: f64,
    out: &mut [f64],
) -> Result<()> {
    if k == 0 {
        out[bits_to_readout(tail) as usize] += prob;
        return Ok(());
    }
    let (_, p1) = fresh_probability_one(prop, psi0, k, feedback_angle(tail))?;
    for (bit, p) in [(0u8, 1.0 - p1), (1u8, p1)] {
        let branch = prob * majority_probability(p, reps);
        if branch < PRUNE_TOL {
            continue;
        }
        tail.insert(0, bit);
        explore_b(prop, psi0, reps, k - 1, tail, branch, out)?;
        tail.remove(0);
    }
    Ok(())
}
