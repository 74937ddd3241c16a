//! Phase estimation: multi-qubit PEA, the iterative variants with a single
//! ancilla, and closed-form success probabilities.

mod estimate;
mod propagator;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamio::EnergyWindow;
use crate::sim::Statevector;

pub use estimate::{
    ipea_a_distribution, ipea_b_distribution, majority_probability, run_ipea_a, run_ipea_b, run_pea, PeaOutcome,
};
pub use propagator::Propagator;

/// Outcome probabilities below this are dropped when enumerating outcome trees.
pub const PRUNE_TOL: f64 = 1e-12;

/// Largest total bit count; beyond 52 bits the phase no longer fits an f64 mantissa.
pub const MAX_PHASE_BITS: usize = 52;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseMode {
    Pea,
    IpeaA,
    IpeaB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropagatorMode {
    /// Exact exponential from the eigendecomposition.
    Dense,
    /// First-order Trotter circuit with the given number of slices.
    Trotter(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub m_bits: usize,
    pub extra_bits: usize,
    pub repetitions: usize,
    pub mode: PhaseMode,
    pub propagator: PropagatorMode,
}

impl PhaseConfig {
    pub fn new(m_bits: usize, mode: PhaseMode) -> Self {
        PhaseConfig {
            m_bits,
            extra_bits: 0,
            repetitions: 1,
            mode,
            propagator: PropagatorMode::Dense,
        }
    }

    /// Bits actually extracted, `m + extra`.
    pub fn total_bits(&self) -> usize {
        self.m_bits + self.extra_bits
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_bits == 0 {
            return Err(Error::Domain("at least one phase bit is required".into()));
        }
        if self.total_bits() > MAX_PHASE_BITS {
            return Err(Error::Capacity(format!(
                "{} phase bits exceed the limit of {MAX_PHASE_BITS}",
                self.total_bits()
            )));
        }
        if self.mode == PhaseMode::IpeaB && self.repetitions.is_multiple_of(2) {
            return Err(Error::Domain(format!("majority voting needs an odd repetition count, got {}", self.repetitions)));
        }
        if let PropagatorMode::Trotter(0) = self.propagator {
            return Err(Error::Domain("a Trotter propagator needs at least one slice".into()));
        }
        Ok(())
    }
}

/// Result of one iterative phase-estimation run.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseRecord {
    /// All extracted bits, most significant first.
    #[serde(serialize_with = "bits_as_string")]
    pub bits: Vec<u8>,
    pub phase: f64,
    #[serde(rename = "energy_hartree")]
    pub energy: f64,
    /// Exact probability of obtaining this bit string.
    pub success_probability: f64,
    /// Feedback angle of each iteration in turns, in execution order.
    pub feedback_angles: Vec<f64>,
    /// Votes `(zeros, ones)` per bit, most significant first (version B).
    pub vote_tallies: Vec<(usize, usize)>,
    /// The phase lies within one readout of the window edge.
    pub wraparound: bool,
    /// System register after the final iteration (version A).
    #[serde(skip)]
    pub residual_state: Option<Statevector>,
}

fn bits_as_string<S: serde::Serializer>(bits: &[u8], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&bits_to_string(bits))
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect()
}

/// `Σ q_i 2^{−i}` for bits `q_1 q_2 …`.
pub fn bits_to_phase(bits: &[u8]) -> f64 {
    bits.iter()
        .enumerate()
        .map(|(i, &b)| b as f64 * 2f64.powi(-(i as i32 + 1)))
        .sum()
}

/// `m`-bit readout integer of a bit string, most significant first.
pub fn bits_to_readout(bits: &[u8]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

/// Whether `phase` sits within `2^{−m}` of either end of `[0, 1)`.
pub fn near_window_edge(phase: f64, m: usize) -> bool {
    let q = 2f64.powi(-(m as i32));
    phase < q || phase >= 1.0 - q
}

/// Feedback angle `ω_k = −Σ_j q_{k+1+j} / 2^{j+2}` in turns, given the bits
/// `q_{k+1}, q_{k+2}, …` already measured.
pub fn feedback_angle(later_bits: &[u8]) -> f64 {
    -later_bits
        .iter()
        .enumerate()
        .map(|(j, &b)| b as f64 / 2f64.powi(j as i32 + 2))
        .sum::<f64>()
}

/// Extra bits `ceil(log2(2 + 1/(2ε)))` giving `m` correct bits with
/// probability at least `1 − ε`.
pub fn extra_bits_for(epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("failure tolerance must lie in (0, 1), got {epsilon}")));
    }
    Ok((2.0 + 1.0 / (2.0 * epsilon)).log2().ceil() as usize)
}

/// `E = E_max − φ (E_max − E_min)`.
pub fn recover_energy(phase: f64, window: &EnergyWindow) -> f64 {
    window.e_max() - phase * window.width()
}

pub fn encode_phase(energy: f64, window: &EnergyWindow) -> f64 {
    window.phase_of(energy)
}

/// Probabilities of the two readouts bracketing a phase whose remainder
/// below the last bit is `delta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDistribution {
    pub delta: f64,
    pub p_down: f64,
    pub p_up: f64,
}

impl PhaseDistribution {
    pub fn sum(&self) -> f64 {
        self.p_down + self.p_up
    }
}

/// `sin²(π x) / (M² sin²(π x / M))`, the readout probability at offset `x`
/// readouts from the true phase in an `M`-outcome register.
fn fejer(x: f64, m_outcomes: f64) -> f64 {
    let den = (PI * x / m_outcomes).sin();
    if den.abs() < 1e-300 {
        return 1.0;
    }
    // sin² has period π, so reducing x keeps integer offsets exactly zero.
    let num = (PI * x.rem_euclid(1.0)).sin();
    (num * num) / (m_outcomes * m_outcomes * den * den)
}

/// Closed-form `p_down`, `p_up` for remainder `delta ∈ [0, 1)` and `m` bits.
pub fn analytic_pea_distribution(delta: f64, m: usize) -> Result<PhaseDistribution> {
    if !(0.0..1.0).contains(&delta) || m == 0 {
        return Err(Error::Domain(format!("need delta in [0, 1) and m >= 1, got ({delta}, {m})")));
    }
    let mo = 2f64.powi(m as i32);
    Ok(PhaseDistribution {
        delta,
        p_down: fejer(delta, mo),
        p_up: fejer(1.0 - delta, mo),
    })
}

/// Probability of reading `x` from an `m`-bit PEA on an eigenphase `phi`.
pub fn readout_probability(phi: f64, x: u64, m: usize) -> f64 {
    let mo = 2f64.powi(m as i32);
    let offset = (phi * mo - x as f64).rem_euclid(mo);
    fejer(offset, mo)
}

/// The two readouts nearest to `phi`: `floor(φ 2^m)` and the next one,
/// modulo `2^m`.
pub fn nearest_readouts(phi: f64, m: usize) -> (u64, u64) {
    let mo = 1u64 << m;
    let down = ((phi * mo as f64).floor() as u64) % mo;
    (down, (down + 1) % mo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feedback_examples() {
        assert_eq!(feedback_angle(&[]), 0.0);
        assert_eq!(feedback_angle(&[1]), -0.25);
        assert_eq!(feedback_angle(&[1, 1]), -0.375);
        assert_eq!(feedback_angle(&[0, 1]), -0.125);
    }

    #[test]
    fn extra_bits_examples() {
        assert_eq!(extra_bits_for(0.5).unwrap(), 2);
        assert_eq!(extra_bits_for(0.99).unwrap(), 2);
        assert_eq!(extra_bits_for(1.0 / 62.0).unwrap(), 6);
        assert!(extra_bits_for(0.0).is_err());
        assert!(extra_bits_for(1.0).is_err());
    }

    #[test]
    fn energy_encoding() {
        let w = EnergyWindow::new(-2.0, 1.0).unwrap();
        assert_eq!(recover_energy(0.0, &w), 1.0);
        assert!((recover_energy(1.0 - 1e-12, &w) + 2.0).abs() < 1e-11);
        let e = -1.234567;
        assert!((recover_energy(encode_phase(e, &w), &w) - e).abs() < 1e-14);
    }

    #[test]
    fn analytic_edges() {
        let d = analytic_pea_distribution(0.0, 7).unwrap();
        assert_eq!((d.p_down, d.p_up), (1.0, 0.0));
        let d = analytic_pea_distribution(0.5, 20).unwrap();
        assert!(d.sum() > 0.81 && d.sum() < 0.8107);
        assert!((d.p_down - d.p_up).abs() < 1e-12);
        assert!(analytic_pea_distribution(1.0, 3).is_err());
    }

    #[test]
    fn readout_probabilities_sum_to_one() {
        let m = 5;
        let total: f64 = (0..32).map(|x| readout_probability(0.3141, x, m)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(nearest_readouts(0.999, 3), (7, 0));
    }

    #[test]
    fn bit_helpers() {
        assert_eq!(bits_to_phase(&[0, 1]), 0.25);
        assert_eq!(bits_to_readout(&[1, 0, 1]), 5);
        assert_eq!(bits_to_string(&[1, 0]), "10");
        assert!(near_window_edge(0.01, 4) && near_window_edge(0.99, 4) && !near_window_edge(0.5, 4));
    }

    #[test]
    fn config_validation() {
        let mut cfg = PhaseConfig::new(4, PhaseMode::IpeaB);
        cfg.repetitions = 4;
        assert!(cfg.validate().is_err());
        cfg.repetitions = 5;
        cfg.validate().unwrap();
        cfg.extra_bits = 60;
        assert!(matches!(cfg.validate(), Err(Error::Capacity(_))));
        assert!(PhaseConfig::new(0, PhaseMode::Pea).validate().is_err());
    }
}
