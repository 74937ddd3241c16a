//! Initial states: Hartree-Fock determinant, thresholded multi-determinant
//! guesses, random vectors, and adiabatic state preparation.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::secondq::FockBasisMatrix;
use crate::sim::{diagonalize_dense, rng_from_seed, spectral_unitary, SpectralDecomposition, Statevector};

/// Eigenvalues closer than this count as one level when measuring overlaps.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Tolerance on `‖H_init ψ0 − λ ψ0‖` for the ASP starting state.
pub const EIGENSTATE_TOL: f64 = 1e-8;

/// Basis index of the determinant with the lowest `n_electrons` spin
/// orbitals occupied.
pub fn hf_index(n_electrons: usize, n_qubits: usize) -> Result<usize> {
    if n_electrons > n_qubits {
        return Err(Error::Domain(format!("{n_electrons} electrons do not fit into {n_qubits} spin orbitals")));
    }
    if n_qubits >= usize::BITS as usize {
        return Err(Error::Capacity(format!("{n_qubits} spin orbitals overflow a basis index")));
    }
    Ok((1usize << n_electrons) - 1)
}

pub fn hf_state(n_electrons: usize, n_qubits: usize) -> Result<Statevector> {
    Statevector::basis(n_qubits, hf_index(n_electrons, n_qubits)?)
}

/// Occupation bitstrings (qubit 0 leftmost) with complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct GuessSpec {
    pub terms: Vec<(String, Complex64)>,
    /// When false the amplitudes must already be normalized.
    pub normalize: bool,
}

impl GuessSpec {
    /// Parses lines `bitstring re im`; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<GuessSpec> {
        let mut terms = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::parse(i + 1, format!("expected `bitstring re im`, got `{line}`")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| Error::parse(i + 1, format!("bad number `{s}`")));
            terms.push((f[0].to_string(), Complex64::new(num(f[1])?, num(f[2])?)));
        }
        Ok(GuessSpec { terms, normalize: true })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (b, c) in &self.terms {
            let _ = writeln!(out, "{b} {:?} {:?}", c.re, c.im);
        }
        out
    }

    /// Register size shared by every bitstring.
    pub fn n_qubits(&self) -> Result<usize> {
        let n = self.terms.first().map(|(b, _)| b.len()).ok_or(Error::EmptyGuess(0.0))?;
        if self.terms.iter().any(|(b, _)| b.len() != n) {
            return Err(Error::Validation("guess bitstrings differ in length".into()));
        }
        Ok(n)
    }
}

fn bitstring_index(bits: &str) -> Result<usize> {
    bits.chars().enumerate().try_fold(0usize, |acc, (q, ch)| match ch {
        '0' => Ok(acc),
        '1' => Ok(acc | (1 << q)),
        _ => Err(Error::Validation(format!("bitstring `{bits}` contains `{ch}`"))),
    })
}

/// Statevector from the guess terms with `|c| > threshold`, renormalized.
pub fn guess_state(spec: &GuessSpec, threshold: f64) -> Result<Statevector> {
    let n = spec.n_qubits()?;
    if !spec.normalize {
        let norm2: f64 = spec.terms.iter().map(|(_, c)| c.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("guess amplitudes have squared norm {norm2}, expected 1")));
        }
    }
    if n > crate::sim::MAX_QUBITS {
        return Err(Error::Capacity(format!("{n}-qubit guess exceeds the statevector limit")));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    let mut kept = 0;
    for (bits, c) in &spec.terms {
        let i = bitstring_index(bits)?;
        if amps[i] != Complex64::new(0.0, 0.0) {
            return Err(Error::Validation(format!("configuration `{bits}` listed twice")));
        }
        if c.norm() > threshold {
            amps[i] = *c;
            kept += 1;
        }
    }
    if kept == 0 {
        return Err(Error::EmptyGuess(threshold));
    }
    Statevector::from_amplitudes(amps)
}

/// Normalized vector of independent complex normal amplitudes.
pub fn random_state(n_qubits: usize, seed: u64) -> Result<Statevector> {
    if n_qubits > crate::sim::MAX_QUBITS {
        return Err(Error::Capacity(format!("{n_qubits} qubits exceed the statevector limit")));
    }
    let mut rng = rng_from_seed(seed);
    let amps = (0..1usize << n_qubits)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    Statevector::from_amplitudes(amps)
}

/// Linear sweep `s: 0 → 1` over `total_time`, split into `n_steps`
/// piecewise-constant steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AspSchedule {
    pub total_time: f64,
    pub n_steps: usize,
}

impl AspSchedule {
    pub fn new(total_time: f64, n_steps: usize) -> Result<Self> {
        if !(total_time > 0.0 && total_time.is_finite()) || n_steps == 0 {
            return Err(Error::Domain(format!("need total_time > 0 and n_steps >= 1, got ({total_time}, {n_steps})")));
        }
        Ok(AspSchedule { total_time, n_steps })
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.n_steps as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AspPoint {
    pub s: f64,
    /// Weight of the state in the ground eigenspace of `H(s)`.
    pub overlap2: f64,
    /// Gap between the two lowest levels of `H(s)`.
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct AspTrajectory {
    pub points: Vec<AspPoint>,
    pub final_state: Statevector,
}

impl AspTrajectory {
    pub fn final_overlap2(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.overlap2)
    }

    /// CSV with header `s,overlap2,gap_hartree`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,overlap2,gap_hartree\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.s, p.overlap2, p.gap);
        }
        out
    }
}

/// Indices the evolution is restricted to: the particle-number sector of
/// `psi` when `h` conserves particle number, otherwise all of them.
fn working_indices(h: &FockBasisMatrix, psi: &Statevector) -> Result<Vec<usize>> {
    if !h.conserves_particle_number(1e-12) {
        return Ok((0..h.dim()).collect());
    }
    let support: Vec<usize> = (0..psi.dim()).filter(|&i| psi.amplitudes()[i].norm() > 1e-12).collect();
    let count = support[0].count_ones();
    if support.iter().any(|i| i.count_ones() != count) {
        return Err(Error::Validation("ASP start state mixes particle numbers".into()));
    }
    Ok((0..h.dim()).filter(|i| i.count_ones() == count).collect())
}

/// Adiabatic state preparation along `H(s) = (1 − s) H_init + s H_exact`.
///
/// `H_init` is zero except for `hf_energy` on the diagonal at the largest
/// amplitude of `psi0`, which must be an eigenstate of it. Step `j`
/// applies `exp(−i H(j/N) Δt)` exactly. The first point describes `psi0`
/// against `H_init`; each later point follows a step.
pub fn run_asp(h_exact: &FockBasisMatrix, hf_energy: f64, schedule: &AspSchedule, psi0: &Statevector) -> Result<AspTrajectory> {
    if psi0.dim() != h_exact.dim() {
        return Err(Error::Validation(format!(
            "state of dimension {} against a Hamiltonian of dimension {}",
            psi0.dim(),
            h_exact.dim()
        )));
    }
    AspSchedule::new(schedule.total_time, schedule.n_steps)?;
    let amps = psi0.amplitudes();
    let hf = (0..amps.len())
        .max_by(|&a, &b| amps[a].norm_sqr().total_cmp(&amps[b].norm_sqr()))
        .expect("non-empty state");

    // ‖H_init ψ − λψ‖ with λ = <ψ|H_init|ψ>.
    let lambda = hf_energy * amps[hf].norm_sqr();
    let residual: f64 = amps
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let hv = if i == hf { *a * hf_energy } else { Complex64::new(0.0, 0.0) };
            (hv - *a * lambda).norm_sqr()
        })
        .sum::<f64>()
        .sqrt();
    if residual > EIGENSTATE_TOL {
        return Err(Error::Validation(format!("start state is not an eigenstate of the initial Hamiltonian (residual {residual:e})")));
    }

    let idx = working_indices(h_exact, psi0)?;
    let d = idx.len();
    let hf_local = idx.iter().position(|&i| i == hf).expect("HF index inside its own sector");
    let hx = DMatrix::from_fn(d, d, |r, c| h_exact.matrix()[(idx[r], idx[c])]);
    let h_at = |s: f64| {
        let mut m = hx.scale(s);
        m[(hf_local, hf_local)] += Complex64::new((1.0 - s) * hf_energy, 0.0);
        m
    };
    let mut psi = DVector::from_iterator(d, idx.iter().map(|&i| amps[i]));

    let point = |s: f64, dec: &SpectralDecomposition, psi: &DVector<Complex64>| -> Result<AspPoint> {
        let local = Statevector::from_amplitudes(pad_pow2(psi))?;
        Ok(AspPoint {
            s,
            overlap2: ground_weight(dec, &local),
            gap: dec.gap(),
        })
    };

    let mut points = Vec::with_capacity(schedule.n_steps + 1);
    points.push(point(0.0, &diagonalize_dense(&h_at(0.0))?, &psi)?);
    let dt = schedule.dt();
    for j in 1..=schedule.n_steps {
        let s = j as f64 / schedule.n_steps as f64;
        let dec = diagonalize_dense(&h_at(s))?;
        let u = spectral_unitary(&dec, |e| Complex64::from_polar(1.0, -e * dt));
        psi = &u * &psi;
        points.push(point(s, &dec, &psi)?);
    }

    let mut full = vec![Complex64::new(0.0, 0.0); h_exact.dim()];
    for (k, &i) in idx.iter().enumerate() {
        full[i] = psi[k];
    }
    Ok(AspTrajectory {
        points,
        final_state: Statevector::from_amplitudes(full)?,
    })
}

/// Sector vectors are generally not a power of two long; zero padding keeps
/// them usable as statevectors.
fn pad_pow2(v: &DVector<Complex64>) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = v.iter().copied().collect();
    out.resize(v.len().next_power_of_two(), Complex64::new(0.0, 0.0));
    out
}

fn ground_weight(dec: &SpectralDecomposition, padded: &Statevector) -> f64 {
    let d = dec.dim();
    let e0 = dec.eigenvalues()[0];
    (0..d)
        .take_while(|&k| dec.eigenvalues()[k] - e0 <= DEGENERACY_TOL)
        .map(|k| {
            dec.eigenvectors()
                .column(k)
                .iter()
                .zip(&padded.amplitudes()[..d])
                .map(|(v, a)| v.conj() * a)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hf_examples() {
        assert_eq!(hf_index(2, 4).unwrap(), 3);
        assert_eq!(hf_state(0, 3).unwrap().amplitudes()[0], c(1.0));
        assert!(hf_state(5, 4).is_err());
    }

    #[test]
    fn guess_thresholding() {
        let spec = GuessSpec::parse("# guess\n1100 0.9 0.0\n0011 0.1 0.0\n").unwrap();
        let s = guess_state(&spec, 0.2).unwrap();
        assert!((s.amplitudes()[3].re - 1.0).abs() < 1e-15);
        assert!(s.amplitudes()[12].norm() == 0.0);

        let spec = GuessSpec::parse("10 1 0\n01 1 0\n").unwrap();
        let s = guess_state(&spec, 0.0).unwrap();
        assert!((s.amplitudes()[1].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitudes()[2].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        let single = GuessSpec::parse("01 0.3 0.4\n").unwrap();
        assert!((guess_state(&single, 0.1).unwrap().amplitudes()[2].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn guess_errors() {
        let spec = GuessSpec::parse("10 0.05 0\n").unwrap();
        assert!(matches!(guess_state(&spec, 0.1), Err(Error::EmptyGuess(_))));
        assert!(matches!(GuessSpec::parse("10 0.5\n"), Err(Error::Parse { line: 1, .. })));
        let mixed = GuessSpec::parse("10 1 0\n100 1 0\n").unwrap();
        assert!(guess_state(&mixed, 0.0).is_err());
        let mut unnormalized = GuessSpec::parse("10 2 0\n").unwrap();
        unnormalized.normalize = false;
        assert!(matches!(guess_state(&unnormalized, 0.0), Err(Error::Validation(_))));
        let spec = GuessSpec::parse("1x 1 0\n").unwrap();
        assert!(guess_state(&spec, 0.0).is_err());
    }

    #[test]
    fn guess_text_round_trip() {
        let spec = GuessSpec::parse("110 0.1 -0.25\n011 0.3 0\n").unwrap();
        assert_eq!(GuessSpec::parse(&spec.to_text()).unwrap(), spec);
    }

    #[test]
    fn random_states_are_seeded() {
        let a = random_state(3, 9).unwrap();
        assert_eq!(a, random_state(3, 9).unwrap());
        assert_ne!(a, random_state(3, 10).unwrap());
        assert!((a.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_sweep_keeps_overlap() {
        // H_exact = H_init: the state never leaves the ground level.
        let h = FockBasisMatrix::from_matrix(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-1.0), c(0.0)]))).unwrap();
        let psi = Statevector::basis(1, 0).unwrap();
        let t = run_asp(&h, -1.0, &AspSchedule::new(5.0, 10).unwrap(), &psi).unwrap();
        assert!(t.points.iter().all(|p| (p.overlap2 - 1.0).abs() < 1e-12));
        assert_eq!(t.points.len(), 11);
        assert!(t.to_csv().starts_with("s,overlap2,gap_hartree\n0,1,"));
    }

    #[test]
    fn start_state_must_be_eigenstate() {
        let h = FockBasisMatrix::from_matrix(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-1.0), c(0.0)]))).unwrap();
        let psi = Statevector::from_amplitudes(vec![c(0.8), c(0.6)]).unwrap();
        assert!(matches!(
            run_asp(&h, -1.0, &AspSchedule::new(1.0, 1).unwrap(), &psi),
            Err(Error::Validation(_))
        ));
        assert!(AspSchedule::new(0.0, 3).is_err());
        assert!(AspSchedule::new(1.0, 0).is_err());
    }
}
