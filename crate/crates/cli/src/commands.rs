use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use qfci::circuit::{compile_propagator, count_gates, TrotterPlan};
use qfci::hamio::{
    default_window, fci_dimension_nonrel, parse_complex_hamiltonian, parse_fcidump, random_hamiltonian, EnergyWindow,
    MolecularHamiltonian, SyntheticTerms,
};
use qfci::phase::{
    analytic_pea_distribution, bits_to_string, nearest_readouts, readout_probability, recover_energy, run_ipea_a, run_ipea_b, run_pea,
    PhaseConfig, PhaseMode, PhaseRecord, Propagator, PropagatorMode,
};
use qfci::prep::{guess_state, hf_state, run_asp, AspPoint, AspSchedule, GuessSpec};
use qfci::secondq::{build_fock_matrix, hamiltonian_to_pauli};
use qfci::sim::{diagonalize, matrix_exponential, rng_from_seed, SpectralDecomposition, Statevector};

use crate::manifest::RunManifest;
use crate::output::{csv_field, emit, sig12, Format};
use crate::{
    AnalyzeArgs, AspArgs, Cli, CliError, CliResult, Command, EnergyArgs, OutputArgs, PhaseArgs, ReplayArgs, ScalingArgs,
    SweepArgs, TermsArg, Units,
};

/// Eigenvalues closer than this are one level when comparing with the oracle.
const LEVEL_TOL: f64 = 1e-9;

pub fn run(cli: Cli, argv: &[String]) -> CliResult<()> {
    match cli.command {
        Command::Energy(a) => energy(&a, argv),
        Command::Sweep(a) => sweep(&a, argv),
        Command::Asp(a) => asp(&a, argv),
        Command::Scaling(a) => scaling(&a, argv),
        Command::Analyze(a) => analyze(&a, argv),
        Command::Replay(a) => replay(&a),
    }
}

impl Command {
    fn output_mut(&mut self) -> Option<&mut OutputArgs> {
        match self {
            Command::Energy(a) => Some(&mut a.output),
            Command::Sweep(a) => Some(&mut a.output),
            Command::Asp(a) => Some(&mut a.output),
            Command::Scaling(a) => Some(&mut a.output),
            Command::Analyze(a) => Some(&mut a.output),
            Command::Replay(_) => None,
        }
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::File { path: path.to_path_buf(), source })
}

/// FCIDUMP files start with a `&FCI` namelist; anything else is read as the
/// complex integral format.
pub fn load_hamiltonian(path: &Path) -> CliResult<MolecularHamiltonian> {
    let text = read_text(path)?;
    let h = if text.trim_start().starts_with('&') {
        parse_fcidump(&text)?
    } else {
        parse_complex_hamiltonian(&text)?
    };
    Ok(h)
}

fn window_for(h: &MolecularHamiltonian, args: &PhaseArgs) -> CliResult<EnergyWindow> {
    let w = match (args.emin, args.emax) {
        (Some(lo), Some(hi)) => EnergyWindow::new(lo, hi)?,
        (lo, hi) => {
            let d = default_window(h)?;
            EnergyWindow::new(lo.unwrap_or(d.e_min()), hi.unwrap_or(d.e_max()))?
        }
    };
    Ok(w)
}

fn initial_state(h: &MolecularHamiltonian, guess: Option<&Path>, threshold: f64) -> CliResult<Statevector> {
    match guess {
        Some(path) => {
            let spec = GuessSpec::parse(&read_text(path)?)?;
            if spec.n_qubits()? != h.n_spin_orbitals() {
                return Err(CliError::Input(format!(
                    "{}: guess has {} qubits, the Hamiltonian {} spin orbitals",
                    path.display(),
                    spec.n_qubits()?,
                    h.n_spin_orbitals()
                )));
            }
            Ok(guess_state(&spec, threshold)?)
        }
        None => Ok(hf_state(h.n_electrons(), h.n_spin_orbitals())?),
    }
}

#[derive(Debug, Clone, Serialize)]
struct Readout {
    readout: u64,
    bits: String,
    phase: f64,
    energy_hartree: f64,
    probability: f64,
}

#[derive(Debug, Clone, Serialize)]
struct OracleComparison {
    nearest_energy_hartree: f64,
    abs_error_hartree: f64,
    /// Weight of the guess on the nearest level.
    level_weight: f64,
    /// Exact probability that an `m`-bit PEA or version-A run returns one of
    /// the two readouts bracketing the level, from the exact eigenphases.
    bracket_success_probability: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct Estimate {
    record: PhaseRecord,
    readouts: Option<Vec<Readout>>,
    oracle: OracleComparison,
    /// Spectral-norm distance between the Trotter circuit and the exact propagator.
    propagator_error: Option<f64>,
}

fn spectral_norm(m: DMatrix<Complex64>) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

fn oracle_comparison(
    d: &SpectralDecomposition,
    psi: &Statevector,
    window: &EnergyWindow,
    cfg: &PhaseConfig,
    energy: f64,
) -> CliResult<OracleComparison> {
    let e = d.eigenvalues();
    let nearest = e.iter().copied().min_by(|a, b| (a - energy).abs().total_cmp(&(b - energy).abs())).expect("non-empty spectrum");
    let weights: Vec<f64> = d.coefficients(psi)?.iter().map(|c| c.norm_sqr()).collect();
    let level_weight = e.iter().zip(&weights).filter(|(x, _)| (**x - nearest).abs() <= LEVEL_TOL).map(|(_, w)| w).sum();
    let bracket = (cfg.mode != PhaseMode::IpeaB).then(|| {
        let m = cfg.m_bits;
        let (down, up) = nearest_readouts(window.phase_of(nearest), m);
        e.iter()
            .zip(&weights)
            .map(|(&ek, &wk)| {
                let phi = window.phase_of(ek);
                wk * (readout_probability(phi, down, m) + readout_probability(phi, up, m))
            })
            .sum()
    });
    Ok(OracleComparison {
        nearest_energy_hartree: nearest,
        abs_error_hartree: (energy - nearest).abs(),
        level_weight,
        bracket_success_probability: bracket,
    })
}

fn estimate(h: &MolecularHamiltonian, window: &EnergyWindow, psi: &Statevector, cfg: &PhaseConfig, seed: u64) -> CliResult<Estimate> {
    let fock = build_fock_matrix(h)?;
    let d = diagonalize(&fock)?;
    let (prop, propagator_error) = match cfg.propagator {
        PropagatorMode::Dense => (Propagator::spectral(&d, window), None),
        PropagatorMode::Trotter(n) => {
            let u = compile_propagator(&hamiltonian_to_pauli(h)?, window, &TrotterPlan::new(n)?)?.unitary()?;
            let err = spectral_norm(&u - matrix_exponential(&fock, window)?);
            (Propagator::from_unitary(u, cfg.total_bits())?, Some(err))
        }
    };
    let mut rng = rng_from_seed(seed);
    let (record, readouts) = match cfg.mode {
        PhaseMode::IpeaA => (run_ipea_a(&prop, window, psi, cfg, &mut rng)?, None),
        PhaseMode::IpeaB => (run_ipea_b(&prop, window, psi, cfg, &mut rng)?, None),
        PhaseMode::Pea => {
            let out = run_pea(&prop, psi, cfg)?;
            let mt = cfg.total_bits();
            let table = out
                .probabilities()
                .iter()
                .enumerate()
                .filter(|(_, p)| **p > qfci::phase::PRUNE_TOL)
                .map(|(x, &p)| {
                    let phase = x as f64 / 2f64.powi(mt as i32);
                    Readout {
                        readout: x as u64,
                        bits: format!("{x:0mt$b}"),
                        phase,
                        energy_hartree: recover_energy(phase, window),
                        probability: p,
                    }
                })
                .collect();
            (out.sample(cfg, window, &mut rng), Some(table))
        }
    };
    let oracle = oracle_comparison(&d, psi, window, cfg, record.energy)?;
    Ok(Estimate {
        record,
        readouts,
        oracle,
        propagator_error,
    })
}

#[derive(Serialize)]
struct EnergyReport<'a> {
    input: &'a Path,
    window: EnergyWindow,
    config: PhaseConfig,
    seed: u64,
    #[serde(flatten)]
    estimate: Estimate,
}

fn energy(a: &EnergyArgs, argv: &[String]) -> CliResult<()> {
    let cfg = a.phase.config()?;
    let h = load_hamiltonian(&a.input)?;
    let window = window_for(&h, &a.phase)?;
    let psi = initial_state(&h, a.guess.guess_file.as_deref(), a.guess.guess_threshold)?;
    let est = estimate(&h, &window, &psi, &cfg, a.seed)?;
    let u = a.output.units;
    let text = match a.output.format(Format::Text) {
        Format::Json => {
            let report = EnergyReport {
                input: &a.input,
                window,
                config: cfg,
                seed: a.seed,
                estimate: est,
            };
            serde_json::to_string_pretty(&report)? + "\n"
        }
        Format::Csv => {
            let s = u.suffix();
            format!(
                "energy_{s},oracle_{s},abs_error_{s},run_probability,bracket_success_probability,bits\n{},{},{},{},{},{}\n",
                sig12(u.convert(est.record.energy)),
                sig12(u.convert(est.oracle.nearest_energy_hartree)),
                sig12(u.convert(est.oracle.abs_error_hartree)),
                sig12(est.record.success_probability),
                est.oracle.bracket_success_probability.map(sig12).unwrap_or_default(),
                bits_to_string(&est.record.bits)
            )
        }
        Format::Text => energy_text(&est, &window, &cfg, u),
    };
    emit(a.output.out.as_deref(), &text)?;
    let mut m = RunManifest::new("energy", argv);
    m.inputs = [Some(a.input.clone()), a.guess.guess_file.clone()].into_iter().flatten().collect();
    m.phase = Some(cfg);
    m.window = Some(window);
    m.seed = Some(a.seed);
    m.output = a.output.out.clone();
    m.write()
}

fn energy_text(est: &Estimate, window: &EnergyWindow, cfg: &PhaseConfig, u: Units) -> String {
    let s = u.suffix();
    let mut out = String::new();
    let r = &est.record;
    let _ = writeln!(out, "window        [{}, {}] hartree", sig12(window.e_min()), sig12(window.e_max()));
    let _ = writeln!(out, "bits          {} ({} + {} extra)", bits_to_string(&r.bits), cfg.m_bits, cfg.extra_bits);
    let _ = writeln!(out, "energy        {} {s}", sig12(u.convert(r.energy)));
    let _ = writeln!(out, "oracle        {} {s}", sig12(u.convert(est.oracle.nearest_energy_hartree)));
    let _ = writeln!(out, "abs error     {} {s}", sig12(u.convert(est.oracle.abs_error_hartree)));
    let _ = writeln!(out, "run prob.     {}", sig12(r.success_probability));
    let _ = writeln!(out, "level weight  {}", sig12(est.oracle.level_weight));
    if let Some(p) = est.oracle.bracket_success_probability {
        let _ = writeln!(out, "bracket prob. {}", sig12(p));
    }
    if let Some(e) = est.propagator_error {
        let _ = writeln!(out, "trotter error {}", sig12(e));
    }
    if r.wraparound {
        let _ = writeln!(out, "warning: phase lies at the window edge; the energy may have wrapped around");
    }
    if let Some(table) = &est.readouts {
        let _ = writeln!(out, "readout bits probability energy_{s}");
        for row in table {
            let _ = writeln!(out, "{} {} {} {}", row.readout, row.bits, sig12(row.probability), sig12(u.convert(row.energy_hartree)));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    file: String,
    state: String,
    energy_hartree: Option<f64>,
    bracket_success_probability: Option<f64>,
    level_weight: Option<f64>,
    run_probability: Option<f64>,
    oracle_hartree: Option<f64>,
    abs_error_hartree: Option<f64>,
    error: Option<String>,
}

fn sweep(a: &SweepArgs, argv: &[String]) -> CliResult<()> {
    let cfg = a.phase.config()?;
    let entries = std::fs::read_dir(&a.dir).map_err(|source| CliError::File { path: a.dir.clone(), source })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Input(format!("{}: no integral files", a.dir.display())));
    }
    let states: Vec<Option<&Path>> = if a.guess_files.is_empty() {
        vec![None]
    } else {
        a.guess_files.iter().map(|p| Some(p.as_path())).collect()
    };
    let jobs: Vec<(&PathBuf, Option<&Path>)> = files.iter().flat_map(|f| states.iter().map(move |s| (f, *s))).collect();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, (file, guess))| {
            let name = file.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
            let state = guess.map_or_else(|| "hf".to_string(), |g| g.file_stem().map_or_else(String::new, |n| n.to_string_lossy().into_owned()));
            let result = (|| -> CliResult<Estimate> {
                let h = load_hamiltonian(file)?;
                let window = window_for(&h, &a.phase)?;
                let psi = initial_state(&h, *guess, a.guess_threshold)?;
                estimate(&h, &window, &psi, &cfg, a.seed.wrapping_add(i as u64))
            })();
            match result {
                Ok(est) => SweepRow {
                    file: name,
                    state,
                    energy_hartree: Some(est.record.energy),
                    bracket_success_probability: est.oracle.bracket_success_probability,
                    level_weight: Some(est.oracle.level_weight),
                    run_probability: Some(est.record.success_probability),
                    oracle_hartree: Some(est.oracle.nearest_energy_hartree),
                    abs_error_hartree: Some(est.oracle.abs_error_hartree),
                    error: None,
                },
                Err(e) => {
                    eprintln!("qfci: {}: {e}", file.display());
                    SweepRow {
                        file: name,
                        state,
                        energy_hartree: None,
                        bracket_success_probability: None,
                        level_weight: None,
                        run_probability: None,
                        oracle_hartree: None,
                        abs_error_hartree: None,
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect();

    let u = a.output.units;
    let text = match a.output.format(Format::Csv) {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        _ => {
            let s = u.suffix();
            let opt = |v: Option<f64>, conv: bool| v.map(|x| sig12(if conv { u.convert(x) } else { x })).unwrap_or_default();
            let mut out = format!("file,state,energy_{s},success_probability,level_weight,run_probability,oracle_{s},abs_error_{s},error\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    csv_field(&r.file),
                    csv_field(&r.state),
                    opt(r.energy_hartree, true),
                    opt(r.bracket_success_probability, false),
                    opt(r.level_weight, false),
                    opt(r.run_probability, false),
                    opt(r.oracle_hartree, true),
                    opt(r.abs_error_hartree, true),
                    csv_field(r.error.as_deref().unwrap_or(""))
                );
            }
            out
        }
    };
    emit(a.output.out.as_deref(), &text)?;
    let mut m = RunManifest::new("sweep", argv);
    m.inputs = files.iter().cloned().chain(a.guess_files.iter().cloned()).collect();
    m.phase = Some(cfg);
    m.seed = Some(a.seed);
    m.output = a.output.out.clone();
    m.write()?;
    if rows.iter().all(|r| r.error.is_some()) {
        return Err(CliError::Input("every file in the sweep failed".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct AspReport<'a> {
    hf_energy_hartree: f64,
    final_overlap2: f64,
    points: &'a [AspPoint],
}

fn asp(a: &AspArgs, argv: &[String]) -> CliResult<()> {
    let h = load_hamiltonian(&a.input)?;
    let fock = build_fock_matrix(&h)?;
    let psi = initial_state(&h, a.guess.guess_file.as_deref(), a.guess.guess_threshold)?;
    let amps = psi.amplitudes();
    let hf = (0..amps.len()).max_by(|&x, &y| amps[x].norm_sqr().total_cmp(&amps[y].norm_sqr())).expect("non-empty state");
    let hf_energy = fock.determinant_energy(hf);
    let traj = run_asp(&fock, hf_energy, &AspSchedule::new(a.time, a.steps)?, &psi)?;
    let text = match a.output.format(Format::Csv) {
        Format::Json => {
            serde_json::to_string_pretty(&AspReport {
                hf_energy_hartree: hf_energy,
                final_overlap2: traj.final_overlap2(),
                points: &traj.points,
            })? + "\n"
        }
        _ => traj.to_csv(),
    };
    emit(a.output.out.as_deref(), &text)?;
    let mut m = RunManifest::new("asp", argv);
    m.inputs = [Some(a.input.clone()), a.guess.guess_file.clone()].into_iter().flatten().collect();
    m.output = a.output.out.clone();
    m.write()
}

#[derive(Debug, Clone, Serialize)]
struct ScalingRow {
    n: usize,
    one_qubit_gates: u64,
    two_qubit_gates: u64,
    total_gates: u64,
    /// Closed-shell determinant count at half filling, as a decimal string.
    fci_determinants: String,
}

#[derive(Serialize)]
struct ScalingReport<'a> {
    rows: &'a [ScalingRow],
    fit_exponent: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// distinct abscissae.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if lx.len() < 2 || sxx == 0.0 {
        return None;
    }
    Some(lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx)
}

fn scaling(a: &ScalingArgs, argv: &[String]) -> CliResult<()> {
    if let Some(bad) = a.n.iter().find(|&&n| n < 2 || n % 2 != 0) {
        return Err(CliError::Input(format!("spin-orbital counts must be even and at least 2, got {bad}")));
    }
    let terms = match a.terms {
        TermsArg::Full => SyntheticTerms::Full,
        TermsArg::OneBody => SyntheticTerms::OneBody,
    };
    let rows = a
        .n
        .par_iter()
        .map(|&n| -> CliResult<ScalingRow> {
            let h = random_hamiltonian(n, n / 2, !a.real, terms, a.seed.wrapping_add(n as u64));
            let c = count_gates(&h)?;
            let half = (n / 2) as u64;
            Ok(ScalingRow {
                n,
                one_qubit_gates: c.one_qubit,
                two_qubit_gates: c.two_qubit,
                total_gates: c.total(),
                fci_determinants: fci_dimension_nonrel(half, half)?.to_string(),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.total_gates as f64).collect();
    let fit = if ys.iter().all(|&y| y > 0.0) { log_log_slope(&xs, &ys) } else { None };
    let text = match a.output.format(Format::Csv) {
        Format::Json => serde_json::to_string_pretty(&ScalingReport { rows: &rows, fit_exponent: fit })? + "\n",
        _ => {
            let mut out = String::from("n,one_qubit_gates,two_qubit_gates,total_gates,fci_determinants,fit_exponent\n");
            let fit = fit.map(|f| format!("{f:.6}")).unwrap_or_default();
            for r in &rows {
                let _ = writeln!(out, "{},{},{},{},{},{fit}", r.n, r.one_qubit_gates, r.two_qubit_gates, r.total_gates, r.fci_determinants);
            }
            out
        }
    };
    emit(a.output.out.as_deref(), &text)?;
    let mut m = RunManifest::new("scaling", argv);
    m.seed = Some(a.seed);
    m.output = a.output.out.clone();
    m.write()
}

fn analyze(a: &AnalyzeArgs, argv: &[String]) -> CliResult<()> {
    let deltas: Vec<f64> = if a.deltas.is_empty() {
        if a.grid == 0 {
            return Err(CliError::Input("--grid must be positive".into()));
        }
        (0..a.grid).map(|i| i as f64 / a.grid as f64).collect()
    } else {
        a.deltas.clone()
    };
    let rows = deltas.iter().map(|&d| analytic_pea_distribution(d, a.m)).collect::<qfci::Result<Vec<_>>>()?;
    let text = match a.output.format(Format::Csv) {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        _ => {
            let mut out = String::from("delta,p_down,p_up,sum\n");
            for r in &rows {
                let _ = writeln!(out, "{},{},{},{}", r.delta, r.p_down, r.p_up, r.sum());
            }
            out
        }
    };
    emit(a.output.out.as_deref(), &text)?;
    let mut m = RunManifest::new("analyze", argv);
    m.output = a.output.out.clone();
    m.write()
}

fn replay(a: &ReplayArgs) -> CliResult<()> {
    let manifest = RunManifest::read(&a.manifest)?;
    let override_out = match &a.out {
        Some(p) => Some(std::path::absolute(p).map_err(|source| CliError::File { path: p.clone(), source })?),
        None => None,
    };
    std::env::set_current_dir(&manifest.cwd).map_err(|source| CliError::File { path: manifest.cwd.clone(), source })?;
    let args = std::iter::once("qfci".to_string()).chain(manifest.argv.iter().cloned());
    let mut cli = <Cli as clap::Parser>::try_parse_from(args).map_err(|e| CliError::Input(format!("manifest arguments: {e}")))?;
    let out = cli
        .command
        .output_mut()
        .ok_or_else(|| CliError::Input("a manifest cannot replay another replay".into()))?;
    if let Some(p) = override_out.or(manifest.output) {
        out.out = Some(p);
    }
    run(cli, &manifest.argv)
}
