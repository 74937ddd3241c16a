#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qfci::hamio::{parse_complex_hamiltonian, parse_fcidump, MolecularHamiltonian};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn h2() -> MolecularHamiltonian {
    parse_fcidump(&std::fs::read_to_string(fixture("h2_sto3g.fcidump")).unwrap()).unwrap()
}

pub fn complex_2pair() -> MolecularHamiltonian {
    parse_complex_hamiltonian(&std::fs::read_to_string(fixture("complex_2pair.cham")).unwrap()).unwrap()
}

// Reference values from tests/oracles/spectra.py (numpy, Kronecker-product
// Jordan-Wigner matrices built independently of this crate).
pub const H2_FULL_SPECTRUM: [f64; 16] = [
    -1.1372701746609022,
    -0.5387095798772797,
    -0.5387095798772797,
    -0.532479006886172,
    -0.532479006886172,
    -0.532479006886172,
    -0.446985717670664,
    -0.44698571767066386,
    -0.1699013904631799,
    0.23780527846665378,
    0.23780527846665378,
    0.35243414173945964,
    0.35243414173945986,
    0.47983611824427913,
    0.7137539936876182,
    0.9201067191670392,
];

/// Distinct two-electron levels; the second is a triplet.
pub const H2_TWO_ELECTRON_LEVELS: [f64; 4] = [-1.1372701746609022, -0.532479006886172, -0.1699013904631799, 0.47983611824427913];

/// Full configuration interaction energy from pyscf 2.6.2 for the same geometry.
pub const H2_FCI_PYSCF: f64 = -1.137270174660903;
pub const H2_HF_ENERGY: f64 = -1.11668438708534;
pub const H2_HF_GROUND_OVERLAP2: f64 = 0.9872699848699624;

pub const COMPLEX_FULL_SPECTRUM: [f64; 16] = [
    -3.942998004955036,
    -3.8861853441033682,
    -3.1941018883523338,
    -3.0823454767519114,
    -2.616795936524376,
    -2.4195130756578966,
    -2.052805543050755,
    -1.8855782365801845,
    -1.8572695561420147,
    -1.6494740583173526,
    -1.1628589701195045,
    -0.962409793585905,
    -0.6955994787916724,
    -0.4771328206808789,
    -0.07808670562105735,
    0.35,
];

pub const COMPLEX_TWO_ELECTRON_SPECTRUM: [f64; 6] = [
    -3.0823454767519114,
    -2.419513075657899,
    -2.0528055430507544,
    -1.8572695561420154,
    -1.1628589701195058,
    -0.6955994787916732,
];

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
