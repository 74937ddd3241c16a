//! Line-oriented format for complex (relativistic) integrals.
//!
//! ```text
//! CHAM norb=<kramers pairs> nelec=<electrons>
//! core <value>
//! h p q re im
//! g p q r s re im
//! ```
//!
//! Indices are 0-based spin-orbital (bispinor) indices in physicist order.
//! Missing partners are filled from the fourfold symmetry
//! `g_pqrs = g_qpsr = conj(g_rspq) = conj(g_srqp)` and `h_qp = conj(h_pq)`;
//! partners given explicitly must agree within the Hermiticity tolerance.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{MolecularHamiltonian, HERMITICITY_TOL};
use crate::error::{Error, Result};

pub fn parse_complex_hamiltonian(text: &str) -> Result<MolecularHamiltonian> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let (norb, nelec) = parse_header(hline, header)?;
    let n = 2 * norb;

    let mut core = 0.0;
    let mut one: BTreeMap<(usize, usize), (Complex64, usize)> = BTreeMap::new();
    let mut two: BTreeMap<(usize, usize, usize, usize), (Complex64, usize)> = BTreeMap::new();

    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "core" if fields.len() == 2 => {
                core = parse_f64(fields[1], lineno)?;
            }
            "h" if fields.len() == 5 => {
                let p = parse_index(fields[1], n, lineno)?;
                let q = parse_index(fields[2], n, lineno)?;
                let v = Complex64::new(parse_f64(fields[3], lineno)?, parse_f64(fields[4], lineno)?);
                if one.insert((p, q), (v, lineno)).is_some() {
                    return Err(Error::Validation(format!("line {lineno}: duplicate entry h {p} {q}")));
                }
            }
            "g" if fields.len() == 7 => {
                let mut idx = [0usize; 4];
                for (slot, f) in idx.iter_mut().zip(&fields[1..5]) {
                    *slot = parse_index(f, n, lineno)?;
                }
                let v = Complex64::new(parse_f64(fields[5], lineno)?, parse_f64(fields[6], lineno)?);
                let key = (idx[0], idx[1], idx[2], idx[3]);
                if two.insert(key, (v, lineno)).is_some() {
                    return Err(Error::Validation(format!("line {lineno}: duplicate entry g {key:?}")));
                }
            }
            _ => return Err(Error::parse(lineno, format!("unrecognised record `{line}`"))),
        }
    }

    let mut h = MolecularHamiltonian::new(n, nelec, true);
    h.set_core_energy(core);

    // Explicit entries first so that they are kept bit-exactly, then partners.
    for (&(p, q), &(v, _)) in &one {
        h.set_one_body(p, q, v)?;
    }
    for (&(p, q), &(v, lineno)) in &one {
        fill_partner(&mut h, Slot::One(q, p), v.conj(), lineno)?;
    }
    for (&(p, q, r, s), &(v, _)) in &two {
        h.set_two_body(p, q, r, s, v)?;
    }
    for (&(p, q, r, s), &(v, lineno)) in &two {
        fill_partner(&mut h, Slot::Two(q, p, s, r), v, lineno)?;
        fill_partner(&mut h, Slot::Two(r, s, p, q), v.conj(), lineno)?;
        fill_partner(&mut h, Slot::Two(s, r, q, p), v.conj(), lineno)?;
    }
    h.validate(HERMITICITY_TOL)?;
    Ok(h)
}

enum Slot {
    One(usize, usize),
    Two(usize, usize, usize, usize),
}

fn fill_partner(h: &mut MolecularHamiltonian, slot: Slot, expected: Complex64, lineno: usize) -> Result<()> {
    let existing = match slot {
        Slot::One(p, q) => h.one_body(p, q),
        Slot::Two(p, q, r, s) => h.two_body(p, q, r, s),
    };
    let zero = Complex64::new(0.0, 0.0);
    if existing == zero {
        if expected == zero {
            return Ok(());
        }
        return match slot {
            Slot::One(p, q) => h.set_one_body(p, q, expected),
            Slot::Two(p, q, r, s) => h.set_two_body(p, q, r, s, expected),
        };
    }
    if (existing - expected).norm() > HERMITICITY_TOL {
        return Err(Error::Validation(format!(
            "line {lineno}: symmetry partner holds {existing}, expected {expected}"
        )));
    }
    Ok(())
}

fn parse_header(lineno: usize, line: &str) -> Result<(usize, usize)> {
    let mut fields = line.split_whitespace();
    if fields.next() != Some("CHAM") {
        return Err(Error::parse(lineno, "header must start with `CHAM`"));
    }
    let (mut norb, mut nelec) = (None, None);
    for f in fields {
        let (key, value) = f
            .split_once('=')
            .ok_or_else(|| Error::parse(lineno, format!("bad header field `{f}`")))?;
        let value: usize = value
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad header value `{f}`")))?;
        match key.to_ascii_lowercase().as_str() {
            "norb" => norb = Some(value),
            "nelec" => nelec = Some(value),
            _ => return Err(Error::parse(lineno, format!("unknown header field `{key}`"))),
        }
    }
    match (norb, nelec) {
        (Some(m), Some(n)) => Ok((m, n)),
        _ => Err(Error::parse(lineno, "header needs norb= and nelec=")),
    }
}

fn parse_f64(field: &str, lineno: usize) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::parse(lineno, format!("bad number `{field}`")))
}

fn parse_index(field: &str, n: usize, lineno: usize) -> Result<usize> {
    let i: usize = field
        .parse()
        .map_err(|_| Error::parse(lineno, format!("bad index `{field}`")))?;
    if i >= n {
        return Err(Error::Validation(format!(
            "line {lineno}: index {i} out of range for {n} spin orbitals"
        )));
    }
    Ok(i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_pair_is_accepted() {
        let h = parse_complex_hamiltonian("CHAM norb=1 nelec=1\nh 0 1 0.1 0.2\nh 1 0 0.1 -0.2\n").unwrap();
        assert!(h.is_relativistic());
        assert_eq!(h.one_body(1, 0), Complex64::new(0.1, -0.2));
    }

    #[test]
    fn hermiticity_violation_is_rejected() {
        let err = parse_complex_hamiltonian("CHAM norb=1 nelec=1\nh 0 1 0.1 0.2\nh 1 0 0.1 0.2\n").unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn partners_are_unfolded() {
        let h = parse_complex_hamiltonian("CHAM norb=2 nelec=2\nh 0 3 0.0 0.5\ng 0 1 2 3 0.25 0.125\n").unwrap();
        assert_eq!(h.one_body(3, 0), Complex64::new(0.0, -0.5));
        let v = Complex64::new(0.25, 0.125);
        assert_eq!(h.two_body(1, 0, 3, 2), v);
        assert_eq!(h.two_body(2, 3, 0, 1), v.conj());
        assert_eq!(h.two_body(3, 2, 1, 0), v.conj());
        assert_eq!(h.two_body_terms().count(), 4);
    }

    #[test]
    fn bad_header_and_records() {
        assert!(matches!(parse_complex_hamiltonian("HAM norb=1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_complex_hamiltonian("CHAM norb=1 nelec=1\nx 1 2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_complex_hamiltonian("CHAM norb=1 nelec=1\nh 0 2 1 0\n"),
            Err(Error::Validation(_))
        ));
    }
}
