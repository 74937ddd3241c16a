//! Reader for the FCIDUMP integral format.

use std::collections::HashMap;

use num_complex::Complex64;

use super::{MolecularHamiltonian, HERMITICITY_TOL};
use crate::error::{Error, Result};

struct Header {
    norb: usize,
    nelec: usize,
    /// 0-based line index of the first record.
    body_start: usize,
}

/// Parses an FCIDUMP file into a spin-orbital Hamiltonian.
///
/// Spatial chemist-notation integrals `(ij|kl)` are expanded with their
/// eightfold permutational symmetry and converted to physicist order,
/// `g[P,Q,R,S] = (PR|QS)` with spin conservation on each electron. Entries
/// with `P == Q` or `R == S` multiply a vanishing operator and are dropped.
pub fn parse_fcidump(text: &str) -> Result<MolecularHamiltonian> {
    let lines: Vec<&str> = text.lines().collect();
    let header = parse_header(&lines)?;
    let norb = header.norb;

    let mut core = 0.0;
    let mut one: HashMap<(usize, usize), f64> = HashMap::new();
    let mut two: HashMap<(usize, usize, usize, usize), f64> = HashMap::new();

    for (offset, raw) in lines[header.body_start..].iter().enumerate() {
        let lineno = header.body_start + offset + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::parse(lineno, format!("expected `value i j k l`, got `{trimmed}`")));
        }
        let value = parse_real(fields[0]).ok_or_else(|| Error::parse(lineno, format!("bad value `{}`", fields[0])))?;
        let mut idx = [0usize; 4];
        for (slot, f) in idx.iter_mut().zip(&fields[1..]) {
            *slot = f
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad orbital index `{f}`")))?;
        }
        if let Some(&bad) = idx.iter().find(|&&i| i > norb) {
            return Err(Error::Validation(format!(
                "line {lineno}: orbital index {bad} exceeds NORB={norb}"
            )));
        }
        match idx {
            [0, 0, 0, 0] => core += value,
            [i, j, 0, 0] if i > 0 && j > 0 => {
                for key in [(i - 1, j - 1), (j - 1, i - 1)] {
                    insert_consistent(&mut one, key, value, lineno)?;
                }
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (i, j, k, l) = (i - 1, j - 1, k - 1, l - 1);
                for key in [
                    (i, j, k, l),
                    (j, i, k, l),
                    (i, j, l, k),
                    (j, i, l, k),
                    (k, l, i, j),
                    (l, k, i, j),
                    (k, l, j, i),
                    (l, k, j, i),
                ] {
                    insert_consistent(&mut two, key, value, lineno)?;
                }
            }
            // Orbital energies (`e i 0 0 0`) and similar annotations carry no
            // Hamiltonian information.
            [_, 0, 0, 0] => {}
            _ => {
                return Err(Error::parse(lineno, format!("unsupported index pattern {idx:?}")));
            }
        }
    }

    let mut h = MolecularHamiltonian::new(2 * norb, header.nelec, false);
    h.set_core_energy(core);
    for (&(i, j), &v) in &one {
        for spin in 0..2 {
            h.set_one_body(2 * i + spin, 2 * j + spin, Complex64::new(v, 0.0))?;
        }
    }
    for (&(i, j, k, l), &v) in &two {
        // (ij|kl): electron 1 in i,j and electron 2 in k,l.
        for s1 in 0..2 {
            for s2 in 0..2 {
                let (p, r) = (2 * i + s1, 2 * j + s1);
                let (q, s) = (2 * k + s2, 2 * l + s2);
                if p == q || r == s {
                    continue;
                }
                h.set_two_body(p, q, r, s, Complex64::new(v, 0.0))?;
            }
        }
    }
    h.validate(HERMITICITY_TOL)?;
    Ok(h)
}

fn insert_consistent<K>(map: &mut HashMap<K, f64>, key: K, value: f64, lineno: usize) -> Result<()>
where
    K: std::hash::Hash + Eq + std::fmt::Debug + Copy,
{
    match map.get(&key) {
        Some(&old) if (old - value).abs() > HERMITICITY_TOL => Err(Error::Validation(format!(
            "line {lineno}: integral {key:?} = {value} contradicts symmetric partner value {old}"
        ))),
        Some(_) => Ok(()),
        None => {
            map.insert(key, value);
            Ok(())
        }
    }
}

fn parse_real(field: &str) -> Option<f64> {
    field.replace(['D', 'd'], "E").parse().ok()
}

fn parse_header(lines: &[&str]) -> Result<Header> {
    let start = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::parse(1, "empty input"))?;
    if !lines[start].trim_start().to_ascii_uppercase().starts_with("&FCI") {
        return Err(Error::parse(start + 1, "header must start with `&FCI`"));
    }
    let mut text = String::new();
    let mut end = None;
    for (i, line) in lines.iter().enumerate().skip(start) {
        let upper = line.to_ascii_uppercase();
        let body = if i == start { &upper.trim_start()[4..] } else { upper.as_str() };
        if let Some(pos) = body.find("&END").or_else(|| body.find('/')) {
            text.push_str(&body[..pos]);
            end = Some(i);
            break;
        }
        text.push_str(body);
        text.push(' ');
    }
    let end = end.ok_or_else(|| Error::parse(start + 1, "header is not terminated by `/` or `&END`"))?;

    let norb = header_int(&text, "NORB").ok_or_else(|| Error::parse(start + 1, "header lacks NORB"))?;
    let nelec = header_int(&text, "NELEC").ok_or_else(|| Error::parse(start + 1, "header lacks NELEC"))?;
    if header_int(&text, "MS2").is_none() && text.contains("MS2") {
        return Err(Error::parse(start + 1, "malformed MS2 entry"));
    }
    Ok(Header {
        norb,
        nelec,
        body_start: end + 1,
    })
}

/// Reads `KEY = <integer>` from a namelist body.
fn header_int(text: &str, key: &str) -> Option<usize> {
    let mut search = 0;
    while let Some(found) = text[search..].find(key) {
        let at = search + found;
        let before_ok = at == 0 || !text.as_bytes()[at - 1].is_ascii_alphanumeric();
        let rest = text[at + key.len()..].trim_start();
        if before_ok {
            if let Some(value) = rest.strip_prefix('=') {
                let digits: String = value
                    .trim_start()
                    .chars()
                    .take_while(|c| c.is_ascii_digit() || *c == '-')
                    .collect();
                return digits.parse::<i64>().ok().and_then(|v| usize::try_from(v.abs()).ok());
            }
        }
        search = at + key.len();
    }
    None
}
