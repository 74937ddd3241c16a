//! Determinant counts of FCI spaces.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        // Each partial product is itself a binomial coefficient, so the
        // division is exact.
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Closed-shell determinant count `C(m, n/2)^2` for `n` electrons in `m`
/// spatial orbitals.
pub fn fci_dimension_nonrel(m: u64, n: u64) -> Result<BigUint> {
    if !n.is_multiple_of(2) {
        return Err(Error::Domain(format!("closed-shell count needs an even electron number, got {n}")));
    }
    if n > 2 * m {
        return Err(Error::Domain(format!("{n} electrons do not fit into {m} spatial orbitals")));
    }
    let c = binomial(m, n / 2);
    Ok(&c * &c)
}

/// Determinant count `C(2m, n)` when all `M_K` blocks mix.
pub fn fci_dimension_rel(m: u64, n: u64) -> Result<BigUint> {
    if n > 2 * m {
        return Err(Error::Domain(format!("{n} electrons do not fit into {m} Kramers pairs")));
    }
    Ok(binomial(2 * m, n))
}

/// Explicit sum over `M_K` sectors, `sum_x C(m, x) C(m, n - x)`.
pub fn mk_sector_sum(m: u64, n: u64) -> BigUint {
    (0..=n).map(|x| binomial(m, x) * binomial(m, n - x)).sum()
}

/// Exact and large-`m` estimates of the relativistic to non-relativistic
/// FCI dimension ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioEstimate {
    pub electrons: u64,
    pub exact: f64,
    pub asymptotic: f64,
}

/// Ratio `C(2m, n) / C(m, n/2)^2` with `n = m / k`, and its Stirling form
/// `sqrt(pi (2k - 1)) / (2k) * sqrt(m)`.
pub fn rel_nonrel_ratio(m: u64, k: f64) -> Result<RatioEstimate> {
    if k.is_nan() || k <= 0.5 || !k.is_finite() {
        return Err(Error::Domain(format!("ratio m/n must exceed 1/2, got {k}")));
    }
    let n_real = m as f64 / k;
    let n = n_real.round();
    if (n - n_real).abs() > 1e-9 * n_real.max(1.0) {
        return Err(Error::Domain(format!("m = {m} is not an integer multiple of k = {k}")));
    }
    let n = n as u64;
    let rel = fci_dimension_rel(m, n)?;
    let nonrel = fci_dimension_nonrel(m, n)?;
    let exact = (ln_big(&rel) - ln_big(&nonrel)).exp();
    let asymptotic = (std::f64::consts::PI * (2.0 * k - 1.0)).sqrt() / (2.0 * k) * (m as f64).sqrt();
    Ok(RatioEstimate {
        electrons: n,
        exact,
        asymptotic,
    })
}

/// Natural logarithm of a positive big integer.
fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn small_binomials() {
        assert_eq!(binomial(5, 2), big(10));
        assert_eq!(binomial(4, 0), big(1));
        assert_eq!(binomial(3, 4), big(0));
        assert_eq!(binomial(14, 8), big(3003));
    }

    #[test]
    fn large_binomial_beyond_u128() {
        // C(200, 100) has 59 decimal digits.
        assert_eq!(binomial(200, 100).to_string().len(), 59);
        assert_eq!(binomial(128, 64).to_string(), "23951146041928082866135587776380551750");
    }

    #[test]
    fn nonrel_dimensions() {
        assert_eq!(fci_dimension_nonrel(2, 2).unwrap(), big(4));
        assert_eq!(fci_dimension_nonrel(7, 8).unwrap(), big(1225));
        assert_eq!(fci_dimension_nonrel(1, 2).unwrap(), big(1));
        assert!(matches!(fci_dimension_nonrel(3, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn rel_dimensions() {
        assert_eq!(fci_dimension_rel(2, 2).unwrap(), big(6));
        assert_eq!(fci_dimension_rel(7, 8).unwrap(), big(3003));
        assert_eq!(fci_dimension_rel(3, 0).unwrap(), big(1));
        assert!(fci_dimension_rel(2, 5).is_err());
    }

    #[test]
    fn small_ratios() {
        // m = 2 with k = 1 is the two-electron, two-pair case: 6 / 4.
        let r = rel_nonrel_ratio(2, 1.0).unwrap();
        assert_eq!(r.electrons, 2);
        assert!((r.exact - 1.5).abs() < 1e-12);
        // k = 2 would put a single electron in two pairs: no closed shell.
        assert!(matches!(rel_nonrel_ratio(2, 2.0), Err(Error::Domain(_))));
        let r = rel_nonrel_ratio(4, 2.0).unwrap();
        assert_eq!(r.electrons, 2);
        assert!((r.exact - 28.0 / 16.0).abs() < 1e-12);
        let r = rel_nonrel_ratio(4, 1.0).unwrap();
        assert!((r.exact - 70.0 / 36.0).abs() < 1e-12);
        assert!(matches!(rel_nonrel_ratio(4, 0.5), Err(Error::Domain(_))));
    }
}
