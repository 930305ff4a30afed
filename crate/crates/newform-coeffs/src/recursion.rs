use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use padic_core::{PadicConfig, PadicFixed};
use serde::Serialize;

use crate::{smallest_prime_factors, CoeffTable, NewformError, Provenance};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RecursionFailure {
    Normalization,
    PrimePower { l: u64, i: u32 },
    Multiplicative { n1: u64, n2: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecursionReport {
    pub passed: bool,
    pub checked: usize,
    pub first_failure: Option<RecursionFailure>,
}

/// Splits n into (l, i, rest) with n = l^i · rest, l the smallest prime factor.
fn split(spf: &[u32], n: usize) -> (usize, u32, usize) {
    let l = spf[n] as usize;
    let (mut i, mut rest) = (0, n);
    while rest % l == 0 {
        rest /= l;
        i += 1;
    }
    (l, i, rest)
}

/// Fills a_n from a_l by multiplicativity and the prime-power recursions.
pub fn hecke_extend(
    primes: &BTreeMap<u64, BigInt>,
    level: u64,
    weight: u32,
    n_max: usize,
) -> Result<CoeffTable, NewformError> {
    if weight == 0 {
        return Err(NewformError::InvalidArgument("weight must be positive".into()));
    }
    let spf = smallest_prime_factors(n_max);
    let mut a: Vec<BigInt> = vec![BigInt::zero(); n_max + 1];
    if n_max >= 1 {
        a[1] = BigInt::one();
    }
    for n in 2..=n_max {
        let (l, i, rest) = split(&spf, n);
        a[n] = if rest > 1 {
            &a[n / rest] * &a[rest]
        } else if i == 1 {
            primes.get(&(l as u64)).cloned().ok_or(NewformError::MissingPrime(l as u64))?
        } else if level.is_multiple_of(l as u64) {
            &a[n / l] * &a[l]
        } else {
            let lw = BigInt::from(l).pow(weight - 1);
            &a[n / l] * &a[l] - lw * &a[n / (l * l)]
        };
    }
    a.remove(0);
    Ok(CoeffTable { level, weight, a, provenance: Provenance::Recursion })
}

/// Checks every instance of the recursions inside the table, in increasing n.
pub fn check_recursion(t: &CoeffTable) -> RecursionReport {
    let n_max = t.n_max();
    let spf = smallest_prime_factors(n_max);
    let mut checked = 0;
    let fail = |f, checked| RecursionReport { passed: false, checked, first_failure: Some(f) };
    if n_max >= 1 {
        checked += 1;
        if !t.a[0].is_one() {
            return fail(RecursionFailure::Normalization, checked);
        }
    }
    let lw = |l: usize| BigInt::from(l).pow(t.weight.saturating_sub(1));
    for n in 2..=n_max {
        let (l, i, rest) = split(&spf, n);
        let ok = if rest > 1 {
            t.get(n) == t.get(n / rest) * t.get(rest)
        } else if i == 1 {
            continue;
        } else if t.level.is_multiple_of(l as u64) {
            t.get(n) == t.get(n / l) * t.get(l)
        } else {
            t.get(n / l) * t.get(l) == t.get(n) + lw(l) * t.get(n / (l * l))
        };
        checked += 1;
        if !ok {
            let f = if rest > 1 {
                RecursionFailure::Multiplicative { n1: (n / rest) as u64, n2: rest as u64 }
            } else {
                RecursionFailure::PrimePower { l: l as u64, i }
            };
            return fail(f, checked);
        }
    }
    RecursionReport { passed: true, checked, first_failure: None }
}

/// p·a_{n/p} + a_{np} = a_p·a_n for n ≤ n_limit (needs n_limit·p ≤ n_max).
/// Returns the number of n checked, or the first failing n.
pub fn check_p_identity(t: &CoeffTable, p: u64, n_limit: usize) -> Result<usize, usize> {
    let p = p as usize;
    assert!(n_limit * p <= t.n_max(), "table too short for the p-identity window");
    let ap = t.get(p);
    for n in 1..=n_limit {
        let lhs = if n % p == 0 { BigInt::from(p) * t.get(n / p) } else { BigInt::zero() } + t.get(n * p);
        if lhs != &ap * t.get(n) {
            return Err(n);
        }
    }
    Ok(n_limit)
}

/// a_{p^(i-1)} − u·a_{p^i} = −p^i·u^(i+1) for 1 ≤ i ≤ i_max. Returns the first failing i.
pub fn check_u_identity(cfg: &PadicConfig, t: &CoeffTable, p: u64, u: PadicFixed, i_max: u32) -> Result<(), u32> {
    for i in 1..=i_max {
        let pi = p.pow(i) as usize;
        let lhs =
            cfg.sub(cfg.from_bigint(&t.get(pi / p as usize)), cfg.mul(u, cfg.from_bigint(&t.get(pi))).map_err(|_| i)?);
        let rhs = cfg.neg(cfg.mul_p_pow(cfg.pow(u, i as u64 + 1).map_err(|_| i)?, i));
        if !cfg.eq(lhs, rhs) {
            return Err(i);
        }
    }
    Ok(())
}

/// First prime l ≤ n_max with l ≡ residue (mod modulus) and a_l ≠ 0.
pub fn first_nonvanishing_prime(t: &CoeffTable, modulus: u64, residue: u64) -> Option<u64> {
    crate::primes_up_to(t.n_max()).into_iter().find(|&l| l % modulus == residue && !t.get(l as usize).is_zero())
}
