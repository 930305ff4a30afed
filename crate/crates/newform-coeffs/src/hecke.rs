use num_bigint::BigInt;
use num_traits::Zero;
use padic_core::{PadicConfig, PadicError, PadicFixed};

/// b_1..b_valid of T_m(l) applied to a coefficient sequence, index n-1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeckeImage<T> {
    pub b: Vec<T>,
    pub valid: usize,
}

/// b_n = c_{nl} + l^(m−1)·c_{n/l}, for (l, N) = 1. `c` holds c_1..c_nmax.
pub fn hecke_tml(c: &[BigInt], l: u64, m: u32) -> HeckeImage<BigInt> {
    let l = l as usize;
    let valid = c.len() / l;
    let lw = BigInt::from(l).pow(m.saturating_sub(1));
    let get = |n: usize| if n == 0 { BigInt::zero() } else { c[n - 1].clone() };
    let b = (1..=valid)
        .map(|n| {
            let tail = if n % l == 0 { &lw * get(n / l) } else { BigInt::zero() };
            get(n * l) + tail
        })
        .collect();
    HeckeImage { b, valid }
}

/// Same action over the fixed-point scalars. Weight m may be ≤ 0, in which case
/// l^(m−1) is an inverse (l must be prime to p).
pub fn hecke_tml_padic(
    cfg: &PadicConfig,
    c: &[PadicFixed],
    l: u64,
    m: i32,
) -> Result<HeckeImage<PadicFixed>, PadicError> {
    let lu = l as usize;
    let valid = c.len() / lu;
    let base = cfg.pow(cfg.from_i64(l as i64), (m - 1).unsigned_abs() as u64)?;
    let lw = if m >= 1 { base } else { cfg.inv(base)? };
    let mut b = Vec::with_capacity(valid);
    for n in 1..=valid {
        let mut v = c[n * lu - 1];
        if n % lu == 0 {
            v = cfg.add(v, cfg.mul(lw, c[n / lu - 1])?);
        }
        b.push(v);
    }
    Ok(HeckeImage { b, valid })
}
