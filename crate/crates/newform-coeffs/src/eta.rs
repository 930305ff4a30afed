use num_bigint::BigInt;
use num_traits::Zero;

use crate::{CoeffTable, Provenance};

/// q^shift · Π_d Π_{n≥1} (1 − q^(dn))^e
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaProduct {
    pub shift: u32,
    pub factors: Vec<(u32, i32)>,
}

/// Sparse Euler function Π_{n≥1}(1 − x^n) up to x^len, via generalized
/// pentagonal numbers.
fn pentagonal(len: usize) -> Vec<(usize, i64)> {
    let mut out = vec![(0usize, 1i64)];
    for k in 1i64.. {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let g1 = (k * (3 * k - 1) / 2) as usize;
        if g1 > len {
            break;
        }
        out.push((g1, sign));
        let g2 = (k * (3 * k + 1) / 2) as usize;
        if g2 <= len {
            out.push((g2, sign));
        }
    }
    out
}

fn mul_sparse(c: &mut [BigInt], sparse: &[(usize, i64)], d: usize) {
    // in place, high to low so every read sees the old value
    for n in (0..c.len()).rev() {
        let mut acc = BigInt::zero();
        for &(k, s) in sparse {
            let j = k * d;
            if j > n {
                break;
            }
            if s == 1 {
                acc += &c[n - j];
            } else {
                acc -= &c[n - j];
            }
        }
        c[n] = acc;
    }
}

fn div_sparse(c: &mut [BigInt], sparse: &[(usize, i64)], d: usize) {
    // the divisor has constant term 1
    for n in 0..c.len() {
        let mut acc = std::mem::take(&mut c[n]);
        for &(k, s) in &sparse[1..] {
            let j = k * d;
            if j > n {
                break;
            }
            if s == 1 {
                acc -= &c[n - j];
            } else {
                acc += &c[n - j];
            }
        }
        c[n] = acc;
    }
}

impl EtaProduct {
    pub fn new(shift: u32, factors: &[(u32, i32)]) -> Self {
        EtaProduct { shift, factors: factors.to_vec() }
    }

    /// Coefficients of q^0..q^len of the product without the shift.
    pub fn raw_series(&self, len: usize) -> Vec<BigInt> {
        let mut c = vec![BigInt::zero(); len + 1];
        c[0] = BigInt::from(1);
        for &(d, e) in &self.factors {
            assert!(d > 0, "eta factor scale must be positive");
            let d = d as usize;
            let pent = pentagonal(len / d);
            for _ in 0..e.unsigned_abs() {
                if e > 0 {
                    mul_sparse(&mut c, &pent, d);
                } else {
                    div_sparse(&mut c, &pent, d);
                }
            }
        }
        c
    }
}

/// Expands the eta product into a_1..a_nmax, where a_n is the coefficient of q^n.
pub fn eta_expand(eta: &EtaProduct, level: u64, n_max: usize) -> CoeffTable {
    assert!(n_max >= 1, "n_max must be at least 1");
    let s = eta.shift as usize;
    let raw = if n_max >= s { eta.raw_series(n_max - s) } else { Vec::new() };
    let a = (1..=n_max).map(|n| if n >= s { raw[n - s].clone() } else { BigInt::zero() }).collect();
    CoeffTable { level, weight: 2, a, provenance: Provenance::Eta }
}
