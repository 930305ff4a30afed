//! Exact rational series for cross-checking the formal-group code.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Series = Vec<BigRational>;
pub type Series2 = Vec<Vec<BigRational>>;

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn mul(a: &Series, b: &Series, d: usize) -> Series {
    let mut out = vec![BigRational::zero(); d + 1];
    for (i, x) in a.iter().enumerate().take(d + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(d + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// 1/u for u(0) = 1.
pub fn inverse(u: &Series, d: usize) -> Series {
    let mut out = vec![BigRational::zero(); d + 1];
    out[0] = BigRational::one() / &u[0];
    for n in 1..=d {
        let mut s = BigRational::zero();
        for k in 1..=n.min(u.len() - 1) {
            s += &u[k] * &out[n - k];
        }
        out[n] = -s * &out[0];
    }
    out
}

/// w = z³ + a·z·w² + b·w³ to degree d.
pub fn w_series(a: i64, b: i64, d: usize) -> Series {
    let mut z3 = vec![BigRational::zero(); d + 1];
    z3[3] = BigRational::one();
    let mut w = z3.clone();
    loop {
        let w2 = mul(&w, &w, d);
        let w3 = mul(&w2, &w, d);
        let mut next = z3.clone();
        for n in 0..=d {
            if n >= 1 {
                next[n] += int(a) * &w2[n - 1];
            }
            next[n] += int(b) * &w3[n];
        }
        if next == w {
            return w;
        }
        w = next;
    }
}

/// ∫ dx/(2y) in z = −x/y: with w = z³u, the differential is 1 + z·u′/(2u).
pub fn log_from_differential(a: i64, b: i64, d: usize) -> Series {
    let w = w_series(a, b, d + 3);
    let u: Series = w[3..].to_vec();
    let du: Series = (1..u.len()).map(|k| &u[k] * int(k as i64)).collect();
    let ratio = mul(&du, &inverse(&u, d), d);
    let mut omega = vec![BigRational::zero(); d + 1];
    omega[0] = BigRational::one();
    for n in 1..=d {
        omega[n] += &ratio[n - 1] / int(2);
    }
    let mut log = vec![BigRational::zero(); d + 1];
    for n in 1..=d {
        log[n] = &omega[n - 1] / int(n as i64);
    }
    log
}

/// E with L(E(t)) = t, for L = t + O(t²).
pub fn reversion(l: &Series, d: usize) -> Series {
    let mut e = vec![BigRational::zero(); d + 1];
    e[1] = BigRational::one();
    for _ in 0..d {
        // E = t − Σ_{n≥2} L_n Eⁿ
        let mut next = vec![BigRational::zero(); d + 1];
        next[1] = BigRational::one();
        let mut pow = e.clone();
        for ln in l.iter().take(d + 1).skip(2) {
            pow = mul(&pow, &e, d);
            for k in 0..=d {
                next[k] -= ln * &pow[k];
            }
        }
        e = next;
    }
    e
}

fn mul2(a: &Series2, b: &Series2, d: usize) -> Series2 {
    let mut out = vec![vec![BigRational::zero(); d + 1]; d + 1];
    for i in 0..=d {
        for j in 0..=d - i {
            if a[i][j].is_zero() {
                continue;
            }
            for k in 0..=d - i - j {
                for l in 0..=d - i - j - k {
                    out[i + k][j + l] += &a[i][j] * &b[k][l];
                }
            }
        }
    }
    out
}

/// E(L(T1) + L(T2)), indexed [i][j] for T1^i T2^j.
pub fn law_from_log(l: &Series, d: usize) -> Series2 {
    let e = reversion(l, d);
    let mut s = vec![vec![BigRational::zero(); d + 1]; d + 1];
    for n in 1..=d {
        s[n][0] += &l[n];
        s[0][n] += &l[n];
    }
    let mut out = vec![vec![BigRational::zero(); d + 1]; d + 1];
    let mut pow = s.clone();
    for (k, ek) in e.iter().enumerate().skip(1) {
        if k > 1 {
            pow = mul2(&pow, &s, d);
        }
        for i in 0..=d {
            for j in 0..=d - i {
                out[i][j] += ek * &pow[i][j];
            }
        }
    }
    out
}
