//! Fixed-point p-adic scalars.
//!
//! A value is stored as a mantissa `m` with represented value `m * p^(-E)`.
//! Mantissas live in `[0, p^(M+E+G))`; only the low `M+E` digits are
//! significant, the top `G` guard digits absorb the precision spent by exact
//! divisions and by products of two non-integral operands.
//!
//! Arithmetic goes through a [`PadicConfig`], which plays the role of the
//! ring: `PadicFixed` is a plain `Copy` mantissa.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

/// Why an exact division by a power of p failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivisionFailure {
    /// The low digits are nonzero: the value really is not divisible.
    NonIdentity,
    /// The value is not divisible, and the guard is smaller than the
    /// requested shift, so lost precision may be the cause.
    InsufficientGuard,
}

impl fmt::Display for DivisionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivisionFailure::NonIdentity => write!(f, "value is not divisible"),
            DivisionFailure::InsufficientGuard => {
                write!(f, "guard digits too few for the requested division")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("invalid p-adic configuration: {0}")]
    InvalidConfig(String),
    #[error("operand is not a p-adic unit")]
    NotAUnit,
    #[error("denominator overflow: valuation {valuation} is below the floor -{denom_exp}")]
    DenominatorOverflow { valuation: i64, denom_exp: u32 },
    #[error("not divisible by p^{k} ({cause})")]
    NotDivisible { k: u32, cause: DivisionFailure },
}

pub type Result<T> = std::result::Result<T, PadicError>;

/// A mantissa. Meaningless without the [`PadicConfig`] it was produced by.
#[derive(Debug, Clone, Copy, Default, Hash)]
pub struct PadicFixed(u64);

impl PadicFixed {
    /// Raw guarded mantissa.
    pub fn raw(self) -> u64 {
        self.0
    }
}

/// Parameters of the fixed-point ring `p^(-E) Z / p^M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicConfig {
    p: u64,
    prec: u32,
    denom_exp: u32,
    guard: u32,
    /// p^(M+E+G)
    modulus: u64,
    /// p^(M+E)
    canon: u64,
    /// p^E
    pe: u64,
}

/// Largest total digit count such that p^K fits below 2^63.
pub fn max_digits(p: u64) -> u32 {
    let mut k = 0;
    let mut acc: u128 = 1;
    while acc * (p as u128) < (1u128 << 63) {
        acc *= p as u128;
        k += 1;
    }
    k
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_u64(p: u64, k: u32) -> u64 {
    let mut acc = 1u64;
    for _ in 0..k {
        acc *= p;
    }
    acc
}

/// p-adic valuation of a nonzero integer.
pub fn val_u64(mut n: u64, p: u64) -> u32 {
    assert!(n != 0);
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(m as i128) as u64)
}

impl PadicConfig {
    pub fn new(p: u64, prec: u32, denom_exp: u32, guard: u32) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(PadicError::InvalidConfig(format!("p = {p} must be an odd prime")));
        }
        if prec == 0 {
            return Err(PadicError::InvalidConfig("prec must be at least 1".into()));
        }
        let total = prec + denom_exp + guard;
        let cap = max_digits(p);
        if total > cap {
            return Err(PadicError::InvalidConfig(format!(
                "prec + denom_exp + guard = {total} exceeds {cap} digits for p = {p}"
            )));
        }
        Ok(PadicConfig {
            p,
            prec,
            denom_exp,
            guard,
            modulus: pow_u64(p, total),
            canon: pow_u64(p, prec + denom_exp),
            pe: pow_u64(p, denom_exp),
        })
    }

    /// Default guard for order-r work: 2r+2, plus E so that products of two
    /// non-integral values stay exact in the canonical digits.
    pub fn default_guard(order: u32, denom_exp: u32) -> u32 {
        2 * order + 2 + denom_exp
    }

    /// Config with the default guard for order `order`, clipped to what fits.
    pub fn for_order(p: u64, prec: u32, denom_exp: u32, order: u32) -> Result<Self> {
        let want = Self::default_guard(order, denom_exp);
        let room = max_digits(p).saturating_sub(prec + denom_exp);
        Self::new(p, prec, denom_exp, want.min(room))
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn prec(&self) -> u32 {
        self.prec
    }
    pub fn denom_exp(&self) -> u32 {
        self.denom_exp
    }
    pub fn guard(&self) -> u32 {
        self.guard
    }
    /// p^(M+E+G)
    pub fn modulus(&self) -> u64 {
        self.modulus
    }
    /// p^(M+E): the modulus of canonical mantissas.
    pub fn canonical_modulus(&self) -> u64 {
        self.canon
    }
    pub fn total_digits(&self) -> u32 {
        self.prec + self.denom_exp + self.guard
    }
    /// p < 5, where some identities are only checked, not assumed.
    pub fn small_prime_warning(&self) -> bool {
        self.p < 5
    }

    /// Same p and E with a different precision and guard.
    pub fn with_prec_guard(&self, prec: u32, guard: u32) -> Result<Self> {
        Self::new(self.p, prec, self.denom_exp, guard)
    }

    pub fn zero(&self) -> PadicFixed {
        PadicFixed(0)
    }

    pub fn one(&self) -> PadicFixed {
        PadicFixed(self.pe % self.modulus)
    }

    /// Wraps a raw guarded mantissa.
    pub fn from_mantissa(&self, m: u64) -> PadicFixed {
        PadicFixed(m % self.modulus)
    }

    pub fn from_i64(&self, n: i64) -> PadicFixed {
        let r = (n as i128).rem_euclid(self.modulus as i128) as u128;
        PadicFixed(((r * self.pe as u128) % self.modulus as u128) as u64)
    }

    pub fn from_bigint(&self, n: &BigInt) -> PadicFixed {
        let m = BigInt::from(self.modulus);
        let r = n.mod_floor(&m).to_u64().expect("residue fits");
        PadicFixed(((r as u128 * self.pe as u128) % self.modulus as u128) as u64)
    }

    /// The value num/den, failing if its valuation is below -E.
    pub fn from_frac(&self, num: i64, den: i64) -> Result<PadicFixed> {
        assert!(den != 0, "zero denominator");
        if num == 0 {
            return Ok(self.zero());
        }
        let p = self.p as i128;
        let (mut n, mut d) = (num as i128, den as i128);
        let mut v: i64 = 0;
        while n % p == 0 {
            n /= p;
            v += 1;
        }
        while d % p == 0 {
            d /= p;
            v -= 1;
        }
        self.from_unit_ratio_shifted(n, d, v)
    }

    /// p^v * n / d with n, d prime to p.
    fn from_unit_ratio_shifted(&self, n: i128, d: i128, v: i64) -> Result<PadicFixed> {
        let e = self.denom_exp as i64;
        if v < -e {
            return Err(PadicError::DenominatorOverflow { valuation: v, denom_exp: self.denom_exp });
        }
        let shift = (v + e) as u32;
        if shift >= self.total_digits() {
            return Ok(self.zero());
        }
        let m = self.modulus as i128;
        let nr = n.rem_euclid(m) as u64;
        let dr = d.rem_euclid(m) as u64;
        let dinv = inv_mod(dr, self.modulus).expect("denominator prime to p");
        let u = self.mulmod(nr, dinv);
        Ok(PadicFixed(self.mulmod(u, pow_u64(self.p, shift))))
    }

    /// Exact rational from big integers.
    pub fn from_bigfrac(&self, num: &BigInt, den: &BigInt) -> Result<PadicFixed> {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Ok(self.zero());
        }
        let pb = BigInt::from(self.p);
        let (mut n, mut d) = (num.clone(), den.clone());
        let mut v: i64 = 0;
        while (&n % &pb).is_zero() {
            n /= &pb;
            v += 1;
        }
        while (&d % &pb).is_zero() {
            d /= &pb;
            v -= 1;
        }
        let m = BigInt::from(self.modulus);
        let nr = n.mod_floor(&m).to_i128().unwrap();
        let dr = d.mod_floor(&m).to_i128().unwrap();
        self.from_unit_ratio_shifted(nr, dr, v)
    }

    #[inline]
    fn mulmod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    /// Mantissa reduced mod p^(M+E).
    pub fn canonical(&self, x: PadicFixed) -> u64 {
        x.0 % self.canon
    }

    pub fn is_zero(&self, x: PadicFixed) -> bool {
        x.0.is_multiple_of(self.canon)
    }

    pub fn eq(&self, x: PadicFixed, y: PadicFixed) -> bool {
        x.0 % self.canon == y.0 % self.canon
    }

    /// Valuation of the represented value, `None` when it is zero at precision.
    pub fn valuation(&self, x: PadicFixed) -> Option<i64> {
        let c = x.0 % self.canon;
        if c == 0 {
            return None;
        }
        Some(val_u64(c, self.p) as i64 - self.denom_exp as i64)
    }

    pub fn is_integral(&self, x: PadicFixed) -> bool {
        self.valuation(x).is_none_or(|v| v >= 0)
    }

    pub fn is_unit(&self, x: PadicFixed) -> bool {
        self.valuation(x) == Some(0)
    }

    pub fn add(&self, x: PadicFixed, y: PadicFixed) -> PadicFixed {
        let s = x.0 as u128 + y.0 as u128;
        PadicFixed((s % self.modulus as u128) as u64)
    }

    pub fn sub(&self, x: PadicFixed, y: PadicFixed) -> PadicFixed {
        PadicFixed(if x.0 >= y.0 { x.0 - y.0 } else { self.modulus - (y.0 - x.0) })
    }

    pub fn neg(&self, x: PadicFixed) -> PadicFixed {
        PadicFixed(if x.0 == 0 { 0 } else { self.modulus - x.0 })
    }

    /// Product, renormalized from p^(-2E) back to p^(-E).
    pub fn mul(&self, x: PadicFixed, y: PadicFixed) -> Result<PadicFixed> {
        let t = x.0 as u128 * y.0 as u128;
        if self.denom_exp == 0 {
            return Ok(PadicFixed((t % self.modulus as u128) as u64));
        }
        let pe = self.pe as u128;
        if !t.is_multiple_of(pe) {
            let v = if t == 0 { 0 } else { val_u128(t, self.p) as i64 };
            return Err(PadicError::DenominatorOverflow {
                valuation: v - 2 * self.denom_exp as i64,
                denom_exp: self.denom_exp,
            });
        }
        Ok(PadicFixed(((t / pe) % self.modulus as u128) as u64))
    }

    /// Multiplication by an ordinary integer (no precision loss).
    pub fn mul_int(&self, x: PadicFixed, n: i64) -> PadicFixed {
        let r = (n as i128).rem_euclid(self.modulus as i128) as u64;
        PadicFixed(self.mulmod(x.0, r))
    }

    /// Multiplication by p^k.
    pub fn mul_p_pow(&self, x: PadicFixed, k: u32) -> PadicFixed {
        if k >= self.total_digits() {
            return self.zero();
        }
        PadicFixed(self.mulmod(x.0, pow_u64(self.p, k)))
    }

    pub fn pow(&self, x: PadicFixed, mut n: u64) -> Result<PadicFixed> {
        let mut acc = self.one();
        let mut base = x;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base)?;
            }
            n >>= 1;
            if n > 0 {
                base = self.mul(base, base)?;
            }
        }
        Ok(acc)
    }

    /// Inverse of a p-adic unit.
    pub fn inv_unit(&self, x: PadicFixed) -> Result<PadicFixed> {
        if !self.is_unit(x) {
            return Err(PadicError::NotAUnit);
        }
        let w = x.0 / self.pe;
        let winv = inv_mod(w % self.modulus, self.modulus).ok_or(PadicError::NotAUnit)?;
        Ok(PadicFixed(self.mulmod(winv, self.pe)))
    }

    /// Inverse of any nonzero value whose inverse stays above the floor.
    pub fn inv(&self, x: PadicFixed) -> Result<PadicFixed> {
        let v = self.valuation(x).ok_or(PadicError::NotAUnit)?;
        let e = self.denom_exp as i64;
        if -v < -e {
            return Err(PadicError::DenominatorOverflow { valuation: -v, denom_exp: self.denom_exp });
        }
        let k = (v + e) as u32;
        let w = x.0 / pow_u64(self.p, k);
        let winv = inv_mod(w % self.modulus, self.modulus).ok_or(PadicError::NotAUnit)?;
        Ok(self.mul_p_pow(PadicFixed(winv), (e - v) as u32))
    }

    /// x / p^k, checked on the guarded mantissa.
    pub fn div_exact_p(&self, x: PadicFixed, k: u32) -> Result<PadicFixed> {
        if k == 0 {
            return Ok(x);
        }
        if k >= self.total_digits() {
            if x.0 == 0 {
                return Ok(x);
            }
            return Err(PadicError::NotDivisible { k, cause: DivisionFailure::InsufficientGuard });
        }
        let pk = pow_u64(self.p, k);
        if !x.0.is_multiple_of(pk) {
            let cause = if k > self.guard { DivisionFailure::InsufficientGuard } else { DivisionFailure::NonIdentity };
            return Err(PadicError::NotDivisible { k, cause });
        }
        Ok(PadicFixed(x.0 / pk))
    }

    /// (x - x^p)/p for integral x.
    pub fn delta_const(&self, x: PadicFixed) -> Result<PadicFixed> {
        let xp = self.pow(x, self.p)?;
        self.div_exact_p(self.sub(x, xp), 1)
    }

    /// C_p(x, y) = (x^p + y^p - (x+y)^p)/p.
    pub fn cp_poly(&self, x: PadicFixed, y: PadicFixed) -> Result<PadicFixed> {
        let xp = self.pow(x, self.p)?;
        let yp = self.pow(y, self.p)?;
        let sp = self.pow(self.add(x, y), self.p)?;
        self.div_exact_p(self.sub(self.add(xp, yp), sp), 1)
    }

    /// The unit u with p u^2 - a_p u + 1 = 0, so that pu is the non-unit
    /// root of x^2 - a_p x + p.
    pub fn hensel_u(&self, a_p: PadicFixed) -> Result<PadicFixed> {
        if !self.is_unit(a_p) {
            return Err(PadicError::NotAUnit);
        }
        let ainv = self.inv_unit(a_p)?;
        let mut u = ainv;
        for _ in 0..=self.total_digits() {
            let u2 = self.mul(u, u)?;
            let next = self.mul(self.add(self.one(), self.mul_int(u2, self.p as i64)), ainv)?;
            if self.eq(next, u) && next.0 == u.0 {
                break;
            }
            u = next;
        }
        Ok(u)
    }

    /// Binomial coefficient C(n, k) as an integral value.
    pub fn binomial(&self, n: u64, k: u64) -> PadicFixed {
        if k > n {
            return self.zero();
        }
        let k = k.min(n - k);
        let mut v: u64 = 0;
        let mut num: u64 = 1;
        let mut den: u64 = 1;
        for i in 0..k {
            let (mut a, mut b) = (n - i, i + 1);
            while a % self.p == 0 {
                a /= self.p;
                v += 1;
            }
            while b % self.p == 0 {
                b /= self.p;
                v -= 1;
            }
            num = self.mulmod(num, a % self.modulus);
            den = self.mulmod(den, b % self.modulus);
        }
        let u = self.mulmod(num, inv_mod(den, self.modulus).expect("unit"));
        let shift = v + self.denom_exp as u64;
        if shift >= self.total_digits() as u64 {
            return self.zero();
        }
        PadicFixed(self.mulmod(u, pow_u64(self.p, shift as u32)))
    }

    /// Generalized binomial C(e, k) for any integer e.
    pub fn binomial_signed(&self, e: i64, k: u64) -> PadicFixed {
        if e >= 0 {
            self.binomial(e as u64, k)
        } else {
            let c = self.binomial((-e) as u64 + k - 1, k);
            if k % 2 == 1 {
                self.neg(c)
            } else {
                c
            }
        }
    }

    /// Re-express a value produced under `src` (same p) in this config.
    pub fn convert_from(&self, src: &PadicConfig, x: PadicFixed) -> Result<PadicFixed> {
        assert_eq!(src.p, self.p, "convert_from across different primes");
        if src == self {
            return Ok(x);
        }
        let (es, ed) = (src.denom_exp, self.denom_exp);
        let m = x.0;
        if ed >= es {
            let shift = ed - es;
            if shift >= self.total_digits() {
                return Ok(self.zero());
            }
            let scaled = ((m % self.modulus) as u128 * pow_u64(self.p, shift) as u128) % self.modulus as u128;
            Ok(PadicFixed(scaled as u64))
        } else {
            let shift = es - ed;
            let ps = pow_u64(self.p, shift);
            if !m.is_multiple_of(ps) {
                return Err(PadicError::DenominatorOverflow {
                    valuation: val_u64(m, self.p) as i64 - es as i64,
                    denom_exp: ed,
                });
            }
            Ok(PadicFixed((m / ps) % self.modulus))
        }
    }

    /// Canonical decimal string of the reduced mantissa.
    pub fn to_decimal(&self, x: PadicFixed) -> String {
        self.canonical(x).to_string()
    }

    /// Parses a canonical mantissa string, rejecting unreduced values.
    pub fn from_decimal(&self, s: &str) -> std::result::Result<PadicFixed, String> {
        let m: u64 = s.parse().map_err(|e| format!("bad mantissa {s:?}: {e}"))?;
        if m >= self.canon {
            return Err(format!("mantissa {m} is not reduced below p^(M+E) = {}", self.canon));
        }
        Ok(PadicFixed(m))
    }

    /// Symmetric residue of the canonical value times p^E, for display and
    /// comparison with small integers.
    pub fn signed_mantissa(&self, x: PadicFixed) -> i128 {
        let c = self.canonical(x) as i128;
        if c > self.canon as i128 / 2 {
            c - self.canon as i128
        } else {
            c
        }
    }

    /// The integral value as a signed residue mod p^M, if integral.
    pub fn to_signed_int(&self, x: PadicFixed) -> Option<i128> {
        let c = self.canonical(x);
        if !c.is_multiple_of(self.pe) {
            return None;
        }
        let w = (c / self.pe) as i128;
        let pm = (self.canon / self.pe) as i128;
        Some(if w > pm / 2 { w - pm } else { w })
    }

    /// Readable form `m/p^k` or a signed integer.
    pub fn display(&self, x: PadicFixed) -> String {
        match self.valuation(x) {
            None => "0".into(),
            Some(v) if v >= 0 => self.to_signed_int(x).unwrap().to_string(),
            Some(v) => {
                let k = (-v) as u32;
                let lifted = self.mul_p_pow(x, k);
                format!("{}/{}^{}", self.to_signed_int(lifted).unwrap(), self.p, k)
            }
        }
    }
}

fn val_u128(mut n: u128, p: u64) -> u32 {
    let p = p as u128;
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}
