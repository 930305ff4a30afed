//! Newform coefficient tables.
//!
//! Coefficients are exact integers here. Conversion to `PadicFixed` happens
//! only when a table is turned into a series.

mod eta;
mod hecke;
mod json;
mod recursion;

use num_bigint::BigInt;
use padic_core::{PadicConfig, PadicFixed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eta::{eta_expand, EtaProduct};
pub use hecke::{hecke_tml, hecke_tml_padic, HeckeImage};
pub use json::{table_from_json, table_to_json, TABLE_FORMAT_TAG};
pub use recursion::{
    check_p_identity, check_recursion, check_u_identity, first_nonvanishing_prime, hecke_extend, RecursionFailure,
    RecursionReport,
};

#[derive(Debug, Error)]
pub enum NewformError {
    #[error("no a_l supplied for prime l = {0}")]
    MissingPrime(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("table file: {0}")]
    Schema(String),
    #[error("table rejected, recursion check failed: {0:?}")]
    Rejected(RecursionFailure),
    #[error(transparent)]
    Padic(#[from] padic_core::PadicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Eta,
    Recursion,
    File,
}

/// a_1..a_nmax of a normalized eigenform, stored at index n-1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffTable {
    pub level: u64,
    pub weight: u32,
    pub a: Vec<BigInt>,
    pub provenance: Provenance,
}

impl CoeffTable {
    pub fn n_max(&self) -> usize {
        self.a.len()
    }

    /// a_n, with a_n = 0 outside 1..=n_max.
    pub fn get(&self, n: usize) -> BigInt {
        if n == 0 || n > self.a.len() {
            BigInt::from(0)
        } else {
            self.a[n - 1].clone()
        }
    }

    pub fn get_i64(&self, n: usize) -> i64 {
        i64::try_from(self.get(n)).expect("coefficient exceeds i64")
    }

    pub fn truncate(&self, n_max: usize) -> CoeffTable {
        let mut t = self.clone();
        t.a.truncate(n_max);
        t
    }

    /// Coefficients reduced into `cfg`, index n-1.
    pub fn to_padic(&self, cfg: &PadicConfig) -> Vec<PadicFixed> {
        self.a.iter().map(|x| cfg.from_bigint(x)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionType {
    NonCm,
    CmSplit,
    CmInert,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewformProfile {
    pub name: String,
    pub level: u64,
    pub eta: EtaProduct,
    /// discriminant of the CM field
    pub cm_disc: Option<i64>,
}

impl NewformProfile {
    pub fn level11() -> Self {
        NewformProfile { name: "level11".into(), level: 11, eta: EtaProduct::new(1, &[(1, 2), (11, 2)]), cm_disc: None }
    }

    /// CM by Q(i).
    pub fn level32() -> Self {
        NewformProfile {
            name: "level32".into(),
            level: 32,
            eta: EtaProduct::new(1, &[(4, 2), (8, 2)]),
            cm_disc: Some(-4),
        }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "level11" | "11" | "11a" => Some(Self::level11()),
            "level32" | "32" | "32a" => Some(Self::level32()),
            _ => None,
        }
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["level11", "level32"]
    }

    pub fn table(&self, n_max: usize) -> CoeffTable {
        eta_expand(&self.eta, self.level, n_max)
    }

    pub fn reduction_type(&self, p: u64) -> ReductionType {
        match self.cm_disc {
            None => ReductionType::NonCm,
            Some(d) => {
                if kronecker(d, p) == 1 {
                    ReductionType::CmSplit
                } else {
                    ReductionType::CmInert
                }
            }
        }
    }
}

/// Kronecker symbol (d/p) for an odd prime p.
fn kronecker(d: i64, p: u64) -> i32 {
    let pi = p as i64;
    let a = d.rem_euclid(pi) as u64;
    if a == 0 {
        return 0;
    }
    let mut r: u64 = 1;
    let mut b = a;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % p as u128) as u64;
        }
        b = (b as u128 * b as u128 % p as u128) as u64;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}

/// Smallest prime factor of every n ≤ limit (spf[0] = spf[1] = 0).
pub fn smallest_prime_factors(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

pub fn primes_up_to(limit: usize) -> Vec<u64> {
    let spf = smallest_prime_factors(limit);
    (2..=limit).filter(|&n| spf[n] as usize == n).map(|n| n as u64).collect()
}
