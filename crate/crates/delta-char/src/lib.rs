//! Formal groups of short Weierstrass curves and their δ-characters.
//!
//! Formal-group series live in degree-graded rings: every variable, T and
//! its derivatives alike, has weight 1, so the weight cap is a cap on total
//! degree. Substituting series without constant term respects that cap.

mod character;
mod formal;

use delta_series::{SeriesError, VarSpec};
use padic_core::{PadicConfig, PadicError, PadicFixed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use character::{
    check_additivity, check_integrality, delta_character, AdditivityReport, DeltaCharacter, IntegralityReport,
};
pub use formal::{
    additive_law, axiom_failure, formal_group_law, formal_logarithm, formal_w, log_additivity_mismatch,
    multiplicative_law, one_var_ring, two_var_ring, FormalGroupData,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CharError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("bad reduction at p = {p}: 4a³ + 27b² has valuation {valuation}")]
    BadReduction { p: u64, valuation: i64 },
    #[error("coefficient at {mono} has valuation {valuation}")]
    IntegralityFailure { mono: String, valuation: i64 },
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, CharError>;

/// y² = x³ + ax + b over Z_p with good reduction, p ≥ 5.
#[derive(Debug, Clone)]
pub struct WeierstrassCurve {
    pub cfg: PadicConfig,
    pub a: PadicFixed,
    pub b: PadicFixed,
}

impl WeierstrassCurve {
    pub fn new(cfg: &PadicConfig, a: i64, b: i64) -> Result<Self> {
        let p = cfg.p();
        if p < 5 {
            return Err(CharError::InvalidArgument(format!("short Weierstrass form needs p >= 5, got {p}")));
        }
        let curve = WeierstrassCurve { cfg: cfg.clone(), a: cfg.from_i64(a), b: cfg.from_i64(b) };
        let v = curve.disc_valuation()?;
        if v != 0 {
            return Err(CharError::BadReduction { p, valuation: v });
        }
        Ok(curve)
    }

    /// Valuation of 4a³ + 27b²; the discriminant differs by −16, a unit.
    pub fn disc_valuation(&self) -> Result<i64> {
        let cfg = &self.cfg;
        let a3 = cfg.pow(self.a, 3)?;
        let b2 = cfg.mul(self.b, self.b)?;
        let d = cfg.add(cfg.mul_int(a3, 4), cfg.mul_int(b2, 27));
        Ok(cfg.valuation(d).unwrap_or(cfg.prec() as i64))
    }
}

/// #E(F_p) including the point at infinity, by counting square roots.
pub fn point_count(a: i64, b: i64, p: u64) -> u64 {
    let p = p as i64;
    let mut roots = vec![0u64; p as usize];
    for y in 0..p {
        roots[(y * y % p) as usize] += 1;
    }
    let a = a.rem_euclid(p);
    let b = b.rem_euclid(p);
    1 + (0..p).map(|x| roots[((x * x % p * x + a * x + b) % p) as usize]).sum::<u64>()
}

/// a_p = p + 1 − #E(F_p).
pub fn trace_of_frobenius(a: i64, b: i64, p: u64) -> i64 {
    p as i64 + 1 - point_count(a, b, p) as i64
}

/// A curve entered by its short-form coefficients, with the newform it
/// belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveProfile {
    pub name: String,
    pub a: i64,
    pub b: i64,
    pub level: u64,
    /// Name of the newform profile supplying a_p.
    pub newform: String,
}

impl CurveProfile {
    /// 11a1 with c4 = 496, c6 = 20008: y² = x³ − 27c4·x − 54c6.
    pub fn level11() -> Self {
        CurveProfile { name: "11a".into(), a: -13392, b: -1080432, level: 11, newform: "level11".into() }
    }

    /// y² = x³ − x, CM by Z[i].
    pub fn level32() -> Self {
        CurveProfile { name: "32a".into(), a: -1, b: 0, level: 32, newform: "level32".into() }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "11a" | "level11" | "11" => Some(Self::level11()),
            "32a" | "level32" | "32" => Some(Self::level32()),
            _ => None,
        }
    }

    pub fn curve(&self, cfg: &PadicConfig) -> Result<WeierstrassCurve> {
        WeierstrassCurve::new(cfg, self.a, self.b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CharError::InvalidArgument(format!("curve profile: {e}")))
    }
}

fn names(prefix: &str, k: usize) -> Vec<String> {
    if k == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=k).map(|i| format!("{prefix}{i}")).collect()
    }
}

fn degree_vars(k: usize, order: usize) -> Result<VarSpec> {
    let names = names("T", k);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Ok(VarSpec::degree_graded(&refs, order)?)
}
