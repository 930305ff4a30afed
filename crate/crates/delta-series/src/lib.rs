//! Sparse truncated Laurent series in prolonged variables q_f, q_f', ...,
//! q_f^(r) over fixed-point p-adic scalars.
//!
//! A [`SeriesRing`] bundles the variable layout, the truncation policy
//! (weight cap, Laurent floor, derivative-degree cap) and the scalar
//! configuration. Multiplication refuses to silently cross the Laurent
//! floor; everything else that leaves the policy is dropped.

mod json;
mod ops;
mod ring;
mod series;

use padic_core::PadicError;
use thiserror::Error;

pub use json::{SeriesDocument, FORMAT_TAG};
pub use ops::{coord_denominators, SubstitutionMap};
pub use ring::{Mono, SeriesRing, TruncationPolicy, VarSpec};
pub use series::DeltaSeries;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("monomial {mono} falls below the Laurent floor -{floor}; try --laurent-floor {suggest}")]
    LaurentFloorViolation { mono: String, floor: u32, suggest: u32 },
    #[error("image is not invertible: {0}")]
    NonInvertibleImage(String),
    #[error("series live in different rings")]
    RingMismatch,
    #[error("level {level} exceeds the ring order {order}")]
    OrderExceeded { level: usize, order: usize },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("at {mono}: {source}")]
    AtMonomial { mono: String, source: PadicError },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violation at {location}: {message}")]
    InvariantViolation { location: String, message: String },
}

impl SeriesError {
    pub(crate) fn floor(ring: &SeriesRing, m: &[i32]) -> Self {
        let nf = ring.vars.num_families();
        let lowest = m[..nf].iter().copied().min().unwrap_or(0);
        SeriesError::LaurentFloorViolation {
            mono: format!("{m:?}"),
            floor: ring.policy.laurent_floor,
            suggest: (-lowest).max(0) as u32,
        }
    }

    pub(crate) fn at(s: &DeltaSeries, m: &[i32], e: PadicError) -> Self {
        SeriesError::AtMonomial { mono: s.format_mono(m), source: e }
    }
}
