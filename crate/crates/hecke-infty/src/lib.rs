//! δ-symmetric series and the Hecke operators T(p)∞ on δ-expansions.
//!
//! Symmetric series in p families are handled by orbit representatives:
//! the canonical monomial of an orbit has its per-family exponent columns
//! in decreasing order. A weight slice of a symmetric series is then a
//! vector indexed by representatives, and decomposition into the images
//! δ^i S_j is a linear solve per slice.

mod solve;
mod sym;
mod tp;

use delta_series::{SeriesError, SeriesRing};
use padic_core::PadicError;
use serde::Serialize;
use thiserror::Error;

pub use solve::{
    decompose, decompose_with_candidate, orbit_representative, round_trip_mismatch, substitute_images,
    DecomposeOptions, DecompositionReport, DecompositionResult, SliceSummary, Status,
};
pub use sym::{canonical, family_ring, is_canonical, sigma_m, symmetry_defect, SymImages, SymVarRing};
pub use tp::{
    eigen_check, eigen_check_phi_route, psi_sym_identity, top_candidate, tp_infty, EigenReport, SymIdentityReport,
    TpMode, TpResult,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeckeError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("input is not symmetric under permuting the families (at {mono})")]
    NotPermutationSymmetric { mono: String },
    #[error("weight slice {weight} has {count} candidate monomials, bound {bound}; lower --weight-cap or --delta-cap")]
    SliceTooLarge { weight: i64, count: usize, bound: usize },
    #[error("not δ-symmetric within the verified window (residual at {residual})")]
    NotDeltaSymmetric { residual: String },
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, HeckeError>;

/// The truncation on which a check was actually carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub weight_cap: Option<i64>,
    pub laurent_floor: u32,
    pub delta_cap: Option<u32>,
    /// p-adic digits compared.
    pub precision: u32,
}

impl Window {
    pub fn of(ring: &SeriesRing, loss: u32) -> Self {
        Window {
            weight_cap: ring.policy.weight_cap,
            laurent_floor: ring.policy.laurent_floor,
            delta_cap: ring.policy.delta_deg_cap,
            precision: ring.cfg.prec().saturating_sub(loss),
        }
    }
}
