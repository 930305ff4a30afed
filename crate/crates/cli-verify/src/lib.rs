//! Configuration, verification suites and canonical documents behind the
//! `delta-verify` binary.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for a
//! configuration or infrastructure error.

pub mod expand;
pub mod report;
pub mod suites;

use std::path::Path;

use expansions::FSharpCase;
use newform_coeffs::{table_from_json, CoeffTable, NewformError, NewformProfile, ReductionType};
use padic_core::PadicConfig;
use serde::Serialize;
use thiserror::Error;

pub use expand::{cmd_decompose, cmd_expand, DecomposeRequest, ExpandTarget};
pub use report::{CheckRecord, CheckStatus, Outcome, SuiteReport};
pub use suites::{run_suite, suite_names, Suite};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "DELTA_VERIFY_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("infrastructure error: {0}")]
    Infra(String),
    /// A check or verdict failed; the payload is already rendered.
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Config(_) | CliError::Infra(_) => 2,
        }
    }
}

macro_rules! config_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Config(e.to_string())
            }
        }
    )*};
}

config_error!(
    padic_core::PadicError,
    delta_series::SeriesError,
    NewformError,
    expansions::ExpansionError,
    hecke_infty::HeckeError,
    delta_char::CharError
);

pub type Result<T> = std::result::Result<T, CliError>;

/// Command-line settings. `None` means "the suite's own default".
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub p: Option<u64>,
    pub prec: Option<u32>,
    pub denom_exp: Option<u32>,
    pub weight_cap: Option<i64>,
    pub laurent_floor: Option<u32>,
    pub delta_cap: Option<u32>,
    pub profile: String,
    pub case: Option<String>,
    /// Not part of the report content: results must not depend on it.
    #[serde(skip)]
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: None,
            prec: None,
            denom_exp: None,
            weight_cap: None,
            laurent_floor: None,
            delta_cap: None,
            profile: "level11".into(),
            case: None,
            threads: 1,
        }
    }
}

impl RunConfig {
    pub fn p(&self) -> u64 {
        self.p.unwrap_or(5)
    }

    pub fn prec(&self) -> u32 {
        self.prec.unwrap_or(6)
    }

    /// Rejects settings no module accepts, before any work starts.
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.p {
            if p == 2 || !padic_core::is_prime(p) {
                return Err(CliError::Config(format!("--p {p}: need an odd prime")));
            }
        }
        if self.prec == Some(0) {
            return Err(CliError::Config("--prec must be at least 1".into()));
        }
        if let Some(w) = self.weight_cap {
            if w < 1 {
                return Err(CliError::Config(format!("--weight-cap {w}: need a positive cap")));
            }
        }
        if self.threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        if let Some(c) = &self.case {
            if !["non-cm", "cm-inert", "cm-split"].contains(&c.as_str()) {
                return Err(CliError::Config(format!("--case {c}: expected non-cm, cm-inert or cm-split")));
            }
        }
        PadicConfig::for_order(self.p(), self.prec(), self.denom_exp.unwrap_or(0), 2)?;
        Ok(())
    }

    pub fn load_profile(&self) -> Result<Profile> {
        Profile::load(&self.profile)
    }
}

/// A newform given by name or by a coefficient-table file.
#[derive(Debug, Clone)]
pub enum Profile {
    Builtin(NewformProfile),
    File {
        path: String,
        table: CoeffTable,
    },
    /// A table file that failed the recursion check; suites report it as a
    /// failed gate.
    Rejected {
        path: String,
        reason: String,
    },
}

impl Profile {
    pub fn load(name: &str) -> Result<Self> {
        if let Some(nf) = NewformProfile::builtin(name) {
            return Ok(Profile::Builtin(nf));
        }
        let path = Path::new(name);
        if !path.exists() {
            let names = NewformProfile::builtin_names().join(", ");
            return Err(CliError::Config(format!("--profile {name}: not a builtin ({names}) and no such file")));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Infra(format!("{name}: {e}")))?;
        match table_from_json(&text) {
            Ok(table) => Ok(Profile::File { path: name.into(), table }),
            Err(NewformError::Rejected(f)) => Ok(Profile::Rejected { path: name.into(), reason: format!("{f:?}") }),
            Err(e) => Err(CliError::Config(format!("{name}: {e}"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Profile::Builtin(nf) => nf.name.clone(),
            Profile::File { path, .. } | Profile::Rejected { path, .. } => path.clone(),
        }
    }

    pub fn level(&self) -> Result<u64> {
        match self {
            Profile::Builtin(nf) => Ok(nf.level),
            Profile::File { table, .. } => Ok(table.level),
            Profile::Rejected { path, reason } => {
                Err(CliError::CheckFailed(format!("{path}: table rejected ({reason})")))
            }
        }
    }

    /// a_1..a_n.
    pub fn table(&self, n: usize) -> Result<CoeffTable> {
        match self {
            Profile::Builtin(nf) => Ok(nf.table(n)),
            Profile::File { path, table } => {
                if table.n_max() < n {
                    return Err(CliError::Config(format!(
                        "{path} has {} coefficients, {n} needed; lower --weight-cap or supply a longer table",
                        table.n_max()
                    )));
                }
                Ok(table.truncate(n))
            }
            Profile::Rejected { path, reason } => {
                Err(CliError::CheckFailed(format!("{path}: table rejected ({reason})")))
            }
        }
    }

    /// The f♯ case at p: from `--case` when given, otherwise from the
    /// profile's CM data (table files count as non-CM).
    pub fn case(&self, case: Option<&str>, t: &CoeffTable, cfg: &PadicConfig) -> Result<FSharpCase> {
        let p = cfg.p();
        if self.level()? % p == 0 {
            return Err(CliError::Config(format!("p = {p} divides the level {}; choose another --p", self.level()?)));
        }
        let kind = match (case, self) {
            (Some("non-cm"), _) => ReductionType::NonCm,
            (Some("cm-inert"), _) => ReductionType::CmInert,
            (Some("cm-split"), _) => ReductionType::CmSplit,
            (_, Profile::Builtin(nf)) => nf.reduction_type(p),
            _ => ReductionType::NonCm,
        };
        let ap_int = t.get(p as usize);
        let a_p = cfg.from_bigint(&ap_int);
        Ok(match kind {
            ReductionType::NonCm => FSharpCase::NonCm { a_p },
            ReductionType::CmInert => {
                if !cfg.is_zero(a_p) {
                    return Err(CliError::Config(format!("cm-inert needs a_{p} = 0, the table has {ap_int}")));
                }
                FSharpCase::CmInert
            }
            ReductionType::CmSplit => FSharpCase::CmSplit { a_p, u: cfg.hensel_u(a_p)? },
        })
    }
}
