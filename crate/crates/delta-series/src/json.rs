use std::fmt::Write as _;
use std::sync::Arc;

use padic_core::PadicConfig;
use serde::Deserialize;
use serde_json::Value;

use crate::ring::{Mono, SeriesRing, TruncationPolicy, VarSpec};
use crate::series::DeltaSeries;
use crate::SeriesError;

pub const FORMAT_TAG: &str = "delta-series/1";

/// A series plus an optional free-form header (profile, parameters).
#[derive(Debug, Clone)]
pub struct SeriesDocument {
    pub header: Option<Value>,
    pub series: DeltaSeries,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    format: String,
    p: u64,
    prec: u32,
    denom_exp: u32,
    order: usize,
    families: Vec<String>,
    weights: Vec<i64>,
    weight_cap: Option<i64>,
    laurent_floor: u32,
    delta_deg_cap: Option<u32>,
    #[serde(default)]
    header: Option<Value>,
    terms: Vec<(Vec<i32>, String)>,
}

fn js<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

impl SeriesDocument {
    pub fn new(series: DeltaSeries) -> Self {
        SeriesDocument { header: None, series }
    }

    pub fn with_header(series: DeltaSeries, header: Value) -> Self {
        SeriesDocument { header: Some(header), series }
    }

    /// Canonical text: fixed field order, one term per line, terms in
    /// lexicographic order of exponent vectors.
    pub fn to_json(&self) -> String {
        let s = &self.series;
        let ring = s.ring();
        let cfg = &ring.cfg;
        let vars = &ring.vars;
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"format\": {},", js(&FORMAT_TAG));
        let _ = writeln!(out, "  \"p\": {},", cfg.p());
        let _ = writeln!(out, "  \"prec\": {},", cfg.prec());
        let _ = writeln!(out, "  \"denom_exp\": {},", cfg.denom_exp());
        let _ = writeln!(out, "  \"order\": {},", vars.order());
        let _ = writeln!(out, "  \"families\": {},", js(&vars.families()));
        let _ = writeln!(out, "  \"weights\": {},", js(&vars.weights()));
        let _ = writeln!(out, "  \"weight_cap\": {},", js(&ring.policy.weight_cap));
        let _ = writeln!(out, "  \"laurent_floor\": {},", ring.policy.laurent_floor);
        let _ = writeln!(out, "  \"delta_deg_cap\": {},", js(&ring.policy.delta_deg_cap));
        if let Some(h) = &self.header {
            let _ = writeln!(out, "  \"header\": {},", js(h));
        }
        if s.is_empty() {
            out.push_str("  \"terms\": []\n}\n");
            return out;
        }
        out.push_str("  \"terms\": [\n");
        let n = s.len();
        for (i, (m, c)) in s.terms().iter().enumerate() {
            let sep = if i + 1 == n { "" } else { "," };
            let _ = writeln!(out, "    [{},{}]{}", js(&m.as_slice()), js(&cfg.to_decimal(*c)), sep);
        }
        out.push_str("  ]\n}\n");
        out
    }

    /// Parses and validates a document. `guard` defaults to the order's
    /// default guard digits.
    pub fn from_json(text: &str, guard: Option<u32>) -> Result<Self, SeriesError> {
        let raw: RawDoc = serde_json::from_str(text).map_err(|e| SeriesError::Schema(e.to_string()))?;
        if raw.format != FORMAT_TAG {
            return Err(SeriesError::Schema(format!("unknown format {:?}", raw.format)));
        }
        let g = guard.unwrap_or_else(|| PadicConfig::default_guard(raw.order as u32, raw.denom_exp));
        let room = padic_core::max_digits(raw.p).saturating_sub(raw.prec + raw.denom_exp);
        let cfg = PadicConfig::new(raw.p, raw.prec, raw.denom_exp, g.min(room))?;
        let fams: Vec<&str> = raw.families.iter().map(|s| s.as_str()).collect();
        let vars = VarSpec::from_weights(&fams, raw.order, raw.weights)?;
        let policy = TruncationPolicy {
            weight_cap: raw.weight_cap,
            laurent_floor: raw.laurent_floor,
            delta_deg_cap: raw.delta_deg_cap,
        };
        let ring: Arc<SeriesRing> = SeriesRing::new(vars, policy, cfg);
        let nv = ring.vars.num_vars();
        let mut terms = Vec::with_capacity(raw.terms.len());
        let mut prev: Option<Mono> = None;
        for (i, (m, c)) in raw.terms.into_iter().enumerate() {
            let loc = format!("terms[{i}]");
            let bad = |message: String| SeriesError::InvariantViolation { location: loc.clone(), message };
            if m.len() != nv {
                return Err(bad(format!("exponent vector has {} entries, expected {nv}", m.len())));
            }
            let mono = Mono::from_vec(m);
            if !ring.admits(&mono) {
                return Err(bad("monomial outside the truncation policy".into()));
            }
            let v = ring.cfg.from_decimal(&c).map_err(bad)?;
            if ring.cfg.is_zero(v) {
                return Err(bad("zero coefficient stored".into()));
            }
            if let Some(pm) = &prev {
                if *pm >= mono {
                    return Err(bad("terms are not in strictly increasing order".into()));
                }
            }
            prev = Some(mono.clone());
            terms.push((mono, v));
        }
        let series = DeltaSeries::from_terms(&ring, terms)?;
        Ok(SeriesDocument { header: raw.header, series })
    }
}
