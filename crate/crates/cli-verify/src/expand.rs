//! `expand` and `decompose`: series documents in, series documents out.

use std::sync::Arc;

use delta_char::{delta_character, CharError, CurveProfile, FormalGroupData};
use delta_series::{SeriesDocument, SeriesRing, TruncationPolicy, VarSpec};
use expansions::{f_crys, f_minus_one, f_sharp, psi_series, series_from_table, FSharpCase};
use hecke_infty::{decompose, sigma_m, DecomposeOptions, Status};
use newform_coeffs::table_to_json;
use padic_core::PadicConfig;
use serde_json::{json, Value};

use crate::{CliError, Result, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpandTarget {
    F,
    FMinusOne,
    FSharp,
    Psi,
    FCrys(usize),
    PsiChar,
    Table,
}

impl ExpandTarget {
    pub fn parse(name: &str, r: usize) -> Result<Self> {
        Ok(match name {
            "f" => ExpandTarget::F,
            "fminus1" => ExpandTarget::FMinusOne,
            "fsharp" => ExpandTarget::FSharp,
            "psi" => ExpandTarget::Psi,
            "fcrys" => ExpandTarget::FCrys(r),
            "psi-char" => ExpandTarget::PsiChar,
            "table" => ExpandTarget::Table,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown target {name}; expected f, fminus1, fsharp, psi, fcrys, psi-char or table"
                )))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ExpandTarget::F => "f",
            ExpandTarget::FMinusOne => "fminus1",
            ExpandTarget::FSharp => "fsharp",
            ExpandTarget::Psi => "psi",
            ExpandTarget::FCrys(_) => "fcrys",
            ExpandTarget::PsiChar => "psi-char",
            ExpandTarget::Table => "table",
        }
    }
}

fn single(p: u64, order: usize, m: u32, e: u32, policy: TruncationPolicy) -> Result<Arc<SeriesRing>> {
    let cfg = PadicConfig::for_order(p, m, e, order as u32)?;
    Ok(SeriesRing::new(VarSpec::new(&["q"], order, p)?, policy, cfg))
}

fn with_delta_cap(policy: TruncationPolicy, cfg: &RunConfig) -> TruncationPolicy {
    TruncationPolicy { delta_deg_cap: cfg.delta_cap, ..policy }
}

/// Renders the requested object: a delta-series/1 document, or a
/// coefficient-table document for `table`.
pub fn cmd_expand(target: ExpandTarget, cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let p = cfg.p();
    let m = cfg.prec();
    let profile = cfg.load_profile()?;
    let mut header = json!({ "target": target.name(), "profile": profile.name() });
    let series = match target {
        ExpandTarget::Table => {
            let n = cfg.weight_cap.unwrap_or(100) as usize;
            return Ok(table_to_json(&profile.table(n)?)?);
        }
        ExpandTarget::F | ExpandTarget::FMinusOne => {
            let d = cfg.weight_cap.unwrap_or(60);
            let e = cfg.denom_exp.unwrap_or(0);
            let r = single(p, 0, m, e, TruncationPolicy::weight(d))?;
            let t = profile.table(d as usize)?;
            if target == ExpandTarget::F {
                series_from_table(&t, &r, d as usize)?
            } else {
                f_minus_one(&t, &r, d as usize)?
            }
        }
        ExpandTarget::FSharp => {
            let d = cfg.weight_cap.unwrap_or(60);
            let t = profile.table(d as usize)?;
            let e = cfg.denom_exp.unwrap_or((d as u64).ilog(p) + 1);
            let probe = PadicConfig::for_order(p, m, e, 2)?;
            let case = profile.case(cfg.case.as_deref(), &t, &probe)?;
            let order = if matches!(case, FSharpCase::CmSplit { .. }) { 1 } else { 2 };
            let r = single(p, order, m, e, with_delta_cap(TruncationPolicy::weight(d), cfg))?;
            // the probe config may differ from the ring's in its guard digits
            let case = profile.case(cfg.case.as_deref(), &t, &r.cfg)?;
            header["case"] = json!(case.name());
            header["a_p"] = json!(t.get(p as usize).to_string());
            f_sharp(&t, case, &r, d as usize)?
        }
        ExpandTarget::Psi => {
            let floor = cfg.laurent_floor.unwrap_or(p as u32 * (m + 4));
            let r = single(p, 1, m, 0, TruncationPolicy::unbounded().with_floor(floor))?;
            psi_series(&r)?
        }
        ExpandTarget::FCrys(k) => {
            let floor = cfg.laurent_floor.unwrap_or(8 * (p * p) as u32);
            let r = single(p, k, m, 0, with_delta_cap(TruncationPolicy::unbounded().with_floor(floor), cfg))?;
            header["r"] = json!(k);
            f_crys(k, &r)?
        }
        ExpandTarget::PsiChar => {
            let curve = CurveProfile::builtin(&profile.name())
                .ok_or_else(|| CliError::Config(format!("no curve attached to profile {}", profile.name())))?;
            let d = cfg.weight_cap.unwrap_or(10);
            let prec = cfg.prec.unwrap_or(3);
            let e = cfg.denom_exp.unwrap_or((d.max(1) as u64).ilog(p) + 1);
            let ccfg = PadicConfig::for_order(p, prec, e, 2)?;
            let t = profile.table(100)?;
            let case = profile.case(cfg.case.as_deref(), &t, &ccfg)?;
            let fg = FormalGroupData::from_curve(&curve.curve(&ccfg)?, d, case)?;
            header["case"] = json!(case.name());
            header["curve"] = json!({ "a": curve.a, "b": curve.b });
            match delta_character(&fg) {
                Ok(psi) => psi.series,
                Err(e @ CharError::IntegralityFailure { .. }) => return Err(CliError::CheckFailed(e.to_string())),
                Err(e) => return Err(e.into()),
            }
        }
    };
    Ok(SeriesDocument::with_header(series, header).to_json())
}

/// Human-readable listing of a series document. Never parsed back.
pub fn series_text(doc: &SeriesDocument) -> String {
    let s = &doc.series;
    let cfg = &s.ring().cfg;
    let mut out = String::new();
    if let Some(h) = &doc.header {
        out.push_str(&format!("# {h}\n"));
    }
    out.push_str(&format!("# p = {}, M = {}, E = {}, {} terms\n", cfg.p(), cfg.prec(), cfg.denom_exp(), s.len()));
    for (mono, c) in s.terms() {
        out.push_str(&format!("{:>24}  {}\n", cfg.display(*c), s.format_mono(mono)));
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct DecomposeRequest {
    /// Number of families to symmetrize a single-family input over;
    /// defaults to p.
    pub sigma: Option<usize>,
    pub seed: Option<u64>,
}

/// Reads a delta-series/1 document and writes G with ΣF = G(δ^i S_j). A
/// single-family input F is first symmetrized to Σ_m F. Returns the report
/// and whether the decomposition is exact.
pub fn cmd_decompose(text: &str, req: &DecomposeRequest, cfg: &RunConfig) -> Result<(String, bool)> {
    let doc = SeriesDocument::from_json(text, None)?;
    let mut input = doc.series;
    let fams = input.ring().vars.num_families();
    if fams == 1 {
        let m = req.sigma.unwrap_or(input.ring().cfg.p() as usize);
        input = sigma_m(&input, m)?;
    } else if req.sigma.is_some() {
        return Err(CliError::Config("--sigma applies to single-family inputs only".into()));
    }
    let opts = DecomposeOptions {
        delta_cap: cfg.delta_cap,
        laurent_floor: cfg.laurent_floor,
        seed: req.seed,
        ..Default::default()
    };
    let res = decompose(&input, &opts)?;
    let report = res.report(input.ring());
    let g_doc: Value = serde_json::from_str(&SeriesDocument::new(res.g.clone()).to_json())
        .map_err(|e| CliError::Infra(format!("re-reading G: {e}")))?;
    let out = json!({
        "format": "decomposition-report/1",
        "families": input.ring().vars.num_families(),
        "report": report,
        "g": g_doc,
    });
    let mut s = serde_json::to_string_pretty(&out).expect("report serializes");
    s.push('\n');
    Ok((s, res.status == Status::Exact))
}

/// Parses a document for the text renderer.
pub fn parse_document(text: &str) -> Result<SeriesDocument> {
    Ok(SeriesDocument::from_json(text, None)?)
}
