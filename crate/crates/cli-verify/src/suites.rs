//! Verification suites: named lists of checks composed from the module
//! operations. Checks of one suite run concurrently and are reported in
//! declaration order.

use std::sync::Arc;
use std::time::Instant;

use delta_char::{
    additive_law, axiom_failure, check_additivity, check_integrality, delta_character, formal_group_law,
    formal_logarithm, log_additivity_mismatch, trace_of_frobenius, CharError, CurveProfile, FormalGroupData,
};
use delta_series::{DeltaSeries, Mono, SeriesDocument, SeriesRing, TruncationPolicy, VarSpec};
use expansions::{
    cm_split_slice, f_crys, f_minus_one, f_sharp, f_sharp_via_phi, log_series, psi_derivative_mismatch, q_slice,
    q_slice_by_substitution, q_window, series_from_table, FSharpCase,
};
use hecke_infty::{
    decompose, eigen_check, eigen_check_phi_route, psi_sym_identity, round_trip_mismatch, sigma_m, substitute_images,
    DecomposeOptions, Status, TpMode,
};
use newform_coeffs::{
    check_p_identity, check_recursion, check_u_identity, hecke_extend, hecke_tml, primes_up_to, NewformProfile,
};
use num_bigint::BigInt;
use padic_core::{PadicConfig, PadicFixed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::report::{CheckRecord, CheckStatus, Outcome, Runtime, SuiteReport, REPORT_FORMAT_TAG};
use crate::{CliError, Profile, Result, RunConfig};

/// Seed for every randomized check; reports must not vary between runs.
const SUITE_SEED: u64 = 0x5eed_de17a;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    PadicLaws,
    SeriesLaws,
    Newform,
    Expansions,
    Serre,
    Hecke,
    Char,
    All,
}

impl Suite {
    pub fn parse(name: &str) -> Option<Suite> {
        Some(match name {
            "padic-laws" => Suite::PadicLaws,
            "series-laws" => Suite::SeriesLaws,
            "newform" => Suite::Newform,
            "expansions" => Suite::Expansions,
            "serre" => Suite::Serre,
            "hecke" => Suite::Hecke,
            "char" => Suite::Char,
            "all" => Suite::All,
            _ => return None,
        })
    }

    fn uses_profile(self) -> bool {
        !matches!(self, Suite::PadicLaws | Suite::SeriesLaws)
    }
}

pub fn suite_names() -> &'static [&'static str] {
    &["padic-laws", "series-laws", "newform", "expansions", "serre", "hecke", "char", "all"]
}

struct Ctx {
    cfg: RunConfig,
    profile: Profile,
}

type CheckFn = fn(&Ctx) -> Result<Outcome>;

struct Check {
    name: &'static str,
    run: CheckFn,
}

macro_rules! checks {
    ($($name:literal => $f:path),* $(,)?) => {
        vec![$(Check { name: $name, run: $f }),*]
    };
}

fn checks_of(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::PadicLaws => checks![
            "padic/ring-laws" => padic_ring_laws,
            "padic/fermat-quotient" => padic_fermat_quotient,
            "padic/hensel-root" => padic_hensel_root,
        ],
        Suite::SeriesLaws => checks![
            "series/frobenius-homomorphism" => series_frobenius_hom,
            "series/delta-product-rule" => series_delta_product,
            "series/theta-derivation" => series_theta_derivation,
            "series/document-round-trip" => series_document_round_trip,
        ],
        Suite::Newform => checks![
            "newform/eta-vs-recursion" => newform_eta_vs_recursion,
            "newform/classical-eigen" => newform_classical_eigen,
            "newform/p-identity" => newform_p_identity,
            "newform/u-identity" => newform_u_identity,
            "newform/point-counts" => newform_point_counts,
        ],
        Suite::Expansions => checks![
            "expansions/f-sharp-slice" => expansions_f_sharp_slice,
            "expansions/cm-split-slice" => expansions_cm_split,
            "expansions/cm-inert-slice" => expansions_cm_inert,
            "expansions/routes-agree" => expansions_routes_agree,
            "expansions/psi-derivative" => expansions_psi_derivative,
        ],
        Suite::Serre => checks!["serre/theta-relations" => serre_theta_relations],
        Suite::Hecke => checks![
            "hecke/f-sharp-eigenvector" => hecke_f_sharp_eigenvector,
            "hecke/psi-symmetrization" => hecke_psi_symmetrization,
            "hecke/crystalline-eigenvalue" => hecke_crystalline,
            "hecke/decomposition-round-trip" => hecke_decomposition_round_trip,
        ],
        Suite::Char => checks![
            "char/formal-group-axioms" => char_axioms,
            "char/log-additivity" => char_log_additivity,
            "char/integrality" => char_integrality,
            "char/additivity" => char_additivity,
            "char/negative-control" => char_negative_control,
            "char/trace-matches-table" => char_trace,
        ],
        Suite::All => [
            Suite::PadicLaws,
            Suite::SeriesLaws,
            Suite::Newform,
            Suite::Expansions,
            Suite::Serre,
            Suite::Hecke,
            Suite::Char,
        ]
        .into_iter()
        .flat_map(checks_of)
        .collect(),
    }
}

/// Runs a suite on a pool of `cfg.threads` workers. Check failures are
/// part of the report; configuration problems abort with an error.
pub fn run_suite(name: &str, cfg: &RunConfig) -> Result<SuiteReport> {
    let suite = Suite::parse(name).ok_or_else(|| {
        CliError::Config(format!("unknown suite {name}; expected one of {}", suite_names().join(", ")))
    })?;
    cfg.validate()?;
    let start = Instant::now();
    let profile = if suite.uses_profile() { cfg.load_profile()? } else { Profile::Builtin(NewformProfile::level11()) };
    let ctx = Ctx { cfg: cfg.clone(), profile };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Infra(format!("thread pool: {e}")))?;

    let mut records = Vec::new();
    let mut times = Vec::new();
    let mut gate_ok = true;
    if suite.uses_profile() {
        let t0 = Instant::now();
        let out = newform_gate(&ctx)?;
        gate_ok = out.pass;
        records.push(record("newform/gate", out));
        times.push(("newform/gate".to_string(), t0.elapsed().as_millis() as u64));
    }
    let checks = checks_of(suite);
    if gate_ok {
        let results: Vec<(Result<Outcome>, u64)> = pool.install(|| {
            checks
                .par_iter()
                .map(|c| {
                    let t0 = Instant::now();
                    let r = (c.run)(&ctx);
                    (r, t0.elapsed().as_millis() as u64)
                })
                .collect()
        });
        for (c, (r, ms)) in checks.iter().zip(results) {
            let out = match r {
                Ok(o) => o,
                Err(CliError::CheckFailed(msg)) => Outcome::new(false, msg),
                Err(e) => return Err(e),
            };
            records.push(record(c.name, out));
            times.push((c.name.to_string(), ms));
        }
    } else {
        for c in &checks {
            records.push(CheckRecord {
                name: c.name.into(),
                status: CheckStatus::Skipped,
                summary: "newform gate failed".into(),
                window: None,
                detail: serde_json::Value::Null,
            });
            times.push((c.name.to_string(), 0));
        }
    }

    let mut warnings = Vec::new();
    if cfg.p.is_some_and(|p| p < 5) {
        warnings.push(format!("p = {} < 5: small-prime run; identities are p-generic", cfg.p()));
    }
    let pass = records.iter().all(|r| r.status == CheckStatus::Pass);
    let mut config = serde_json::to_value(cfg).expect("config serializes");
    config["profile"] = json!(ctx.profile.name());
    Ok(SuiteReport {
        format: REPORT_FORMAT_TAG,
        suite: name.into(),
        config,
        warnings,
        checks: records,
        pass,
        runtime: Runtime { threads: cfg.threads, total_ms: start.elapsed().as_millis() as u64, checks_ms: times },
    })
}

fn record(name: &str, o: Outcome) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        status: if o.pass { CheckStatus::Pass } else { CheckStatus::Fail },
        summary: o.summary,
        window: o.window,
        detail: o.detail,
    }
}

fn single(p: u64, order: usize, m: u32, e: u32, policy: TruncationPolicy) -> Result<Arc<SeriesRing>> {
    let cfg = PadicConfig::for_order(p, m, e, order as u32)?;
    Ok(SeriesRing::new(VarSpec::new(&["q"], order, p)?, policy, cfg))
}

fn first_diff(a: &DeltaSeries, b: &DeltaSeries) -> Option<String> {
    a.first_difference(b).map(|m| a.format_mono(&m))
}

/// Smallest E covering v_p(n) for n ≤ d.
fn denominators_for(p: u64, d: usize) -> u32 {
    (d.max(1) as u64).ilog(p)
}

fn newform_gate(ctx: &Ctx) -> Result<Outcome> {
    match &ctx.profile {
        Profile::Rejected { path, reason } => {
            Ok(Outcome::new(false, format!("{path}: table rejected, recursion fails at {reason}")))
        }
        Profile::File { path, table } => {
            let rep = check_recursion(table);
            Ok(Outcome::new(rep.passed, format!("{path}: {} coefficients, recursion checked", table.n_max()))
                .detail(json!(rep)))
        }
        Profile::Builtin(nf) => {
            let rep = check_recursion(&nf.table(200));
            Ok(Outcome::new(rep.passed, format!("{} eta table, recursion checked to 200", nf.name)).detail(json!(rep)))
        }
    }
}

// ---- padic-laws

fn random_units(cfg: &PadicConfig, rng: &mut ChaCha8Rng, n: usize) -> Vec<PadicFixed> {
    (0..n).map(|_| cfg.from_i64(rng.gen_range(-1_000_000..1_000_000))).collect()
}

fn padic_ring_laws(ctx: &Ctx) -> Result<Outcome> {
    let cfg = PadicConfig::for_order(ctx.cfg.p(), ctx.cfg.prec(), 2, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    let xs = random_units(&cfg, &mut rng, 200);
    let (mut assoc, mut comm, mut distrib, mut inverse) = (true, true, true, true);
    for w in xs.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        assoc &= cfg.eq(cfg.mul(cfg.mul(a, b)?, c)?, cfg.mul(a, cfg.mul(b, c)?)?);
        assoc &= cfg.eq(cfg.add(cfg.add(a, b), c), cfg.add(a, cfg.add(b, c)));
        comm &= cfg.eq(cfg.mul(a, b)?, cfg.mul(b, a)?);
        distrib &= cfg.eq(cfg.mul(a, cfg.add(b, c))?, cfg.add(cfg.mul(a, b)?, cfg.mul(a, c)?));
        if cfg.is_unit(a) {
            inverse &= cfg.eq(cfg.mul(a, cfg.inv_unit(a)?)?, cfg.one());
        }
    }
    // a/p^k · p^k = a for k ≤ E
    let p = cfg.p() as i64;
    let mut fractions = true;
    for (k, a) in xs.iter().take(50).enumerate() {
        let k = (k % 3) as u32;
        let den = p.pow(k) * 7;
        let num = cfg.signed_mantissa(*a) as i64 % 1000;
        let x = cfg.from_frac(num, den)?;
        fractions &= cfg.eq(cfg.mul_int(x, den), cfg.from_i64(num));
    }
    Ok(Outcome::all(
        vec![
            ("associativity", assoc),
            ("commutativity", comm),
            ("distributivity", distrib),
            ("unit-inverse", inverse),
            ("fractions", fractions),
        ],
        format!("200 seeded elements, p = {}, M = {}", cfg.p(), cfg.prec()),
    ))
}

fn padic_fermat_quotient(ctx: &Ctx) -> Result<Outcome> {
    let cfg = PadicConfig::for_order(ctx.cfg.p(), ctx.cfg.prec(), 0, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 1);
    let xs = random_units(&cfg, &mut rng, 101);
    let mut ok = true;
    for w in xs.windows(2) {
        let (a, b) = (w[0], w[1]);
        let lhs = cfg.delta_const(cfg.add(a, b))?;
        let rhs = cfg.add(cfg.add(cfg.delta_const(a)?, cfg.delta_const(b)?), cfg.cp_poly(a, b)?);
        ok &= cfg.eq(lhs, rhs);
    }
    Ok(Outcome::new(ok, "δ(a+b) = δa + δb + C_p(a, b) on 100 seeded pairs"))
}

fn padic_hensel_root(ctx: &Ctx) -> Result<Outcome> {
    let cfg = PadicConfig::for_order(ctx.cfg.p(), ctx.cfg.prec(), 0, 2)?;
    let p = cfg.p() as i64;
    let mut ok = true;
    let mut tried = 0;
    for a in -30i64..=30 {
        if a.rem_euclid(p) == 0 {
            continue;
        }
        let a_p = cfg.from_i64(a);
        let pu = cfg.mul_p_pow(cfg.hensel_u(a_p)?, 1);
        let root = cfg.add(cfg.sub(cfg.mul(pu, pu)?, cfg.mul(a_p, pu)?), cfg.from_i64(p));
        ok &= cfg.is_zero(root);
        tried += 1;
    }
    Ok(Outcome::new(ok, format!("pu is a root of x² − a x + p for {tried} units a")))
}

// ---- series-laws

fn random_series(ring: &Arc<SeriesRing>, rng: &mut ChaCha8Rng, terms: usize) -> Result<DeltaSeries> {
    let order = ring.vars.order();
    let cap = ring.policy.weight_cap.unwrap_or(20);
    let mut items = Vec::new();
    while items.len() < terms {
        let mut m = ring.zero_mono();
        // levels below the top, so that δ stays inside the ring
        for (i, e) in m.iter_mut().enumerate().take(order.max(1)) {
            *e = rng.gen_range(0..=if i == 0 { 6 } else { 2 });
        }
        if m.iter().all(|&e| e == 0) || ring.vars.weight(&m) > cap {
            continue;
        }
        items.push((m, ring.cfg.from_i64(rng.gen_range(-9..=9))));
    }
    Ok(DeltaSeries::from_terms(ring, items)?)
}

fn series_ring(ctx: &Ctx, e: u32) -> Result<Arc<SeriesRing>> {
    let p = ctx.cfg.p();
    let cap = ctx.cfg.weight_cap.unwrap_or(4 * p as i64 + 10);
    single(p, 2, ctx.cfg.prec.unwrap_or(4), e, TruncationPolicy::weight(cap))
}

fn series_frobenius_hom(ctx: &Ctx) -> Result<Outcome> {
    let r = series_ring(ctx, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 2);
    let mut ok = true;
    for _ in 0..6 {
        let f = random_series(&r, &mut rng, 3)?;
        let g = random_series(&r, &mut rng, 3)?;
        ok &= f.mul(&g)?.frobenius()? == f.frobenius()?.mul(&g.frobenius()?)?;
        ok &= f.add(&g)?.frobenius()? == f.frobenius()?.add(&g.frobenius()?)?;
    }
    Ok(Outcome::new(ok, "φ(fg) = φf·φg and φ(f+g) = φf + φg on 6 seeded pairs")
        .window(json!({ "weight_cap": r.policy.weight_cap })))
}

fn series_delta_product(ctx: &Ctx) -> Result<Outcome> {
    let r = series_ring(ctx, 0)?;
    let p = r.cfg.p();
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 3);
    let mut ok = true;
    for _ in 0..6 {
        let f = random_series(&r, &mut rng, 2)?;
        let g = random_series(&r, &mut rng, 2)?;
        let (df, dg) = (f.delta()?, g.delta()?);
        let rhs = f.pow(p)?.mul(&dg)?.add(&g.pow(p)?.mul(&df)?)?.add(&df.mul(&dg)?.scale_int(p as i64))?;
        ok &= f.mul(&g)?.delta()? == rhs;
    }
    Ok(Outcome::new(ok, "δ(fg) = f^p δg + g^p δf + p δf δg on 6 seeded pairs"))
}

fn series_theta_derivation(ctx: &Ctx) -> Result<Outcome> {
    let r = series_ring(ctx, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 4);
    let mut ok = true;
    for j in 0..=2 {
        let f = random_series(&r, &mut rng, 3)?;
        let g = random_series(&r, &mut rng, 3)?;
        let lhs = f.mul(&g)?.theta(j)?;
        let rhs = f.theta(j)?.mul(&g)?.add(&f.mul(&g.theta(j)?)?)?;
        ok &= lhs == rhs;
    }
    Ok(Outcome::new(ok, "θ_j(fg) = θ_j(f)g + fθ_j(g) for j = 0, 1, 2"))
}

fn series_document_round_trip(ctx: &Ctx) -> Result<Outcome> {
    let r = series_ring(ctx, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 5);
    let f = random_series(&r, &mut rng, 8)?.scale(r.cfg.from_frac(1, r.cfg.p() as i64)?)?;
    let text = SeriesDocument::new(f.clone()).to_json();
    let back = SeriesDocument::from_json(&text, Some(r.cfg.guard()))?;
    let identical = back.series == f && back.to_json() == text;
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Infra(e.to_string()))?;
    let mut unreduced = doc.clone();
    unreduced["terms"][0][1] = json!(r.cfg.canonical_modulus().to_string());
    let mut outside = doc.clone();
    let far = r.policy.weight_cap.unwrap_or(0) as i32 + 1;
    outside["terms"][0][0][0] = json!(far);
    let refused = |v: &serde_json::Value| SeriesDocument::from_json(&v.to_string(), Some(r.cfg.guard())).is_err();
    Ok(Outcome::all(
        vec![
            ("bit-exact", identical),
            ("unreduced-mantissa-refused", refused(&unreduced)),
            ("out-of-policy-refused", refused(&outside)),
        ],
        format!("{} terms through delta-series/1", f.len()),
    ))
}

// ---- newform

fn newform_eta_vs_recursion(ctx: &Ctx) -> Result<Outcome> {
    let (table, level) = match &ctx.profile {
        Profile::Builtin(nf) => (nf.table(2000), nf.level),
        Profile::File { table, .. } => (table.truncate(2000), table.level),
        Profile::Rejected { .. } => unreachable!("gate"),
    };
    let n = table.n_max();
    let report = check_recursion(&table);
    let primes = primes_up_to(n).into_iter().map(|l| (l, table.get(l as usize))).collect();
    let ext = hecke_extend(&primes, level, table.weight, n)?;
    let agree = ext.a == table.a;
    Ok(Outcome::all(vec![("check-recursion", report.passed), ("extension-agrees", agree)], format!("n ≤ {n}"))
        .detail(json!({ "n_max": n, "recursion": report, "budget_ms": 5000 })))
}

fn newform_classical_eigen(ctx: &Ctx) -> Result<Outcome> {
    let n = 400;
    let table = ctx.profile.table(n * 13)?;
    let mut bad = None;
    for l in [2u64, 3, 7, 13] {
        let img = hecke_tml(&table.a, l, 2);
        let al = table.get(l as usize);
        if img.valid < n {
            return Err(CliError::Config(format!("T_{l} valid only to {}", img.valid)));
        }
        if let Some(k) = (1..=n).find(|&k| img.b[k - 1] != &al * table.get(k)) {
            bad.get_or_insert(format!("l = {l}, n = {k}"));
        }
    }
    let summary = match &bad {
        None => format!("T_l f = a_l f for l ∈ {{2, 3, 7, 13}}, n ≤ {n}"),
        Some(b) => format!("eigen property fails at {b}"),
    };
    Ok(Outcome::new(bad.is_none(), summary))
}

fn newform_p_identity(ctx: &Ctx) -> Result<Outcome> {
    let p = ctx.cfg.p();
    let limit = 1000;
    let table = ctx.profile.table(limit * p as usize)?;
    let r = check_p_identity(&table, p, limit);
    let summary = match r {
        Ok(n) => format!("p a_(n/p) + a_(np) = a_p a_n for n ≤ {n}"),
        Err(n) => format!("fails at n = {n}"),
    };
    Ok(Outcome::new(r == Ok(limit), summary))
}

fn newform_u_identity(_: &Ctx) -> Result<Outcome> {
    let cfg = PadicConfig::new(5, 6, 0, 4)?;
    let t = NewformProfile::level32().table(700);
    let u = cfg.hensel_u(cfg.from_i64(t.get_i64(5)))?;
    let r = check_u_identity(&cfg, &t, 5, u, 4);
    Ok(Outcome::new(r.is_ok(), "level 32, p = 5: a_(5^(i−1)) − u a_(5^i) = −5^i u^(i+1) mod 5^6, i ≤ 4"))
}

fn newform_point_counts(_: &Ctx) -> Result<Outcome> {
    let mut parts = Vec::new();
    for curve in [CurveProfile::level11(), CurveProfile::level32()] {
        let table = NewformProfile::builtin(&curve.newform).expect("builtin").table(100);
        let ok = primes_up_to(100)
            .into_iter()
            .filter(|&l| l >= 5 && curve.level % l != 0)
            .all(|l| trace_of_frobenius(curve.a, curve.b, l) == table.get_i64(l as usize));
        parts.push((if curve.level == 11 { "11a" } else { "32a" }, ok));
    }
    Ok(Outcome::all(parts, "a_l = l + 1 − #E(F_l) for good primes 5 ≤ l ≤ 100"))
}

// ---- expansions

fn expansions_f_sharp_slice(ctx: &Ctx) -> Result<Outcome> {
    let p = ctx.cfg.p();
    let m = ctx.cfg.prec();
    let d = ctx.cfg.weight_cap.unwrap_or(1500) as usize;
    let n = 60.min(d);
    let e = ctx.cfg.denom_exp.unwrap_or(denominators_for(p, d) + 1);
    let r = single(p, 2, m, e, TruncationPolicy::weight(d as i64))?;
    let t = ctx.profile.table(d)?;
    let case = ctx.profile.case(ctx.cfg.case.as_deref(), &t, &r.cfg)?;
    let fs = f_sharp(&t, case, &r, d)?;
    let by_sub = q_slice_by_substitution(&fs)?;
    let slice = q_window(&by_sub, n as i32);
    let want = q_window(&f_minus_one(&t, &r, n)?, n as i32);
    let zero_at_pm = (1..=(n as u64 / p)).all(|k| r.cfg.is_zero(slice.coeff(&[(k * p) as i32, 0, 0])));
    let mism = first_diff(&slice, &want);
    Ok(Outcome::all(
        vec![
            ("slice-equals-f-minus-one", mism.is_none()),
            ("vanishes-at-pm", zero_at_pm),
            ("routes-agree", by_sub == q_slice(&fs)),
        ],
        format!("{} at p = {p}: q′ = q″ = 0 slice, n ≤ {n}, D = {d}, mod {p}^{m}", case.name()),
    )
    .window(json!({ "n_max": n, "weight_cap": d, "precision": m }))
    .detail(json!({ "case": case.name(), "terms": fs.len(), "first_mismatch": mism, "budget_ms": 60000 })))
}

fn expansions_cm_split(_: &Ctx) -> Result<Outcome> {
    let (p, m, d) = (5u64, 6, 60usize);
    let r = single(p, 2, m, 2, TruncationPolicy::weight(d as i64))?;
    let nf = NewformProfile::level32();
    let t = nf.table(700);
    let case = FSharpCase::for_profile(&nf, &t, &r.cfg)?;
    let FSharpCase::CmSplit { u, .. } = case else {
        return Ok(Outcome::new(false, "level 32 is not split at 5"));
    };
    let fs = f_sharp(&t.truncate(d), case, &r, d)?;
    let mism = first_diff(&q_slice_by_substitution(&fs)?, &cm_split_slice(&t.truncate(d), u, &r, d)?);
    let u_ok = check_u_identity(&r.cfg, &t, p, u, 4).is_ok();
    Ok(Outcome::all(
        vec![("slice", mism.is_none()), ("u-identity", u_ok)],
        format!("level 32, p = 5, u = {}: split slice, n ≤ {d}, mod 5^{m}", r.cfg.display(u)),
    )
    .window(json!({ "n_max": d, "precision": m }))
    .detail(json!({ "first_mismatch": mism })))
}

fn expansions_cm_inert(_: &Ctx) -> Result<Outcome> {
    let (p, m, d) = (7u64, 5, 40usize);
    let r = single(p, 2, m, 2, TruncationPolicy::weight(d as i64))?;
    let nf = NewformProfile::level32();
    let t = nf.table(d);
    let a7_zero = t.get(7) == BigInt::from(0);
    let case = FSharpCase::for_profile(&nf, &t, &r.cfg)?;
    let fs = f_sharp(&t, case, &r, d)?;
    let mism = first_diff(&q_slice_by_substitution(&fs)?, &f_minus_one(&t, &r, d)?);
    Ok(Outcome::all(
        vec![("a7-zero", a7_zero), ("inert-case", matches!(case, FSharpCase::CmInert)), ("slice", mism.is_none())],
        format!("level 32, p = 7: slice equals f^(−1), n ≤ {d}, mod 7^{m}"),
    )
    .window(json!({ "n_max": d, "precision": m }))
    .detail(json!({ "first_mismatch": mism })))
}

fn expansions_routes_agree(ctx: &Ctx) -> Result<Outcome> {
    let p = ctx.cfg.p();
    let d = 200usize;
    let r = single(p, 2, 5, denominators_for(p, d) + 1, TruncationPolicy::weight(d as i64))?;
    let t = ctx.profile.table(d)?;
    let case = ctx.profile.case(ctx.cfg.case.as_deref(), &t, &r.cfg)?;
    let mism = first_diff(&f_sharp(&t, case, &r, d)?, &f_sharp_via_phi(&t, case, &r, d)?);
    Ok(Outcome::new(mism.is_none(), format!("closed form of f♯ equals (1/p)P(φ)L, weight ≤ {d}"))
        .detail(json!({ "first_mismatch": mism })))
}

fn expansions_psi_derivative(ctx: &Ctx) -> Result<Outcome> {
    let p = ctx.cfg.p();
    let m = ctx.cfg.prec.unwrap_or(4);
    let r = single(p, 1, m, 0, TruncationPolicy::unbounded().with_floor(p as u32 * (m + 4)))?;
    let mism = psi_derivative_mismatch(&r)?;
    Ok(Outcome::new(mism.is_none(), format!("∂Ψ/∂q′ = q^(−p)(1 + p q′ q^(−p))^(−1) mod {p}^{m}"))
        .detail(json!({ "first_mismatch": mism.map(|m| format!("{m:?}")) })))
}

// ---- serre

fn serre_theta_relations(ctx: &Ctx) -> Result<Outcome> {
    let p = ctx.cfg.p();
    let m = ctx.cfg.prec.unwrap_or(5);
    let w = ctx.cfg.weight_cap.unwrap_or(2 * (p * p) as i64);
    let d = w as usize;
    let e = ctx.cfg.denom_exp.unwrap_or((denominators_for(p, d) + 1).max(2));
    let r = single(p, 2, m, e, TruncationPolicy::weight(w))?;
    // dividing by p² spends two digits, so work two digits wide
    let wide = r.with_extra_digits(2)?;
    let cfg = &wide.cfg;
    let t = ctx.profile.table(d)?;
    let case = ctx.profile.case(ctx.cfg.case.as_deref(), &t, cfg)?;
    let a_p = match case {
        FSharpCase::NonCm { a_p } | FSharpCase::CmSplit { a_p, .. } => a_p,
        FSharpCase::CmInert => cfg.zero(),
    };
    if matches!(case, FSharpCase::CmSplit { .. }) {
        return Err(CliError::Config("the Serre relations are stated for the order-2 cases; use --case non-cm".into()));
    }
    let f = series_from_table(&t, &wide, d)?;
    let fs = f_sharp(&t, case, &wide, d)?;
    let phi = f.frobenius()?;
    let phi2 = phi.frobenius()?;
    let th: Vec<DeltaSeries> = (0..=2).map(|j| fs.theta(j)).collect::<std::result::Result<_, _>>()?;
    let cmp = |a: &DeltaSeries, b: &DeltaSeries| -> Result<Option<String>> {
        Ok(first_diff(&a.convert(&r)?, &b.convert(&r)?))
    };
    let c2 = cmp(&th[2], &phi2.scale_int(p as i64))?;
    let c1 = cmp(&th[1], &phi.scale(cfg.neg(a_p))?)?;
    let c0 = cmp(&th[0], &f)?;
    let mut total = DeltaSeries::zero(&wide);
    for (j, tj) in th.iter().enumerate() {
        total = total.add(&tj.scale(cfg.from_frac(1, (p as i64).pow(j as u32))?)?)?;
    }
    let rhs = phi2.sub(&phi.scale(a_p)?)?.add(&f.scale_int(p as i64))?.scale(cfg.from_frac(1, p as i64)?)?;
    let cs = cmp(&total, &rhs)?;
    Ok(Outcome::all(
        vec![("theta2", c2.is_none()), ("theta1", c1.is_none()), ("theta0", c0.is_none()), ("sum", cs.is_none())],
        format!("θ_j(f♯) against p φ²f, −a_p φf, f and (1/p)(φ² − a_p φ + p)f; weight ≤ {w}, mod {p}^{m}"),
    )
    .window(json!({ "weight_cap": w, "precision": m }))
    .detail(json!({ "case": case.name(), "terms": fs.len(), "mismatch": [c0, c1, c2, cs] })))
}

// ---- hecke

fn hecke_f_sharp_eigenvector(ctx: &Ctx) -> Result<Outcome> {
    let p = ctx.cfg.p();
    let m = ctx.cfg.prec();
    let n_cmp = 200usize;
    let table = ctx.profile.table(5000.max(1000 * p as usize))?;
    let identity = check_p_identity(&table, p, 1000) == Ok(1000);

    let d = n_cmp * p as usize;
    let r = single(p, 2, m, denominators_for(p, d) + 1, TruncationPolicy::weight(d as i64))?;
    let case = ctx.profile.case(ctx.cfg.case.as_deref(), &table, &r.cfg)?;
    let a_p = match case {
        FSharpCase::NonCm { a_p } | FSharpCase::CmSplit { a_p, .. } => a_p,
        FSharpCase::CmInert => r.cfg.zero(),
    };
    let f0 = log_series(&table, &r, d)?;
    let phi = eigen_check_phi_route(&f0, &case.phi_poly(&r.cfg), a_p)?;

    let w = ctx.cfg.weight_cap.unwrap_or(30);
    let dc = ctx.cfg.delta_cap.unwrap_or(2);
    let rg = single(p, 2, m, denominators_for(p, w as usize) + 1, TruncationPolicy::weight(w))?;
    // a_p lives in a config with a different E, so the case is rebuilt there
    let case_g = ctx.profile.case(ctx.cfg.case.as_deref(), &table, &rg.cfg)?;
    let a_p_g = match case_g {
        FSharpCase::NonCm { a_p } | FSharpCase::CmSplit { a_p, .. } => a_p,
        FSharpCase::CmInert => rg.cfg.zero(),
    };
    let fs = f_sharp(&table, case_g, &rg, w as usize)?;
    let general = eigen_check(&fs, a_p_g, 0, &TpMode::General(DecomposeOptions::default()), Some(dc))?;
    Ok(Outcome::all(
        vec![
            ("p-identity", identity),
            ("order0-route", phi.pass),
            ("general-route", general.pass),
            ("same-verdict", phi.pass == general.pass),
        ],
        format!(
            "T(p)∞ f♯ = a_p f♯: order-0 route to q^{}, general solver at weight ≤ {w}, δ-degree ≤ {dc}",
            phi.window.weight_cap.unwrap_or(0)
        ),
    )
    .window(phi.window)
    .detail(json!({ "order0": phi, "general": general })))
}

fn hecke_psi_symmetrization(ctx: &Ctx) -> Result<Outcome> {
    let pairs = match (ctx.cfg.p, ctx.cfg.prec) {
        (Some(p), m) => vec![(p, m.unwrap_or(3))],
        (None, _) => vec![(5, 3), (3, 5)],
    };
    let mut parts = Vec::new();
    let mut reports = Vec::new();
    for (p, m) in pairs {
        let rep = psi_sym_identity(p, m, false)?;
        let fault = psi_sym_identity(p, m, true)?;
        parts.push((rep.pass, !fault.pass));
        reports.push(rep);
    }
    let ok = parts.iter().all(|(a, b)| *a && *b);
    let names: Vec<String> = reports.iter().map(|r| format!("(p = {}, M = {})", r.p, r.prec)).collect();
    Ok(Outcome::new(ok, format!("Σ_j Ψ(q_j, q_j′) = Ψ(S_p, δS_p) at {}; injected fault caught", names.join(", ")))
        .detail(json!({ "reports": reports, "budget_ms": 120000 })))
}

fn hecke_crystalline(ctx: &Ctx) -> Result<Outcome> {
    let p = ctx.cfg.p();
    let m = ctx.cfg.prec.unwrap_or(4);
    let floor = ctx.cfg.laurent_floor.unwrap_or(8 * p as u32 * p as u32);
    let r = single(p, 2, m, 0, TruncationPolicy::unbounded().with_floor(floor))?;
    let lambda = r.cfg.from_i64((p * (p + 1)) as i64);
    let mut parts = Vec::new();
    let mut reports = Vec::new();
    for k in 1..=2 {
        let f = f_crys(k, &r)?;
        let rep = eigen_check(&f, lambda, 2, &TpMode::Candidate, None)?;
        let wrong = eigen_check(&f, r.cfg.from_i64(p as i64), 2, &TpMode::Candidate, None)?;
        parts.push((rep.pass && rep.decomposition.as_ref().is_some_and(|d| d.status == Status::Exact), !wrong.pass));
        reports.push(rep);
    }
    let ok = parts.iter().all(|(a, b)| *a && *b);
    Ok(Outcome::new(ok, format!("T(p)∞,2 f_crys(r) = {} f_crys(r) for r = 1, 2; wrong λ refused", p * (p + 1)))
        .window(reports[0].window)
        .detail(json!({ "reports": reports })))
}

/// c₀ h(q) + c₁ φ(h(q)) for a random integer polynomial h without constant
/// term; Σ_m of it is δ-symmetric.
fn additive_input(r: &Arc<SeriesRing>, rng: &mut ChaCha8Rng) -> Result<DeltaSeries> {
    let cfg = &r.cfg;
    let terms: Vec<(Mono, PadicFixed)> = (0..rng.gen_range(1..=3))
        .map(|_| (Mono::from_slice(&[rng.gen_range(1..=6), 0]), cfg.from_i64(rng.gen_range(-4..=4))))
        .collect();
    let h = DeltaSeries::from_terms(r, terms)?;
    let (c0, c1) = (rng.gen_range(-3..=3), rng.gen_range(-3..=3));
    Ok(h.scale_int(c0).add(&h.frobenius()?.scale_int(c1))?)
}

fn arbitrary_input(r: &Arc<SeriesRing>, rng: &mut ChaCha8Rng) -> Result<DeltaSeries> {
    let cfg = &r.cfg;
    let p = cfg.p() as i32;
    let w = r.policy.weight_cap.unwrap_or(20) as i32;
    let order = r.vars.order();
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        let b = if order == 0 { 0 } else { rng.gen_range(0..=w / p) };
        let a = rng.gen_range(0..=(w - p * b));
        if a + b == 0 {
            continue;
        }
        let mut m = r.zero_mono();
        m[0] = a;
        if order > 0 {
            m[1] = b;
        }
        terms.push((m, cfg.from_i64(rng.gen_range(-4..=4))));
    }
    Ok(DeltaSeries::from_terms(r, terms)?)
}

fn hecke_decomposition_round_trip(ctx: &Ctx) -> Result<Outcome> {
    let p = ctx.cfg.p.unwrap_or(3);
    let m = ctx.cfg.prec.unwrap_or(4);
    let cases = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 10);
    let (mut exact, mut round_trip, mut invariant) = (0, 0, 0);
    for _ in 0..cases {
        let w = rng.gen_range(6..=ctx.cfg.weight_cap.unwrap_or(20).max(6));
        let r = single(p, 1, m, 0, TruncationPolicy::weight(w))?;
        let big = sigma_m(&additive_input(&r, &mut rng)?, p as usize)?;
        let res = decompose(&big, &DecomposeOptions::default())?;
        exact += (res.status == Status::Exact) as usize;
        let back = substitute_images(&res.g, &res.sym, big.ring())?;
        round_trip += (round_trip_mismatch(&big, &res)?.is_none() && back == big) as usize;
        let seeded = decompose(&big, &DecomposeOptions { seed: Some(rng.gen()), ..Default::default() })?;
        invariant += (seeded.status == res.status && seeded.g == res.g) as usize;
    }
    // arbitrary F: Σ_m F need not be δ-symmetric, but the verdict may not
    // depend on the elimination order
    let mut verdicts = 0;
    let mut inconsistent = 0;
    for _ in 0..cases {
        let order = rng.gen_range(0..=1);
        let w = rng.gen_range(4..=20);
        let r = single(p, order, m, 0, TruncationPolicy::weight(w))?;
        let big = sigma_m(&arbitrary_input(&r, &mut rng)?, p as usize)?;
        let res = decompose(&big, &DecomposeOptions::default())?;
        let seeded = decompose(&big, &DecomposeOptions { seed: Some(rng.gen()), ..Default::default() })?;
        let same = seeded.status == res.status
            && (res.status == Status::Inconsistent
                || (seeded.g == res.g && round_trip_mismatch(&big, &res)?.is_none()));
        verdicts += same as usize;
        inconsistent += (res.status == Status::Inconsistent) as usize;
    }
    Ok(Outcome::all(
        vec![
            ("exact", exact == cases),
            ("round-trip", round_trip == cases),
            ("seeded-order", invariant == cases),
            ("verdict-invariance", verdicts == cases),
        ],
        format!("{cases} δ-symmetric inputs Σ_{p} F (p = {p}, order 1, weight ≤ 20) plus {cases} arbitrary F"),
    )
    .detail(json!({
        "exact": exact, "round_trip": round_trip, "seeded_order": invariant,
        "arbitrary_same_verdict": verdicts, "arbitrary_inconsistent": inconsistent,
    })))
}

// ---- char

fn curve_for(ctx: &Ctx) -> Result<CurveProfile> {
    CurveProfile::builtin(&ctx.profile.name())
        .ok_or_else(|| CliError::Config(format!("no curve attached to profile {}", ctx.profile.name())))
}

fn char_cfg(ctx: &Ctx, m: u32, e: u32) -> Result<PadicConfig> {
    Ok(PadicConfig::for_order(ctx.cfg.p(), ctx.cfg.prec.unwrap_or(m), ctx.cfg.denom_exp.unwrap_or(e), 2)?)
}

fn char_case(ctx: &Ctx, cfg: &PadicConfig) -> Result<FSharpCase> {
    let t = ctx.profile.table(100)?;
    ctx.profile.case(ctx.cfg.case.as_deref(), &t, cfg)
}

fn char_axioms(ctx: &Ctx) -> Result<Outcome> {
    let curve = curve_for(ctx)?;
    let cfg = char_cfg(ctx, 6, 2)?;
    let law = formal_group_law(&curve.curve(&cfg)?, 12)?;
    let failure = axiom_failure(&law)?;
    Ok(Outcome::new(failure.is_none(), format!("{}: identity, commutativity, associativity to degree 12", curve.name))
        .detail(json!({ "failure": failure, "terms": law.len() })))
}

fn char_log_additivity(ctx: &Ctx) -> Result<Outcome> {
    let curve = curve_for(ctx)?;
    let cfg = char_cfg(ctx, 6, 2)?;
    let law = formal_group_law(&curve.curve(&cfg)?, 12)?;
    let log = formal_logarithm(&law)?;
    let mism = log_additivity_mismatch(&law, &log)?;
    Ok(Outcome::new(mism.is_none(), format!("{}: L(F(T1, T2)) = L(T1) + L(T2) to degree 12", curve.name))
        .detail(json!({ "first_mismatch": mism.map(|m| format!("{m:?}")) })))
}

fn character(
    ctx: &Ctx,
    d: i64,
) -> Result<(FormalGroupData, std::result::Result<delta_char::DeltaCharacter, CharError>)> {
    let curve = curve_for(ctx)?;
    let cfg = char_cfg(ctx, 3, 2)?;
    let case = char_case(ctx, &cfg)?;
    let fg = FormalGroupData::from_curve(&curve.curve(&cfg)?, d, case)?;
    let psi = delta_character(&fg);
    Ok((fg, psi))
}

fn char_integrality(ctx: &Ctx) -> Result<Outcome> {
    let d = ctx.cfg.weight_cap.unwrap_or(12);
    let (fg, psi) = character(ctx, d)?;
    Ok(match psi {
        Ok(psi) => {
            let rep = check_integrality(&psi.series);
            Outcome::new(rep.pass, format!("ψ ({}, order {}) integral to degree {d}", psi.case, psi.order()))
                .detail(json!(rep))
        }
        Err(CharError::IntegralityFailure { mono, valuation }) => {
            Outcome::new(false, format!("{}: valuation {valuation} at {mono}", fg.case.name()))
        }
        Err(e) => return Err(e.into()),
    })
}

fn char_additivity(ctx: &Ctx) -> Result<Outcome> {
    let d = ctx.cfg.weight_cap.unwrap_or(10);
    let (fg, psi) = character(ctx, d)?;
    let psi = match psi {
        Ok(psi) => psi,
        Err(e) => return Ok(Outcome::new(false, format!("no character: {e}"))),
    };
    let rep = check_additivity(&psi.series, &fg.law, d)?;
    let m = psi.series.ring().cfg.prec();
    Ok(Outcome::new(rep.pass, format!("ψ(F, δF, δ²F) = ψ(T1, …) + ψ(T2, …) to degree {d}, mod p^{m}"))
        .window(json!({ "degree": d, "precision": m }))
        .detail(json!(rep)))
}

fn char_negative_control(ctx: &Ctx) -> Result<Outcome> {
    let p = ctx.cfg.p();
    let cfg = char_cfg(ctx, 3, 2)?;
    let d = (p * p) as i64;
    let fg = FormalGroupData::new(additive_law(&cfg, d)?, FSharpCase::NonCm { a_p: cfg.zero() })?;
    Ok(match delta_character(&fg) {
        Err(CharError::IntegralityFailure { mono, valuation }) => Outcome::new(
            true,
            format!("additive law, a_p = 0: IntegralityFailure at {mono} (valuation {valuation}) as expected"),
        ),
        Err(e) => return Err(e.into()),
        Ok(_) => Outcome::new(false, format!("additive law, a_p = 0: ψ came out integral to degree {d}")),
    })
}

fn char_trace(ctx: &Ctx) -> Result<Outcome> {
    let curve = curve_for(ctx)?;
    let p = ctx.cfg.p();
    let t = ctx.profile.table(p as usize)?;
    let trace = trace_of_frobenius(curve.a, curve.b, p);
    let a_p = t.get_i64(p as usize);
    Ok(Outcome::new(trace == a_p, format!("{}: p + 1 − #E(F_{p}) = {trace}, table a_{p} = {a_p}", curve.name)))
}
