//! T(p)∞ and T(p)∞,m, eigenvector checks and the closed-form symmetrization of Ψ.

use std::sync::Arc;

use delta_series::{DeltaSeries, Mono, SeriesRing, SubstitutionMap, TruncationPolicy};
use expansions::psi_series;
use padic_core::{PadicConfig, PadicFixed};
use serde::Serialize;

use crate::solve::{
    decompose, decompose_with_candidate, substitute_images, DecomposeOptions, DecompositionReport, Status,
};
use crate::sym::{family_ring, sigma_m, SymVarRing};
use crate::{HeckeError, Result, Window};

#[derive(Debug, Clone)]
pub enum TpMode {
    /// Decompose Σ_p F with the linear solver.
    General(DecomposeOptions),
    /// Take G_(p) = F(s_p, s_p′, …) and verify it by substitution.
    Candidate,
    /// Σ c_n q^(np) + p^(m+1) Σ c_(np) qⁿ, for F of order 0.
    Order0,
}

impl TpMode {
    pub fn name(&self) -> &'static str {
        match self {
            TpMode::General(_) => "general",
            TpMode::Candidate => "candidate",
            TpMode::Order0 => "order0",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TpResult {
    pub series: DeltaSeries,
    /// Where the output is complete.
    pub window: Window,
    pub decomposition: Option<DecompositionReport>,
}

fn single_family(f: &DeltaSeries) -> Result<()> {
    if f.ring().vars.num_families() != 1 {
        return Err(HeckeError::InvalidArgument("T(p) acts on single-family series".into()));
    }
    Ok(())
}

fn out_ring(ring: &SeriesRing) -> Arc<SeriesRing> {
    let p = ring.cfg.p() as u32;
    ring.with_policy(TruncationPolicy { laurent_floor: ring.policy.laurent_floor * p, ..ring.policy })
}

fn out_window(ring: &SeriesRing, out: &SeriesRing, loss: u32) -> Window {
    let p = ring.cfg.p() as i64;
    Window {
        weight_cap: ring.policy.weight_cap.map(|w| w.div_euclid(p)),
        laurent_floor: out.policy.laurent_floor,
        delta_cap: None,
        precision: ring.cfg.prec().saturating_sub(loss),
    }
}

/// F(q^p, δ(q^p), …, δ^r(q^p)).
fn pullback(f: &DeltaSeries, target: &Arc<SeriesRing>) -> Result<DeltaSeries> {
    let order = f.ring().vars.order();
    let p = target.cfg.p() as i32;
    let mut imgs = vec![DeltaSeries::monomial(target, &q_mono(target, 0, p), target.cfg.one())?];
    for i in 1..=order {
        imgs.push(imgs[i - 1].delta()?);
    }
    Ok(f.substitute(&SubstitutionMap::new(target, imgs)?)?)
}

fn q_mono(ring: &SeriesRing, level: usize, e: i32) -> Mono {
    let mut m = ring.zero_mono();
    m[ring.vars.var(0, level)] = e;
    m
}

/// G_(p)(0, …, 0, q, …, 0, …, 0, q^(r)): keeps the monomials purely in the
/// s_p^(i) and renames s_p^(i) to q^(i).
fn evaluate_top(g: &DeltaSeries, sym: &SymVarRing, target: &Arc<SeriesRing>, twist: u32) -> Result<DeltaSeries> {
    let m = sym.m();
    let order = sym.ring.vars.order();
    let cfg = &target.cfg;
    let mut terms = Vec::new();
    'terms: for (mono, c) in g.terms() {
        let mut t = target.zero_mono();
        for v in 0..mono.len() {
            let (j, i) = (sym.ring.vars.family_of(v) + 1, sym.ring.vars.level_of(v));
            if mono[v] == 0 {
                continue;
            }
            if j != m {
                continue 'terms;
            }
            t[target.vars.var(0, i.min(order))] = mono[v];
        }
        terms.push((t, cfg.mul_p_pow(cfg.convert_from(&g.ring().cfg, *c)?, twist)));
    }
    Ok(DeltaSeries::from_terms(target, terms)?)
}

/// F with q^(i) renamed to s_p^(i); the decomposition of Σ_p F whenever F
/// is built from Ψ and its Frobenius twists.
pub fn top_candidate(f: &DeltaSeries, sym: &SymVarRing) -> Result<DeltaSeries> {
    single_family(f)?;
    let m = sym.m();
    let map: Vec<usize> = (0..=f.ring().vars.order()).map(|i| sym.var(m, i)).collect();
    Ok(f.map_vars(&sym.ring, &map)?)
}

fn order0(f: &DeltaSeries, twist: u32) -> Result<TpResult> {
    let ring = f.ring();
    let cfg = &ring.cfg;
    let p = cfg.p() as i32;
    if f.terms().keys().any(|m| ring.vars.delta_degree(m) != 0) {
        return Err(HeckeError::InvalidArgument("order-0 mode needs a series in q alone".into()));
    }
    let target = out_ring(ring);
    let mut terms = Vec::new();
    for (m, c) in f.terms() {
        let n = m[0];
        terms.push((q_mono(&target, 0, n * p), *c));
        if n % p == 0 {
            let k = n / p;
            terms.push((q_mono(&target, 0, k), cfg.mul_p_pow(*c, twist + 1)));
        }
    }
    let series = DeltaSeries::from_terms(&target, terms)?;
    Ok(TpResult { window: out_window(ring, &target, 0), series, decomposition: None })
}

/// T(p)∞,m F = F(q^p, …, δ^r(q^p)) + p^m G_(p)(0, …, 0, q, …, q^(r)).
pub fn tp_infty(f: &DeltaSeries, twist: u32, mode: &TpMode) -> Result<TpResult> {
    single_family(f)?;
    if let TpMode::Order0 = mode {
        return order0(f, twist);
    }
    let ring = f.ring();
    let p = ring.cfg.p() as usize;
    let target = out_ring(ring);
    let first = pullback(f, &target)?;
    let big = sigma_m(f, p)?;
    let dec = match mode {
        TpMode::General(opts) => decompose(&big, opts)?,
        _ => {
            let laurent = ring.policy.laurent_floor > 0;
            let policy = TruncationPolicy { delta_deg_cap: None, ..ring.policy };
            let sym = SymVarRing::new(p, ring.vars.order(), policy, ring.cfg.clone(), laurent)?;
            let g = top_candidate(f, &sym)?;
            decompose_with_candidate(&big, sym, g)?
        }
    };
    let report = dec.report(big.ring());
    if dec.status != Status::Exact {
        let residual = report.residual.clone().unwrap_or_else(|| "precision".into());
        return Err(HeckeError::NotDeltaSymmetric { residual });
    }
    let second = evaluate_top(&dec.g, &dec.sym, &target, twist)?;
    Ok(TpResult {
        series: first.add(&second)?,
        window: out_window(ring, &target, dec.precision_loss),
        decomposition: Some(report),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    pub pass: bool,
    pub mode: &'static str,
    pub lambda: String,
    pub twist: u32,
    pub window: Window,
    pub compared_terms: usize,
    pub first_mismatch: Option<String>,
    pub decomposition: Option<DecompositionReport>,
}

impl EigenReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn restrict(s: &DeltaSeries, w: &Window) -> DeltaSeries {
    let vars = &s.ring().vars;
    s.filter(|m| {
        w.weight_cap.is_none_or(|c| vars.weight(m) <= c) && w.delta_cap.is_none_or(|d| vars.delta_degree(m) <= d as i64)
    })
}

/// First monomial where a and b differ at `digits` digits.
fn mismatch(cfg: &PadicConfig, a: &DeltaSeries, b: &DeltaSeries, digits: u32) -> Result<Option<Mono>> {
    let diff = a.sub(b)?;
    Ok(diff.terms().iter().find(|(_, c)| cfg.valuation(**c).is_some_and(|v| v < digits as i64)).map(|(m, _)| m.clone()))
}

/// Compares T(p)∞,m F with λ·F on the window where both are complete,
/// optionally narrowed to derivative degree ≤ `delta_cap`.
pub fn eigen_check(
    f: &DeltaSeries,
    lambda: PadicFixed,
    twist: u32,
    mode: &TpMode,
    delta_cap: Option<u32>,
) -> Result<EigenReport> {
    let t = tp_infty(f, twist, mode)?;
    let target = t.series.ring().clone();
    let mut window = t.window;
    window.delta_cap = delta_cap;
    let lhs = restrict(&t.series, &window);
    let rhs = restrict(&f.convert(&target)?.scale(lambda)?, &window);
    let bad = mismatch(&target.cfg, &lhs, &rhs, window.precision)?;
    Ok(EigenReport {
        pass: bad.is_none(),
        mode: mode.name(),
        lambda: target.cfg.display(lambda),
        twist,
        window,
        compared_terms: lhs.len().max(rhs.len()),
        first_mismatch: bad.map(|m| lhs.format_mono(&m)),
        decomposition: t.decomposition,
    })
}

/// Eigenvector check for F = (1/p)·P(φ)(F₀) with F₀ of order 0: since T(p)∞
/// commutes with φ, T F = (1/p)·P(φ)(T F₀), and T F₀ comes from the order-0
/// formula. `f0` must live in a ring of order ≥ deg P.
pub fn eigen_check_phi_route(f0: &DeltaSeries, poly: &[(u32, PadicFixed)], lambda: PadicFixed) -> Result<EigenReport> {
    let ring = f0.ring();
    let wide = ring.with_extra_digits(1)?;
    let f0w = f0.convert(&wide)?;
    let t = order0(&f0w, 0)?;
    let target = t.series.ring().clone();
    let apply = |s: &DeltaSeries| -> Result<DeltaSeries> {
        let w: Vec<(u32, PadicFixed)> =
            poly.iter().map(|(j, c)| (*j, target.cfg.convert_from(&ring.cfg, *c).unwrap())).collect();
        Ok(s.phi_linear(&w)?.div_exact_p(1)?)
    };
    let lhs_w = apply(&t.series)?;
    let f_sharp = apply(&f0w.convert(&target)?)?;
    let lam = target.cfg.convert_from(&ring.cfg, lambda)?;
    let rhs_w = f_sharp.scale(lam)?;
    let narrow = ring.with_policy(TruncationPolicy { laurent_floor: target.policy.laurent_floor, ..ring.policy });
    let mut window = t.window;
    window.precision = ring.cfg.prec();
    let lhs = restrict(&lhs_w.convert(&narrow)?, &window);
    let rhs = restrict(&rhs_w.convert(&narrow)?, &window);
    let bad = mismatch(&ring.cfg, &lhs, &rhs, window.precision)?;
    Ok(EigenReport {
        pass: bad.is_none(),
        mode: "order0-phi",
        lambda: ring.cfg.display(lambda),
        twist: 0,
        window,
        compared_terms: lhs.len().max(rhs.len()),
        first_mismatch: bad.map(|m| lhs.format_mono(&m)),
        decomposition: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SymIdentityReport {
    pub p: u64,
    pub prec: u32,
    pub pass: bool,
    pub left_terms: usize,
    pub right_terms: usize,
    pub first_mismatch: Option<String>,
}

impl SymIdentityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Σ_j Ψ(q_j, q_j′) against Ψ(S_p, δS_p), both fully expanded. `fault`
/// perturbs one coefficient of the left side.
pub fn psi_sym_identity(p: u64, prec: u32, fault: bool) -> Result<SymIdentityReport> {
    let cfg = PadicConfig::for_order(p, prec, 0, 1)?;
    // Ψ has at most prec + log_p terms, each a power of q′ q^(−p)
    let floor = (p as u32) * (prec + 2 + prec.ilog2() + 1);
    let policy = TruncationPolicy::unbounded().with_floor(floor);
    let single = family_ring(1, 1, policy, cfg.clone())?;
    let psi = psi_series(&single).map_err(|e| HeckeError::InvalidArgument(e.to_string()))?;
    let mut left = sigma_m(&psi, p as usize)?;
    if fault {
        let (m, c) = left.terms().iter().next().map(|(m, c)| (m.clone(), *c)).expect("nonzero");
        let bumped = DeltaSeries::monomial(left.ring(), &m, cfg.add(c, cfg.one()))?;
        left = left.sub(&DeltaSeries::monomial(left.ring(), &m, c)?)?.add(&bumped)?;
    }
    let sym = SymVarRing::new(p as usize, 1, policy, cfg.clone(), true)?;
    let g = top_candidate(&psi, &sym)?;
    let right = substitute_images(&g, &sym, left.ring())?;
    let bad = left.first_difference(&right);
    Ok(SymIdentityReport {
        p,
        prec,
        pass: bad.is_none(),
        left_terms: left.len(),
        right_terms: right.len(),
        first_mismatch: bad.map(|m| left.format_mono(&m)),
    })
}
