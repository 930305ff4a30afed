//! Decomposition of permutation-symmetric series into the images δ^i S_j.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use delta_series::{DeltaSeries, Mono, SeriesRing, SubstitutionMap, TruncationPolicy};
use padic_core::{PadicConfig, PadicFixed};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::sym::{canonical, family_ring, mul_sym, symmetry_defect, to_sym, SymImages, SymPoly, SymVarRing};
use crate::{HeckeError, Result, Window};

#[derive(Debug, Clone, Copy)]
pub struct DecomposeOptions {
    /// Cap on the derivative degree of candidate monomials in the s-variables.
    pub delta_cap: Option<u32>,
    /// Floor on the exponent of s_m; `None` for the power-series case.
    pub laurent_floor: Option<u32>,
    /// Largest number of candidate monomials in one weight slice.
    pub max_candidates: usize,
    /// Shuffles the elimination order.
    pub seed: Option<u64>,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions { delta_cap: None, laurent_floor: None, max_candidates: 5000, seed: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Exact,
    Inconsistent,
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceSummary {
    pub weight: i64,
    pub candidates: usize,
    pub rows: usize,
    pub rank: usize,
    pub loss: u32,
}

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub g: DeltaSeries,
    pub sym: SymVarRing,
    pub status: Status,
    pub precision_loss: u32,
    /// First failing family-ring monomial when inconsistent.
    pub residual: Option<Mono>,
    pub slices: Vec<SliceSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub status: Status,
    pub precision_loss: u32,
    pub residual: Option<String>,
    pub window: Window,
    pub terms: usize,
    pub slices: Vec<SliceSummary>,
}

impl DecompositionResult {
    pub fn report(&self, input_ring: &SeriesRing) -> DecompositionReport {
        let residual = self.residual.as_ref().map(|m| DeltaSeries::zero(&Arc::new(input_ring.clone())).format_mono(m));
        DecompositionReport {
            status: self.status,
            precision_loss: self.precision_loss,
            residual,
            window: Window::of(input_ring, self.precision_loss),
            terms: self.g.len(),
            slices: self.slices.clone(),
        }
    }
}

fn check_input(g: &DeltaSeries) -> Result<()> {
    let ring = g.ring();
    if ring.vars.num_families() < 2 {
        return Err(HeckeError::InvalidArgument("decompose needs at least two families".into()));
    }
    if ring.policy.delta_deg_cap.is_some() {
        return Err(HeckeError::InvalidArgument(
            "decompose needs a family ring without a derivative-degree cap".into(),
        ));
    }
    if let Some(m) = symmetry_defect(g) {
        return Err(HeckeError::NotPermutationSymmetric { mono: g.format_mono(&m) });
    }
    Ok(())
}

/// Images are computed without floor or derivative cap, and with enough
/// weight headroom for the positive part of Laurent candidates.
fn image_ring(ring: &SeriesRing, laurent_floor: u32) -> Result<Arc<SeriesRing>> {
    let m = ring.vars.num_families();
    let cap = ring.policy.weight_cap.map(|c| c + (m as i64) * laurent_floor as i64);
    let policy = TruncationPolicy { weight_cap: cap, laurent_floor: 0, delta_deg_cap: None };
    family_ring(m, ring.vars.order(), policy, ring.cfg.clone())
}

/// Monomials in the s-variables of exact weight `w`.
fn candidates(sym: &SymVarRing, w: i64, opts: &DecomposeOptions) -> Vec<Mono> {
    let vars = &sym.ring.vars;
    let nv = vars.num_vars();
    let top = sym.var(sym.m(), 0);
    let wt = vars.weights();
    let floor = if sym.laurent { opts.laurent_floor.unwrap_or(0) as i32 } else { 0 };
    let mut out = Vec::new();
    let mut cur: Mono = Mono::from_elem(0, nv);
    fn rec(
        v: usize,
        rest: i64,
        dd: u32,
        cur: &mut Mono,
        out: &mut Vec<Mono>,
        wt: &[i64],
        skip: usize,
        nf: usize,
        cap: Option<u32>,
    ) {
        if v == wt.len() {
            if rest == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if v == skip {
            return rec(v + 1, rest, dd, cur, out, wt, skip, nf, cap);
        }
        let deriv = v >= nf;
        let mut e = 0;
        while e as i64 * wt[v] <= rest {
            if deriv && cap.is_some_and(|c| dd + e > c) {
                break;
            }
            cur[v] = e as i32;
            rec(v + 1, rest - e as i64 * wt[v], if deriv { dd + e } else { dd }, cur, out, wt, skip, nf, cap);
            e += 1;
        }
        cur[v] = 0;
    }
    let wtop = wt[top];
    let mut a = -floor;
    while (a as i64) * wtop <= w {
        cur[top] = a;
        rec(0, w - a as i64 * wtop, 0, &mut cur, &mut out, wt, top, vars.num_families(), opts.delta_cap);
        a += 1;
    }
    out.sort();
    out
}

/// Memoized images of nonnegative s-monomials, by representatives.
struct ImageCache<'a> {
    sym: &'a SymVarRing,
    images: &'a SymImages,
    gens: Vec<DeltaSeries>,
    memo: HashMap<Mono, Arc<SymPoly>>,
}

impl<'a> ImageCache<'a> {
    fn new(sym: &'a SymVarRing, images: &'a SymImages) -> Self {
        ImageCache { sym, images, gens: Vec::new(), memo: HashMap::new() }
    }

    fn gen(&mut self, v: usize) -> Result<&DeltaSeries> {
        if self.gens.is_empty() {
            let nv = self.sym.ring.vars.num_vars();
            self.gens = (0..nv).map(|u| self.images.of_var(self.sym, u)).collect::<Result<_>>()?;
        }
        Ok(&self.gens[v])
    }

    fn positive(&mut self, nu: &Mono) -> Result<Arc<SymPoly>> {
        if let Some(s) = self.memo.get(nu) {
            return Ok(s.clone());
        }
        let ring = self.images.ring();
        let out = if nu.iter().all(|&e| e == 0) {
            let mut one = SymPoly::new();
            one.insert(ring.zero_mono(), ring.cfg.one());
            Arc::new(one)
        } else {
            // peel off the variable with the smallest image
            self.gen(0)?;
            let v = (0..nu.len()).filter(|&v| nu[v] > 0).min_by_key(|&v| (self.gens[v].len(), v)).unwrap();
            let mut rest = nu.clone();
            rest[v] -= 1;
            let base = self.positive(&rest)?;
            let nf = ring.vars.num_families();
            Arc::new(mul_sym(&ring.cfg, nf, &base, &self.gens[v])?)
        };
        self.memo.insert(nu.clone(), out.clone());
        Ok(out)
    }

    fn image(&mut self, mu: &Mono) -> Result<SymPoly> {
        let top = self.sym.var(self.sym.m(), 0);
        let a = mu[top].min(0);
        let mut nu = mu.clone();
        nu[top] -= a;
        let pos = self.positive(&nu)?;
        if a == 0 {
            return Ok((*pos).clone());
        }
        // s_m^a ↦ (q_1 ⋯ q_m)^a keeps representatives canonical
        let nf = self.images.ring().vars.num_families();
        Ok(pos
            .iter()
            .map(|(m, c)| {
                let mut t = m.clone();
                for e in &mut t[..nf] {
                    *e += a;
                }
                (t, *c)
            })
            .collect())
    }
}

struct Pivot {
    row: u32,
    vec: Vec<(u32, PadicFixed)>,
    /// Source column; vec = cols[col] − Σ f·(earlier pivot vec).
    col: usize,
    reductions: Vec<(usize, PadicFixed)>,
    inv: PadicFixed,
}

struct SliceOutcome {
    x: Vec<(usize, PadicFixed)>,
    rows: usize,
    rank: usize,
    loss: u32,
    residual: Option<Mono>,
}

/// Higher derivative levels sort first.
fn row_key(m: &[i32], nf: usize) -> Mono {
    m.chunks(nf).rev().flatten().map(|&e| -e).collect()
}

/// Dense scratch vector that remembers which slots it touched.
struct Scratch {
    val: Vec<PadicFixed>,
    live: Vec<bool>,
    touched: Vec<u32>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch { val: vec![PadicFixed::default(); n], live: vec![false; n], touched: Vec::new() }
    }

    fn set(&mut self, i: u32, c: PadicFixed) {
        if !self.live[i as usize] {
            self.live[i as usize] = true;
            self.touched.push(i);
        }
        self.val[i as usize] = c;
    }

    fn get(&self, i: u32) -> Option<PadicFixed> {
        self.live[i as usize].then(|| self.val[i as usize])
    }

    fn load(&mut self, v: &[(u32, PadicFixed)]) {
        for &(i, c) in v {
            self.set(i, c);
        }
    }

    /// self −= a·x
    fn axpy(&mut self, cfg: &PadicConfig, a: PadicFixed, x: &[(u32, PadicFixed)]) -> Result<()> {
        for &(i, c) in x {
            let t = cfg.mul(a, c)?;
            let cur = self.get(i).unwrap_or_default();
            self.set(i, cfg.sub(cur, t));
        }
        Ok(())
    }

    /// Nonzero entries sorted by index; leaves the scratch empty.
    fn drain(&mut self, cfg: &PadicConfig) -> Vec<(u32, PadicFixed)> {
        let mut out: Vec<(u32, PadicFixed)> =
            self.touched.iter().map(|&i| (i, self.val[i as usize])).filter(|(_, c)| !cfg.is_zero(*c)).collect();
        for &i in &self.touched {
            self.live[i as usize] = false;
        }
        self.touched.clear();
        out.sort_unstable_by_key(|t| t.0);
        out
    }
}

/// Minimal valuation, then the first row.
fn pivot_of(cfg: &PadicConfig, v: &[(u32, PadicFixed)]) -> Option<(i64, u32)> {
    v.iter().filter_map(|&(i, c)| cfg.valuation(c).map(|val| (val, i))).min()
}

/// Column echelon elimination with minimal-valuation pivots. Without an
/// explicit order, columns are taken by their leading pivot.
fn solve_slice(
    cfg: &PadicConfig,
    nf: usize,
    cols: &[SymPoly],
    rhs: &SymPoly,
    order: Option<&[usize]>,
) -> Result<SliceOutcome> {
    let mut rows: Vec<&Mono> = cols.iter().flat_map(|c| c.keys()).chain(rhs.keys()).collect();
    rows.sort_by_cached_key(|m| row_key(m, nf));
    rows.dedup();
    let id: HashMap<&Mono, u32> = rows.iter().enumerate().map(|(i, m)| (*m, i as u32)).collect();
    let sparse = |c: &SymPoly| -> Vec<(u32, PadicFixed)> {
        let mut v: Vec<(u32, PadicFixed)> = c.iter().map(|(m, x)| (id[m], *x)).collect();
        v.sort_unstable_by_key(|t| t.0);
        v
    };
    let a: Vec<Vec<(u32, PadicFixed)>> = cols.iter().map(sparse).collect();
    let b = sparse(rhs);
    let order: Vec<usize> = match order {
        Some(o) => o.to_vec(),
        None => {
            let mut o: Vec<usize> = (0..a.len()).collect();
            o.sort_by_key(|&j| (pivot_of(cfg, &a[j]).unwrap_or((i64::MAX, u32::MAX)), j));
            o
        }
    };

    let mut col = Scratch::new(rows.len());
    let mut pivots: Vec<Pivot> = Vec::new();
    let mut loss = 0u32;
    for &j in &order {
        col.load(&a[j]);
        let mut reductions = Vec::new();
        for (k, pv) in pivots.iter().enumerate() {
            let Some(x) = col.get(pv.row) else { continue };
            if cfg.is_zero(x) {
                continue;
            }
            let f = cfg.mul(x, pv.inv)?;
            col.axpy(cfg, f, &pv.vec)?;
            reductions.push((k, f));
        }
        let vec = col.drain(cfg);
        let Some((v, row)) = pivot_of(cfg, &vec) else {
            continue;
        };
        loss += v.max(0) as u32;
        let inv = cfg.inv(vec.iter().find(|t| t.0 == row).unwrap().1)?;
        pivots.push(Pivot { row, vec, col: j, reductions, inv });
    }

    // rhs = Σ coef_k·vec_k + remainder, then back-substitute the reductions
    col.load(&b);
    let mut coef = vec![cfg.zero(); pivots.len()];
    for (k, pv) in pivots.iter().enumerate() {
        let Some(y) = col.get(pv.row) else { continue };
        if cfg.is_zero(y) {
            continue;
        }
        coef[k] = cfg.mul(y, pv.inv)?;
        col.axpy(cfg, coef[k], &pv.vec)?;
    }
    col.drain(cfg);
    let mut x = vec![cfg.zero(); a.len()];
    for k in (0..pivots.len()).rev() {
        let c = coef[k];
        if cfg.is_zero(c) {
            continue;
        }
        x[pivots[k].col] = cfg.add(x[pivots[k].col], c);
        for &(i, f) in &pivots[k].reductions {
            coef[i] = cfg.sub(coef[i], cfg.mul(c, f)?);
        }
    }
    let x: Vec<(usize, PadicFixed)> = x.into_iter().enumerate().filter(|(_, c)| !cfg.is_zero(*c)).collect();

    // independent residual: rhs − Σ x_j col_j
    col.load(&b);
    for &(j, xj) in &x {
        col.axpy(cfg, xj, &a[j])?;
    }
    let keep = cfg.prec().saturating_sub(loss) as i64;
    let residual = col
        .drain(cfg)
        .into_iter()
        .filter(|(_, c)| cfg.valuation(*c).is_some_and(|v| v < keep))
        .map(|(i, _)| rows[i as usize].clone())
        .min();
    Ok(SliceOutcome { x, rows: rows.len(), rank: pivots.len(), loss, residual })
}

/// Expresses a permutation-symmetric G as g(S_j, δS_j, …), weight slice by
/// weight slice, within the input ring's truncation and precision.
pub fn decompose(g_in: &DeltaSeries, opts: &DecomposeOptions) -> Result<DecompositionResult> {
    check_input(g_in)?;
    let ring = g_in.ring();
    let cfg = &ring.cfg;
    let laurent = opts.laurent_floor.is_some();
    let sym_policy = TruncationPolicy {
        weight_cap: ring.policy.weight_cap,
        laurent_floor: opts.laurent_floor.unwrap_or(0),
        delta_deg_cap: opts.delta_cap,
    };
    let m = ring.vars.num_families();
    let sym = SymVarRing::new(m, ring.vars.order(), sym_policy, cfg.clone(), laurent)?;
    let img_ring = image_ring(ring, opts.laurent_floor.unwrap_or(0))?;
    let images = SymImages::new(&img_ring);

    let mut by_weight: BTreeMap<i64, SymPoly> = BTreeMap::new();
    for (mono, c) in to_sym(g_in) {
        by_weight.entry(ring.vars.weight(&mono)).or_default().insert(mono, c);
    }

    // images are built serially through one cache, slices solve in parallel
    let mut cache = ImageCache::new(&sym, &images);
    let mut work = Vec::new();
    for (&w, rhs) in &by_weight {
        let cands = candidates(&sym, w, opts);
        if cands.len() > opts.max_candidates {
            return Err(HeckeError::SliceTooLarge { weight: w, count: cands.len(), bound: opts.max_candidates });
        }
        let cols = cands.iter().map(|mu| cache.image(mu)).collect::<Result<Vec<_>>>()?;
        let order = opts.seed.map(|seed| {
            let mut o: Vec<usize> = (0..cands.len()).collect();
            o.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ w as u64));
            o
        });
        work.push((w, cands, cols, rhs, order));
    }
    let solved: Vec<Result<SliceOutcome>> =
        work.par_iter().map(|(_, _, cols, rhs, order)| solve_slice(cfg, m, cols, rhs, order.as_deref())).collect();
    let mut terms = Vec::new();
    let mut slices = Vec::new();
    let mut residual: Option<Mono> = None;
    let mut loss = 0;
    for ((w, cands, _, _, _), out) in work.iter().zip(solved) {
        let out = out?;
        loss = loss.max(out.loss);
        if residual.is_none() {
            residual = out.residual.clone();
        }
        slices.push(SliceSummary {
            weight: *w,
            candidates: cands.len(),
            rows: out.rows,
            rank: out.rank,
            loss: out.loss,
        });
        terms.extend(out.x.into_iter().map(|(j, c)| (cands[j].clone(), c)));
    }
    let status = if residual.is_none() && loss < cfg.prec() { Status::Exact } else { Status::Inconsistent };
    let g = DeltaSeries::from_terms(&sym.ring, terms)?;
    Ok(DecompositionResult { g, sym, status, precision_loss: loss, residual, slices })
}

/// Substitutes s_j^(i) ↦ δ^i S_j into a series over a [`SymVarRing`]; the
/// result lives in `target`, a family ring with matching order and scalars.
pub fn substitute_images(g: &DeltaSeries, sym: &SymVarRing, target: &Arc<SeriesRing>) -> Result<DeltaSeries> {
    sym.check(g)?;
    let used: Vec<bool> = (0..sym.ring.vars.num_vars()).map(|v| g.terms().keys().any(|m| m[v] != 0)).collect();
    // images are computed as wide as the denominators of g require
    let d = g.min_valuation().map_or(0, |(v, _)| (-v).max(0) as u32).min(target.cfg.guard());
    let wide = target.with_extra_digits(d)?;
    let plain = wide.with_policy(TruncationPolicy { laurent_floor: 0, delta_deg_cap: None, ..wide.policy });
    let images = SymImages::new(&plain);
    let zero = DeltaSeries::zero(&wide);
    let imgs = used
        .iter()
        .enumerate()
        .map(|(v, &u)| if u { images.of_var(sym, v)?.convert(&wide).map_err(Into::into) } else { Ok(zero.clone()) })
        .collect::<Result<Vec<_>>>()?;
    Ok(g.substitute(&SubstitutionMap::new(&wide, imgs)?)?.convert(target)?)
}

/// Candidate mode: accepts `g` when its substitution reproduces the input
/// exactly within the input ring.
pub fn decompose_with_candidate(g_in: &DeltaSeries, sym: SymVarRing, g: DeltaSeries) -> Result<DecompositionResult> {
    check_input(g_in)?;
    let back = substitute_images(&g, &sym, g_in.ring())?;
    let residual = back.first_difference(g_in);
    let status = if residual.is_none() { Status::Exact } else { Status::Inconsistent };
    Ok(DecompositionResult { g, sym, status, precision_loss: 0, residual, slices: Vec::new() })
}

/// Substitution round trip for an exact result, compared at the precision
/// left after pivoting.
pub fn round_trip_mismatch(g_in: &DeltaSeries, res: &DecompositionResult) -> Result<Option<Mono>> {
    let back = substitute_images(&res.g, &res.sym, g_in.ring())?;
    let cfg = &g_in.ring().cfg;
    let keep = cfg.prec().saturating_sub(res.precision_loss) as i64;
    let diff = back.sub(g_in)?;
    Ok(diff.terms().iter().find(|(_, c)| cfg.valuation(**c).is_some_and(|v| v < keep)).map(|(m, _)| m.clone()))
}

/// The representative of a family monomial; exposed for reports.
pub fn orbit_representative(ring: &SeriesRing, m: &[i32]) -> Mono {
    canonical(m, ring.vars.num_families())
}
