//! Families, symmetrization and the images δ^i S_j of the symmetric variables.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};

use smallvec::SmallVec;

use delta_series::{DeltaSeries, Mono, SeriesRing, TruncationPolicy, VarSpec};
use padic_core::{PadicConfig, PadicFixed};

use crate::{HeckeError, Result};

/// Ring of `m` families q1..qm at the given order.
pub fn family_ring(m: usize, order: usize, policy: TruncationPolicy, cfg: PadicConfig) -> Result<Arc<SeriesRing>> {
    let names: Vec<String> = (1..=m).map(|k| format!("q{k}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let p = cfg.p();
    Ok(SeriesRing::new(VarSpec::new(&refs, order, p)?, policy, cfg))
}

/// Σ_{j=1}^m F(q_j, q_j′, …, q_j^(r)).
pub fn sigma_m(f: &DeltaSeries, m: usize) -> Result<DeltaSeries> {
    let src = f.ring();
    if src.vars.num_families() != 1 {
        return Err(HeckeError::InvalidArgument("sigma_m takes a single-family series".into()));
    }
    if m < 2 {
        return Err(HeckeError::InvalidArgument(format!("sigma_m needs m >= 2, got {m}")));
    }
    let order = src.vars.order();
    let target = family_ring(m, order, src.policy, src.cfg.clone())?;
    let mut total = DeltaSeries::zero(&target);
    for j in 0..m {
        let map: Vec<usize> = (0..=order).map(|i| target.vars.var(j, i)).collect();
        total = total.add(&f.map_vars(&target, &map)?)?;
    }
    Ok(total)
}

/// The ring of symmetric variables s_j^(i), j = 1..m, with weight p^i·j.
#[derive(Debug, Clone)]
pub struct SymVarRing {
    pub ring: Arc<SeriesRing>,
    /// Whether s_m^(0) may carry negative exponents.
    pub laurent: bool,
}

impl SymVarRing {
    pub fn new(m: usize, order: usize, policy: TruncationPolicy, cfg: PadicConfig, laurent: bool) -> Result<Self> {
        let names: Vec<String> = (1..=m).map(|j| format!("s{j}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let weights: Vec<i64> = (1..=m as i64).collect();
        let p = cfg.p();
        let vars = VarSpec::with_family_weights(&refs, order, p, &weights)?;
        Ok(SymVarRing { ring: SeriesRing::new(vars, policy, cfg), laurent })
    }

    /// Matches a family ring: same order, policy and scalars.
    pub fn for_family_ring(fam: &SeriesRing, laurent: bool) -> Result<Self> {
        Self::new(fam.vars.num_families(), fam.vars.order(), fam.policy, fam.cfg.clone(), laurent)
    }

    pub fn m(&self) -> usize {
        self.ring.vars.num_families()
    }

    /// Index of s_j^(i), j counted from 1.
    pub fn var(&self, j: usize, i: usize) -> usize {
        self.ring.vars.var(j - 1, i)
    }

    /// The weight of the images matches the weight of the variables.
    pub fn weight(&self, m: &[i32]) -> i64 {
        self.ring.vars.weight(m)
    }

    /// Checks a series only uses a negative exponent on s_m^(0), and only in
    /// the Laurent case.
    pub fn check(&self, g: &DeltaSeries) -> Result<()> {
        let top = self.var(self.m(), 0);
        for m in g.terms().keys() {
            for (v, &e) in m.iter().enumerate() {
                if e < 0 && !(self.laurent && v == top) {
                    return Err(HeckeError::InvalidArgument(format!(
                        "negative exponent outside s{}: {}",
                        self.m(),
                        g.format_mono(m)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Sorts the per-family exponent columns in decreasing order, giving one
/// representative per orbit of the family permutations.
pub fn canonical(m: &[i32], nf: usize) -> Mono {
    let levels = m.len() / nf;
    let col = |f: usize| (0..levels).map(move |l| m[l * nf + f]);
    let mut idx: SmallVec<[usize; 8]> = (0..nf).collect();
    idx.sort_unstable_by(|&a, &b| col(b).cmp(col(a)));
    let mut out: Mono = Mono::from_elem(0, m.len());
    for l in 0..levels {
        for (f, &g) in idx.iter().enumerate() {
            out[l * nf + f] = m[l * nf + g];
        }
    }
    out
}

pub fn is_canonical(m: &[i32], nf: usize) -> bool {
    let levels = m.len() / nf;
    (1..nf).all(|f| {
        let a = (0..levels).map(|l| m[l * nf + f - 1]);
        let b = (0..levels).map(|l| m[l * nf + f]);
        a.ge(b)
    })
}

/// A monomial where no family is invariant under the generators
/// (1 2) and (1 2 … m) of the symmetric group, if any.
pub fn symmetry_defect(s: &DeltaSeries) -> Option<Mono> {
    let ring = s.ring();
    let nf = ring.vars.num_families();
    let cfg = &ring.cfg;
    let permute = |m: &Mono, sigma: &dyn Fn(usize) -> usize| -> Mono {
        let mut out = m.clone();
        for v in 0..m.len() {
            let (l, f) = (ring.vars.level_of(v), ring.vars.family_of(v));
            out[l * nf + sigma(f)] = m[v];
        }
        out
    };
    let swap = |f: usize| match f {
        0 => 1,
        1 => 0,
        f => f,
    };
    let cycle = |f: usize| (f + 1) % nf;
    for (m, c) in s.terms() {
        for g in [&swap as &dyn Fn(usize) -> usize, &cycle] {
            let t = permute(m, g);
            if !cfg.eq(s.coeff(&t), *c) {
                return Some(m.clone());
            }
        }
    }
    None
}

/// A symmetric series stored by orbit representatives.
pub type SymPoly = HashMap<Mono, PadicFixed>;

pub fn to_sym(s: &DeltaSeries) -> SymPoly {
    let nf = s.ring().vars.num_families();
    s.terms().iter().filter(|(m, _)| is_canonical(m, nf)).map(|(m, c)| (m.clone(), *c)).collect()
}

/// All distinct family permutations of a monomial.
fn orbit(m: &[i32], nf: usize) -> Vec<Mono> {
    let levels = m.len() / nf;
    let mut cols: Vec<Mono> = (0..nf).map(|f| (0..levels).map(|l| m[l * nf + f]).collect()).collect();
    cols.sort_unstable();
    let mut out = Vec::new();
    loop {
        let mut t: Mono = Mono::from_elem(0, m.len());
        for (f, c) in cols.iter().enumerate() {
            for (l, &e) in c.iter().enumerate() {
                t[l * nf + f] = e;
            }
        }
        out.push(t);
        // next permutation of the multiset of columns
        let Some(k) = (0..nf.saturating_sub(1)).rev().find(|&k| cols[k] < cols[k + 1]) else {
            break;
        };
        let l = (k + 1..nf).rev().find(|&l| cols[k] < cols[l]).unwrap();
        cols.swap(k, l);
        cols[k + 1..].reverse();
    }
    out
}

/// Product of a symmetric `a` (by representatives) and a symmetric `b`
/// (fully expanded); exact, no truncation.
pub fn mul_sym(cfg: &PadicConfig, nf: usize, a: &SymPoly, b: &DeltaSeries) -> Result<SymPoly> {
    let mut targets: HashSet<Mono> = HashSet::new();
    for y in a.keys() {
        for z in b.terms().keys() {
            let x: Mono = y.iter().zip(z.iter()).map(|(u, v)| u + v).collect();
            targets.insert(canonical(&x, nf));
        }
    }
    let a_size: usize = a.keys().map(|y| orbit(y, nf).len()).sum();
    let mut out = SymPoly::with_capacity(targets.len());
    if 4 * a_size < b.len() {
        let a_full: Vec<(Mono, PadicFixed)> =
            a.iter().flat_map(|(y, c)| orbit(y, nf).into_iter().map(move |t| (t, *c))).collect();
        for x in targets {
            let mut acc = cfg.zero();
            for (y, ay) in &a_full {
                let z: Mono = x.iter().zip(y.iter()).map(|(u, v)| u - v).collect();
                let bz = b.coeff(&z);
                if !cfg.is_zero(bz) {
                    acc = cfg.add(acc, cfg.mul(*ay, bz)?);
                }
            }
            if !cfg.is_zero(acc) {
                out.insert(x, acc);
            }
        }
        return Ok(out);
    }
    // every exponent of a, in any orbit member, is at least lo
    let lo = a.keys().flat_map(|y| y.iter().copied()).min().unwrap_or(0);
    for x in targets {
        let mut acc = cfg.zero();
        for (z, bz) in b.terms() {
            if x.iter().zip(z.iter()).any(|(u, v)| u - v < lo) {
                continue;
            }
            let y: Mono = x.iter().zip(z.iter()).map(|(u, v)| u - v).collect();
            if let Some(ay) = a.get(&canonical(&y, nf)) {
                acc = cfg.add(acc, cfg.mul(*ay, *bz)?);
            }
        }
        if !cfg.is_zero(acc) {
            out.insert(x, acc);
        }
    }
    Ok(out)
}

/// Elementary symmetric S_j of the level-0 variables and their iterated
/// p-derivations δ^i S_j, computed on demand and cached.
#[derive(Debug)]
pub struct SymImages {
    ring: Arc<SeriesRing>,
    cache: Mutex<HashMap<(usize, usize), DeltaSeries>>,
}

impl SymImages {
    pub fn new(ring: &Arc<SeriesRing>) -> Self {
        SymImages { ring: ring.clone(), cache: Mutex::new(HashMap::new()) }
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }

    /// δ^i S_j.
    pub fn get(&self, j: usize, i: usize) -> Result<DeltaSeries> {
        let m = self.ring.vars.num_families();
        if j == 0 || j > m || i > self.ring.vars.order() {
            return Err(HeckeError::InvalidArgument(format!("no image for s{j}^({i})")));
        }
        if let Some(s) = self.cache.lock().unwrap().get(&(j, i)) {
            return Ok(s.clone());
        }
        let s = if i == 0 { self.elementary(j)? } else { self.get(j, i - 1)?.delta()? };
        self.cache.lock().unwrap().insert((j, i), s.clone());
        Ok(s)
    }

    fn elementary(&self, j: usize) -> Result<DeltaSeries> {
        let ring = &self.ring;
        let m = ring.vars.num_families();
        let cfg = &ring.cfg;
        // e_j as a sum over j-subsets
        let mut terms = Vec::new();
        let mut subset: Vec<usize> = (0..j).collect();
        loop {
            let mut mono = ring.zero_mono();
            for &f in &subset {
                mono[ring.vars.var(f, 0)] = 1;
            }
            terms.push((mono, cfg.one()));
            let mut k = j;
            while k > 0 && subset[k - 1] == m - j + k - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            subset[k - 1] += 1;
            for l in k..j {
                subset[l] = subset[l - 1] + 1;
            }
        }
        Ok(DeltaSeries::from_terms(ring, terms)?)
    }

    /// The image of one variable of a [`SymVarRing`].
    pub fn of_var(&self, sym: &SymVarRing, v: usize) -> Result<DeltaSeries> {
        let vars = &sym.ring.vars;
        self.get(vars.family_of(v) + 1, vars.level_of(v))
    }
}
