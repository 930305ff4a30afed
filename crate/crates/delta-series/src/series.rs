use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use padic_core::PadicFixed;

use crate::ring::{same_ring, Admit, Mono, SeriesRing};
use crate::SeriesError;

/// Sparse truncated series; every stored monomial is admitted by the ring's
/// policy and every stored coefficient is nonzero at precision.
#[derive(Debug, Clone)]
pub struct DeltaSeries {
    pub(crate) ring: Arc<SeriesRing>,
    pub(crate) terms: BTreeMap<Mono, PadicFixed>,
}

impl PartialEq for DeltaSeries {
    fn eq(&self, other: &Self) -> bool {
        if !same_ring(&self.ring, &other.ring) || self.terms.len() != other.terms.len() {
            return false;
        }
        let cfg = &self.ring.cfg;
        self.terms.iter().zip(&other.terms).all(|((ma, a), (mb, b))| ma == mb && cfg.eq(*a, *b))
    }
}

/// Accumulates terms with admission checks, then prunes zeros.
pub(crate) struct Acc<'a> {
    ring: &'a SeriesRing,
    map: HashMap<Mono, PadicFixed>,
}

impl<'a> Acc<'a> {
    pub(crate) fn new(ring: &'a SeriesRing) -> Self {
        Acc { ring, map: HashMap::new() }
    }

    pub(crate) fn add(&mut self, m: Mono, c: PadicFixed) -> Result<(), SeriesError> {
        let cfg = &self.ring.cfg;
        if cfg.is_zero(c) {
            return Ok(());
        }
        match self.ring.admit(&m) {
            Admit::Keep => {
                let slot = self.map.entry(m).or_insert_with(|| cfg.zero());
                *slot = cfg.add(*slot, c);
                Ok(())
            }
            Admit::Drop => Ok(()),
            Admit::Floor => Err(SeriesError::floor(self.ring, &m)),
            Admit::NegativeDerivative => {
                Err(SeriesError::InvalidArgument(format!("negative exponent on a derivative variable in {m:?}")))
            }
        }
    }

    pub(crate) fn finish(self, ring: Arc<SeriesRing>) -> DeltaSeries {
        let cfg = &ring.cfg;
        let terms = self.map.into_iter().filter(|(_, c)| !cfg.is_zero(*c)).collect();
        DeltaSeries { ring, terms }
    }
}

impl DeltaSeries {
    pub fn zero(ring: &Arc<SeriesRing>) -> Self {
        DeltaSeries { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &Arc<SeriesRing>, c: PadicFixed) -> Self {
        let mut s = Self::zero(ring);
        if !ring.cfg.is_zero(c) {
            s.terms.insert(ring.zero_mono(), c);
        }
        s
    }

    pub fn one(ring: &Arc<SeriesRing>) -> Self {
        Self::constant(ring, ring.cfg.one())
    }

    /// c * monomial, checked against the policy.
    pub fn monomial(ring: &Arc<SeriesRing>, m: &[i32], c: PadicFixed) -> Result<Self, SeriesError> {
        let mut acc = Acc::new(ring);
        acc.add(Mono::from_slice(m), c)?;
        Ok(acc.finish(ring.clone()))
    }

    /// The variable q_family^(level).
    pub fn var(ring: &Arc<SeriesRing>, family: usize, level: usize) -> Result<Self, SeriesError> {
        let mut m = ring.zero_mono();
        m[ring.vars.var(family, level)] = 1;
        Self::monomial(ring, &m, ring.cfg.one())
    }

    pub fn from_terms<I>(ring: &Arc<SeriesRing>, terms: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (Mono, PadicFixed)>,
    {
        let mut acc = Acc::new(ring);
        for (m, c) in terms {
            if m.len() != ring.vars.num_vars() {
                return Err(SeriesError::InvalidArgument("exponent vector length".into()));
            }
            acc.add(m, c)?;
        }
        Ok(acc.finish(ring.clone()))
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }

    pub fn terms(&self) -> &BTreeMap<Mono, PadicFixed> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &[i32]) -> PadicFixed {
        self.terms.get(m).copied().unwrap_or_default()
    }

    fn check(&self, other: &DeltaSeries) -> Result<(), SeriesError> {
        if same_ring(&self.ring, &other.ring) {
            Ok(())
        } else {
            Err(SeriesError::RingMismatch)
        }
    }

    pub fn add(&self, other: &DeltaSeries) -> Result<Self, SeriesError> {
        self.check(other)?;
        let cfg = &self.ring.cfg;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let slot = terms.entry(m.clone()).or_insert_with(|| cfg.zero());
            *slot = cfg.add(*slot, *c);
        }
        terms.retain(|_, c| !cfg.is_zero(*c));
        Ok(DeltaSeries { ring: self.ring.clone(), terms })
    }

    pub fn neg(&self) -> Self {
        let cfg = &self.ring.cfg;
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), cfg.neg(*c))).collect();
        DeltaSeries { ring: self.ring.clone(), terms }
    }

    pub fn sub(&self, other: &DeltaSeries) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: PadicFixed) -> Result<Self, SeriesError> {
        let cfg = &self.ring.cfg;
        let mut terms = BTreeMap::new();
        for (m, a) in &self.terms {
            let v = cfg.mul(*a, c)?;
            if !cfg.is_zero(v) {
                terms.insert(m.clone(), v);
            }
        }
        Ok(DeltaSeries { ring: self.ring.clone(), terms })
    }

    pub fn scale_int(&self, n: i64) -> Self {
        let cfg = &self.ring.cfg;
        let terms =
            self.terms.iter().map(|(m, a)| (m.clone(), cfg.mul_int(*a, n))).filter(|(_, v)| !cfg.is_zero(*v)).collect();
        DeltaSeries { ring: self.ring.clone(), terms }
    }

    /// Exact division of every coefficient by p^k. Terms that already vanished
    /// at precision are gone, so the result is good to precision M − k unless
    /// the dividend was computed k digits wider (see `with_extra_digits`).
    pub fn div_exact_p(&self, k: u32) -> Result<Self, SeriesError> {
        let cfg = &self.ring.cfg;
        let mut terms = BTreeMap::new();
        for (m, a) in &self.terms {
            let v = cfg.div_exact_p(*a, k).map_err(|e| SeriesError::at(self, m, e))?;
            if !cfg.is_zero(v) {
                terms.insert(m.clone(), v);
            }
        }
        Ok(DeltaSeries { ring: self.ring.clone(), terms })
    }

    /// Multiplication by c * monomial.
    pub fn mul_monomial(&self, shift: &[i32], c: PadicFixed) -> Result<Self, SeriesError> {
        let cfg = &self.ring.cfg;
        let mut acc = Acc::new(&self.ring);
        for (m, a) in &self.terms {
            let mut t = m.clone();
            for (x, s) in t.iter_mut().zip(shift) {
                *x += s;
            }
            acc.add(t, cfg.mul(*a, c)?)?;
        }
        Ok(acc.finish(self.ring.clone()))
    }

    pub fn mul(&self, other: &DeltaSeries) -> Result<Self, SeriesError> {
        self.check(other)?;
        let ring = &self.ring;
        let cfg = &ring.cfg;
        let vars = &ring.vars;
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        let mut bw: Vec<(i64, &Mono, PadicFixed)> = big.terms.iter().map(|(m, c)| (vars.weight(m), m, *c)).collect();
        bw.sort_by_key(|t| t.0);
        let cap = ring.policy.weight_cap;
        let mut acc = Acc::new(ring);
        for (ma, a) in &small.terms {
            let wa = vars.weight(ma);
            for &(wb, mb, b) in &bw {
                if let Some(cap) = cap {
                    if wa + wb > cap {
                        break;
                    }
                }
                let c = cfg.mul(*a, b)?;
                if cfg.is_zero(c) {
                    continue;
                }
                let m: Mono = ma.iter().zip(mb.iter()).map(|(x, y)| x + y).collect();
                acc.add(m, c)?;
            }
        }
        Ok(acc.finish(ring.clone()))
    }

    pub fn pow(&self, n: u64) -> Result<Self, SeriesError> {
        let mut acc = Self::one(&self.ring);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Keeps the terms satisfying `keep`.
    pub fn filter<F: Fn(&[i32]) -> bool>(&self, keep: F) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), *c)).collect();
        DeltaSeries { ring: self.ring.clone(), terms }
    }

    /// Re-expresses the series in a ring with the same variables, possibly a
    /// tighter policy or different scalars; dropped terms must be admitted
    /// or cut by the new caps.
    pub fn convert(&self, target: &Arc<SeriesRing>) -> Result<Self, SeriesError> {
        if self.ring.vars != target.vars {
            return Err(SeriesError::RingMismatch);
        }
        let mut acc = Acc::new(target);
        for (m, c) in &self.terms {
            let v = target.cfg.convert_from(&self.ring.cfg, *c)?;
            acc.add(m.clone(), v)?;
        }
        Ok(acc.finish(target.clone()))
    }

    /// Moves every variable `v` to `map[v]` in the target ring.
    pub fn map_vars(&self, target: &Arc<SeriesRing>, map: &[usize]) -> Result<Self, SeriesError> {
        assert_eq!(map.len(), self.ring.vars.num_vars());
        let mut acc = Acc::new(target);
        for (m, c) in &self.terms {
            let mut t = target.zero_mono();
            for (v, &e) in m.iter().enumerate() {
                t[map[v]] += e;
            }
            acc.add(t, target.cfg.convert_from(&self.ring.cfg, *c)?)?;
        }
        Ok(acc.finish(target.clone()))
    }

    /// Formal partial derivative with respect to variable `v`.
    pub fn partial(&self, v: usize) -> Result<Self, SeriesError> {
        let cfg = &self.ring.cfg;
        let mut acc = Acc::new(&self.ring);
        for (m, c) in &self.terms {
            let e = m[v];
            if e == 0 {
                continue;
            }
            let mut t = m.clone();
            t[v] -= 1;
            acc.add(t, cfg.mul_int(*c, e as i64))?;
        }
        Ok(acc.finish(self.ring.clone()))
    }

    /// Smallest coefficient valuation, `None` for the zero series.
    pub fn min_valuation(&self) -> Option<(i64, Mono)> {
        let cfg = &self.ring.cfg;
        self.terms
            .iter()
            .filter_map(|(m, c)| cfg.valuation(*c).map(|v| (v, m.clone())))
            .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
    }

    /// First monomial (in canonical order) where the two series differ.
    pub fn first_difference(&self, other: &DeltaSeries) -> Option<Mono> {
        let cfg = &self.ring.cfg;
        let mut keys: Vec<&Mono> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter().find(|m| !cfg.eq(self.coeff(m), other.coeff(m))).cloned()
    }

    pub fn weight_range(&self) -> Option<(i64, i64)> {
        let vars = &self.ring.vars;
        let mut it = self.terms.keys().map(|m| vars.weight(m));
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), w| (lo.min(w), hi.max(w))))
    }

    pub fn format_mono(&self, m: &[i32]) -> String {
        let vars = &self.ring.vars;
        let parts: Vec<String> = m
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(v, &e)| {
                let n = vars.var_name(v);
                if e == 1 {
                    n
                } else {
                    format!("{n}^{e}")
                }
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl fmt::Display for DeltaSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let cfg = &self.ring.cfg;
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})*{}", cfg.display(*c), self.format_mono(m))?;
        }
        Ok(())
    }
}
