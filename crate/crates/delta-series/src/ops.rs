//! Substitution and the operators built on it: Frobenius, the p-derivation,
//! phi-polynomials, phi-coordinates and the theta derivations.

use std::collections::HashMap;
use std::sync::Arc;

use padic_core::{max_digits, PadicConfig, PadicFixed};

use crate::ring::{same_ring, Mono, SeriesRing, TruncationPolicy, VarSpec};
use crate::series::{Acc, DeltaSeries};
use crate::SeriesError;

/// One image per source variable, all in a common target ring.
#[derive(Debug, Clone)]
pub struct SubstitutionMap {
    target: Arc<SeriesRing>,
    images: Vec<DeltaSeries>,
}

impl SubstitutionMap {
    pub fn new(target: &Arc<SeriesRing>, images: Vec<DeltaSeries>) -> Result<Self, SeriesError> {
        if images.iter().any(|s| !same_ring(&s.ring, target)) {
            return Err(SeriesError::RingMismatch);
        }
        Ok(SubstitutionMap { target: target.clone(), images })
    }

    pub fn target(&self) -> &Arc<SeriesRing> {
        &self.target
    }

    pub fn images(&self) -> &[DeltaSeries] {
        &self.images
    }
}

/// Decomposition `img = lead * (1 + X)` used for negative powers.
struct Lead {
    coeff: PadicFixed,
    mono: Mono,
}

fn choose_lead(s: &DeltaSeries) -> Result<Lead, SeriesError> {
    let ring = &s.ring;
    let cfg = &ring.cfg;
    let vars = &ring.vars;
    let key = |m: &Mono, c: PadicFixed| (cfg.valuation(c).unwrap_or(i64::MAX), vars.weight(m), vars.delta_degree(m));
    let mut best: Option<(&Mono, PadicFixed)> = None;
    let mut tie = false;
    for (m, c) in &s.terms {
        match best {
            None => best = Some((m, *c)),
            Some((bm, bc)) => {
                let (k, kb) = (key(m, *c), key(bm, bc));
                if k < kb {
                    best = Some((m, *c));
                    tie = false;
                } else if k == kb {
                    tie = true;
                }
            }
        }
    }
    let (m, c) = best.ok_or_else(|| SeriesError::NonInvertibleImage("zero series".into()))?;
    if tie {
        return Err(SeriesError::NonInvertibleImage(format!("no unique leading term in {}", s.format_mono(m))));
    }
    let lead = key(m, c);
    let cap_w = ring.policy.weight_cap.is_some();
    let cap_d = ring.policy.delta_deg_cap.is_some();
    for (mt, ct) in &s.terms {
        if mt == m {
            continue;
        }
        let k = key(mt, *ct);
        let small = k.0 > lead.0 || (cap_w && k.1 > lead.1) || (cap_d && k.2 > lead.2);
        if !small {
            return Err(SeriesError::NonInvertibleImage(format!(
                "term {} does not shrink relative to {}",
                s.format_mono(mt),
                s.format_mono(m)
            )));
        }
        if mt[vars.num_families()..].iter().zip(&m[vars.num_families()..]).any(|(a, b)| a < b) {
            return Err(SeriesError::NonInvertibleImage(
                "leading term carries derivative variables absent elsewhere".into(),
            ));
        }
    }
    Ok(Lead { coeff: c, mono: m.clone() })
}

fn mono_diff(a: &[i32], b: &[i32]) -> Mono {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn mono_scale(a: &[i32], k: i32) -> Mono {
    a.iter().map(|x| x * k).collect()
}

fn mono_add(a: &[i32], b: &[i32]) -> Mono {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `c^e` for a scalar, allowing negative e for invertible c.
fn scalar_pow(cfg: &PadicConfig, c: PadicFixed, e: i64) -> Result<PadicFixed, SeriesError> {
    if e >= 0 {
        Ok(cfg.pow(c, e as u64)?)
    } else {
        let inv = cfg.inv(c)?;
        Ok(cfg.pow(inv, (-e) as u64)?)
    }
}

impl DeltaSeries {
    /// Multiplicative inverse of a series with a dominant leading term.
    pub fn inverse(&self) -> Result<DeltaSeries, SeriesError> {
        let ring = &self.ring;
        let cfg = &ring.cfg;
        let lead = choose_lead(self)?;
        if self.len() == 1 {
            let c = cfg.inv(lead.coeff)?;
            return DeltaSeries::monomial(ring, &mono_scale(&lead.mono, -1), c);
        }
        let lead_inv = cfg.inv(lead.coeff)?;
        // X = (self - lead) / lead, kept as raw terms to avoid admission of
        // intermediate monomials.
        let x: Vec<(Mono, PadicFixed)> = self
            .terms
            .iter()
            .filter(|(m, _)| **m != lead.mono)
            .map(|(m, c)| Ok((mono_diff(m, &lead.mono), cfg.mul(*c, lead_inv)?)))
            .collect::<Result<_, SeriesError>>()?;
        let base = mono_scale(&lead.mono, -1);
        let mut total: HashMap<Mono, PadicFixed> = HashMap::new();
        let mut power: HashMap<Mono, PadicFixed> = HashMap::new();
        power.insert(base.clone(), lead_inv);
        let mut k = 0usize;
        while !power.is_empty() {
            for (m, c) in &power {
                let slot = total.entry(m.clone()).or_insert_with(|| cfg.zero());
                *slot = if k.is_multiple_of(2) { cfg.add(*slot, *c) } else { cfg.sub(*slot, *c) };
            }
            let mut next: HashMap<Mono, PadicFixed> = HashMap::new();
            for (m, c) in &power {
                for (xm, xc) in &x {
                    let v = cfg.mul(*c, *xc)?;
                    if cfg.is_zero(v) {
                        continue;
                    }
                    let t = mono_add(m, xm);
                    match ring.admit(&t) {
                        crate::ring::Admit::Drop => continue,
                        crate::ring::Admit::Floor => return Err(SeriesError::floor(ring, &t)),
                        _ => {}
                    }
                    let slot = next.entry(t).or_insert_with(|| cfg.zero());
                    *slot = cfg.add(*slot, v);
                }
            }
            next.retain(|_, c| !cfg.is_zero(*c));
            power = next;
            k += 1;
            if k > 100_000 {
                return Err(SeriesError::NonInvertibleImage("geometric series does not terminate".into()));
            }
        }
        DeltaSeries::from_terms(ring, total)
    }

    /// `self^e` for a two-term series via the binomial theorem.
    fn binomial_power(&self, e: i64) -> Result<DeltaSeries, SeriesError> {
        let ring = &self.ring;
        let cfg = &ring.cfg;
        let vars = &ring.vars;
        let lead = match choose_lead(self) {
            Ok(l) => l,
            Err(err) if e >= 0 => {
                let (m, c) = self.terms.iter().next().ok_or(err)?;
                Lead { coeff: *c, mono: m.clone() }
            }
            Err(err) => return Err(err),
        };
        let (om, oc) = self.terms.iter().find(|(m, _)| **m != lead.mono).expect("two terms");
        let ratio = mono_diff(om, &lead.mono);
        let dw = vars.weight(&ratio);
        let dd = vars.delta_degree(&ratio);
        let vr = cfg.valuation(*oc).unwrap_or(i64::MAX) - cfg.valuation(lead.coeff).unwrap_or(0);
        let digits = cfg.total_digits() as i64;
        let mut acc = Acc::new(ring);
        let mut k: i64 = 0;
        loop {
            if e >= 0 && k > e {
                break;
            }
            if vr > 0 && vr.saturating_mul(k) >= digits + cfg.denom_exp() as i64 {
                break;
            }
            let m = mono_add(&mono_scale(&lead.mono, (e - k) as i32), &mono_scale(om, k as i32));
            let dropped = !matches!(ring.admit(&m), crate::ring::Admit::Keep | crate::ring::Admit::Floor);
            if dropped && k > 0 && (dw > 0 || dd > 0) {
                break;
            }
            if !dropped {
                let b = cfg.binomial_signed(e, k as u64);
                if !cfg.is_zero(b) {
                    let c = cfg.mul(cfg.mul(scalar_pow(cfg, lead.coeff, e - k)?, scalar_pow(cfg, *oc, k)?)?, b)?;
                    acc.add(m, c)?;
                }
            }
            if e < 0 && vr <= 0 && dw <= 0 && dd <= 0 {
                return Err(SeriesError::NonInvertibleImage(
                    "negative power of a binomial without a shrinking term".into(),
                ));
            }
            k += 1;
            if k > 1_000_000 {
                return Err(SeriesError::NonInvertibleImage("binomial series does not terminate".into()));
            }
        }
        Ok(acc.finish(ring.clone()))
    }

    /// `self^e` for any integer e (negative powers need a dominant term).
    pub fn pow_signed(&self, e: i64) -> Result<DeltaSeries, SeriesError> {
        let ring = &self.ring;
        if e == 0 {
            return Ok(DeltaSeries::one(ring));
        }
        match self.len() {
            0 => {
                if e > 0 {
                    Ok(DeltaSeries::zero(ring))
                } else {
                    Err(SeriesError::NonInvertibleImage("zero series".into()))
                }
            }
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                let coeff = scalar_pow(&ring.cfg, *c, e)?;
                DeltaSeries::monomial(ring, &mono_scale(m, e as i32), coeff)
            }
            2 => self.binomial_power(e),
            _ => {
                if e > 0 {
                    self.pow(e as u64)
                } else {
                    self.inverse()?.pow((-e) as u64)
                }
            }
        }
    }

    /// Substitutes `sigma.images[v]` for every variable v of `self`.
    pub fn substitute(&self, sigma: &SubstitutionMap) -> Result<DeltaSeries, SeriesError> {
        let nv = self.ring.vars.num_vars();
        if sigma.images.len() != nv {
            return Err(SeriesError::InvalidArgument(format!(
                "substitution assigns {} of {} variables",
                sigma.images.len(),
                nv
            )));
        }
        let target = &sigma.target;
        // coefficients with denominators p^d need the products d digits wider
        let d = self.min_valuation().map_or(0, |(v, _)| (-v).max(0) as u32).min(target.cfg.guard());
        if d > 0 {
            let wide = target.with_extra_digits(d)?;
            let images = sigma.images.iter().map(|s| s.convert(&wide)).collect::<Result<_, _>>()?;
            return self.substitute_exact(&SubstitutionMap { target: wide, images })?.convert(target);
        }
        self.substitute_exact(sigma)
    }

    fn substitute_exact(&self, sigma: &SubstitutionMap) -> Result<DeltaSeries, SeriesError> {
        let target = &sigma.target;
        let tcfg = &target.cfg;
        let mut cache: HashMap<(usize, i32), DeltaSeries> = HashMap::new();
        let mut acc = Acc::new(target);
        for (m, c) in &self.terms {
            let coeff = tcfg.convert_from(&self.ring.cfg, *c)?;
            let mut prod: Option<DeltaSeries> = None;
            let mut vanished = false;
            for (v, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = match cache.get(&(v, e)) {
                    Some(s) => s.clone(),
                    None => {
                        let s = power_from_cache(&mut cache, &sigma.images[v], v, e)?;
                        cache.insert((v, e), s.clone());
                        s
                    }
                };
                if pw.is_empty() {
                    vanished = true;
                    break;
                }
                prod = Some(match prod {
                    None => pw,
                    Some(acc_s) => acc_s.mul(&pw)?,
                });
                if prod.as_ref().is_some_and(|s| s.is_empty()) {
                    vanished = true;
                    break;
                }
            }
            if vanished {
                continue;
            }
            match prod {
                None => acc.add(target.zero_mono(), coeff)?,
                Some(s) => {
                    for (pm, pc) in &s.terms {
                        acc.add(pm.clone(), tcfg.mul(*pc, coeff)?)?;
                    }
                }
            }
        }
        Ok(acc.finish(target.clone()))
    }

    /// Frobenius lift: identity on scalars, q^(i) -> (q^(i))^p + p q^(i+1).
    pub fn frobenius(&self) -> Result<DeltaSeries, SeriesError> {
        let ring = &self.ring;
        let images = frobenius_images(ring, self)?;
        self.substitute(&SubstitutionMap::new(ring, images)?)
    }

    /// δF = (φ(F) - F^p)/p, computed one digit wider so that terms vanishing
    /// at precision before the division still contribute.
    pub fn delta(&self) -> Result<DeltaSeries, SeriesError> {
        let p = self.ring.cfg.p();
        let wide = self.ring.with_extra_digits(1)?;
        let f = self.convert(&wide)?;
        let phi = f.frobenius()?;
        let fp = f.pow(p)?;
        phi.sub(&fp)?.div_exact_p(1)?.convert(&self.ring)
    }

    /// Σ c_j φ^j(F).
    pub fn phi_linear(&self, w: &[(u32, PadicFixed)]) -> Result<DeltaSeries, SeriesError> {
        let max = w.iter().map(|t| t.0).max().unwrap_or(0);
        let mut acc = DeltaSeries::zero(&self.ring);
        let mut cur = self.clone();
        for j in 0..=max {
            for &(jj, c) in w {
                if jj == j {
                    acc = acc.add(&cur.scale(c)?)?;
                }
            }
            if j < max {
                cur = cur.frobenius()?;
            }
        }
        Ok(acc)
    }

    /// Π φ^j(F)^(a_j).
    pub fn phi_monomial(&self, w: &[(u32, u32)]) -> Result<DeltaSeries, SeriesError> {
        let max = w.iter().map(|t| t.0).max().unwrap_or(0);
        let mut acc = DeltaSeries::one(&self.ring);
        let mut cur = self.clone();
        for j in 0..=max {
            for &(jj, a) in w {
                if jj == j {
                    acc = acc.mul(&cur.pow(a as u64)?)?;
                }
            }
            if j < max {
                cur = cur.frobenius()?;
            }
        }
        Ok(acc)
    }

    /// Rewrites a single-family series in the coordinates x_s = φ^s(q).
    ///
    /// q^(i) = X_i / p^(d_i) with integral X_i and d_(i+1) = p d_i + 1, so a
    /// monomial costs Σ e_i d_i digits; the output keeps the mantissas and
    /// moves those digits from the precision into the denominator exponent.
    pub fn phi_coords_to(&self, name: &str) -> Result<DeltaSeries, SeriesError> {
        let ring = &self.ring;
        single_family(ring)?;
        let cfg = &ring.cfg;
        let p = cfg.p();
        let r = ring.vars.order();
        let d = coord_denominators(p, r);
        let dmax = self.terms.keys().map(|m| (1..=r).map(|i| m[i] as u64 * d[i]).sum::<u64>()).max().unwrap_or(0);
        if dmax >= cfg.prec() as u64 {
            return Err(SeriesError::InvalidArgument(format!(
                "phi-coordinates need {dmax} digits of precision, only {} available",
                cfg.prec()
            )));
        }
        let work =
            SeriesRing::new(ring.vars.clone(), TruncationPolicy { delta_deg_cap: None, ..ring.policy }, cfg.clone());
        let xs = coord_generators(&work)?;
        let mut scaled = Acc::new(&work);
        for (m, c) in &self.terms {
            let dm: u64 = (1..=r).map(|i| m[i] as u64 * d[i]).sum();
            scaled.add(m.clone(), cfg.mul_p_pow(*c, (dmax - dm) as u32))?;
        }
        let scaled = scaled.finish(work.clone());
        let s = scaled.substitute(&SubstitutionMap::new(&work, xs)?)?;
        let out_cfg = PadicConfig::new(p, cfg.prec() - dmax as u32, cfg.denom_exp() + dmax as u32, cfg.guard())?;
        let out_vars = VarSpec::from_weights(&[name], r, ring.vars.weights().to_vec())?;
        let out = SeriesRing::new(out_vars, work.policy, out_cfg);
        let terms = s.terms.into_iter().map(|(m, c)| (m, out.cfg.from_mantissa(c.raw())));
        DeltaSeries::from_terms(&out, terms)
    }

    /// Inverse of [`phi_coords_to`]: substitutes x_s -> φ^s(q).
    pub fn phi_coords_from(&self, name: &str) -> Result<DeltaSeries, SeriesError> {
        let ring = &self.ring;
        single_family(ring)?;
        let vars = VarSpec::from_weights(&[name], ring.vars.order(), ring.vars.weights().to_vec())?;
        let out = SeriesRing::new(vars, ring.policy, ring.cfg.clone());
        let images = phi_iterates(&out)?;
        self.substitute(&SubstitutionMap::new(&out, images)?)
    }

    /// θ_j: the derivation acting on x_s = φ^s(q) by x_s -> [s = j] p^j x_s.
    pub fn theta(&self, j: usize) -> Result<DeltaSeries, SeriesError> {
        let ring = &self.ring;
        single_family(ring)?;
        let r = ring.vars.order();
        if j > r {
            return Err(SeriesError::OrderExceeded { level: j, order: r });
        }
        let gens = theta_generators(ring, j)?;
        let cfg = &ring.cfg;
        let mut acc = Acc::new(ring);
        for (m, c) in &self.terms {
            for (v, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let ce = cfg.mul_int(*c, e as i64);
                let mut base = m.clone();
                base[v] -= 1;
                for (gm, gc) in &gens[v].terms {
                    acc.add(mono_add(&base, gm), cfg.mul(ce, *gc)?)?;
                }
            }
        }
        Ok(acc.finish(ring.clone()))
    }
}

fn power_from_cache(
    cache: &mut HashMap<(usize, i32), DeltaSeries>,
    img: &DeltaSeries,
    v: usize,
    e: i32,
) -> Result<DeltaSeries, SeriesError> {
    if img.len() <= 2 || e < 0 {
        return img.pow_signed(e as i64);
    }
    // largest cached positive power below e
    let mut k = e - 1;
    while k > 0 && !cache.contains_key(&(v, k)) {
        k -= 1;
    }
    let mut cur = if k == 0 { DeltaSeries::one(&img.ring) } else { cache[&(v, k)].clone() };
    for kk in k + 1..=e {
        cur = cur.mul(img)?;
        if kk < e {
            cache.insert((v, kk), cur.clone());
        }
    }
    Ok(cur)
}

fn single_family(ring: &SeriesRing) -> Result<(), SeriesError> {
    if ring.vars.num_families() != 1 {
        return Err(SeriesError::InvalidArgument("operation needs a single base family".into()));
    }
    Ok(())
}

/// Images of the Frobenius lift; the top level may only be used if absent.
pub(crate) fn frobenius_images(ring: &Arc<SeriesRing>, f: &DeltaSeries) -> Result<Vec<DeltaSeries>, SeriesError> {
    let vars = &ring.vars;
    let nf = vars.num_families();
    let r = vars.order();
    let cfg = &ring.cfg;
    let p = cfg.p();
    let mut images = Vec::with_capacity(vars.num_vars());
    for v in 0..vars.num_vars() {
        let level = vars.level_of(v);
        if level == r {
            if f.terms.keys().any(|m| m[v] != 0) {
                return Err(SeriesError::OrderExceeded { level: r + 1, order: r });
            }
            let mut m = ring.zero_mono();
            m[v] = 1;
            images.push(DeltaSeries::from_terms(ring, [(m, cfg.one())])?);
            continue;
        }
        let mut a = ring.zero_mono();
        a[v] = p as i32;
        let mut b = ring.zero_mono();
        b[v + nf] = 1;
        let terms = vec![(a, cfg.one()), (b, cfg.from_i64(p as i64))];
        images.push(DeltaSeries::from_terms(ring, terms)?);
    }
    Ok(images)
}

/// d_0 = 0, d_(i+1) = p d_i + 1.
pub fn coord_denominators(p: u64, r: usize) -> Vec<u64> {
    let mut d = vec![0u64];
    for i in 0..r {
        d.push(p * d[i] + 1);
    }
    d
}

/// X_i = p^(d_i) q^(i) written in x-coordinates (stored in the q slots).
fn coord_generators(ring: &Arc<SeriesRing>) -> Result<Vec<DeltaSeries>, SeriesError> {
    let r = ring.vars.order();
    let cfg = &ring.cfg;
    let p = cfg.p();
    let d = coord_denominators(p, r);
    let shift: Vec<usize> = (0..=r).map(|s| (s + 1).min(r)).collect();
    let mut xs = vec![DeltaSeries::var(ring, 0, 0)?];
    for i in 0..r {
        let prev = &xs[i];
        let shifted = prev.map_vars(ring, &shift)?;
        let k = ((p - 1) * d[i]) as u32;
        let next = shifted.scale(cfg.mul_p_pow(cfg.one(), k))?.sub(&prev.pow(p)?)?;
        xs.push(next);
    }
    Ok(xs)
}

/// [q, φ(q), φ²(q), ...] in a single-family ring.
fn phi_iterates(ring: &Arc<SeriesRing>) -> Result<Vec<DeltaSeries>, SeriesError> {
    let r = ring.vars.order();
    let mut ys = vec![DeltaSeries::var(ring, 0, 0)?];
    for s in 0..r {
        let next = ys[s].frobenius()?;
        ys.push(next);
    }
    Ok(ys)
}

/// θ_j(q^(i)) for every level i, computed through phi-coordinates in an
/// auxiliary integral ring and brought back into `ring`.
fn theta_generators(ring: &Arc<SeriesRing>, j: usize) -> Result<Vec<DeltaSeries>, SeriesError> {
    let cfg = &ring.cfg;
    let p = cfg.p();
    let r = ring.vars.order();
    let d = coord_denominators(p, r);
    let digits = max_digits(p);
    let need = d[r] as u32 + cfg.prec() + cfg.denom_exp();
    if need > digits {
        return Err(SeriesError::InvalidArgument(format!(
            "theta at order {r} needs {need} digits, at most {digits} fit for p = {p}"
        )));
    }
    let aux_cfg = PadicConfig::new(p, digits - d[r] as u32, 0, d[r] as u32)?;
    let aux = SeriesRing::new(ring.vars.clone(), TruncationPolicy::unbounded(), aux_cfg);
    let xs = coord_generators(&aux)?;
    let ys = phi_iterates(&aux)?;
    let back = SubstitutionMap::new(&aux, ys)?;
    let mut out = Vec::with_capacity(r + 1);
    for (i, x) in xs.iter().enumerate() {
        let dj = x.partial(j)?;
        let mut unit = aux.zero_mono();
        unit[j] = 1;
        let scaled = dj.mul_monomial(&unit, aux.cfg.mul_p_pow(aux.cfg.one(), j as u32))?;
        let img = scaled.substitute(&back)?.div_exact_p(d[i] as u32)?;
        out.push(img.convert(&aux.with_policy(ring.policy).with_cfg(cfg.clone()))?);
    }
    // rebind to the caller's ring handle
    out.into_iter().map(|s| DeltaSeries::from_terms(ring, s.terms)).collect()
}
