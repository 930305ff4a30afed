//! Formal group law and logarithm of a short Weierstrass curve.

use std::sync::Arc;

use delta_series::{DeltaSeries, Mono, SeriesRing, SubstitutionMap, TruncationPolicy};
use expansions::FSharpCase;
use padic_core::PadicConfig;

use crate::{degree_vars, CharError, Result, WeierstrassCurve};

/// Single family T of the given order, total degree ≤ d.
pub fn one_var_ring(cfg: &PadicConfig, order: usize, d: i64) -> Result<Arc<SeriesRing>> {
    Ok(SeriesRing::new(degree_vars(1, order)?, TruncationPolicy::weight(d), cfg.clone()))
}

/// Families T1, T2 of the given order, total degree ≤ d.
pub fn two_var_ring(cfg: &PadicConfig, order: usize, d: i64) -> Result<Arc<SeriesRing>> {
    Ok(SeriesRing::new(degree_vars(2, order)?, TruncationPolicy::weight(d), cfg.clone()))
}

fn cap(ring: &SeriesRing) -> Result<i64> {
    ring.policy.weight_cap.ok_or_else(|| CharError::InvalidArgument("formal-group rings need a degree cap".into()))
}

/// w(z) = −1/y as a series in z = −x/y: the fixed point of
/// w = z³ + a·z·w² + b·w³.
pub fn formal_w(curve: &WeierstrassCurve, d: i64) -> Result<DeltaSeries> {
    let ring = one_var_ring(&curve.cfg, 0, d)?;
    let z = DeltaSeries::var(&ring, 0, 0)?;
    let z3 = z.pow(3)?;
    let az = z.scale(curve.a)?;
    let mut w = z3.clone();
    // each pass fixes at least two more degrees
    for _ in 0..=d {
        let w2 = w.mul(&w)?;
        let next = z3.add(&az.mul(&w2)?)?.add(&w2.mul(&w)?.scale(curve.b)?)?;
        if next == w {
            break;
        }
        w = next;
    }
    Ok(w)
}

/// F(T1, T2) to total degree d, by the chord through the two points and
/// the inverse z ↦ −z.
pub fn formal_group_law(curve: &WeierstrassCurve, d: i64) -> Result<DeltaSeries> {
    let cfg = &curve.cfg;
    let w = formal_w(curve, d)?;
    let ring = two_var_ring(cfg, 0, d)?;
    let (t1, t2) = (DeltaSeries::var(&ring, 0, 0)?, DeltaSeries::var(&ring, 1, 0)?);

    // λ = (w(T2) − w(T1))/(T2 − T1) = Σ A_n Σ_{i+j=n−1} T1^i T2^j
    let mut terms: Vec<(Mono, _)> = Vec::new();
    for (m, c) in w.terms() {
        let n = m[0];
        for i in 0..n {
            terms.push((Mono::from_slice(&[i, n - 1 - i]), *c));
        }
    }
    let lambda = DeltaSeries::from_terms(&ring, terms)?;
    let nu = w.map_vars(&ring, &[ring.vars.var(0, 0)])?.sub(&lambda.mul(&t1)?)?;

    let l2 = lambda.mul(&lambda)?;
    let num = lambda.mul(&nu)?.mul(
        &DeltaSeries::constant(&ring, cfg.from_i64(2))
            .mul(&DeltaSeries::constant(&ring, curve.a))?
            .add(&lambda.scale(cfg.mul_int(curve.b, 3))?)?,
    )?;
    let den = DeltaSeries::one(&ring).add(&l2.scale(curve.a)?)?.add(&l2.mul(&lambda)?.scale(curve.b)?)?;
    Ok(t1.add(&t2)?.add(&num.mul(&den.inverse()?)?)?)
}

/// T1 + T2.
pub fn additive_law(cfg: &PadicConfig, d: i64) -> Result<DeltaSeries> {
    let ring = two_var_ring(cfg, 0, d)?;
    Ok(DeltaSeries::var(&ring, 0, 0)?.add(&DeltaSeries::var(&ring, 1, 0)?)?)
}

/// T1 + T2 + T1·T2.
pub fn multiplicative_law(cfg: &PadicConfig, d: i64) -> Result<DeltaSeries> {
    let ring = two_var_ring(cfg, 0, d)?;
    let (t1, t2) = (DeltaSeries::var(&ring, 0, 0)?, DeltaSeries::var(&ring, 1, 0)?);
    Ok(t1.add(&t2)?.add(&t1.mul(&t2)?)?)
}

/// The first failing group-law axiom within the law's degree cap, if any.
pub fn axiom_failure(law: &DeltaSeries) -> Result<Option<String>> {
    let ring = law.ring();
    let cfg = &ring.cfg;
    let d = cap(ring)?;
    let t1 = DeltaSeries::var(ring, 0, 0)?;
    if law.filter(|m| m[1] == 0) != t1 {
        return Ok(Some("F(T, 0) != T".into()));
    }
    if law.map_vars(ring, &[1, 0])? != *law {
        return Ok(Some("F(T1, T2) != F(T2, T1)".into()));
    }
    let three = SeriesRing::new(degree_vars(3, 0)?, TruncationPolicy::weight(d), cfg.clone());
    let var = |k| DeltaSeries::var(&three, k, 0);
    let f12 = law.map_vars(&three, &[0, 1])?;
    let f23 = law.map_vars(&three, &[1, 2])?;
    let left = law.substitute(&SubstitutionMap::new(&three, vec![f12, var(2)?])?)?;
    let right = law.substitute(&SubstitutionMap::new(&three, vec![var(0)?, f23])?)?;
    Ok(left.first_difference(&right).map(|m| format!("associativity fails at {}", left.format_mono(&m))))
}

/// L with L′ = (∂F/∂T2(T, 0))^(−1) and L(0) = 0. The coefficient of T^n
/// has denominator n, so the config needs E ≥ v_p(n) for n ≤ d.
pub fn formal_logarithm(law: &DeltaSeries) -> Result<DeltaSeries> {
    let src = law.ring();
    let cfg = &src.cfg;
    let ring = one_var_ring(cfg, 0, cap(src)?)?;
    let slope = law.partial(1)?.filter(|m| m[1] == 0).map_vars(&ring, &[0, 0])?;
    let omega = slope.inverse()?;
    let mut terms = Vec::new();
    for (m, c) in omega.terms() {
        let n = m[0] as i64 + 1;
        terms.push((Mono::from_slice(&[n as i32]), cfg.mul(*c, cfg.from_frac(1, n)?)?));
    }
    Ok(DeltaSeries::from_terms(&ring, terms)?)
}

/// First monomial where L(F(T1, T2)) − L(T1) − L(T2) is nonzero.
pub fn log_additivity_mismatch(law: &DeltaSeries, log: &DeltaSeries) -> Result<Option<Mono>> {
    let ring = law.ring();
    let composed = log.substitute(&SubstitutionMap::new(ring, vec![law.clone()])?)?;
    let l1 = log.map_vars(ring, &[0])?;
    let l2 = log.map_vars(ring, &[1])?;
    let diff = composed.sub(&l1)?.sub(&l2)?;
    Ok(diff.terms().keys().next().cloned())
}

/// A formal group law with its logarithm and the case selecting the
/// δ-character.
#[derive(Debug, Clone)]
pub struct FormalGroupData {
    pub law: DeltaSeries,
    pub log: DeltaSeries,
    pub case: FSharpCase,
}

impl FormalGroupData {
    pub fn new(law: DeltaSeries, case: FSharpCase) -> Result<Self> {
        let log = formal_logarithm(&law)?;
        Ok(FormalGroupData { law, log, case })
    }

    pub fn from_curve(curve: &WeierstrassCurve, d: i64, case: FSharpCase) -> Result<Self> {
        Self::new(formal_group_law(curve, d)?, case)
    }

    pub fn degree(&self) -> i64 {
        self.law.ring().policy.weight_cap.unwrap_or(0)
    }
}
