//! The named expansions: f∞, f^(−1), f♯ in its three cases, Ψ and f^r.
//!
//! Every constructor takes the target ring explicitly. The ring carries p,
//! the precision and the truncation policy; the series variables are the
//! single family q, q′, q″, ….

use std::sync::Arc;

use delta_series::{DeltaSeries, Mono, SeriesError, SeriesRing, SubstitutionMap};
use newform_coeffs::{CoeffTable, NewformProfile, ReductionType};
use num_bigint::BigInt;
use padic_core::{val_u64, PadicConfig, PadicError, PadicFixed};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpansionError {
    #[error("requested {requested} coefficients but the table has {available}")]
    Range { requested: usize, available: usize },
    #[error("{0}")]
    Case(String),
    #[error("ring must have a single family of order at least {0}")]
    Ring(usize),
    #[error("f-sharp coefficient at {mono} has valuation {valuation}")]
    NotIntegral { mono: String, valuation: i64 },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

pub type Result<T> = std::result::Result<T, ExpansionError>;

/// Which of the three f♯ formulas applies.
#[derive(Debug, Clone, Copy)]
pub enum FSharpCase {
    NonCm {
        a_p: PadicFixed,
    },
    CmInert,
    /// `p·u` is the root of x² − a_p x + p in pZ_p.
    CmSplit {
        a_p: PadicFixed,
        u: PadicFixed,
    },
}

impl FSharpCase {
    pub fn for_profile(profile: &NewformProfile, t: &CoeffTable, cfg: &PadicConfig) -> Result<Self> {
        let p = cfg.p();
        if profile.level.is_multiple_of(p) {
            return Err(ExpansionError::Case(format!("p = {p} divides the level {}", profile.level)));
        }
        if t.n_max() < p as usize {
            return Err(ExpansionError::Range { requested: p as usize, available: t.n_max() });
        }
        let ap_int = t.get(p as usize);
        let a_p = cfg.from_bigint(&ap_int);
        Ok(match profile.reduction_type(p) {
            ReductionType::NonCm => FSharpCase::NonCm { a_p },
            ReductionType::CmInert => {
                if ap_int != BigInt::from(0) {
                    return Err(ExpansionError::Case(format!("inert prime {p} with a_p = {ap_int}")));
                }
                FSharpCase::CmInert
            }
            ReductionType::CmSplit => FSharpCase::CmSplit { a_p, u: cfg.hensel_u(a_p)? },
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            FSharpCase::NonCm { .. } => "non-cm",
            FSharpCase::CmInert => "cm-inert",
            FSharpCase::CmSplit { .. } => "cm-split",
        }
    }

    /// The φ-polynomial P with f♯ = (1/p)·P(L(φ(q))), as (power, coefficient).
    pub fn phi_poly(&self, cfg: &PadicConfig) -> Vec<(u32, PadicFixed)> {
        let p = cfg.from_i64(cfg.p() as i64);
        match *self {
            FSharpCase::NonCm { a_p } => vec![(2, cfg.one()), (1, cfg.neg(a_p)), (0, p)],
            FSharpCase::CmInert => vec![(2, cfg.one()), (0, p)],
            FSharpCase::CmSplit { u, .. } => vec![(1, cfg.one()), (0, cfg.neg(cfg.mul_p_pow(u, 1)))],
        }
    }
}

fn check_ring(ring: &SeriesRing, order: usize) -> Result<()> {
    if ring.vars.num_families() != 1 || ring.vars.order() < order {
        return Err(ExpansionError::Ring(order));
    }
    Ok(())
}

fn check_range(t: &CoeffTable, d: usize) -> Result<()> {
    if d > t.n_max() {
        return Err(ExpansionError::Range { requested: d, available: t.n_max() });
    }
    Ok(())
}

fn q_mono(ring: &SeriesRing, exps: &[i32]) -> Mono {
    let mut m = ring.zero_mono();
    m[..exps.len()].copy_from_slice(exps);
    m
}

/// f∞ = Σ_{n≤d} a_n qⁿ.
pub fn series_from_table(t: &CoeffTable, ring: &Arc<SeriesRing>, d: usize) -> Result<DeltaSeries> {
    check_ring(ring, 0)?;
    check_range(t, d)?;
    let cfg = &ring.cfg;
    let terms = (1..=d).map(|n| (q_mono(ring, &[n as i32]), cfg.from_bigint(&t.get(n))));
    Ok(DeltaSeries::from_terms(ring, terms)?)
}

/// a_n / n.
fn a_over_n(cfg: &PadicConfig, t: &CoeffTable, n: usize) -> Result<PadicFixed> {
    Ok(cfg.from_bigfrac(&t.get(n), &BigInt::from(n))?)
}

/// L(φ(q)) = Σ_{n≤d} (a_n/n) qⁿ, including p | n (needs E ≥ v_p(n)).
pub fn log_series(t: &CoeffTable, ring: &Arc<SeriesRing>, d: usize) -> Result<DeltaSeries> {
    check_ring(ring, 0)?;
    check_range(t, d)?;
    let mut terms = Vec::with_capacity(d);
    for n in 1..=d {
        terms.push((q_mono(ring, &[n as i32]), a_over_n(&ring.cfg, t, n)?));
    }
    Ok(DeltaSeries::from_terms(ring, terms)?)
}

/// f^(−1) = Σ_{n≤d, p∤n} (a_n/n) qⁿ.
pub fn f_minus_one(t: &CoeffTable, ring: &Arc<SeriesRing>, d: usize) -> Result<DeltaSeries> {
    check_ring(ring, 0)?;
    check_range(t, d)?;
    let cfg = &ring.cfg;
    let p = cfg.p() as usize;
    let mut terms = Vec::new();
    for n in (1..=d).filter(|n| n % p != 0) {
        let c = cfg.mul(cfg.from_bigint(&t.get(n)), cfg.inv_unit(cfg.from_i64(n as i64))?)?;
        terms.push((q_mono(ring, &[n as i32]), c));
    }
    Ok(DeltaSeries::from_terms(ring, terms)?)
}

/// Pushes c·φ(q)^n·(extra) = Σ_k C(n,k) p^k q^(p(n−k)) q′^k · extra, skipping
/// terms whose valuation already exceeds `budget`.
struct Expander<'a> {
    ring: &'a SeriesRing,
    budget: i64,
    terms: Vec<(Mono, PadicFixed)>,
}

impl Expander<'_> {
    fn cfg(&self) -> &PadicConfig {
        &self.ring.cfg
    }

    fn push(&mut self, exps: [i32; 3], c: PadicFixed) {
        let cfg = self.cfg();
        if !cfg.is_zero(c) {
            let m = q_mono(self.ring, &exps[..self.ring.vars.num_vars().min(3)]);
            self.terms.push((m, c));
        }
    }

    /// c·φ(q)^n·q′^(b)·q″^(e), with `val` a lower bound for v(c).
    fn phi_q_power(&mut self, n: u64, c: PadicFixed, val: i64, b: i32, e: i32) -> Result<()> {
        let p = self.cfg().p();
        for k in 0..=n {
            if val + k as i64 > self.budget {
                break;
            }
            let cfg = self.cfg();
            let coeff = cfg.mul(cfg.mul_p_pow(cfg.binomial(n, k), k as u32), c)?;
            let qe = (p * (n - k)) as i32;
            self.push([qe, k as i32 + b, e], coeff);
        }
        Ok(())
    }

    /// c·φ²(q)^n with φ²(q) = φ(q)^p + p(q′^p + p q″).
    fn phi2_q_power(&mut self, n: u64, c: PadicFixed, val: i64) -> Result<()> {
        let p = self.cfg().p();
        for j in 0..=n {
            if val + j as i64 > self.budget {
                break;
            }
            let cj = {
                let cfg = self.cfg();
                cfg.mul(cfg.mul_p_pow(cfg.binomial(n, j), j as u32), c)?
            };
            // (q′^p + p q″)^j = Σ_l C(j,l) p^l q′^(p(j−l)) q″^l
            for l in 0..=j {
                if val + (j + l) as i64 > self.budget {
                    break;
                }
                let cl = {
                    let cfg = self.cfg();
                    cfg.mul(cfg.mul_p_pow(cfg.binomial(j, l), l as u32), cj)?
                };
                let val_l = val + (j + l) as i64;
                self.phi_q_power(p * (n - j), cl, val_l, (p * (j - l)) as i32, l as i32)?;
            }
        }
        Ok(())
    }
}

/// f♯ by direct summation of the closed-form φ-powers:
/// (1/p)·Σ_{n≤d} (a_n/n)(q^{nφ²} − a_p q^{nφ} + p qⁿ), or
/// (1/p)·Σ (a_n/n)(q^{nφ} − p u qⁿ) in the split case.
/// Terms beyond the ring's weight cap are never generated.
pub fn f_sharp(t: &CoeffTable, case: FSharpCase, ring: &Arc<SeriesRing>, d: usize) -> Result<DeltaSeries> {
    let order = if matches!(case, FSharpCase::CmSplit { .. }) { 1 } else { 2 };
    check_ring(ring, order)?;
    check_range(t, d)?;
    // one digit wider, since the final 1/p consumes it
    let wide = ring.with_extra_digits(1)?;
    let cfg = &wide.cfg;
    let p = cfg.p();
    let cap = ring.policy.weight_cap.unwrap_or(i64::MAX);
    // a summand of valuation > M vanishes after the final 1/p
    let budget = ring.cfg.prec() as i64;
    let mut ex = Expander { ring: &wide, budget, terms: Vec::new() };
    let poly = case.phi_poly(cfg);
    for n in 1..=d {
        let an = t.get(n);
        if an == BigInt::from(0) {
            continue;
        }
        let c = a_over_n(cfg, t, n)?;
        let val = -(val_u64(n as u64, p) as i64);
        for &(j, w) in &poly {
            let weight = (n as i64).saturating_mul((p as i64).pow(j));
            if weight > cap || cfg.is_zero(w) {
                continue;
            }
            let cw = cfg.mul(c, w)?;
            let vw = val + cfg.valuation(w).unwrap_or(0);
            match j {
                0 => ex.push([n as i32, 0, 0], cw),
                1 => ex.phi_q_power(n as u64, cw, vw, 0, 0)?,
                _ => ex.phi2_q_power(n as u64, cw, vw)?,
            }
        }
    }
    let sum = DeltaSeries::from_terms(&wide, ex.terms)?;
    let out = sum.div_exact_p(1)?.convert(ring)?;
    assert_integral(&out)?;
    Ok(out)
}

/// f♯ as (1/p)·P(φ)(L(φ(q))) using the series Frobenius; an independent route.
pub fn f_sharp_via_phi(t: &CoeffTable, case: FSharpCase, ring: &Arc<SeriesRing>, d: usize) -> Result<DeltaSeries> {
    let order = if matches!(case, FSharpCase::CmSplit { .. }) { 1 } else { 2 };
    check_ring(ring, order)?;
    // φ-powers are computed before the a_n/n factor, which can cost v_p(n) digits
    let p = ring.cfg.p();
    let mut extra = 1;
    let mut pk = p;
    while pk <= d as u64 {
        extra += 1;
        pk = pk.saturating_mul(p);
    }
    let wide = ring.with_extra_digits(extra)?;
    let h = log_series(t, &wide, d)?;
    let out = h.phi_linear(&case.phi_poly(&wide.cfg))?.div_exact_p(1)?.convert(ring)?;
    assert_integral(&out)?;
    Ok(out)
}

fn assert_integral(s: &DeltaSeries) -> Result<()> {
    let cfg = &s.ring().cfg;
    for (m, c) in s.terms() {
        if !cfg.is_integral(*c) {
            return Err(ExpansionError::NotIntegral {
                mono: s.format_mono(m),
                valuation: cfg.valuation(*c).unwrap_or(0),
            });
        }
    }
    Ok(())
}

/// Sets every derivative variable to zero.
pub fn q_slice(s: &DeltaSeries) -> DeltaSeries {
    let nf = s.ring().vars.num_families();
    s.filter(|m| m[nf..].iter().all(|&e| e == 0))
}

/// The same slice through an explicit substitution q′ = q″ = … = 0.
pub fn q_slice_by_substitution(s: &DeltaSeries) -> Result<DeltaSeries> {
    let ring = s.ring();
    let nv = ring.vars.num_vars();
    let nf = ring.vars.num_families();
    let mut images = Vec::with_capacity(nv);
    for v in 0..nv {
        images.push(if v < nf { DeltaSeries::var(ring, v, 0)? } else { DeltaSeries::zero(ring) });
    }
    Ok(s.substitute(&SubstitutionMap::new(ring, images)?)?)
}

/// Keeps q-monomials qⁿ with n ≤ d.
pub fn q_window(s: &DeltaSeries, d: i32) -> DeltaSeries {
    s.filter(|m| m[0] <= d)
}

/// −u·Σ_{(m,p)=1} (a_m/m) Σ_{i≥0} u^i q^(m p^i), for m p^i ≤ d.
pub fn cm_split_slice(t: &CoeffTable, u: PadicFixed, ring: &Arc<SeriesRing>, d: usize) -> Result<DeltaSeries> {
    check_ring(ring, 0)?;
    check_range(t, d)?;
    let cfg = &ring.cfg;
    let p = cfg.p() as usize;
    let mut terms = Vec::new();
    for m in (1..=d).filter(|m| m % p != 0) {
        let am = cfg.mul(cfg.from_bigint(&t.get(m)), cfg.inv_unit(cfg.from_i64(m as i64))?)?;
        let mut n = m;
        let mut ui = cfg.neg(u);
        while n <= d {
            terms.push((q_mono(ring, &[n as i32]), cfg.mul(ui, am)?));
            ui = cfg.mul(ui, u)?;
            n *= p;
        }
    }
    Ok(DeltaSeries::from_terms(ring, terms)?)
}

/// p^k / n as a fixed-point value, for k ≥ v_p(n).
fn p_pow_over(cfg: &PadicConfig, k: u32, n: u64) -> Result<PadicFixed> {
    let p = cfg.p();
    let v = val_u64(n, p);
    let unit = n / p.pow(v);
    Ok(cfg.mul_p_pow(cfg.inv_unit(cfg.from_i64(unit as i64))?, k - v))
}

/// Ψ = (1/p)·log(1 + p q′/q^p) = Σ_{n≥1} (−1)^(n−1) p^(n−1) n^(−1) (q′ q^(−p))ⁿ.
/// Stops once p^(n−1)/n vanishes at precision.
pub fn psi_series(ring: &Arc<SeriesRing>) -> Result<DeltaSeries> {
    check_ring(ring, 1)?;
    let cfg = &ring.cfg;
    let p = cfg.p();
    let m = cfg.prec() as i64;
    let mut terms = Vec::new();
    for n in 1u64.. {
        // n − 1 − ⌊log_p n⌋ is nondecreasing and bounds n − 1 − v_p(n) below
        if (n - 1) as i64 - n.ilog(p) as i64 >= m {
            break;
        }
        if (n - 1) as i64 - val_u64(n, p) as i64 >= m {
            continue;
        }
        let mut c = p_pow_over(cfg, (n - 1) as u32, n)?;
        if n % 2 == 0 {
            c = cfg.neg(c);
        }
        terms.push((q_mono(ring, &[-((p * n) as i32), n as i32]), c));
    }
    Ok(DeltaSeries::from_terms(ring, terms)?)
}

/// The representative f^r = Σ_{i=0}^{r−1} p^(r−1−i) φ^i(Ψ).
pub fn f_crys(r: usize, ring: &Arc<SeriesRing>) -> Result<DeltaSeries> {
    if r == 0 {
        return Err(ExpansionError::Case("f_crys needs r ≥ 1".into()));
    }
    check_ring(ring, r)?;
    let psi = psi_series(ring)?;
    let w: Vec<(u32, PadicFixed)> =
        (0..r).map(|i| (i as u32, ring.cfg.mul_p_pow(ring.cfg.one(), (r - 1 - i) as u32))).collect();
    Ok(psi.phi_linear(&w)?)
}

/// ∂Ψ/∂q′ against q^(−p)·(1 + p q′ q^(−p))^(−1); returns the first differing monomial.
pub fn psi_derivative_mismatch(ring: &Arc<SeriesRing>) -> Result<Option<Mono>> {
    let psi = psi_series(ring)?;
    let lhs = psi.partial(1)?;
    let p = ring.cfg.p() as i32;
    let one_plus = DeltaSeries::from_terms(
        ring,
        [(ring.zero_mono(), ring.cfg.one()), (q_mono(ring, &[-p, 1]), ring.cfg.from_i64(p as i64))],
    )?;
    let rhs = one_plus.inverse()?.mul_monomial(&q_mono(ring, &[-p]), ring.cfg.one())?;
    Ok(lhs.first_difference(&rhs))
}
