//! δ-characters ψ = (1/p)·P(φ)·L and their checks.

use delta_series::{DeltaSeries, SubstitutionMap};
use expansions::FSharpCase;
use serde::Serialize;

use crate::formal::{one_var_ring, two_var_ring, FormalGroupData};
use crate::{CharError, Result};

#[derive(Debug, Clone)]
pub struct DeltaCharacter {
    pub series: DeltaSeries,
    pub case: &'static str,
}

impl DeltaCharacter {
    pub fn order(&self) -> usize {
        self.series.ring().vars.order()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralityReport {
    pub pass: bool,
    pub min_valuation: Option<i64>,
    pub at: Option<String>,
    pub terms: usize,
}

impl IntegralityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AdditivityReport {
    pub pass: bool,
    pub degree: i64,
    pub order: usize,
    pub compared_terms: usize,
    pub first_mismatch: Option<String>,
}

impl AdditivityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Minimal coefficient valuation; passes iff it is ≥ 0.
pub fn check_integrality(s: &DeltaSeries) -> IntegralityReport {
    let low = s.min_valuation();
    IntegralityReport {
        pass: low.as_ref().is_none_or(|(v, _)| *v >= 0),
        min_valuation: low.as_ref().map(|(v, _)| *v),
        at: low.map(|(_, m)| s.format_mono(&m)),
        terms: s.len(),
    }
}

/// (1/p)(φ² − a_pφ + p)L for the non-CM and inert cases, (1/p)(φ − up)L for
/// the split case; fails unless every coefficient is integral.
pub fn delta_character(fg: &FormalGroupData) -> Result<DeltaCharacter> {
    let src = fg.log.ring();
    let order = match fg.case {
        FSharpCase::CmSplit { .. } => 1,
        _ => 2,
    };
    let ring = one_var_ring(&src.cfg, order, fg.degree())?;
    let log = fg.log.map_vars(&ring, &[0])?;
    let wide = ring.with_extra_digits(1)?;
    let poly: Vec<_> = fg
        .case
        .phi_poly(&src.cfg)
        .into_iter()
        .map(|(j, c)| Ok((j, wide.cfg.convert_from(&src.cfg, c)?)))
        .collect::<Result<_>>()?;
    let psi = log.convert(&wide)?.phi_linear(&poly)?.div_exact_p(1)?.convert(&ring)?;
    let report = check_integrality(&psi);
    if !report.pass {
        return Err(CharError::IntegralityFailure {
            mono: report.at.unwrap_or_default(),
            valuation: report.min_valuation.unwrap_or(0),
        });
    }
    Ok(DeltaCharacter { series: psi, case: fg.case.name() })
}

/// ψ(F, δF, …) − ψ(T1, …) − ψ(T2, …) within total degree ≤ d, with δ^iF
/// computed in the two-family ring.
pub fn check_additivity(psi: &DeltaSeries, law: &DeltaSeries, d: i64) -> Result<AdditivityReport> {
    let src = psi.ring();
    if src.vars.num_families() != 1 {
        return Err(CharError::InvalidArgument("ψ must be a single-family series".into()));
    }
    if src.policy.weight_cap.is_some_and(|c| c < d) || law.ring().policy.weight_cap.is_some_and(|c| c < d) {
        return Err(CharError::InvalidArgument(format!("inputs are not complete to degree {d}")));
    }
    let order = src.vars.order();
    let ring = two_var_ring(&src.cfg, order, d)?;
    let f = law.map_vars(&ring, &[ring.vars.var(0, 0), ring.vars.var(1, 0)])?;
    let mut images = vec![f];
    for i in 1..=order {
        images.push(images[i - 1].delta()?);
    }
    let lhs = psi.substitute(&SubstitutionMap::new(&ring, images)?)?;
    let on = |fam: usize| -> Result<DeltaSeries> {
        let map: Vec<usize> = (0..=order).map(|i| ring.vars.var(fam, i)).collect();
        Ok(psi.map_vars(&ring, &map)?)
    };
    let diff = lhs.sub(&on(0)?)?.sub(&on(1)?)?;
    Ok(AdditivityReport {
        pass: diff.is_empty(),
        degree: d,
        order,
        compared_terms: lhs.len(),
        first_mismatch: diff.terms().keys().next().map(|m| diff.format_mono(m)),
    })
}
