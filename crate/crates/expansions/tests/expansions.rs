use std::sync::Arc;
use std::time::Instant;

use delta_series::{DeltaSeries, Mono, SeriesRing, TruncationPolicy, VarSpec};
use expansions::*;
use newform_coeffs::{NewformProfile, Provenance};
use num_bigint::BigInt;
use padic_core::PadicConfig;

fn ring(p: u64, order: usize, m: u32, e: u32, policy: TruncationPolicy) -> Arc<SeriesRing> {
    let cfg = PadicConfig::for_order(p, m, e, order as u32).unwrap();
    SeriesRing::new(VarSpec::new(&["q"], order, p).unwrap(), policy, cfg)
}

#[track_caller]
fn same(a: &DeltaSeries, b: &DeltaSeries) {
    if let Some(m) = a.first_difference(b) {
        let cfg = &a.ring().cfg;
        panic!("differ at {}: {} vs {}", a.format_mono(&m), cfg.display(a.coeff(&m)), cfg.display(b.coeff(&m)));
    }
}

fn mono(r: &SeriesRing, e: &[i32]) -> Mono {
    let mut m = r.zero_mono();
    m[..e.len()].copy_from_slice(e);
    m
}

#[test]
fn f_infinity_from_table() {
    let r = ring(5, 0, 6, 0, TruncationPolicy::weight(100));
    let t = NewformProfile::level11().table(10);
    let f = series_from_table(&t, &r, 4).unwrap();
    let want = DeltaSeries::from_terms(
        &r,
        [(1, 1), (2, -2), (3, -1), (4, 2)].map(|(n, c)| (mono(&r, &[n]), r.cfg.from_i64(c))),
    )
    .unwrap();
    assert_eq!(f, want);
    let q = series_from_table(&t, &r, 1).unwrap();
    assert_eq!(q, DeltaSeries::var(&r, 0, 0).unwrap());
    assert!(matches!(series_from_table(&t, &r, 11), Err(ExpansionError::Range { requested: 11, available: 10 })));
}

#[test]
fn serre_form_first_terms() {
    let r = ring(5, 0, 6, 0, TruncationPolicy::weight(100));
    let cfg = &r.cfg;
    let t = NewformProfile::level11().table(10);
    let f = f_minus_one(&t, &r, 7).unwrap();
    let want = [(1, 1, 1), (2, -1, 1), (3, -1, 3), (4, 1, 2), (6, 1, 3), (7, -2, 7)];
    assert_eq!(f.len(), want.len());
    for (n, a, b) in want {
        assert!(cfg.eq(f.coeff(&[n]), cfg.from_frac(a, b).unwrap()), "n = {n}");
        assert!(cfg.is_unit(f.coeff(&[n])) || a == 0);
    }
    assert!(cfg.is_zero(f.coeff(&[5])));
}

#[test]
fn f_sharp_slice_matches_serre_form() {
    let (p, m, e, d) = (5u64, 6, 4, 300usize);
    let r = ring(p, 2, m, e, TruncationPolicy::weight(d as i64));
    let t = NewformProfile::level11().table(d);
    let case = FSharpCase::for_profile(&NewformProfile::level11(), &t, &r.cfg).unwrap();
    assert!(matches!(case, FSharpCase::NonCm { .. }));
    let fs = f_sharp(&t, case, &r, d).unwrap();
    let slice = q_slice(&fs);
    assert_eq!(slice, q_slice_by_substitution(&fs).unwrap());
    assert_eq!(slice, f_minus_one(&t, &r, d).unwrap());
    for k in 1..=(d as i32 / 5) {
        assert!(r.cfg.is_zero(slice.coeff(&mono(&r, &[5 * k]))));
    }
    // q′ and q″ terms are present
    assert!(fs.terms().keys().any(|m| m[2] > 0));
}

#[test]
fn f_sharp_routes_agree() {
    let (p, m, e, d) = (5u64, 5, 4, 200usize);
    let r = ring(p, 2, m, e, TruncationPolicy::weight(d as i64));
    let t = NewformProfile::level11().table(d);
    let case = FSharpCase::for_profile(&NewformProfile::level11(), &t, &r.cfg).unwrap();
    let direct = f_sharp(&t, case, &r, d).unwrap();
    let via = f_sharp_via_phi(&t, case, &r, d).unwrap();
    same(&direct, &via);

    let r32 = ring(p, 1, m, e, TruncationPolicy::weight(d as i64));
    let t32 = NewformProfile::level32().table(d);
    let split = FSharpCase::for_profile(&NewformProfile::level32(), &t32, &r32.cfg).unwrap();
    same(&f_sharp(&t32, split, &r32, d).unwrap(), &f_sharp_via_phi(&t32, split, &r32, d).unwrap());
}

#[test]
fn f_sharp_large_cap_is_fast() {
    let (p, m, e, d) = (5u64, 6, 5, 1500usize);
    let start = Instant::now();
    let r = ring(p, 2, m, e, TruncationPolicy::weight(d as i64));
    let t = NewformProfile::level11().table(d);
    let case = FSharpCase::for_profile(&NewformProfile::level11(), &t, &r.cfg).unwrap();
    let fs = f_sharp(&t, case, &r, d).unwrap();
    let slice = q_window(&q_slice(&fs), 60);
    assert_eq!(slice, q_window(&f_minus_one(&t, &r, 60).unwrap(), 60));
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn cm_split_q_slice() {
    let (p, m, d) = (5u64, 6, 60usize);
    let r = ring(p, 2, m, 2, TruncationPolicy::weight(d as i64));
    let t = NewformProfile::level32().table(d);
    let case = FSharpCase::for_profile(&NewformProfile::level32(), &t, &r.cfg).unwrap();
    let FSharpCase::CmSplit { u, .. } = case else { panic!("level 32 at p = 5 splits") };
    let fs = f_sharp(&t, case, &r, d).unwrap();
    let want = cm_split_slice(&t, u, &r, d).unwrap();
    assert_eq!(q_slice(&fs), want);
    // coefficient of q^(p^i m) is −u^(i+1) a_m / m
    let cfg = &r.cfg;
    let c = fs.coeff(&mono(&r, &[25]));
    assert!(cfg.eq(c, cfg.neg(cfg.pow(u, 3).unwrap())));
}

#[test]
fn cm_inert_slice() {
    let (p, m, d) = (7u64, 5, 40usize);
    let r = ring(p, 2, m, 2, TruncationPolicy::weight(d as i64));
    let t = NewformProfile::level32().table(d);
    assert_eq!(t.get(7), BigInt::from(0));
    let case = FSharpCase::for_profile(&NewformProfile::level32(), &t, &r.cfg).unwrap();
    assert!(matches!(case, FSharpCase::CmInert));
    let fs = f_sharp(&t, case, &r, d).unwrap();
    assert_eq!(q_slice(&fs), f_minus_one(&t, &r, d).unwrap());
}

#[test]
fn corrupted_table_is_not_integral() {
    let (p, d) = (5u64, 60usize);
    let r = ring(p, 2, 5, 2, TruncationPolicy::weight(d as i64));
    let mut t = NewformProfile::level11().table(d);
    t.a[9] += 1;
    t.provenance = Provenance::File;
    let case = FSharpCase::NonCm { a_p: r.cfg.from_i64(1) };
    assert!(matches!(f_sharp(&t, case, &r, d), Err(ExpansionError::NotIntegral { .. })));
}

#[test]
fn wrong_case_inputs() {
    let r = ring(11, 2, 3, 1, TruncationPolicy::weight(50));
    let t = NewformProfile::level11().table(50);
    assert!(matches!(FSharpCase::for_profile(&NewformProfile::level11(), &t, &r.cfg), Err(ExpansionError::Case(_))));
    let r1 = ring(5, 1, 3, 1, TruncationPolicy::weight(50));
    let case = FSharpCase::NonCm { a_p: r1.cfg.one() };
    assert!(matches!(f_sharp(&t, case, &r1, 50), Err(ExpansionError::Ring(2))));
}

#[test]
fn psi_leading_terms() {
    let r = ring(5, 1, 4, 0, TruncationPolicy::unbounded().with_floor(40));
    let cfg = &r.cfg;
    let psi = psi_series(&r).unwrap();
    assert!(cfg.eq(psi.coeff(&[-5, 1]), cfg.one()));
    assert!(cfg.eq(psi.coeff(&[-10, 2]), cfg.from_frac(-5, 2).unwrap()));
    assert!(cfg.eq(psi.coeff(&[-15, 3]), cfg.from_frac(25, 3).unwrap()));
    // p^(n-1)/n: n = 5 gives 5^3, n = 6 gives 5^5/6 which vanishes mod 5^4
    assert!(!cfg.is_zero(psi.coeff(&[-25, 5])));
    assert_eq!(psi.len(), 5);

    let r1 = ring(5, 1, 1, 0, TruncationPolicy::unbounded().with_floor(40));
    let single = psi_series(&r1).unwrap();
    assert_eq!(single, DeltaSeries::monomial(&r1, &[-5, 1], r1.cfg.one()).unwrap());
    let reduced = psi.convert(&r1).unwrap();
    assert_eq!(reduced, single);

    let low = ring(5, 1, 4, 0, TruncationPolicy::unbounded().with_floor(10));
    assert!(matches!(psi_series(&low), Err(ExpansionError::Series(_))));
}

#[test]
fn psi_derivative_identity() {
    for (p, m) in [(5u64, 4u32), (3, 6), (7, 3)] {
        let r = ring(p, 1, m, 0, TruncationPolicy::unbounded().with_floor(p as u32 * (m + 4)));
        assert_eq!(psi_derivative_mismatch(&r).unwrap(), None, "p = {p}");
    }
}

#[test]
fn crystalline_forms() {
    let r = ring(5, 2, 4, 0, TruncationPolicy::unbounded().with_floor(200));
    let psi = psi_series(&r).unwrap();
    assert_eq!(f_crys(1, &r).unwrap(), psi);
    let f2 = f_crys(2, &r).unwrap();
    let via = psi.frobenius().unwrap().add(&psi.scale_int(5)).unwrap();
    assert_eq!(f2, via);
    // mod p: (q′/q^p)^p
    let r1 = r.with_cfg(PadicConfig::new(5, 1, 0, 4).unwrap());
    let want = DeltaSeries::monomial(&r1, &[-25, 5, 0], r1.cfg.one()).unwrap();
    assert_eq!(f2.convert(&r1).unwrap(), want);
    // lowest valuation q″ term comes from φ(q′q^(−5)) = (q′^5 + 5q″)(q^5 + 5q′)^(−5)
    assert!(r.cfg.eq(f2.coeff(&[-25, 0, 1]), r.cfg.from_i64(5)));
    assert!(r.cfg.eq(f2.coeff(&[-30, 6, 0]), r.cfg.from_i64(-25)));
    assert!(matches!(f_crys(3, &r), Err(ExpansionError::Ring(3))));
}
