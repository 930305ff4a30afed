use std::sync::Arc;

use delta_series::{DeltaSeries, Mono, SeriesRing, TruncationPolicy, VarSpec};
use hecke_infty::*;
use padic_core::PadicConfig;
use proptest::prelude::*;

fn single(p: u64, order: usize, m: u32, w: i64) -> Arc<SeriesRing> {
    let cfg = PadicConfig::for_order(p, m, 0, order as u32).unwrap();
    SeriesRing::new(VarSpec::new(&["q"], order, p).unwrap(), TruncationPolicy::weight(w), cfg)
}

/// Up to four terms q^a q′^b of weight ≤ w with small integer coefficients.
fn small_series(order: usize, w: i64) -> impl Strategy<Value = Vec<(i32, i32, i64)>> {
    let b_max = if order == 0 { 0 } else { (w / 3) as i32 };
    prop::collection::vec((0..=w as i32, 0..=b_max, -4i64..=4), 1..=4)
        .prop_map(move |v| v.into_iter().filter(|&(a, b, _)| (a + 3 * b) as i64 <= w && a + b > 0).collect())
}

fn build(r: &Arc<SeriesRing>, terms: &[(i32, i32, i64)]) -> DeltaSeries {
    let order = r.vars.order();
    let items = terms.iter().map(|&(a, b, c)| {
        let mut m = r.zero_mono();
        m[0] = a;
        if order > 0 {
            m[1] = b;
        }
        (m, r.cfg.from_i64(c))
    });
    DeltaSeries::from_terms(r, items.collect::<Vec<(Mono, _)>>()).unwrap()
}

/// c₀·h(q) + c₁·φ(h(q)) with h(0) = 0: φ is additive, so Σ_m F is a series in
/// the S_j and φ(S_j) = S_j^p + p·δS_j.
fn additive_series(r: &Arc<SeriesRing>, h: &[(i32, i64)], c0: i64, c1: i64) -> DeltaSeries {
    let cfg = &r.cfg;
    let h = DeltaSeries::from_terms(
        r,
        h.iter().map(|&(n, c)| (Mono::from_slice(&[n, 0]), cfg.from_i64(c))).collect::<Vec<_>>(),
    )
    .unwrap();
    h.scale_int(c0).add(&h.frobenius().unwrap().scale_int(c1)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 50, ..ProptestConfig::default() })]

    #[test]
    fn random_symmetric_inputs_round_trip(
        w in 6i64..=20,
        h in prop::collection::vec((1i32..=6, -4i64..=4), 1..=3),
        c0 in -3i64..=3,
        c1 in -3i64..=3,
        seed in any::<u64>(),
    ) {
        let r = single(3, 1, 4, w);
        let f = additive_series(&r, &h, c0, c1);
        let big = sigma_m(&f, 3).unwrap();
        let res = decompose(&big, &DecomposeOptions::default()).unwrap();
        prop_assert_eq!(res.status, Status::Exact);
        prop_assert_eq!(round_trip_mismatch(&big, &res).unwrap(), None);
        let back = substitute_images(&res.g, &res.sym, big.ring()).unwrap();
        prop_assert_eq!(&back, &big);
        let shuffled = decompose(&big, &DecomposeOptions { seed: Some(seed), ..Default::default() }).unwrap();
        prop_assert_eq!(shuffled.status, res.status);
        prop_assert_eq!(&shuffled.g, &res.g);
    }

    #[test]
    fn verdict_ignores_elimination_order(
        order in 0usize..=1,
        w in 4i64..=20,
        terms in small_series(1, 20),
        seed in any::<u64>(),
    ) {
        let r = single(3, order, 4, w);
        let kept: Vec<_> = terms.into_iter().filter(|&(a, b, _)| (a + 3 * b) as i64 <= w && (order > 0 || b == 0)).collect();
        let big = sigma_m(&build(&r, &kept), 3).unwrap();
        let res = decompose(&big, &DecomposeOptions::default()).unwrap();
        let shuffled = decompose(&big, &DecomposeOptions { seed: Some(seed), ..Default::default() }).unwrap();
        prop_assert_eq!(shuffled.status, res.status);
        if res.status == Status::Exact {
            prop_assert_eq!(round_trip_mismatch(&big, &res).unwrap(), None);
            prop_assert_eq!(&shuffled.g, &res.g);
        } else {
            prop_assert!(res.residual.is_some());
        }
        if order == 0 {
            prop_assert_eq!(res.status, Status::Exact);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn order0_formula_matches_solver(terms in small_series(0, 18), twist in 0u32..=2) {
        let r = single(3, 0, 5, 18);
        let f = build(&r, &terms);
        let general = tp_infty(&f, twist, &TpMode::General(DecomposeOptions::default())).unwrap();
        let direct = tp_infty(&f, twist, &TpMode::Order0).unwrap();
        prop_assert_eq!(&general.series, &direct.series);
        prop_assert_eq!(general.window, direct.window);
    }

    #[test]
    fn hecke_commutes_with_frobenius(terms in small_series(0, 4)) {
        let r = single(3, 1, 4, 12);
        let f = build(&r, &terms);
        let opts = TpMode::General(DecomposeOptions::default());
        let t_phi = tp_infty(&f.frobenius().unwrap(), 0, &opts).unwrap();
        let phi_t = tp_infty(&f, 0, &opts).unwrap().series.frobenius().unwrap();
        let cap = t_phi.window.weight_cap.unwrap();
        let vars = &r.vars;
        let a = t_phi.series.filter(|m| vars.weight(m) <= cap);
        let b = phi_t.filter(|m| vars.weight(m) <= cap);
        prop_assert_eq!(a, b);
    }
}
