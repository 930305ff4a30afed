use delta_char::*;
use expansions::FSharpCase;
use padic_core::PadicConfig;
use proptest::prelude::*;

fn good_curve() -> impl Strategy<Value = (u64, i64, i64)> {
    (prop::sample::select(vec![5u64, 7, 11]), -50i64..=50, -50i64..=50).prop_filter("good reduction", |&(p, a, b)| {
        let p = p as i64;
        (4 * a * a * a + 27 * b * b).rem_euclid(p) != 0
    })
}

/// Σ_x (1 + (f(x)/p)) + 1 with the Legendre symbol by Euler's criterion.
fn count_by_euler(a: i64, b: i64, p: u64) -> u64 {
    let p = p as i64;
    let legendre = |v: i64| -> i64 {
        let v = v.rem_euclid(p);
        if v == 0 {
            return 0;
        }
        let (mut r, mut base, mut e) = (1i64, v, (p - 1) / 2);
        while e > 0 {
            if e & 1 == 1 {
                r = r * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        if r == 1 {
            1
        } else {
            -1
        }
    };
    (1 + (0..p).map(|x| 1 + legendre(x * x * x + a * x + b)).sum::<i64>()) as u64
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn random_curves_give_formal_groups((p, a, b) in good_curve()) {
        let cfg = PadicConfig::for_order(p, 4, 1, 0).unwrap();
        let curve = WeierstrassCurve::new(&cfg, a, b).unwrap();
        let law = formal_group_law(&curve, 9).unwrap();
        prop_assert_eq!(axiom_failure(&law).unwrap(), None);
        let log = formal_logarithm(&law).unwrap();
        prop_assert_eq!(log_additivity_mismatch(&law, &log).unwrap(), None);
    }

    #[test]
    fn point_counts_agree_and_respect_hasse((p, a, b) in good_curve()) {
        prop_assert_eq!(point_count(a, b, p), count_by_euler(a, b, p));
        let t = trace_of_frobenius(a, b, p);
        prop_assert!((t * t) as u64 <= 4 * p);
    }

    #[test]
    fn trace_makes_the_character_integral((p, a, b) in good_curve().prop_filter("p < 11", |c| c.0 < 11)) {
        let cfg = PadicConfig::for_order(p, 3, 2, 2).unwrap();
        let curve = WeierstrassCurve::new(&cfg, a, b).unwrap();
        let t = trace_of_frobenius(a, b, p);
        let d = 2 * p as i64;
        let fg = FormalGroupData::from_curve(&curve, d, FSharpCase::NonCm { a_p: cfg.from_i64(t) }).unwrap();
        let psi = delta_character(&fg).unwrap();
        prop_assert!(check_additivity(&psi.series, &fg.law, 8).unwrap().pass);
        let off = FormalGroupData::from_curve(&curve, d, FSharpCase::NonCm { a_p: cfg.from_i64(t + 1) }).unwrap();
        let is_integrality_failure = matches!(delta_character(&off), Err(CharError::IntegralityFailure { .. }));
        prop_assert!(is_integrality_failure);
    }
}
