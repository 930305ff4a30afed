use std::collections::BTreeMap;
use std::time::Instant;

use newform_coeffs::*;
use num_bigint::BigInt;
use padic_core::PadicConfig;
use proptest::prelude::*;

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// p − #{(x, y) mod p : y² + a1·xy + a3·y = x³ + a2·x² + a4·x + a6}
fn point_count_ap(p: i64, a: [i64; 5]) -> i64 {
    let [a1, a2, a3, a4, a6] = a;
    let mut affine = 0;
    for x in 0..p {
        for y in 0..p {
            let lhs = y * y + a1 * x * y + a3 * y;
            let rhs = x * x * x + a2 * x * x + a4 * x + a6;
            if (lhs - rhs).rem_euclid(p) == 0 {
                affine += 1;
            }
        }
    }
    p - affine
}

#[test]
fn level11_leading_coefficients() {
    let t = NewformProfile::level11().table(7);
    assert_eq!(t.a, ints(&[1, -2, -1, 2, 1, 2, -2]));
}

#[test]
fn empty_product() {
    let t = eta_expand(&EtaProduct::new(1, &[(1, 0)]), 1, 6);
    assert_eq!(t.a, ints(&[1, 0, 0, 0, 0, 0]));
}

#[test]
fn negative_exponent_inverts() {
    // (1-q)^1 (1-q)^-1 = 1
    let t = eta_expand(&EtaProduct::new(1, &[(1, 1), (1, -1)]), 1, 30);
    assert_eq!(t.get(1), BigInt::from(1));
    assert!((2..=30).all(|n| t.get(n) == BigInt::from(0)));
    // 1/Π(1-q^n) counts partitions
    let parts = EtaProduct::new(0, &[(1, -1)]).raw_series(10);
    assert_eq!(parts, ints(&[1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]));
}

#[test]
fn eta_tables_match_point_counts() {
    let t11 = NewformProfile::level11().table(200);
    let t32 = NewformProfile::level32().table(200);
    for p in primes_up_to(200) {
        if p != 11 {
            let want = point_count_ap(p as i64, [0, -1, 1, -10, -20]);
            assert_eq!(t11.get_i64(p as usize), want, "level 11, p = {p}");
        }
        if p != 2 {
            let want = point_count_ap(p as i64, [0, 0, 0, -1, 0]);
            assert_eq!(t32.get_i64(p as usize), want, "level 32, p = {p}");
        }
    }
    assert_eq!(t32.get_i64(5), -2);
    assert_eq!(t32.get_i64(7), 0);
}

#[test]
fn level32_recursion_and_cm_zeros() {
    let t = NewformProfile::level32().table(3000);
    assert!(check_recursion(&t).passed);
    assert_eq!(first_nonvanishing_prime(&t, 4, 3), None);
    // the even coefficients vanish too (a_2 = 0, level divisible by 2)
    assert!((1..=1500).all(|n| t.get_i64(2 * n) == 0));
}

#[test]
fn eta_and_recursion_agree() {
    let start = Instant::now();
    let n_max = 2000;
    let t = NewformProfile::level11().table(n_max);
    let report = check_recursion(&t);
    assert!(report.passed, "{report:?}");
    let primes: BTreeMap<u64, BigInt> = primes_up_to(n_max).into_iter().map(|l| (l, t.get(l as usize))).collect();
    let r = hecke_extend(&primes, 11, 2, n_max).unwrap();
    assert_eq!(r.provenance, Provenance::Recursion);
    assert_eq!(r.a, t.a);
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn extend_examples() {
    let mut primes = BTreeMap::new();
    for (l, a) in [(2, -2), (3, -1), (5, 1), (7, -2), (11, 1)] {
        primes.insert(l, BigInt::from(a));
    }
    let t = hecke_extend(&primes, 11, 2, 10).unwrap();
    assert_eq!(t.get_i64(4), 2);
    assert_eq!(t.get_i64(6), 2);
    assert!(hecke_extend(&primes, 11, 2, 12).is_ok());
    assert!(matches!(hecke_extend(&primes, 11, 2, 13), Err(NewformError::MissingPrime(13))));

    let full = NewformProfile::level11().table(121);
    assert_eq!(full.get_i64(121), 1);
}

#[test]
fn corrupted_table_fails_at_first_instance() {
    let mut t = NewformProfile::level11().table(50);
    t.a[3] = BigInt::from(3);
    let rep = check_recursion(&t);
    assert!(!rep.passed);
    assert_eq!(rep.first_failure, Some(RecursionFailure::PrimePower { l: 2, i: 2 }));

    let mut t = NewformProfile::level11().table(50);
    t.a[5] = BigInt::from(7);
    assert_eq!(check_recursion(&t).first_failure, Some(RecursionFailure::Multiplicative { n1: 2, n2: 3 }));
    t.a[0] = BigInt::from(2);
    assert_eq!(check_recursion(&t).first_failure, Some(RecursionFailure::Normalization));
}

#[test]
fn delta_table() {
    // a_n = δ_{n,1}: consistent below 4, and at any length when every prime divides the level
    let short = CoeffTable { level: 1, weight: 2, a: ints(&[1, 0, 0]), provenance: Provenance::File };
    assert!(check_recursion(&short).passed);
    let long = CoeffTable { level: 1, weight: 2, a: ints(&[1, 0, 0, 0]), provenance: Provenance::File };
    assert_eq!(check_recursion(&long).first_failure, Some(RecursionFailure::PrimePower { l: 2, i: 2 }));
    let mut a = vec![0i64; 40];
    a[0] = 1;
    let all_bad = CoeffTable {
        level: 2 * 3 * 5 * 7 * 11 * 13 * 17 * 19 * 23 * 29 * 31 * 37,
        weight: 2,
        a: ints(&a),
        provenance: Provenance::File,
    };
    assert!(check_recursion(&all_bad).passed);
}

#[test]
fn classical_eigen_property() {
    let t = NewformProfile::level11().table(400 * 13);
    for l in [2u64, 3, 7, 13] {
        let img = hecke_tml(&t.a, l, 2);
        assert!(img.valid >= 400);
        let al = t.get(l as usize);
        for n in 1..=400 {
            assert_eq!(img.b[n - 1], &al * t.get(n), "l = {l}, n = {n}");
        }
    }
    let mut c = vec![BigInt::from(0); 10];
    c[0] = BigInt::from(1);
    // b_1 = c_2 = 0, and b_2 = c_4 + 2·c_1 picks up the second term
    let img = hecke_tml(&c, 2, 2);
    assert_eq!(img.valid, 5);
    assert_eq!(img.b, ints(&[0, 2, 0, 0, 0]));
}

#[test]
fn weight_zero_action_on_serre_form() {
    // c_n = a_n / n for (n, p) = 1, else 0; T_0(l) c = l^-1 a_l c
    let (p, m) = (5u64, 6);
    let cfg = PadicConfig::new(p, m, 0, 4).unwrap();
    let t = NewformProfile::level11().table(300);
    let c: Vec<_> = (1..=300usize)
        .map(|n| {
            if (n as u64).is_multiple_of(p) {
                cfg.zero()
            } else {
                cfg.mul(cfg.from_bigint(&t.get(n)), cfg.inv_unit(cfg.from_i64(n as i64)).unwrap()).unwrap()
            }
        })
        .collect();
    for l in [2u64, 3, 7, 13] {
        let img = hecke_tml_padic(&cfg, &c, l, 0).unwrap();
        let k = cfg.mul(cfg.from_bigint(&t.get(l as usize)), cfg.inv_unit(cfg.from_i64(l as i64)).unwrap()).unwrap();
        for n in 1..=img.valid {
            assert!(cfg.eq(img.b[n - 1], cfg.mul(k, c[n - 1]).unwrap()), "l = {l}, n = {n}");
        }
    }
    let ints = t.to_padic(&cfg);
    let img = hecke_tml_padic(&cfg, &ints, 3, 2).unwrap();
    let a3 = cfg.from_i64(t.get_i64(3));
    assert!((1..=img.valid).all(|n| cfg.eq(img.b[n - 1], cfg.mul(a3, ints[n - 1]).unwrap())));
}

#[test]
fn p_identity_and_u_identity() {
    let t = NewformProfile::level11().table(5000);
    assert_eq!(check_p_identity(&t, 5, 1000), Ok(1000));
    let mut bad = t.clone();
    bad.a[49] += 1;
    assert_eq!(check_p_identity(&bad, 5, 1000), Err(10));

    let t32 = NewformProfile::level32().table(700);
    let cfg = PadicConfig::new(5, 6, 0, 4).unwrap();
    let u = cfg.hensel_u(cfg.from_i64(t32.get_i64(5))).unwrap();
    assert_eq!(check_u_identity(&cfg, &t32, 5, u, 4), Ok(()));
    let wrong = cfg.add(u, cfg.from_i64(625));
    assert!(check_u_identity(&cfg, &t32, 5, wrong, 4).is_err());
}

#[test]
fn reduction_types() {
    assert_eq!(NewformProfile::level11().reduction_type(5), ReductionType::NonCm);
    assert_eq!(NewformProfile::level32().reduction_type(5), ReductionType::CmSplit);
    assert_eq!(NewformProfile::level32().reduction_type(7), ReductionType::CmInert);
    assert!(NewformProfile::builtin("level32").is_some());
    assert!(NewformProfile::builtin("level37").is_none());
}

#[test]
fn table_file_gate() {
    let t = NewformProfile::level11().table(100);
    let text = table_to_json(&t).unwrap();
    let back = table_from_json(&text).unwrap();
    assert_eq!(back.a, t.a);
    assert_eq!(back.provenance, Provenance::File);
    let bad = text.replacen("\"2\"", "\"3\"", 1);
    assert!(matches!(table_from_json(&bad), Err(NewformError::Rejected(_))));
    let mut t2 = t.clone();
    t2.a[3] = BigInt::from(3);
    assert!(matches!(table_to_json(&t2), Err(NewformError::Rejected(_))));
    assert!(matches!(table_from_json("{\"format\":\"x\"}"), Err(NewformError::Schema(_))));
}

proptest! {
    #[test]
    fn extension_always_passes_recursion(aps in proptest::collection::vec(-20i64..20, 15), level in 1u64..60) {
        let primes: BTreeMap<u64, BigInt> = primes_up_to(50).into_iter().zip(aps).map(|(l, a)| (l, BigInt::from(a))).collect();
        let t = hecke_extend(&primes, level, 2, 50).unwrap();
        prop_assert!(check_recursion(&t).passed);
    }

    #[test]
    fn extension_is_an_eigen_table(aps in proptest::collection::vec(-20i64..20, 25)) {
        let primes: BTreeMap<u64, BigInt> = primes_up_to(100).into_iter().zip(aps).map(|(l, a)| (l, BigInt::from(a))).collect();
        // level 1 so every l is a good prime
        let t = hecke_extend(&primes, 1, 2, 100).unwrap();
        for l in [2u64, 3, 5, 7] {
            let img = hecke_tml(&t.a, l, 2);
            for n in 1..=img.valid {
                prop_assert_eq!(&img.b[n - 1], &(t.get(l as usize) * t.get(n)));
            }
        }
    }
}
