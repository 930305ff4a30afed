use padic_core::{DivisionFailure, PadicConfig, PadicError};
use proptest::prelude::*;

fn cfg(p: u64, m: u32, e: u32, g: u32) -> PadicConfig {
    PadicConfig::new(p, m, e, g).unwrap()
}

#[test]
fn add_small_integers() {
    let c = cfg(5, 4, 0, 2);
    let s = c.add(c.from_i64(2), c.from_i64(3));
    assert_eq!(c.canonical(s), 5);
}

#[test]
fn inverse_of_two_mod_25() {
    let c = cfg(5, 2, 0, 0);
    let x = c.inv_unit(c.from_i64(2)).unwrap();
    assert_eq!(c.canonical(x), 13);
}

#[test]
fn double_denominator_overflows() {
    let c = cfg(5, 3, 1, 2);
    let x = c.from_frac(1, 5).unwrap();
    assert!(matches!(c.mul(x, x), Err(PadicError::DenominatorOverflow { .. })));
}

#[test]
fn non_unit_has_no_inverse() {
    let c = cfg(5, 3, 0, 2);
    assert_eq!(c.inv_unit(c.from_i64(10)).unwrap_err(), PadicError::NotAUnit);
}

#[test]
fn exact_division_examples() {
    let c = cfg(5, 4, 0, 3);
    assert_eq!(c.to_signed_int(c.div_exact_p(c.from_i64(25), 2).unwrap()), Some(1));
    assert_eq!(
        c.div_exact_p(c.from_i64(7), 1).unwrap_err(),
        PadicError::NotDivisible { k: 1, cause: DivisionFailure::NonIdentity }
    );
    assert_eq!(c.to_signed_int(c.div_exact_p(c.from_i64(-30), 1).unwrap()), Some(-6));
}

#[test]
fn division_beyond_guard_is_flagged() {
    let c = cfg(5, 4, 0, 1);
    let err = c.div_exact_p(c.from_i64(7), 2).unwrap_err();
    assert_eq!(err, PadicError::NotDivisible { k: 2, cause: DivisionFailure::InsufficientGuard });
}

#[test]
fn delta_const_examples() {
    let c = cfg(5, 4, 0, 2);
    assert_eq!(c.to_signed_int(c.delta_const(c.from_i64(2)).unwrap()), Some(-6));
    assert!(c.is_zero(c.delta_const(c.zero()).unwrap()));
    assert!(c.is_zero(c.delta_const(c.one()).unwrap()));
    // (7 - 7^5)/5 = -3360, reduced mod 5^4
    let d = c.delta_const(c.from_i64(7)).unwrap();
    assert_eq!(c.canonical(d), (-3360i64).rem_euclid(625) as u64);
}

#[test]
fn cp_poly_examples() {
    let c = cfg(5, 6, 0, 2);
    assert_eq!(c.to_signed_int(c.cp_poly(c.one(), c.one()).unwrap()), Some(-6));
    assert_eq!(c.to_signed_int(c.cp_poly(c.from_i64(2), c.from_i64(3)).unwrap()), Some(-570));
    assert!(c.is_zero(c.cp_poly(c.from_i64(41), c.zero()).unwrap()));
}

#[test]
fn hensel_examples() {
    let c = cfg(5, 2, 0, 2);
    let u = c.hensel_u(c.from_i64(-2)).unwrap();
    assert_eq!(c.canonical(u), 2);
    let c1 = cfg(5, 1, 0, 2);
    assert_eq!(c1.canonical(c1.hensel_u(c1.one()).unwrap()), 1);
    assert_eq!(c1.hensel_u(c1.zero()).unwrap_err(), PadicError::NotAUnit);
}

#[test]
fn hensel_root_is_stable_under_more_precision() {
    for ap in [-2i64, 1, 3, 4, -7] {
        let lo = cfg(5, 6, 0, 4);
        let hi = cfg(5, 7, 0, 4);
        let ul = lo.hensel_u(lo.from_i64(ap)).unwrap();
        let uh = hi.hensel_u(hi.from_i64(ap)).unwrap();
        assert_eq!(lo.canonical(ul), hi.canonical(uh) % 5u64.pow(6));
        let q = lo.add(lo.sub(lo.mul_int(lo.mul(ul, ul).unwrap(), 5), lo.mul_int(ul, ap)), lo.one());
        assert!(lo.is_zero(q));
    }
}

#[test]
fn fractions_and_display() {
    let c = cfg(5, 4, 2, 4);
    let x = c.from_frac(3, 25).unwrap();
    assert_eq!(c.valuation(x), Some(-2));
    assert_eq!(c.display(x), "3/5^2");
    assert!(c.from_frac(1, 125).is_err());
    let y = c.mul_int(x, 25);
    assert_eq!(c.to_signed_int(y), Some(3));
}

#[test]
fn binomials_match_integers() {
    let c = cfg(5, 8, 1, 4);
    for n in 0..40u64 {
        let mut row = vec![1u128];
        for k in 1..=n {
            row.push(row[k as usize - 1] * (n - k + 1) as u128 / k as u128);
        }
        for k in 0..=n {
            let b = c.binomial(n, k);
            let want = (row[k as usize] % 5u128.pow(8)) as i64;
            assert!(c.eq(b, c.from_i64(want)), "C({n},{k})");
        }
    }
    // C(-3, 2) = 6
    assert_eq!(c.to_signed_int(c.binomial_signed(-3, 2)), Some(6));
    assert_eq!(c.to_signed_int(c.binomial_signed(-3, 3)), Some(-10));
}

#[test]
fn conversion_between_denominators() {
    let a = cfg(5, 4, 1, 3);
    let b = cfg(5, 4, 3, 3);
    let x = a.from_frac(7, 5).unwrap();
    let y = b.convert_from(&a, x).unwrap();
    assert!(b.eq(y, b.from_frac(7, 5).unwrap()));
    let back = a.convert_from(&b, y).unwrap();
    assert!(a.eq(back, x));
    let z = b.from_frac(1, 125).unwrap();
    assert!(a.convert_from(&b, z).is_err());
}

#[test]
fn decimal_round_trip() {
    let c = cfg(5, 3, 1, 2);
    let x = c.from_frac(-4, 5).unwrap();
    let s = c.to_decimal(x);
    assert!(c.eq(c.from_decimal(&s).unwrap(), x));
    assert!(c.from_decimal("625").is_err());
}

#[test]
fn small_prime_is_flagged() {
    assert!(cfg(3, 4, 0, 2).small_prime_warning());
    assert!(!cfg(5, 4, 0, 2).small_prime_warning());
    assert!(PadicConfig::new(4, 2, 0, 0).is_err());
    assert!(PadicConfig::new(5, 20, 5, 5).is_err());
}

proptest! {
    #[test]
    fn ring_axioms(a in any::<i64>(), b in any::<i64>(), d in any::<i64>(), e in 0u32..3) {
        let c = cfg(5, 5, e, 2 * e + 2);
        let (x, y, z) = (c.from_i64(a), c.from_i64(b), c.from_i64(d));
        prop_assert!(c.eq(c.add(x, y), c.add(y, x)));
        prop_assert!(c.eq(c.mul(x, y).unwrap(), c.mul(y, x).unwrap()));
        let l = c.mul(c.mul(x, y).unwrap(), z).unwrap();
        let r = c.mul(x, c.mul(y, z).unwrap()).unwrap();
        prop_assert!(c.eq(l, r));
        let l = c.mul(x, c.add(y, z)).unwrap();
        let r = c.add(c.mul(x, y).unwrap(), c.mul(x, z).unwrap());
        prop_assert!(c.eq(l, r));
        prop_assert!(c.is_zero(c.add(x, c.neg(x))));
    }

    #[test]
    fn fractions_multiply_exactly(a in -500i64..500, b in 1i64..60, d in -500i64..500) {
        let c = cfg(5, 5, 2, 4);
        let x = c.from_frac(a, b).unwrap();
        let y = c.from_i64(d);
        let prod = c.mul(x, y).unwrap();
        prop_assert!(c.eq(prod, c.from_frac(a * d, b).unwrap()));
    }

    #[test]
    fn unit_inverse(a in any::<i64>()) {
        let c = cfg(7, 5, 1, 3);
        prop_assume!(a.rem_euclid(7) != 0);
        let x = c.from_i64(a);
        let y = c.inv_unit(x).unwrap();
        prop_assert!(c.eq(c.mul(x, y).unwrap(), c.one()));
    }

    #[test]
    fn delta_sum_rule(a in any::<i32>(), b in any::<i32>()) {
        let c = cfg(5, 6, 0, 3);
        let (x, y) = (c.from_i64(a as i64), c.from_i64(b as i64));
        let lhs = c.delta_const(c.add(x, y)).unwrap();
        let rhs = c.add(
            c.add(c.delta_const(x).unwrap(), c.delta_const(y).unwrap()),
            c.cp_poly(x, y).unwrap(),
        );
        prop_assert!(c.eq(lhs, rhs));
    }

    #[test]
    fn delta_product_rule(a in any::<i32>(), b in any::<i32>()) {
        let c = cfg(5, 6, 0, 3);
        let (x, y) = (c.from_i64(a as i64), c.from_i64(b as i64));
        let (dx, dy) = (c.delta_const(x).unwrap(), c.delta_const(y).unwrap());
        let lhs = c.delta_const(c.mul(x, y).unwrap()).unwrap();
        let xp = c.pow(x, 5).unwrap();
        let yp = c.pow(y, 5).unwrap();
        let rhs = c.add(
            c.add(c.mul(xp, dy).unwrap(), c.mul(yp, dx).unwrap()),
            c.mul_int(c.mul(dx, dy).unwrap(), 5),
        );
        prop_assert!(c.eq(lhs, rhs));
    }

    #[test]
    fn constant_frobenius_is_identity(a in any::<i64>()) {
        let c = cfg(7, 5, 0, 2);
        let x = c.from_i64(a);
        let phi = c.add(c.pow(x, 7).unwrap(), c.mul_int(c.delta_const(x).unwrap(), 7));
        prop_assert!(c.eq(phi, x));
    }
}
