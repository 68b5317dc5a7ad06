use jrt::plocal::{eta_tilde_s, p_pow, qi};
use jrt::{FNumber, FieldConfig, Scalar, XLaurent, Q};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn cfg(p: u64) -> FieldConfig {
    FieldConfig::new(p).unwrap()
}

/// p^k (a + bδ) with a, b not both divisible by p unless zero.
fn fnum(c: FieldConfig) -> impl Strategy<Value = FNumber> {
    (-30i64..30, -30i64..30, -3i64..4).prop_map(move |(a, b, k)| c.fi(a, b) * FNumber::from_q(p_pow(c.p(), k)))
}

fn laurent() -> impl Strategy<Value = XLaurent> {
    prop::collection::vec((-4i64..5, -9i64..10), 0..5)
        .prop_map(|t| XLaurent::from_terms(t.into_iter().map(|(k, c)| (k, qi(c)))))
}

proptest! {
    #[test]
    fn field_operations(x in fnum(cfg(3)), y in fnum(cfg(3)), z in fnum(cfg(3))) {
        prop_assert_eq!((x.clone() * y.clone()) * z.clone(), x.clone() * (y.clone() * z.clone()));
        prop_assert_eq!(x.clone() * (y.clone() + z.clone()), x.clone() * y.clone() + x.clone() * z.clone());
        if !x.is_zero() {
            prop_assert_eq!(x.clone() * x.inv(), FNumber::one());
        }
    }

    #[test]
    fn conjugation_and_norm(x in fnum(cfg(5)), y in fnum(cfg(5))) {
        prop_assert_eq!(x.conj().conj(), x.clone());
        prop_assert_eq!((x.clone() * y.clone()).conj(), x.conj() * y.conj());
        prop_assert_eq!((x.clone() * y.clone()).norm(), x.norm() * y.norm());
        prop_assert_eq!(FNumber::from_q(x.norm()), x.clone() * x.conj());
        prop_assert_eq!(FNumber::from_q(x.trace()), x.clone() + x.conj());
    }

    #[test]
    fn valuation_is_additive(x in fnum(cfg(7)), y in fnum(cfg(7))) {
        prop_assume!(!x.is_zero() && !y.is_zero());
        let p = 7;
        let v = |z: &FNumber| Scalar::val(z, p).unwrap();
        prop_assert_eq!(v(&(x.clone() * y.clone())), v(&x) + v(&y));
        // unramified: the norm has even valuation
        prop_assert_eq!(jrt::plocal::val_q(&x.norm(), p).unwrap(), 2 * v(&x));
        let s = x.clone() + y.clone();
        if !s.is_zero() {
            prop_assert!(v(&s) >= v(&x).min(v(&y)));
        }
    }

    #[test]
    fn laurent_ring(a in laurent(), b in laurent(), c in laurent()) {
        prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        prop_assert_eq!(a.clone() * b.clone(), b.clone() * a.clone());
        prop_assert_eq!((a.clone() * b.clone()).value_at_one(), a.value_at_one() * b.value_at_one());
        // product rule for d/ds at s = 0
        let lhs = (a.clone() * b.clone()).d_at_zero();
        let rhs = a.d_at_zero() * b.value_at_one() + a.value_at_one() * b.d_at_zero();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn reduce_mod_is_idempotent_and_congruent(n in -500i64..500, d in 1i64..50, k in 0i64..4) {
        let p = 3;
        prop_assume!(d % 3 != 0);
        let x: Q = Q::new(n.into(), d.into());
        let r = x.reduce_mod(p, k);
        prop_assert_eq!(r.reduce_mod(p, k), r.clone());
        let diff = x - r;
        prop_assert!(diff.is_zero() || jrt::plocal::val_q(&diff, p).unwrap() >= k);
    }
}

#[test]
fn eta_tilde_is_sign_times_power() {
    // η̃_s(z) = (−1)^{v(z)} |z|^{s} in X = q^{-s}: (−X)^{v} up to orientation.
    let c = cfg(3);
    for v in -3i64..=3 {
        let z = c.fi(1, 1) * FNumber::from_q(p_pow(3, v));
        let e = eta_tilde_s(&z, 3).unwrap();
        let expect_sign = if v % 2 == 0 { qi(1) } else { qi(-1) };
        assert_eq!(e.value_at_one(), expect_sign, "v = {v}");
        assert_eq!(e.terms().count(), 1);
    }
}

#[test]
fn bad_primes_rejected() {
    for p in [0, 1, 2, 4, 9, 15] {
        assert!(FieldConfig::new(p).is_err(), "{p}");
    }
    for p in [3, 5, 7, 11, 13] {
        assert!(FieldConfig::new(p).is_ok(), "{p}");
    }
}

#[test]
fn delta_is_a_nonsquare_unit() {
    for p in [3u64, 5, 7, 11] {
        let c = cfg(p);
        let d = c.delta();
        let sq = (d.clone() * d.clone()).re().clone();
        // δ² ∈ Q_p, a unit that is not a square mod p
        let r = sq.reduce_mod(p, 1);
        let r = r.to_integer();
        let rr: i64 = r.try_into().unwrap();
        assert!((0..p as i64).all(|x| (x * x - rr).rem_euclid(p as i64) != 0), "p = {p}");
        assert_eq!(Scalar::val(&d, p), Some(0));
    }
}
