use jrt::hecke::{self, HyperbolicPlane};
use jrt::plocal::qi;
use jrt::{Budget, FieldConfig, XLaurent, Q};
use num_traits::One;

fn cfg(p: u64) -> FieldConfig {
    FieldConfig::new(p).unwrap()
}

fn laurent(t: &[(i64, i64)]) -> XLaurent {
    XLaurent::from_terms(t.iter().map(|&(k, c)| (k, qi(c))))
}

fn isotropic_points(d: u32, q: i64) -> i64 {
    let s = |k: u32| if k % 2 == 0 { 1 } else { -1 };
    (q.pow(d) - s(d)) * (q.pow(d - 1) - s(d - 1)) / (q * q - 1)
}

#[test]
fn volume_constants() {
    for p in [3u64, 5, 7] {
        let c = cfg(p);
        let q = p as i64;
        for n in 1..=3 {
            assert_eq!(hecke::c_r(c, n, 1).unwrap(), 1);
            assert_eq!(hecke::c_prime(c, n).unwrap() as i64, q.pow(2 * n as u32) - 1);
        }
        for n in 2..=3u32 {
            if p == 7 && n == 3 {
                continue;
            }
            assert_eq!(hecke::c_r(c, n as usize, 2).unwrap() as i64, isotropic_points(n, q));
        }
    }
    assert!(hecke::c_r(cfg(3), 3, 3).is_err());
}

#[test]
fn phi2_coefficients() {
    for p in [3u64, 5] {
        let got = hecke::phi2_expansion(cfg(p), 3, Budget::default()).unwrap();
        let expect: Vec<(i64, Q)> = vec![(0, qi(p as i64 + 1)), (1, qi(1)), (2, qi(0)), (3, qi(0))];
        assert_eq!(got, expect);
    }
}

#[test]
fn convolution_identity_value() {
    let c = hecke::convolution_at_identity(cfg(3), Budget::default()).unwrap();
    assert_eq!(c.lhs, c.rhs);
    assert_eq!(c.lhs, Q::one() / qi(4));
}

#[test]
fn satake_transforms() {
    for p in [3u64, 5] {
        let c = cfg(p);
        let q = p as i64;
        let b = Budget::default();
        assert_eq!(hecke::satake_gl2_minuscule(c, b).unwrap(), laurent(&[(-1, q), (1, q)]));
        assert_eq!(hecke::satake_u2_double_coset(c, 0, b).unwrap(), XLaurent::one());
        assert_eq!(hecke::satake_u2_double_coset(c, 1, b).unwrap(), laurent(&[(-1, q), (0, q - 1), (1, q)]));
        let phi2 = hecke::satake_phi2(c, b).unwrap();
        assert_eq!(phi2, laurent(&[(-1, q), (0, 2 * q), (1, q)]));
        // linearity: φ₂ = (q+1)·1_K + 1_{Kϖ^{(1,−1)}K}
        let combo = XLaurent::constant(qi(q + 1)) + hecke::satake_u2_double_coset(c, 1, b).unwrap();
        assert_eq!(phi2, combo);
        let w = hecke::bc_mismatch_check(c, b).unwrap();
        assert!(w.mismatch);
    }
}

#[test]
fn phi2_vanishes_far_out() {
    let h = HyperbolicPlane::new(cfg(3));
    assert_eq!(h.phi2(&h.mu(2), Budget::default()).unwrap(), qi(0));
    assert_eq!(h.phi2(&h.mu(-1), Budget::default()).unwrap(), qi(1));
}

#[test]
fn lattice_double_coset_n1() {
    for p in [3u64, 5] {
        let (all, orbit, equal) = hecke::kfk_lattices_n1(cfg(p), Budget::default()).unwrap();
        assert!(equal);
        assert_eq!(all, orbit);
        assert_eq!(all as u64, p + 1);
    }
}
