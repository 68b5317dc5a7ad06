use jrt::lattice::{hnf, intermediate_lattices, intermediate_lattices_brute, smith_exponents, window_lattices};
use jrt::linalg::lift_q;
use jrt::orbits::{random_gl, random_gl_o, rng, sample_lattice_pair};
use jrt::plocal::{p_pow, qi};
use jrt::{Budget, FNumber, FieldConfig, Lattice, Matrix, Scalar, Q};
use proptest::prelude::*;

fn cfg(p: u64) -> FieldConfig {
    FieldConfig::new(p).unwrap()
}

fn budget() -> Budget {
    Budget::default()
}

/// Number of subspaces of F_Q^m, summed over all dimensions.
fn all_subspaces(qq: u64, m: u32) -> u64 {
    let gauss = |k: u32| -> u64 {
        let mut num = 1u64;
        let mut den = 1u64;
        for i in 0..k {
            num *= qq.pow(m - i) - 1;
            den *= qq.pow(i + 1) - 1;
        }
        num / den
    };
    (0..=m).map(gauss).sum()
}

#[test]
fn lattices_between_pi_and_one_are_subspaces() {
    for p in [3u64, 5] {
        let c = cfg(p);
        for m in 1..=3usize {
            let top = Lattice::<Q>::standard(c, m);
            let got = intermediate_lattices(&top.scale_pi(1), &top, budget(), |_| true).unwrap().len() as u64;
            assert_eq!(got, all_subspaces(p, m as u32), "Q_{p}, m = {m}");
        }
        for m in 1..=2usize {
            let top = Lattice::<FNumber>::standard(c, m);
            let got = intermediate_lattices(&top.scale_pi(1), &top, budget(), |_| true).unwrap().len() as u64;
            assert_eq!(got, all_subspaces(p * p, m as u32), "F over Q_{p}, m = {m}");
        }
    }
}

#[test]
fn rank_one_window() {
    // only ϖ^k O, |k| ≤ b
    let c = cfg(3);
    for b in 0..4 {
        assert_eq!(window_lattices::<Q>(c, 1, b, budget()).unwrap().len() as i64, 2 * b + 1);
        assert_eq!(window_lattices::<FNumber>(c, 1, b, budget()).unwrap().len() as i64, 2 * b + 1);
    }
}

#[test]
fn budget_is_enforced() {
    let c = cfg(3);
    let top = Lattice::<Q>::standard(c, 3);
    let r = intermediate_lattices(&top.scale_pi(4), &top, Budget { exp: 6 }, |_| true);
    assert!(matches!(r, Err(jrt::Error::BudgetExceeded { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sandwich_matches_brute_force(seed in 0u64..10_000) {
        let c = cfg(3);
        let (lo, hi) = sample_lattice_pair::<Q>(c, seed, 2, 2).unwrap();
        let mut fast = intermediate_lattices(&lo, &hi, budget(), |_| true).unwrap();
        let mut slow = intermediate_lattices_brute(&lo, &hi, budget()).unwrap();
        fast.sort();
        slow.sort();
        prop_assert_eq!(&fast, &slow);
        prop_assert!(fast.iter().all(|m| hi.contains(m) && m.contains(&lo)));
    }

    #[test]
    fn hnf_ignores_change_of_basis(seed in 0u64..10_000) {
        let c = cfg(5);
        let mut r = rng(seed);
        let g = random_gl(&mut r, c, 3, 2);
        let u = random_gl_o(&mut r, c, 3, 2);
        prop_assert_eq!(hnf(&g, 5).unwrap(), hnf(&g.mul(&u), 5).unwrap());
    }

    #[test]
    fn smith_exponents_sum_to_det_valuation(seed in 0u64..10_000) {
        let c = cfg(3);
        let mut r = rng(seed);
        let g = random_gl(&mut r, c, 3, 3);
        let e = smith_exponents(&g, 3).unwrap();
        prop_assert_eq!(e.iter().sum::<i64>(), Scalar::val(&g.det(), 3).unwrap());
        prop_assert!(e.windows(2).all(|w| w[0] <= w[1]));
        // invariant under GL_3(Z_p) on both sides
        let a = random_gl_o(&mut r, c, 3, 2);
        let b = random_gl_o(&mut r, c, 3, 2);
        prop_assert_eq!(smith_exponents(&a.mul(&g).mul(&b), 3).unwrap(), e);
    }

    #[test]
    fn sum_intersection_and_duals(seed in 0u64..10_000) {
        let c = cfg(3);
        let mut r = rng(seed);
        let l = Lattice::<Q>::new(c, &random_gl(&mut r, c, 2, 2)).unwrap();
        let m = Lattice::<Q>::new(c, &random_gl(&mut r, c, 2, 2)).unwrap();
        let s = l.sum(&m);
        let i = l.intersect(&m);
        prop_assert!(s.contains(&l) && s.contains(&m) && l.contains(&i) && m.contains(&i));
        // colength(L + M / L) = colength(M / L ∩ M)
        prop_assert_eq!(s.colength(&l), m.colength(&i));
        prop_assert_eq!(l.dual_std().dual_std(), l.clone());
        if l.contains(&m) {
            prop_assert!(m.dual_std().contains(&l.dual_std()));
        }
        prop_assert_eq!(s.dual_std(), l.dual_std().intersect(&m.dual_std()));
    }
}

#[test]
fn hermitian_dual_and_types() {
    // hyperbolic plane (e, f) = 1: O e ⊕ ϖ^a O f has L^∨ = ϖ^{-a} O e ⊕ O f
    let c = cfg(3);
    let z = FNumber::from_q(qi(0));
    let o = FNumber::from_q(qi(1));
    let gram = Matrix::from_rows(vec![vec![z.clone(), o.clone()], vec![o.clone(), z.clone()]]);
    for a in 0..3i64 {
        let l = Lattice::<FNumber>::new(c, &lift_q(&Matrix::diag(&[qi(1), p_pow(3, a)]))).unwrap();
        let expect = Lattice::<FNumber>::new(c, &lift_q(&Matrix::diag(&[p_pow(3, -a), qi(1)]))).unwrap();
        assert_eq!(l.dual(&gram).unwrap(), expect);
        let inv = l.invariants(&gram).unwrap();
        assert_eq!(inv.is_selfdual(), a == 0);
        assert_eq!(inv.is_vertex(), a <= 1);
    }
}
