use jrt::finite::{self, enumerate_isotropic, enumerate_subspaces, unitary_order, unitary_order_brute, FinHermSpace, Fq2};

fn fq2(p: u64) -> Fq2 {
    Fq2::new(p).unwrap()
}

/// Isotropic points of the hermitian variety in PG(d−1, q²).
fn hermitian_points(d: u32, q: i64) -> i64 {
    let s = |k: u32| if k % 2 == 0 { 1 } else { -1 };
    (q.pow(d) - s(d)) * (q.pow(d - 1) - s(d - 1)) / (q * q - 1)
}

#[test]
fn isotropic_point_counts() {
    for p in [3u64, 5, 7] {
        let f = fq2(p);
        for d in 2..=3u32 {
            if p == 7 && d == 3 {
                continue;
            }
            let got = enumerate_isotropic(&FinHermSpace::standard(f, d as usize), 1).unwrap().len() as i64;
            assert_eq!(got, hermitian_points(d, p as i64), "q = {p}, d = {d}");
        }
    }
    assert_eq!(enumerate_isotropic(&FinHermSpace::standard(fq2(3), 4), 1).unwrap().len() as i64, hermitian_points(4, 3));
}

#[test]
fn lagrangians_of_dim_four() {
    // maximal isotropic subspaces of a 4-dim hermitian space: (q+1)(q³+1)
    let q = 3;
    let got = enumerate_isotropic(&FinHermSpace::standard(fq2(q), 4), 2).unwrap().len() as u64;
    assert_eq!(got, (q + 1) * (q * q * q + 1));
}

#[test]
fn subspace_counts_are_gaussian_binomials() {
    let f = fq2(3);
    let qq = 9u64;
    assert_eq!(enumerate_subspaces(&f, 3, 1, 1 << 22).unwrap().len() as u64, qq * qq + qq + 1);
    assert_eq!(enumerate_subspaces(&f, 3, 2, 1 << 22).unwrap().len() as u64, qq * qq + qq + 1);
    assert_eq!(enumerate_subspaces(&f, 2, 1, 1 << 22).unwrap().len() as u64, qq + 1);
}

#[test]
fn unitary_group_orders() {
    assert_eq!(unitary_order(1, 3), 4);
    assert_eq!(unitary_order(2, 3), 96);
    assert_eq!(unitary_order(3, 3), 3 * 3 * 3 * 4 * 8 * 28);
    for p in [3u64, 5] {
        let f = fq2(p);
        for d in 1..=2 {
            let brute = unitary_order_brute(&FinHermSpace::standard(f, d)).unwrap();
            assert_eq!(brute as u128, unitary_order(d, p), "q = {p}, d = {d}");
        }
    }
}

#[test]
fn witt_orbits_on_vectors() {
    // nonzero vectors of a fixed norm form one orbit, so orbits = distinct norms (= q: every element of F_q)
    for (p, d) in [(3u64, 2usize), (3, 3), (5, 2)] {
        let (norms, orbits) = finite::vector_norm_orbits(fq2(p), d).unwrap();
        assert_eq!(norms, orbits);
        assert_eq!(norms as u64, p);
    }
}

#[test]
fn mirabolic_index_formula() {
    for p in [3u64, 5] {
        let m = finite::mirabolic_index(fq2(p));
        let q2 = p * p;
        assert_eq!(m.gl2_order, (q2 * q2 - 1) * (q2 * q2 - q2));
        assert_eq!(m.mirabolic_order, q2 * (q2 - 1));
        assert_eq!(m.index, (q2 + 1) * (q2 - 1));
    }
}

#[test]
fn stabilizer_and_lagrangian_orbit_counts() {
    let f = fq2(3);
    // r odd or 0, r = n + 1 even, 1 ≤ r ≤ n even
    for (n, r, expect) in [(1, 0, 1), (2, 1, 1), (1, 2, 1), (3, 4, 1), (2, 2, 2), (3, 2, 2)] {
        assert_eq!(finite::stabilizer_orbits(f, n, r).unwrap().orbits, expect, "n = {n}, r = {r}");
    }
    for r in 1..=3 {
        assert_eq!(finite::lagrangian_orbits(f, r).unwrap().orbits, 1);
    }
}

#[test]
fn coset_split_sizes() {
    let f = fq2(3);
    let c = finite::coset_decomposition(f, 2, 2).unwrap();
    assert!(c.disjoint && c.covers && c.criterion_matches);
    // isotropic lines in 3 dims: q³ + 1; those orthogonal to ū: q + 1
    assert_eq!(c.total as i64, hermitian_points(3, 3));
    assert_eq!(c.plus, 4);
    assert_eq!(c.minus, 24);
    assert!(finite::coset_decomposition(f, 2, 1).is_err());
}

#[test]
fn double_coset_n1() {
    for p in [3u64, 5] {
        let s = finite::kfk_n1(fq2(p)).unwrap();
        assert!(s.equal);
        assert_eq!(s.left as u64, p + 1);
    }
}
