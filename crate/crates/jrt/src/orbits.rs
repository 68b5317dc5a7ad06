//! Hermitian spaces with a special vector, the symmetric space S, regular
//! semisimplicity, matching invariants and seeded samplers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{lift_q, unit_vector, Matrix};
use crate::plocal::{p_pow, qi, FNumber, FieldConfig, Scalar};

pub type FMatrix = Matrix<FNumber>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Split,
    Nonsplit,
}

impl Side {
    pub fn from_parity(v: i64) -> Side {
        if v.rem_euclid(2) == 0 {
            Side::Split
        } else {
            Side::Nonsplit
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Split => Side::Nonsplit,
            Side::Nonsplit => Side::Split,
        }
    }
}

/// (x, y) = y* G x.
pub fn pairing(gram: &FMatrix, x: &[FNumber], y: &[FNumber]) -> FNumber {
    let gx = gram.mul_vec(x);
    y.iter().zip(gx).fold(FNumber::zero(), |acc, (yi, gi)| acc + yi.conj() * gi)
}

use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermSpace {
    cfg: FieldConfig,
    gram: FMatrix,
}

impl HermSpace {
    pub fn new(cfg: FieldConfig, gram: FMatrix) -> Result<Self> {
        if !gram.is_square() || gram != gram.adjoint() {
            return Err(Error::Precondition("gram matrix is not hermitian".into()));
        }
        if gram.det().is_zero() {
            return Err(Error::DegenerateForm);
        }
        Ok(HermSpace { cfg, gram })
    }

    /// The standard split or nonsplit space of dimension m, whose last basis
    /// vector has norm ϖ^eps and whose other basis vectors are orthogonal.
    pub fn standard(cfg: FieldConfig, m: usize, side: Side, eps: u8) -> Self {
        assert!(m >= 2 && eps <= 1);
        let p = cfg.p();
        let e = eps as i64;
        let penult = match side {
            Side::Split => -p_pow(p, e),
            Side::Nonsplit => -p_pow(p, 1 - e),
        };
        let mut d: Vec<FNumber> = vec![FNumber::from_q(qi(1)); m - 2];
        d.push(FNumber::from_q(penult));
        d.push(FNumber::from_q(p_pow(p, e)));
        HermSpace { cfg, gram: Matrix::diag(&d) }
    }

    pub fn cfg(&self) -> FieldConfig {
        self.cfg
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &FMatrix {
        &self.gram
    }

    pub fn pair(&self, x: &[FNumber], y: &[FNumber]) -> FNumber {
        pairing(&self.gram, x, y)
    }

    /// Split iff the discriminant is a norm, i.e. has even valuation.
    pub fn side(&self) -> Side {
        Side::from_parity(Scalar::val(&self.gram.det(), self.cfg.p()).expect("nondegenerate"))
    }

    pub fn is_unitary(&self, g: &FMatrix) -> bool {
        g.adjoint().mul(&self.gram).mul(g) == self.gram
    }
}

/// A hermitian space of dimension n+1 with a special vector u of norm ϖ^eps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialSetup {
    pub space: HermSpace,
    pub u: Vec<FNumber>,
    pub eps: u8,
    /// Columns span the orthogonal complement of u.
    pub flat_basis: FMatrix,
}

impl SpecialSetup {
    pub fn new(space: HermSpace, u: Vec<FNumber>) -> Result<Self> {
        let p = space.cfg().p();
        let nu = space.pair(&u, &u);
        let eps = match Scalar::val(&nu, p) {
            Some(0) => 0,
            Some(1) => 1,
            _ => return Err(Error::Precondition("special vector must have norm of valuation 0 or 1".into())),
        };
        // kernel of x ↦ u* G x
        let row = Matrix::from_rows(vec![space.gram().adjoint().mul_vec(&u).iter().map(|x| x.conj()).collect()]);
        let flat_basis = kernel(&row);
        Ok(SpecialSetup { space, u, eps, flat_basis })
    }

    pub fn standard(cfg: FieldConfig, n: usize, side: Side, eps: u8) -> Self {
        let space = HermSpace::standard(cfg, n + 1, side, eps);
        let u = unit_vector(n + 1, n);
        SpecialSetup::new(space, u).expect("standard setup")
    }

    pub fn n(&self) -> usize {
        self.space.dim() - 1
    }

    pub fn u_norm(&self) -> FNumber {
        self.space.pair(&self.u, &self.u)
    }

    /// Gram matrix of the perp space in `flat_basis`.
    pub fn flat_gram(&self) -> FMatrix {
        self.flat_basis.adjoint().mul(self.space.gram()).mul(&self.flat_basis)
    }
}

/// Basis of the right kernel of `a`, as columns.
pub fn kernel(a: &FMatrix) -> FMatrix {
    let (r, piv) = a.rref();
    let n = a.cols();
    let free: Vec<usize> = (0..n).filter(|j| !piv.contains(j)).collect();
    let cols: Vec<Vec<FNumber>> = free
        .iter()
        .map(|&f| {
            let mut v = vec![FNumber::zero(); n];
            v[f] = FNumber::from_q(qi(1));
            for (i, &pc) in piv.iter().enumerate() {
                v[pc] = -r[(i, f)].clone();
            }
            v
        })
        .collect();
    Matrix::from_cols(&cols)
}

/// γ′ ↦ γ′ conj(γ′)^{-1}.
pub fn r_map(gp: &FMatrix) -> Result<FMatrix> {
    let inv = gp.conj().inverse().ok_or(Error::Singular)?;
    Ok(gp.mul(&inv))
}

/// r(γ1, γ2) = r(γ1^{-1} γ2).
pub fn r_map_pair(g1: &FMatrix, g2: &FMatrix) -> Result<FMatrix> {
    let inv = g1.inverse().ok_or(Error::Singular)?;
    r_map(&inv.mul(g2))
}

pub fn is_in_s(gamma: &FMatrix) -> bool {
    gamma.mul(&gamma.conj()).is_identity()
}

/// Matrix with columns v, γv, …, γ^{k-1}v.
pub fn krylov(gamma: &FMatrix, v: &[FNumber], k: usize) -> FMatrix {
    let mut cols = Vec::with_capacity(k);
    let mut cur = v.to_vec();
    for _ in 0..k {
        let next = gamma.mul_vec(&cur);
        cols.push(cur);
        cur = next;
    }
    Matrix::from_cols(&cols)
}

pub fn last_vector(m: usize) -> Vec<FNumber> {
    unit_vector(m, m - 1)
}

/// det(e, γe, …, γ^n e) with e the last standard basis vector.
pub fn delta_plus(gamma: &FMatrix) -> FNumber {
    let m = gamma.rows();
    delta_plus_vec(gamma, &last_vector(m))
}

pub fn delta_plus_vec(gamma: &FMatrix, e: &[FNumber]) -> FNumber {
    krylov(gamma, e, gamma.rows()).det()
}

/// Rows e*, e*γ, …, e*γ^n.
pub fn co_krylov(gamma: &FMatrix, k: usize) -> FMatrix {
    let m = gamma.rows();
    let mut rows = Vec::with_capacity(k);
    let mut cur: Vec<FNumber> = last_vector(m);
    for _ in 0..k {
        let next = gamma.vec_mul(&cur);
        rows.push(cur);
        cur = next;
    }
    Matrix::from_rows(rows)
}

pub fn is_rss_s(gamma: &FMatrix) -> bool {
    let m = gamma.rows();
    !delta_plus(gamma).is_zero() && !co_krylov(gamma, m).det().is_zero()
}

pub fn is_rss_u(g: &FMatrix, setup: &SpecialSetup) -> Result<bool> {
    if !setup.space.is_unitary(g) {
        return Err(Error::NotUnitary);
    }
    Ok(!krylov(g, &setup.u, setup.space.dim()).det().is_zero())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingInvariants {
    pub charpoly: Vec<FNumber>,
    pub pairing_seq: Vec<FNumber>,
}

pub fn invariants_s(gamma: &FMatrix) -> Result<MatchingInvariants> {
    if !is_rss_s(gamma) {
        return Err(Error::NotRss);
    }
    let m = gamma.rows();
    let e = last_vector(m);
    let k = krylov(gamma, &e, m);
    let pairing_seq = (0..m).map(|i| k[(m - 1, i)].clone()).collect();
    Ok(MatchingInvariants { charpoly: gamma.charpoly(), pairing_seq })
}

pub fn invariants_u(g: &FMatrix, setup: &SpecialSetup) -> Result<MatchingInvariants> {
    if !is_rss_u(g, setup)? {
        return Err(Error::NotRss);
    }
    let m = setup.space.dim();
    let nu = setup.u_norm();
    let k = krylov(g, &setup.u, m);
    let pairing_seq = (0..m).map(|i| setup.space.pair(&k.col(i), &setup.u) / nu.clone()).collect();
    Ok(MatchingInvariants { charpoly: g.charpoly(), pairing_seq })
}

/// s_k = e* γ^k e for |k| ≤ n, using s_{-k} = conj(s_k).
fn pairing_values(gamma: &FMatrix) -> Vec<FNumber> {
    let m = gamma.rows();
    let e = last_vector(m);
    let k = krylov(gamma, &e, m);
    (0..m).map(|i| k[(m - 1, i)].clone()).collect()
}

/// Gram matrix of the form attached to γ in the basis γ^i e, with (e, e) = beta:
/// entry (j, i) is beta·e*γ^{i-j}e.
pub fn krylov_gram(gamma: &FMatrix, beta: &FNumber) -> FMatrix {
    let s = pairing_values(gamma);
    let m = gamma.rows();
    Matrix::from_fn(m, m, |j, i| {
        let v = if i >= j { s[i - j].clone() } else { s[j - i].conj() };
        beta.clone() * v
    })
}

/// The unitary pair tautologically matching γ: g = γ acting on F^{n+1} with the
/// form for which (γ^i e, γ^j e) = ϖ^eps e*γ^{i-j}e, and u = e.
pub fn unitary_partner(cfg: FieldConfig, gamma: &FMatrix, eps: u8) -> Result<SpecialSetup> {
    if !is_rss_s(gamma) {
        return Err(Error::NotRss);
    }
    let m = gamma.rows();
    let beta = FNumber::from_q(p_pow(cfg.p(), eps as i64));
    let h = krylov_gram(gamma, &beta);
    let pinv = krylov(gamma, &last_vector(m), m).inverse().ok_or(Error::NotRss)?;
    let g = pinv.adjoint().mul(&h).mul(&pinv);
    SpecialSetup::new(HermSpace::new(cfg, g)?, last_vector(m))
}

/// Class of the hermitian space (with special vector of norm ϖ^eps) whose
/// unitary orbits match γ.
pub fn matching_side(cfg: FieldConfig, gamma: &FMatrix, eps: u8) -> Result<Side> {
    if !is_rss_s(gamma) {
        return Err(Error::NotRss);
    }
    let beta = FNumber::from_q(p_pow(cfg.p(), eps as i64));
    let d = krylov_gram(gamma, &beta).det();
    Ok(Side::from_parity(Scalar::val(&d, cfg.p()).ok_or(Error::NotRss)?))
}

/// Closed-form element of S_2 matching a rank-one unitary pair.
pub fn s_from_unitary_n1(cfg: FieldConfig, g: &FMatrix, setup: &SpecialSetup) -> Result<FMatrix> {
    if setup.space.dim() != 2 {
        return Err(Error::Unsupported("closed-form matching only in dimension 2".into()));
    }
    let inv = invariants_u(g, setup)?;
    let one = FNumber::from_q(qi(1));
    let d = inv.pairing_seq[1].clone();
    let tr = -inv.charpoly[1].clone();
    let det = inv.charpoly[0].clone();
    let a = tr - d.clone();
    let m = a.clone() * d.clone() - det;
    let denom = one.clone() - d.clone() * d.conj();
    if denom.is_zero() {
        return Err(Error::NotRss);
    }
    let z = m.clone() / denom;
    let w = if (z.clone() + one.clone()).is_zero() { cfg.delta() } else { one + z };
    let b = w;
    let c = m / b.clone();
    let gamma = Matrix::from_rows(vec![vec![a, b], vec![c, d]]);
    if !is_in_s(&gamma) {
        return Err(Error::Precondition("constructed element is not in S".into()));
    }
    Ok(gamma)
}

/// Cayley transform (1 + A)^{-1}(1 − A) of A = G^{-1}K with K skew-hermitian.
pub fn cayley(space: &HermSpace, k: &FMatrix) -> Option<FMatrix> {
    let m = space.dim();
    let a = space.gram().inverse()?.mul(k);
    let id = Matrix::identity(m);
    Some(id.add(&a).inverse()?.mul(&id.sub(&a)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    S,
    USplit,
    UNonsplit,
    PairN1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub kind: SampleKind,
    pub n: usize,
    pub height: i64,
    pub eps: u8,
    /// Largest accepted valuation of the cyclic determinant; keeps lattice
    /// enumerations small.
    pub max_delta_val: i64,
    /// For pair samples: the hermitian space to draw from (random if unset).
    #[serde(default)]
    pub side: Option<Side>,
}

impl SampleSpec {
    pub fn new(kind: SampleKind, n: usize, height: i64, eps: u8) -> Self {
        SampleSpec { kind, n, height, eps, max_delta_val: if n == 1 { 6 } else { 3 }, side: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sample {
    S(FMatrix),
    U { g: FMatrix, setup: SpecialSetup },
    Pair { gamma: FMatrix, g: FMatrix, setup: SpecialSetup },
}

const MAX_ATTEMPTS: usize = 10_000;

fn rand_f(rng: &mut ChaCha8Rng, cfg: FieldConfig, h: i64) -> FNumber {
    cfg.fi(rng.gen_range(-h..=h), rng.gen_range(-h..=h))
}

fn rand_matrix(rng: &mut ChaCha8Rng, cfg: FieldConfig, m: usize, h: i64) -> FMatrix {
    Matrix::from_fn(m, m, |_, _| rand_f(rng, cfg, h))
}

fn rand_skew(rng: &mut ChaCha8Rng, cfg: FieldConfig, m: usize, h: i64) -> FMatrix {
    let p = cfg.p();
    let mut k = Matrix::zeros(m, m);
    for i in 0..m {
        k[(i, i)] = cfg.fi(0, rng.gen_range(-h..=h));
        for j in i + 1..m {
            let x = rand_f(rng, cfg, h);
            k[(i, j)] = x.clone();
            k[(j, i)] = -x.conj();
        }
    }
    // vary the depth so that both integral and non-integral elements occur
    let shift = rng.gen_range(-1..=1);
    k.scale(&FNumber::from_q(p_pow(p, shift)))
}

fn delta_val(cfg: FieldConfig, g: &FMatrix, v: &[FNumber]) -> Option<i64> {
    Scalar::val(&krylov(g, v, g.rows()).det(), cfg.p())
}

/// Deterministic rss sample for the given seed.
pub fn sample_rss(cfg: FieldConfig, seed: u64, spec: SampleSpec) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = spec.n + 1;
    let h = spec.height.max(1);
    for _ in 0..MAX_ATTEMPTS {
        match spec.kind {
            SampleKind::S => {
                let gp = rand_matrix(&mut rng, cfg, m, h);
                let Ok(gamma) = r_map(&gp) else { continue };
                if !is_rss_s(&gamma) {
                    continue;
                }
                if Scalar::val(&delta_plus(&gamma), cfg.p()).map_or(true, |v| v.abs() > spec.max_delta_val) {
                    continue;
                }
                return Ok(Sample::S(gamma));
            }
            SampleKind::USplit | SampleKind::UNonsplit | SampleKind::PairN1 => {
                let side = match spec.kind {
                    SampleKind::UNonsplit => Side::Nonsplit,
                    SampleKind::PairN1 => {
                        let coin = rng.gen_bool(0.5);
                        if let Some(side) = spec.side {
                            side
                        } else if coin {
                            Side::Split
                        } else {
                            Side::Nonsplit
                        }
                    }
                    _ => Side::Split,
                };
                if spec.kind == SampleKind::PairN1 && spec.n != 1 {
                    return Err(Error::Precondition("pair samples need n = 1".into()));
                }
                let setup = SpecialSetup::standard(cfg, spec.n, side, spec.eps);
                let k = rand_skew(&mut rng, cfg, m, h);
                let Some(g) = cayley(&setup.space, &k) else { continue };
                if !is_rss_u(&g, &setup)? {
                    continue;
                }
                if delta_val(cfg, &g, &setup.u).map_or(true, |v| v.abs() > spec.max_delta_val) {
                    continue;
                }
                if spec.kind == SampleKind::PairN1 {
                    let gamma = s_from_unitary_n1(cfg, &g, &setup)?;
                    return Ok(Sample::Pair { gamma, g, setup });
                }
                return Ok(Sample::U { g, setup });
            }
        }
    }
    Err(Error::Sampling { attempts: MAX_ATTEMPTS })
}

/// Some γ' ∈ GL_m(F) with r(γ') = γ, of the form z + z̄γ.
pub fn hilbert90_lift(cfg: FieldConfig, gamma: &FMatrix) -> Result<FMatrix> {
    let m = gamma.rows();
    for (a, b) in [(1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (3, 1)] {
        let z = cfg.fi(a, b);
        let lift = Matrix::<FNumber>::identity(m).scale(&z).add(&gamma.scale(&z.conj()));
        if !lift.det().is_zero() {
            return Ok(lift);
        }
    }
    Err(Error::Singular)
}

/// Random (γ1, γ2) ∈ GL_n(F) × GL_{n+1}(F) with r(γ1^{-1}γ2) regular
/// semisimple and |val Δ⁺| bounded.
pub fn sample_gprime(cfg: FieldConfig, seed: u64, n: usize, height: i64, max_delta_val: i64) -> Result<(FMatrix, FMatrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = height.max(1);
    for _ in 0..MAX_ATTEMPTS {
        let g1 = rand_matrix(&mut rng, cfg, n, h);
        let g2 = rand_matrix(&mut rng, cfg, n + 1, h);
        if g1.det().is_zero() || g2.det().is_zero() {
            continue;
        }
        let Ok(r) = r_map_pair(&block_embed(&g1), &g2) else { continue };
        if !is_rss_s(&r) {
            continue;
        }
        if Scalar::val(&delta_plus(&r), cfg.p()).map_or(true, |v| v.abs() > max_delta_val) {
            continue;
        }
        return Ok((g1, g2));
    }
    Err(Error::Sampling { attempts: MAX_ATTEMPTS })
}

/// Random pair lo ⊆ hi of rank-m lattices with [hi : lo] = p^{Σ a_i},
/// a_i ≤ max_exp.
pub fn sample_lattice_pair<T: Scalar>(cfg: FieldConfig, seed: u64, m: usize, max_exp: i64) -> Result<(Lattice<T>, Lattice<T>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = random_gl(&mut rng, cfg, m, 2);
    let a = random_gl_o(&mut rng, cfg, m, 2);
    let b = random_gl_o(&mut rng, cfg, m, 2);
    let d: Vec<_> = (0..m).map(|_| p_pow(cfg.p(), rng.gen_range(0..=max_exp))).collect();
    let inner = a.mul(&Matrix::diag(&d)).mul(&b);
    let hi = Lattice::new(cfg, &lift_q::<T>(&base))?;
    let lo = Lattice::new(cfg, &lift_q::<T>(&base.mul(&inner)))?;
    Ok((lo, hi))
}

/// Random element of GL_m(O_F0) with determinant a unit.
pub fn random_gl_o(rng: &mut ChaCha8Rng, cfg: FieldConfig, m: usize, h: i64) -> Matrix<crate::plocal::Q> {
    loop {
        let g = Matrix::from_fn(m, m, |_, _| qi(rng.gen_range(-h..=h)));
        if g.det().val(cfg.p()) == Some(0) {
            return g;
        }
    }
}

/// Random invertible element of GL_m(F0) with small entries and denominators.
pub fn random_gl(rng: &mut ChaCha8Rng, cfg: FieldConfig, m: usize, h: i64) -> Matrix<crate::plocal::Q> {
    loop {
        let g = Matrix::from_fn(m, m, |_, _| qi(rng.gen_range(-h..=h)) * p_pow(cfg.p(), rng.gen_range(-1..=1)));
        if !g.det().is_zero() {
            return g;
        }
    }
}

/// Embed h ∈ GL_n as diag(h, 1).
pub fn block_embed<T: Scalar>(h: &Matrix<T>) -> Matrix<T> {
    let n = h.rows();
    Matrix::from_fn(n + 1, n + 1, |i, j| {
        if i < n && j < n {
            h[(i, j)].clone()
        } else if i == j {
            T::one()
        } else {
            T::zero()
        }
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
