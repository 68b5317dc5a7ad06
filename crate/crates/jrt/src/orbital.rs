//! Transfer factors and weighted orbital integrals on the symmetric-space,
//! semi-Lie and homogeneous sides, and unitary orbital integrals as lattice
//! counts.

use std::collections::{HashSet, VecDeque};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{intermediate_lattices, intermediate_lattices_pruned, window_lattices, Budget, Lattice};
use crate::linalg::{lift_q, Matrix};
use crate::orbits::{block_embed, co_krylov, delta_plus, delta_plus_vec, is_rss_s, krylov, last_vector, r_map_pair, SpecialSetup};
use crate::plocal::{eta_tilde_s, p_pow, qi, FNumber, FieldConfig, Scalar, XLaurent, Q};

pub type QMatrix = Matrix<Q>;
pub type FMatrix = Matrix<FNumber>;

/// A weighted orbital integral as a Laurent polynomial in X = q^{-s}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitalValue {
    pub poly: XLaurent,
    pub at_zero: Q,
    pub d_at_zero: Q,
}

impl From<XLaurent> for OrbitalValue {
    fn from(poly: XLaurent) -> Self {
        OrbitalValue { at_zero: poly.value_at_one(), d_at_zero: poly.d_at_zero(), poly }
    }
}

fn fval(x: &FNumber, p: u64) -> Option<i64> {
    Scalar::val(x, p)
}

/// (−X)^k.
pub fn minus_x_pow(k: i64) -> XLaurent {
    XLaurent::monomial(if k.rem_euclid(2) == 0 { qi(1) } else { qi(-1) }, k)
}

/// ω_S(γ) = η̃_{-s}(Δ⁺(γ)).
pub fn omega_s(cfg: FieldConfig, gamma: &FMatrix) -> Result<XLaurent> {
    let d = delta_plus(gamma);
    if d.is_zero() {
        return Err(Error::NotRss);
    }
    Ok(eta_tilde_s(&d, cfg.p())?.subs_pow(-1))
}

/// A vector and covector in F0^{n+1} × (F0^{n+1})^*.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiLieVector {
    pub vec: Vec<Q>,
    pub covec: Vec<Q>,
}

impl SemiLieVector {
    /// w0 = (ϖ e, ᵗe).
    pub fn w0(cfg: FieldConfig, m: usize) -> Self {
        let mut vec = vec![Q::zero(); m];
        vec[m - 1] = p_pow(cfg.p(), 1);
        let mut covec = vec![Q::zero(); m];
        covec[m - 1] = qi(1);
        SemiLieVector { vec, covec }
    }

    pub fn pairing(&self) -> Q {
        self.vec.iter().zip(&self.covec).fold(Q::zero(), |a, (x, y)| a + x * y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferConvention {
    /// η̃_{-s}(det(γ^i v)) as written.
    Literal,
    /// det(γ^i v) divided by ⟨v*, v⟩^{n+1}, so that w0 gives ω_S.
    Normalized,
}

pub fn omega_semilie(cfg: FieldConfig, gamma: &FMatrix, w: &SemiLieVector, conv: TransferConvention) -> Result<XLaurent> {
    let m = gamma.rows();
    let v: Vec<FNumber> = w.vec.iter().cloned().map(FNumber::from_q).collect();
    let mut d = delta_plus_vec(gamma, &v);
    if d.is_zero() {
        return Err(Error::NotRss);
    }
    if conv == TransferConvention::Normalized {
        let pr = w.pairing();
        if pr.is_zero() {
            return Err(Error::NotRss);
        }
        let mut scale = Q::one();
        for _ in 0..m {
            scale *= &pr;
        }
        d = d / FNumber::from_q(scale);
    }
    Ok(eta_tilde_s(&d, cfg.p())?.subs_pow(-1))
}

/// ω_{G'}(γ1, γ2) = η̃^n(γ1^{-1}γ2) |det γ1|_F^{-s} ω_{S,2s}(r(γ)).
pub fn omega_gprime(cfg: FieldConfig, g1: &FMatrix, g2: &FMatrix) -> Result<XLaurent> {
    let n = g1.rows();
    let p = cfg.p();
    let emb = block_embed(g1);
    let r = r_map_pair(&emb, g2)?;
    let ws = omega_s(cfg, &r)?.subs_pow(2);
    let d1 = g1.det();
    let d = g2.det() / d1.clone();
    let eta = eta_tilde_s(&d, p)?.value_at_one();
    let eta_n = if n % 2 == 0 { qi(1) } else { eta };
    let v1 = fval(&d1, p).ok_or(Error::Singular)?;
    Ok(ws * XLaurent::monomial(eta_n, -2 * v1))
}

/// The translate u = [[1_n, ϖ^{-1}e_n], [0, 1]].
pub fn u_matrix(cfg: FieldConfig, n: usize) -> QMatrix {
    let mut u = Matrix::identity(n + 1);
    u[(n - 1, n)] = p_pow(cfg.p(), -1);
    u
}

/// h0 = diag(ϖ 1_n, 1).
pub fn h0_matrix(cfg: FieldConfig, n: usize) -> QMatrix {
    let mut d = vec![p_pow(cfg.p(), 1); n];
    d.push(qi(1));
    Matrix::diag(&d)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomS {
    /// 1_{S(O)}
    Unit,
    /// u ∗ 1_{S(O)}
    U,
    /// u' ∗ 1_{S(O)} with u' = h0 u
    UPrime,
    /// t ∗ 1_{S(O)} for a rational matrix t
    Translate(#[serde(skip)] QMatrix),
    /// 1_{K_S(ϖ)}: S(O) intersected with the stabilizer of O^n ⊕ ϖ^{-1}O
    KSPi,
}

impl AtomS {
    /// Matrices t_i: the atom is the set of γ stabilizing every t_i O_F^{n+1}.
    pub fn translates(&self, cfg: FieldConfig, n: usize) -> Vec<QMatrix> {
        match self {
            AtomS::Unit => vec![Matrix::identity(n + 1)],
            AtomS::U => vec![u_matrix(cfg, n)],
            AtomS::UPrime => vec![h0_matrix(cfg, n).mul(&u_matrix(cfg, n))],
            AtomS::Translate(t) => vec![t.clone()],
            AtomS::KSPi => {
                let mut d = vec![qi(1); n];
                d.push(p_pow(cfg.p(), -1));
                vec![Matrix::identity(n + 1), Matrix::diag(&d)]
            }
        }
    }
}

/// Formal XLaurent-linear combination of atoms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TestFunctionS {
    pub terms: Vec<(XLaurent, AtomS)>,
}

impl TestFunctionS {
    pub fn atom(a: AtomS) -> Self {
        TestFunctionS { terms: vec![(XLaurent::one(), a)] }
    }

    pub fn plus(mut self, c: XLaurent, a: AtomS) -> Self {
        self.terms.push((c, a));
        self
    }

    pub fn scale(&self, c: &XLaurent) -> Self {
        TestFunctionS { terms: self.terms.iter().map(|(k, a)| (k.clone() * c.clone(), a.clone())).collect() }
    }

    pub fn add(mut self, o: &TestFunctionS) -> Self {
        self.terms.extend(o.terms.iter().cloned());
        self
    }

    pub fn eval_at_zero(&self) -> Self {
        TestFunctionS { terms: self.terms.iter().map(|(k, a)| (XLaurent::constant(k.value_at_one()), a.clone())).collect() }
    }
}

fn q_pow(q: u64, e: u32) -> Q {
    qi(q.pow(e) as i64)
}

/// Which form of the explicit test functions to build. `Alternative` uses the
/// u∗1 coefficient q^{2(n+1)} − 1 and the opposite signs; `Corrected` uses q^n − 1
/// (the volume of the nontrivial GL_n(O)-orbit in N(ϖ^{-1}O)) and the signs
/// that the lattice computations confirm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiVariant {
    Alternative,
    Corrected,
}

/// Coefficient in front of u∗1.
pub fn u_coefficient(cfg: FieldConfig, n: usize, variant: PhiVariant) -> Q {
    match variant {
        PhiVariant::Alternative => q_pow(cfg.q(), 2 * (n as u32 + 1)) - qi(1),
        PhiVariant::Corrected => u_volume_coefficient(cfg, n),
    }
}

/// The explicit test function for level r: for odd r,
/// c·u∗1 + ((−1)^{n+1} X^{n+1} + 1)·1; for even r, 1.
pub fn phi_prime_r(cfg: FieldConfig, n: usize, r: usize, variant: PhiVariant) -> TestFunctionS {
    if r % 2 == 0 {
        return TestFunctionS::atom(AtomS::Unit);
    }
    phi_prime_with_u_coeff(n, u_coefficient(cfg, n, variant))
}

/// Homogeneous counterpart for odd r (with c_r = 1):
/// σ·c'·c·1_{K̃'×K'} + ((−1)^{n+1} + 1)·1_{G'(O)}, where σ = 1 for the alternative
/// form and (−1)^n for the corrected one.
pub fn phi_prime_hom(cfg: FieldConfig, n: usize, variant: PhiVariant) -> Result<Vec<(XLaurent, AtomGPrime)>> {
    let c = qi(c_prime_1(cfg, n)? as i64) * u_coefficient(cfg, n, variant);
    let sigma = match variant {
        PhiVariant::Corrected if n % 2 == 1 => qi(-1),
        _ => qi(1),
    };
    let tail = if n % 2 == 1 { qi(2) } else { Q::zero() };
    Ok(vec![
        (XLaurent::constant(sigma * c), AtomGPrime::TildeOdd { r: 1 }),
        (XLaurent::constant(tail), AtomGPrime::Maximal),
    ])
}

/// ±1_{K_S(ϖ)}: the alternative sign is (−1)^{n−1}, the corrected one (−1)^n.
pub fn type01_function(n: usize, variant: PhiVariant) -> TestFunctionS {
    let e = match variant {
        PhiVariant::Alternative => n + 1,
        PhiVariant::Corrected => n,
    };
    let sign = if e % 2 == 0 { qi(1) } else { qi(-1) };
    TestFunctionS::atom(AtomS::KSPi).scale(&XLaurent::constant(sign))
}

/// φ'_s with an arbitrary coefficient in front of u∗1.
pub fn phi_prime_with_u_coeff(n: usize, coeff: Q) -> TestFunctionS {
    let sign = if (n + 1) % 2 == 0 { qi(1) } else { qi(-1) };
    TestFunctionS::atom(AtomS::U)
        .scale(&XLaurent::constant(coeff))
        .plus(XLaurent::monomial(sign, n as i64 + 1) + XLaurent::one(), AtomS::Unit)
}

/// Coefficient of u∗1 obtained from the volume of N(ϖ^{-1}O) minus N(O).
pub fn u_volume_coefficient(cfg: FieldConfig, n: usize) -> Q {
    q_pow(cfg.q(), n as u32) - qi(1)
}

/// Correction term: (n+1)·1_{S(O)}·log q when n is even and r odd.
pub fn phi_prime_correction(n: usize, r: usize) -> Q {
    if n % 2 == 0 && r % 2 == 1 {
        qi(n as i64 + 1)
    } else {
        Q::zero()
    }
}

fn is_f_integral(m: &FMatrix, p: u64) -> bool {
    m.is_integral(p)
}

/// Whether γ stabilizes the O_F-span of the columns of the rational basis b.
pub fn stabilizes_rational(gamma: &FMatrix, b: &QMatrix, p: u64) -> bool {
    let Some(inv) = b.inverse() else { return false };
    let c = lift_q::<FNumber>(&inv).mul(gamma).mul(&lift_q(b));
    is_f_integral(&c, p)
}

fn stabilizes_f(gamma: &FMatrix, b: &FMatrix, p: u64) -> bool {
    let Some(inv) = b.inverse() else { return false };
    let c = inv.mul(gamma).mul(b);
    c.is_integral(p) && fval(&c.det(), p) == Some(0)
}

/// Generators of GL_n(O_F0) acting as diag(k, 1) on F0^{n+1}.
fn gl_o_generators(cfg: FieldConfig, n: usize) -> Vec<QMatrix> {
    let mut gens = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut e = Matrix::identity(n + 1);
                e[(i, j)] = qi(1);
                gens.push(e);
            }
        }
    }
    let mut d = Matrix::identity(n + 1);
    d[(0, 0)] = qi(cfg.unit_generator());
    gens.push(d);
    gens
}

/// Orbit of a tuple of O_F0-lattices under GL_n(O_F0) (block embedded).
pub fn gl_o_orbit(cfg: FieldConfig, n: usize, tuple: Vec<Lattice<Q>>) -> Result<Vec<Vec<Lattice<Q>>>> {
    let gens = gl_o_generators(cfg, n);
    let mut seen: HashSet<Vec<Lattice<Q>>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(tuple.clone());
    queue.push_back(tuple);
    let mut out = Vec::new();
    while let Some(t) = queue.pop_front() {
        for g in &gens {
            let next: Vec<Lattice<Q>> = t.iter().map(|l| l.apply(g)).collect::<Result<_>>()?;
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
        out.push(t);
    }
    out.sort();
    Ok(out)
}

fn min_val_vec(v: &[Q], p: u64) -> i64 {
    v.iter().filter_map(|x| x.val(p)).min().expect("nonzero vector")
}

/// O_F0-lattice spanned by real and imaginary parts of the given vectors.
fn rational_hull(cfg: FieldConfig, vecs: &[Vec<FNumber>]) -> Result<Lattice<Q>> {
    let mut cols = Vec::new();
    for v in vecs {
        cols.push(v.iter().map(|x| x.re().clone()).collect::<Vec<Q>>());
        cols.push(v.iter().map(|x| x.im().clone()).collect::<Vec<Q>>());
    }
    let cols: Vec<Vec<Q>> = cols.into_iter().filter(|c| c.iter().any(|x| !x.is_zero())).collect();
    Lattice::new(cfg, &Matrix::from_cols(&cols))
}

/// {y ∈ F0^k : φ(y) ∈ O_F for each F-valued functional row φ}.
fn rational_dual_of_rows(cfg: FieldConfig, rows: &[Vec<FNumber>]) -> Result<Lattice<Q>> {
    let mut out = Vec::new();
    for r in rows {
        out.push(r.iter().map(|x| x.re().clone()).collect::<Vec<Q>>());
        out.push(r.iter().map(|x| x.im().clone()).collect::<Vec<Q>>());
    }
    let out: Vec<Vec<Q>> = out.into_iter().filter(|c| c.iter().any(|x| !x.is_zero())).collect();
    Lattice::from_functionals(cfg, &Matrix::from_rows(out))
}

struct SBounds {
    hull_lo: Lattice<Q>,
    hi_base: Lattice<Q>,
}

impl SBounds {
    fn new(cfg: FieldConfig, gamma: &FMatrix) -> Result<Self> {
        let m = gamma.rows();
        let n = m - 1;
        let k = krylov(gamma, &last_vector(m), m);
        let proj: Vec<Vec<FNumber>> = (0..m).map(|j| k.col(j)[..n].to_vec()).collect();
        let hull_lo = rational_hull(cfg, &proj)?;
        let c = co_krylov(gamma, m);
        let rows: Vec<Vec<FNumber>> = (0..m).map(|i| c.row(i)[..n].to_vec()).collect();
        let hi_base = rational_dual_of_rows(cfg, &rows)?;
        Ok(SBounds { hull_lo, hi_base })
    }

    /// Lattices Ξ ⊂ F0^n outside [lo, hi] cannot have γ stabilizing diag(Ξ,1)T.
    fn for_translate(&self, t: &QMatrix, p: u64) -> (Lattice<Q>, Lattice<Q>) {
        let m = t.rows();
        let n = m - 1;
        let tinv = t.inverse().expect("invertible translate");
        let c = -min_val_vec(&tinv.col(n), p);
        let d = min_val_vec(&t.row(n), p);
        let a1 = (0..n).map(|j| -min_val_vec(&tinv.col(j), p)).max().unwrap_or(0);
        let a2 = (0..n).flat_map(|i| t.row(i)).filter_map(|x| x.val(p)).min().unwrap_or(0);
        (self.hull_lo.scale_pi(c - a2), self.hi_base.scale_pi(d - a1))
    }
}

fn atom_orbit(cfg: FieldConfig, n: usize, atom: &AtomS) -> Result<Vec<Vec<Lattice<Q>>>> {
    let tuple = atom
        .translates(cfg, n)
        .iter()
        .map(|t| Lattice::new(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    gl_o_orbit(cfg, n, tuple)
}

fn xi_supported(gamma: &FMatrix, xi: &Lattice<Q>, tuple: &[Lattice<Q>], p: u64) -> bool {
    let h = block_embed(xi.basis());
    tuple.iter().all(|t| stabilizes_rational(gamma, &h.mul(t.basis()), p))
}

/// Orbital integral of one atom without the transfer factor.
fn orb_s_atom_sum(cfg: FieldConfig, gamma: &FMatrix, atom: &AtomS, budget: Budget) -> Result<XLaurent> {
    let p = cfg.p();
    let n = gamma.rows() - 1;
    let bounds = SBounds::new(cfg, gamma)?;
    let orbit = atom_orbit(cfg, n, atom)?;
    let mut total = XLaurent::zero();
    for tuple in &orbit {
        let mut lo: Option<Lattice<Q>> = None;
        let mut hi: Option<Lattice<Q>> = None;
        for t in tuple {
            let (l, h) = bounds.for_translate(t.basis(), p);
            lo = Some(match lo {
                None => l,
                Some(x) => x.sum(&l),
            });
            hi = Some(match hi {
                None => h,
                Some(x) => x.intersect(&h),
            });
        }
        let (lo, hi) = (lo.unwrap(), hi.unwrap());
        if !hi.contains(&lo) {
            continue;
        }
        for xi in intermediate_lattices(&lo, &hi, budget, |xi| xi_supported(gamma, xi, tuple, p))? {
            total = total + minus_x_pow(xi.val_det());
        }
    }
    Ok(total.scale(&(Q::one() / qi(orbit.len() as i64))))
}

/// Orb(γ, f, s) for a combination of atoms, summed over the exact sandwich.
pub fn orb_s(cfg: FieldConfig, gamma: &FMatrix, f: &TestFunctionS, budget: Budget) -> Result<OrbitalValue> {
    Ok(orb_s_poly(cfg, gamma, f, budget)?.into())
}

pub fn orb_s_poly(cfg: FieldConfig, gamma: &FMatrix, f: &TestFunctionS, budget: Budget) -> Result<XLaurent> {
    if !is_rss_s(gamma) {
        return Err(Error::NotRss);
    }
    let w = omega_s(cfg, gamma)?;
    let mut total = XLaurent::zero();
    for (c, a) in &f.terms {
        total = total + c.clone() * orb_s_atom_sum(cfg, gamma, a, budget)?;
    }
    Ok(w * total)
}

fn window_sum_s(cfg: FieldConfig, gamma: &FMatrix, f: &TestFunctionS, b: i64, budget: Budget) -> Result<XLaurent> {
    let p = cfg.p();
    let n = gamma.rows() - 1;
    let window = window_lattices::<Q>(cfg, n, b, budget)?;
    let mut total = XLaurent::zero();
    for (c, a) in &f.terms {
        let orbit = atom_orbit(cfg, n, a)?;
        let mut s = XLaurent::zero();
        for tuple in &orbit {
            for xi in &window {
                if xi_supported(gamma, xi, tuple, p) {
                    s = s + minus_x_pow(xi.val_det());
                }
            }
        }
        total = total + c.clone() * s.scale(&(Q::one() / qi(orbit.len() as i64)));
    }
    Ok(omega_s(cfg, gamma)? * total)
}

/// Window oracle for `orb_s`: sums over all lattices between ϖ^B O^n and
/// ϖ^{-B} O^n, growing B by 2 until two consecutive windows agree.
pub fn orb_s_window(cfg: FieldConfig, gamma: &FMatrix, f: &TestFunctionS, budget: Budget, max_b: i64) -> Result<XLaurent> {
    if !is_rss_s(gamma) {
        return Err(Error::NotRss);
    }
    let v = fval(&delta_plus(gamma), cfg.p()).ok_or(Error::NotRss)?;
    let mut b = v.abs() + 2;
    let mut prev = window_sum_s(cfg, gamma, f, b, budget)?;
    while b + 2 <= max_b {
        b += 2;
        let cur = window_sum_s(cfg, gamma, f, b, budget)?;
        if cur == prev {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::WindowNotStabilized(b))
}

/// Orbital integral over a fixed window of half-width b (no growth).
pub fn orb_s_fixed_window(cfg: FieldConfig, gamma: &FMatrix, f: &TestFunctionS, b: i64, budget: Budget) -> Result<XLaurent> {
    window_sum_s(cfg, gamma, f, b, budget)
}

/// Semi-Lie orbital integral of 1_{K'×Λ'} at (γ, w0), integrating over
/// GL_{n+1}(F0).
pub fn orb_semilie(cfg: FieldConfig, gamma: &FMatrix, conv: TransferConvention, budget: Budget) -> Result<OrbitalValue> {
    Ok(orb_semilie_poly(cfg, gamma, conv, budget)?.into())
}

fn semilie_supported(gamma: &FMatrix, m: &Lattice<Q>, p: u64) -> bool {
    let k = m.dim();
    let mut we = vec![Q::zero(); k];
    we[k - 1] = p_pow(p, 1);
    if !m.contains_vec(&we) {
        return false;
    }
    // ᵗe M ⊆ O
    if !(0..k).all(|j| m.basis()[(k - 1, j)].is_integral(p)) {
        return false;
    }
    stabilizes_rational(gamma, m.basis(), p)
}

pub fn orb_semilie_poly(cfg: FieldConfig, gamma: &FMatrix, conv: TransferConvention, budget: Budget) -> Result<XLaurent> {
    if !is_rss_s(gamma) {
        return Err(Error::NotRss);
    }
    let p = cfg.p();
    let m = gamma.rows();
    let w = omega_semilie(cfg, gamma, &SemiLieVector::w0(cfg, m), conv)?;
    let pi = FNumber::from_q(p_pow(p, 1));
    let k = krylov(gamma, &last_vector(m), m);
    let gens: Vec<Vec<FNumber>> = (0..m).map(|j| k.col(j).into_iter().map(|x| x * pi.clone()).collect()).collect();
    let lo = rational_hull(cfg, &gens)?;
    let c = co_krylov(gamma, m);
    let rows: Vec<Vec<FNumber>> = (0..m).map(|i| c.row(i)).collect();
    let hi = rational_dual_of_rows(cfg, &rows)?;
    if !hi.contains(&lo) {
        return Ok(XLaurent::zero());
    }
    let mut total = XLaurent::zero();
    for lat in intermediate_lattices(&lo, &hi, budget, |l| stabilizes_rational(gamma, l.basis(), p))? {
        total = total + minus_x_pow(lat.val_det());
    }
    Ok(w * total)
}

/// Window oracle for `orb_semilie`.
pub fn orb_semilie_window(cfg: FieldConfig, gamma: &FMatrix, conv: TransferConvention, budget: Budget, max_b: i64) -> Result<XLaurent> {
    if !is_rss_s(gamma) {
        return Err(Error::NotRss);
    }
    let p = cfg.p();
    let m = gamma.rows();
    let w = omega_semilie(cfg, gamma, &SemiLieVector::w0(cfg, m), conv)?;
    let sum = |b: i64| -> Result<XLaurent> {
        let mut t = XLaurent::zero();
        for l in window_lattices::<Q>(cfg, m, b, budget)? {
            if semilie_supported(gamma, &l, p) {
                t = t + minus_x_pow(l.val_det());
            }
        }
        Ok(t)
    };
    let v = fval(&delta_plus(gamma), p).ok_or(Error::NotRss)?;
    let mut b = v.abs() + 2;
    let mut prev = sum(b)?;
    while b + 2 <= max_b {
        b += 2;
        let cur = sum(b)?;
        if cur == prev {
            return Ok(w * cur);
        }
        prev = cur;
    }
    Err(Error::WindowNotStabilized(b))
}

/// Product atoms on G' = GL_n(F) × GL_{n+1}(F).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomGPrime {
    /// 1_{G'(O)} = 1_{K'_n × K'^†_{n+1}}
    Maximal,
    /// 1_{K̃'^{[r]}_n × K'_{n+1}} for odd r
    TildeOdd { r: usize },
    /// 1_{K'^{[r]}_n × K'_{n+1}} for even r
    Even { r: usize },
}

/// [K'_n : K̃'^{[1]}_n], as an orbit size of a lagrangian flag under GL_n(O_F).
pub fn c_prime_1(cfg: FieldConfig, n: usize) -> Result<u64> {
    crate::hecke::c_prime(cfg, n)
}

/// φ'^♮ for the supported atoms. For 1_{K̃'^{[1]}×K'} this is c'^{-1}·u'∗1:
/// moving u' out of K'_{n+1} = u'K'^†u'^{-1} multiplies both the η^n(h2)
/// integrand and the η̃^n(γ) prefactor by η(det u')^n, so no sign survives.
pub fn natural_sharp(cfg: FieldConfig, n: usize, atom: AtomGPrime) -> Result<TestFunctionS> {
    match atom {
        AtomGPrime::Maximal => Ok(TestFunctionS::atom(AtomS::Unit)),
        AtomGPrime::TildeOdd { r: 1 } => {
            let c = qi(c_prime_1(cfg, n)? as i64);
            Ok(TestFunctionS::atom(AtomS::UPrime).scale(&XLaurent::constant(qi(1) / c)))
        }
        AtomGPrime::Even { r: 0 } => Ok(TestFunctionS::atom(AtomS::Unit)),
        _ => Err(Error::Unsupported("no natural-sharp reduction known for this atom".into())),
    }
}

pub fn natural_sharp_combo(cfg: FieldConfig, n: usize, terms: &[(XLaurent, AtomGPrime)]) -> Result<TestFunctionS> {
    let mut out = TestFunctionS::default();
    for (c, a) in terms {
        out = out.add(&natural_sharp(cfg, n, *a)?.scale(c));
    }
    Ok(out)
}

/// Orb(γ, φ', s) through Orb(r(γ), φ'^♮, 2s).
pub fn orb_gprime_reduced(
    cfg: FieldConfig,
    g1: &FMatrix,
    g2: &FMatrix,
    terms: &[(XLaurent, AtomGPrime)],
    budget: Budget,
) -> Result<XLaurent> {
    let n = g1.rows();
    let r = r_map_pair(&block_embed(g1), g2)?;
    let f = natural_sharp_combo(cfg, n, terms)?;
    // coefficients in X stay in X; only the integral is evaluated at 2s
    let mut total = XLaurent::zero();
    let w = omega_s(cfg, &r)?.subs_pow(2);
    for (c, a) in &f.terms {
        let inner = orb_s_atom_sum(cfg, &r, a, budget)?.subs_pow(2);
        total = total + c.clone() * inner;
    }
    Ok(w * total)
}

/// Self-dual O_F0-lattice of the hyperbolic plane used at n = 1:
/// span{e1, ϖ^{-1}(e1 + e2)}.
fn lambda0_n1(cfg: FieldConfig) -> QMatrix {
    let pinv = p_pow(cfg.p(), -1);
    Matrix::from_rows(vec![vec![qi(1), pinv.clone()], vec![qi(0), pinv]])
}

/// If the O_F-lattice spanned by the columns of b is Galois stable, the
/// O_F0-lattice of its fixed points.
fn galois_descent(cfg: FieldConfig, b: &FMatrix) -> Result<Option<Lattice<Q>>> {
    let p = cfg.p();
    let cols = b.columns();
    let descended = rational_hull(cfg, &cols)?;
    // the hull contains the lattice; equality iff Galois stable
    let lf = Lattice::new(cfg, b)?;
    let hull_f = Lattice::new(cfg, &lift_q::<FNumber>(descended.basis()))?;
    let _ = p;
    Ok(if hull_f == lf { Some(descended) } else { None })
}

/// Direct evaluation of the homogeneous orbital integral at n = 1, summing
/// over val(h') = k in [−kmax, kmax].
pub fn orb_gprime_direct_n1(
    cfg: FieldConfig,
    g1: &FMatrix,
    g2: &FMatrix,
    atom: AtomGPrime,
    kmax: i64,
) -> Result<XLaurent> {
    if g1.rows() != 1 {
        return Err(Error::Unsupported("direct homogeneous path only at n = 1".into()));
    }
    let p = cfg.p();
    let gamma1 = g1[(0, 0)].clone();
    let v1 = fval(&gamma1, p).ok_or(Error::Singular)?;
    let g2inv = g2.inverse().ok_or(Error::Singular)?;
    let w = omega_gprime(cfg, g1, g2)?;
    let mut total = XLaurent::zero();
    for k in -kmax..=kmax {
        let weight_x = XLaurent::x_pow(2 * (v1 + k));
        match atom {
            AtomGPrime::Maximal => {
                let h = gamma1.clone() * FNumber::from_q(p_pow(p, k));
                let lk = Matrix::diag(&[h, FNumber::one()]);
                if let Some(m) = galois_descent(cfg, &g2inv.mul(&lk))? {
                    let sign = if m.val_det().rem_euclid(2) == 0 { qi(1) } else { qi(-1) };
                    total = total + weight_x.scale(&sign);
                }
            }
            AtomGPrime::TildeOdd { r: 1 } => {
                let l0 = lift_q::<FNumber>(&lambda0_n1(cfg));
                let mut acc = Q::zero();
                for v in 1..p {
                    let h = gamma1.clone() * FNumber::from_q(p_pow(p, k) * qi(v as i64));
                    let lk = Matrix::diag(&[h, FNumber::one()]).mul(&l0);
                    if let Some(m) = galois_descent(cfg, &g2inv.mul(&lk))? {
                        let sign = if (m.val_det() + 1).rem_euclid(2) == 0 { qi(1) } else { qi(-1) };
                        acc += sign;
                    }
                }
                let q = cfg.q() as i64;
                let scale = acc / qi(p as i64 - 1) / qi(q * q - 1);
                total = total + weight_x.scale(&scale);
            }
            _ => return Err(Error::Unsupported("no direct path for this atom".into())),
        }
    }
    Ok(w * total)
}

/// Test functions on the unitary side, all of the form 1_K for K the
/// stabilizer of a vertex lattice attached to the special vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunctionU {
    /// 1_{K_{n+1}}, K_{n+1} the stabilizer of a self-dual lattice containing u;
    /// measure normalized by vol(K̃^{[ε]}_n) = 1.
    Hyperspecial,
    /// 1_{K^{[1]}_{n+1}}, stabilizer of Λ♭ ⊕ O u with Λ♭ self-dual and (u,u) = ϖ;
    /// measure normalized by vol(K_n) = 1.
    Type1Parahoric,
}

struct Adapted {
    g: FMatrix,
    gram: FMatrix,
    n: usize,
}

/// Coordinates in the basis (flat basis, u).
fn adapted(g: &FMatrix, setup: &SpecialSetup) -> Result<Adapted> {
    let n = setup.n();
    let mut cols = setup.flat_basis.columns();
    cols.push(setup.u.clone());
    let pm = Matrix::from_cols(&cols);
    let pinv = pm.inverse().ok_or(Error::DegenerateForm)?;
    Ok(Adapted { g: pinv.mul(g).mul(&pm), gram: pm.adjoint().mul(setup.space.gram()).mul(&pm), n })
}

fn flat_gram(a: &Adapted) -> FMatrix {
    let idx: Vec<usize> = (0..a.n).collect();
    a.gram.submatrix(&idx, &idx)
}

fn flat_plus_u_stable(a: &Adapted, flat: &Lattice<FNumber>, p: u64) -> bool {
    stabilizes_f(&a.g, &block_embed(flat.basis()), p)
}

fn integral_prefix(gram: &FMatrix, p: u64) -> impl FnMut(&[Vec<FNumber>]) -> bool + '_ {
    move |cols: &[Vec<FNumber>]| {
        let last = cols.last().unwrap();
        cols.iter().all(|c| crate::orbits::pairing(gram, last, c).is_integral(p))
    }
}

fn count_flat_selfdual(a: &Adapted, p: u64, budget: Budget) -> Result<usize> {
    let m = a.n + 1;
    let k = krylov(&a.g, &last_vector(m), m);
    let proj: Vec<Vec<FNumber>> = (0..m).map(|j| k.col(j)[..a.n].to_vec()).collect();
    let cfg = cfg_of(a, p)?;
    let lo = Lattice::new(cfg, &Matrix::from_cols(&proj))?;
    let gram = flat_gram(a);
    let hi = lo.dual(&gram)?;
    if !hi.contains(&lo) {
        return Ok(0);
    }
    let found = intermediate_lattices_pruned(&lo, &hi, budget, integral_prefix(&gram, p), |l| {
        l.is_selfdual(&gram).unwrap_or(false) && flat_plus_u_stable(a, l, p)
    })?;
    Ok(found.len())
}

fn cfg_of(_a: &Adapted, p: u64) -> Result<FieldConfig> {
    FieldConfig::new(p)
}

fn count_pairs_eps1(a: &Adapted, p: u64, budget: Budget) -> Result<usize> {
    let cfg = FieldConfig::new(p)?;
    let n = a.n;
    let m = n + 1;
    let k = krylov(&a.g, &last_vector(m), m);
    let lu = Lattice::new(cfg, &k)?;
    let lu_dual = lu.dual(&a.gram)?;
    let pi = FNumber::from_q(p_pow(p, 1));
    let proj: Vec<Vec<FNumber>> = (0..m).map(|j| k.col(j)[..n].iter().map(|x| x.clone() * pi.clone()).collect()).collect();
    let lo = Lattice::new(cfg, &Matrix::from_cols(&proj))?;
    let inv = lu_dual.basis().inverse().ok_or(Error::Singular)?;
    let cols: Vec<usize> = (0..n).collect();
    let rows: Vec<usize> = (0..m).collect();
    let hi = Lattice::from_functionals(cfg, &inv.submatrix(&rows, &cols))?;
    let gram = flat_gram(a);
    if !hi.contains(&lo) {
        return Ok(0);
    }
    let flats = intermediate_lattices(&lo, &hi, budget, |l| {
        l.invariants(&gram).map(|inv| inv.is_vertex() && inv.type_t == 1 && inv.is_integral()).unwrap_or(false)
    })?;
    let mut count = 0;
    for fl in flats {
        let fd = fl.dual(&gram)?;
        let inner = Lattice::new(cfg, &block_embed(fl.basis()))?;
        let mut outer_b = block_embed(fd.basis());
        outer_b[(n, n)] = FNumber::from_q(p_pow(p, -1));
        let outer = Lattice::new(cfg, &outer_b)?;
        let found = intermediate_lattices_pruned(&inner, &outer, budget, integral_prefix(&a.gram, p), |l| {
            l.is_selfdual(&a.gram).unwrap_or(false) && stabilizes_f(&a.g, l.basis(), p)
        })?;
        count += found.len();
    }
    Ok(count)
}

/// Orb(g, f) as an exact lattice count.
pub fn orb_u(g: &FMatrix, setup: &SpecialSetup, f: TestFunctionU, budget: Budget) -> Result<Q> {
    if !crate::orbits::is_rss_u(g, setup)? {
        return Err(Error::NotRss);
    }
    let p = setup.space.cfg().p();
    let a = adapted(g, setup)?;
    let count = match (f, setup.eps) {
        (TestFunctionU::Hyperspecial, 0) => count_flat_selfdual(&a, p, budget)?,
        (TestFunctionU::Hyperspecial, _) => count_pairs_eps1(&a, p, budget)?,
        (TestFunctionU::Type1Parahoric, 1) => count_flat_selfdual(&a, p, budget)?,
        (TestFunctionU::Type1Parahoric, _) => {
            return Err(Error::Precondition("type-1 parahoric level needs a special vector of norm ϖ".into()))
        }
    };
    Ok(qi(count as i64))
}

/// Window oracle for the flat self-dual count: all Λ♭ between ϖ^B and ϖ^{-B}
/// times the flat coordinate lattice.
pub fn orb_u_flat_window(g: &FMatrix, setup: &SpecialSetup, b: i64, budget: Budget) -> Result<Q> {
    let p = setup.space.cfg().p();
    let a = adapted(g, setup)?;
    let gram = flat_gram(&a);
    let count = window_lattices::<FNumber>(setup.space.cfg(), a.n, b, budget)?
        .into_iter()
        .filter(|l| l.is_selfdual(&gram).unwrap_or(false) && flat_plus_u_stable(&a, l, p))
        .count();
    Ok(qi(count as i64))
}

/// Orb((g, v), 1_{K×Λ0}) with vol(K) = 1: self-dual g-stable lattices containing v.
pub fn orb_u_semilie(g: &FMatrix, v: &[FNumber], setup: &SpecialSetup, budget: Budget) -> Result<Q> {
    let cfg = setup.space.cfg();
    let p = cfg.p();
    let m = setup.space.dim();
    if !setup.space.is_unitary(g) {
        return Err(Error::NotUnitary);
    }
    let k = krylov(g, v, m);
    if k.det().is_zero() {
        return Err(Error::NotRss);
    }
    let lo = Lattice::new(cfg, &k)?;
    let gram = setup.space.gram();
    let hi = lo.dual(gram)?;
    if !hi.contains(&lo) {
        return Ok(Q::zero());
    }
    let found = intermediate_lattices_pruned(&lo, &hi, budget, integral_prefix(gram, p), |l| {
        l.is_selfdual(gram).unwrap_or(false) && stabilizes_f(g, l.basis(), p)
    })?;
    Ok(qi(found.len() as i64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_orbit_size() {
        let cfg = FieldConfig::new(3).unwrap();
        for n in 1..3 {
            let o = atom_orbit(cfg, n, &AtomS::U).unwrap();
            assert_eq!(o.len() as u64, 3u64.pow(n as u32) - 1);
            assert_eq!(atom_orbit(cfg, n, &AtomS::Unit).unwrap().len(), 1);
        }
    }

    #[test]
    fn minus_x() {
        assert_eq!(minus_x_pow(1), XLaurent::monomial(qi(-1), 1));
        assert_eq!(minus_x_pow(-2), XLaurent::x_pow(-2));
    }
}
