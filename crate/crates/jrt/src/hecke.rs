//! Rank-2 Hecke algebra computations by lattice counting: indices, the
//! atomic function φ₂ on U(2), convolutions at the identity and Satake
//! transforms on GL₂(F) and split U(2).

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::finite::{self, Fq2};
use crate::lattice::{intermediate_lattices, smith_exponents, Budget, Lattice};
use crate::linalg::Matrix;
use crate::plocal::{p_pow, qi, FNumber, FieldConfig, Scalar, XLaurent, Q};

type FMatrix = Matrix<FNumber>;

/// c_r = [K̃^{[ε]}_n : K̃^{[r]}_n] for r ≤ 2: the number of type-r vertex
/// lattices inside the type-ε one, i.e. isotropic subspaces of dimension
/// (r − ε)/2 in the (n − ε)-dimensional quotient.
pub fn c_r(cfg: FieldConfig, n: usize, r: usize) -> Result<u64> {
    if r > 2 || r > n {
        return Err(Error::Unsupported("c_r is implemented for r ≤ min(n, 2)".into()));
    }
    let eps = r % 2;
    let f = Fq2::new(cfg.p())?;
    let v = finite::FinHermSpace::standard(f, n - eps);
    Ok(finite::enumerate_isotropic(&v, (r - eps) / 2)?.len() as u64)
}

/// c'_1 = [K'_n : K̃'^{[1]}_n]: the lines of F_{q²}^n (joint stabilizer of
/// Λ♭ and its dual) times the orbit of the lagrangian in the 2-dim quotient
/// under the residual F_{q²}^×.
pub fn c_prime(cfg: FieldConfig, n: usize) -> Result<u64> {
    if n == 0 {
        return Err(Error::Precondition("n ≥ 1".into()));
    }
    let f = Fq2::new(cfg.p())?;
    let q2 = cfg.q() * cfg.q();
    let vectors = finite::nonzero_vector_orbit(f, n) as u64;
    let lines = vectors / (q2 - 1);
    let lagrangian_orbit = f.units().len() as u64;
    Ok(lines * lagrangian_orbit)
}

/// Split hermitian plane F e ⊕ F f with (e, f) = 1, (e, e) = (f, f) = 0.
#[derive(Debug, Clone)]
pub struct HyperbolicPlane {
    pub cfg: FieldConfig,
    pub gram: FMatrix,
}

impl HyperbolicPlane {
    pub fn new(cfg: FieldConfig) -> Self {
        let z = FNumber::zero();
        let o = FNumber::one();
        HyperbolicPlane { cfg, gram: Matrix::from_rows(vec![vec![z.clone(), o.clone()], vec![o, z]]) }
    }

    pub fn standard(&self) -> Lattice<FNumber> {
        Lattice::standard(self.cfg, 2)
    }

    /// ϖ^{(a, −a)} = diag(ϖ^a, ϖ^{−a}).
    pub fn mu(&self, a: i64) -> FMatrix {
        let p = self.cfg.p();
        Matrix::diag(&[FNumber::from_q(p_pow(p, a)), FNumber::from_q(p_pow(p, -a))])
    }

    fn is_type(&self, l: &Lattice<FNumber>, t: usize) -> bool {
        l.invariants(&self.gram).map(|i| i.is_vertex() && i.type_t == t).unwrap_or(false)
    }

    /// Type-2 lattices L with ϖΛ ⊂ L ⊂ Λ.
    pub fn type2_inside(&self, lam: &Lattice<FNumber>, budget: Budget) -> Result<Vec<Lattice<FNumber>>> {
        intermediate_lattices(&lam.scale_pi(1), lam, budget, |l| self.is_type(l, 2))
    }

    /// Self-dual lattices between ϖ^b Λ and ϖ^{−b} Λ.
    pub fn selfdual_window(&self, b: i64, budget: Budget) -> Result<Vec<Lattice<FNumber>>> {
        let lam = self.standard();
        intermediate_lattices(&lam.scale_pi(b), &lam.scale_pi(-b), budget, |l| l.is_selfdual(&self.gram).unwrap_or(false))
    }

    /// φ₂(x): type-2 lattices contained in both Λ and xΛ.
    pub fn phi2(&self, x: &FMatrix, budget: Budget) -> Result<Q> {
        let lam = self.standard();
        let xl = lam.apply(x)?;
        let lo = lam.sum(&xl).scale_pi(1);
        let hi = lam.intersect(&xl);
        if !hi.contains(&lo) {
            return Ok(Q::zero());
        }
        let found = intermediate_lattices(&lo, &hi, budget, |l| self.is_type(l, 2))?;
        Ok(qi(found.len() as i64))
    }
}

/// Coefficients of φ₂ on the double cosets K ϖ^{(a, −a)} K, a = 0..=max_a.
pub fn phi2_expansion(cfg: FieldConfig, max_a: i64, budget: Budget) -> Result<Vec<(i64, Q)>> {
    let h = HyperbolicPlane::new(cfg);
    (0..=max_a).map(|a| Ok((a, h.phi2(&h.mu(a), budget)?))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvolutionCheck {
    /// (1_K ∗ 1_{K^{[2]}})(1) = vol(K ∩ K^{[2]}), from the lattice orbit
    pub lhs: Q,
    /// vol(K^{[2,0]}) from isotropic lines of the reduction
    pub rhs: Q,
}

/// The identity value of 1_{K_2} ∗ 1_{K_2^{[2]}} with vol(K_2) = 1.
pub fn convolution_at_identity(cfg: FieldConfig, budget: Budget) -> Result<ConvolutionCheck> {
    let h = HyperbolicPlane::new(cfg);
    // K acts transitively on the type-2 lattices it contains, so
    // [K : K ∩ K^{[2]}] is their number.
    let orbit = h.type2_inside(&h.standard(), budget)?.len();
    let f = Fq2::new(cfg.p())?;
    let lines = finite::enumerate_isotropic(&finite::FinHermSpace::standard(f, 2), 1)?.len();
    Ok(ConvolutionCheck { lhs: Q::one() / qi(orbit as i64), rhs: Q::one() / qi(lines as i64) })
}

/// Torus coordinate a of a rank-2 lattice M: M ∩ F e₁ = ϖ^a O e₁.
fn torus_exponent(m: &Lattice<FNumber>) -> i64 {
    let p = m.p();
    let b = m.basis().row(1).iter().filter_map(|x| Scalar::val(x, p)).min().expect("full rank");
    m.val_det() - b
}

/// Sat(1_{K ϖ^{(1,0)} K}) on GL₂(F) with δ^{1/2}(diag(ϖ^a, ϖ^b)) = q_F^{−(a−b)/2},
/// q_F = q², recorded as X^{a−b}.
pub fn satake_gl2_minuscule(cfg: FieldConfig, budget: Budget) -> Result<XLaurent> {
    let lam = Lattice::<FNumber>::standard(cfg, 2);
    let q = cfg.q() as i64;
    let mut total = XLaurent::zero();
    for m in intermediate_lattices(&lam.scale_pi(1), &lam, budget, |l| {
        smith_exponents(l.basis(), cfg.p()).map(|e| e == vec![0, 1]).unwrap_or(false)
    })? {
        let b = m.val_det() - torus_exponent(&m);
        let a = torus_exponent(&m);
        let k = a - b;
        total = total + XLaurent::monomial(pow_q(q, -k), k);
    }
    Ok(total)
}

fn pow_q(q: i64, k: i64) -> Q {
    let base = qi(q);
    if k >= 0 {
        (0..k).fold(Q::one(), |acc, _| acc * base.clone())
    } else {
        (0..-k).fold(Q::one(), |acc, _| acc / base.clone())
    }
}

/// Sat(f) on split U(2) for a function f on self-dual lattices M = gΛ:
/// Σ f(M) δ^{1/2}(t_M) X^{a(M)}, δ^{1/2}(diag(ϖ^a, ϖ^{−a})) = q^{−a}.
pub fn satake_u2(cfg: FieldConfig, radius: i64, budget: Budget, f: impl Fn(&HyperbolicPlane, &Lattice<FNumber>) -> Result<Q>) -> Result<XLaurent> {
    let h = HyperbolicPlane::new(cfg);
    let q = cfg.q() as i64;
    let mut total = XLaurent::zero();
    for m in h.selfdual_window(radius, budget)? {
        let w = f(&h, &m)?;
        if w.is_zero() {
            continue;
        }
        let a = torus_exponent(&m);
        total = total + XLaurent::monomial(w * pow_q(q, -a), a);
    }
    Ok(total)
}

/// Relative position of M with respect to Λ: sorted elementary exponents.
pub fn relative_position(m: &Lattice<FNumber>) -> Result<Vec<i64>> {
    smith_exponents(m.basis(), m.p())
}

/// Sat(1_{K ϖ^{(a,−a)} K}) on U(2).
pub fn satake_u2_double_coset(cfg: FieldConfig, a: i64, budget: Budget) -> Result<XLaurent> {
    satake_u2(cfg, a.max(1), budget, |_, m| {
        Ok(if relative_position(m)? == vec![-a, a] { Q::one() } else { Q::zero() })
    })
}

/// Sat(φ₂) on U(2) summed directly from the lattice description of φ₂.
/// A type-2 L ⊂ Λ ∩ M forces M ⊂ L^∨ = ϖ^{−1}L ⊂ ϖ^{−1}Λ, and M is
/// self-dual, so radius 1 already sees the whole support.
pub fn satake_phi2(cfg: FieldConfig, budget: Budget) -> Result<XLaurent> {
    satake_u2(cfg, 1, budget, |h, m| {
        let lam = h.standard();
        let lo = lam.sum(m).scale_pi(1);
        let hi = lam.intersect(m);
        if !hi.contains(&lo) {
            return Ok(Q::zero());
        }
        let n = intermediate_lattices(&lo, &hi, budget, |l| h.is_type(l, 2))?.len();
        Ok(qi(n as i64))
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MismatchWitness {
    pub mismatch: bool,
    pub general_linear: XLaurent,
    pub unitary: XLaurent,
}

/// Whether two Satake transforms differ, with both as witnesses.
pub fn compare_satake(general_linear: XLaurent, unitary: XLaurent) -> MismatchWitness {
    MismatchWitness { mismatch: general_linear != unitary, general_linear, unitary }
}

/// Sat(1_{K'₂ ϖ^{(1,0)} K'₂}) against Sat(φ₂).
pub fn bc_mismatch_check(cfg: FieldConfig, budget: Budget) -> Result<MismatchWitness> {
    Ok(compare_satake(satake_gl2_minuscule(cfg, budget)?, satake_phi2(cfg, budget)?))
}

/// KfK at n = 1 on actual lattices: the type-2 lattices inside
/// Λ = O e₁ ⊕ O u₀ ((e₁, e₁) = −1, (u₀, u₀) = 1) against the orbit of one
/// of them under U(O e₁) acting on the first coordinate.
pub fn kfk_lattices_n1(cfg: FieldConfig, budget: Budget) -> Result<(usize, usize, bool)> {
    let gram = Matrix::diag(&[FNumber::from_q(qi(-1)), FNumber::one()]);
    let lam = Lattice::<FNumber>::standard(cfg, 2);
    let all = intermediate_lattices(&lam.scale_pi(1), &lam, budget, |l| {
        l.invariants(&gram).map(|i| i.is_vertex() && i.type_t == 2).unwrap_or(false)
    })?;
    // z / z̄ with z = a + δ has norm one; pick a so its reduction generates F¹_{q²}
    let f = Fq2::new(cfg.p())?;
    let gen = f.norm_one_generator();
    let mut k = None;
    for a in 0..cfg.p() as i64 {
        let z = cfg.fi(a, 1);
        let w = z.clone() / z.conj();
        if f.reduce(&w)? == gen {
            k = Some(w);
            break;
        }
    }
    let k = k.ok_or_else(|| Error::Precondition("no norm-one lift found".into()))?;
    let g = Matrix::diag(&[k, FNumber::one()]);
    let start = all.first().cloned().ok_or(Error::DegenerateForm)?;
    let mut orbit = vec![start.clone()];
    let mut cur = start.apply(&g)?;
    while cur != start {
        orbit.push(cur.clone());
        cur = cur.apply(&g)?;
        if orbit.len() > all.len() + 1 {
            break;
        }
    }
    let mut a: Vec<_> = all.clone();
    a.sort();
    orbit.sort();
    orbit.dedup();
    let equal = a == orbit;
    Ok((a.len(), orbit.len(), equal))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_indices() {
        let cfg = FieldConfig::new(3).unwrap();
        assert_eq!(c_r(cfg, 2, 0).unwrap(), 1);
        assert_eq!(c_r(cfg, 1, 1).unwrap(), 1);
        assert_eq!(c_prime(cfg, 1).unwrap(), 8);
    }

    #[test]
    fn satake_of_unit_is_one() {
        let cfg = FieldConfig::new(3).unwrap();
        let s = satake_u2_double_coset(cfg, 0, Budget::default()).unwrap();
        assert_eq!(s, XLaurent::one());
    }
}
