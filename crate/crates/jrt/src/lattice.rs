//! Full-rank lattices over O_F0 (scalar `Q`) or O_F (scalar `FNumber`) in
//! canonical column Hermite form, duals, invariants and sandwich enumeration.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::plocal::{p_pow, FieldConfig, Scalar};

/// Upper bound on enumeration sizes, as an exponent of p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub exp: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { exp: 24 }
    }
}

impl Budget {
    pub fn check(&self, index_exp: u64) -> Result<()> {
        if index_exp > self.exp {
            Err(Error::BudgetExceeded { index_exp, budget_exp: self.exp })
        } else {
            Ok(())
        }
    }
}

fn pk<T: Scalar>(p: u64, k: i64) -> T {
    T::from_q(p_pow(p, k))
}

/// Column Hermite normal form over the valuation ring: upper triangular,
/// diagonal entries exact powers of p, entries above a pivot reduced modulo it.
pub fn hnf<T: Scalar>(gens: &Matrix<T>, p: u64) -> Result<Matrix<T>> {
    let m = gens.rows();
    let mut cols: Vec<Vec<T>> = gens.columns().into_iter().filter(|c| c.iter().any(|x| !x.is_zero())).collect();
    let mut pivots: Vec<Option<Vec<T>>> = vec![None; m];
    let mut diag = vec![0i64; m];
    for i in (0..m).rev() {
        let best = cols
            .iter()
            .enumerate()
            .filter_map(|(idx, c)| c[i].val(p).map(|v| (v, idx)))
            .min();
        let Some((v, idx)) = best else {
            return Err(Error::NotFullRank);
        };
        let mut piv = cols.swap_remove(idx);
        let unit = piv[i].clone() / pk::<T>(p, v);
        let uinv = T::one() / unit;
        for x in piv.iter_mut() {
            *x = x.clone() * uinv.clone();
        }
        let pv = pk::<T>(p, v);
        for c in cols.iter_mut() {
            if c[i].is_zero() {
                continue;
            }
            let f = c[i].clone() / pv.clone();
            for r in 0..=i {
                let val = c[r].clone() - f.clone() * piv[r].clone();
                c[r] = val;
            }
        }
        cols.retain(|c| c.iter().any(|x| !x.is_zero()));
        diag[i] = v;
        pivots[i] = Some(piv);
    }
    let mut cols: Vec<Vec<T>> = pivots.into_iter().map(|c| c.unwrap()).collect();
    for j in 0..m {
        for i in (0..j).rev() {
            let x = cols[j][i].clone();
            if x.is_zero() {
                continue;
            }
            let r = x.reduce_mod(p, diag[i]);
            if r == x {
                continue;
            }
            let c = (x - r) / pk::<T>(p, diag[i]);
            let ci = cols[i].clone();
            for (t, ct) in ci.iter().enumerate().take(i + 1) {
                let val = cols[j][t].clone() - c.clone() * ct.clone();
                cols[j][t] = val;
            }
        }
    }
    Ok(Matrix::from_cols(&cols))
}

/// Elementary-divisor exponents of a nonsingular matrix together with a
/// transform `u` such that `m = u * d * v` for some unimodular `v`.
pub fn smith_with_left<T: Scalar>(m: &Matrix<T>, p: u64) -> Result<(Vec<i64>, Matrix<T>)> {
    assert!(m.is_square());
    let n = m.rows();
    let mut a = m.clone();
    let mut u = Matrix::<T>::identity(n);
    let mut exps = Vec::with_capacity(n);
    for t in 0..n {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in t..n {
            for j in t..n {
                if let Some(v) = a[(i, j)].val(p) {
                    if best.is_none_or(|b| v < b.0) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, bi, bj)) = best else {
            return Err(Error::Singular);
        };
        if bi != t {
            for k in 0..n {
                let tmp = a[(t, k)].clone();
                a[(t, k)] = a[(bi, k)].clone();
                a[(bi, k)] = tmp;
                let tmp = u[(k, t)].clone();
                u[(k, t)] = u[(k, bi)].clone();
                u[(k, bi)] = tmp;
            }
        }
        if bj != t {
            for k in 0..n {
                let tmp = a[(k, t)].clone();
                a[(k, t)] = a[(k, bj)].clone();
                a[(k, bj)] = tmp;
            }
        }
        let pv = a[(t, t)].clone();
        for i in t + 1..n {
            if a[(i, t)].is_zero() {
                continue;
            }
            let f = a[(i, t)].clone() / pv.clone();
            for k in t..n {
                let val = a[(i, k)].clone() - f.clone() * a[(t, k)].clone();
                a[(i, k)] = val;
            }
            for k in 0..n {
                let val = u[(k, t)].clone() + f.clone() * u[(k, i)].clone();
                u[(k, t)] = val;
            }
        }
        for j in t + 1..n {
            if a[(t, j)].is_zero() {
                continue;
            }
            let f = a[(t, j)].clone() / pv.clone();
            for k in t..n {
                let val = a[(k, j)].clone() - f.clone() * a[(k, t)].clone();
                a[(k, j)] = val;
            }
        }
        exps.push(v);
    }
    Ok((exps, u))
}

pub fn smith_exponents<T: Scalar>(m: &Matrix<T>, p: u64) -> Result<Vec<i64>> {
    let mut e = smith_with_left(m, p)?.0;
    e.sort();
    Ok(e)
}

/// Fundamental invariants of a lattice with respect to a hermitian form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantProfile {
    pub a: Vec<i64>,
    pub type_t: usize,
    pub valuation: i64,
}

impl InvariantProfile {
    pub fn from_exponents(mut a: Vec<i64>) -> Self {
        a.sort();
        let type_t = a.iter().filter(|&&x| x != 0).count();
        let valuation = a.iter().sum();
        InvariantProfile { a, type_t, valuation }
    }

    pub fn is_integral(&self) -> bool {
        self.a.first().is_none_or(|&x| x >= 0)
    }

    pub fn is_vertex(&self) -> bool {
        self.a.iter().all(|&x| x == 0 || x == 1)
    }

    pub fn is_selfdual(&self) -> bool {
        self.a.iter().all(|&x| x == 0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lattice<T> {
    basis: Matrix<T>,
    cfg: FieldConfig,
}

impl<T: Scalar> fmt::Debug for Lattice<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lattice{:?}", self.basis)
    }
}

impl<T: Scalar> Lattice<T> {
    /// The lattice spanned by the columns of `gens` (need not be square).
    pub fn new(cfg: FieldConfig, gens: &Matrix<T>) -> Result<Self> {
        Ok(Lattice { basis: hnf(gens, cfg.p())?, cfg })
    }

    pub fn standard(cfg: FieldConfig, m: usize) -> Self {
        Lattice { basis: Matrix::identity(m), cfg }
    }

    pub fn cfg(&self) -> FieldConfig {
        self.cfg
    }

    pub fn p(&self) -> u64 {
        self.cfg.p()
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Matrix<T> {
        &self.basis
    }

    /// Valuation of the determinant of a basis.
    pub fn val_det(&self) -> i64 {
        (0..self.dim()).map(|i| self.basis[(i, i)].val(self.p()).unwrap()).sum()
    }

    pub fn contains_vec(&self, v: &[T]) -> bool {
        let p = self.p();
        let m = self.dim();
        let mut r = v.to_vec();
        for i in (0..m).rev() {
            if r[i].is_zero() {
                continue;
            }
            let c = r[i].clone() / self.basis[(i, i)].clone();
            if !c.is_integral(p) {
                return false;
            }
            for (t, rt) in r.iter_mut().enumerate().take(i + 1) {
                *rt = rt.clone() - c.clone() * self.basis[(t, i)].clone();
            }
        }
        true
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &Lattice<T>) -> bool {
        (0..other.dim()).all(|j| self.contains_vec(&other.basis.col(j)))
    }

    pub fn sum(&self, other: &Lattice<T>) -> Lattice<T> {
        Lattice::new(self.cfg, &self.basis.hstack(&other.basis)).expect("sum of full lattices")
    }

    pub fn intersect(&self, other: &Lattice<T>) -> Lattice<T> {
        self.dual_std().sum(&other.dual_std()).dual_std()
    }

    pub fn scale(&self, c: &T) -> Lattice<T> {
        Lattice::new(self.cfg, &self.basis.scale(c)).expect("nonzero scalar")
    }

    pub fn scale_pi(&self, k: i64) -> Lattice<T> {
        self.scale(&pk::<T>(self.p(), k))
    }

    pub fn apply(&self, g: &Matrix<T>) -> Result<Lattice<T>> {
        Lattice::new(self.cfg, &g.mul(&self.basis))
    }

    /// {x : yᵗx ∈ O for all y ∈ self}.
    pub fn dual_std(&self) -> Lattice<T> {
        let inv = self.basis.inverse().expect("lattice basis is invertible");
        Lattice::new(self.cfg, &inv.transpose()).expect("full rank")
    }

    /// {x : φ(x) ∈ O for each row φ of `rows`}; rows must span the dual space.
    pub fn from_functionals(cfg: FieldConfig, rows: &Matrix<T>) -> Result<Lattice<T>> {
        Ok(Lattice::new(cfg, &rows.transpose())?.dual_std())
    }

    /// Dual with respect to (x, y) = y* G x.
    pub fn dual(&self, gram: &Matrix<T>) -> Result<Lattice<T>> {
        let a = self.basis.adjoint().mul(gram);
        let inv = a.inverse().ok_or(Error::DegenerateForm)?;
        Lattice::new(self.cfg, &inv)
    }

    pub fn invariants(&self, gram: &Matrix<T>) -> Result<InvariantProfile> {
        let d = self.dual(gram)?;
        let coords = d.basis.inverse().expect("dual basis invertible").mul(&self.basis);
        Ok(InvariantProfile::from_exponents(smith_exponents(&coords, self.p())?))
    }

    pub fn is_vertex(&self, gram: &Matrix<T>) -> Result<bool> {
        Ok(self.invariants(gram)?.is_vertex())
    }

    pub fn is_selfdual(&self, gram: &Matrix<T>) -> Result<bool> {
        Ok(self.dual(gram)? == *self)
    }

    /// Whether g L = L.
    pub fn stabilizes(&self, g: &Matrix<T>) -> bool {
        let Some(inv) = self.basis.inverse() else { return false };
        let c = inv.mul(g).mul(&self.basis);
        c.is_integral(self.p()) && c.det().val(self.p()) == Some(0)
    }

    /// Length of self / sub as a module over the valuation ring (sub ⊆ self).
    pub fn colength(&self, sub: &Lattice<T>) -> i64 {
        sub.val_det() - self.val_det()
    }

    /// [self : sub] as an exponent of p.
    pub fn index_exp(&self, sub: &Lattice<T>) -> u64 {
        (self.colength(sub) * T::RESIDUE_DEGREE as i64).max(0) as u64
    }
}

fn member_prefix<T: Scalar>(cols: &[Vec<T>], diag: &[i64], r: &mut [T], p: u64, upto: usize) -> bool {
    for i in (0..upto).rev() {
        if r[i].is_zero() {
            continue;
        }
        let c = r[i].clone() / pk::<T>(p, diag[i]);
        if !c.is_integral(p) {
            return false;
        }
        for (t, rt) in r.iter_mut().enumerate().take(i + 1) {
            *rt = rt.clone() - c.clone() * cols[i][t].clone();
        }
    }
    true
}

struct Dfs<'a, T: Scalar> {
    p: u64,
    a: &'a [i64],
    adapted: &'a Matrix<T>,
    ambient: Vec<Vec<T>>,
    prefix: &'a mut dyn FnMut(&[Vec<T>]) -> bool,
    m: usize,
    cols: Vec<Vec<T>>,
    diag: Vec<i64>,
    out: Vec<Matrix<T>>,
    eps: u64,
    // filled on first use; deep levels are often never reached
    residues: Vec<Option<Vec<T>>>,
}

impl<T: Scalar> Dfs<'_, T> {
    fn residues(&mut self, k: usize) -> Vec<T> {
        if self.residues.len() <= k {
            self.residues.resize(k + 1, None);
        }
        let (p, eps) = (self.p, self.eps);
        self.residues[k].get_or_insert_with(|| T::residues(p, k as u32, eps)).clone()
    }

    fn run(&mut self, j: usize) {
        if j == self.m {
            self.out.push(Matrix::from_cols(&self.cols));
            return;
        }
        for k in 0..=self.a[j] {
            let choices: Vec<Vec<T>> = (0..j).map(|i| self.residues(self.diag[i] as usize)).collect();
            let mut idx = vec![0usize; j];
            loop {
                let mut col = vec![T::zero(); self.m];
                for i in 0..j {
                    col[i] = choices[i][idx[i]].clone();
                }
                col[j] = pk::<T>(self.p, k);
                // p^{a_j} e_j must lie in the lattice generated so far
                let shift = pk::<T>(self.p, self.a[j] - k);
                let mut r: Vec<T> = col.iter().take(j).map(|x| -(shift.clone() * x.clone())).collect();
                r.resize(self.m, T::zero());
                if member_prefix(&self.cols, &self.diag, &mut r, self.p, j) {
                    self.ambient.push(self.adapted.mul_vec(&col));
                    if (self.prefix)(&self.ambient) {
                        self.cols.push(col);
                        self.diag.push(k);
                        self.run(j + 1);
                        self.cols.pop();
                        self.diag.pop();
                    }
                    self.ambient.pop();
                }
                let mut t = 0;
                while t < j {
                    idx[t] += 1;
                    if idx[t] < choices[t].len() {
                        break;
                    }
                    idx[t] = 0;
                    t += 1;
                }
                if t == j {
                    break;
                }
            }
        }
    }
}

/// All lattices M with `lo ⊆ M ⊆ hi` satisfying `pred`, each exactly once.
pub fn intermediate_lattices<T: Scalar>(
    lo: &Lattice<T>,
    hi: &Lattice<T>,
    budget: Budget,
    pred: impl FnMut(&Lattice<T>) -> bool,
) -> Result<Vec<Lattice<T>>> {
    intermediate_lattices_pruned(lo, hi, budget, |_| true, pred)
}

/// As `intermediate_lattices`, but `prefix` sees the ambient generators chosen
/// so far during the search and may cut a branch. It must hold for every
/// generating prefix of an accepted lattice's echelon basis.
pub fn intermediate_lattices_pruned<T: Scalar>(
    lo: &Lattice<T>,
    hi: &Lattice<T>,
    budget: Budget,
    mut prefix: impl FnMut(&[Vec<T>]) -> bool,
    mut pred: impl FnMut(&Lattice<T>) -> bool,
) -> Result<Vec<Lattice<T>>> {
    if !hi.contains(lo) {
        return Err(Error::Precondition("lower lattice not contained in upper".into()));
    }
    budget.check(hi.index_exp(lo))?;
    let cfg = hi.cfg();
    let p = cfg.p();
    let coords = hi.basis().inverse().expect("invertible").mul(lo.basis());
    let (a, u) = smith_with_left(&coords, p)?;
    let adapted = hi.basis().mul(&u);
    let mut dfs = Dfs {
        p,
        a: &a,
        adapted: &adapted,
        ambient: vec![],
        prefix: &mut prefix,
        m: a.len(),
        cols: vec![],
        diag: vec![],
        out: vec![],
        eps: cfg.eps(),
        residues: vec![],
    };
    dfs.run(0);
    let mut out = Vec::new();
    for m in dfs.out {
        let lat = Lattice::new(cfg, &adapted.mul(&m))?;
        if pred(&lat) {
            out.push(lat);
        }
    }
    out.sort();
    Ok(out)
}

/// Oracle for `intermediate_lattices`: every echelon matrix between p^a O^m and
/// O^m in the coordinates of `hi`, kept when it contains `lo`.
pub fn intermediate_lattices_brute<T: Scalar>(
    lo: &Lattice<T>,
    hi: &Lattice<T>,
    budget: Budget,
) -> Result<Vec<Lattice<T>>> {
    let cfg = hi.cfg();
    let p = cfg.p();
    let m = hi.dim();
    let c = hi.basis().inverse().expect("invertible").mul(lo.basis());
    if !c.is_integral(p) {
        return Err(Error::Precondition("lower lattice not contained in upper".into()));
    }
    let cinv = c.inverse().ok_or(Error::Singular)?;
    let a = (-cinv.min_val(p).unwrap_or(0)).max(0);
    budget.check(a as u64 * m as u64 * m as u64 * T::RESIDUE_DEGREE as u64 / 2 + 1)?;
    let lo_coords = Lattice::new(cfg, &c)?;
    let residues: Vec<Vec<T>> = (0..=a as u32).map(|k| T::residues(p, k, cfg.eps())).collect();
    let mut found = HashSet::new();
    let mut stack: Vec<(Vec<Vec<T>>, Vec<i64>)> = vec![(vec![], vec![])];
    while let Some((cols, diag)) = stack.pop() {
        let j = cols.len();
        if j == m {
            let lat = Lattice::new(cfg, &Matrix::from_cols(&cols))?;
            if lat.contains(&lo_coords) {
                found.insert(Lattice::new(cfg, &hi.basis().mul(lat.basis()))?);
            }
            continue;
        }
        for k in 0..=a {
            let mut idx = vec![0usize; j];
            loop {
                let mut col = vec![T::zero(); m];
                for i in 0..j {
                    col[i] = residues[diag[i] as usize][idx[i]].clone();
                }
                col[j] = pk::<T>(p, k);
                let mut nc = cols.clone();
                nc.push(col);
                let mut nd = diag.clone();
                nd.push(k);
                stack.push((nc, nd));
                let mut t = 0;
                while t < j {
                    idx[t] += 1;
                    if idx[t] < residues[diag[t] as usize].len() {
                        break;
                    }
                    idx[t] = 0;
                    t += 1;
                }
                if t == j {
                    break;
                }
            }
        }
    }
    let mut out: Vec<_> = found.into_iter().collect();
    out.sort();
    Ok(out)
}

/// All lattices between p^b O^m and p^{-b} O^m (the window of half-width b).
pub fn window_lattices<T: Scalar>(cfg: FieldConfig, m: usize, b: i64, budget: Budget) -> Result<Vec<Lattice<T>>> {
    let hi = Lattice::<T>::standard(cfg, m).scale_pi(-b);
    let lo = Lattice::<T>::standard(cfg, m).scale_pi(b);
    intermediate_lattices(&lo, &hi, budget, |_| true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plocal::{qi, FNumber, Q};

    fn cfg(p: u64) -> FieldConfig {
        FieldConfig::new(p).unwrap()
    }

    #[test]
    fn hnf_is_basis_independent() {
        let c = cfg(3);
        let b = Matrix::from_rows(vec![vec![qi(3), qi(1)], vec![qi(0), qi(1)]]);
        let u = Matrix::from_rows(vec![vec![qi(2), qi(1)], vec![qi(1), qi(1)]]);
        let l1 = Lattice::new(c, &b).unwrap();
        let l2 = Lattice::new(c, &b.mul(&u)).unwrap();
        assert_eq!(l1, l2);
        assert_eq!(Lattice::<Q>::new(c, &Matrix::identity(3)).unwrap(), Lattice::standard(c, 3));
    }

    #[test]
    fn dual_examples() {
        let c = cfg(3);
        let std = Lattice::<FNumber>::standard(c, 3);
        let id = Matrix::<FNumber>::identity(3);
        assert_eq!(std.dual(&id).unwrap(), std);
        let g = Matrix::diag(&[FNumber::one(), FNumber::one(), c.fi(3, 0)]);
        let d = std.dual(&g).unwrap();
        let expect = Lattice::new(c, &Matrix::diag(&[FNumber::one(), FNumber::one(), FNumber::from_q(crate::plocal::qf(1, 3))])).unwrap();
        assert_eq!(d, expect);
        let inv = std.invariants(&g).unwrap();
        assert_eq!(inv.a, vec![0, 0, 1]);
        assert_eq!(inv.type_t, 1);
    }

    #[test]
    fn residue_rank_two_submodules() {
        let c = cfg(3);
        let hi = Lattice::<FNumber>::standard(c, 2);
        let lo = hi.scale_pi(1);
        let all = intermediate_lattices(&lo, &hi, Budget::default(), |_| true).unwrap();
        assert_eq!(all.len(), 12);
        let brute = intermediate_lattices_brute(&lo, &hi, Budget::default()).unwrap();
        assert_eq!(all, brute);
    }

    use num_traits::One;
}
