//! Hermitian geometry over F_{q²}/F_q with q = p.
//!
//! F_{q²} = F_p[δ]/(δ² − ε) with the same ε as the p-adic field, so reducing
//! lattice data mod ϖ lands here literally.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::plocal::{FieldConfig, FNumber, Q};

/// a + bδ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fe {
    pub a: u32,
    pub b: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fq2 {
    p: u32,
    eps: u32,
}

pub type FinVec = Vec<Fe>;
pub type FinMat = Vec<Vec<Fe>>;

impl Fq2 {
    pub fn new(p: u64) -> Result<Self> {
        let cfg = FieldConfig::new(p)?;
        Ok(Fq2 { p: p as u32, eps: cfg.eps() as u32 })
    }

    pub fn q(&self) -> u64 {
        self.p as u64
    }

    pub fn zero(&self) -> Fe {
        Fe { a: 0, b: 0 }
    }

    pub fn one(&self) -> Fe {
        Fe { a: 1, b: 0 }
    }

    pub fn elem(&self, a: i64, b: i64) -> Fe {
        let p = self.p as i64;
        Fe { a: a.rem_euclid(p) as u32, b: b.rem_euclid(p) as u32 }
    }

    pub fn delta(&self) -> Fe {
        Fe { a: 0, b: 1 }
    }

    pub fn add(&self, x: Fe, y: Fe) -> Fe {
        Fe { a: (x.a + y.a) % self.p, b: (x.b + y.b) % self.p }
    }

    pub fn neg(&self, x: Fe) -> Fe {
        Fe { a: (self.p - x.a) % self.p, b: (self.p - x.b) % self.p }
    }

    pub fn sub(&self, x: Fe, y: Fe) -> Fe {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: Fe, y: Fe) -> Fe {
        let p = self.p as u64;
        let (xa, xb, ya, yb) = (x.a as u64, x.b as u64, y.a as u64, y.b as u64);
        let a = (xa * ya + (xb * yb % p) * self.eps as u64) % p;
        let b = (xa * yb + xb * ya) % p;
        Fe { a: a as u32, b: b as u32 }
    }

    /// Frobenius x ↦ x^q, which sends δ to −δ.
    pub fn conj(&self, x: Fe) -> Fe {
        Fe { a: x.a, b: (self.p - x.b) % self.p }
    }

    pub fn norm(&self, x: Fe) -> u32 {
        self.mul(x, self.conj(x)).a
    }

    pub fn is_zero(&self, x: Fe) -> bool {
        x.a == 0 && x.b == 0
    }

    pub fn pow(&self, x: Fe, mut e: u64) -> Fe {
        let (mut base, mut acc) = (x, self.one());
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, x: Fe) -> Fe {
        assert!(!self.is_zero(x), "inverse of zero");
        let q2 = (self.p as u64).pow(2);
        self.pow(x, q2 - 2)
    }

    pub fn elements(&self) -> Vec<Fe> {
        let mut out = Vec::with_capacity((self.p * self.p) as usize);
        for a in 0..self.p {
            for b in 0..self.p {
                out.push(Fe { a, b });
            }
        }
        out
    }

    pub fn units(&self) -> Vec<Fe> {
        self.elements().into_iter().filter(|x| !self.is_zero(*x)).collect()
    }

    /// Elements of norm one.
    pub fn norm_one(&self) -> Vec<Fe> {
        self.units().into_iter().filter(|x| self.norm(*x) == 1).collect()
    }

    /// A generator of the cyclic group of norm-one elements.
    pub fn norm_one_generator(&self) -> Fe {
        let n1 = self.norm_one();
        let order = n1.len() as u64;
        *n1.iter()
            .find(|&&z| (1..order).all(|k| self.pow(z, k) != self.one()))
            .expect("cyclic group")
    }

    fn reduce_q(&self, x: &Q) -> Result<u32> {
        let p = num_bigint::BigInt::from(self.p);
        let den = x.denom() % &p;
        if den == num_bigint::BigInt::from(0) {
            return Err(Error::Precondition("reduction of a non-integral number".into()));
        }
        let num = ((x.numer() % &p) + &p) % &p;
        let den: u64 = den.try_into().unwrap_or(0);
        let num: u64 = num.try_into().unwrap_or(0);
        let den = (den + self.p as u64) % self.p as u64;
        let inv = modpow(den, self.p as u64 - 2, self.p as u64);
        Ok((num * inv % self.p as u64) as u32)
    }

    /// Reduction O_F → F_{q²}.
    pub fn reduce(&self, x: &FNumber) -> Result<Fe> {
        Ok(Fe { a: self.reduce_q(x.re())?, b: self.reduce_q(x.im())? })
    }

    pub fn dot_form(&self, gram: &FinMat, x: &[Fe], y: &[Fe]) -> Fe {
        // (x, y) = y* G x
        let mut acc = self.zero();
        for (i, row) in gram.iter().enumerate() {
            let yi = self.conj(y[i]);
            for (j, g) in row.iter().enumerate() {
                acc = self.add(acc, self.mul(yi, self.mul(*g, x[j])));
            }
        }
        acc
    }

    pub fn mat_vec(&self, m: &FinMat, v: &[Fe]) -> FinVec {
        m.iter()
            .map(|row| row.iter().zip(v).fold(self.zero(), |acc, (a, b)| self.add(acc, self.mul(*a, *b))))
            .collect()
    }

    pub fn mat_mul(&self, x: &FinMat, y: &FinMat) -> FinMat {
        let n = y.first().map_or(0, |r| r.len());
        x.iter()
            .map(|row| {
                (0..n)
                    .map(|j| row.iter().enumerate().fold(self.zero(), |acc, (k, a)| self.add(acc, self.mul(*a, y[k][j]))))
                    .collect()
            })
            .collect()
    }

    pub fn adjoint(&self, m: &FinMat) -> FinMat {
        let r = m.len();
        let c = m.first().map_or(0, |x| x.len());
        (0..c).map(|i| (0..r).map(|j| self.conj(m[j][i])).collect()).collect()
    }

    pub fn identity(&self, d: usize) -> FinMat {
        (0..d).map(|i| (0..d).map(|j| if i == j { self.one() } else { self.zero() }).collect()).collect()
    }

    pub fn diag(&self, d: &[Fe]) -> FinMat {
        let n = d.len();
        (0..n).map(|i| (0..n).map(|j| if i == j { d[i] } else { self.zero() }).collect()).collect()
    }

    /// Reduced row echelon form of a list of row vectors, zero rows dropped.
    pub fn rref(&self, rows: &[FinVec]) -> FinMat {
        let mut m: FinMat = rows.to_vec();
        let cols = m.first().map_or(0, |r| r.len());
        let mut r = 0;
        for c in 0..cols {
            let Some(piv) = (r..m.len()).find(|&i| !self.is_zero(m[i][c])) else { continue };
            m.swap(r, piv);
            let inv = self.inv(m[r][c]);
            for k in 0..cols {
                m[r][k] = self.mul(m[r][k], inv);
            }
            for i in 0..m.len() {
                if i != r && !self.is_zero(m[i][c]) {
                    let f = m[i][c];
                    for k in 0..cols {
                        let v = self.sub(m[i][k], self.mul(f, m[r][k]));
                        m[i][k] = v;
                    }
                }
            }
            r += 1;
            if r == m.len() {
                break;
            }
        }
        m.truncate(r);
        m
    }

    pub fn rank(&self, rows: &[FinVec]) -> usize {
        self.rref(rows).len()
    }

    pub fn is_invertible(&self, m: &FinMat) -> bool {
        self.rank(m) == m.len()
    }
}

fn modpow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

/// A subspace stored by its canonical reduced echelon basis (rows).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinSubspace {
    pub basis: FinMat,
}

impl FinSubspace {
    pub fn span(f: &Fq2, rows: &[FinVec]) -> Self {
        FinSubspace { basis: f.rref(rows) }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn apply(&self, f: &Fq2, g: &FinMat) -> Self {
        let rows: Vec<FinVec> = self.basis.iter().map(|v| f.mat_vec(g, v)).collect();
        Self::span(f, &rows)
    }

    pub fn contains(&self, f: &Fq2, v: &[Fe]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        f.rank(&rows) == self.dim()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinHermSpace {
    pub f: Fq2,
    pub gram: FinMat,
}

impl FinHermSpace {
    pub fn new(f: Fq2, gram: FinMat) -> Result<Self> {
        let d = gram.len();
        for i in 0..d {
            for j in 0..d {
                if gram[i][j] != f.conj(gram[j][i]) {
                    return Err(Error::Precondition("gram matrix is not hermitian".into()));
                }
            }
        }
        if !f.is_invertible(&gram) {
            return Err(Error::DegenerateForm);
        }
        Ok(FinHermSpace { f, gram })
    }

    /// The space with gram matrix 1_d. Over a finite field every nondegenerate
    /// hermitian form of dimension d is isometric to this one.
    pub fn standard(f: Fq2, d: usize) -> Self {
        FinHermSpace { gram: f.identity(d), f }
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    pub fn form(&self, x: &[Fe], y: &[Fe]) -> Fe {
        self.f.dot_form(&self.gram, x, y)
    }

    pub fn is_isotropic(&self, s: &FinSubspace) -> bool {
        s.basis.iter().all(|x| s.basis.iter().all(|y| self.f.is_zero(self.form(x, y))))
    }

    pub fn is_unitary(&self, g: &FinMat) -> bool {
        let f = &self.f;
        f.mat_mul(&f.mat_mul(&f.adjoint(g), &self.gram), g) == self.gram
    }

    pub fn orthogonal(&self, x: &[Fe], s: &FinSubspace) -> bool {
        s.basis.iter().all(|y| self.f.is_zero(self.form(x, y)))
    }
}

/// All k-dimensional subspaces of F_{q²}^d, each once.
pub fn enumerate_subspaces(f: &Fq2, d: usize, k: usize, budget: u64) -> Result<Vec<FinSubspace>> {
    let q2 = f.q() * f.q();
    let mut out = Vec::new();
    if k > d {
        return Ok(out);
    }
    if k == 0 {
        out.push(FinSubspace { basis: Vec::new() });
        return Ok(out);
    }
    let elems = f.elements();
    for pivots in combinations(d, k) {
        // free positions: row i, column c > pivots[i], c not a pivot
        let free: Vec<(usize, usize)> = (0..k)
            .flat_map(|i| (pivots[i] + 1..d).filter(|c| !pivots.contains(c)).map(move |c| (i, c)))
            .collect();
        let total = q2.checked_pow(free.len() as u32).unwrap_or(u64::MAX);
        if total > budget || out.len() as u64 + total > budget {
            return Err(Error::BudgetExceeded { index_exp: total, budget_exp: budget });
        }
        let mut counter = vec![0usize; free.len()];
        loop {
            let mut rows = vec![vec![f.zero(); d]; k];
            for i in 0..k {
                rows[i][pivots[i]] = f.one();
            }
            for (slot, &(i, c)) in free.iter().enumerate() {
                rows[i][c] = elems[counter[slot]];
            }
            out.push(FinSubspace { basis: rows });
            let mut pos = 0;
            loop {
                if pos == counter.len() {
                    break;
                }
                counter[pos] += 1;
                if counter[pos] < elems.len() {
                    break;
                }
                counter[pos] = 0;
                pos += 1;
            }
            if pos == counter.len() {
                break;
            }
        }
    }
    Ok(out)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

pub const DEFAULT_BUDGET: u64 = 1 << 22;

/// Totally isotropic k-dimensional subspaces.
pub fn enumerate_isotropic(v: &FinHermSpace, k: usize) -> Result<Vec<FinSubspace>> {
    Ok(enumerate_subspaces(&v.f, v.dim(), k, DEFAULT_BUDGET)?
        .into_iter()
        .filter(|s| v.is_isotropic(s))
        .collect())
}

/// |U(d)(F_q)| = q^{d(d−1)/2} Π (q^i − (−1)^i).
pub fn unitary_order(d: usize, q: u64) -> u128 {
    let q = q as i128;
    let mut acc: i128 = q.pow((d * (d.saturating_sub(1)) / 2) as u32);
    for i in 1..=d as u32 {
        acc *= q.pow(i) - if i % 2 == 0 { 1 } else { -1 };
    }
    acc as u128
}

/// Unitary reflections in every anisotropic line and unitary transvections
/// along every isotropic line. These generate U(V) for odd q.
pub fn unitary_generators(v: &FinHermSpace) -> Result<Vec<FinMat>> {
    let f = v.f;
    let d = v.dim();
    let lambda = f.norm_one_generator();
    let mut gens = Vec::new();
    if d == 0 {
        return Ok(gens);
    }
    for line in enumerate_subspaces(&f, d, 1, DEFAULT_BUDGET)? {
        let w = &line.basis[0];
        let nw = v.form(w, w);
        let mut g = f.identity(d);
        if f.is_zero(nw) {
            // x ↦ x + δ (x, w) w
            let a = f.delta();
            for j in 0..d {
                let e: FinVec = (0..d).map(|i| if i == j { f.one() } else { f.zero() }).collect();
                let c = f.mul(a, v.form(&e, w));
                for i in 0..d {
                    g[i][j] = f.add(g[i][j], f.mul(c, w[i]));
                }
            }
        } else {
            // x ↦ x + (λ − 1)(x, w)/(w, w) w
            let c0 = f.mul(f.sub(lambda, f.one()), f.inv(nw));
            for j in 0..d {
                let e: FinVec = (0..d).map(|i| if i == j { f.one() } else { f.zero() }).collect();
                let c = f.mul(c0, v.form(&e, w));
                for i in 0..d {
                    g[i][j] = f.add(g[i][j], f.mul(c, w[i]));
                }
            }
        }
        if !v.is_unitary(&g) {
            return Err(Error::Precondition("generator is not unitary".into()));
        }
        gens.push(g);
    }
    Ok(gens)
}

/// Closure of a generating set, up to `limit` elements.
pub fn group_closure(f: &Fq2, gens: &[FinMat], d: usize, limit: usize) -> Result<Vec<FinMat>> {
    let id = f.identity(d);
    let mut seen: HashSet<FinMat> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(id.clone());
    queue.push_back(id);
    while let Some(g) = queue.pop_front() {
        for s in gens {
            let h = f.mat_mul(s, &g);
            if seen.insert(h.clone()) {
                if seen.len() > limit {
                    return Err(Error::BudgetExceeded { index_exp: seen.len() as u64, budget_exp: limit as u64 });
                }
                queue.push_back(h);
            }
        }
    }
    let mut out: Vec<FinMat> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

/// Exhaustive count of unitary matrices (small d only).
pub fn unitary_order_brute(v: &FinHermSpace) -> Result<u64> {
    let f = v.f;
    let d = v.dim();
    let elems = f.elements();
    let n = elems.len() as u64;
    let total = n.checked_pow((d * d) as u32).unwrap_or(u64::MAX);
    if total > 1 << 24 {
        return Err(Error::BudgetExceeded { index_exp: total, budget_exp: 1 << 24 });
    }
    let mut count = 0;
    for code in 0..total {
        let mut c = code;
        let mut g = vec![vec![f.zero(); d]; d];
        for row in g.iter_mut() {
            for x in row.iter_mut() {
                *x = elems[(c % n) as usize];
                c /= n;
            }
        }
        if v.is_unitary(&g) {
            count += 1;
        }
    }
    Ok(count)
}

/// Block-diagonal embedding of g acting on the first coordinates, identity after.
pub fn embed_block(f: &Fq2, g: &FinMat, d: usize) -> FinMat {
    let mut out = f.identity(d);
    for (i, row) in g.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            out[i][j] = *x;
        }
    }
    out
}

/// Number of orbits of ⟨gens⟩ on a finite invariant point set.
pub fn orbit_count<P, A>(gens: &[FinMat], points: &[P], act: A) -> Result<usize>
where
    P: Clone + Eq + std::hash::Hash,
    A: Fn(&FinMat, &P) -> P,
{
    Ok(orbit_partition(gens, points, act)?.len())
}

/// The orbits themselves, each sorted by position in `points`.
pub fn orbit_partition<P, A>(gens: &[FinMat], points: &[P], act: A) -> Result<Vec<Vec<usize>>>
where
    P: Clone + Eq + std::hash::Hash,
    A: Fn(&FinMat, &P) -> P,
{
    let index: HashMap<P, usize> = points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let mut parent: Vec<usize> = (0..points.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, pt) in points.iter().enumerate() {
        for g in gens {
            let img = act(g, pt);
            let j = *index
                .get(&img)
                .ok_or_else(|| Error::Precondition("point set is not stable under the group".into()))?;
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut classes: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..points.len() {
        let r = find(&mut parent, i);
        classes.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = classes.into_values().collect();
    out.sort();
    Ok(out)
}

fn act_subspace(f: Fq2) -> impl Fn(&FinMat, &FinSubspace) -> FinSubspace {
    move |g, s| s.apply(&f, g)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitReport {
    pub points: usize,
    pub orbits: usize,
}

/// Space of dimension d with an anisotropic last basis vector ū of norm 1,
/// and generators of U(ū^⊥) × 1.
fn space_with_anisotropic(f: Fq2, d: usize) -> Result<(FinHermSpace, Vec<FinMat>, FinVec)> {
    let v = FinHermSpace::standard(f, d);
    let flat = FinHermSpace::standard(f, d - 1);
    let gens = unitary_generators(&flat)?.iter().map(|g| embed_block(&f, g, d)).collect();
    let mut u = vec![f.zero(); d];
    u[d - 1] = f.one();
    Ok((v, gens, u))
}

/// Orbits of the stabilizer of type-0 flat data on type-r lattices inside
/// Λ♭₀ ⊕ ⟨u₀⟩, reduced to U(W̄♭) acting on isotropic subspaces of
/// dimension (r − ε)/2 in a space of dimension n + 1 − ε.
pub fn stabilizer_orbits(f: Fq2, n: usize, r: usize) -> Result<OrbitReport> {
    let eps = r % 2;
    let d = n + 1 - eps;
    let k = (r - eps) / 2;
    let (v, gens) = if eps == 1 {
        let v = FinHermSpace::standard(f, d);
        let g = unitary_generators(&v)?;
        (v, g)
    } else {
        let (v, g, _) = space_with_anisotropic(f, d)?;
        (v, g)
    };
    let pts = enumerate_isotropic(&v, k)?;
    let orbits = orbit_count(&gens, &pts, act_subspace(f))?;
    Ok(OrbitReport { points: pts.len(), orbits })
}

/// Transitivity on lagrangians of W̄ (dim r + ε) under the subgroup fixing
/// an anisotropic line pointwise (ε = 1) or the whole group (ε = 0).
pub fn lagrangian_orbits(f: Fq2, r: usize) -> Result<OrbitReport> {
    let eps = r % 2;
    let d = r + eps;
    let (v, gens) = if eps == 1 {
        let (v, g, _) = space_with_anisotropic(f, d)?;
        (v, g)
    } else {
        let v = FinHermSpace::standard(f, d);
        let g = unitary_generators(&v)?;
        (v, g)
    };
    let pts = enumerate_isotropic(&v, d / 2)?;
    let orbits = orbit_count(&gens, &pts, act_subspace(f))?;
    Ok(OrbitReport { points: pts.len(), orbits })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CosetCheck {
    /// |U(W̄)/P̄|, the number of isotropic subspaces in the full orbit.
    pub total: usize,
    pub plus: usize,
    pub minus: usize,
    pub disjoint: bool,
    pub covers: bool,
    /// Each point lies in the first part exactly when it is orthogonal to ū.
    pub criterion_matches: bool,
}

/// Exhaustive check of K K⁺ = K_n K⁺ ⊔ K_n h K⁺ through the finite quotient:
/// U(W̄)·N⁺ splits into U(W̄♭)·N⁺ and U(W̄♭)·h̄N⁺.
pub fn coset_decomposition(f: Fq2, n: usize, r: usize) -> Result<CosetCheck> {
    if r % 2 != 0 || r == 0 || r > n {
        return Err(Error::Precondition("needs r even with 1 ≤ r ≤ n".into()));
    }
    let d = n + 1;
    let k = r / 2;
    let (v, flat_gens, u) = space_with_anisotropic(f, d)?;
    let full_gens = unitary_generators(&v)?;
    let base = enumerate_isotropic(&v, k)?
        .into_iter()
        .find(|s| v.orthogonal(&u, s))
        .ok_or_else(|| Error::Precondition("no isotropic subspace orthogonal to ū".into()))?;
    // full orbit with witnesses
    let mut witness: HashMap<FinSubspace, FinMat> = HashMap::new();
    let mut queue = VecDeque::new();
    witness.insert(base.clone(), f.identity(d));
    queue.push_back(base.clone());
    while let Some(s) = queue.pop_front() {
        let w = witness[&s].clone();
        for g in &full_gens {
            let t = s.apply(&f, g);
            if !witness.contains_key(&t) {
                witness.insert(t.clone(), f.mat_mul(g, &w));
                queue.push_back(t);
            }
        }
    }
    let mut full: Vec<FinSubspace> = witness.keys().cloned().collect();
    full.sort();
    let other = full
        .iter()
        .find(|s| !v.orthogonal(&u, s))
        .ok_or_else(|| Error::Precondition("second orbit is empty".into()))?;
    let h = witness[other].clone();
    let orbit_of = |start: &FinSubspace| -> HashSet<FinSubspace> {
        let mut seen = HashSet::new();
        let mut q = VecDeque::new();
        seen.insert(start.clone());
        q.push_back(start.clone());
        while let Some(s) = q.pop_front() {
            for g in &flat_gens {
                let t = s.apply(&f, g);
                if seen.insert(t.clone()) {
                    q.push_back(t);
                }
            }
        }
        seen
    };
    let plus = orbit_of(&base);
    let minus = orbit_of(&base.apply(&f, &h));
    let disjoint = plus.is_disjoint(&minus);
    let covers = full.iter().all(|s| plus.contains(s) || minus.contains(s)) && plus.len() + minus.len() == full.len();
    let criterion_matches = full.iter().all(|s| plus.contains(s) == v.orthogonal(&u, s));
    Ok(CosetCheck { total: full.len(), plus: plus.len(), minus: minus.len(), disjoint, covers, criterion_matches })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetEquality {
    pub left: usize,
    pub right: usize,
    pub equal: bool,
}

/// K⁰·Λ⁻ = K_1·Λ⁻ at n = 1 in the finite quotient: isotropic lines of the
/// 2-dimensional space versus the U(ū^⊥) orbit of one of them.
pub fn kfk_n1(f: Fq2) -> Result<SetEquality> {
    let (v, flat_gens, _) = space_with_anisotropic(f, 2)?;
    let full_gens = unitary_generators(&v)?;
    let lines = enumerate_isotropic(&v, 1)?;
    let start = lines.first().cloned().ok_or(Error::DegenerateForm)?;
    let orbit = |gens: &[FinMat]| -> HashSet<FinSubspace> {
        let mut seen = HashSet::new();
        let mut q = VecDeque::new();
        seen.insert(start.clone());
        q.push_back(start.clone());
        while let Some(s) = q.pop_front() {
            for g in gens {
                let t = s.apply(&f, g);
                if seen.insert(t.clone()) {
                    q.push_back(t);
                }
            }
        }
        seen
    };
    let left = orbit(&full_gens);
    let right = orbit(&flat_gens);
    Ok(SetEquality { left: left.len(), right: right.len(), equal: left == right })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverKind {
    Type0OverType2,
    Type0OverType0,
    /// isotropic lines of a 3-dim space orthogonal to a fixed anisotropic line
    IsotropicInPerp,
}

/// Finite counts: type-0 lattices over a type-2 lattice are lagrangians of
/// the 2-dim quotient, and so on.
pub fn lattice_covers_count(f: Fq2, kind: CoverKind) -> Result<usize> {
    match kind {
        CoverKind::Type0OverType2 => Ok(enumerate_isotropic(&FinHermSpace::standard(f, 2), 1)?.len()),
        CoverKind::Type0OverType0 => Ok(enumerate_isotropic(&FinHermSpace::standard(f, 0), 0)?.len()),
        CoverKind::IsotropicInPerp => {
            let (v, _, u) = space_with_anisotropic(f, 3)?;
            Ok(enumerate_isotropic(&v, 1)?.into_iter().filter(|s| v.orthogonal(&u, s)).count())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MirabolicIndex {
    pub gl2_order: u64,
    pub mirabolic_order: u64,
    pub index: u64,
}

/// |GL₂(F_{q²})| / |{[[a, 0], [c, 1]]}| by exhaustive counting.
pub fn mirabolic_index(f: Fq2) -> MirabolicIndex {
    let elems = f.elements();
    let mut gl = 0u64;
    let mut mir = 0u64;
    for &a in &elems {
        for &b in &elems {
            for &c in &elems {
                for &d in &elems {
                    let det = f.sub(f.mul(a, d), f.mul(b, c));
                    if f.is_zero(det) {
                        continue;
                    }
                    gl += 1;
                    if f.is_zero(b) && d == f.one() {
                        mir += 1;
                    }
                }
            }
        }
    }
    MirabolicIndex { gl2_order: gl, mirabolic_order: mir, index: gl / mir }
}

/// Witt transitivity on vectors: orbits of U(V) on the nonzero vectors of the
/// standard d-dimensional space, against the number of distinct norms.
pub fn vector_norm_orbits(f: Fq2, d: usize) -> Result<(usize, usize)> {
    let v = FinHermSpace::standard(f, d);
    let gens = unitary_generators(&v)?;
    let elems = f.elements();
    let mut pts: Vec<FinVec> = vec![vec![]];
    for _ in 0..d {
        pts = pts.into_iter().flat_map(|p| elems.iter().map(move |&e| {
            let mut q = p.clone();
            q.push(e);
            q
        })).collect();
    }
    pts.retain(|x| x.iter().any(|&e| !f.is_zero(e)));
    let norms: HashSet<Fe> = pts.iter().map(|x| v.form(x, x)).collect();
    let orbits = orbit_count(&gens, &pts, |g, x| f.mat_vec(g, x))?;
    Ok((norms.len(), orbits))
}

/// Size of the GL_n(F_{q²})-orbit of a nonzero vector, by closure over
/// elementary generators.
pub fn nonzero_vector_orbit(f: Fq2, n: usize) -> usize {
    let mut gens: Vec<FinMat> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut e = f.identity(n);
                e[i][j] = f.one();
                gens.push(e);
            }
        }
    }
    let prim = f.units().into_iter().find(|&z| {
        let order = f.q() * f.q() - 1;
        (1..order).all(|k| f.pow(z, k) != f.one())
    });
    let mut dg = f.identity(n);
    dg[0][0] = prim.expect("cyclic unit group");
    gens.push(dg);
    let mut start = vec![f.zero(); n];
    start[n - 1] = f.one();
    let mut seen = HashSet::new();
    let mut q = VecDeque::new();
    seen.insert(start.clone());
    q.push_back(start);
    while let Some(x) = q.pop_front() {
        for g in &gens {
            let y = f.mat_vec(g, &x);
            if seen.insert(y.clone()) {
                q.push_back(y);
            }
        }
    }
    seen.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms() {
        let f = Fq2::new(5).unwrap();
        for x in f.units() {
            assert_eq!(f.mul(x, f.inv(x)), f.one());
            assert_eq!(f.conj(f.conj(x)), x);
            // Frobenius is x^q
            assert_eq!(f.conj(x), f.pow(x, 5));
        }
        assert_eq!(f.norm_one().len(), 6);
    }

    #[test]
    fn subspace_counts() {
        let f = Fq2::new(3).unwrap();
        // lines in F_9^2: 10, planes in F_9^3: 91
        assert_eq!(enumerate_subspaces(&f, 2, 1, DEFAULT_BUDGET).unwrap().len(), 10);
        assert_eq!(enumerate_subspaces(&f, 3, 2, DEFAULT_BUDGET).unwrap().len(), 91);
    }

    #[test]
    fn anisotropic_line_has_no_isotropic_vectors() {
        let f = Fq2::new(3).unwrap();
        assert!(enumerate_isotropic(&FinHermSpace::standard(f, 1), 1).unwrap().is_empty());
        assert_eq!(enumerate_isotropic(&FinHermSpace::standard(f, 1), 0).unwrap().len(), 1);
    }

    #[test]
    fn rejects_non_hermitian() {
        let f = Fq2::new(3).unwrap();
        let g = vec![vec![f.one(), f.delta()], vec![f.delta(), f.one()]];
        assert!(FinHermSpace::new(f, g).is_err());
    }
}
