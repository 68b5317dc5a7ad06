//! Exact arithmetic in F0 = Q_p, its unramified quadratic extension F = F0(δ),
//! and Laurent polynomials in X = q^{-s}.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `p^k` as a rational, negative `k` allowed.
pub fn p_pow(p: u64, k: i64) -> Q {
    let base = BigInt::from(p).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        Q::from_integer(base)
    } else {
        Q::new(BigInt::one(), base)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// The residue characteristic and the model δ² = ε of the quadratic extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldConfig {
    p: u64,
    eps: u64,
}

impl FieldConfig {
    pub fn new(p: u64) -> Result<Self> {
        if p == 2 || !is_prime(p) {
            return Err(Error::BadPrime(p));
        }
        let eps = (2..p)
            .find(|&a| pow_mod(a, (p - 1) / 2, p) == p - 1)
            .expect("odd primes have nonresidues");
        Ok(FieldConfig { p, eps })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Residue cardinality of F0.
    pub fn q(&self) -> u64 {
        self.p
    }

    pub fn eps(&self) -> u64 {
        self.eps
    }

    pub fn uniformizer(&self) -> Q {
        qi(self.p as i64)
    }

    pub fn delta(&self) -> FNumber {
        FNumber::new(Q::zero(), Q::one(), self.eps)
    }

    pub fn f(&self, a: Q, b: Q) -> FNumber {
        FNumber::new(a, b, self.eps)
    }

    pub fn fi(&self, a: i64, b: i64) -> FNumber {
        FNumber::new(qi(a), qi(b), self.eps)
    }

    /// An integer whose class generates (Z/p^k)^× for every k.
    pub fn unit_generator(&self) -> i64 {
        let p = self.p;
        let p2 = p * p;
        let order = p * (p - 1);
        let mut factors = vec![p];
        let mut m = p - 1;
        let mut d = 2;
        while d * d <= m {
            if m % d == 0 {
                factors.push(d);
                while m % d == 0 {
                    m /= d;
                }
            }
            d += 1;
        }
        if m > 1 {
            factors.push(m);
        }
        (2..p2)
            .find(|&g| g % p != 0 && factors.iter().all(|&f| pow_mod(g, order / f, p2) != 1))
            .expect("primitive roots mod p^2 exist") as i64
    }
}

/// p-adic valuation of a nonzero integer.
pub fn val_int(n: &BigInt, p: u64) -> u64 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

pub fn val_q(x: &Q, p: u64) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::ValuationOfZero);
    }
    Ok(val_int(x.numer(), p) as i64 - val_int(x.denom(), p) as i64)
}

/// Unramified quadratic character of F0^×.
pub fn eta(x: &Q, p: u64) -> Result<i8> {
    Ok(if val_q(x, p)? % 2 == 0 { 1 } else { -1 })
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

/// Canonical representative of `x` modulo `p^k Z_p`: a rational `m / p^j` with
/// `0 <= m < p^{k+j}` and `p^j` the p-part of the denominator of `x`.
pub fn reduce_q_mod(x: &Q, p: u64, k: i64) -> Q {
    if x.is_zero() {
        return Q::zero();
    }
    let v = val_q(x, p).unwrap();
    if v >= k {
        return Q::zero();
    }
    let j = (-v).max(0);
    let e = (k + j) as u32;
    let pb = BigInt::from(p);
    let modulus = pb.pow(e);
    let pj = pb.pow(j as u32);
    let num = x.numer().clone();
    let den = x.denom() / &pj;
    let m = (num * mod_inverse(&den.mod_floor(&modulus), &modulus)).mod_floor(&modulus);
    Q::new(m, pj)
}

/// Element a + bδ of F. The stored ε is only consulted when b ≠ 0, so rational
/// constants (b = 0) may carry ε = 0.
#[derive(Clone)]
pub struct FNumber {
    a: Q,
    b: Q,
    eps: u64,
}

impl FNumber {
    pub fn new(a: Q, b: Q, eps: u64) -> Self {
        let eps = if b.is_zero() { 0 } else { eps };
        assert!(b.is_zero() || eps != 0, "irrational FNumber needs ε");
        FNumber { a, b, eps }
    }

    pub fn from_q(a: Q) -> Self {
        FNumber { a, b: Q::zero(), eps: 0 }
    }

    pub fn re(&self) -> &Q {
        &self.a
    }

    pub fn im(&self) -> &Q {
        &self.b
    }

    pub fn eps(&self) -> u64 {
        self.eps
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        FNumber { a: self.a.clone(), b: -self.b.clone(), eps: self.eps }
    }

    pub fn norm(&self) -> Q {
        let e = qi(self.eps as i64);
        &self.a * &self.a - e * &self.b * &self.b
    }

    pub fn trace(&self) -> Q {
        &self.a + &self.a
    }

    /// Normalized valuation on F, val(ϖ) = 1.
    pub fn val(&self, p: u64) -> Result<i64> {
        if self.is_zero() {
            return Err(Error::ValuationOfZero);
        }
        if self.b.is_zero() {
            return val_q(&self.a, p);
        }
        if self.a.is_zero() {
            return val_q(&self.b, p);
        }
        Ok(val_q(&self.a, p)?.min(val_q(&self.b, p)?))
    }

    pub fn inv(&self) -> Self {
        let n = self.norm();
        assert!(!n.is_zero(), "inverse of zero");
        FNumber { a: &self.a / &n, b: -(&self.b / &n), eps: self.eps }
    }

    pub fn scale_q(&self, c: &Q) -> Self {
        FNumber::new(&self.a * c, &self.b * c, self.eps)
    }

    fn merged_eps(&self, other: &Self) -> u64 {
        if self.eps != 0 && other.eps != 0 {
            debug_assert_eq!(self.eps, other.eps, "mixing quadratic models");
        }
        self.eps.max(other.eps)
    }
}

impl PartialEq for FNumber {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b
    }
}
impl Eq for FNumber {}

impl Hash for FNumber {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.a.hash(state);
        self.b.hash(state);
    }
}

impl PartialOrd for FNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        self.a.cmp(&other.a).then_with(|| self.b.cmp(&other.b))
    }
}

impl fmt::Debug for FNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}d", self.b)
        } else if self.b.is_negative() {
            write!(f, "{}-{}d", self.a, -self.b.clone())
        } else {
            write!(f, "{}+{}d", self.a, self.b)
        }
    }
}

impl Add for FNumber {
    type Output = FNumber;
    fn add(self, o: FNumber) -> FNumber {
        let eps = self.merged_eps(&o);
        FNumber::new(self.a + o.a, self.b + o.b, eps)
    }
}

impl Sub for FNumber {
    type Output = FNumber;
    fn sub(self, o: FNumber) -> FNumber {
        let eps = self.merged_eps(&o);
        FNumber::new(self.a - o.a, self.b - o.b, eps)
    }
}

impl Mul for FNumber {
    type Output = FNumber;
    fn mul(self, o: FNumber) -> FNumber {
        let eps = self.merged_eps(&o);
        let bb = if self.b.is_zero() || o.b.is_zero() {
            Q::zero()
        } else {
            qi(eps as i64) * &self.b * &o.b
        };
        let a = &self.a * &o.a + bb;
        let b = &self.a * &o.b + &self.b * &o.a;
        FNumber::new(a, b, eps)
    }
}

impl Div for FNumber {
    type Output = FNumber;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: FNumber) -> FNumber {
        self * o.inv()
    }
}

impl Neg for FNumber {
    type Output = FNumber;
    fn neg(self) -> FNumber {
        FNumber { a: -self.a, b: -self.b, eps: self.eps }
    }
}

impl Zero for FNumber {
    fn zero() -> Self {
        FNumber::from_q(Q::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for FNumber {
    fn one() -> Self {
        FNumber::from_q(Q::one())
    }
}

/// Scalars of the matrix and lattice layers: a field with a discrete valuation
/// whose valuation ring has residue field of size p^`RESIDUE_DEGREE`.
pub trait Scalar:
    Clone
    + PartialEq
    + Eq
    + Hash
    + Ord
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
{
    const RESIDUE_DEGREE: u32;

    fn from_q(x: Q) -> Self;
    fn conj(&self) -> Self;
    fn val(&self, p: u64) -> Option<i64>;
    /// Canonical representative modulo ϖ^k times the valuation ring.
    fn reduce_mod(&self, p: u64, k: i64) -> Self;
    /// Canonical representatives of O / ϖ^k, given a model of the residue field.
    fn residues(p: u64, k: u32, eps: u64) -> Vec<Self>;
    fn is_integral(&self, p: u64) -> bool {
        self.val(p).map_or(true, |v| v >= 0)
    }
}

impl Scalar for Q {
    const RESIDUE_DEGREE: u32 = 1;

    fn from_q(x: Q) -> Self {
        x
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn val(&self, p: u64) -> Option<i64> {
        val_q(self, p).ok()
    }
    fn reduce_mod(&self, p: u64, k: i64) -> Self {
        reduce_q_mod(self, p, k)
    }
    fn residues(p: u64, k: u32, _eps: u64) -> Vec<Self> {
        let m = (p as i64).pow(k);
        (0..m).map(qi).collect()
    }
}

impl Scalar for FNumber {
    const RESIDUE_DEGREE: u32 = 2;

    fn from_q(x: Q) -> Self {
        FNumber::from_q(x)
    }
    fn conj(&self) -> Self {
        FNumber::conj(self)
    }
    fn val(&self, p: u64) -> Option<i64> {
        FNumber::val(self, p).ok()
    }
    fn reduce_mod(&self, p: u64, k: i64) -> Self {
        FNumber::new(reduce_q_mod(&self.a, p, k), reduce_q_mod(&self.b, p, k), self.eps)
    }
    fn residues(p: u64, k: u32, eps: u64) -> Vec<Self> {
        let m = (p as i64).pow(k);
        let mut out = Vec::with_capacity((m * m) as usize);
        for a in 0..m {
            for b in 0..m {
                out.push(FNumber::new(qi(a), qi(b), eps));
            }
        }
        out
    }
}

/// η̃(z)·|z|_F^{s/2} encoded in X = q^{-s}: (−1)^v X^v with v = val_F(z).
pub fn eta_tilde_s(z: &FNumber, p: u64) -> Result<XLaurent> {
    let v = z.val(p)?;
    let sign = if v % 2 == 0 { 1 } else { -1 };
    Ok(XLaurent::monomial(qi(sign), v))
}

/// Finitely supported Laurent polynomial Σ a_k X^k.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Laurent<C> {
    coeffs: BTreeMap<i64, C>,
}

impl<C> Laurent<C>
where
    C: Clone + Zero + One + PartialEq + Neg<Output = C>,
{
    pub fn zero() -> Self {
        Laurent { coeffs: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(c, 0)
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn monomial(c: C, k: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(k, c);
        }
        Laurent { coeffs }
    }

    pub fn x_pow(k: i64) -> Self {
        Self::monomial(C::one(), k)
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, C)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    pub fn add_term(&mut self, k: i64, c: C) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(k).or_insert_with(C::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    pub fn coeff(&self, k: i64) -> C {
        self.coeffs.get(&k).cloned().unwrap_or_else(C::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Value at X = 1, i.e. at s = 0.
    pub fn value_at_one(&self) -> C {
        self.coeffs.values().fold(C::zero(), |acc, c| acc + c.clone())
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(k, a)| (*k, a.clone() * c.clone())))
    }

    /// Substitute X ↦ X^m (m may be negative).
    pub fn subs_pow(&self, m: i64) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(k, a)| (k * m, a.clone())))
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc * self.clone())
    }
}

impl<C> Laurent<C>
where
    C: Clone + Zero + One + PartialEq + Neg<Output = C> + FromPrimitive,
{
    /// c with d/ds P(q^{-s}) at s=0 equal to c·log q, namely −Σ k a_k.
    pub fn d_at_zero(&self) -> C {
        self.coeffs.iter().fold(C::zero(), |acc, (k, a)| {
            acc + -(C::from_i64(*k).expect("exponent fits") * a.clone())
        })
    }
}

impl<C> Add for Laurent<C>
where
    C: Clone + Zero + One + PartialEq + Neg<Output = C>,
{
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for (k, c) in o.coeffs {
            self.add_term(k, c);
        }
        self
    }
}

impl<C> Neg for Laurent<C>
where
    C: Clone + Zero + One + PartialEq + Neg<Output = C>,
{
    type Output = Self;
    fn neg(self) -> Self {
        Laurent { coeffs: self.coeffs.into_iter().map(|(k, c)| (k, -c)).collect() }
    }
}

impl<C> Sub for Laurent<C>
where
    C: Clone + Zero + One + PartialEq + Neg<Output = C>,
{
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<C> Mul for Laurent<C>
where
    C: Clone + Zero + One + PartialEq + Neg<Output = C>,
{
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::zero();
        for (i, a) in &self.coeffs {
            for (j, b) in &o.coeffs {
                out.add_term(i + j, a.clone() * b.clone());
            }
        }
        out
    }
}

impl<C> Neg for &Laurent<C>
where
    C: Clone + Zero + One + PartialEq + Neg<Output = C>,
{
    type Output = Laurent<C>;
    fn neg(self) -> Laurent<C> {
        -self.clone()
    }
}

impl<C: fmt::Display + Zero + Signed + Clone> fmt::Display for Laurent<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (idx, (k, c)) in self.coeffs.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let unit = mag.is_one();
            match (*k, unit) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "X")?,
                (1, false) => write!(f, "{mag}X")?,
                (k, true) => write!(f, "X^{k}")?,
                (k, false) => write!(f, "{mag}X^{k}")?,
            }
        }
        Ok(())
    }
}

impl<C: fmt::Display + Zero + Signed + Clone> fmt::Debug for Laurent<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub type XLaurent = Laurent<Q>;

/// The rational value of x as an (i64 numerator, i64 denominator) pair when it fits.
pub fn q_to_pair(x: &Q) -> Option<(i64, i64)> {
    Some((x.numer().to_i64()?, x.denom().to_i64()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: u64) -> FieldConfig {
        FieldConfig::new(p).unwrap()
    }

    #[test]
    fn config_picks_least_nonresidue() {
        assert_eq!(cfg(3).eps(), 2);
        assert_eq!(cfg(5).eps(), 2);
        assert_eq!(cfg(7).eps(), 3);
        assert_eq!(cfg(17).eps(), 3);
        assert!(FieldConfig::new(2).is_err());
        assert!(FieldConfig::new(9).is_err());
    }

    #[test]
    fn unit_generator_generates_mod_p_squared() {
        for p in [3u64, 5, 7, 11] {
            let c = cfg(p);
            let g = c.unit_generator() as u64;
            let m = p * p;
            let mut seen = std::collections::HashSet::new();
            let mut x = 1u64;
            for _ in 0..m {
                seen.insert(x);
                x = x * g % m;
            }
            assert_eq!(seen.len() as u64, p * (p - 1));
        }
    }

    #[test]
    fn valuations() {
        assert_eq!(val_q(&qi(3), 3).unwrap(), 1);
        assert_eq!(val_q(&qf(1, 3), 3).unwrap(), -1);
        assert_eq!(val_q(&qf(18, 5), 3).unwrap(), 2);
        assert_eq!(val_q(&Q::zero(), 3), Err(Error::ValuationOfZero));
        let c = cfg(3);
        assert_eq!(c.delta().val(3).unwrap(), 0);
        assert_eq!(c.fi(3, 6).val(3).unwrap(), 1);
        assert_eq!(eta(&qi(3), 3).unwrap(), -1);
        assert_eq!(eta(&qi(2), 3).unwrap(), 1);
    }

    #[test]
    fn reduce_mod_is_canonical() {
        let p = 5;
        let x = qf(7, 25);
        let r = reduce_q_mod(&x, p, 1);
        let diff = &x - &r;
        assert!(diff.is_zero() || val_q(&diff, p).unwrap() >= 1);
        assert_eq!(r.denom(), &BigInt::from(25));
        // representatives of the same class agree
        let y = &x + qi(5 * 17);
        assert_eq!(reduce_q_mod(&y, p, 1), r);
        assert_eq!(reduce_q_mod(&qf(1, 2), 3, 2), qi(5));
        assert_eq!(reduce_q_mod(&qi(9), 3, 2), Q::zero());
    }

    #[test]
    fn field_arithmetic() {
        let c = cfg(5);
        let d = c.delta();
        assert_eq!(d.clone() * d.clone(), FNumber::from_q(qi(2)));
        let z = c.fi(3, 4);
        assert_eq!(z.norm(), qi(9 - 2 * 16));
        assert_eq!(z.clone() / z.clone(), FNumber::one());
        assert_eq!(z.conj().conj(), z);
        let w = c.fi(-1, 2);
        assert_eq!((z.clone() * w.clone()).conj(), z.conj() * w.conj());
    }

    #[test]
    fn eta_tilde_examples() {
        let c = cfg(3);
        let pi = FNumber::from_q(qi(3));
        assert_eq!(eta_tilde_s(&pi, 3).unwrap(), XLaurent::monomial(qi(-1), 1));
        assert_eq!(eta_tilde_s(&c.delta(), 3).unwrap(), XLaurent::one());
        assert_eq!(eta_tilde_s(&FNumber::from_q(qi(9)), 3).unwrap(), XLaurent::x_pow(2));
    }

    #[test]
    fn laurent_derivative() {
        assert_eq!(XLaurent::x_pow(1).d_at_zero(), qi(-1));
        assert_eq!(XLaurent::constant(qi(3)).d_at_zero(), qi(0));
        let p = XLaurent::x_pow(2) - XLaurent::x_pow(-1);
        assert_eq!(p.d_at_zero(), qi(-3));
        assert_eq!(p.value_at_one(), qi(0));
        assert_eq!(format!("{p}"), "-X^-1 + X^2");
    }
}
