//! Rationals, p-adic valuations and the λ-adic valuation on `Z[ζ_p]`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

/// An integer valuation extended by `+∞`, the valuation of zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    pub fn finite(&self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(*v),
            Valuation::Infinite => None,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_i64(*v),
            Valuation::Infinite => s.serialize_str("+inf"),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut i = 3u64;
    while i.saturating_mul(i) <= n {
        if n.is_multiple_of(i) {
            return false;
        }
        i += 2;
    }
    true
}

/// Smallest prime `>= n`.
pub fn next_prime(mut n: u64) -> u64 {
    while !is_prime(n) {
        n += 1;
    }
    n
}

pub fn ensure_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Trial-division factorization of a machine integer, primes ascending.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q.saturating_mul(q) <= n {
        if n.is_multiple_of(q) {
            let mut e = 0;
            while n.is_multiple_of(q) {
                n /= q;
                e += 1;
            }
            out.push((q, e));
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Exponent of `p` in a nonzero integer; `p` is assumed prime.
pub(crate) fn vp_nonzero_int(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

pub fn vp_int(n: &BigInt, p: u64) -> Result<Valuation> {
    ensure_prime(p)?;
    if n.is_zero() {
        return Ok(Valuation::Infinite);
    }
    Ok(Valuation::Finite(vp_nonzero_int(n, p)))
}

/// The p-adic valuation `v` with `x = p^v · u`, `u` a p-adic unit.
pub fn vp(x: &Rational, p: u64) -> Result<Valuation> {
    ensure_prime(p)?;
    Ok(vp_unchecked(x, p))
}

pub(crate) fn vp_unchecked(x: &Rational, p: u64) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    Valuation::Finite(vp_nonzero_int(x.numer(), p) - vp_nonzero_int(x.denom(), p))
}

pub fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `∏_{i=0}^{k-1} (1 - i·m) / k!`, a p-adic integer for every prime `p ∤ m`.
pub fn lemma61_value(k: u64, m: u64) -> Rational {
    let m = BigInt::from(m);
    let num = (0..k).fold(BigInt::one(), |acc, i| acc * (BigInt::one() - BigInt::from(i) * &m));
    Rational::new(num, factorial(k))
}

/// `log` of a positive big integer, accurate to a few ulps.
pub(crate) fn ln_bigint(n: &BigInt) -> f64 {
    debug_assert!(n.is_positive());
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("finite below 2^1000").ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().expect("64-bit integer").ln() + (shift as f64) * std::f64::consts::LN_2
}

/// `n·2^e` rounded to f64 (relative error below 2^-52, before any
/// overflow to infinity or underflow to zero).
pub(crate) fn scaled_f64(n: &BigInt, e: i64) -> f64 {
    let bits = n.bits() as i64;
    let (m, e) = if bits > 64 { (n >> (bits - 64) as usize, e + bits - 64) } else { (n.clone(), e) };
    let mut x = m.to_f64().expect("64-bit integer");
    let mut e = e;
    while e > 0 {
        let s = e.min(1000);
        x *= 2f64.powi(s as i32);
        e -= s;
    }
    while e < 0 {
        let s = (-e).min(1000);
        x *= 2f64.powi(-(s as i32));
        e += s;
    }
    x
}

/// `x` rounded to f64 with relative error below 2^-51.
pub(crate) fn rational_to_f64(x: &Rational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let (n, d) = (x.numer(), x.denom());
    let k = (d.bits() as i64 - n.bits() as i64 + 66).max(0);
    scaled_f64(&((n << k as usize) / d), -k)
}

/// An element of `Z[ζ_p]`, stored as the coefficients of `1, ζ, …, ζ^{p-2}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicInt {
    p: u64,
    coeffs: Vec<BigInt>,
}

impl CyclotomicInt {
    /// Reduces an arbitrary polynomial in `ζ` (ascending coefficients) modulo
    /// `Φ_p`.
    pub fn from_poly(p: u64, poly: &[BigInt]) -> Result<Self> {
        ensure_prime(p)?;
        let pu = p as usize;
        // ζ^p = 1 first, then eliminate ζ^{p-1} = -(1 + ζ + … + ζ^{p-2}).
        let mut folded = vec![BigInt::zero(); pu];
        for (i, c) in poly.iter().enumerate() {
            folded[i % pu] += c;
        }
        let top = folded[pu - 1].clone();
        let coeffs = folded[..pu - 1].iter().map(|c| c - &top).collect();
        Ok(CyclotomicInt { p, coeffs })
    }

    pub fn from_int(p: u64, n: BigInt) -> Result<Self> {
        Self::from_poly(p, &[n])
    }

    pub fn zeta(p: u64) -> Result<Self> {
        Self::from_poly(p, &[BigInt::zero(), BigInt::one()])
    }

    /// `λ = 1 - ζ`.
    pub fn lambda(p: u64) -> Result<Self> {
        Self::from_poly(p, &[BigInt::one(), BigInt::from(-1)])
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(self.p, other.p, "mixing elements of different cyclotomic rings");
    }

    /// `Norm_{Q(ζ)/Q}(x) = Res_T(Φ_p(T), x(T))`; `Φ_p` is monic, so the
    /// resultant is the product of the conjugates of `x`.
    pub fn norm(&self) -> BigInt {
        let mut x: Vec<BigInt> = self.coeffs.clone();
        while x.last().is_some_and(Zero::is_zero) {
            x.pop();
        }
        if x.is_empty() {
            return BigInt::zero();
        }
        let phi = vec![BigInt::one(); self.p as usize];
        resultant_int(&phi, &x)
    }
}

impl Add for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn add(self, rhs: &CyclotomicInt) -> CyclotomicInt {
        self.check_same(rhs);
        CyclotomicInt {
            p: self.p,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn sub(self, rhs: &CyclotomicInt) -> CyclotomicInt {
        self.check_same(rhs);
        CyclotomicInt {
            p: self.p,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn neg(self) -> CyclotomicInt {
        CyclotomicInt {
            p: self.p,
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn mul(self, rhs: &CyclotomicInt) -> CyclotomicInt {
        self.check_same(rhs);
        let mut prod = vec![BigInt::zero(); 2 * self.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                prod[i + j] += a * b;
            }
        }
        CyclotomicInt::from_poly(self.p, &prod).expect("prime already checked")
    }
}

impl fmt::Display for CyclotomicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*ζ")?,
                _ => write!(f, "{c}*ζ^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `v_λ(x)` for `λ = 1 - ζ_p`. Since `(λ)` is the only prime above `p` and
/// has residue degree one, `v_λ(x) = v_p(Norm(x))`.
pub fn cyclo_lambda_valuation(x: &CyclotomicInt) -> Valuation {
    let n = x.norm();
    if n.is_zero() {
        Valuation::Infinite
    } else {
        Valuation::Finite(vp_nonzero_int(&n, x.p))
    }
}

/// Resultant of two nonzero integer polynomials (ascending coefficients, no
/// trailing zeros) via a fraction-free determinant of the Sylvester matrix.
pub fn resultant_int(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let m = a.len() - 1;
    let n = b.len() - 1;
    let size = m + n;
    if size == 0 {
        return BigInt::one();
    }
    let mut mat = vec![vec![BigInt::zero(); size]; size];
    // rows 0..n: shifted copies of a (descending), rows n..n+m: copies of b
    for r in 0..n {
        for (k, c) in a.iter().rev().enumerate() {
            mat[r][r + k] = c.clone();
        }
    }
    for r in 0..m {
        for (k, c) in b.iter().rev().enumerate() {
            mat[n + r][r + k] = c.clone();
        }
    }
    bareiss_det(mat)
}

fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vp_examples() {
        assert_eq!(vp(&int(12), 2).unwrap(), Valuation::Finite(2));
        assert_eq!(vp(&rat(1, 9), 3).unwrap(), Valuation::Finite(-2));
        assert_eq!(vp(&int(0), 5).unwrap(), Valuation::Infinite);
        assert_eq!(vp(&int(12), 4), Err(Error::NotPrime(4)));
    }

    #[test]
    fn valuation_order() {
        assert!(Valuation::Finite(1_000_000) < Valuation::Infinite);
        assert_eq!(Valuation::Finite(2) + Valuation::Infinite, Valuation::Infinite);
    }

    #[test]
    fn lemma61_examples() {
        assert_eq!(lemma61_value(1, 7), int(1));
        // 1·(−1)·(−3)/3! = 1/2
        assert_eq!(lemma61_value(3, 2), rat(1, 2));
        // 1·(−2)·(−5)·(−8)/4! = −10/3
        assert_eq!(lemma61_value(4, 3), rat(-10, 3));
        assert_eq!(vp(&lemma61_value(3, 2), 5).unwrap(), Valuation::Finite(0));
        assert_eq!(vp(&lemma61_value(4, 3), 2).unwrap(), Valuation::Finite(1));
    }

    #[test]
    fn lambda_valuation_examples() {
        for p in [3u64, 5, 7, 11] {
            let one = CyclotomicInt::from_int(p, big(1)).unwrap();
            assert_eq!(cyclo_lambda_valuation(&one), Valuation::Finite(0));
            let lam = CyclotomicInt::lambda(p).unwrap();
            assert_eq!(lam.norm(), BigInt::from(p));
            assert_eq!(cyclo_lambda_valuation(&lam), Valuation::Finite(1));
            let pp = CyclotomicInt::from_int(p, BigInt::from(p)).unwrap();
            assert_eq!(cyclo_lambda_valuation(&pp), Valuation::Finite(p as i64 - 1));
            let zero = CyclotomicInt::from_int(p, big(0)).unwrap();
            assert_eq!(cyclo_lambda_valuation(&zero), Valuation::Infinite);
        }
    }

    #[test]
    fn zeta_has_order_p() {
        let z = CyclotomicInt::zeta(5).unwrap();
        let mut acc = CyclotomicInt::from_int(5, big(1)).unwrap();
        for _ in 0..5 {
            acc = &acc * &z;
        }
        assert_eq!(acc, CyclotomicInt::from_int(5, big(1)).unwrap());
        // 1 + ζ + ζ² + ζ³ + ζ⁴ = 0
        let s = CyclotomicInt::from_poly(5, &vec![big(1); 5]).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn resultant_small() {
        // Res(t - 2, t^2 + 1) = 2^2 + 1
        assert_eq!(resultant_int(&[big(-2), big(1)], &[big(1), big(0), big(1)]), big(5));
    }

    #[test]
    fn ln_bigint_large() {
        let n = BigInt::from(3).pow(2000);
        let expect = 2000.0 * 3f64.ln();
        assert!((ln_bigint(&n) - expect).abs() < 1e-9 * expect);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn nonzero_rat() -> impl Strategy<Value = Rational> {
        (-10_000i64..=10_000, 1i64..=10_000)
            .prop_filter("nonzero", |(n, _)| *n != 0)
            .prop_map(|(n, d)| rat(n, d))
    }

    fn prime() -> impl Strategy<Value = u64> {
        prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])
    }

    proptest! {
        #[test]
        fn valuation_is_multiplicative(x in nonzero_rat(), y in nonzero_rat(), p in prime()) {
            let (vx, vy) = (vp(&x, p).unwrap().finite().unwrap(), vp(&y, p).unwrap().finite().unwrap());
            prop_assert_eq!(vp(&(&x * &y), p).unwrap(), Valuation::Finite(vx + vy));
        }

        #[test]
        fn valuation_is_ultrametric(x in nonzero_rat(), y in nonzero_rat(), p in prime()) {
            let (vx, vy) = (vp(&x, p).unwrap(), vp(&y, p).unwrap());
            let vs = vp(&(&x + &y), p).unwrap();
            prop_assert!(vs >= vx.min(vy));
            if vx != vy {
                prop_assert_eq!(vs, vx.min(vy));
            }
        }

        #[test]
        fn lemma61_integral_away_from_m(k in 1u64..=30, m in 1u64..=30, p in prime()) {
            prop_assume!(m % p != 0);
            prop_assert!(vp(&lemma61_value(k, m), p).unwrap() >= Valuation::Finite(0));
        }

        #[test]
        fn lambda_valuation_is_additive(
            p in prop::sample::select(vec![3u64, 5, 7]),
            a in prop::collection::vec(-20i64..=20, 6),
            b in prop::collection::vec(-20i64..=20, 6),
        ) {
            let mk = |c: &[i64]| CyclotomicInt::from_poly(p, &c.iter().map(|&x| big(x)).collect::<Vec<_>>()).unwrap();
            let (x, y) = (mk(&a), mk(&b));
            prop_assume!(!x.is_zero() && !y.is_zero());
            let (vx, vy) = (cyclo_lambda_valuation(&x), cyclo_lambda_valuation(&y));
            let vxy = cyclo_lambda_valuation(&(&x * &y));
            prop_assert_eq!(vxy.finite().unwrap(), vx.finite().unwrap() + vy.finite().unwrap());
            prop_assert_eq!((&x * &y).norm(), x.norm() * y.norm());
        }
    }
}
