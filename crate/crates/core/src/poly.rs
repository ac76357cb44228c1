//! Polynomial rings over Q and the truncated Laurent ring in `1/z`.
//!
//! Three containers live here:
//!
//! * [`UniPoly`]: dense univariate polynomials over [`Rational`], tagged with
//!   the variable they are written in (`t` or `z`).
//! * [`MultiPoly`]: sparse polynomials in `a1 … a9`, generic over the
//!   coefficient ring. Generic iterates use integer coefficients, the
//!   Böttcher coefficients rational ones.
//! * [`TruncLaurent`]: `c₋₁·z + c₀ + c₁/z + … + c_J/z^J` with coefficients in
//!   any [`Ring`]. Elements with `ν ≥ 0` form the quotient
//!   `R₀ / z^{-(J+1)} R₀` and behave as an honest ring; the single `z¹` slot
//!   is there so that `z + O(1)` series stay representable.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::exact_arith::{vp_nonzero_int, Rational, Valuation};

/// The ring interface shared by every coefficient type.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;

    fn add_assign_ref(&mut self, other: &Self) {
        *self = self.add_ref(other);
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}

/// A ring containing Q, so binomial series with rational exponents make sense.
pub trait QAlgebra: Ring {
    fn from_rational(r: &Rational) -> Self;
    fn scale(&self, r: &Rational) -> Self;
}

impl Ring for BigInt {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn add_assign_ref(&mut self, o: &Self) {
        *self += o;
    }
}

impl Ring for Rational {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn add_assign_ref(&mut self, o: &Self) {
        *self += o;
    }
}

impl QAlgebra for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn scale(&self, r: &Rational) -> Self {
        self * r
    }
}

// ---------------------------------------------------------------------------
// UniPoly

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    T,
    Z,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::Z => "z",
        }
    }
}

/// Dense univariate polynomial over Q; `coeffs[i]` is the coefficient of
/// `var^i` and the last stored coefficient is never zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UniPoly {
    var: Var,
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(var: Var, mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Ring::is_zero) {
            coeffs.pop();
        }
        UniPoly { var, coeffs }
    }

    pub fn from_ints(var: Var, coeffs: &[i64]) -> Self {
        Self::new(var, coeffs.iter().map(|&c| Rational::from_integer(c.into())).collect())
    }

    pub fn from_bigints(var: Var, coeffs: &[BigInt]) -> Self {
        Self::new(var, coeffs.iter().map(|c| Rational::from_integer(c.clone())).collect())
    }

    pub fn zero(var: Var) -> Self {
        UniPoly { var, coeffs: Vec::new() }
    }

    pub fn constant(var: Var, c: Rational) -> Self {
        Self::new(var, vec![c])
    }

    /// The polynomial `var` itself.
    pub fn identity(var: Var) -> Self {
        Self::from_ints(var, &[0, 1])
    }

    pub fn monomial(var: Var, c: Rational, deg: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); deg + 1];
        coeffs[deg] = c;
        Self::new(var, coeffs)
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn with_var(mut self, var: Var) -> Self {
        self.var = var;
        self
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial (degree −∞).
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading_coeff().is_some_and(Ring::is_one)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + other.coeff(i)).collect();
        UniPoly::new(self.var, coeffs)
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) - other.coeff(i)).collect();
        UniPoly::new(self.var, coeffs)
    }

    pub fn neg(&self) -> UniPoly {
        UniPoly { var: self.var, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, c: &Rational) -> UniPoly {
        UniPoly::new(self.var, self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Product, computed on integer images to avoid a gcd per coefficient
    /// multiplication.
    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero(self.var);
        }
        let (da, ia) = integer_image(&self.coeffs);
        let (db, ib) = integer_image(&other.coeffs);
        let prod = convolve_int(&ia, &ib);
        let den = da * db;
        UniPoly::new(
            self.var,
            prod.into_iter().map(|c| Rational::new(c, den.clone())).collect(),
        )
    }

    pub fn pow(&self, mut e: u32) -> UniPoly {
        let mut base = self.clone();
        let mut acc = UniPoly::constant(self.var, Rational::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `self(inner(x))` by Horner's rule; the result carries `inner`'s variable.
    pub fn compose(&self, inner: &UniPoly) -> UniPoly {
        let mut acc = UniPoly::zero(inner.var);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&UniPoly::constant(inner.var, c.clone()));
        }
        acc
    }

    pub fn derivative(&self) -> UniPoly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
            .collect();
        UniPoly::new(self.var, coeffs)
    }

    /// Euclidean division over Q.
    pub fn div_rem(&self, divisor: &UniPoly) -> Result<(UniPoly, UniPoly)> {
        let Some(dd) = divisor.degree() else {
            return Err(Error::ZeroPolynomial);
        };
        let lc_inv = divisor.leading_coeff().expect("nonzero").recip();
        let mut rem = self.coeffs.clone();
        let Some(sd) = self.degree().filter(|&sd| sd >= dd) else {
            return Ok((UniPoly::zero(self.var), self.clone()));
        };
        let mut quot = vec![Rational::zero(); sd - dd + 1];
        for k in (0..=sd - dd).rev() {
            let c = &rem[k + dd] * &lc_inv;
            if c.is_zero() {
                continue;
            }
            for (i, dc) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= &c * dc;
            }
            quot[k] = c;
        }
        Ok((UniPoly::new(self.var, quot), UniPoly::new(self.var, rem)))
    }

    /// Exact division; a nonzero remainder is an error, never rounded away.
    pub fn exact_div(&self, divisor: &UniPoly) -> Result<UniPoly> {
        let (q, r) = self.div_rem(divisor)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(Error::NotDivisible(format!("({divisor}) does not divide ({self})")))
        }
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("b nonzero");
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> UniPoly {
        match self.leading_coeff() {
            Some(lc) => self.scale(&lc.recip()),
            None => self.clone(),
        }
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// Splits `self = content · primitive` with `primitive` having coprime
    /// integer coefficients and positive leading coefficient.
    pub fn primitive_part(&self) -> Result<(Rational, Vec<BigInt>)> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let (den, ints) = integer_image(&self.coeffs);
        let mut g = ints.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        if ints.last().expect("nonzero").is_negative() {
            g = -g;
        }
        let prim: Vec<BigInt> = ints.iter().map(|c| c / &g).collect();
        Ok((Rational::new(g, den), prim))
    }

    pub fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        self.coeffs.iter().map(|c| c.is_integer().then(|| c.to_integer())).collect()
    }
}

/// Common denominator `L` and the integer vector `L·coeffs`.
pub(crate) fn integer_image(coeffs: &[Rational]) -> (BigInt, Vec<BigInt>) {
    let den = coeffs.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let ints = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
    (den, ints)
}

pub(crate) fn convolve_int(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

impl Ring for UniPoly {
    fn zero() -> Self {
        UniPoly::zero(Var::T)
    }
    fn one() -> Self {
        UniPoly::constant(Var::T, Rational::one())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn add_ref(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn neg_ref(&self) -> Self {
        self.neg()
    }
}

/// Writes `coeff·x^k` terms in descending degree, in the CLI grammar.
fn fmt_terms<'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (&'a Rational, String)>,
) -> fmt::Result {
    let mut first = true;
    for (c, mono) in terms {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let abs = c.abs();
        if first {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, "{}", if neg { " - " } else { " + " })?;
        }
        first = false;
        match (abs.is_one(), mono.is_empty()) {
            (true, true) => write!(f, "1")?,
            (true, false) => write!(f, "{mono}")?,
            (false, true) => write!(f, "{abs}")?,
            (false, false) => write!(f, "{abs}*{mono}")?,
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.var.name();
        fmt_terms(
            f,
            self.coeffs.iter().enumerate().rev().map(|(i, c)| {
                let mono = match i {
                    0 => String::new(),
                    1 => v.to_string(),
                    _ => format!("{v}^{i}"),
                };
                (c, mono)
            }),
        )
    }
}

// ---------------------------------------------------------------------------
// MultiPoly

pub const MAX_VARS: usize = 9;

/// Exponent vector ordered graded-lexicographically: total degree first, then
/// lexicographically with `a1` most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    degree: u32,
    exps: [u16; MAX_VARS],
}

impl Monomial {
    pub const ONE: Monomial = Monomial { degree: 0, exps: [0; MAX_VARS] };

    pub fn new(exps: &[u16]) -> Self {
        assert!(exps.len() <= MAX_VARS, "at most {MAX_VARS} variables");
        let mut e = [0u16; MAX_VARS];
        e[..exps.len()].copy_from_slice(exps);
        Monomial { degree: exps.iter().map(|&x| x as u32).sum(), exps: e }
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0u16; MAX_VARS];
        e[i] = 1;
        Monomial { degree: 1, exps: e }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exps(&self) -> &[u16; MAX_VARS] {
        &self.exps
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = self.exps;
        for (e, o) in exps.iter_mut().zip(other.exps.iter()) {
            *e = e.checked_add(*o).expect("exponent overflow");
        }
        Monomial { degree: self.degree + other.degree, exps }
    }

    fn render(&self) -> String {
        let mut parts = Vec::new();
        for (i, &e) in self.exps.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("a{}", i + 1)),
                _ => parts.push(format!("a{}^{e}", i + 1)),
            }
        }
        parts.join("*")
    }
}

/// Sparse polynomial in `a1 … a_nvars` with no zero coefficient stored.
#[derive(Debug, Clone)]
pub struct MultiPoly<C = Rational> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Ring> MultiPoly<C> {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables");
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::ONE, c);
        }
        p
    }

    /// The variable `a_{i+1}`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut p = Self::zero(nvars);
        p.terms.insert(Monomial::var(i), C::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// Total degree; `None` for zero.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn add_term(&mut self, m: Monomial, c: &C) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                o.get_mut().add_assign_ref(c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (m, c) in &other.terms {
            self.add_term(*m, c);
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars.max(other.nvars));
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), &ca.mul_ref(cb));
            }
        }
        out
    }

    /// Multiplication by the single variable `a_{i+1}`.
    pub fn mul_var(&self, i: usize) -> Self {
        let v = Monomial::var(i);
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.mul(&v), c.clone())).collect(),
        }
    }

    pub fn map_coeffs<D: Ring>(&self, f: impl Fn(&C) -> D) -> MultiPoly<D> {
        MultiPoly::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    /// Evaluates into an arbitrary ring `R`, embedding coefficients with `embed`.
    pub fn eval_in<R: Ring>(&self, point: &[R], embed: impl Fn(&C) -> R) -> R {
        assert!(point.len() >= self.nvars);
        let mut cache: Vec<Vec<R>> = point.iter().map(|x| vec![R::one(), x.clone()]).collect();
        let mut acc = R::zero();
        for (m, c) in &self.terms {
            let mut term = embed(c);
            for (i, &e) in m.exps.iter().enumerate().take(self.nvars) {
                if e == 0 {
                    continue;
                }
                let powers = &mut cache[i];
                while powers.len() <= e as usize {
                    let next = powers.last().expect("nonempty").mul_ref(&point[i]);
                    powers.push(next);
                }
                term = term.mul_ref(&powers[e as usize]);
            }
            acc.add_assign_ref(&term);
        }
        acc
    }

    /// Minimum p-adic valuation of the coefficients (`+∞` for zero); the
    /// Gauss norm is `p^{-min}`.
    pub fn min_coeff_valuation(&self, p: u64) -> Valuation
    where
        C: PadicCoeff,
    {
        self.terms.values().map(|c| c.valuation(p)).min().unwrap_or(Valuation::Infinite)
    }
}

impl<C: Ring> Ring for MultiPoly<C> {
    fn zero() -> Self {
        MultiPoly::zero(0)
    }
    fn one() -> Self {
        MultiPoly::constant(0, C::one())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add_ref(&self, o: &Self) -> Self {
        let mut out = self.clone();
        out.nvars = out.nvars.max(o.nvars);
        out.add_assign(o);
        out
    }
    fn sub_ref(&self, o: &Self) -> Self {
        self.add_ref(&o.neg_ref())
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn neg_ref(&self) -> Self {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (*m, c.neg_ref())).collect(),
        }
    }
    fn add_assign_ref(&mut self, o: &Self) {
        self.nvars = self.nvars.max(o.nvars);
        self.add_assign(o);
    }
    fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&Monomial::ONE).is_some_and(C::is_one)
    }
}

// Equality ignores the declared arity: `0 ∈ Q[a1]` equals `0 ∈ Q[a1, a2]`.
impl<C: PartialEq> PartialEq for MultiPoly<C> {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl QAlgebra for MultiPoly<Rational> {
    fn from_rational(r: &Rational) -> Self {
        MultiPoly::constant(0, r.clone())
    }
    fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return MultiPoly::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (*m, c * r)).collect(),
        }
    }
}

impl MultiPoly<BigInt> {
    pub fn to_rational(&self) -> MultiPoly<Rational> {
        self.map_coeffs(|c| Rational::from_integer(c.clone()))
    }

    /// `ℓ₁` norm: sum of absolute values of the coefficients.
    pub fn l1_norm(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).sum()
    }
}

/// Coefficients that carry a p-adic valuation.
pub trait PadicCoeff {
    fn valuation(&self, p: u64) -> Valuation;
}

impl PadicCoeff for BigInt {
    fn valuation(&self, p: u64) -> Valuation {
        if num_traits::Zero::is_zero(self) {
            Valuation::Infinite
        } else {
            Valuation::Finite(vp_nonzero_int(self, p))
        }
    }
}

impl PadicCoeff for Rational {
    fn valuation(&self, p: u64) -> Valuation {
        crate::exact_arith::vp_unchecked(self, p)
    }
}

impl<C> fmt::Display for MultiPoly<C>
where
    C: Ring + fmt::Display + Signed,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let mono = m.render();
            match (Ring::is_one(&abs), mono.is_empty()) {
                (true, true) => write!(f, "1")?,
                (true, false) => write!(f, "{mono}")?,
                (false, true) => write!(f, "{abs}")?,
                (false, false) => write!(f, "{abs}*{mono}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Truncated Laurent series in 1/z

/// `c₋₁·z + c₀ + c₁/z + … + c_J/z^J`, i.e. an element of `P((1/z))` known
/// modulo `z^{-(J+1)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncLaurent<C> {
    order: usize,
    // coeffs[k + 1] is the coefficient of z^{-k}, k = -1..=order
    coeffs: Vec<C>,
}

/// Result of substituting a polynomial into a series: a polynomial part in
/// positive powers of `z` plus the `R₀` tail.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition<C> {
    /// `positive[k - 1]` is the coefficient of `z^k`, `k = 1..=deg Q`.
    pub positive: Vec<C>,
    /// Coefficients of `z^0 … z^{-J}`; its `z¹` slot is always zero.
    pub tail: TruncLaurent<C>,
}

impl<C: Ring> Composition<C> {
    /// Folds the result back into a single series when it has no `z^{≥2}`
    /// terms.
    pub fn into_series(self) -> Result<TruncLaurent<C>> {
        if self.positive.iter().skip(1).any(|c| !c.is_zero()) {
            return Err(Error::Unsupported(
                "composition has powers z^k with k >= 2; not representable as a series".into(),
            ));
        }
        let mut tail = self.tail;
        if let Some(c) = self.positive.into_iter().next() {
            tail.coeffs[0] = c;
        }
        Ok(tail)
    }
}

impl<C: Ring> TruncLaurent<C> {
    pub fn zero(order: usize) -> Self {
        TruncLaurent { order, coeffs: vec![C::zero(); order + 2] }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[1] = C::one();
        s
    }

    /// Builds a series from coefficients of `z^1, z^0, z^{-1}, …`; extra
    /// entries are truncated and missing ones are zero.
    pub fn from_coeffs(order: usize, coeffs: impl IntoIterator<Item = C>) -> Self {
        let mut s = Self::zero(order);
        for (slot, c) in s.coeffs.iter_mut().zip(coeffs) {
            *slot = c;
        }
        s
    }

    /// Builds an `R₀` element from coefficients of `z^0, z^{-1}, …`.
    pub fn from_r0(order: usize, coeffs: impl IntoIterator<Item = C>) -> Self {
        Self::from_coeffs(order, std::iter::once(C::zero()).chain(coeffs))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficient of `z^{-k}` for `k ∈ {-1, 0, …, J}`.
    pub fn coeff(&self, k: i64) -> &C {
        assert!((-1..=self.order as i64).contains(&k), "exponent out of range");
        &self.coeffs[(k + 1) as usize]
    }

    pub fn set_coeff(&mut self, k: i64, c: C) {
        assert!((-1..=self.order as i64).contains(&k), "exponent out of range");
        self.coeffs[(k + 1) as usize] = c;
    }

    /// Coefficients of `z^0 … z^{-J}`.
    pub fn r0_coeffs(&self) -> &[C] {
        &self.coeffs[1..]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(C::is_zero)
    }

    /// Lowest power of `1/z` present; `+∞` for the zero series.
    pub fn nu(&self) -> Valuation {
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            Some(i) => Valuation::Finite(i as i64 - 1),
            None => Valuation::Infinite,
        }
    }

    pub fn restrict(&self, order: usize) -> Self {
        assert!(order <= self.order, "can only restrict to a lower order");
        TruncLaurent { order, coeffs: self.coeffs[..order + 2].to_vec() }
    }

    fn check_order(&self, other: &Self) {
        assert_eq!(self.order, other.order, "series truncated at different orders");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_order(other);
        TruncLaurent {
            order: self.order,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add_ref(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_order(other);
        TruncLaurent {
            order: self.order,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.sub_ref(b)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        TruncLaurent { order: self.order, coeffs: self.coeffs.iter().map(C::neg_ref).collect() }
    }

    /// Truncated product. Fails when both factors have a `z¹` term, since
    /// `z²` has no slot.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other);
        let a_top = !self.coeffs[0].is_zero();
        let b_top = !other.coeffs[0].is_zero();
        if a_top && b_top {
            return Err(Error::Unsupported("product has a z^2 term".into()));
        }
        let n = self.coeffs.len();
        let mut out = vec![C::zero(); n];
        // slot i ↔ z^{-(i-1)}, so slot i times slot j lands in slot i + j - 1
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j == 0 || b.is_zero() {
                    continue;
                }
                let k = i + j - 1;
                if k >= n {
                    break;
                }
                out[k].add_assign_ref(&a.mul_ref(b));
            }
        }
        Ok(TruncLaurent { order: self.order, coeffs: out })
    }

    /// `self^e` for `ν(self) ≥ 0`, or `e ≤ 1`.
    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::one(self.order);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// `F(Q(z)) = c₋₁·Q(z) + c₀ + Σ_k c_k / Q(z)^k` for a monic `Q` of degree
    /// `D ≥ 1` given by ascending coefficients. `1/Q(z)^k` is expanded as
    /// `z^{-Dk} (1 + q_{D-1}/z + … + q₀/z^D)^{-k}`.
    pub fn compose_poly(&self, q: &[C]) -> Result<Composition<C>> {
        let Some(deg) = q.len().checked_sub(1).filter(|&d| d >= 1) else {
            return Err(Error::InvalidArgument("compose_poly needs deg Q >= 1".into()));
        };
        if !q[deg].is_one() {
            return Err(Error::InvalidArgument("compose_poly needs a monic Q".into()));
        }
        let order = self.order;
        let len = order + 1; // R₀ coefficients z^0..z^{-J}

        let mut positive = vec![C::zero(); deg];
        let mut tail = vec![C::zero(); len];

        let lin = &self.coeffs[0];
        if !lin.is_zero() {
            for k in 1..=deg {
                positive[k - 1] = lin.mul_ref(&q[k]);
            }
            tail[0] = lin.mul_ref(&q[0]);
        }
        tail[0].add_assign_ref(&self.coeffs[1]);

        let kmax = order / deg;
        if kmax >= 1 {
            // W = (1 + r_1/z + … + r_D/z^D)^{-1}, r_i = q_{D-i}
            let wlen = order - deg + 1;
            let mut w = vec![C::zero(); wlen];
            w[0] = C::one();
            for k in 1..wlen {
                let mut acc = C::zero();
                for i in 1..=k.min(deg) {
                    acc.add_assign_ref(&q[deg - i].mul_ref(&w[k - i]));
                }
                w[k] = acc.neg_ref();
            }
            let mut wpow = w.clone();
            for k in 1..=kmax {
                let shift = deg * k;
                let c = &self.coeffs[k + 1];
                if !c.is_zero() {
                    for (i, x) in wpow.iter().enumerate().take(len - shift) {
                        tail[shift + i].add_assign_ref(&c.mul_ref(x));
                    }
                }
                if k < kmax {
                    let keep = len - deg * (k + 1);
                    wpow = series_mul(&wpow, &w, keep);
                }
            }
        }

        Ok(Composition { positive, tail: Self::from_r0(order, tail) })
    }
}

impl<C: QAlgebra> TruncLaurent<C> {
    pub fn scale(&self, r: &Rational) -> Self {
        TruncLaurent { order: self.order, coeffs: self.coeffs.iter().map(|c| c.scale(r)).collect() }
    }

    /// `(1 + u)^{1/m}` for `ν(u) ≥ 1`, truncated at the order of `u`.
    ///
    /// Uses the recurrence coming from `(1+u)·w' = (1/m)·u'·w` rather than
    /// summing binomial terms.
    pub fn trunc_root(u: &Self, m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("root index must be positive".into()));
        }
        if u.nu() < Valuation::Finite(1) {
            return Err(Error::InvalidArgument(format!(
                "trunc_root needs nu(u) >= 1, got {}",
                u.nu()
            )));
        }
        let order = u.order;
        let uc = &u.coeffs[1..]; // uc[k] ↔ z^{-k}, uc[0] = 0
        let alpha = Rational::new(BigInt::one(), BigInt::from(m));
        let mut w: Vec<C> = Vec::with_capacity(order + 1);
        w.push(C::one());
        for k in 1..=order {
            let mut acc = C::zero();
            for i in 1..=k {
                if uc[i].is_zero() || w[k - i].is_zero() {
                    continue;
                }
                // α·i − (k − i)
                let weight = &alpha * BigInt::from(i) - Rational::from_integer(BigInt::from(k - i));
                if weight.is_zero() {
                    continue;
                }
                acc.add_assign_ref(&uc[i].mul_ref(&w[k - i]).scale(&weight));
            }
            w.push(acc.scale(&Rational::new(BigInt::one(), BigInt::from(k))));
        }
        Ok(Self::from_r0(order, w))
    }
}

/// Product of two power series in `1/z`, keeping `len` coefficients.
pub(crate) fn series_mul<C: Ring>(a: &[C], b: &[C], len: usize) -> Vec<C> {
    let mut out = vec![C::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j].add_assign_ref(&x.mul_ref(y));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{int, rat};

    fn t(coeffs: &[i64]) -> UniPoly {
        UniPoly::from_ints(Var::T, coeffs)
    }

    #[test]
    fn unipoly_basics() {
        let p = t(&[1, 1]); // t + 1
        let q = t(&[-1, 1]);
        assert_eq!(p.mul(&q), t(&[-1, 0, 1]));
        assert_eq!(t(&[0, 0, 0]).degree(), None);
        assert_eq!(t(&[3, 0, 2]).degree(), Some(2));
        assert_eq!(format!("{}", t(&[5, 0, 3])), "3*t^2 + 5");
        assert_eq!(format!("{}", t(&[-1, -2])), "-2*t - 1");
        assert_eq!(format!("{}", UniPoly::zero(Var::Z)), "0");
    }

    #[test]
    fn exact_division() {
        let p = t(&[-1, 0, 1]);
        assert_eq!(p.exact_div(&t(&[1, 1])).unwrap(), t(&[-1, 1]));
        assert!(matches!(p.exact_div(&t(&[2, 1])), Err(Error::NotDivisible(_))));
        assert_eq!(p.div_rem(&UniPoly::zero(Var::T)), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn primitive_part_signs() {
        let p = UniPoly::new(Var::T, vec![rat(-5, 1), rat(-3, 2)]);
        let (content, prim) = p.primitive_part().unwrap();
        assert_eq!(prim, vec![BigInt::from(10), BigInt::from(3)]);
        assert_eq!(content, rat(-1, 2));
    }

    #[test]
    fn gcd_and_compose() {
        let a = t(&[-1, 0, 1]);
        let b = t(&[1, 2, 1]);
        assert_eq!(a.gcd(&b), t(&[1, 1]));
        // (z^2 + t) with z := t + 1 → t^2 + 3t + 1 as polynomial in t
        let f = t(&[0, 0, 1]);
        assert_eq!(f.compose(&t(&[1, 1])), t(&[1, 2, 1]));
    }

    #[test]
    fn multipoly_product_and_print() {
        let a1: MultiPoly<BigInt> = MultiPoly::var(2, 0);
        let a2: MultiPoly<BigInt> = MultiPoly::var(2, 1);
        let s = a1.add_ref(&a2);
        let sq = s.mul(&s);
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.total_degree(), Some(2));
        assert_eq!(format!("{sq}"), "a1^2 + 2*a1*a2 + a2^2");
        let m = MultiPoly::<Rational>::constant(2, rat(-1, 2)).add_ref(&a1.to_rational());
        assert_eq!(format!("{m}"), "a1 - 1/2");
        assert_eq!(format!("{}", MultiPoly::<BigInt>::zero(3)), "0");
    }

    #[test]
    fn nu_examples() {
        // z + 1/z^5
        let mut s: TruncLaurent<Rational> = TruncLaurent::zero(6);
        s.set_coeff(-1, int(1));
        s.set_coeff(5, int(1));
        assert_eq!(s.nu(), Valuation::Finite(-1));
        assert_eq!(TruncLaurent::<Rational>::zero(4).nu(), Valuation::Infinite);
        let mut s: TruncLaurent<Rational> = TruncLaurent::zero(8);
        s.set_coeff(2, int(3));
        s.set_coeff(7, int(1));
        assert_eq!(s.nu(), Valuation::Finite(2));
    }

    #[test]
    fn trunc_root_of_zero_is_one() {
        let u: TruncLaurent<Rational> = TruncLaurent::zero(5);
        assert_eq!(TruncLaurent::trunc_root(&u, 3).unwrap(), TruncLaurent::one(5));
    }

    #[test]
    fn trunc_root_sqrt_linear() {
        // (1 + c/z)^{1/2} = 1 + c/(2z) − c²/(8z²) + …, c = 3
        let u = TruncLaurent::from_r0(2, [int(0), int(3)]);
        let r = TruncLaurent::trunc_root(&u, 2).unwrap();
        assert_eq!(r.coeff(0), &int(1));
        assert_eq!(r.coeff(1), &rat(3, 2));
        assert_eq!(r.coeff(2), &rat(-9, 8));
    }

    #[test]
    fn trunc_root_rejects_low_order() {
        let u = TruncLaurent::from_r0(3, [int(1)]);
        assert!(TruncLaurent::trunc_root(&u, 2).is_err());
    }

    #[test]
    fn compose_linear_into_square() {
        // F = z, Q = z^2: the result is z^2, carried in the positive part
        let f = TruncLaurent::from_coeffs(3, [int(1)]);
        let c = f.compose_poly(&[int(0), int(0), int(1)]).unwrap();
        assert_eq!(c.positive, vec![int(0), int(1)]);
        assert!(c.tail.is_zero());
        assert!(c.clone().into_series().is_err());
    }

    #[test]
    fn compose_inverse_geometric() {
        // F = 1/z, Q = z^2 + c: 1/z^2 − c/z^4
        let c = int(7);
        let f = TruncLaurent::from_r0(4, [int(0), int(1)]);
        let out = f.compose_poly(&[c.clone(), int(0), int(1)]).unwrap().into_series().unwrap();
        let expect = TruncLaurent::from_r0(4, [int(0), int(0), int(1), int(0), -c]);
        assert_eq!(out, expect);
    }

    #[test]
    fn compose_rejects_bad_q() {
        let f: TruncLaurent<Rational> = TruncLaurent::one(3);
        assert!(f.compose_poly(&[int(1)]).is_err());
        assert!(f.compose_poly(&[int(1), int(2)]).is_err());
    }

    #[test]
    fn mul_rejects_z_squared() {
        let z: TruncLaurent<Rational> = TruncLaurent::from_coeffs(3, [int(1)]);
        assert!(z.mul(&z).is_err());
        assert!(z.mul(&TruncLaurent::one(3)).is_ok());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::exact_arith::rat;
    use proptest::prelude::*;

    fn small_rat() -> impl Strategy<Value = Rational> {
        (-50i64..=50, 1i64..=9).prop_map(|(n, d)| rat(n, d))
    }

    fn uni() -> impl Strategy<Value = UniPoly> {
        prop::collection::vec(small_rat(), 0..7).prop_map(|c| UniPoly::new(Var::T, c))
    }

    fn r0(order: usize) -> impl Strategy<Value = TruncLaurent<Rational>> {
        prop::collection::vec(small_rat(), order + 1).prop_map(move |c| TruncLaurent::from_r0(order, c))
    }

    proptest! {
        #[test]
        fn uni_ring_laws(a in uni(), b in uni(), c in uni()) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert!(a.sub(&a).is_zero());
        }

        #[test]
        fn division_identity(a in uni(), b in uni()) {
            prop_assume!(!b.is_zero());
            let (q, r) = a.div_rem(&b).unwrap();
            prop_assert_eq!(q.mul(&b).add(&r), a);
            prop_assert!(r.is_zero() || r.degree() < b.degree());
        }

        #[test]
        fn composition_commutes_with_eval(a in uni(), b in uni(), x in small_rat()) {
            prop_assert_eq!(a.compose(&b).eval(&x), a.eval(&b.eval(&x)));
        }

        #[test]
        fn series_ring_laws(a in r0(6), b in r0(6), c in r0(6)) {
            let ab = a.mul(&b).unwrap();
            prop_assert_eq!(&ab, &b.mul(&a).unwrap());
            prop_assert_eq!(ab.mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
            prop_assert_eq!(a.mul(&b.add(&c)).unwrap(), ab.add(&a.mul(&c).unwrap()));
            prop_assert_eq!(a.mul(&TruncLaurent::one(6)).unwrap(), a.clone());
        }

        #[test]
        fn root_power_round_trip(tail in prop::collection::vec(small_rat(), 6), m in 1u64..=5) {
            let u = TruncLaurent::from_r0(6, std::iter::once(Rational::zero()).chain(tail));
            let w = TruncLaurent::trunc_root(&u, m).unwrap();
            prop_assert_eq!(w.pow(m as u32).unwrap(), TruncLaurent::one(6).add(&u));
        }
    }
}
