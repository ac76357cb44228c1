//! Text form of polynomials.
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor ('*' factor)*
//! factor   := ('-')? base ('^' uint)?
//! base     := rational | var | '(' expr ')'
//! rational := int ('/' uint)?
//! var      := 't' | 'z' | 'a'[1-9]
//! ```
//!
//! Whitespace is ignored and there is no implicit multiplication.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::dynamics::Family;
use crate::error::{Error, Result};
use crate::exact_arith::Rational;
use crate::poly::{Monomial, MultiPoly, UniPoly, Var};

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u64 = 4096;

const NV: usize = 11; // t, z, a1..a9
const T: usize = 0;
const Z: usize = 1;

type Key = [u32; NV];

#[derive(Debug, Clone, PartialEq)]
struct Sparse(BTreeMap<Key, Rational>);

impl Sparse {
    fn constant(c: Rational) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert([0; NV], c);
        }
        Sparse(m)
    }

    fn var(i: usize) -> Self {
        let mut k = [0; NV];
        k[i] = 1;
        Sparse(BTreeMap::from([(k, Rational::one())]))
    }

    fn add(mut self, o: &Sparse, sign: bool) -> Self {
        for (k, c) in &o.0 {
            let e = self.0.entry(*k).or_insert_with(Rational::zero);
            if sign {
                *e += c;
            } else {
                *e -= c;
            }
            if e.is_zero() {
                self.0.remove(k);
            }
        }
        self
    }

    fn mul(&self, o: &Sparse) -> Self {
        let mut out = Sparse(BTreeMap::new());
        for (ka, ca) in &self.0 {
            for (kb, cb) in &o.0 {
                let mut k = *ka;
                for (x, y) in k.iter_mut().zip(kb) {
                    *x += y;
                }
                out = out.add(&Sparse(BTreeMap::from([(k, ca * cb)])), true);
            }
        }
        out
    }

    fn pow(&self, e: u64) -> Self {
        let mut acc = Sparse::constant(Rational::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    fn max_deg(&self, i: usize) -> u32 {
        self.0.keys().map(|k| k[i]).max().unwrap_or(0)
    }
}

/// What a parsed expression turned out to be.
#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    /// No `z`, no `a_i`: a polynomial in `t` (constants included).
    Uni(UniPoly),
    /// Degree ≥ 2 in `z`, coefficients in `Q[t]`.
    Family(Family),
    /// Degree 1 in `z` and free of `t`.
    UniZ(UniPoly),
    /// Only `a1 … a9`.
    Generic(MultiPoly<Rational>),
}

impl Parsed {
    pub fn into_uni(self) -> Result<UniPoly> {
        match self {
            Parsed::Uni(p) | Parsed::UniZ(p) => Ok(p),
            Parsed::Family(f) if f.is_constant() => Ok(UniPoly::new(
                Var::Z,
                f.coeffs().iter().map(|c| c.coeff(0).clone()).collect(),
            )),
            other => Err(Error::InvalidArgument(format!("expected a univariate polynomial, got {other:?}"))),
        }
    }

    pub fn into_family(self) -> Result<Family> {
        match self {
            Parsed::Family(f) => Ok(f),
            _ => Err(Error::InvalidArgument("expected a family of degree >= 2 in z".into())),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn uint(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, "expected an unsigned integer");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits"))
    }

    fn expr(&mut self) -> Result<Sparse> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = acc.add(&rhs, c == b'+');
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Sparse> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Sparse> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(Sparse::constant(Rational::zero()).add(&inner, false));
        }
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.uint()?;
            let limit = MAX_EXPONENT;
            let Some(e) = u64::try_from(&e).ok().filter(|&e| e <= limit) else {
                return Err(Error::ResourceCap {
                    what: "exponent",
                    requested: u128::try_from(&e).unwrap_or(u128::MAX),
                    limit: limit as u128,
                });
            };
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Sparse> {
        match self.peek() {
            None => self.err(self.pos, "unexpected end of input"),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err(self.pos, "expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.uint()?;
                let mut q = Rational::from_integer(n);
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    let dpos = self.pos;
                    let d = self.uint()?;
                    if d.is_zero() {
                        return self.err(dpos, "zero denominator");
                    }
                    q /= Rational::from_integer(d);
                }
                Ok(Sparse::constant(q))
            }
            Some(b't') => {
                self.pos += 1;
                Ok(Sparse::var(T))
            }
            Some(b'z') => {
                self.pos += 1;
                Ok(Sparse::var(Z))
            }
            Some(b'a') => {
                self.pos += 1;
                match self.src.get(self.pos) {
                    Some(&c @ b'1'..=b'9') => {
                        self.pos += 1;
                        Ok(Sparse::var(1 + (c - b'0') as usize))
                    }
                    _ => self.err(self.pos, "expected a digit 1-9 after 'a'"),
                }
            }
            Some(c) => self.err(self.pos, format!("unexpected character '{}'", c as char)),
        }
    }
}

/// Parses the text form into the narrowest matching type.
pub fn parse_poly(text: &str) -> Result<Parsed> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return p.err(p.pos, format!("unexpected character '{}'", c as char));
    }
    classify(e)
}

fn classify(e: Sparse) -> Result<Parsed> {
    let uses_a = (2..NV).any(|i| e.max_deg(i) > 0);
    let zdeg = e.max_deg(Z) as usize;
    let tdeg = e.max_deg(T) as usize;
    if uses_a {
        if zdeg > 0 || tdeg > 0 {
            return Err(Error::Unsupported("mixing a1..a9 with t or z".into()));
        }
        let nvars = (2..NV).filter(|&i| e.max_deg(i) > 0).max().expect("uses a_i") - 1;
        let terms = e.0.iter().map(|(k, c)| {
            let exps: Vec<u16> = k[2..2 + nvars].iter().map(|&x| x as u16).collect();
            (Monomial::new(&exps), c.clone())
        });
        return Ok(Parsed::Generic(MultiPoly::from_terms(nvars, terms)));
    }
    let mut z_coeffs = vec![vec![Rational::zero(); tdeg + 1]; zdeg + 1];
    for (k, c) in &e.0 {
        z_coeffs[k[Z] as usize][k[T] as usize] = c.clone();
    }
    match zdeg {
        0 => Ok(Parsed::Uni(UniPoly::new(Var::T, z_coeffs.swap_remove(0)))),
        1 if tdeg == 0 => Ok(Parsed::UniZ(UniPoly::new(Var::Z, z_coeffs.into_iter().map(|mut c| c.swap_remove(0)).collect()))),
        1 => Err(Error::InvalidArgument("degree 1 in z with t-dependent coefficients is not a family".into())),
        _ => Ok(Parsed::Family(Family::new(z_coeffs.into_iter().map(|c| UniPoly::new(Var::T, c)).collect())?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::rat;

    #[test]
    fn examples() {
        let f = parse_poly("z^2+t").unwrap().into_family().unwrap();
        assert_eq!(f.degree(), 2);
        assert_eq!(f.coeffs()[1], UniPoly::zero(Var::T));
        assert_eq!(f.coeffs()[0], UniPoly::from_ints(Var::T, &[0, 1]));
        let f = parse_poly("3*z^2+5").unwrap().into_family().unwrap();
        assert_eq!(f.leading_coeff(), &UniPoly::from_ints(Var::T, &[3]));
        let p = parse_poly("t^3+2018").unwrap();
        assert_eq!(p, Parsed::Uni(UniPoly::from_ints(Var::T, &[2018, 0, 0, 1])));
    }

    #[test]
    fn rationals_and_signs() {
        let p = parse_poly(" -1/2 * (t - 3)^2 ").unwrap().into_uni().unwrap();
        assert_eq!(p, UniPoly::new(Var::T, vec![rat(-9, 2), rat(3, 1), rat(-1, 2)]));
        let p = parse_poly("z - 1").unwrap().into_uni().unwrap();
        assert_eq!(p.var(), Var::Z);
        let g = parse_poly("a1^2 + a1 + 2*a2").unwrap();
        match g {
            Parsed::Generic(m) => assert_eq!(m.to_string(), "a1^2 + a1 + 2*a2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_have_positions() {
        for (src, pos) in [("z^2 + x", 6), ("2t", 1), ("(t + 1", 6), ("t^", 2), ("1/0", 2), ("a0", 1), ("", 0)] {
            match parse_poly(src) {
                Err(Error::Parse { pos: p, .. }) => assert_eq!(p, pos, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
        assert!(matches!(parse_poly("t^5000"), Err(Error::ResourceCap { .. })));
        assert!(matches!(parse_poly("a1*t"), Err(Error::Unsupported(_))));
    }

    #[test]
    fn display_round_trip() {
        for src in ["(t + 1)*z^2 - 2*t*z - 1", "3*z^2 + 5", "z^3 + 1/2*t^2"] {
            let f = parse_poly(src).unwrap().into_family().unwrap();
            let again = parse_poly(&f.to_string()).unwrap().into_family().unwrap();
            assert_eq!(f, again);
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn family() -> impl Strategy<Value = Family> {
        let coeff = prop::collection::vec((-20i64..=20, 1i64..=5), 0..4).prop_map(|c| {
            UniPoly::new(Var::T, c.into_iter().map(|(n, d)| Rational::new(n.into(), d.into())).collect())
        });
        (2usize..=4, prop::collection::vec(coeff, 5)).prop_filter_map("degree >= 2", |(d, mut cs)| {
            cs.truncate(d + 1);
            if cs[d].is_zero() {
                return None;
            }
            Family::new(cs).ok()
        })
    }

    proptest! {
        #[test]
        fn family_display_parses_back(f in family()) {
            let again = parse_poly(&f.to_string()).unwrap().into_family().unwrap();
            prop_assert_eq!(again, f);
        }

        #[test]
        fn uni_display_parses_back(c in prop::collection::vec(-100i64..=100, 1..8)) {
            let p = UniPoly::from_ints(Var::T, &c);
            let again = parse_poly(&p.to_string()).unwrap().into_uni().unwrap();
            prop_assert_eq!(again, p);
        }
    }
}
