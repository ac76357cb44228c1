//! Weil heights of rationals, heights of polynomials, the Gelfond gap, root
//! height bounds, Mahler-measure heights and numeric canonical heights.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_arith::{ln_bigint, Rational};
use crate::factor_roots::{complex_roots, factor_over_q, RootBox};
use crate::poly::{UniPoly, Var};

/// Relative accuracy assumed for a single `ln` evaluation.
const LN_REL_ERR: f64 = 1e-14;

/// `coeff · ln(arg)` with `arg > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogForm {
    #[serde(serialize_with = "ser_rational")]
    pub coeff: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub arg: Rational,
}

pub(crate) fn ser_rational<S: serde::Serializer>(
    r: &Rational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl LogForm {
    pub fn ln(arg: Rational) -> Self {
        assert!(arg.is_positive(), "log of a non-positive number");
        LogForm { coeff: Rational::one(), arg }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero() || self.arg.is_one()
    }

    /// Approximate value and an absolute error bound.
    pub fn approx(&self) -> (f64, f64) {
        let ln = ln_bigint(self.arg.numer()) - ln_bigint(self.arg.denom());
        let ln_err = LN_REL_ERR * (1.0 + ln_bigint(self.arg.numer()).abs() + ln_bigint(self.arg.denom()).abs());
        let c = self.coeff.to_f64().unwrap_or(f64::NAN);
        let v = c * ln;
        (v, c.abs() * ln_err + LN_REL_ERR * v.abs())
    }

    /// Exact comparison when the exponents involved stay small.
    fn cmp_exact(&self, other: &LogForm) -> Option<Ordering> {
        // c1 ln a1 vs c2 ln a2  ⇔  a1^{p1 q2} vs a2^{p2 q1}
        let (p1, q1) = (self.coeff.numer(), self.coeff.denom());
        let (p2, q2) = (other.coeff.numer(), other.coeff.denom());
        let e1 = (p1 * q2).to_i64()?;
        let e2 = (p2 * q1).to_i64()?;
        let bits = |a: &Rational| a.numer().bits().max(a.denom().bits()) as i64;
        if e1.abs() * bits(&self.arg) > 1 << 20 || e2.abs() * bits(&other.arg) > 1 << 20 {
            return None;
        }
        Some(rational_pow(&self.arg, e1).cmp(&rational_pow(&other.arg, e2)))
    }
}

fn rational_pow(x: &Rational, e: i64) -> Rational {
    let r = num_traits::pow(x.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        r.recip()
    } else {
        r
    }
}

impl fmt::Display for LogForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if self.coeff.is_one() {
            write!(f, "log({})", self.arg)
        } else {
            write!(f, "({})*log({})", self.coeff, self.arg)
        }
    }
}

/// A height: an exact closed form when one is known, always a decimal
/// approximation, and an absolute error bound on that approximation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeightValue {
    pub exact: Option<LogForm>,
    pub approx: f64,
    pub err: f64,
}

impl HeightValue {
    pub fn zero() -> Self {
        HeightValue { exact: Some(LogForm::ln(Rational::one())), approx: 0.0, err: 0.0 }
    }

    pub fn from_log(form: LogForm) -> Self {
        let (approx, err) = form.approx();
        HeightValue { exact: Some(form), approx, err }
    }

    /// `ln(arg)`.
    pub fn ln(arg: Rational) -> Self {
        Self::from_log(LogForm::ln(arg))
    }

    pub fn approximate(approx: f64, err: f64) -> Self {
        HeightValue { exact: None, approx, err }
    }

    /// `r·h`, exact when `h` is.
    pub fn scaled(&self, r: &Rational) -> Self {
        match &self.exact {
            Some(f) => Self::from_log(LogForm { coeff: &f.coeff * r, arg: f.arg.clone() }),
            None => {
                let x = crate::exact_arith::rational_to_f64(r).abs();
                Self::approximate(self.approx * x, self.err * x * (1.0 + 1e-15) + (self.approx * x).abs() * 4e-16)
            }
        }
    }

    pub fn lower(&self) -> f64 {
        self.approx - self.err
    }

    pub fn upper(&self) -> f64 {
        self.approx + self.err
    }

    /// Certified comparison: `Some` only when the answer is proved, by exact
    /// forms or by disjoint intervals.
    pub fn certified_cmp(&self, other: &HeightValue) -> Option<Ordering> {
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            if let Some(o) = a.cmp_exact(b) {
                return Some(o);
            }
        }
        if self.upper() < other.lower() {
            Some(Ordering::Less)
        } else if self.lower() > other.upper() {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// `self ≤ other`, proved.
    pub fn certainly_le(&self, other: &HeightValue) -> bool {
        matches!(self.certified_cmp(other), Some(Ordering::Less | Ordering::Equal))
    }

    /// Whether `other` lies in this value's error interval (with `slack`).
    pub fn agrees_with(&self, other: f64, slack: f64) -> bool {
        (self.approx - other).abs() <= self.err + slack
    }
}

impl fmt::Display for HeightValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(form) => write!(f, "{form} ≈ {:.15} (± {:.1e})", self.approx, self.err),
            None => write!(f, "{:.15} (± {:.1e})", self.approx, self.err),
        }
    }
}

/// `h(x) = log max(|numerator|, denominator)`.
pub fn weil_height_rational(x: &Rational) -> HeightValue {
    let h = x.numer().abs().max(x.denom().clone());
    if h.is_zero() {
        return HeightValue::zero();
    }
    HeightValue::ln(Rational::from_integer(h))
}

/// `H_pol(P) = max|nᵢ| / gcd(nᵢ)` with `nᵢ` the coefficients after clearing
/// denominators, i.e. the multiplicative height of the coefficient vector.
pub fn hpol_exp(p: &UniPoly) -> Result<BigInt> {
    let (_, prim) = p.primitive_part()?;
    Ok(prim.iter().map(|c| c.abs()).max().expect("nonzero polynomial"))
}

pub fn hpol(p: &UniPoly) -> Result<HeightValue> {
    Ok(HeightValue::ln(Rational::from_integer(hpol_exp(p)?)))
}

#[derive(Debug, Clone, Serialize)]
pub struct GelfondReport {
    /// `|h_pol(PQ) − h_pol(P) − h_pol(Q)|`
    pub gap: HeightValue,
    /// `deg(PQ)·log 2`
    pub bound: HeightValue,
    /// Decided exactly: `2^{-D} ≤ H(PQ)/(H(P)H(Q)) ≤ 2^{D}`.
    pub holds: bool,
}

pub fn gelfond_gap(p: &UniPoly, q: &UniPoly) -> Result<GelfondReport> {
    let pq = p.mul(q);
    let hp = hpol_exp(p)?;
    let hq = hpol_exp(q)?;
    let hpq = hpol_exp(&pq)?;
    let deg = pq.degree().expect("nonzero product");
    let ratio = Rational::new(hpq, hp * hq);
    let two_d = Rational::from_integer(BigInt::one() << deg);
    let holds = ratio <= two_d && ratio >= two_d.recip();
    let gap_arg = if ratio >= Rational::one() { ratio } else { ratio.recip() };
    Ok(GelfondReport {
        gap: HeightValue::ln(gap_arg),
        bound: HeightValue::from_log(LogForm {
            coeff: Rational::from_integer(BigInt::from(deg)),
            arg: Rational::from_integer(BigInt::from(2)),
        }),
        holds,
    })
}

/// `(deg(P)·log 2 + h_pol(P)) / d'`, an upper bound for `h(α)` whenever at
/// least `d'` conjugates of `α` are roots of `P`.
pub fn root_height_bound(p: &UniPoly, dprime: u64) -> Result<HeightValue> {
    let deg = p.degree().ok_or(Error::ZeroPolynomial)? as u64;
    if dprime == 0 || dprime > deg {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= d' <= deg P = {deg}, got {dprime}"
        )));
    }
    let arg = Rational::from_integer((BigInt::one() << deg) * hpol_exp(p)?);
    Ok(HeightValue::from_log(LogForm {
        coeff: Rational::new(BigInt::one(), BigInt::from(dprime)),
        arg,
    }))
}

/// Height of a root of an irreducible polynomial via its Mahler measure,
/// `h(α) = (log|a_D| + Σ log⁺|αᵢ|) / D` for the primitive integer minimal
/// polynomial `a_D ∏(t − αᵢ)`.
pub fn height_from_minpoly(p: &UniPoly) -> Result<HeightValue> {
    let deg = p.degree().ok_or(Error::ZeroPolynomial)?;
    if deg == 0 {
        return Err(Error::InvalidArgument("constant polynomial has no roots".into()));
    }
    let fl = factor_over_q(p, usize::MAX)?;
    if fl.factors.len() != 1 || fl.factors[0].1 != 1 {
        return Err(Error::Reducible);
    }
    let boxes = complex_roots(p, 1e-12)?;
    Ok(height_from_roots(p, &boxes))
}

/// Mahler-measure height from certified root boxes of an irreducible `p`.
pub(crate) fn height_from_roots(p: &UniPoly, boxes: &[RootBox]) -> HeightValue {
    let (_, prim) = p.primitive_part().expect("nonzero");
    let deg = prim.len() - 1;
    let lc = prim[deg].abs();
    let a0 = prim[0].abs();
    if deg == 1 {
        // root −a0/lc: h = log max(|a0|, |lc|) (coprime)
        return HeightValue::ln(Rational::from_integer(lc.max(a0)));
    }
    let degq = Rational::new(BigInt::one(), BigInt::from(deg as u64));
    if boxes.iter().all(|b| b.abs_upper() < 1.0) {
        return HeightValue::from_log(LogForm { coeff: degq, arg: Rational::from_integer(lc) });
    }
    if boxes.iter().all(|b| b.abs_lower() > 1.0) {
        return HeightValue::from_log(LogForm { coeff: degq, arg: Rational::from_integer(a0) });
    }
    let mut sum = ln_bigint(&lc);
    let mut err = LN_REL_ERR * (1.0 + sum.abs());
    for b in boxes {
        let (v, e) = b.log_plus_abs();
        sum += v;
        err += e;
    }
    let d = deg as f64;
    HeightValue::approximate(sum / d, err / d + 1e-15 * (sum / d).abs())
}

#[derive(Debug, Clone, Serialize)]
pub struct CanonicalHeightEstimate {
    pub value: HeightValue,
    /// Estimated `|ĥ − h(fⁿx)/dⁿ|`; an estimate, not a certificate.
    pub tail_estimate: f64,
    /// Largest observed `|h(f(x_k)) − d·h(x_k)|`.
    pub step_constant: f64,
    pub iterations: usize,
    pub preperiodic: bool,
}

/// `h(fⁿ(x))/dⁿ` at `n = nmax` for a polynomial map over Q, with a tail
/// estimate `C/((d−1)dⁿ)` where `C` is the largest observed one-step defect.
/// `bit_cap` bounds the size of the orbit's numerators/denominators.
pub fn canonical_height_numeric(
    f: &UniPoly,
    x: &Rational,
    nmax: usize,
    bit_cap: u64,
) -> Result<CanonicalHeightEstimate> {
    let d = f.degree().ok_or(Error::ZeroPolynomial)?;
    if d < 2 {
        return Err(Error::InvalidArgument("canonical height needs deg f >= 2".into()));
    }
    let hval = |r: &Rational| -> f64 {
        let m = r.numer().abs().max(r.denom().clone());
        if m.is_zero() {
            0.0
        } else {
            ln_bigint(&m)
        }
    };
    let mut orbit: Vec<Rational> = vec![x.clone()];
    let mut heights = vec![hval(x)];
    let mut preperiodic = false;
    for _ in 0..nmax {
        let cur = orbit.last().expect("nonempty");
        let bits = cur.numer().bits().max(cur.denom().bits());
        if bits.saturating_mul(d as u64) > bit_cap {
            return Err(Error::ResourceCap {
                what: "orbit bit size",
                requested: bits as u128 * d as u128,
                limit: bit_cap as u128,
            });
        }
        let next = f.eval(cur);
        if orbit.contains(&next) {
            preperiodic = true;
            break;
        }
        heights.push(hval(&next));
        orbit.push(next);
    }
    if preperiodic {
        return Ok(CanonicalHeightEstimate {
            value: HeightValue::zero(),
            tail_estimate: 0.0,
            step_constant: 0.0,
            iterations: orbit.len() - 1,
            preperiodic,
        });
    }
    let df = d as f64;
    let step_constant = heights
        .windows(2)
        .map(|w| (w[1] - df * w[0]).abs())
        .fold(0.0f64, f64::max);
    let n = heights.len() - 1;
    let scale = df.powi(n as i32);
    let hn = heights[n];
    let value = hn / scale;
    let err = LN_REL_ERR * (1.0 + hn.abs()) / scale;
    Ok(CanonicalHeightEstimate {
        value: HeightValue::approximate(value, err),
        tail_estimate: step_constant / ((df - 1.0) * scale),
        step_constant,
        iterations: n,
        preperiodic,
    })
}

/// Multiplicative p-adic Gauss norm exponent: `min vp` over the
/// coefficients of a nonzero polynomial.
pub fn gauss_valuation(p: &UniPoly, prime: u64) -> Result<i64> {
    crate::exact_arith::ensure_prime(prime)?;
    p.coeffs()
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| crate::exact_arith::vp_unchecked(c, prime).finite().expect("nonzero"))
        .min()
        .ok_or(Error::ZeroPolynomial)
}

/// Convenience: the polynomial `t - r`.
pub fn linear(r: &Rational) -> UniPoly {
    UniPoly::new(Var::T, vec![-r.clone(), Rational::one()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{int, rat};

    fn t(coeffs: &[i64]) -> UniPoly {
        UniPoly::from_ints(Var::T, coeffs)
    }

    #[test]
    fn weil_height_examples() {
        assert_eq!(weil_height_rational(&int(0)).approx, 0.0);
        assert_eq!(weil_height_rational(&int(2)).exact, Some(LogForm::ln(int(2))));
        assert_eq!(weil_height_rational(&rat(2, 3)).exact, Some(LogForm::ln(int(3))));
        assert_eq!(weil_height_rational(&rat(-7, 3)).exact, Some(LogForm::ln(int(7))));
    }

    #[test]
    fn hpol_examples() {
        assert_eq!(hpol(&t(&[0, 1])).unwrap().exact, Some(LogForm::ln(int(1))));
        assert_eq!(hpol(&t(&[4, 2])).unwrap().exact, Some(LogForm::ln(int(2))));
        let p = UniPoly::new(Var::T, vec![int(5), rat(3, 2)]);
        assert_eq!(hpol(&p).unwrap().exact, Some(LogForm::ln(int(10))));
        assert_eq!(hpol(&UniPoly::zero(Var::T)).unwrap_err(), Error::ZeroPolynomial);
    }

    #[test]
    fn gelfond_examples() {
        let r = gelfond_gap(&t(&[0, 1]), &t(&[0, 1])).unwrap();
        assert!(r.holds);
        assert!(r.gap.exact.as_ref().unwrap().is_zero());
        let r = gelfond_gap(&t(&[1, 1]), &t(&[-1, 1])).unwrap();
        assert!(r.holds);
        assert!(r.gap.exact.as_ref().unwrap().is_zero());
        assert!((r.bound.approx - 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn root_height_bound_examples() {
        let b = root_height_bound(&t(&[0, 1]), 1).unwrap();
        assert!((b.approx - 2f64.ln()).abs() < 1e-12);
        let b = root_height_bound(&t(&[-2, 0, 1]), 2).unwrap();
        assert!((b.approx - 1.5 * 2f64.ln()).abs() < 1e-12);
        let b = root_height_bound(&t(&[-1, 2]), 1).unwrap();
        assert!((b.approx - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!(root_height_bound(&t(&[-1, 2]), 2).is_err());
    }

    #[test]
    fn minpoly_heights() {
        let h = height_from_minpoly(&t(&[-3, 1])).unwrap();
        assert_eq!(h.exact, Some(LogForm::ln(int(3))));
        let h = height_from_minpoly(&t(&[-2, 0, 1])).unwrap();
        assert!(h.agrees_with(0.5 * 2f64.ln(), 1e-12));
        let h = height_from_minpoly(&t(&[-1, 2])).unwrap();
        assert!(h.agrees_with(2f64.ln(), 1e-12));
        assert_eq!(height_from_minpoly(&t(&[-1, 0, 1])).unwrap_err(), Error::Reducible);
    }

    #[test]
    fn canonical_height_power_map() {
        let f = UniPoly::from_ints(Var::Z, &[0, 0, 1]);
        let e = canonical_height_numeric(&f, &int(2), 10, 1 << 24).unwrap();
        assert!(e.value.agrees_with(2f64.ln(), 1e-12));
        assert!(e.tail_estimate < 1e-12);
    }

    #[test]
    fn canonical_height_preperiodic() {
        let f = UniPoly::from_ints(Var::Z, &[-1, 0, 1]);
        let e = canonical_height_numeric(&f, &int(0), 10, 1 << 24).unwrap();
        assert!(e.preperiodic);
        assert_eq!(e.value.approx, 0.0);
    }

    #[test]
    fn canonical_height_cap() {
        let f = UniPoly::from_ints(Var::Z, &[1, 0, 1]);
        let e = canonical_height_numeric(&f, &int(0), 40, 1 << 12);
        assert!(matches!(e, Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn certified_comparisons() {
        let a = HeightValue::ln(int(2));
        let b = HeightValue::from_log(LogForm { coeff: rat(1, 2), arg: int(4) });
        assert_eq!(a.certified_cmp(&b), Some(Ordering::Equal));
        assert!(a.certainly_le(&HeightValue::ln(int(3))));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::poly::Var;
    use proptest::prelude::*;

    fn int_poly() -> impl Strategy<Value = UniPoly> {
        prop::collection::vec(-1000i64..=1000, 1..=11)
            .prop_filter("nonzero leading coefficient", |c| *c.last().unwrap() != 0)
            .prop_map(|c| UniPoly::from_ints(Var::T, &c))
    }

    proptest! {
        #[test]
        fn gelfond_inequality(p in int_poly(), q in int_poly()) {
            let r = gelfond_gap(&p, &q).unwrap();
            prop_assert!(r.holds, "P = {}, Q = {}", p, q);
            prop_assert!(r.gap.lower() <= r.bound.upper());
        }

        #[test]
        fn hpol_is_scale_invariant(p in int_poly(), c in (1i64..=50, 1i64..=50)) {
            let c = Rational::new(c.0.into(), c.1.into());
            prop_assert_eq!(hpol_exp(&p).unwrap(), hpol_exp(&p.scale(&c)).unwrap());
        }
    }
}
