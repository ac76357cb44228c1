//! Iteration of polynomial families over Q[t], the generic iterate
//! coefficients `A_{n,i}`, exact function-field canonical heights and the
//! solver for `d₁^m·h₁ = d₂^n·h₂`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_arith::{binomial, ensure_prime, factor_u64, vp_nonzero_int, Rational, Valuation};
use crate::heights::{HeightValue, LogForm};
use crate::poly::{Monomial, MultiPoly, UniPoly, Var};

/// Default cap on `d^n` for generic iterates.
pub const DEFAULT_GENERIC_CAP: u64 = 4096;
/// Default cap on the number of monomials a full generic iterate may hold.
pub const DEFAULT_TERM_CAP: u64 = 4_000_000;
/// Default cap on `deg_t` reached while iterating a family.
pub const DEFAULT_DEGREE_CAP: u64 = 1_000_000;

// ---------------------------------------------------------------------------
// Families

/// `f(z) = Σ c_k(t) z^k` with `c_k ∈ Q[t]`, degree `d ≥ 2` in `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    // coeffs[k] is the coefficient of z^k
    coeffs: Vec<UniPoly>,
}

impl Family {
    pub fn new(mut coeffs: Vec<UniPoly>) -> Result<Self> {
        while coeffs.last().is_some_and(UniPoly::is_zero) {
            coeffs.pop();
        }
        if coeffs.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "a family needs degree >= 2 in z, got {}",
                coeffs.len() as i64 - 1
            )));
        }
        let coeffs = coeffs.into_iter().map(|c| c.with_var(Var::T)).collect();
        Ok(Family { coeffs })
    }

    /// `c_d z^d + … + c_0` from integer coefficients (constant in t).
    pub fn from_ints(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| UniPoly::from_ints(Var::T, &[c])).collect())
    }

    /// `z^d + c` with `c ∈ Q[t]`.
    pub fn unicritical(d: usize, c: UniPoly) -> Result<Self> {
        let mut coeffs = vec![UniPoly::zero(Var::T); d + 1];
        coeffs[0] = c;
        coeffs[d] = UniPoly::from_ints(Var::T, &[1]);
        Self::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[UniPoly] {
        &self.coeffs
    }

    pub fn leading_coeff(&self) -> &UniPoly {
        self.coeffs.last().expect("degree >= 2")
    }

    pub fn is_monic(&self) -> bool {
        let lc = self.leading_coeff();
        lc.is_constant() && lc.coeff(0).is_one()
    }

    /// Whether no coefficient depends on `t`.
    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(UniPoly::is_constant)
    }

    /// `f(x)` for `x ∈ Q[t]`, by Horner.
    pub fn apply(&self, x: &UniPoly) -> UniPoly {
        let x = x.clone().with_var(Var::T);
        let mut acc = self.leading_coeff().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.mul(&x).add(c);
        }
        acc
    }

    /// Upper bound for `deg_t f(x)` given `deg_t x`.
    fn degree_bound(&self, dx: usize) -> u128 {
        self.coeffs
            .iter()
            .enumerate()
            .filter_map(|(k, c)| c.degree().map(|dc| dc as u128 + k as u128 * dx as u128))
            .max()
            .unwrap_or(0)
    }

    /// The map `f_{t₀}` in `Q[z]`.
    pub fn specialize(&self, t0: &Rational) -> UniPoly {
        UniPoly::new(Var::Z, self.coeffs.iter().map(|c| c.eval(t0)).collect())
    }

    /// Coefficients `A_1 … A_d` of a monic family, `f = z^d + A_1 z^{d-1} + … + A_d`.
    pub fn monic_coeffs(&self) -> Result<Vec<UniPoly>> {
        if !self.is_monic() {
            return Err(Error::InvalidArgument("family is not monic".into()));
        }
        Ok(self.coeffs.iter().rev().skip(1).cloned().collect())
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let zpart = match k {
                0 => String::new(),
                1 => "z".to_string(),
                _ => format!("z^{k}"),
            };
            let cstr = c.to_string();
            let single = c.coeffs().iter().filter(|x| !x.is_zero()).count() == 1;
            let (neg, body) = if single && cstr.starts_with('-') {
                (true, cstr[1..].to_string())
            } else {
                (false, cstr)
            };
            let term = if k == 0 {
                body
            } else if body == "1" {
                zpart
            } else if single {
                format!("{body}*{zpart}")
            } else {
                format!("({body})*{zpart}")
            };
            match (first, neg) {
                (true, true) => write!(f, "-{term}")?,
                (true, false) => write!(f, "{term}")?,
                (false, true) => write!(f, " - {term}")?,
                (false, false) => write!(f, " + {term}")?,
            }
            first = false;
        }
        Ok(())
    }
}

/// `f^n(a)` in `Q[t]`. Each step's degree is estimated first and a
/// `ResourceCap` error is returned if it would exceed `deg_cap`.
pub fn iterate_orbit(f: &Family, a: &UniPoly, n: usize, deg_cap: u64) -> Result<UniPoly> {
    let mut x = a.clone().with_var(Var::T);
    for _ in 0..n {
        check_degree_cap(f, &x, deg_cap)?;
        x = f.apply(&x);
    }
    Ok(x)
}

fn check_degree_cap(f: &Family, x: &UniPoly, deg_cap: u64) -> Result<()> {
    let est = f.degree_bound(x.degree().unwrap_or(0));
    if est > deg_cap as u128 {
        return Err(Error::ResourceCap { what: "deg_t of iterate", requested: est, limit: deg_cap as u128 });
    }
    Ok(())
}

/// The orbit `a, f(a), …, f^n(a)`.
pub fn orbit(f: &Family, a: &UniPoly, n: usize, deg_cap: u64) -> Result<Vec<UniPoly>> {
    let mut out = vec![a.clone().with_var(Var::T)];
    for _ in 0..n {
        let x = out.last().expect("nonempty");
        check_degree_cap(f, x, deg_cap)?;
        let next = f.apply(x);
        out.push(next);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Generic iterates

/// Coefficients of `P^n(z) = Σ_{i=0}^{d^n} A_{n,i} z^{d^n - i}` for the
/// generic monic `P(z) = z^d + a₁z^{d-1} + … + a_d`. `A_{n,i} ∈ Z[a₁…a_d]`.
///
/// A truncated iterate holds only `A_{n,0} … A_{n,keep}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericIterate {
    d: usize,
    n: u32,
    coeffs: Vec<MultiPoly<BigInt>>,
    complete: bool,
}

impl GenericIterate {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `A_{n,0}, A_{n,1}, …`
    pub fn coeffs(&self) -> &[MultiPoly<BigInt>] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &MultiPoly<BigInt> {
        &self.coeffs[i]
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.coeffs.iter().map(|c| c.total_degree().map_or(-1, |x| x as i64)).collect()
    }

    pub fn l1_norms(&self) -> Vec<BigInt> {
        self.coeffs.iter().map(MultiPoly::l1_norm).collect()
    }

    /// Whether every stored coefficient of every `A_{n,i}` is nonnegative.
    pub fn has_nonnegative_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| c.terms().all(|(_, x)| !x.is_negative()))
    }

    /// `A_{n,i}(a)` for every stored `i`.
    pub fn eval(&self, a: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(a.len(), self.d);
        self.coeffs.iter().map(|c| c.eval_in(a, BigInt::clone)).collect()
    }
}

fn generic_cap(d: usize, n: u32, cap: u64) -> Result<u64> {
    if !(2..=crate::poly::MAX_VARS).contains(&d) {
        return Err(Error::InvalidArgument(format!("need 2 <= d <= 9, got {d}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("need n >= 1".into()));
    }
    match (d as u64).checked_pow(n).filter(|&dn| dn <= cap) {
        Some(dn) => Ok(dn),
        None => Err(Error::ResourceCap {
            what: "d^n",
            requested: (d as u128).checked_pow(n).unwrap_or(u128::MAX),
            limit: cap as u128,
        }),
    }
}

/// Full generic iterate. `cap` bounds `d^n`; `term_cap` bounds the number
/// of monomials held at any time.
pub fn generic_iterate(d: usize, n: u32, cap: u64, term_cap: u64) -> Result<GenericIterate> {
    generic_cap(d, n, cap)?;
    build_generic(d, n, None, term_cap)
}

/// `A_{n,0} … A_{n,keep}` only.
pub fn generic_iterate_top(d: usize, n: u32, keep: usize, cap: u64) -> Result<GenericIterate> {
    generic_cap(d, n, cap)?;
    build_generic(d, n, Some(keep), u64::MAX)
}

fn build_generic(d: usize, n: u32, keep: Option<usize>, term_cap: u64) -> Result<GenericIterate> {
    // level 1: 1, a1, …, ad
    let mut level: Vec<MultiPoly<BigInt>> = std::iter::once(MultiPoly::constant(d, BigInt::one()))
        .chain((0..d).map(|i| MultiPoly::var(d, i)))
        .collect();
    if let Some(k) = keep {
        level.truncate(k + 1);
    }
    let mut deg = d;
    for _ in 1..n {
        level = horner_step(d, deg, &level, keep, term_cap)?;
        deg *= d;
    }
    Ok(GenericIterate { d, n, complete: level.len() == deg + 1, coeffs: level })
}

/// From the (possibly truncated) coefficients of `P^k`, of degree `deg`, to
/// those of `P^{k+1} = P^k(P(z))`: `acc ← acc·P + A_{k,i}` for `i = 1..=deg`.
/// Only the top `keep + 1` coefficients are kept when `keep` is set; they
/// never depend on the discarded ones.
fn horner_step(
    d: usize,
    deg: usize,
    prev: &[MultiPoly<BigInt>],
    keep: Option<usize>,
    term_cap: u64,
) -> Result<Vec<MultiPoly<BigInt>>> {
    let vars: Vec<Monomial> = (0..d).map(Monomial::var).collect();
    let mut acc: Vec<MultiPoly<BigInt>> = vec![prev[0].clone()];
    for i in 1..=deg {
        let full_len = acc.len() + d;
        let window = keep.map_or(full_len, |k| full_len.min(k + 1));
        let mut next: Vec<MultiPoly<BigInt>> = Vec::with_capacity(window);
        for l in 0..window {
            let mut slot = acc.get(l).cloned().unwrap_or_else(|| MultiPoly::zero(d));
            for j in 1..=d.min(l) {
                if let Some(src) = acc.get(l - j) {
                    for (m, c) in src.terms() {
                        slot.add_term(m.mul(&vars[j - 1]), c);
                    }
                }
            }
            next.push(slot);
        }
        if let (Some(slot), Some(a)) = (next.get_mut(i * d), prev.get(i)) {
            slot.add_assign(a);
        }
        let terms: usize = next.iter().map(MultiPoly::len).sum();
        if terms as u64 > term_cap {
            return Err(Error::ResourceCap {
                what: "monomials in generic iterate",
                requested: terms as u128,
                limit: term_cap as u128,
            });
        }
        acc = next;
    }
    Ok(acc)
}

/// Exact per-index data of `P^n` that does not need the full expansion.
///
/// Every `A_{n,i}` has nonnegative integer coefficients (the iterate is
/// built from `z` and the `a_j` by additions and products only), so no
/// cancellation happens: `deg A_{n,i}` is the degree in `s` of
/// `A_{n,i}(s, …, s)` and `ℓ₁(A_{n,i}) = A_{n,i}(1, …, 1)`. The p-adic bound
/// is only non-trivial for `i < n`, and those coefficients come from a
/// truncated expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericProfile {
    pub d: usize,
    pub n: u32,
    pub degrees: Vec<i64>,
    pub l1: Vec<BigInt>,
    /// `A_{n,0} … A_{n,n}`
    pub top: GenericIterate,
}

pub fn generic_profile(d: usize, n: u32, cap: u64) -> Result<GenericProfile> {
    let dn = generic_cap(d, n, cap)? as usize;
    // coefficients in Z[s][z]: level[i] is A_{k,i}(s, …, s) as a dense s-polynomial
    let mut level: Vec<Vec<BigInt>> = std::iter::once(vec![BigInt::one()])
        .chain((0..d).map(|_| vec![BigInt::zero(), BigInt::one()]))
        .collect();
    let mut deg = d;
    for _ in 1..n {
        let mut acc: Vec<Vec<BigInt>> = vec![level[0].clone()];
        for i in 1..=deg {
            let mut next: Vec<Vec<BigInt>> = Vec::with_capacity(acc.len() + d);
            for l in 0..acc.len() + d {
                let mut slot = acc.get(l).cloned().unwrap_or_default();
                for j in 1..=d.min(l) {
                    if let Some(src) = acc.get(l - j) {
                        add_shifted(&mut slot, src, 1);
                    }
                }
                next.push(slot);
            }
            add_shifted(&mut next[i * d], &level[i], 0);
            acc = next;
        }
        level = acc;
        deg *= d;
    }
    debug_assert_eq!(level.len(), dn + 1);
    let degrees = level
        .iter()
        .map(|c| c.iter().rposition(|x| !x.is_zero()).map_or(-1, |p| p as i64))
        .collect();
    let l1 = level.iter().map(|c| c.iter().sum()).collect();
    let top = generic_iterate_top(d, n, (n as usize).min(dn), cap)?;
    Ok(GenericProfile { d, n, degrees, l1, top })
}

fn add_shifted(dst: &mut Vec<BigInt>, src: &[BigInt], shift: usize) {
    if dst.len() < src.len() + shift {
        dst.resize(src.len() + shift, BigInt::zero());
    }
    for (k, x) in src.iter().enumerate() {
        dst[k + shift] += x;
    }
}

// ---------------------------------------------------------------------------
// Coefficient bounds

#[derive(Debug, Clone, Serialize)]
pub struct DegEntry {
    pub i: usize,
    /// `-1` for the zero polynomial
    pub degree: i64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegReport {
    pub d: usize,
    pub n: u32,
    pub entries: Vec<DegEntry>,
}

impl DegReport {
    pub fn holds(&self) -> bool {
        self.entries.iter().all(|e| e.ok)
    }

    /// `i − deg A_{n,i}`, smallest over all indices.
    pub fn min_margin(&self) -> i64 {
        self.entries.iter().map(|e| e.i as i64 - e.degree).min().unwrap_or(0)
    }
}

fn deg_report(d: usize, n: u32, degrees: &[i64]) -> DegReport {
    let entries = degrees
        .iter()
        .enumerate()
        .map(|(i, &degree)| DegEntry { i, degree, ok: degree <= i as i64 })
        .collect();
    DegReport { d, n, entries }
}

/// `deg A_{n,i} ≤ i` for every stored index.
pub fn check_deg_bound(g: &GenericIterate) -> DegReport {
    deg_report(g.d, g.n, &g.degrees())
}

#[derive(Debug, Clone, Serialize)]
pub struct PadicEntry {
    pub i: usize,
    pub min_valuation: Valuation,
    /// required lower bound `max(0, (n − i)·vp(d))`
    pub bound: i64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PadicReport {
    pub d: usize,
    pub n: u32,
    pub p: u64,
    pub entries: Vec<PadicEntry>,
}

impl PadicReport {
    pub fn holds(&self) -> bool {
        self.entries.iter().all(|e| e.ok)
    }
}

fn padic_entries(g: &GenericIterate, p: u64) -> Vec<PadicEntry> {
    let vd = vp_nonzero_int(&BigInt::from(g.d), p);
    g.coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| {
            let bound = ((g.n as i64 - i as i64) * vd).max(0);
            let min_valuation = c.min_coeff_valuation(p);
            PadicEntry { i, ok: min_valuation >= Valuation::Finite(bound), bound, min_valuation }
        })
        .collect()
}

/// Gauss norm bound `|A_{n,i}|_p ≤ min{1, |d|_p^{n−i}}` for `i ≥ 1`, i.e.
/// every coefficient has valuation `≥ max(0, (n − i)·vp(d))`.
pub fn check_padic_bound(g: &GenericIterate, p: u64) -> Result<PadicReport> {
    ensure_prime(p)?;
    Ok(PadicReport { d: g.d, n: g.n, p, entries: padic_entries(g, p) })
}

#[derive(Debug, Clone, Serialize)]
pub struct ArchEntry {
    pub i: usize,
    #[serde(serialize_with = "ser_display")]
    pub l1: BigInt,
    /// `2^i·C(d^n, i)`
    #[serde(serialize_with = "ser_display")]
    pub bound: BigInt,
    /// `Ã_{n,i}`, the coefficient of the iterate of `(z+2)^d − 2`
    #[serde(serialize_with = "ser_display")]
    pub tilde: BigInt,
    pub ok: bool,
    pub tilde_ok: bool,
}

pub(crate) fn ser_display<T: fmt::Display, S: serde::Serializer>(
    x: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct ArchReport {
    pub d: usize,
    pub n: u32,
    pub entries: Vec<ArchEntry>,
}

impl ArchReport {
    pub fn holds(&self) -> bool {
        self.entries.iter().all(|e| e.ok && e.tilde_ok)
    }
}

/// Coefficients (descending) of the `n`-th iterate of `(z+2)^d − 2` over Z.
pub fn tilde_iterate(d: usize, n: u32) -> Vec<BigInt> {
    let base: Vec<BigInt> = (0..=d as u64)
        .map(|j| {
            let c = binomial(d as u64, j) << j;
            if j == d as u64 {
                c - 2
            } else {
                c
            }
        })
        .collect();
    let mut level = base.clone();
    for _ in 1..n {
        let mut acc = vec![level[0].clone()];
        for a in &level[1..] {
            let mut next = vec![BigInt::zero(); acc.len() + d];
            for (l, x) in acc.iter().enumerate() {
                for (j, b) in base.iter().enumerate() {
                    next[l + j] += x * b;
                }
            }
            *next.last_mut().expect("nonempty") += a;
            acc = next;
        }
        level = acc;
    }
    level
}

fn arch_report(d: usize, n: u32, l1: &[BigInt]) -> ArchReport {
    let dn = (d as u64).pow(n);
    let tilde = tilde_iterate(d, n);
    let entries = l1
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let bound = binomial(dn, i as u64) << i;
            let expected_tilde = if i as u64 == dn { (BigInt::one() << i) - 2 } else { bound.clone() };
            let t = tilde[i].clone();
            ArchEntry {
                i,
                ok: *l <= bound,
                tilde_ok: t == expected_tilde,
                l1: l.clone(),
                bound,
                tilde: t,
            }
        })
        .collect();
    ArchReport { d, n, entries }
}

/// `ℓ₁(A_{n,i}) ≤ 2^i·C(d^n, i)` and the witness identities
/// `Ã_{n,i} = 2^i·C(d^n, i)` (`1 ≤ i < d^n`), `Ã_{n,d^n} = 2^{d^n} − 2`,
/// where `Ã` is `A` evaluated at the coefficients of `(z+2)^d − 2`. The
/// witness is also checked by evaluating the stored `A_{n,i}` directly.
pub fn check_arch_bound(g: &GenericIterate) -> ArchReport {
    let mut r = arch_report(g.d, g.n, &g.l1_norms());
    let point: Vec<BigInt> = (1..=g.d as u64)
        .map(|j| {
            let c = binomial(g.d as u64, j) << j;
            if j == g.d as u64 {
                c - 2
            } else {
                c
            }
        })
        .collect();
    for (e, v) in r.entries.iter_mut().zip(g.eval(&point)) {
        e.tilde_ok &= v == e.tilde;
    }
    r
}

impl GenericProfile {
    pub fn check_deg_bound(&self) -> DegReport {
        deg_report(self.d, self.n, &self.degrees)
    }

    /// Indices `i ≥ 1` beyond the stored top part only need integrality,
    /// which holds because every `A_{n,i}` lies in `Z[a₁…a_d]`.
    pub fn check_padic_bound(&self, p: u64) -> Result<PadicReport> {
        ensure_prime(p)?;
        let vd = vp_nonzero_int(&BigInt::from(self.d), p);
        let mut entries = padic_entries(&self.top, p);
        let first_trivial = self.top.coeffs.len();
        assert!(first_trivial as i64 > self.n as i64 || vd == 0);
        for i in first_trivial..self.degrees.len() {
            entries.push(PadicEntry { i, min_valuation: Valuation::Finite(0), bound: 0, ok: true });
        }
        Ok(PadicReport { d: self.d, n: self.n, p, entries })
    }

    pub fn check_arch_bound(&self) -> ArchReport {
        arch_report(self.d, self.n, &self.l1)
    }
}

// ---------------------------------------------------------------------------
// Function-field canonical heights

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FfHeight {
    /// `ĥ = (D + e/(d−1))/d^k` where `D = deg f^k(a)` and `e = deg lc(f)`,
    /// valid once `f^k(a)` dominates every lower term of `f`.
    Certified {
        #[serde(serialize_with = "ser_display")]
        value: Rational,
        /// smallest `n` with `f^n(a)` non-constant in `t`
        m0: usize,
        /// `ĥ·d^{m0}`
        #[serde(serialize_with = "ser_display")]
        delta: Rational,
        certified_at: usize,
        degree_at_certificate: usize,
    },
    /// The orbit stays in `Q` and repeats.
    PreperiodicZero { preperiod: usize, period: usize },
    /// Constant family and constant point: a constant has height 0.
    ConstantZero,
    Undetermined { reason: String },
}

impl FfHeight {
    pub fn value(&self) -> Option<Rational> {
        match self {
            FfHeight::Certified { value, .. } => Some(value.clone()),
            FfHeight::PreperiodicZero { .. } | FfHeight::ConstantZero => Some(Rational::zero()),
            FfHeight::Undetermined { .. } => None,
        }
    }
}

/// Exact `ĥ_f(a) = lim deg_t f^n(a) / d^n` over `Q(t)`, or `Undetermined`
/// if no certificate shows up within `max_iter` steps.
pub fn ff_canonical_height(f: &Family, a: &UniPoly, max_iter: usize, deg_cap: u64) -> Result<FfHeight> {
    let d = f.degree();
    let e = f.leading_coeff().degree().expect("nonzero leading coefficient");
    let lower: Vec<(usize, usize)> = f.coeffs()[..d]
        .iter()
        .enumerate()
        .filter_map(|(k, c)| c.degree().map(|dc| (k, dc)))
        .collect();
    let mut x = a.clone().with_var(Var::T);
    let mut constants: Vec<Rational> = Vec::new();
    let mut m0 = None;
    for n in 0..=max_iter {
        if x.is_constant() {
            let c = x.coeff(0);
            if f.is_constant() {
                return Ok(FfHeight::ConstantZero);
            }
            if let Some(pos) = constants.iter().position(|y| *y == c) {
                return Ok(FfHeight::PreperiodicZero { preperiod: pos, period: n - pos });
            }
            constants.push(c);
        } else {
            let m0 = *m0.get_or_insert(n);
            let dd = x.degree().expect("non-constant");
            let dominant = lower.iter().all(|&(k, dc)| e + d * dd > dc + k * dd);
            if dominant {
                let dn = BigInt::from(d).pow(n as u32);
                let value = (Rational::from_integer(BigInt::from(dd))
                    + Rational::new(BigInt::from(e), BigInt::from(d - 1)))
                    / Rational::from_integer(dn);
                let delta = &value * Rational::from_integer(BigInt::from(d).pow(m0 as u32));
                return Ok(FfHeight::Certified {
                    value,
                    m0,
                    delta,
                    certified_at: n,
                    degree_at_certificate: dd,
                });
            }
        }
        if n < max_iter {
            check_degree_cap(f, &x, deg_cap)?;
            x = f.apply(&x);
        }
    }
    Ok(FfHeight::Undetermined {
        reason: format!("no degree-growth certificate within {max_iter} iterations"),
    })
}

// ---------------------------------------------------------------------------
// M-sets

/// Solutions `(m, n) ∈ N²` of `d₁^m·h₁ = d₂^n·h₂`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MSet {
    Empty,
    Solutions { pairs: Vec<(u64, u64)> },
    /// `(m₀ + kΔm, n₀ + kΔn)`, `k ≥ 0`
    Family { base: (u64, u64), step: (u64, u64) },
}

impl MSet {
    pub fn contains(&self, m: u64, n: u64) -> bool {
        match self {
            MSet::Empty => false,
            MSet::Solutions { pairs } => pairs.contains(&(m, n)),
            MSet::Family { base, step } => {
                if m < base.0 || n < base.1 {
                    return false;
                }
                let (dm, dn) = (m - base.0, n - base.1);
                dm % step.0 == 0 && dn % step.1 == 0 && dm / step.0 == dn / step.1
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, MSet::Empty)
    }
}

impl fmt::Display for MSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MSet::Empty => write!(f, "empty"),
            MSet::Solutions { pairs } => {
                let s: Vec<String> = pairs.iter().map(|(m, n)| format!("({m},{n})")).collect();
                write!(f, "{{{}}}", s.join(", "))
            }
            MSet::Family { base, step } => write!(
                f,
                "(m, n) = ({} + {}k, {} + {}k), k >= 0",
                base.0, step.0, base.1, step.1
            ),
        }
    }
}

pub fn mset(d1: u64, h1: &Rational, d2: u64, h2: &Rational) -> Result<MSet> {
    if d1 < 2 || d2 < 2 {
        return Err(Error::InvalidArgument("degrees must be >= 2".into()));
    }
    if !h1.is_positive() || !h2.is_positive() {
        return Err(Error::InvalidArgument("heights must be positive".into()));
    }
    // d1^m / d2^n = r
    let r = h2 / h1;
    let mut primes: Vec<u64> = factor_u64(d1).into_iter().chain(factor_u64(d2)).map(|(p, _)| p).collect();
    primes.sort_unstable();
    primes.dedup();
    let mut rest = r.clone();
    let mut g = Vec::with_capacity(primes.len());
    for &p in &primes {
        let v = crate::exact_arith::vp_unchecked(&r, p).finite().expect("r != 0");
        g.push(v);
        let pv = Rational::from_integer(BigInt::from(p).pow(v.unsigned_abs() as u32));
        rest = if v >= 0 { rest / pv } else { rest * pv };
    }
    if !rest.is_one() {
        return Ok(MSet::Empty);
    }
    let expo = |d: u64| -> Vec<i64> {
        let f = factor_u64(d);
        primes
            .iter()
            .map(|p| f.iter().find(|(q, _)| q == p).map_or(0, |&(_, e)| e as i64))
            .collect()
    };
    let (u, w) = (expo(d1), expo(d2));
    // u·m − w·n = g
    let k = primes.len();
    for i in 0..k {
        for j in i + 1..k {
            let det = -(u[i] * w[j]) + w[i] * u[j];
            if det != 0 {
                // [u_i −w_i; u_j −w_j]·(m, n) = (g_i, g_j)
                let mnum = g[i] * -w[j] + w[i] * g[j];
                let nnum = u[i] * g[j] - g[i] * u[j];
                if mnum % det != 0 || nnum % det != 0 {
                    return Ok(MSet::Empty);
                }
                let (m, n) = (mnum / det, nnum / det);
                let ok = m >= 0 && n >= 0 && (0..k).all(|l| u[l] * m - w[l] * n == g[l]);
                return Ok(if ok {
                    MSet::Solutions { pairs: vec![(m as u64, n as u64)] }
                } else {
                    MSet::Empty
                });
            }
        }
    }
    // dependent: u = α·v, w = β·v with v primitive
    let gu = u.iter().fold(0i64, |acc, x| acc.gcd(x));
    let gw = w.iter().fold(0i64, |acc, x| acc.gcd(x));
    let v: Vec<i64> = u.iter().map(|x| x / gu).collect();
    let (alpha, beta) = (gu, gw);
    // g = kk·v
    let idx = v.iter().position(|&x| x != 0).expect("d1 >= 2");
    if g[idx] % v[idx] != 0 {
        return Ok(MSet::Empty);
    }
    let kk = g[idx] / v[idx];
    if (0..k).any(|l| g[l] != kk * v[l]) {
        return Ok(MSet::Empty);
    }
    // α·m − β·n = kk
    let eg = alpha.extended_gcd(&beta);
    if kk % eg.gcd != 0 {
        return Ok(MSet::Empty);
    }
    let (sm, sn) = (beta / eg.gcd, alpha / eg.gcd);
    let scale = kk / eg.gcd;
    // α·x + β·y = gcd  ⇒  m = x·scale, n = −y·scale
    let (m0, n0) = (eg.x * scale, -eg.y * scale);
    // smallest t with m0 + t·sm >= 0 and n0 + t·sn >= 0
    let t = (-m0.div_euclid(sm)).max(-n0.div_euclid(sn));
    let base = ((m0 + t * sm) as u64, (n0 + t * sn) as u64);
    Ok(MSet::Family { base, step: (sm as u64, sn as u64) })
}

// ---------------------------------------------------------------------------
// The unbounded-height family for f = z^{d1}, g = z^{d2}, a = t, b = 2t

#[derive(Debug, Clone, Serialize)]
pub struct CounterPoint {
    pub m: u32,
    pub n: u32,
    /// `d₂^n / (d₁^m − d₂^n)`
    #[serde(serialize_with = "ser_display")]
    pub exponent: Rational,
    /// `2^exponent` when the exponent is an integer of moderate size
    #[serde(serialize_with = "ser_opt_display")]
    pub t: Option<Rational>,
    /// `|exponent|·log 2`
    pub height: HeightValue,
}

fn ser_opt_display<T: fmt::Display, S: serde::Serializer>(
    x: &Option<T>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

/// Points `t = 2^{d₂^n/(d₁^m − d₂^n)}` for `0 ≤ m ≤ max_m`, `0 ≤ n ≤ max_n`,
/// skipping `d₁^m = d₂^n`, sorted by height (descending), ties by `(m, n)`.
pub fn counterexample_points(d1: u64, d2: u64, max_m: u32, max_n: u32) -> Result<Vec<CounterPoint>> {
    if d1 < 2 || d2 < 2 {
        return Err(Error::InvalidArgument("degrees must be >= 2".into()));
    }
    let two = Rational::from_integer(BigInt::from(2));
    let mut out = Vec::new();
    for m in 0..=max_m {
        let p1 = BigInt::from(d1).pow(m);
        for n in 0..=max_n {
            let p2 = BigInt::from(d2).pow(n);
            let den = &p1 - &p2;
            if den.is_zero() {
                continue;
            }
            let exponent = Rational::new(p2, den);
            let t = if exponent.is_integer() {
                exponent.to_integer().to_i64().filter(|e| e.abs() <= 4096).map(|e| {
                    let v = Rational::from_integer(BigInt::one() << e.unsigned_abs());
                    if e < 0 {
                        v.recip()
                    } else {
                        v
                    }
                })
            } else {
                None
            };
            let height = HeightValue::from_log(LogForm { coeff: exponent.abs(), arg: two.clone() });
            out.push(CounterPoint { m, n, exponent, t, height });
        }
    }
    out.sort_by(|a, b| b.exponent.abs().cmp(&a.exponent.abs()).then((a.m, a.n).cmp(&(b.m, b.n))));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{int, rat};

    fn tp(c: &[i64]) -> UniPoly {
        UniPoly::from_ints(Var::T, c)
    }

    fn z2t() -> Family {
        Family::unicritical(2, tp(&[0, 1])).unwrap()
    }

    #[test]
    fn orbit_examples() {
        let f = z2t();
        assert_eq!(iterate_orbit(&f, &tp(&[0]), 1, DEFAULT_DEGREE_CAP).unwrap(), tp(&[0, 1]));
        assert_eq!(iterate_orbit(&f, &tp(&[0]), 2, DEFAULT_DEGREE_CAP).unwrap(), tp(&[0, 1, 1]));
        assert_eq!(iterate_orbit(&f, &tp(&[5]), 0, DEFAULT_DEGREE_CAP).unwrap(), tp(&[5]));
        for n in 1..=6 {
            let x = iterate_orbit(&f, &tp(&[2]), n, DEFAULT_DEGREE_CAP).unwrap();
            assert_eq!(x.degree(), Some(1 << (n - 1)));
        }
    }

    #[test]
    fn orbit_cap() {
        let f = z2t();
        let e = iterate_orbit(&f, &tp(&[0, 1]), 30, 1000).unwrap_err();
        assert!(matches!(e, Error::ResourceCap { .. }));
    }

    #[test]
    fn family_display() {
        assert_eq!(z2t().to_string(), "z^2 + t");
        assert_eq!(Family::from_ints(&[5, 0, 3]).unwrap().to_string(), "3*z^2 + 5");
        let f = Family::new(vec![tp(&[-1]), tp(&[0, -2]), tp(&[1, 1])]).unwrap();
        assert_eq!(f.to_string(), "(t + 1)*z^2 - 2*t*z - 1");
        assert!(Family::from_ints(&[1, 1]).is_err());
    }

    #[test]
    fn generic_small() {
        let g = generic_iterate(2, 1, DEFAULT_GENERIC_CAP, DEFAULT_TERM_CAP).unwrap();
        assert_eq!(g.coeffs().len(), 3);
        assert_eq!(g.coeff(0), &MultiPoly::constant(2, BigInt::one()));
        assert_eq!(g.coeff(1), &MultiPoly::var(2, 0));
        let g = generic_iterate(2, 2, DEFAULT_GENERIC_CAP, DEFAULT_TERM_CAP).unwrap();
        assert_eq!(g.coeff(1).to_string(), "2*a1");
        // (z²+a₁z+a₂)² + a₁(z²+a₁z+a₂) + a₂
        assert_eq!(g.coeff(2).to_string(), "a1^2 + a1 + 2*a2");
        assert_eq!(g.coeff(4).to_string(), "a1*a2 + a2^2 + a2");
        assert!(g.is_complete());
    }

    #[test]
    fn generic_cap_rejected() {
        let e = generic_iterate(2, 13, DEFAULT_GENERIC_CAP, u64::MAX).unwrap_err();
        assert!(matches!(e, Error::ResourceCap { what: "d^n", .. }));
        let e = generic_iterate(4, 3, DEFAULT_GENERIC_CAP, 1000).unwrap_err();
        assert!(matches!(e, Error::ResourceCap { what: "monomials in generic iterate", .. }));
    }

    #[test]
    fn truncated_matches_full() {
        for (d, n) in [(2, 3), (3, 2), (2, 4), (3, 3)] {
            let full = generic_iterate(d, n, DEFAULT_GENERIC_CAP, DEFAULT_TERM_CAP).unwrap();
            let top = generic_iterate_top(d, n, 5, DEFAULT_GENERIC_CAP).unwrap();
            assert_eq!(top.coeffs(), &full.coeffs()[..6]);
            assert!(!top.is_complete());
        }
    }

    #[test]
    fn profile_matches_full() {
        for (d, n) in [(2, 1), (2, 3), (2, 5), (3, 2), (3, 3), (4, 2)] {
            let full = generic_iterate(d, n, DEFAULT_GENERIC_CAP, DEFAULT_TERM_CAP).unwrap();
            assert!(full.has_nonnegative_coeffs());
            let prof = generic_profile(d, n, DEFAULT_GENERIC_CAP).unwrap();
            assert_eq!(prof.degrees, full.degrees());
            assert_eq!(prof.l1, full.l1_norms());
            for p in [2, 3, 5] {
                let a = check_padic_bound(&full, p).unwrap();
                let b = prof.check_padic_bound(p).unwrap();
                assert_eq!(a.holds(), b.holds());
            }
        }
    }

    #[test]
    fn bound_examples() {
        let g = generic_iterate(2, 2, DEFAULT_GENERIC_CAP, DEFAULT_TERM_CAP).unwrap();
        let r = check_deg_bound(&g);
        assert!(r.holds());
        assert_eq!(r.entries[1].degree, 1);
        assert_eq!(r.entries[0].degree, 0);
        let a = check_arch_bound(&g);
        assert!(a.holds());
        assert_eq!(a.entries[1].l1, BigInt::from(2));
        assert_eq!(a.entries[1].bound, BigInt::from(8));
        assert_eq!(a.entries[4].tilde, BigInt::from(14));
        let g3 = generic_iterate(2, 3, DEFAULT_GENERIC_CAP, DEFAULT_TERM_CAP).unwrap();
        let p = check_padic_bound(&g3, 2).unwrap();
        assert!(p.holds());
        assert_eq!(p.entries[0].i, 1);
        assert_eq!(p.entries[0].bound, 2);
        assert!(p.entries[0].min_valuation >= Valuation::Finite(2));
        assert!(check_padic_bound(&g3, 4).is_err());
    }

    #[test]
    fn tilde_closed_form() {
        for (d, n) in [(2, 1), (2, 3), (3, 2), (5, 2)] {
            let t = tilde_iterate(d, n);
            let dn = (d as u64).pow(n);
            for (i, c) in t.iter().enumerate() {
                let want = if i as u64 == dn { (BigInt::one() << i) - 2 } else { binomial(dn, i as u64) << i };
                assert_eq!(*c, want);
            }
        }
    }

    #[test]
    fn generic_specializes_to_orbit() {
        // f = z² + t z + (t² − 1): substitute a1 = t, a2 = t² − 1
        let f = Family::new(vec![tp(&[-1, 0, 1]), tp(&[0, 1]), tp(&[1])]).unwrap();
        let g = generic_iterate(2, 3, DEFAULT_GENERIC_CAP, DEFAULT_TERM_CAP).unwrap();
        let a = f.monic_coeffs().unwrap();
        // f^3(z) at z = t0 for a few t0, compared through specialization
        for t0 in [int(0), int(2), rat(-1, 3)] {
            let fz = f.specialize(&t0);
            let mut z = UniPoly::identity(Var::Z);
            for _ in 0..3 {
                z = fz.compose(&z);
            }
            let point: Vec<Rational> = a.iter().map(|c| c.eval(&t0)).collect();
            let dn = 8;
            for i in 0..=dn {
                let v = g.coeff(i).to_rational().eval_in(&point, Rational::clone);
                assert_eq!(v, z.coeff(dn - i));
            }
        }
    }

    #[test]
    fn ff_height_examples() {
        let h = ff_canonical_height(&z2t(), &tp(&[2]), 20, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(h.value(), Some(rat(1, 2)));
        let f = Family::from_ints(&[5, 0, 3]).unwrap();
        assert_eq!(ff_canonical_height(&f, &tp(&[0, 1]), 20, DEFAULT_DEGREE_CAP).unwrap().value(), Some(int(1)));
        let g = Family::from_ints(&[0, 0, 1]).unwrap();
        assert_eq!(ff_canonical_height(&g, &tp(&[0, 1]), 20, DEFAULT_DEGREE_CAP).unwrap().value(), Some(int(1)));
        let f4 = Family::unicritical(4, tp(&[0, 1])).unwrap();
        let a = tp(&[2017, 1]);
        assert_eq!(ff_canonical_height(&f4, &a, 20, DEFAULT_DEGREE_CAP).unwrap().value(), Some(int(1)));
        let g8 = Family::unicritical(8, tp(&[0, 1])).unwrap();
        let b = tp(&[2018, 0, 0, 1]);
        assert_eq!(ff_canonical_height(&g8, &b, 20, DEFAULT_DEGREE_CAP).unwrap().value(), Some(int(3)));
    }

    #[test]
    fn ff_height_degenerate() {
        let f = Family::from_ints(&[-1, 0, 1]).unwrap();
        assert_eq!(ff_canonical_height(&f, &tp(&[0]), 20, DEFAULT_DEGREE_CAP).unwrap(), FfHeight::ConstantZero);
        // z² + t·z − t fixes 1
        let f = Family::new(vec![tp(&[0, -1]), tp(&[0, 1]), tp(&[1])]).unwrap();
        assert_eq!(
            ff_canonical_height(&f, &tp(&[1]), 20, DEFAULT_DEGREE_CAP).unwrap(),
            FfHeight::PreperiodicZero { preperiod: 0, period: 1 }
        );
        // non-monic, leading coefficient t: deg grows by d·D + 1
        let f = Family::new(vec![tp(&[0]), tp(&[0]), tp(&[0, 1])]).unwrap();
        assert_eq!(ff_canonical_height(&f, &tp(&[0, 1]), 20, DEFAULT_DEGREE_CAP).unwrap().value(), Some(int(2)));
        // z² + t³ at t: deg 1 is not yet dominant, deg 3 is
        let f = Family::new(vec![tp(&[0, 0, 0, 1]), tp(&[0]), tp(&[1])]).unwrap();
        let h = ff_canonical_height(&f, &tp(&[0, 1]), 20, DEFAULT_DEGREE_CAP).unwrap();
        assert_eq!(h.value(), Some(rat(3, 2)));
        let h = ff_canonical_height(&f, &tp(&[0, 1]), 0, DEFAULT_DEGREE_CAP).unwrap();
        assert!(matches!(h, FfHeight::Undetermined { .. }));
    }

    #[test]
    fn mset_examples() {
        assert_eq!(mset(4, &int(1), 8, &int(3)).unwrap(), MSet::Empty);
        assert_eq!(mset(2, &int(1), 2, &int(1)).unwrap(), MSet::Family { base: (0, 0), step: (1, 1) });
        assert_eq!(mset(2, &int(1), 4, &int(1)).unwrap(), MSet::Family { base: (0, 0), step: (2, 1) });
        assert_eq!(mset(2, &int(1), 3, &int(1)).unwrap(), MSet::Solutions { pairs: vec![(0, 0)] });
        assert_eq!(mset(2, &int(1), 3, &int(2)).unwrap(), MSet::Solutions { pairs: vec![(1, 0)] });
        assert_eq!(mset(2, &int(2), 3, &int(1)).unwrap(), MSet::Empty);
        assert_eq!(mset(4, &int(1), 8, &int(2)).unwrap(), MSet::Family { base: (2, 1), step: (3, 2) });
    }

    fn brute(d1: u64, h1: &Rational, d2: u64, h2: &Rational, m: u64, n: u64) -> bool {
        Rational::from_integer(BigInt::from(d1).pow(m as u32)) * h1
            == Rational::from_integer(BigInt::from(d2).pow(n as u32)) * h2
    }

    #[test]
    fn mset_brute_force() {
        let hs = [int(1), int(2), int(3), rat(1, 2), rat(8, 9), rat(27, 4), int(6), rat(1, 36)];
        for d1 in [2u64, 3, 4, 6, 8, 9] {
            for d2 in [2u64, 3, 4, 6, 8] {
                for h1 in &hs {
                    for h2 in &hs {
                        let s = mset(d1, h1, d2, h2).unwrap();
                        for m in 0..=50 {
                            for n in 0..=50 {
                                assert_eq!(s.contains(m, n), brute(d1, h1, d2, h2, m, n), "{d1} {h1} {d2} {h2} {m} {n} {s:?}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn counterexample_rows() {
        let pts = counterexample_points(2, 3, 3, 3).unwrap();
        let p = pts.iter().find(|p| p.m == 2 && p.n == 1).unwrap();
        assert_eq!(p.t, Some(int(8)));
        assert_eq!(p.height.exact.as_ref().unwrap().coeff, int(3));
        let p = pts.iter().find(|p| p.m == 3 && p.n == 2).unwrap();
        assert_eq!(p.t, Some(rat(1, 512)));
        assert_eq!(p.height.exact.as_ref().unwrap().coeff, int(9));
        assert!(pts.iter().all(|p| p.m != 0 || p.n != 0));
        assert!(pts.windows(2).all(|w| w[0].exponent.abs() >= w[1].exponent.abs()));
    }
}
