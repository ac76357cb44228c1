//! Squarefree decomposition, factorization over Q (Zassenhaus), Eisenstein
//! criteria over Z and at `λ = 1 − ζ_p`, and certified complex roots.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_arith::{
    cyclo_lambda_valuation, ensure_prime, factor_u64, is_prime, rational_to_f64, scaled_f64,
    CyclotomicInt, Rational, Valuation,
};
use crate::heights::{height_from_roots, HeightValue};
use crate::poly::{UniPoly, Var};

/// Default cap on the degree accepted by [`factor_over_q`].
pub const DEFAULT_FACTOR_CAP: usize = 128;

/// `unit · ∏ factor^multiplicity`; factors are primitive integer
/// polynomials with positive leading coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorList {
    pub unit: Rational,
    pub factors: Vec<(UniPoly, u32)>,
}

impl FactorList {
    pub fn product(&self, var: Var) -> UniPoly {
        self.factors
            .iter()
            .fold(UniPoly::constant(var, self.unit.clone()), |acc, (f, m)| acc.mul(&f.pow(*m)))
    }

    /// Factor degrees, repeated by multiplicity, ascending.
    pub fn degree_multiset(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .factors
            .iter()
            .flat_map(|(f, m)| std::iter::repeat_n(f.degree().unwrap_or(0), *m as usize))
            .collect();
        v.sort_unstable();
        v
    }

    fn sort(&mut self) {
        self.factors.sort_by(|(a, ma), (b, mb)| {
            a.degree()
                .cmp(&b.degree())
                .then_with(|| a.coeffs().iter().rev().cmp(b.coeffs().iter().rev()))
                .then(ma.cmp(mb))
        });
    }
}

fn primitive(p: &UniPoly) -> Result<(Rational, UniPoly)> {
    let (content, coeffs) = p.primitive_part()?;
    Ok((content, UniPoly::from_bigints(p.var(), &coeffs)))
}

/// Yun's algorithm. The factors are squarefree and pairwise coprime but
/// not necessarily irreducible.
pub fn squarefree_decompose(p: &UniPoly) -> Result<FactorList> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let (unit, f) = primitive(p)?;
    let mut factors = Vec::new();
    if f.degree() == Some(0) {
        return Ok(FactorList { unit: unit * f.coeff(0), factors });
    }
    let df = f.derivative();
    let a0 = f.gcd(&df);
    let mut b = f.exact_div(&a0)?;
    let mut c = df.exact_div(&a0)?;
    let mut d = c.sub(&b.derivative());
    let mut i = 1u32;
    loop {
        let a = b.gcd(&d);
        if a.degree() != Some(0) {
            factors.push((primitive(&a)?.1, i));
        }
        b = b.exact_div(&a)?;
        if b.degree() == Some(0) {
            break;
        }
        c = d.exact_div(&a)?;
        d = c.sub(&b.derivative());
        i += 1;
    }
    let mut out = FactorList { unit: Rational::one(), factors };
    let prod = out.product(p.var());
    out.unit = p.leading_coeff().expect("nonzero") / prod.leading_coeff().expect("nonzero");
    Ok(out)
}

/// Complete factorization over Q: squarefree split, then for each part a
/// good prime, Cantor–Zassenhaus modulo it, Hensel lifting beyond the
/// Mignotte bound and recombination over subsets by increasing size.
pub fn factor_over_q(p: &UniPoly, deg_cap: usize) -> Result<FactorList> {
    let deg = p.degree().ok_or(Error::ZeroPolynomial)?;
    if deg > deg_cap {
        return Err(Error::ResourceCap {
            what: "degree for factorization",
            requested: deg as u128,
            limit: deg_cap as u128,
        });
    }
    let sqf = squarefree_decompose(p)?;
    let mut factors = Vec::new();
    for (part, mult) in &sqf.factors {
        let coeffs = part.integer_coeffs().expect("primitive part is integral");
        for g in factor_squarefree(&coeffs)? {
            factors.push((UniPoly::from_bigints(p.var(), &g), *mult));
        }
    }
    let mut out = FactorList { unit: sqf.unit, factors };
    out.sort();
    Ok(out)
}

/// Factors a primitive squarefree integer polynomial (ascending
/// coefficients, positive leading coefficient, degree ≥ 1).
fn factor_squarefree(f: &[BigInt]) -> Result<Vec<Vec<BigInt>>> {
    let n = f.len() - 1;
    if n == 1 {
        return Ok(vec![f.to_vec()]);
    }
    let lc = &f[n];
    let p = good_prime(f)?;
    let fp: Vec<u64> = f.iter().map(|c| mod_u64(c, p)).collect();
    let lc_inv = inv_mod_u64(fp[n], p);
    let monic = fp::scale(&fp, lc_inv, p);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f00d);
    let mut modular = Vec::new();
    for (g, k) in fp::distinct_degree(&monic, p) {
        fp::equal_degree(&g, k, p, &mut rng, &mut modular);
    }
    if modular.len() == 1 {
        return Ok(vec![f.to_vec()]);
    }
    // bound for coefficients of lc·g, g any factor of f
    let norm2_sq: BigInt = f.iter().map(|c| c * c).sum();
    let norm2 = norm2_sq.sqrt() + 1;
    let bound: BigInt = (lc.abs() * norm2) << (n + 1);
    let pb = BigInt::from(p);
    let mut modulus = pb.clone();
    while modulus <= bound {
        modulus = &modulus * &modulus;
    }
    let f_mod: Vec<BigInt> = f.iter().map(|c| c.mod_floor(&modulus)).collect();
    let lifted = hensel::lift_all(&f_mod, &modular, p, &modulus);
    Ok(recombine(f, lifted, &modulus))
}

fn mod_u64(c: &BigInt, p: u64) -> u64 {
    c.mod_floor(&BigInt::from(p)).to_u64().expect("reduced")
}

fn inv_mod_u64(a: u64, p: u64) -> u64 {
    fp::pow_mod(a, p - 2, p)
}

/// Smallest prime `p ≥ 3` with `p ∤ lc(f)` and `f mod p` squarefree.
fn good_prime(f: &[BigInt]) -> Result<u64> {
    let n = f.len() - 1;
    let mut p = 3u64;
    while p < 1 << 20 {
        if is_prime(p) && mod_u64(&f[n], p) != 0 {
            let fp: Vec<u64> = f.iter().map(|c| mod_u64(c, p)).collect();
            let g = fp::gcd(&fp, &fp::derivative(&fp, p), p);
            if g.len() == 1 {
                return Ok(p);
            }
        }
        p += 2;
    }
    Err(Error::Unsupported("no good prime below 2^20".into()))
}

fn symmetric(c: &BigInt, m: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

fn int_poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    crate::poly::convolve_int(a, b)
}

/// Exact quotient `a / b` over Z, or `None`.
fn int_poly_div(a: &[BigInt], b: &[BigInt]) -> Option<Vec<BigInt>> {
    let (n, m) = (a.len() - 1, b.len() - 1);
    if m > n {
        return None;
    }
    let mut r = a.to_vec();
    let mut q = vec![BigInt::zero(); n - m + 1];
    let lb = &b[m];
    for k in (0..=n - m).rev() {
        let (qk, rem) = r[k + m].div_rem(lb);
        if !rem.is_zero() {
            return None;
        }
        for (j, bj) in b.iter().enumerate() {
            r[k + j] -= &qk * bj;
        }
        q[k] = qk;
    }
    if r.iter().all(Zero::is_zero) {
        Some(q)
    } else {
        None
    }
}

fn primitive_int(c: &[BigInt]) -> Vec<BigInt> {
    let g = c.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    let sign = if c.last().is_some_and(Signed::is_negative) { -1 } else { 1 };
    c.iter().map(|x| x / &g * sign).collect()
}

fn recombine(f: &[BigInt], mut lifted: Vec<Vec<BigInt>>, m: &BigInt) -> Vec<Vec<BigInt>> {
    let mut found = Vec::new();
    let mut f = f.to_vec();
    let mut s = 1;
    'outer: while 2 * s <= lifted.len() {
        let r = lifted.len();
        let mut idx: Vec<usize> = (0..s).collect();
        loop {
            let lc = f.last().expect("nonempty").clone();
            let mut g = vec![lc];
            for &i in &idx {
                g = int_poly_mul(&g, &lifted[i]).iter().map(|c| c.mod_floor(m)).collect();
            }
            let g: Vec<BigInt> = g.iter().map(|c| symmetric(c, m)).collect();
            let g = primitive_int(&g);
            let plausible = f[0].is_zero() || (!g[0].is_zero() && (&f[0] % &g[0]).is_zero());
            if plausible {
                if let Some(q) = int_poly_div(&f, &g) {
                    found.push(g);
                    f = q;
                    for &i in idx.iter().rev() {
                        lifted.remove(i);
                    }
                    continue 'outer;
                }
            }
            // next combination of size s out of r
            let mut k = s;
            while k > 0 && idx[k - 1] == r - s + k - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            idx[k - 1] += 1;
            for j in k..s {
                idx[j] = idx[j - 1] + 1;
            }
        }
        s += 1;
    }
    if f.len() > 1 {
        found.push(primitive_int(&f));
    }
    found
}

/// Polynomials over `F_p`, ascending coefficients, no trailing zeros.
mod fp {
    use super::*;

    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
        let mut r = 1u64;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                r = mulm(r, b, p);
            }
            b = mulm(b, b, p);
            e >>= 1;
        }
        r
    }

    fn mulm(a: u64, b: u64, p: u64) -> u64 {
        ((a as u128 * b as u128) % p as u128) as u64
    }

    pub fn scale(a: &[u64], c: u64, p: u64) -> Vec<u64> {
        trim(a.iter().map(|&x| mulm(x, c, p)).collect())
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        trim(
            (0..n)
                .map(|i| {
                    let x = a.get(i).copied().unwrap_or(0);
                    let y = b.get(i).copied().unwrap_or(0);
                    (x + p - y) % p
                })
                .collect(),
        )
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + mulm(x, y, p)) % p;
            }
        }
        trim(out)
    }

    pub fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        assert!(!b.is_empty(), "division by zero polynomial");
        let mut r = a.to_vec();
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let inv = super::inv_mod_u64(*b.last().expect("nonzero"), p);
        let mut q = vec![0u64; r.len() - b.len() + 1];
        for k in (0..q.len()).rev() {
            let c = mulm(r[k + b.len() - 1], inv, p);
            q[k] = c;
            if c != 0 {
                for (j, &y) in b.iter().enumerate() {
                    r[k + j] = (r[k + j] + p - mulm(c, y, p)) % p;
                }
            }
        }
        (trim(q), trim(r))
    }

    pub fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        divrem(a, b, p).1
    }

    pub fn monic(a: &[u64], p: u64) -> Vec<u64> {
        match a.last() {
            None => Vec::new(),
            Some(&l) => scale(a, super::inv_mod_u64(l, p), p),
        }
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        monic(&a, p)
    }

    pub fn derivative(a: &[u64], p: u64) -> Vec<u64> {
        trim(a.iter().enumerate().skip(1).map(|(i, &c)| mulm(c, i as u64 % p, p)).collect())
    }

    /// `b^e mod m` for a big exponent.
    pub fn powmod_poly(b: &[u64], e: &BigUint, m: &[u64], p: u64) -> Vec<u64> {
        let mut r = vec![1u64];
        let base = rem(b, m, p);
        for i in (0..e.bits()).rev() {
            r = rem(&mul(&r, &r, p), m, p);
            if e.bit(i) {
                r = rem(&mul(&r, &base, p), m, p);
            }
        }
        r
    }

    /// Splits a monic squarefree `f` into `(product of the degree-k irreducible factors, k)`.
    pub fn distinct_degree(f: &[u64], p: u64) -> Vec<(Vec<u64>, usize)> {
        let mut out = Vec::new();
        let mut rest = f.to_vec();
        let x = vec![0, 1];
        let mut h = x.clone();
        let pe = BigUint::from(p);
        let mut k = 1;
        while rest.len() > 2 * k {
            h = powmod_poly(&h, &pe, &rest, p);
            let g = gcd(&rest, &sub(&h, &x, p), p);
            if g.len() > 1 {
                rest = divrem(&rest, &g, p).0;
                h = rem(&h, &rest, p);
                out.push((g, k));
            }
            k += 1;
        }
        if rest.len() > 1 {
            let k = rest.len() - 1;
            out.push((rest, k));
        }
        out
    }

    /// Cantor–Zassenhaus splitting of a product of degree-k irreducibles.
    pub fn equal_degree(f: &[u64], k: usize, p: u64, rng: &mut ChaCha8Rng, out: &mut Vec<Vec<u64>>) {
        let n = f.len() - 1;
        if n == k {
            out.push(f.to_vec());
            return;
        }
        let e = (BigUint::from(p).pow(k as u32) - 1u32) / 2u32;
        loop {
            let a = trim((0..n).map(|_| rng.gen_range(0..p)).collect());
            if a.len() < 2 {
                continue;
            }
            let b = sub(&powmod_poly(&a, &e, f, p), &[1], p);
            let g = gcd(f, &b, p);
            if g.len() > 1 && g.len() < f.len() {
                let h = divrem(f, &g, p).0;
                equal_degree(&g, k, p, rng, out);
                equal_degree(&monic(&h, p), k, p, rng, out);
                return;
            }
        }
    }

    /// `(s, t)` with `s·a + t·b = 1` for coprime `a`, `b`.
    pub fn bezout(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let (mut r0, mut r1) = (a.to_vec(), b.to_vec());
        let (mut s0, mut s1) = (vec![1u64], Vec::new());
        let (mut t0, mut t1) = (Vec::new(), vec![1u64]);
        while !r1.is_empty() {
            let (q, r) = divrem(&r0, &r1, p);
            let s2 = sub(&s0, &mul(&q, &s1, p), p);
            let t2 = sub(&t0, &mul(&q, &t1, p), p);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
            t0 = t1;
            t1 = t2;
        }
        assert_eq!(r0.len(), 1, "bezout needs coprime inputs");
        let inv = super::inv_mod_u64(r0[0], p);
        (scale(&s0, inv, p), scale(&t0, inv, p))
    }
}

/// Quadratic Hensel lifting over `Z/mZ` with big moduli.
mod hensel {
    use super::*;

    fn reduce(a: &[BigInt], m: &BigInt) -> Vec<BigInt> {
        let mut v: Vec<BigInt> = a.iter().map(|c| c.mod_floor(m)).collect();
        while v.last().is_some_and(Zero::is_zero) {
            v.pop();
        }
        v
    }

    fn mul(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        reduce(&crate::poly::convolve_int(a, b), m)
    }

    fn add(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
        let n = a.len().max(b.len());
        let z = BigInt::zero();
        let v: Vec<BigInt> = (0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect();
        reduce(&v, m)
    }

    fn sub(a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
        let n = a.len().max(b.len());
        let z = BigInt::zero();
        let v: Vec<BigInt> = (0..n).map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).collect();
        reduce(&v, m)
    }

    /// Division by a monic `b` modulo `m`.
    fn divrem_monic(a: &[BigInt], b: &[BigInt], m: &BigInt) -> (Vec<BigInt>, Vec<BigInt>) {
        let mut r = reduce(a, m);
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let db = b.len() - 1;
        let mut q = vec![BigInt::zero(); r.len() - db];
        for k in (0..q.len()).rev() {
            let c = r[k + db].mod_floor(m);
            if !c.is_zero() {
                for (j, y) in b.iter().enumerate() {
                    r[k + j] -= &c * y;
                }
            }
            q[k] = c;
        }
        r.truncate(db);
        (reduce(&q, m), reduce(&r, m))
    }

    fn from_fp(a: &[u64]) -> Vec<BigInt> {
        a.iter().map(|&c| BigInt::from(c)).collect()
    }

    /// Lifts `f ≡ g·h (mod p)`, `h` monic, to modulus `target` (a power of
    /// `p` reached by repeated squaring).
    fn lift_pair(
        f: &[BigInt],
        g: &[u64],
        h: &[u64],
        p: u64,
        target: &BigInt,
    ) -> (Vec<BigInt>, Vec<BigInt>) {
        let (s, t) = fp::bezout(g, h, p);
        let (mut g, mut h, mut s, mut t) = (from_fp(g), from_fp(h), from_fp(&s), from_fp(&t));
        let mut m = BigInt::from(p);
        while &m < target {
            let m2 = &m * &m;
            let e = sub(f, &mul(&g, &h, &m2), &m2);
            let (q, r) = divrem_monic(&mul(&s, &e, &m2), &h, &m2);
            let g_new = add(&add(&g, &mul(&t, &e, &m2), &m2), &mul(&q, &g, &m2), &m2);
            let h_new = add(&h, &r, &m2);
            let b = sub(&add(&mul(&s, &g_new, &m2), &mul(&t, &h_new, &m2), &m2), &[BigInt::one()], &m2);
            let (c, d) = divrem_monic(&mul(&s, &b, &m2), &h_new, &m2);
            s = sub(&s, &d, &m2);
            t = sub(&sub(&t, &mul(&t, &b, &m2), &m2), &mul(&c, &g_new, &m2), &m2);
            g = g_new;
            h = h_new;
            m = m2;
        }
        (g, h)
    }

    /// Lifts `f ≡ lc·∏ uᵢ (mod p)` (the `uᵢ` monic) to monic factors modulo
    /// `target`.
    pub fn lift_all(f: &[BigInt], factors: &[Vec<u64>], p: u64, target: &BigInt) -> Vec<Vec<BigInt>> {
        if factors.len() == 1 {
            let lc = f.last().expect("nonzero");
            let inv = lc.extended_gcd(target).x.mod_floor(target);
            return vec![reduce(&f.iter().map(|c| c * &inv).collect::<Vec<_>>(), target)];
        }
        let k = factors.len() / 2;
        let lc = mod_u64(f.last().expect("nonzero"), p);
        let left = factors[..k].iter().fold(vec![lc], |acc, u| fp::mul(&acc, u, p));
        let right = factors[k..].iter().fold(vec![1u64], |acc, u| fp::mul(&acc, u, p));
        let (g, h) = lift_pair(f, &left, &right, p, target);
        let mut out = lift_all(&g, &factors[..k], p, target);
        out.extend(lift_all(&h, &factors[k..], p, target));
        out
    }
}

// ---------------------------------------------------------------------------
// Eisenstein

/// `p ∤ a_D`, `p | a_i` for `i < D`, `p² ∤ a_0`, for an integer polynomial.
pub fn eisenstein(poly: &UniPoly, p: u64) -> Result<bool> {
    ensure_prime(p)?;
    let c = poly
        .integer_coeffs()
        .ok_or_else(|| Error::InvalidArgument("Eisenstein needs integer coefficients".into()))?;
    let Some((lead, rest)) = c.split_last() else {
        return Err(Error::ZeroPolynomial);
    };
    if rest.is_empty() {
        return Ok(false);
    }
    let pb = BigInt::from(p);
    let p2 = &pb * &pb;
    Ok(!(lead % &pb).is_zero()
        && rest.iter().all(|x| (x % &pb).is_zero())
        && !(&rest[0] % &p2).is_zero())
}

/// Eisenstein at `λ = 1 − ζ_d` for `t^D·P(1/t)`, where `P = Σ cᵢ tⁱ` has
/// coefficients in `Z[ζ_d]`, `d` prime: `v_λ(c₀) = 0`, `v_λ(cᵢ) ≥ 1` for
/// `0 < i < D`, `v_λ(c_D) = 1`.
pub fn cyclo_eisenstein_reversed(coeffs: &[CyclotomicInt], d: u64) -> Result<bool> {
    let f = factor_u64(d);
    match f.as_slice() {
        [(_, 1)] => {}
        [(p, k)] => {
            return Err(Error::Unsupported(format!(
                "d = {p}^{k} is a prime power with exponent >= 2; only prime d is handled"
            )))
        }
        _ => return Err(Error::InvalidArgument(format!("d = {d} is not a prime power"))),
    }
    if coeffs.iter().any(|c| c.prime() != d) {
        return Err(Error::InvalidArgument("coefficients live in a different Z[ζ_p]".into()));
    }
    if coeffs.len() < 2 {
        return Ok(false);
    }
    let v: Vec<Valuation> = coeffs.iter().map(cyclo_lambda_valuation).collect();
    let last = v.len() - 1;
    Ok(v[0] == Valuation::Finite(0)
        && v[1..last].iter().all(|x| *x >= Valuation::Finite(1))
        && v[last] == Valuation::Finite(1))
}

// ---------------------------------------------------------------------------
// Complex roots

/// A disk containing exactly one root; the center is a dyadic rational.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootBox {
    #[serde(serialize_with = "crate::heights::ser_rational")]
    pub re: Rational,
    #[serde(serialize_with = "crate::heights::ser_rational")]
    pub im: Rational,
    /// certified upper bound on the distance to the root
    pub radius: f64,
}

const SAFETY: f64 = 1e-12;

impl RootBox {
    pub fn center(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    fn center_abs(&self) -> f64 {
        let sq = &self.re * &self.re + &self.im * &self.im;
        rational_to_f64(&sq).sqrt()
    }

    /// Upper bound for `|α|`.
    pub fn abs_upper(&self) -> f64 {
        (self.center_abs() * (1.0 + SAFETY) + self.radius) * (1.0 + SAFETY)
    }

    /// Lower bound for `|α|`.
    pub fn abs_lower(&self) -> f64 {
        ((self.center_abs() * (1.0 - SAFETY) - self.radius) * (1.0 - SAFETY)).max(0.0)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center()).norm() <= self.radius * (1.0 + SAFETY)
    }

    /// `log⁺|α|` as a midpoint and a half-width covering every point of the
    /// disk.
    pub fn log_plus_abs(&self) -> (f64, f64) {
        let lo = self.abs_lower().max(1.0).ln();
        let hi = self.abs_upper().max(1.0).ln();
        let mid = 0.5 * (lo + hi);
        (mid, 0.5 * (hi - lo) + 1e-15 * (1.0 + mid.abs()))
    }
}

/// Squarefree part as a primitive integer polynomial.
fn squarefree_part(p: &UniPoly) -> Result<Vec<BigInt>> {
    let g = p.gcd(&p.derivative());
    let q = p.exact_div(&g)?;
    Ok(q.primitive_part()?.1)
}

/// One certified disk of radius `≤ target_radius` per distinct root.
pub fn complex_roots(p: &UniPoly, target_radius: f64) -> Result<Vec<RootBox>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let f = squarefree_part(p)?;
    let n = f.len() - 1;
    match n {
        0 => return Ok(Vec::new()),
        1 => {
            return Ok(vec![RootBox {
                re: Rational::new(-f[0].clone(), f[1].clone()),
                im: Rational::zero(),
                radius: 0.0,
            }])
        }
        _ => {}
    }
    let start = aberth_f64(&f);
    let mut frac = 64usize;
    let mut z: Vec<Gauss> = start.iter().map(|c| Gauss::from_f64(*c, frac)).collect();
    while frac <= 1 << 14 {
        aberth_fixed(&f, &mut z, frac);
        if let Some(boxes) = certify(&f, &z, frac) {
            if boxes.iter().all(|b| b.radius <= target_radius) {
                return Ok(boxes);
            }
        }
        let up = frac;
        frac *= 2;
        for x in &mut z {
            x.re <<= up;
            x.im <<= up;
        }
    }
    Err(Error::Unsupported("root certification did not succeed".into()))
}

fn aberth_f64(f: &[BigInt]) -> Vec<Complex64> {
    let n = f.len() - 1;
    // normalize so the largest coefficient is about 2^0
    let top = f.iter().map(|c| c.bits() as i64).max().unwrap_or(0);
    let c: Vec<f64> = f.iter().map(|x| scaled_f64(x, -top)).collect();
    let lc = c[n];
    // Fujiwara-type radius
    let mut r: f64 = 0.0;
    for (k, ck) in c.iter().enumerate().take(n) {
        if *ck != 0.0 {
            r = r.max((ck / lc).abs().powf(1.0 / (n - k) as f64));
        }
    }
    let r = if r.is_finite() && r > 0.0 { 2.0 * r } else { 1.0 };
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let (pv, dv) = horner_f64(&c, z[i]);
            if pv == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = pv / dv;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z.into_iter().map(|x| if x.is_finite() { x } else { Complex64::new(0.5, 0.5) }).collect()
}

fn horner_f64(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for ck in c.iter().rev() {
        d = d * z + p;
        p = p * z + ck;
    }
    (p, d)
}

/// Gaussian integer `re + i·im`, read as a fixed-point number scaled by
/// `2^frac`.
#[derive(Debug, Clone, PartialEq)]
struct Gauss {
    re: BigInt,
    im: BigInt,
}

impl Gauss {
    fn zero() -> Self {
        Gauss { re: BigInt::zero(), im: BigInt::zero() }
    }

    fn from_f64(c: Complex64, frac: usize) -> Self {
        let conv = |x: f64| -> BigInt {
            use num_traits::Float;
            let (m, e, s) = x.integer_decode();
            let m = BigInt::from(m) * BigInt::from(s);
            let shift = e as i64 + frac as i64;
            if shift >= 0 {
                m << shift as usize
            } else {
                m >> (-shift) as usize
            }
        };
        Gauss { re: conv(c.re), im: conv(c.im) }
    }

    fn add(&self, o: &Gauss) -> Gauss {
        Gauss { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    fn sub(&self, o: &Gauss) -> Gauss {
        Gauss { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    /// Exact Gaussian-integer product.
    fn mul_exact(&self, o: &Gauss) -> Gauss {
        Gauss { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }

    fn mul_fx(&self, o: &Gauss, frac: usize) -> Gauss {
        let p = self.mul_exact(o);
        Gauss { re: p.re >> frac, im: p.im >> frac }
    }

    fn div_fx(&self, o: &Gauss, frac: usize) -> Option<Gauss> {
        let den = &o.re * &o.re + &o.im * &o.im;
        if den.is_zero() {
            return None;
        }
        let conj = Gauss { re: o.re.clone(), im: -&o.im };
        let num = self.mul_exact(&conj);
        Some(Gauss { re: (num.re << frac).div_floor(&den), im: (num.im << frac).div_floor(&den) })
    }

    fn norm_sq(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }
}

fn aberth_fixed(f: &[BigInt], z: &mut [Gauss], frac: usize) {
    let n = z.len();
    let one = Gauss { re: BigInt::one() << frac, im: BigInt::zero() };
    let coeffs: Vec<Gauss> = f.iter().map(|c| Gauss { re: c << frac, im: BigInt::zero() }).collect();
    let tiny = BigInt::one() << (frac / 2).max(8);
    for _ in 0..60 {
        let mut done = true;
        for i in 0..n {
            let mut pv = Gauss::zero();
            let mut dv = Gauss::zero();
            for c in coeffs.iter().rev() {
                dv = dv.mul_fx(&z[i], frac).add(&pv);
                pv = pv.mul_fx(&z[i], frac).add(c);
            }
            let Some(ratio) = pv.div_fx(&dv, frac) else { continue };
            let mut s = Gauss::zero();
            for j in 0..n {
                if j != i {
                    if let Some(q) = one.div_fx(&z[i].sub(&z[j]), frac) {
                        s = s.add(&q);
                    }
                }
            }
            let den = one.sub(&ratio.mul_fx(&s, frac));
            let Some(w) = ratio.div_fx(&den, frac) else { continue };
            if w.norm_sq() > tiny {
                done = false;
            }
            z[i] = z[i].sub(&w);
        }
        if done {
            break;
        }
    }
}

/// Inclusion disks `D(zᵢ, n·|P(zᵢ)| / |lc·∏_{j≠i}(zᵢ − zⱼ)|)`; when they are
/// pairwise disjoint each contains exactly one root.
fn certify(f: &[BigInt], z: &[Gauss], frac: usize) -> Option<Vec<RootBox>> {
    let n = f.len() - 1;
    let scale = Rational::from_integer(BigInt::one() << frac);
    let mut boxes = Vec::with_capacity(n);
    for i in 0..n {
        // 2^{frac·n}·P(zᵢ), exactly
        let mut acc = Gauss { re: f[n].clone(), im: BigInt::zero() };
        for k in (0..n).rev() {
            acc = acc.mul_exact(&z[i]);
            acc.re += &f[k] << (frac * (n - k));
        }
        let mut prod = Gauss { re: f[n].clone(), im: BigInt::zero() };
        for j in 0..n {
            if j != i {
                prod = prod.mul_exact(&z[i].sub(&z[j]));
            }
        }
        let den = prod.norm_sq();
        if den.is_zero() {
            return None;
        }
        // radius² = n²·|acc|² / (|prod|²·2^{2·frac})
        let r2 = Rational::new(acc.norm_sq() * BigInt::from(n * n), den << (2 * frac));
        let mut radius = rational_to_f64(&r2).sqrt() * (1.0 + SAFETY);
        if radius == 0.0 && !r2.is_zero() {
            radius = f64::MIN_POSITIVE;
        }
        boxes.push(RootBox {
            re: Rational::from_integer(z[i].re.clone()) / &scale,
            im: Rational::from_integer(z[i].im.clone()) / &scale,
            radius,
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            let d2 = Rational::new(z[i].sub(&z[j]).norm_sq(), BigInt::one() << (2 * frac));
            let dist = rational_to_f64(&d2).sqrt() * (1.0 - SAFETY);
            // NaN counts as overlapping
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(dist > (boxes[i].radius + boxes[j].radius) * (1.0 + SAFETY)) {
                return None;
            }
        }
    }
    Some(boxes)
}

// ---------------------------------------------------------------------------
// Root heights

#[derive(Debug, Clone, Serialize)]
pub struct RootHeightRow {
    #[serde(serialize_with = "crate::dynamics::ser_display")]
    pub factor: UniPoly,
    pub multiplicity: u32,
    pub degree: usize,
    pub height: HeightValue,
}

/// Factors `p` and gives the height of the roots of each irreducible factor.
pub fn roots_height_table(p: &UniPoly, deg_cap: usize) -> Result<Vec<RootHeightRow>> {
    let fl = factor_over_q(p, deg_cap)?;
    let mut rows = Vec::with_capacity(fl.factors.len());
    for (f, m) in fl.factors {
        let boxes = complex_roots(&f, 1e-12)?;
        rows.push(RootHeightRow {
            degree: f.degree().expect("nonconstant factor"),
            height: height_from_roots(&f, &boxes),
            factor: f,
            multiplicity: m,
        });
    }
    Ok(rows)
}

/// `(log|a_D| + Σ log⁺|αᵢ|)/D` for a polynomial known to be irreducible by
/// other means (e.g. Eisenstein); no factorization is attempted.
pub fn mahler_height_unchecked(p: &UniPoly) -> Result<HeightValue> {
    let deg = p.degree().ok_or(Error::ZeroPolynomial)?;
    if deg == 0 {
        return Err(Error::InvalidArgument("constant polynomial has no roots".into()));
    }
    let boxes = complex_roots(p, 1e-12)?;
    if boxes.len() != deg {
        return Err(Error::InvalidArgument("polynomial is not squarefree".into()));
    }
    Ok(height_from_roots(p, &boxes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{big, int, rat};
    use crate::heights::LogForm;

    fn tp(c: &[i64]) -> UniPoly {
        UniPoly::from_ints(Var::T, c)
    }

    #[test]
    fn squarefree_examples() {
        let s = squarefree_decompose(&tp(&[1, -2, 1])).unwrap();
        assert_eq!(s.factors, vec![(tp(&[-1, 1]), 2)]);
        assert_eq!(s.unit, int(1));
        let s = squarefree_decompose(&tp(&[-1, 0, 1])).unwrap();
        assert_eq!(s.factors, vec![(tp(&[-1, 0, 1]), 1)]);
        let s = squarefree_decompose(&tp(&[0, 0, 1, 1])).unwrap();
        assert!(s.factors.contains(&(tp(&[0, 1]), 2)));
        assert!(s.factors.contains(&(tp(&[1, 1]), 1)));
        let p = UniPoly::new(Var::T, vec![rat(-3, 2), int(0), int(3)]);
        let s = squarefree_decompose(&p).unwrap();
        assert_eq!(s.product(Var::T), p);
    }

    #[test]
    fn factor_examples() {
        let f = factor_over_q(&tp(&[-1, 0, 1]), DEFAULT_FACTOR_CAP).unwrap();
        assert_eq!(f.factors, vec![(tp(&[-1, 1]), 1), (tp(&[1, 1]), 1)]);
        let f = factor_over_q(&tp(&[1, 0, 0, 0, 1]), DEFAULT_FACTOR_CAP).unwrap();
        assert_eq!(f.factors, vec![(tp(&[1, 0, 0, 0, 1]), 1)]);
        let f = factor_over_q(&tp(&[-1, -2]), DEFAULT_FACTOR_CAP).unwrap();
        assert_eq!(f.unit, int(-1));
        assert_eq!(f.factors, vec![(tp(&[1, 2]), 1)]);
    }

    #[test]
    fn factor_mixed() {
        // (t² + 1)²·(t³ − 2)·(3t − 1)·t
        let p = tp(&[1, 0, 1]).pow(2).mul(&tp(&[-2, 0, 0, 1])).mul(&tp(&[-1, 3])).mul(&tp(&[0, 1]));
        let p = p.scale(&rat(-5, 7));
        let f = factor_over_q(&p, DEFAULT_FACTOR_CAP).unwrap();
        assert_eq!(f.product(Var::T), p);
        assert_eq!(f.degree_multiset(), vec![1, 1, 2, 2, 3]);
    }

    #[test]
    fn factor_swinnerton_dyer_like() {
        // t⁴ − 10t² + 1 is irreducible, splits into linear/quadratic factors mod every prime
        let f = factor_over_q(&tp(&[1, 0, -10, 0, 1]), DEFAULT_FACTOR_CAP).unwrap();
        assert_eq!(f.factors.len(), 1);
        // (t⁴ − 10t² + 1)(t⁴ + 1)
        let p = tp(&[1, 0, -10, 0, 1]).mul(&tp(&[1, 0, 0, 0, 1]));
        let f = factor_over_q(&p, DEFAULT_FACTOR_CAP).unwrap();
        assert_eq!(f.degree_multiset(), vec![4, 4]);
    }

    #[test]
    fn factor_cap() {
        let p = UniPoly::monomial(Var::T, int(1), 200).add(&tp(&[1]));
        assert!(matches!(factor_over_q(&p, DEFAULT_FACTOR_CAP), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn orbit_difference_factor() {
        // f = z² + t: f²(0) − f²(1) = −2t − 1
        let d = tp(&[0, 1, 1]).sub(&tp(&[1, 3, 1]));
        let f = factor_over_q(&d, DEFAULT_FACTOR_CAP).unwrap();
        assert_eq!(f.unit, int(-1));
        assert_eq!(f.factors, vec![(tp(&[1, 2]), 1)]);
    }

    #[test]
    fn eisenstein_examples() {
        assert!(eisenstein(&tp(&[5, 0, 2]), 5).unwrap());
        assert!(!eisenstein(&tp(&[1, 0, 1]), 2).unwrap());
        assert!(!eisenstein(&tp(&[-4, 0, 1]), 2).unwrap());
        assert!(eisenstein(&tp(&[1, 2]), 4).is_err());
        let p = UniPoly::new(Var::T, vec![rat(1, 2), int(1)]);
        assert!(eisenstein(&p, 2).is_err());
    }

    #[test]
    fn cyclo_eisenstein_examples() {
        let p = 3;
        let lambda = CyclotomicInt::lambda(p).unwrap();
        let zeta = CyclotomicInt::zeta(p).unwrap();
        let one = CyclotomicInt::from_int(p, big(1)).unwrap();
        let c27 = CyclotomicInt::from_int(p, big(27)).unwrap();
        // P = (1−ζ)t + (1 − 27ζ)
        let c0 = &one - &(&c27 * &zeta);
        assert!(cyclo_eisenstein_reversed(&[c0.clone(), lambda.clone()], 3).unwrap());
        let unit = one.clone();
        assert!(!cyclo_eisenstein_reversed(&[unit.clone(), unit.clone(), unit.clone()], 3).unwrap());
        let l2 = &lambda * &lambda;
        assert!(!cyclo_eisenstein_reversed(&[unit, l2], 3).unwrap());
        assert!(matches!(cyclo_eisenstein_reversed(&[c0, lambda], 9), Err(Error::Unsupported(_))));
    }

    #[test]
    fn roots_examples() {
        let b = complex_roots(&tp(&[1, 0, 1]), 1e-12).unwrap();
        assert_eq!(b.len(), 2);
        assert!(b.iter().any(|x| x.contains(Complex64::new(0.0, 1.0))));
        assert!(b.iter().any(|x| x.contains(Complex64::new(0.0, -1.0))));
        let b = complex_roots(&tp(&[-2, 0, 1]), 1e-8).unwrap();
        let s = std::f64::consts::SQRT_2;
        assert!(b.iter().any(|x| (x.center() - Complex64::new(s, 0.0)).norm() < 1e-8));
        assert!(b.iter().any(|x| (x.center() - Complex64::new(-s, 0.0)).norm() < 1e-8));
        assert!(b.iter().all(|x| x.radius <= 1e-8));
        let b = complex_roots(&tp(&[1, -2, 1]), 1e-12).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].re, int(1));
    }

    #[test]
    fn roots_clustered() {
        // (t − 1)(t − 1 − 2^-30)(t + 3)
        let e = Rational::new(BigInt::one(), BigInt::one() << 30);
        let p = UniPoly::new(Var::T, vec![-int(1), int(1)])
            .mul(&UniPoly::new(Var::T, vec![-(int(1) + e), int(1)]))
            .mul(&tp(&[3, 1]));
        let b = complex_roots(&p, 1e-14).unwrap();
        assert_eq!(b.len(), 3);
    }

    #[test]
    fn root_height_table_examples() {
        let rows = roots_height_table(&tp(&[1, 2]), DEFAULT_FACTOR_CAP).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].height.exact, Some(LogForm::ln(int(2))));
        let rows = roots_height_table(&tp(&[-2, 0, 1]), DEFAULT_FACTOR_CAP).unwrap();
        assert!(rows[0].height.agrees_with(0.5 * 2f64.ln(), 1e-12));
        let p = tp(&[-2, 1]).mul(&tp(&[-2, 0, 1]));
        let rows = roots_height_table(&p, DEFAULT_FACTOR_CAP).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].height.agrees_with(2f64.ln(), 1e-12));
        assert!(rows[1].height.agrees_with(0.5 * 2f64.ln(), 1e-12));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn factor_poly() -> impl Strategy<Value = UniPoly> {
        prop::collection::vec(-9i64..=9, 2..=4)
            .prop_filter("nonconstant", |c| *c.last().unwrap() != 0)
            .prop_map(|c| UniPoly::from_ints(Var::T, &c))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn factorization_round_trip(parts in prop::collection::vec(factor_poly(), 1..=3)) {
            let p = parts.iter().fold(UniPoly::from_ints(Var::T, &[1]), |acc, f| acc.mul(f));
            let fl = factor_over_q(&p, DEFAULT_FACTOR_CAP).unwrap();
            prop_assert_eq!(fl.product(Var::T), p.clone());
            let total: usize = fl.degree_multiset().iter().sum();
            prop_assert_eq!(total, p.degree().unwrap());
            // each factor must be irreducible: refactoring gives itself back
            for (f, _) in &fl.factors {
                prop_assert_eq!(factor_over_q(f, DEFAULT_FACTOR_CAP).unwrap().factors.len(), 1);
            }
        }

        #[test]
        fn squarefree_round_trip(parts in prop::collection::vec(factor_poly(), 1..=3), e in 1u32..=3) {
            let p = parts.iter().fold(UniPoly::from_ints(Var::T, &[2]), |acc, f| acc.mul(&f.pow(e)));
            prop_assert_eq!(squarefree_decompose(&p).unwrap().product(Var::T), p);
        }
    }
}
