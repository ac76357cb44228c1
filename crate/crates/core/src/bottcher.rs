//! Böttcher coordinates `B(z) = z + Σ_j B_j/z^j` of the generic monic
//! polynomial, with `B_j ∈ Q[a₁…a_d]`, and their p-adic evaluation.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::dynamics::{generic_iterate_top, ser_display};
use crate::error::{Error, Result};
use crate::exact_arith::{binomial, ensure_prime, vp_nonzero_int, vp_unchecked, Rational, Valuation};
use crate::poly::{MultiPoly, Ring, TruncLaurent};

type Series = TruncLaurent<MultiPoly<Rational>>;

/// `B₀ … B_J`, read off the level-`n` approximation
/// `F_n = z·(P^n(z)/z^{d^n})^{1/d^n}` with `n` minimal such that `d^n − 1 > J`.
#[derive(Debug, Clone, PartialEq)]
pub struct BottcherSeries {
    d: usize,
    order: usize,
    level: u32,
    coeffs: Vec<MultiPoly<Rational>>,
}

impl BottcherSeries {
    pub fn d(&self) -> usize {
        self.d
    }

    /// `J`
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `B₀ … B_J`
    pub fn coeffs(&self) -> &[MultiPoly<Rational>] {
        &self.coeffs
    }

    /// `z + B₀ + B₁/z + … + B_J/z^J`.
    pub fn as_series(&self) -> Series {
        TruncLaurent::from_coeffs(
            self.order,
            std::iter::once(MultiPoly::constant(self.d, <Rational as One>::one())).chain(self.coeffs.iter().cloned()),
        )
    }

    /// Copy with `B₀` replaced by `B₀ + delta` (used to exercise the
    /// functional-equation check).
    pub fn perturbed_b0(&self, delta: &Rational) -> Self {
        let mut out = self.clone();
        out.coeffs[0].add_term(crate::poly::Monomial::ONE, delta);
        out
    }

    /// `B_j(a)` for `j = 0..=J`.
    pub fn eval_coeffs(&self, avec: &[Rational]) -> Vec<Rational> {
        assert_eq!(avec.len(), self.d, "need one value per a_i");
        self.coeffs.iter().map(|b| b.eval_in(avec, Rational::clone)).collect()
    }
}

fn minimal_level(d: usize, order: usize) -> u32 {
    let mut n = 1u32;
    while (d as u64).pow(n) - 1 <= order as u64 {
        n += 1;
    }
    n
}

/// `B_{n,0} … B_{n,J}` from level `n`, whether or not they have stabilized.
pub fn level_coeffs(d: usize, n: u32, order: usize, cap: u64) -> Result<Vec<MultiPoly<Rational>>> {
    let top = generic_iterate_top(d, n, order + 1, cap)?;
    let zero = MultiPoly::zero(d);
    // u = Σ_{i ≥ 1} A_{n,i} / z^i at order J+1
    let u: Series = TruncLaurent::from_r0(
        order + 1,
        std::iter::once(zero.clone())
            .chain(top.coeffs().iter().skip(1).map(MultiPoly::to_rational))
            .chain(std::iter::repeat(zero)),
    );
    let dn = (d as u64).pow(n);
    let w = TruncLaurent::trunc_root(&u, dn)?;
    // F_n = z·w, so B_{n,j} is the coefficient of z^{-(j+1)} in w
    Ok((0..=order).map(|j| w.coeff(j as i64 + 1).clone()).collect())
}

pub fn compute_coeffs(d: usize, order: usize, cap: u64) -> Result<BottcherSeries> {
    let level = minimal_level(d, order);
    let coeffs = level_coeffs(d, level, order, cap)?;
    Ok(BottcherSeries { d, order, level, coeffs })
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilizationReport {
    pub d: usize,
    pub order: usize,
    /// `(level k, number of indices j < min(d^k − 1, J + 1) compared, all equal)`
    pub levels: Vec<(u32, usize, bool)>,
}

impl StabilizationReport {
    pub fn holds(&self) -> bool {
        self.levels.iter().all(|l| l.2)
    }
}

/// Compares `B_{k,j}` with `B_j` for every level `k ≤ n + 1` and every
/// `j < min(d^k − 1, J + 1)`.
pub fn stabilization_check(b: &BottcherSeries, cap: u64) -> Result<StabilizationReport> {
    let mut levels = Vec::new();
    for k in 1..=b.level + 1 {
        let limit = ((b.d as u64).pow(k) - 1).min(b.order as u64 + 1) as usize;
        let lk = level_coeffs(b.d, k, b.order, cap)?;
        let same = (0..limit).all(|j| lk[j] == b.coeffs[j]);
        levels.push((k, limit, same));
    }
    Ok(StabilizationReport { d: b.d, order: b.order, levels })
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelGapReport {
    pub d: usize,
    pub n: u32,
    /// `ν(F_{n+1} − F_n)`
    pub nu: Valuation,
    /// `d^n − 1`
    pub required: i64,
    pub ok: bool,
}

/// `F_{n+1} − F_n ∈ z^{−(d^n − 1)}·R₀`, compared through order `d^{n+1}`.
pub fn level_gap_check(d: usize, n: u32, cap: u64) -> Result<LevelGapReport> {
    let order = (d as u64).pow(n + 1) as usize;
    let lo = level_coeffs(d, n, order, cap)?;
    let hi = level_coeffs(d, n + 1, order, cap)?;
    let diff = TruncLaurent::from_r0(order, lo.iter().zip(&hi).map(|(a, b)| b.sub_ref(a)));
    // coefficient of z^{-j} in F is B_j, which sits at R₀ index j
    let nu = diff.nu();
    let required = (d as i64).pow(n) - 1;
    Ok(LevelGapReport { d, n, ok: nu >= Valuation::Finite(required), nu, required })
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalEquationReport {
    pub d: usize,
    pub order: usize,
    /// `J − (d − 1)`
    pub certified_order: i64,
    /// every coefficient of `z^0 … z^{-k}` in the residual vanishes for
    /// `k ≤ zero_through`; `order + 1` means the whole computed residual is 0
    pub zero_through: i64,
    /// exponents `k ≤ certified_order` with a nonzero residual coefficient
    pub nonzero: Vec<usize>,
    pub ok: bool,
}

/// Checks `B(P(z)) = B(z)^d` in the form `(1 + π)·U(P(z)) = U(z)^d` where
/// `B = z·U`, `U = 1 + Σ B_j z^{-(j+1)}` and `P(z) = z^d·(1 + π)`.
pub fn functional_equation_check(b: &BottcherSeries) -> Result<FunctionalEquationReport> {
    let d = b.d;
    let ord = b.order + 1;
    let one = MultiPoly::constant(d, <Rational as One>::one());
    let u: Series = TruncLaurent::from_r0(ord, std::iter::once(one.clone()).chain(b.coeffs.iter().cloned()));
    // P ascending: a_d, a_{d-1}, …, a_1, 1
    let q: Vec<MultiPoly<Rational>> =
        (0..d).rev().map(|i| MultiPoly::var(d, i)).chain(std::iter::once(one.clone())).collect();
    let u_of_p = u.compose_poly(&q)?.into_series()?;
    let one_plus_pi: Series =
        TruncLaurent::from_r0(ord, std::iter::once(one).chain((0..d).map(|i| MultiPoly::var(d, i))));
    let lhs = one_plus_pi.mul(&u_of_p)?;
    let rhs = u.pow(d as u32)?;
    let residual = lhs.sub(&rhs);
    let certified_order = b.order as i64 - (d as i64 - 1);
    let r0 = residual.r0_coeffs();
    let zero_through = r0.iter().position(|c| !c.is_zero()).map_or(ord as i64, |k| k as i64 - 1);
    let nonzero: Vec<usize> = (0..r0.len())
        .filter(|&k| k as i64 <= certified_order && !r0[k].is_zero())
        .collect();
    Ok(FunctionalEquationReport {
        d,
        order: b.order,
        certified_order,
        zero_through,
        ok: nonzero.is_empty(),
        nonzero,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CoeffValuationEntry {
    pub j: usize,
    pub min_valuation: Valuation,
    pub bound: i64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoeffValuationReport {
    pub d: usize,
    pub p: u64,
    pub p_divides_d: bool,
    pub entries: Vec<CoeffValuationEntry>,
}

impl CoeffValuationReport {
    pub fn holds(&self) -> bool {
        self.entries.iter().all(|e| e.ok)
    }
}

fn ceil_rational(x: &Rational) -> i64 {
    x.ceil().to_integer().to_i64().expect("small")
}

fn floor_rational(x: &Rational) -> i64 {
    x.floor().to_integer().to_i64().expect("small")
}

/// `p ∤ d`: every coefficient of every `B_j` is a p-adic integer.
/// `p | d`: every coefficient valuation is `≥ ⌈−(j+1)(vp(d) + 1/(p−1))⌉`.
pub fn coeff_valuation_check(b: &BottcherSeries, p: u64) -> Result<CoeffValuationReport> {
    ensure_prime(p)?;
    let vd = vp_nonzero_int(&BigInt::from(b.d), p);
    let entries = b
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let bound = if vd == 0 {
                0
            } else {
                let per = Rational::from_integer(BigInt::from(vd)) + Rational::new(<BigInt as One>::one(), BigInt::from(p - 1));
                ceil_rational(&(-per * Rational::from_integer(BigInt::from(j + 1))))
            };
            let min_valuation = c.min_coeff_valuation(p);
            CoeffValuationEntry { j, ok: min_valuation >= Valuation::Finite(bound), min_valuation, bound }
        })
        .collect();
    Ok(CoeffValuationReport { d: b.d, p, p_divides_d: vd > 0, entries })
}

// ---------------------------------------------------------------------------
// p-adic evaluation

#[derive(Debug, Clone, Serialize)]
pub struct PadicEvalResult {
    pub p: u64,
    #[serde(serialize_with = "ser_display")]
    pub z: Rational,
    #[serde(serialize_with = "ser_rationals")]
    pub avec: Vec<Rational>,
    pub order: usize,
    /// `z + Σ_{j ≤ J} B_j(a)/z^j`
    #[serde(serialize_with = "ser_display")]
    pub partial_sum: Rational,
    /// every omitted term has valuation at least this
    pub tail_bound: Valuation,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

/// Valuation data of a point: `μ = min(0, vp(aᵢ))`, `vp(z)` and `vp(d)`.
struct DomainData {
    mu: i64,
    vz: i64,
    vd: i64,
}

fn domain_data(b: &BottcherSeries, z: &Rational, avec: &[Rational], p: u64) -> Result<DomainData> {
    ensure_prime(p)?;
    if avec.len() != b.d {
        return Err(Error::InvalidArgument(format!("need {} parameters, got {}", b.d, avec.len())));
    }
    let vz = vp_unchecked(z, p)
        .finite()
        .ok_or_else(|| Error::Domain("z = 0 is not in the domain".into()))?;
    let mu = avec.iter().filter_map(|a| vp_unchecked(a, p).finite()).min().unwrap_or(0).min(0);
    let vd = vp_nonzero_int(&BigInt::from(b.d), p);
    let inside = if vd == 0 {
        vz < mu
    } else {
        (p as i64 - 1) * (mu - vd - vz) > 1
    };
    if !inside {
        let msg = if vd == 0 {
            format!("p does not divide d: need vp(z) < min(0, vp(a_i)) = {mu}, got vp(z) = {vz}")
        } else {
            format!(
                "p divides d: need (p-1)*(min(0, vp(a_i)) - vp(d) - vp(z)) > 1, got ({})*({mu} - {vd} - ({vz})) = {}",
                p - 1,
                (p as i64 - 1) * (mu - vd - vz)
            )
        };
        return Err(Error::Domain(msg));
    }
    Ok(DomainData { mu, vz, vd })
}

/// Lower bound for the valuation of every term `B_j(a)/z^j` with `j ≥ from`.
fn tail_bound(dd: &DomainData, p: u64, from: usize, all_zero: bool) -> Valuation {
    if all_zero {
        return Valuation::Infinite;
    }
    let j = Rational::from_integer(BigInt::from(from));
    let mu = Rational::from_integer(BigInt::from(dd.mu));
    let vz = Rational::from_integer(BigInt::from(dd.vz));
    if dd.vd == 0 {
        // vp(B_j(a)) ≥ (j+1)μ, so the term is ≥ μ + j(μ − vp(z))
        Valuation::Finite(floor_rational(&(&mu + &j * (&mu - &vz))))
    } else {
        let c = &mu - Rational::from_integer(BigInt::from(dd.vd)) - Rational::new(<BigInt as One>::one(), BigInt::from(p - 1));
        let g = &c - &vz;
        Valuation::Finite(floor_rational(&(&c + &j * &g)))
    }
}

/// `B(z)` at `a = avec` as an exact partial sum plus a tail valuation bound,
/// on the convergence domain only.
pub fn eval_padic(b: &BottcherSeries, z: &Rational, avec: &[Rational], p: u64) -> Result<PadicEvalResult> {
    let dd = domain_data(b, z, avec, p)?;
    let values = b.eval_coeffs(avec);
    let zinv = z.recip();
    let mut sum = z.clone();
    let mut pw = <Rational as One>::one();
    for v in &values {
        sum += v * &pw;
        pw *= &zinv;
    }
    let all_zero = avec.iter().all(Zero::is_zero);
    Ok(PadicEvalResult {
        p,
        z: z.clone(),
        avec: avec.to_vec(),
        order: b.order,
        partial_sum: sum,
        tail_bound: tail_bound(&dd, p, b.order + 1, all_zero),
    })
}

/// `P(z)` for the generic polynomial at `a = avec`.
pub fn eval_map(avec: &[Rational], z: &Rational) -> Rational {
    avec.iter().fold(<Rational as One>::one(), |acc, a| acc * z + a)
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    #[serde(serialize_with = "ser_display")]
    pub z: Rational,
    /// `vp(eval(P(z)) − eval(z)^d)`
    pub residual_valuation: Valuation,
    pub bound: Valuation,
    pub ok: bool,
}

/// `vp(eval(P(z)) − eval(z)^d) ≥ min(T', min_k [vp C(d,k) + (d−k)·vp(S) + k·T])`
/// where `S = eval(z)`, and `T`, `T'` are the tail bounds at `z` and `P(z)`.
pub fn functional_equation_residual(
    b: &BottcherSeries,
    z: &Rational,
    avec: &[Rational],
    p: u64,
) -> Result<ResidualReport> {
    let ez = eval_padic(b, z, avec, p)?;
    let pz = eval_map(avec, z);
    let epz = eval_padic(b, &pz, avec, p)?;
    let d = b.d as u32;
    let residual = &epz.partial_sum - num_traits::pow(ez.partial_sum.clone(), d as usize);
    let residual_valuation = vp_unchecked(&residual, p);
    let vs = vp_unchecked(&ez.partial_sum, p);
    let mut bound = epz.tail_bound;
    if let Valuation::Finite(t) = ez.tail_bound {
        for k in 1..=d as i64 {
            let vb = vp_nonzero_int(&binomial(d as u64, k as u64), p);
            let term = match vs {
                Valuation::Finite(s) => Valuation::Finite(vb + (d as i64 - k) * s + k * t),
                Valuation::Infinite if k < d as i64 => continue,
                Valuation::Infinite => Valuation::Finite(vb + k * t),
            };
            bound = bound.min(term);
        }
    }
    Ok(ResidualReport { z: z.clone(), ok: residual_valuation >= bound, residual_valuation, bound })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ProbeOutcome {
    /// `vp(B(z) − B(z′)) = vp(z − z′)`
    Isometric { valuation: i64 },
    Violation { expected: i64, found: Valuation },
    /// `vp(z − z′)` is not below the tail bound
    Inconclusive { valuation: i64, tail_bound: Valuation },
}

#[derive(Debug, Clone, Serialize)]
pub struct InjectivityReport {
    pub outcomes: Vec<ProbeOutcome>,
}

impl InjectivityReport {
    pub fn violations(&self) -> usize {
        self.outcomes.iter().filter(|o| matches!(o, ProbeOutcome::Violation { .. })).count()
    }

    pub fn isometric(&self) -> usize {
        self.outcomes.iter().filter(|o| matches!(o, ProbeOutcome::Isometric { .. })).count()
    }

    pub fn inconclusive(&self) -> usize {
        self.outcomes.iter().filter(|o| matches!(o, ProbeOutcome::Inconclusive { .. })).count()
    }
}

/// For each pair of distinct in-domain points, checks
/// `vp(B(z) − B(z′)) = vp(z − z′)` whenever `vp(z − z′)` is below both tail
/// bounds; otherwise reports the pair as inconclusive.
pub fn injectivity_probe(
    b: &BottcherSeries,
    pairs: &[(Rational, Rational)],
    avec: &[Rational],
    p: u64,
) -> Result<InjectivityReport> {
    let mut outcomes = Vec::with_capacity(pairs.len());
    for (z, w) in pairs {
        if z == w {
            return Err(Error::InvalidArgument("injectivity probe needs z != z'".into()));
        }
        let ez = eval_padic(b, z, avec, p)?;
        let ew = eval_padic(b, w, avec, p)?;
        let v = vp_unchecked(&(z - w), p).finite().expect("z != z'");
        let t = ez.tail_bound.min(ew.tail_bound);
        if Valuation::Finite(v) >= t {
            outcomes.push(ProbeOutcome::Inconclusive { valuation: v, tail_bound: t });
            continue;
        }
        let found = vp_unchecked(&(&ez.partial_sum - &ew.partial_sum), p);
        outcomes.push(if found == Valuation::Finite(v) {
            ProbeOutcome::Isometric { valuation: v }
        } else {
            ProbeOutcome::Violation { expected: v, found }
        });
    }
    Ok(InjectivityReport { outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DEFAULT_GENERIC_CAP;
    use crate::exact_arith::{int, rat};

    #[test]
    fn b0_is_half_a1() {
        let b = compute_coeffs(2, 4, DEFAULT_GENERIC_CAP).unwrap();
        let want = crate::poly::QAlgebra::scale(&MultiPoly::var(2, 0), &rat(1, 2));
        assert_eq!(b.coeffs()[0], want);
        assert_eq!(b.level(), 3);
    }

    #[test]
    fn power_map_has_no_corrections() {
        for d in [2, 3] {
            let b = compute_coeffs(d, 6, DEFAULT_GENERIC_CAP).unwrap();
            let zero = vec![int(0); d];
            assert!(b.eval_coeffs(&zero).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn weighted_homogeneity_degree() {
        let b = compute_coeffs(2, 10, DEFAULT_GENERIC_CAP).unwrap();
        for (j, c) in b.coeffs().iter().enumerate() {
            assert!(c.total_degree().is_none_or(|x| x as usize <= j + 1));
        }
    }

    #[test]
    fn stabilization_small() {
        let b = compute_coeffs(2, 8, DEFAULT_GENERIC_CAP).unwrap();
        let r = stabilization_check(&b, DEFAULT_GENERIC_CAP).unwrap();
        assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn level_gap_small() {
        for n in 1..=2 {
            let r = level_gap_check(2, n, DEFAULT_GENERIC_CAP).unwrap();
            assert!(r.ok, "{r:?}");
            assert_eq!(r.nu, Valuation::Finite(r.required));
        }
    }

    #[test]
    fn functional_equation_small() {
        let b = compute_coeffs(2, 8, DEFAULT_GENERIC_CAP).unwrap();
        let r = functional_equation_check(&b).unwrap();
        assert!(r.ok);
        assert_eq!(r.certified_order, 7);
        assert_eq!(r.zero_through, 9);
        let bad = functional_equation_check(&b.perturbed_b0(&rat(1, 1000))).unwrap();
        assert!(!bad.ok);
    }

    #[test]
    fn coeff_valuations_small() {
        let b = compute_coeffs(2, 8, DEFAULT_GENERIC_CAP).unwrap();
        assert!(coeff_valuation_check(&b, 5).unwrap().holds());
        let r = coeff_valuation_check(&b, 2).unwrap();
        assert!(r.holds());
        assert_eq!(r.entries[0].min_valuation, Valuation::Finite(-1));
        assert_eq!(r.entries[0].bound, -2);
    }

    #[test]
    fn eval_examples() {
        let b = compute_coeffs(2, 8, DEFAULT_GENERIC_CAP).unwrap();
        let r = eval_padic(&b, &rat(1, 5), &[int(0), int(0)], 5).unwrap();
        assert_eq!(r.partial_sum, rat(1, 5));
        assert_eq!(r.tail_bound, Valuation::Infinite);
        let avec = [int(0), int(1)];
        let r = eval_padic(&b, &rat(1, 5), &avec, 5).unwrap();
        assert_eq!(vp_unchecked(&r.partial_sum, 5), Valuation::Finite(-1));
        assert_eq!(r.tail_bound, Valuation::Finite(9));
        assert!(matches!(eval_padic(&b, &int(1), &avec, 5), Err(Error::Domain(_))));
        let res = functional_equation_residual(&b, &rat(1, 5), &avec, 5).unwrap();
        assert!(res.ok, "{res:?}");
    }

    #[test]
    fn eval_matches_higher_order() {
        // z(1 + z^-2)^{1/2} for z² + 1: compare J and 2J partial sums
        let lo = compute_coeffs(2, 6, DEFAULT_GENERIC_CAP).unwrap();
        let hi = compute_coeffs(2, 12, DEFAULT_GENERIC_CAP).unwrap();
        let avec = [int(0), int(1)];
        for z in [rat(1, 5), rat(3, 25), rat(-7, 5)] {
            let a = eval_padic(&lo, &z, &avec, 5).unwrap();
            let b = eval_padic(&hi, &z, &avec, 5).unwrap();
            let diff = vp_unchecked(&(&a.partial_sum - &b.partial_sum), 5);
            assert!(diff >= a.tail_bound);
        }
    }

    #[test]
    fn domain_p_divides_d() {
        let b = compute_coeffs(2, 6, DEFAULT_GENERIC_CAP).unwrap();
        let avec = [int(1), int(1)];
        // p = 2: (1)(0 − 1 − vp(z)) > 1 ⇔ vp(z) < −2
        assert!(eval_padic(&b, &rat(1, 4), &avec, 2).is_err());
        let r = eval_padic(&b, &rat(1, 8), &avec, 2).unwrap();
        assert!(r.tail_bound > Valuation::Finite(0));
        let res = functional_equation_residual(&b, &rat(1, 8), &avec, 2).unwrap();
        assert!(res.ok, "{res:?}");
    }

    #[test]
    fn probe_examples() {
        let b = compute_coeffs(2, 10, DEFAULT_GENERIC_CAP).unwrap();
        let avec = [int(0), int(1)];
        let pairs = vec![(rat(1, 5), rat(2, 5)), (rat(1, 5), rat(1, 25))];
        let r = injectivity_probe(&b, &pairs, &avec, 5).unwrap();
        assert_eq!(r.violations(), 0);
        assert_eq!(r.isometric(), 2);
        let deep = vec![(rat(1, 5), rat(1, 5) + Rational::from_integer(BigInt::from(5).pow(30)))];
        let r = injectivity_probe(&b, &deep, &avec, 5).unwrap();
        assert_eq!(r.inconclusive(), 1);
        let zero = [int(0), int(0)];
        let r = injectivity_probe(&b, &pairs, &zero, 5).unwrap();
        assert_eq!(r.isometric(), 2);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::exact_arith::{int, rat, vp_unchecked};
    use crate::dynamics::DEFAULT_GENERIC_CAP;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn series() -> &'static (BottcherSeries, BottcherSeries) {
        static S: OnceLock<(BottcherSeries, BottcherSeries)> = OnceLock::new();
        S.get_or_init(|| {
            (compute_coeffs(2, 6, DEFAULT_GENERIC_CAP).unwrap(), compute_coeffs(2, 12, DEFAULT_GENERIC_CAP).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn tail_bound_is_sound(
            a in (-3i64..=3, -3i64..=3), n in -99i64..=99, k in 1u32..=3, p in prop::sample::select(vec![3u64, 5, 7])
        ) {
            prop_assume!(n % p as i64 != 0);
            let (lo, hi) = series();
            let avec = [int(a.0), int(a.1)];
            let z = rat(n, (p as i64).pow(k));
            let x = eval_padic(lo, &z, &avec, p).unwrap();
            let y = eval_padic(hi, &z, &avec, p).unwrap();
            prop_assert!(vp_unchecked(&(&x.partial_sum - &y.partial_sum), p) >= x.tail_bound);
        }
    }
}
