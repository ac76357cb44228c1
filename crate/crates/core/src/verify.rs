//! Every property suite in one place, for `heightlab verify-all`.

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bottcher::{
    coeff_valuation_check, compute_coeffs, eval_padic, functional_equation_check, functional_equation_residual,
    injectivity_probe, level_gap_check, stabilization_check, BottcherSeries,
};
use crate::dynamics::{
    check_arch_bound, check_deg_bound, check_padic_bound, generic_iterate, generic_profile, ArchReport, DegReport,
    PadicReport, DEFAULT_GENERIC_CAP, DEFAULT_TERM_CAP,
};
use crate::error::{Error, Result};
use crate::exact_arith::{is_prime, lemma61_value, vp_unchecked, Rational, Valuation};
use crate::factor_roots::{factor_over_q, DEFAULT_FACTOR_CAP};
use crate::heights::gelfond_gap;
use crate::poly::{UniPoly, Var};
use crate::scenario::{
    scenario_counterexample, scenario_example15, scenario_prop52, scenario_quadratic, ScenarioOptions,
    ScenarioResult,
};

pub const SUITES: [(u8, &str); 12] = [
    (1, "degree bound for generic iterates"),
    (2, "p-adic bound for generic iterates"),
    (3, "archimedean bound and tilde witness"),
    (4, "Gelfond inequality fuzz"),
    (5, "p-integrality sweep of prod(1 - i*m)/k!"),
    (6, "Bottcher coefficient suite"),
    (7, "p-adic Bottcher evaluation"),
    (8, "f = 3z^2 + 5 against z^2"),
    (9, "z^2 + t with two constant points"),
    (10, "z^4 + t against z^8 + t"),
    (11, "unbounded family for z^2, z^3"),
    (12, "factorization oracle"),
];

/// `(d, n)` pairs of the coefficient-bound suites.
pub fn bound_cases() -> Vec<(usize, u32)> {
    let mut v: Vec<(usize, u32)> = (2..=6).flat_map(|d| (1..=3).map(move |n| (d, n))).collect();
    v.extend((4..=6).map(|n| (2, n)));
    v
}

pub const BOUND_PRIMES: [u64; 4] = [2, 3, 5, 7];

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub only: Option<BTreeSet<u8>>,
    /// added to `B₀` before the functional-equation check
    pub perturb_b0: Option<Rational>,
    pub parallel: bool,
    /// `d^n` above which the bound suites use the specialized profile
    pub full_expansion_limit: u64,
    pub fuzz_pairs: usize,
    pub factor_cases: usize,
    pub counterexample_max: u32,
    pub bottcher_order: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0x5eed,
            only: None,
            perturb_b0: None,
            parallel: false,
            full_expansion_limit: 125,
            fuzz_pairs: 500,
            factor_cases: 200,
            counterexample_max: 40,
            bottcher_order: 16,
        }
    }
}

impl VerifyConfig {
    fn wants(&self, id: u8) -> bool {
        self.only.as_ref().is_none_or(|s| s.contains(&id))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub id: u8,
    pub name: &'static str,
    pub checks: usize,
    pub passed: usize,
    /// first few failures
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    pub seconds: f64,
}

impl SuiteReport {
    fn new(id: u8) -> Self {
        let name = SUITES.iter().find(|s| s.0 == id).expect("known suite").1;
        SuiteReport { id, name, checks: 0, passed: 0, failures: Vec::new(), notes: Vec::new(), seconds: 0.0 }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if ok {
            self.passed += 1;
        } else if self.failures.len() < 20 {
            self.failures.push(what());
        }
    }

    fn fail(&mut self, what: String) {
        self.check(false, || what);
    }

    pub fn ok(&self) -> bool {
        self.checks > 0 && self.passed == self.checks
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.suites.iter().all(SuiteReport::ok)
    }
}

/// Degree, p-adic and archimedean reports for one `(d, n)`.
pub struct BoundCase {
    pub d: usize,
    pub n: u32,
    pub full: bool,
    pub deg: DegReport,
    pub padic: Vec<PadicReport>,
    pub arch: ArchReport,
}

pub fn bound_case(d: usize, n: u32, full_expansion_limit: u64) -> Result<BoundCase> {
    let full = (d as u64).pow(n) <= full_expansion_limit;
    if full {
        let g = generic_iterate(d, n, DEFAULT_GENERIC_CAP, DEFAULT_TERM_CAP)?;
        let padic = BOUND_PRIMES.iter().map(|&p| check_padic_bound(&g, p)).collect::<Result<_>>()?;
        Ok(BoundCase { d, n, full, deg: check_deg_bound(&g), padic, arch: check_arch_bound(&g) })
    } else {
        let g = generic_profile(d, n, DEFAULT_GENERIC_CAP)?;
        let padic = BOUND_PRIMES.iter().map(|&p| g.check_padic_bound(p)).collect::<Result<_>>()?;
        Ok(BoundCase { d, n, full, deg: g.check_deg_bound(), padic, arch: g.check_arch_bound() })
    }
}

fn bound_suites(cfg: &VerifyConfig, out: &mut Vec<SuiteReport>) {
    let start = Instant::now();
    let mut s1 = SuiteReport::new(1);
    let mut s2 = SuiteReport::new(2);
    let mut s3 = SuiteReport::new(3);
    for (d, n) in bound_cases() {
        let case = match bound_case(d, n, cfg.full_expansion_limit) {
            Ok(c) => c,
            Err(e) => {
                for s in [&mut s1, &mut s2, &mut s3] {
                    s.fail(format!("d={d} n={n}: {e}"));
                }
                continue;
            }
        };
        if !case.full {
            let note = format!("d={d} n={n}: coefficient profile (all a_i = s)");
            for s in [&mut s1, &mut s2, &mut s3] {
                s.notes.push(note.clone());
            }
        }
        for e in &case.deg.entries {
            s1.check(e.ok, || format!("d={d} n={n} i={}: deg {} > i", e.i, e.degree));
        }
        for r in &case.padic {
            for e in &r.entries {
                s2.check(e.ok, || format!("d={d} n={n} p={} i={}: v = {} < {}", r.p, e.i, e.min_valuation, e.bound));
            }
        }
        for e in &case.arch.entries {
            s3.check(e.ok, || format!("d={d} n={n} i={}: l1 {} > {}", e.i, e.l1, e.bound));
            s3.check(e.tilde_ok, || format!("d={d} n={n} i={}: tilde {} mismatch", e.i, e.tilde));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    for mut s in [s1, s2, s3] {
        if cfg.wants(s.id) {
            s.seconds = secs;
            out.push(s);
        }
    }
}

fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize, bound: i64) -> UniPoly {
    let deg = rng.gen_range(0..=max_deg);
    let mut c: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-bound..=bound)).collect();
    while c[deg] == 0 {
        c[deg] = rng.gen_range(-bound..=bound);
    }
    UniPoly::from_ints(Var::T, &c)
}

fn suite4(cfg: &VerifyConfig) -> SuiteReport {
    let mut s = SuiteReport::new(4);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 4);
    for _ in 0..cfg.fuzz_pairs {
        let p = random_poly(&mut rng, 10, 1000);
        let q = random_poly(&mut rng, 10, 1000);
        match gelfond_gap(&p, &q) {
            Ok(r) => s.check(r.holds, || format!("P = {p}, Q = {q}: gap {}", r.gap)),
            Err(e) => s.fail(format!("P = {p}, Q = {q}: {e}")),
        }
    }
    s
}

fn suite5() -> SuiteReport {
    let mut s = SuiteReport::new(5);
    let primes: Vec<u64> = (2..=19).filter(|&p| is_prime(p)).collect();
    for k in 1..=40 {
        for m in 1..=12u64 {
            let x = lemma61_value(k, m);
            for &p in primes.iter().filter(|&&p| m % p != 0) {
                let v = vp_unchecked(&x, p);
                s.check(v >= Valuation::Finite(0), || format!("k={k} m={m} p={p}: v = {v}"));
            }
        }
    }
    s
}

fn suite6(cfg: &VerifyConfig) -> SuiteReport {
    let mut s = SuiteReport::new(6);
    for d in [2usize, 3] {
        let b = match compute_coeffs(d, cfg.bottcher_order, DEFAULT_GENERIC_CAP) {
            Ok(b) => b,
            Err(e) => {
                s.fail(format!("d={d}: {e}"));
                continue;
            }
        };
        match stabilization_check(&b, DEFAULT_GENERIC_CAP) {
            Ok(r) => s.check(r.holds(), || format!("d={d}: stabilization {:?}", r.levels)),
            Err(e) => s.fail(format!("d={d}: {e}")),
        }
        let checked = match &cfg.perturb_b0 {
            Some(delta) => b.perturbed_b0(delta),
            None => b.clone(),
        };
        match functional_equation_check(&checked) {
            Ok(r) => s.check(r.ok, || format!("d={d}: functional equation residual nonzero at {:?}", r.nonzero)),
            Err(e) => s.fail(format!("d={d}: {e}")),
        }
        for p in BOUND_PRIMES {
            match coeff_valuation_check(&b, p) {
                Ok(r) => {
                    for e in &r.entries {
                        s.check(e.ok, || format!("d={d} p={p} j={}: v = {} < {}", e.j, e.min_valuation, e.bound));
                    }
                }
                Err(e) => s.fail(format!("d={d} p={p}: {e}")),
            }
        }
    }
    for n in 1..=3 {
        match level_gap_check(2, n, DEFAULT_GENERIC_CAP) {
            Ok(r) => s.check(r.ok, || format!("F_{} - F_{n}: nu = {} < {}", n + 1, r.nu, r.required)),
            Err(e) => s.fail(format!("level gap n={n}: {e}")),
        }
    }
    s
}

/// `u / 5^k` with `u` a random unit at 5.
fn unit_over(rng: &mut ChaCha8Rng, p: i64, k: u32) -> Rational {
    let u = loop {
        let u: i64 = rng.gen_range(-500..=500);
        if u % p != 0 {
            break u;
        }
    };
    let w = loop {
        let w: i64 = rng.gen_range(1..=50);
        if w % p != 0 {
            break w;
        }
    };
    Rational::new(BigInt::from(u), BigInt::from(w) * BigInt::from(p).pow(k))
}

/// In-domain points, close and far pairs, and out-of-domain points for
/// `z² + 1` at `p = 5`.
pub struct EvalSample {
    pub points: Vec<Rational>,
    pub pairs: Vec<(Rational, Rational)>,
    pub outside: Vec<Rational>,
}

pub fn eval_sample(seed: u64) -> EvalSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..20).map(|_| {
        let k = rng.gen_range(1..=3);
        unit_over(&mut rng, 5, k)
    }).collect();
    let pairs = (0..20)
        .map(|i| {
            let k = rng.gen_range(1..=3);
            let z = unit_over(&mut rng, 5, k);
            let w = if i % 2 == 0 {
                let k2 = rng.gen_range(1..=3);
                unit_over(&mut rng, 5, k2)
            } else {
                // z + 5^s·unit with vp(z) < s
                let s = rng.gen_range(1 - k as i64..=8);
                let u = unit_over(&mut rng, 5, 0);
                let shift = if s >= 0 {
                    Rational::from_integer(BigInt::from(5).pow(s as u32))
                } else {
                    Rational::new(BigInt::one(), BigInt::from(5).pow((-s) as u32))
                };
                &z + u * shift
            };
            if w == z {
                (z.clone(), &z + Rational::one())
            } else {
                (z, w)
            }
        })
        .collect();
    let outside = (0..10)
        .map(|i| {
            if i == 0 {
                return Rational::zero();
            }
            let s = rng.gen_range(0..=3);
            unit_over(&mut rng, 5, 0) * Rational::from_integer(BigInt::from(5).pow(s))
        })
        .collect();
    EvalSample { points, pairs, outside }
}

fn suite7(cfg: &VerifyConfig) -> SuiteReport {
    let mut s = SuiteReport::new(7);
    let b: BottcherSeries = match compute_coeffs(2, cfg.bottcher_order, DEFAULT_GENERIC_CAP) {
        Ok(b) => b,
        Err(e) => {
            s.fail(e.to_string());
            return s;
        }
    };
    let avec = [Rational::zero(), Rational::one()];
    let sample = eval_sample(cfg.seed ^ 7);
    for z in &sample.points {
        match functional_equation_residual(&b, z, &avec, 5) {
            Ok(r) => s.check(r.ok, || format!("z = {z}: residual {} < bound {}", r.residual_valuation, r.bound)),
            Err(e) => s.fail(format!("z = {z}: {e}")),
        }
    }
    match injectivity_probe(&b, &sample.pairs, &avec, 5) {
        Ok(r) => {
            for (o, (z, w)) in r.outcomes.iter().zip(&sample.pairs) {
                s.check(!matches!(o, crate::bottcher::ProbeOutcome::Violation { .. }), || {
                    format!("z = {z}, z' = {w}: {o:?}")
                });
            }
            s.notes.push(format!("{} isometric, {} saturated", r.isometric(), r.inconclusive()));
        }
        Err(e) => s.fail(e.to_string()),
    }
    for z in &sample.outside {
        let rejected = matches!(eval_padic(&b, z, &avec, 5), Err(Error::Domain(_)));
        s.check(rejected, || format!("z = {z} accepted outside the domain"));
    }
    s
}

fn scenario_checks(s: &mut SuiteReport, label: &str, r: Result<ScenarioResult>) {
    match r {
        Ok(r) => {
            for row in &r.rows {
                s.check(row.verdict == "ok", || format!("{label} N={}: {}", row.n, row.verdict));
            }
            for v in &r.verdicts {
                s.check(v.ok, || format!("{label}: {} ({})", v.name, v.detail));
                s.notes.push(format!("{label}: {}: {}", v.name, v.detail));
            }
        }
        Err(e) => s.fail(format!("{label}: {e}")),
    }
}

fn suite8(cfg: &VerifyConfig) -> SuiteReport {
    let mut s = SuiteReport::new(8);
    let opts = ScenarioOptions { max_n: 8, root_degree_max: 32, parallel: cfg.parallel, ..Default::default() };
    scenario_checks(&mut s, "prop52", scenario_prop52(&opts));
    s
}

fn suite9(cfg: &VerifyConfig) -> SuiteReport {
    let mut s = SuiteReport::new(9);
    let opts = ScenarioOptions { max_n: 6, parallel: cfg.parallel, ..Default::default() };
    for (a, b) in [(Rational::from_integer(2.into()), Rational::new(1.into(), 2.into())), (Rational::zero(), Rational::new(1.into(), 3.into()))] {
        let label = format!("a={a} b={b}");
        scenario_checks(&mut s, &label, scenario_quadratic(&a, &b, &opts));
    }
    s
}

fn suite10() -> SuiteReport {
    let mut s = SuiteReport::new(10);
    let opts = ScenarioOptions { max_n: 2, ..Default::default() };
    scenario_checks(&mut s, "example15", scenario_example15(&opts));
    s
}

fn suite11(cfg: &VerifyConfig) -> SuiteReport {
    let mut s = SuiteReport::new(11);
    let opts = ScenarioOptions { max_n: cfg.counterexample_max, max_m: Some(cfg.counterexample_max), ..Default::default() };
    match scenario_counterexample(&opts) {
        Ok(r) => {
            for v in &r.verdicts {
                s.check(v.ok, || format!("{} ({})", v.name, v.detail));
                s.notes.push(v.detail.clone());
            }
        }
        Err(e) => s.fail(e.to_string()),
    }
    s
}

/// An Eisenstein polynomial of degree `deg` at a random small prime.
pub fn random_irreducible(rng: &mut ChaCha8Rng, deg: usize) -> UniPoly {
    if deg == 1 {
        let a = loop {
            let a: i64 = rng.gen_range(-9..=9);
            if a != 0 {
                break a;
            }
        };
        return UniPoly::from_ints(Var::T, &[rng.gen_range(-20..=20), a]);
    }
    let p: i64 = [2, 3, 5, 7][rng.gen_range(0..4)];
    let pick_unit = |rng: &mut ChaCha8Rng, lo: i64, hi: i64| loop {
        let x: i64 = rng.gen_range(lo..=hi);
        if x % p != 0 {
            break x;
        }
    };
    let mut c = vec![0i64; deg + 1];
    c[deg] = pick_unit(rng, -12, 12);
    c[0] = p * pick_unit(rng, -6, 6);
    for x in c.iter_mut().take(deg).skip(1) {
        *x = p * rng.gen_range(-6..=6);
    }
    UniPoly::from_ints(Var::T, &c)
}

fn suite12(cfg: &VerifyConfig) -> SuiteReport {
    let mut s = SuiteReport::new(12);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 12);
    for _ in 0..cfg.factor_cases {
        let k = rng.gen_range(1..=4);
        let parts: Vec<UniPoly> = (0..k).map(|_| {
            let d = rng.gen_range(1..=6);
            random_irreducible(&mut rng, d)
        }).collect();
        let product = parts.iter().fold(UniPoly::constant(Var::T, Rational::one()), |acc, f| acc.mul(f));
        let mut want: Vec<usize> = parts.iter().map(|f| f.degree().expect("nonzero")).collect();
        want.sort_unstable();
        match factor_over_q(&product, DEFAULT_FACTOR_CAP) {
            Ok(fl) => {
                let same = fl.product(Var::T) == product;
                let mut got = fl.degree_multiset();
                got.sort_unstable();
                s.check(same && got == want, || format!("{product}: degrees {got:?}, expected {want:?}"));
            }
            Err(e) => s.fail(format!("{product}: {e}")),
        }
    }
    let t4 = UniPoly::from_ints(Var::T, &[1, 0, 0, 0, 1]);
    match factor_over_q(&t4, DEFAULT_FACTOR_CAP) {
        Ok(fl) => s.check(fl.factors.len() == 1 && fl.factors[0].1 == 1, || format!("t^4 + 1 split: {fl:?}")),
        Err(e) => s.fail(format!("t^4 + 1: {e}")),
    }
    s
}

/// Runs the selected suites in order.
pub fn verify_all(cfg: &VerifyConfig) -> VerifyReport {
    let mut suites = Vec::new();
    if (1..=3).any(|id| cfg.wants(id)) {
        bound_suites(cfg, &mut suites);
    }
    let timed = |f: &dyn Fn() -> SuiteReport| {
        let start = Instant::now();
        let mut r = f();
        r.seconds = start.elapsed().as_secs_f64();
        r
    };
    let rest: [(u8, &dyn Fn() -> SuiteReport); 9] = [
        (4, &|| suite4(cfg)),
        (5, &suite5),
        (6, &|| suite6(cfg)),
        (7, &|| suite7(cfg)),
        (8, &|| suite8(cfg)),
        (9, &|| suite9(cfg)),
        (10, &suite10),
        (11, &|| suite11(cfg)),
        (12, &|| suite12(cfg)),
    ];
    for (id, f) in rest {
        if cfg.wants(id) {
            suites.push(timed(f));
        }
    }
    VerifyReport { suites }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn only(ids: &[u8]) -> VerifyConfig {
        VerifyConfig { only: Some(ids.iter().copied().collect()), ..Default::default() }
    }

    #[test]
    fn cheap_suites_pass() {
        let r = verify_all(&VerifyConfig { fuzz_pairs: 50, factor_cases: 20, ..only(&[4, 5, 10, 12]) });
        assert_eq!(r.suites.len(), 4);
        for s in &r.suites {
            assert!(s.ok(), "{s:?}");
        }
    }

    #[test]
    fn perturbation_is_caught() {
        let cfg = VerifyConfig { perturb_b0: Some(Rational::new(1.into(), 1000.into())), bottcher_order: 8, ..only(&[6]) };
        let r = verify_all(&cfg);
        assert!(!r.ok());
        assert!(r.suites[0].failures.iter().any(|f| f.contains("functional equation")));
    }

    #[test]
    fn eval_sample_shapes() {
        let s = eval_sample(1);
        assert_eq!((s.points.len(), s.pairs.len(), s.outside.len()), (20, 20, 10));
        assert!(s.points.iter().all(|z| vp_unchecked(z, 5) < Valuation::Finite(0)));
        assert!(s.outside.iter().all(|z| vp_unchecked(z, 5) >= Valuation::Finite(0)));
        assert!(s.pairs.iter().all(|(a, b)| a != b));
    }
}
