//! Desk-scale experiments on orbit differences, emitted as fixed-column
//! tables.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{counterexample_points, ff_canonical_height, iterate_orbit, mset, orbit, Family, FfHeight};
use crate::error::{Error, Result};
use crate::exact_arith::Rational;
use crate::factor_roots::{eisenstein, mahler_height_unchecked, roots_height_table, DEFAULT_FACTOR_CAP};
use crate::heights::{hpol, root_height_bound, HeightValue};
use crate::parse::parse_poly;
use crate::poly::{UniPoly, Var};

pub const COLUMNS: [&str; 11] = [
    "scenario",
    "N",
    "degree",
    "n_factors",
    "min_factor_deg",
    "max_factor_deg",
    "max_root_height",
    "height_err_bound",
    "hpol",
    "hpol_over_dN",
    "verdict",
];

#[derive(Debug, Clone)]
pub struct ScenarioOptions {
    pub max_n: u32,
    /// second range, used by the counterexample table
    pub max_m: Option<u32>,
    pub deg_cap: u64,
    pub factor_cap: usize,
    /// root heights are computed only up to this degree
    pub root_degree_max: usize,
    pub parallel: bool,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions {
            max_n: 6,
            max_m: None,
            deg_cap: 1024,
            factor_cap: DEFAULT_FACTOR_CAP,
            root_degree_max: 32,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRow {
    pub scenario: String,
    pub n: String,
    pub degree: Option<u64>,
    pub n_factors: Option<usize>,
    pub min_factor_deg: Option<usize>,
    pub max_factor_deg: Option<usize>,
    pub max_root_height: Option<HeightValue>,
    pub hpol: Option<HeightValue>,
    pub hpol_over_dn: Option<HeightValue>,
    pub verdict: String,
}

impl ScenarioRow {
    fn new(scenario: &str, n: impl ToString) -> Self {
        ScenarioRow {
            scenario: scenario.to_string(),
            n: n.to_string(),
            degree: None,
            n_factors: None,
            min_factor_deg: None,
            max_factor_deg: None,
            max_root_height: None,
            hpol: None,
            hpol_over_dn: None,
            verdict: "ok".into(),
        }
    }

    fn error(scenario: &str, n: impl ToString, e: &Error) -> Self {
        ScenarioRow { verdict: format!("error: {e}"), ..Self::new(scenario, n) }
    }

    /// Largest error bound among the height columns.
    pub fn height_err_bound(&self) -> Option<f64> {
        [&self.max_root_height, &self.hpol, &self.hpol_over_dn]
            .into_iter()
            .flatten()
            .map(|h| h.err)
            .reduce(f64::max)
    }

    pub fn is_violation(&self) -> bool {
        self.verdict.starts_with("violation")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl Verdict {
    fn new(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        Verdict { name: name.into(), ok, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: String,
    pub params: BTreeMap<String, String>,
    pub rows: Vec<ScenarioRow>,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
}

impl ScenarioResult {
    fn new(scenario: &str) -> Self {
        ScenarioResult {
            scenario: scenario.into(),
            params: BTreeMap::new(),
            rows: Vec::new(),
            verdicts: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn param(&mut self, k: &str, v: impl ToString) {
        self.params.insert(k.into(), v.to_string());
    }

    pub fn ok(&self) -> bool {
        self.verdicts.iter().all(|v| v.ok) && !self.rows.iter().any(ScenarioRow::is_violation)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

// ---------------------------------------------------------------------------
// Rendering

fn fmt_f64(x: f64, precision: usize) -> String {
    // f64 carries about 17 significant digits
    let digits = precision.min(16);
    format!("{x:.digits$}")
}

fn fmt_height(h: &Option<HeightValue>, precision: usize) -> String {
    h.as_ref().map(|h| fmt_f64(h.approx, precision)).unwrap_or_default()
}

fn fmt_opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn row_fields(r: &ScenarioRow, precision: usize) -> [String; 11] {
    [
        r.scenario.clone(),
        r.n.clone(),
        fmt_opt(&r.degree),
        fmt_opt(&r.n_factors),
        fmt_opt(&r.min_factor_deg),
        fmt_opt(&r.max_factor_deg),
        fmt_height(&r.max_root_height, precision),
        r.height_err_bound().map(|e| format!("{e:.3e}")).unwrap_or_default(),
        fmt_height(&r.hpol, precision),
        fmt_height(&r.hpol_over_dn, precision),
        r.verdict.clone(),
    ]
}

pub fn render_csv(res: &ScenarioResult, precision: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    w.write_record(COLUMNS).map_err(io)?;
    for r in &res.rows {
        w.write_record(row_fields(r, precision)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("utf8"))
}

#[derive(Serialize)]
struct JsonOut<'a> {
    scenario: &'a str,
    params: &'a BTreeMap<String, String>,
    rows: Vec<BTreeMap<&'static str, String>>,
    verdicts: &'a [Verdict],
    warnings: &'a [String],
    ok: bool,
}

pub fn render_json(res: &ScenarioResult, precision: usize) -> Result<String> {
    let rows = res
        .rows
        .iter()
        .map(|r| COLUMNS.into_iter().zip(row_fields(r, precision)).collect())
        .collect();
    let out = JsonOut {
        scenario: &res.scenario,
        params: &res.params,
        rows,
        verdicts: &res.verdicts,
        warnings: &res.warnings,
        ok: res.ok(),
    };
    serde_json::to_string_pretty(&out).map_err(|e| Error::InvalidArgument(format!("json: {e}")))
}

// ---------------------------------------------------------------------------
// Shared pieces

fn map_rows<T: Send + Sync, R: Send>(items: &[T], parallel: bool, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    if parallel {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

fn max_height<'a>(hs: impl IntoIterator<Item = &'a HeightValue>) -> Option<HeightValue> {
    hs.into_iter()
        .max_by(|a, b| a.upper().partial_cmp(&b.upper()).expect("finite heights"))
        .cloned()
}

fn pow2(n: u32) -> Rational {
    Rational::from_integer(BigInt::one() << n)
}

/// Fills factor and root-height columns of `row` from `q`.
fn factor_columns(row: &mut ScenarioRow, q: &UniPoly, opts: &ScenarioOptions) -> Result<()> {
    let deg = q.degree().ok_or(Error::ZeroPolynomial)?;
    row.degree = Some(deg as u64);
    if deg == 0 {
        row.n_factors = Some(0);
        return Ok(());
    }
    let table = roots_height_table(q, opts.factor_cap)?;
    row.n_factors = Some(table.len());
    row.min_factor_deg = table.iter().map(|r| r.degree).min();
    row.max_factor_deg = table.iter().map(|r| r.degree).max();
    row.max_root_height = max_height(table.iter().map(|r| &r.height));
    Ok(())
}

// ---------------------------------------------------------------------------
// f = z² + t, two constant starting points

/// For `N = 2..=max_n`, `Q_N = (f^N(a) − f^N(b)) / (f^{N−1}(a) − f^{N−1}(b))`
/// with `f = z² + t`; the division must be exact.
pub fn scenario_quadratic(a: &Rational, b: &Rational, opts: &ScenarioOptions) -> Result<ScenarioResult> {
    const ID: &str = "quadratic";
    if a == b {
        return Err(Error::InvalidArgument("a = b: every orbit difference is the zero polynomial".into()));
    }
    let mut res = ScenarioResult::new(ID);
    res.param("a", a);
    res.param("b", b);
    res.param("maxN", opts.max_n);
    let f = Family::unicritical(2, UniPoly::identity(Var::T))?;
    let n = opts.max_n as usize;
    let oa = orbit(&f, &UniPoly::constant(Var::T, a.clone()), n, opts.deg_cap)?;
    let ob = orbit(&f, &UniPoly::constant(Var::T, b.clone()), n, opts.deg_cap)?;
    let deltas: Vec<UniPoly> = oa.iter().zip(&ob).map(|(x, y)| x.sub(y)).collect();

    if a * a == b * b {
        res.warnings.push("a^2 = b^2: f(a) = f(b), so the set of such t is everything".into());
        for big_n in 2..=opts.max_n {
            res.rows.push(ScenarioRow::error(ID, big_n, &Error::InvalidArgument("f^N(a) - f^N(b) vanishes identically".into())));
        }
        return Ok(res);
    }

    let ns: Vec<u32> = (2..=opts.max_n).collect();
    let quotients: Vec<Result<UniPoly>> =
        ns.iter().map(|&k| deltas[k as usize].exact_div(&deltas[k as usize - 1])).collect();
    if let Some((k, _)) = ns.iter().zip(&quotients).find(|(_, q)| q.is_err()) {
        return Err(Error::NotDivisible(format!(
            "f^{k}(a) - f^{k}(b) by f^{}(a) - f^{}(b)",
            k - 1,
            k - 1
        )));
    }
    let quotients: Vec<UniPoly> = quotients.into_iter().map(|q| q.expect("checked")).collect();
    let work: Vec<(u32, &UniPoly)> = ns.iter().copied().zip(&quotients).collect();
    res.rows = map_rows(&work, opts.parallel, |&(k, q)| {
        let mut row = ScenarioRow::new(ID, k);
        if let Err(e) = factor_columns(&mut row, q, opts) {
            return ScenarioRow::error(ID, k, &e);
        }
        match hpol(q) {
            Ok(h) => {
                row.hpol_over_dn = Some(h.scaled(&pow2(k).recip()));
                row.hpol = Some(h);
            }
            Err(e) => return ScenarioRow::error(ID, k, &e),
        }
        row
    });
    res.verdicts.push(Verdict::new("exact division", true, format!("Q_N exact for N = 2..{}", opts.max_n)));

    let early = max_height(res.rows.iter().filter(|r| r.n.parse::<u32>().is_ok_and(|k| k <= 3)).filter_map(|r| r.max_root_height.as_ref()));
    let all = max_height(res.rows.iter().filter_map(|r| r.max_root_height.as_ref()));
    if let (Some(early), Some(all)) = (early, all) {
        if opts.max_n > 3 {
            let ok = all.upper() <= 3.0 * early.lower();
            res.verdicts.push(Verdict::new(
                "root heights within 3x of N <= 3",
                ok,
                format!("max over N <= {}: {:.6}, max over N <= 3: {:.6}", opts.max_n, all.approx, early.approx),
            ));
        }
    }

    // Cor-style bound h_pol(f^N(a) − f^N(b)) ≤ c·2^N: report c and check
    // that later ratios do not exceed twice the early ones
    let mut ratios = Vec::new();
    for (k, dk) in deltas.iter().enumerate().skip(1) {
        ratios.push((k as u32, hpol(dk)?.scaled(&pow2(k as u32).recip())));
    }
    let c = ratios.iter().map(|r| r.1.upper()).fold(0.0, f64::max);
    let early_c = ratios.iter().filter(|r| r.0 <= 3).map(|r| r.1.lower()).fold(0.0, f64::max);
    let listing: Vec<String> = ratios.iter().map(|(k, h)| format!("N={k}: {:.6}", h.approx)).collect();
    res.param("hpol_delta_over_2N_constant", fmt_f64(c, 12));
    res.verdicts.push(Verdict::new(
        "hpol(delta_N)/2^N bounded",
        opts.max_n <= 3 || c <= 2.0 * early_c,
        format!("constant {c:.6}; {}", listing.join(", ")),
    ));
    Ok(res)
}

// ---------------------------------------------------------------------------
// f = 3z² + 5, g = z², a = b = t

fn prop52_row(n: u32, p: &UniPoly, opts: &ScenarioOptions) -> Result<ScenarioRow> {
    const ID: &str = "prop52";
    let mut row = ScenarioRow::new(ID, n);
    let deg = p.degree().ok_or(Error::ZeroPolynomial)?;
    row.degree = Some(deg as u64);
    let coeffs = p.integer_coeffs().ok_or_else(|| Error::InvalidArgument("P_n has non-integer coefficients".into()))?;
    let five = BigInt::from(5);
    let mut problems = Vec::new();
    let lc_expected = BigInt::from(3).pow((1u32 << n) - 1) - 1;
    if coeffs[deg] != lc_expected {
        problems.push("leading coefficient is not 3^(2^n-1) - 1".to_string());
    }
    if coeffs[deg].is_multiple_of(&five) {
        problems.push("5 divides the leading coefficient".into());
    }
    if coeffs[0].mod_floor(&BigInt::from(25)) != five {
        problems.push("constant term is not 5 mod 25".into());
    }
    if let Some(i) = (1..deg).find(|&i| !coeffs[i].is_multiple_of(&five)) {
        problems.push(format!("5 does not divide the t^{i} coefficient"));
    }
    let eis = eisenstein(p, 5)?;
    if !eis {
        problems.push("not Eisenstein at 5".into());
    } else {
        row.n_factors = Some(1);
        row.min_factor_deg = Some(deg);
        row.max_factor_deg = Some(deg);
    }
    if eis && deg <= opts.root_degree_max {
        let h = mahler_height_unchecked(p)?;
        let bound = root_height_bound(p, 1u64 << n)?;
        if !h.certainly_le(&bound) {
            problems.push(format!("root height {:.6} exceeds the bound {:.6}", h.approx, bound.approx));
        }
        row.max_root_height = Some(h);
    }
    let h = hpol(p)?;
    row.hpol_over_dn = Some(h.scaled(&pow2(n).recip()));
    row.hpol = Some(h);
    if !problems.is_empty() {
        row.verdict = format!("violation: {}", problems.join("; "));
    }
    Ok(row)
}

/// `P_n = f^n(t) − g^n(t)` for `f = 3z² + 5`, `g = z²`, `n = 1..=max_n`.
pub fn scenario_prop52(opts: &ScenarioOptions) -> Result<ScenarioResult> {
    const ID: &str = "prop52";
    let mut res = ScenarioResult::new(ID);
    res.param("f", "3*z^2 + 5");
    res.param("g", "z^2");
    res.param("maxN", opts.max_n);
    let f = Family::from_ints(&[5, 0, 3])?;
    let g = Family::from_ints(&[0, 0, 1])?;
    let t = UniPoly::identity(Var::T);
    let n = opts.max_n as usize;
    let of = orbit(&f, &t, n, opts.deg_cap)?;
    let og = orbit(&g, &t, n, opts.deg_cap)?;
    let work: Vec<(u32, UniPoly)> = (1..=opts.max_n).map(|k| (k, of[k as usize].sub(&og[k as usize]))).collect();
    res.rows = map_rows(&work, opts.parallel, |(k, p)| {
        prop52_row(*k, p, opts).unwrap_or_else(|e| ScenarioRow::error(ID, k, &e))
    });
    let all_ok = res.rows.iter().all(|r| r.verdict == "ok");
    res.verdicts.push(Verdict::new(
        "Eisenstein at 5 with the stated coefficient conditions",
        all_ok,
        format!("n = 1..{}", opts.max_n),
    ));
    let ratios: Vec<&HeightValue> = res
        .rows
        .iter()
        .filter(|r| r.n.parse::<u32>().is_ok_and(|k| k >= 3))
        .filter_map(|r| r.hpol_over_dn.as_ref())
        .collect();
    if ratios.len() >= 2 {
        let hi = ratios.iter().map(|h| h.upper()).fold(f64::MIN, f64::max);
        let lo = ratios.iter().map(|h| h.lower()).fold(f64::MAX, f64::min);
        res.verdicts.push(Verdict::new(
            "hpol(P_n)/2^n varies by less than 2x for n >= 3",
            hi < 2.0 * lo,
            format!("min {lo:.6}, max {hi:.6}"),
        ));
    }
    Ok(res)
}

// ---------------------------------------------------------------------------
// f = z⁴ + t, a = t + 2017; g = z⁸ + t, b = t³ + 2018

pub const EXAMPLE15_F: &str = "z^4 + t";
pub const EXAMPLE15_A: &str = "t + 2017";
pub const EXAMPLE15_G: &str = "z^8 + t";
pub const EXAMPLE15_B: &str = "t^3 + 2018";

fn orbit_rows(id: &str, f: &Family, a: &UniPoly, opts: &ScenarioOptions) -> Vec<ScenarioRow> {
    let d = f.degree() as u32;
    let mut rows = Vec::new();
    let mut x = a.clone();
    for k in 1..=opts.max_n {
        match iterate_orbit(f, &x, 1, opts.deg_cap) {
            Ok(next) => x = next,
            Err(e) => {
                rows.extend((k..=opts.max_n).map(|j| ScenarioRow::error(id, j, &e)));
                break;
            }
        }
        let mut row = ScenarioRow::new(id, k);
        row.degree = x.degree().map(|v| v as u64);
        match hpol(&x) {
            Ok(h) => {
                row.hpol_over_dn = Some(h.scaled(&Rational::from_integer(BigInt::from(d).pow(k)).recip()));
                row.hpol = Some(h);
            }
            Err(e) => row = ScenarioRow::error(id, k, &e),
        }
        rows.push(row);
    }
    rows
}

pub fn scenario_example15(opts: &ScenarioOptions) -> Result<ScenarioResult> {
    let mut res = ScenarioResult::new("example15");
    res.param("f", EXAMPLE15_F);
    res.param("a", EXAMPLE15_A);
    res.param("g", EXAMPLE15_G);
    res.param("b", EXAMPLE15_B);
    res.param("maxN", opts.max_n);
    let f = parse_poly(EXAMPLE15_F)?.into_family()?;
    let g = parse_poly(EXAMPLE15_G)?.into_family()?;
    let a = parse_poly(EXAMPLE15_A)?.into_uni()?;
    let b = parse_poly(EXAMPLE15_B)?.into_uni()?;

    let hf = ff_canonical_height(&f, &a, 16, opts.deg_cap.max(1 << 16))?;
    let hg = ff_canonical_height(&g, &b, 16, opts.deg_cap.max(1 << 16))?;
    let one = Rational::one();
    let three = Rational::from_integer(BigInt::from(3));
    res.verdicts.push(Verdict::new("hhat_f(a) = 1", hf.value() == Some(one.clone()), describe(&hf)));
    res.verdicts.push(Verdict::new("hhat_g(b) = 3", hg.value() == Some(three.clone()), describe(&hg)));
    if let (Some(x), Some(y)) = (hf.value(), hg.value()) {
        if !x.is_zero() {
            let ratio = &y / &x;
            let power_of_two = ratio.is_integer() && ratio.to_integer().is_positive() && {
                let r = ratio.to_integer();
                (&r & (&r - 1u32)).is_zero()
            };
            res.verdicts.push(Verdict::new(
                "height ratio is not a power of 2",
                !power_of_two,
                format!("ratio {ratio}"),
            ));
            let m = mset(4, &x, 8, &y)?;
            res.verdicts.push(Verdict::new("M-set is empty", m.is_empty(), m.to_string()));
        }
    }
    // deg f^m(a) = 4^m and deg g^n(b) = 3·8^n never coincide
    let range = opts.max_n.max(1);
    let clash = (0..=range).flat_map(|m| (0..=range).map(move |n| (m, n))).find(|&(m, n)| {
        BigInt::from(4).pow(m) == BigInt::from(3) * BigInt::from(8).pow(n)
    });
    res.verdicts.push(Verdict::new(
        "orbit degrees disjoint",
        clash.is_none(),
        format!("4^m vs 3*8^n for m, n <= {range}"),
    ));
    res.rows = orbit_rows("example15:f", &f, &a, opts);
    res.rows.extend(orbit_rows("example15:g", &g, &b, opts));
    Ok(res)
}

fn describe(h: &FfHeight) -> String {
    match h {
        FfHeight::Certified { value, m0, .. } => format!("{value} (certified at step {m0})"),
        FfHeight::PreperiodicZero { preperiod, period } => format!("0 (preperiodic {preperiod}, {period})"),
        FfHeight::ConstantZero => "0 (constant orbit)".into(),
        FfHeight::Undetermined { reason } => format!("undetermined: {reason}"),
    }
}

// ---------------------------------------------------------------------------
// f = z², g = z³, a = t, b = 2t

/// One row per `(m, n)`, sorted by height.
pub fn scenario_counterexample(opts: &ScenarioOptions) -> Result<ScenarioResult> {
    const ID: &str = "counterexample";
    let max_m = opts.max_m.unwrap_or(opts.max_n);
    let mut res = ScenarioResult::new(ID);
    res.param("d1", 2);
    res.param("d2", 3);
    res.param("maxM", max_m);
    res.param("maxN", opts.max_n);
    let pts = counterexample_points(2, 3, max_m, opts.max_n)?;
    for p in &pts {
        let mut row = ScenarioRow::new(ID, format!("m={} n={}", p.m, p.n));
        row.max_root_height = Some(p.height.clone());
        row.verdict = format!("t = 2^({})", p.exponent);
        res.rows.push(row);
    }
    let hundred = Rational::from_integer(BigInt::from(100));
    let best = pts.first();
    let witness = best.is_some_and(|p| p.exponent.abs() > hundred);
    res.verdicts.push(Verdict::new(
        "height above 100*log 2",
        witness,
        match best {
            Some(p) => format!("largest at m={} n={}: |exponent| = {} ~ {:.4}", p.m, p.n, p.exponent.abs(), p.height.approx / std::f64::consts::LN_2),
            None => "no points".into(),
        },
    ));
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{int, rat};

    fn opts(max_n: u32) -> ScenarioOptions {
        ScenarioOptions { max_n, ..Default::default() }
    }

    #[test]
    fn quadratic_small() {
        let r = scenario_quadratic(&int(0), &int(1), &opts(3)).unwrap();
        let row = &r.rows[0];
        assert_eq!(row.n, "2");
        assert_eq!(row.degree, Some(1));
        let h = row.max_root_height.as_ref().unwrap();
        assert_eq!(h.exact.as_ref().unwrap().arg, int(2));
        assert!(r.ok(), "{:?}", r.verdicts);
        assert!(scenario_quadratic(&int(1), &int(1), &opts(3)).is_err());
        let w = scenario_quadratic(&int(1), &int(-1), &opts(3)).unwrap();
        assert!(!w.warnings.is_empty());
        assert!(w.rows.iter().all(|r| r.verdict.starts_with("error")));
    }

    #[test]
    fn prop52_small() {
        let r = scenario_prop52(&opts(4)).unwrap();
        assert!(r.ok(), "{:?} {:?}", r.rows, r.verdicts);
        assert_eq!(r.rows[0].degree, Some(2));
        assert_eq!(r.rows[3].degree, Some(16));
    }

    #[test]
    fn example15_verdicts() {
        let r = scenario_example15(&opts(2)).unwrap();
        assert!(r.ok(), "{:?}", r.verdicts);
        let degs: Vec<_> = r.rows.iter().map(|r| (r.scenario.as_str(), r.degree)).collect();
        assert_eq!(
            degs,
            vec![
                ("example15:f", Some(4)),
                ("example15:f", Some(16)),
                ("example15:g", Some(24)),
                ("example15:g", Some(192)),
            ]
        );
    }

    #[test]
    fn example15_cap_rows() {
        let o = ScenarioOptions { max_n: 3, deg_cap: 100, ..Default::default() };
        let r = scenario_example15(&o).unwrap();
        let g: Vec<_> = r.rows.iter().filter(|r| r.scenario == "example15:g").collect();
        assert_eq!(g.len(), 3);
        assert!(g[1].verdict.starts_with("error"));
    }

    #[test]
    fn counterexample_table() {
        let r = scenario_counterexample(&opts(3)).unwrap();
        assert_eq!(r.rows[0].n, "m=3 n=2");
        assert_eq!(r.rows[0].verdict, "t = 2^(-9)");
        assert!(!r.ok());
    }

    #[test]
    fn rendering_is_stable() {
        let r = scenario_quadratic(&int(2), &rat(1, 2), &opts(4)).unwrap();
        let a = render_csv(&r, 30).unwrap();
        let b = render_csv(&scenario_quadratic(&int(2), &rat(1, 2), &ScenarioOptions { parallel: true, ..opts(4) }).unwrap(), 30).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with(&COLUMNS.join(",")));
        assert_eq!(a.lines().count(), 4);
        let j: serde_json::Value = serde_json::from_str(&render_json(&r, 10).unwrap()).unwrap();
        assert_eq!(j["rows"].as_array().unwrap().len(), 3);
        assert_eq!(j["rows"][0]["N"], "2");
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::exact_arith::rat;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn quadratic_csv_is_deterministic(a in (-3i64..=3, 1i64..=3), b in (-3i64..=3, 1i64..=3)) {
            let (a, b) = (rat(a.0, a.1), rat(b.0, b.1));
            prop_assume!(a != b);
            let o = ScenarioOptions { max_n: 3, ..Default::default() };
            let seq = scenario_quadratic(&a, &b, &o).map(|r| render_csv(&r, 12).unwrap());
            let par = scenario_quadratic(&a, &b, &ScenarioOptions { parallel: true, ..o.clone() })
                .map(|r| render_csv(&r, 12).unwrap());
            match (seq, par) {
                (Ok(x), Ok(y)) => {
                    prop_assert_eq!(&x, &y);
                    prop_assert!(x.starts_with(&COLUMNS.join(",")));
                }
                (Err(x), Err(y)) => prop_assert_eq!(x.to_string(), y.to_string()),
                (x, y) => prop_assert!(false, "{:?} vs {:?}", x.is_ok(), y.is_ok()),
            }
        }
    }
}
