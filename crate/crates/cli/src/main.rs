use std::collections::BTreeSet;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use heightlab_core::bottcher::{
    coeff_valuation_check, compute_coeffs, eval_padic, functional_equation_check, functional_equation_residual,
    level_gap_check, stabilization_check,
};
use heightlab_core::dynamics::{
    check_arch_bound, check_deg_bound, check_padic_bound, generic_iterate, generic_profile, orbit,
    DEFAULT_DEGREE_CAP, DEFAULT_GENERIC_CAP, DEFAULT_TERM_CAP,
};
use heightlab_core::factor_roots::{eisenstein, factor_over_q, roots_height_table, DEFAULT_FACTOR_CAP};
use heightlab_core::heights::hpol;
use heightlab_core::parse::{parse_poly, Parsed};
use heightlab_core::scenario::{
    render_csv, render_json, scenario_counterexample, scenario_example15, scenario_prop52, scenario_quadratic,
    ScenarioOptions, ScenarioResult,
};
use heightlab_core::verify::{verify_all, VerifyConfig, SUITES};
use heightlab_core::{Error, Rational};

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser)]
#[command(name = "heightlab", version, about = "Exact heights, iterates and Böttcher coordinates of polynomial maps")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Out {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the orbit a, f(a), …, f^n(a) of a family over Q[t]
    Iterate {
        /// map, e.g. "z^2 + t"
        family: String,
        /// starting point in Q[t], e.g. "t + 1"
        point: String,
        #[arg(short = 'n', long, default_value_t = 3)]
        steps: usize,
        /// maximal t-degree of an iterate
        #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
        cap: u64,
        #[arg(long, value_enum, default_value = "text")]
        out: Out,
    },
    /// Coefficients A_{n,i} of the n-th iterate of the generic monic polynomial of degree d
    Generic {
        d: usize,
        n: u32,
        /// largest d^n accepted
        #[arg(long, default_value_t = DEFAULT_GENERIC_CAP)]
        cap: u64,
        /// print every A_{n,i}
        #[arg(long)]
        show: bool,
        /// check the bounds on the one-variable specialization only
        #[arg(long)]
        profile: bool,
        #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
        primes: Vec<u64>,
        #[arg(long, value_enum, default_value = "text")]
        out: Out,
    },
    /// h_pol of a polynomial and the heights of its roots
    Heights {
        poly: String,
        #[arg(long, default_value_t = DEFAULT_FACTOR_CAP)]
        cap: usize,
        #[arg(long, value_enum, default_value = "text")]
        out: Out,
    },
    /// Factor a polynomial over Q
    Factor {
        poly: String,
        #[arg(long, default_value_t = DEFAULT_FACTOR_CAP)]
        cap: usize,
        #[arg(long, value_enum, default_value = "text")]
        out: Out,
    },
    /// Eisenstein criterion at a prime
    Eisenstein {
        poly: String,
        #[arg(short, long)]
        p: u64,
    },
    /// Böttcher coefficients B_0 … B_J of the generic monic polynomial
    Bottcher {
        #[arg(short, long)]
        d: usize,
        #[arg(short = 'j', long, default_value_t = 8)]
        order: usize,
        /// run the stabilization, functional-equation and valuation checks
        #[arg(long)]
        check: bool,
        #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
        primes: Vec<u64>,
        /// add this rational to B_0 before the functional-equation check
        #[arg(long)]
        perturb_b0: Option<String>,
        #[arg(long, default_value_t = DEFAULT_GENERIC_CAP)]
        cap: u64,
        #[arg(long, value_enum, default_value = "text")]
        out: Out,
    },
    /// Evaluate B(z) at a rational point in Q_p
    BottcherEval {
        #[arg(short, long)]
        d: usize,
        #[arg(short = 'j', long, default_value_t = 16)]
        order: usize,
        #[arg(short, long)]
        p: u64,
        #[arg(short, long)]
        z: String,
        /// coefficients a1,…,ad of z^d + a1 z^{d-1} + … + ad
        #[arg(short, long, value_delimiter = ',')]
        a: Vec<String>,
        /// also bound eval(P(z)) − eval(z)^d
        #[arg(long)]
        residual: bool,
        #[arg(long, value_enum, default_value = "text")]
        out: Out,
    },
    /// Reproducible experiments emitting fixed-column tables
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// Run every property suite
    VerifyAll {
        /// comma-separated suite numbers
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[arg(long, value_delimiter = ',')]
        skip: Vec<u8>,
        #[arg(long)]
        perturb_b0: Option<String>,
        #[arg(long, default_value_t = VerifyConfig::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = VerifyConfig::default().counterexample_max)]
        counterexample_max: u32,
        #[arg(long)]
        parallel: bool,
        #[arg(long, value_enum, default_value = "text")]
        out: Out,
    },
}

#[derive(Subcommand)]
enum ScenarioCmd {
    /// z^2 + t at two rational starting points
    Quadratic {
        #[arg(short, long, allow_hyphen_values = true)]
        a: String,
        #[arg(short, long, allow_hyphen_values = true)]
        b: String,
        #[command(flatten)]
        common: ScenarioArgs,
    },
    /// 3z^2 + 5 against z^2, starting at t
    Prop52 {
        #[command(flatten)]
        common: ScenarioArgs,
    },
    /// z^4 + t at t + 2017 against z^8 + t at t^3 + 2018
    Example15 {
        #[command(flatten)]
        common: ScenarioArgs,
    },
    /// t = 2^(3^n/(2^m - 3^n)) for z^2, z^3 at t, 2t
    Counterexample {
        #[arg(long = "max-m", visible_alias = "maxM")]
        max_m: Option<u32>,
        #[command(flatten)]
        common: ScenarioArgs,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long = "max-n", visible_alias = "maxN", default_value_t = 6)]
    max_n: u32,
    #[arg(long, value_enum, default_value = "csv")]
    out: Out,
    /// printed decimal digits
    #[arg(long, default_value_t = 30)]
    precision: usize,
    /// maximal t-degree of an iterate
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long)]
    factor_cap: Option<usize>,
    /// compute rows concurrently
    #[arg(long)]
    parallel: bool,
}

impl ScenarioArgs {
    fn options(&self) -> ScenarioOptions {
        let d = ScenarioOptions::default();
        ScenarioOptions {
            max_n: self.max_n,
            deg_cap: self.cap.unwrap_or(d.deg_cap),
            factor_cap: self.factor_cap.unwrap_or(d.factor_cap),
            parallel: self.parallel,
            ..d
        }
    }
}

enum Failure {
    Lib(Error),
    Violation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = Result<(), Failure>;

fn rational(s: &str) -> Result<Rational, Error> {
    let p = parse_poly(s)?.into_uni()?;
    if !p.is_constant() {
        return Err(Error::InvalidArgument(format!("expected a rational number, got {s}")));
    }
    Ok(p.coeff(0).clone())
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn violation_if(bad: bool) -> CmdResult {
    if bad {
        Err(Failure::Violation)
    } else {
        Ok(())
    }
}

fn cmd_iterate(family: &str, point: &str, steps: usize, cap: u64, out: Out) -> CmdResult {
    let f = parse_poly(family)?.into_family()?;
    let a = match parse_poly(point)? {
        Parsed::Uni(p) => p,
        _ => return Err(Error::InvalidArgument("the starting point must be a polynomial in t".into()).into()),
    };
    let orb = orbit(&f, &a, steps, cap)?;
    if out == Out::Json {
        let rows: Vec<_> = orb
            .iter()
            .enumerate()
            .map(|(k, x)| json!({"k": k, "degree": x.degree(), "value": x.to_string()}))
            .collect();
        print_json(&json!({"family": f.to_string(), "orbit": rows}));
    } else {
        println!("f = {f}");
        for (k, x) in orb.iter().enumerate() {
            println!("f^{k}(a) = {x}");
        }
    }
    Ok(())
}

fn cmd_generic(d: usize, n: u32, cap: u64, show: bool, profile: bool, primes: &[u64], out: Out) -> CmdResult {
    let (deg, padic, arch, polys) = if profile {
        let g = generic_profile(d, n, cap)?;
        let padic = primes.iter().map(|&p| g.check_padic_bound(p)).collect::<Result<Vec<_>, _>>()?;
        (g.check_deg_bound(), padic, g.check_arch_bound(), None)
    } else {
        let g = generic_iterate(d, n, cap, DEFAULT_TERM_CAP)?;
        let padic = primes.iter().map(|&p| check_padic_bound(&g, p)).collect::<Result<Vec<_>, _>>()?;
        let polys: Vec<String> = g.coeffs().iter().map(ToString::to_string).collect();
        (check_deg_bound(&g), padic, check_arch_bound(&g), Some(polys))
    };
    let ok = deg.holds() && padic.iter().all(|r| r.holds()) && arch.holds();
    if out == Out::Json {
        let mut v = json!({"d": d, "n": n, "degree": deg, "padic": padic, "arch": arch, "ok": ok});
        if show {
            v["coefficients"] = json!(polys);
        }
        print_json(&v);
    } else {
        if show {
            for (i, c) in polys.iter().flatten().enumerate() {
                println!("A_{{{n},{i}}} = {c}");
            }
        }
        let status = |b: bool| if b { "ok" } else { "VIOLATED" };
        println!("deg A_{{n,i}} <= i: {} (min margin {})", status(deg.holds()), deg.min_margin());
        for r in &padic {
            println!("p = {}: min{{1, |d|_p^(n-i)}} bound: {}", r.p, status(r.holds()));
        }
        println!("l1 <= 2^i C(d^n, i): {}", status(arch.entries.iter().all(|e| e.ok)));
        println!("tilde witness identities: {}", status(arch.entries.iter().all(|e| e.tilde_ok)));
    }
    violation_if(!ok)
}

fn univariate(text: &str) -> Result<heightlab_core::UniPoly, Error> {
    parse_poly(text)?.into_uni()
}

fn cmd_heights(poly: &str, cap: usize, out: Out) -> CmdResult {
    let p = univariate(poly)?;
    let h = hpol(&p)?;
    let rows = if p.degree().unwrap_or(0) > 0 { roots_height_table(&p, cap)? } else { Vec::new() };
    if out == Out::Json {
        print_json(&json!({"poly": p.to_string(), "hpol": h, "roots": rows}));
    } else {
        println!("h_pol = {h}");
        for r in &rows {
            println!("({})^{}: degree {}, root height {}", r.factor, r.multiplicity, r.degree, r.height);
        }
    }
    Ok(())
}

fn cmd_factor(poly: &str, cap: usize, out: Out) -> CmdResult {
    let p = univariate(poly)?;
    let fl = factor_over_q(&p, cap)?;
    if out == Out::Json {
        let factors: Vec<_> = fl
            .factors
            .iter()
            .map(|(f, m)| json!({"factor": f.to_string(), "multiplicity": m, "degree": f.degree()}))
            .collect();
        print_json(&json!({"unit": fl.unit.to_string(), "factors": factors}));
    } else {
        println!("unit: {}", fl.unit);
        for (f, m) in &fl.factors {
            println!("({f})^{m}");
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bottcher(
    d: usize,
    order: usize,
    check: bool,
    primes: &[u64],
    perturb: Option<&str>,
    cap: u64,
    out: Out,
) -> CmdResult {
    let b = compute_coeffs(d, order, cap)?;
    let coeffs: Vec<String> = b.coeffs().iter().map(ToString::to_string).collect();
    if !check {
        if out == Out::Json {
            print_json(&json!({"d": d, "order": order, "level": b.level(), "coefficients": coeffs}));
        } else {
            for (j, c) in coeffs.iter().enumerate() {
                println!("B_{j} = {c}");
            }
        }
        return Ok(());
    }
    let stab = stabilization_check(&b, cap)?;
    let checked = match perturb {
        Some(s) => b.perturbed_b0(&rational(s)?),
        None => b.clone(),
    };
    let fe = functional_equation_check(&checked)?;
    let vals = primes.iter().map(|&p| coeff_valuation_check(&b, p)).collect::<Result<Vec<_>, _>>()?;
    let gap = if d == 2 {
        (1..=3).map(|n| level_gap_check(d, n, cap)).collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    let ok = stab.holds() && fe.ok && vals.iter().all(|r| r.holds()) && gap.iter().all(|g| g.ok);
    if out == Out::Json {
        print_json(&json!({
            "d": d, "order": order, "coefficients": coeffs,
            "stabilization": stab, "functional_equation": fe, "valuations": vals, "level_gaps": gap, "ok": ok,
        }));
    } else {
        let status = |b: bool| if b { "ok" } else { "VIOLATED" };
        println!("stabilization across levels: {}", status(stab.holds()));
        println!(
            "functional equation through order {}: {} (residual zero through {})",
            fe.certified_order,
            status(fe.ok),
            fe.zero_through
        );
        for r in &vals {
            println!("coefficient valuations at p = {}: {}", r.p, status(r.holds()));
        }
        for g in &gap {
            println!("nu(F_{} - F_{}) = {} >= {}: {}", g.n + 1, g.n, g.nu, g.required, status(g.ok));
        }
    }
    violation_if(!ok)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bottcher_eval(d: usize, order: usize, p: u64, z: &str, a: &[String], residual: bool, out: Out) -> CmdResult {
    let z = rational(z)?;
    let avec = a.iter().map(|s| rational(s)).collect::<Result<Vec<_>, _>>()?;
    let b = compute_coeffs(d, order, DEFAULT_GENERIC_CAP)?;
    let r = eval_padic(&b, &z, &avec, p)?;
    let res = if residual { Some(functional_equation_residual(&b, &z, &avec, p)?) } else { None };
    let value_valuation = heightlab_core::exact_arith::vp(&r.partial_sum, p)?;
    if out == Out::Json {
        print_json(&json!({"eval": r, "valuation": value_valuation, "residual": res}));
    } else {
        println!("partial sum: {}", r.partial_sum);
        println!("valuation: {value_valuation}");
        println!("tail valuation >= {}", r.tail_bound);
        if let Some(res) = &res {
            println!(
                "residual valuation {} >= {}: {}",
                res.residual_valuation,
                res.bound,
                if res.ok { "ok" } else { "VIOLATED" }
            );
        }
    }
    violation_if(res.is_some_and(|r| !r.ok))
}

fn emit_scenario(res: &ScenarioResult, args: &ScenarioArgs) -> CmdResult {
    match args.out {
        Out::Json => println!("{}", render_json(res, args.precision)?),
        Out::Csv | Out::Text => print!("{}", render_csv(res, args.precision)?),
    }
    for w in &res.warnings {
        eprintln!("warning: {w}");
    }
    for v in &res.verdicts {
        eprintln!("{}: {} ({})", if v.ok { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    violation_if(!res.ok())
}

fn cmd_scenario(cmd: &ScenarioCmd) -> CmdResult {
    match cmd {
        ScenarioCmd::Quadratic { a, b, common } => {
            let res = scenario_quadratic(&rational(a)?, &rational(b)?, &common.options())?;
            emit_scenario(&res, common)
        }
        ScenarioCmd::Prop52 { common } => emit_scenario(&scenario_prop52(&common.options())?, common),
        ScenarioCmd::Example15 { common } => emit_scenario(&scenario_example15(&common.options())?, common),
        ScenarioCmd::Counterexample { max_m, common } => {
            let opts = ScenarioOptions { max_m: *max_m, ..common.options() };
            emit_scenario(&scenario_counterexample(&opts)?, common)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify_all(
    only: &[u8],
    skip: &[u8],
    perturb: Option<&str>,
    seed: u64,
    counterexample_max: u32,
    parallel: bool,
    out: Out,
) -> CmdResult {
    if let Some(bad) = only.iter().chain(skip).find(|id| !SUITES.iter().any(|s| s.0 == **id)) {
        return Err(Error::InvalidArgument(format!("no suite {bad}")).into());
    }
    let mut selected: BTreeSet<u8> =
        if only.is_empty() { SUITES.iter().map(|s| s.0).collect() } else { only.iter().copied().collect() };
    for id in skip {
        selected.remove(id);
    }
    let cfg = VerifyConfig {
        seed,
        only: Some(selected),
        perturb_b0: perturb.map(rational).transpose()?,
        parallel,
        counterexample_max,
        ..VerifyConfig::default()
    };
    let report = verify_all(&cfg);
    if out == Out::Json {
        print_json(&json!({"suites": report.suites, "ok": report.ok()}));
    } else {
        for s in &report.suites {
            println!(
                "suite {:>2} {}: {} {}/{} ({:.1}s)",
                s.id,
                s.name,
                if s.ok() { "PASS" } else { "FAIL" },
                s.passed,
                s.checks,
                s.seconds
            );
            for n in &s.notes {
                println!("    note: {n}");
            }
            for f in &s.failures {
                println!("    failure: {f}");
            }
        }
    }
    violation_if(!report.ok())
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.cmd {
        Cmd::Iterate { family, point, steps, cap, out } => cmd_iterate(family, point, *steps, *cap, *out),
        Cmd::Generic { d, n, cap, show, profile, primes, out } => {
            cmd_generic(*d, *n, *cap, *show, *profile, primes, *out)
        }
        Cmd::Heights { poly, cap, out } => cmd_heights(poly, *cap, *out),
        Cmd::Factor { poly, cap, out } => cmd_factor(poly, *cap, *out),
        Cmd::Eisenstein { poly, p } => {
            println!("{}", eisenstein(&univariate(poly)?, *p)?);
            Ok(())
        }
        Cmd::Bottcher { d, order, check, primes, perturb_b0, cap, out } => {
            cmd_bottcher(*d, *order, *check, primes, perturb_b0.as_deref(), *cap, *out)
        }
        Cmd::BottcherEval { d, order, p, z, a, residual, out } => {
            cmd_bottcher_eval(*d, *order, *p, z, a, *residual, *out)
        }
        Cmd::Scenario(s) => cmd_scenario(s),
        Cmd::VerifyAll { only, skip, perturb_b0, seed, counterexample_max, parallel, out } => {
            cmd_verify_all(only, skip, perturb_b0.as_deref(), *seed, *counterexample_max, *parallel, *out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(EXIT_VIOLATION),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::ResourceCap { .. } => EXIT_CAP,
                Error::NotDivisible(_) => EXIT_VIOLATION,
                _ => EXIT_USAGE,
            })
        }
    }
}
