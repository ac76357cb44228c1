use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heightlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn quadratic_scenario_csv() {
    let o = run(&["scenario", "quadratic", "-a", "0", "-b", "1", "--max-n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,N,degree,n_factors,min_factor_deg,max_factor_deg,max_root_height,height_err_bound,hpol,hpol_over_dN,verdict"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&first[..6], ["quadratic", "2", "1", "1", "1", "1"]);
    assert!(first[6].starts_with("0.693147180559945"));
}

#[test]
fn scenario_output_is_reproducible() {
    let args = ["scenario", "quadratic", "-a", "2", "-b", "1/2", "--max-n", "4"];
    let a = run(&args);
    let mut par = args.to_vec();
    par.push("--parallel");
    let b = run(&par);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn parse_errors_exit_2() {
    let o = run(&["heights", "z^2 + x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("position 6"));
}

#[test]
fn resource_cap_exits_3() {
    assert_eq!(run(&["generic", "2", "13"]).status.code(), Some(3));
}

#[test]
fn iterate_prints_orbit() {
    let o = run(&["iterate", "z^2 + t", "t", "-n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("t^2 + t"));
}

#[test]
fn factor_json() {
    let o = run(&["factor", "t^4 - 1", "--out", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let degs: Vec<u64> = v["factors"].as_array().unwrap().iter().map(|f| f["degree"].as_u64().unwrap()).collect();
    assert_eq!(degs, [1, 1, 2]);
}

#[test]
fn bottcher_eval_domain_rejection() {
    let ok = run(&["bottcher-eval", "-d", "2", "-j", "8", "-p", "5", "-z", "1/5", "-a", "0,1"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = run(&["bottcher-eval", "-d", "2", "-j", "8", "-p", "5", "-z", "1", "-a", "0,1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("domain"));
}

#[test]
fn perturbed_bottcher_is_a_violation() {
    assert_eq!(run(&["verify-all", "--only", "6", "--perturb-b0", "1/1000"]).status.code(), Some(1));
    assert_eq!(run(&["verify-all", "--only", "6"]).status.code(), Some(0));
}

#[test]
fn verify_selected_suites() {
    let o = run(&["verify-all", "--only", "4,5,10,11", "--skip", "11", "--out", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.to_string().contains("\"passed\""));
}
