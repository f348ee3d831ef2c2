use std::process::{Command, Output};

use serde_json::Value;

fn liesym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liesym")).args(args).env_remove("LIESYM_ASSUME").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let o = liesym(&all);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", stdout(&o)));
    assert_eq!(v["schemaVersion"], 1);
    (v, o.status.code().unwrap())
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(liesym(&["--help"]).status.code(), Some(0));
    assert_eq!(liesym(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(liesym(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(liesym(&["--delta", "eq99", "verify"]).status.code(), Some(1));
    assert_eq!(liesym(&["--lambda", "0", "verify"]).status.code(), Some(1));
    assert_eq!(liesym(&["reduce", "--row", "13"]).status.code(), Some(1));
    assert_eq!(liesym(&["optimal", "--coeffs", "1,2"]).status.code(), Some(1));
}

#[test]
fn symbolic_parameters_rejected_for_discovery() {
    for cmd in [&["symmetries"][..], &["nonclassical", "--degree", "0"], &["optimal", "--coeffs", "1,0,0,0,0,0,0"]] {
        let o = liesym(cmd);
        assert_eq!(o.status.code(), Some(1), "{cmd:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
}

#[test]
fn verify_golden() {
    let o = liesym(&["verify"]);
    assert_eq!(o.status.code(), Some(0));
    let expected = "\
PASS V1 = dx
PASS V2 = dy
PASS V3 = dt
PASS V4 = dh
PASS V5 = y*dx - x*dy
PASS V6 = t*dx - 1/2*x*lambda^-1*dh
PASS V7 = t*dy - 1/2*y*lambda^-1*dh
";
    assert_eq!(stdout(&o), expected);
}

#[test]
fn printed_boost_sign_fails_verification() {
    let (v, code) = json(&["--basis", "printed", "verify"]);
    assert_eq!(code, 2);
    let ok: Vec<bool> = v["results"].as_array().unwrap().iter().map(|r| r["symmetry"].as_bool().unwrap()).collect();
    assert_eq!(ok, [true, true, true, true, true, false, false]);
}

#[test]
fn verify_custom_field() {
    assert_eq!(liesym(&["verify", "--field", "1; 0; 0; 0"]).status.code(), Some(0));
    assert_eq!(liesym(&["verify", "--field", "x; y; 0; 0"]).status.code(), Some(2));
}

#[test]
fn eq11_shares_classical_algebra() {
    // both variants share the same classical algebra
    assert_eq!(liesym(&["--delta", "eq11", "verify"]).status.code(), Some(0));
}

#[test]
fn symmetries_recover_seven_generators() {
    let (v, code) = json(&["--nu", "1", "--kappa", "1", "--lambda", "1", "symmetries"]);
    assert_eq!(code, 0);
    assert_eq!(v["dimension"], 7);
    assert_eq!(v["matchesGenerators"], true);
}

#[test]
fn algebra_reports_solvable_series() {
    let (v, code) = json(&["algebra", "--table"]);
    assert_eq!(code, 0);
    assert_eq!(v["derivedDims"], serde_json::json!([7, 5, 1, 0]));
    assert_eq!(v["solvable"], true);
    assert_eq!(v["semisimple"], false);
    let text = stdout(&liesym(&["algebra"]));
    assert!(text.contains("derived series dimensions: [7, 5, 1, 0]"));
}

#[test]
fn printed_table_antisymmetry_is_flagged() {
    let (v, _) = json(&["--basis", "printed", "algebra"]);
    assert_eq!(v["printedAntisymmetryViolations"].as_array().unwrap().len(), 2);
}

#[test]
fn adjoint_checks_pass() {
    let (v, code) = json(&["adjoint"]);
    assert_eq!(code, 0);
    assert_eq!(v["matrices"].as_array().unwrap().len(), 7);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["ode"] == true && c["groupLaw"] == true));
}

#[test]
fn flow_golden() {
    let o = liesym(&["flow", "--generator", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "G6: (x, y, t, h) -> (x + t*s, y, t, -1/2*x*lambda^-1*s - 1/4*t*lambda^-1*s^2 + h)\n    h = f(x, y, t) -> h = f(x - t*s, y, t) - 1/2*x*lambda^-1*s + 1/4*t*lambda^-1*s^2\n"
    );
    assert_eq!(liesym(&["flow", "--generator", "8"]).status.code(), Some(1));
}

#[test]
fn optimal_witness_checks() {
    let (v, code) = json(&["--lambda", "2", "optimal", "--coeffs", "1,2,3,4,0,1,1"]);
    assert_eq!(code, 0);
    assert_eq!(v["witnessCheck"], true);
    let (v, _) = json(&["--lambda", "1", "optimal", "--coeffs", "0,0,0,0,3,0,0"]);
    assert_eq!(v["witnessCheck"], true);
}

#[test]
fn reduce_row5_golden() {
    let o = liesym(&["reduce", "--row", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("-1/2*nu*lambda^-1*w^-1 + nu*f_zz + kappa*f_zzzz - lambda*f_z^2 + f_w = 0\n"), "{}", stdout(&o));
}

#[test]
fn reduce_row7_reports_published_diff() {
    let (v, _) = json(&["reduce", "--row", "7"]);
    let terms: Vec<&str> = v["publishedDiff"]["mismatched"].as_array().unwrap().iter().map(|m| m["term"].as_str().unwrap()).collect();
    assert_eq!(terms, ["1", "f_wwww"]);
}

#[test]
fn reduce_custom_spec() {
    let args = ["reduce", "--z", "y", "--w", "t", "--r", "h + x^2/(4*lambda*t)", "--section", "0; z; w", "--generator", "t; 0; 0; -x/(2*lambda)"];
    let o = liesym(&args);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "-1/2*nu*lambda^-1*w^-1 + nu*f_zz + kappa*f_zzzz - lambda*f_z^2 + f_w = 0\n");
    // r not invariant under the printed sign
    let bad = ["reduce", "--z", "y", "--w", "t", "--r", "h + x^2/(4*lambda*t)", "--section", "0; z; w", "--generator", "t; 0; 0; x/(2*lambda)"];
    assert_eq!(liesym(&bad).status.code(), Some(2));
}

#[test]
fn reduce_with_concrete_parameters() {
    let o = liesym(&["--nu", "2", "--kappa", "1", "--lambda", "1", "reduce", "--row", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(!text.contains("nu") && !text.contains("kappa"), "{text}");
}

#[test]
fn nonclassical_degree1() {
    let (v, code) = json(&["--nu", "1", "--kappa", "1", "--lambda", "1", "nonclassical", "--degree", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["unknowns"], 15);
    let fams = v["families"].as_array().unwrap();
    assert!(fams.iter().all(|f| f["classification"] == "classical-equivalent"));
}

#[test]
fn discrepancies_json_has_expected_kinds() {
    let (v, code) = json(&["discrepancies"]);
    assert_eq!(code, 0);
    let kinds: Vec<&str> = v["discrepancies"].as_array().unwrap().iter().map(|d| d["kind"].as_str().unwrap()).collect();
    for k in ["antisymmetry", "commutator", "generator", "adjoint", "flow"] {
        assert!(kinds.contains(&k), "missing {k}: {kinds:?}");
    }
}

#[test]
fn assume_env_allows_division() {
    let base = ["verify", "--field", "1/x; 0; 0; 0"];
    let plain = liesym(&base);
    let o = Command::new(env!("CARGO_BIN_EXE_liesym")).args(base).env("LIESYM_ASSUME", "x").output().unwrap();
    assert_eq!(plain.status.code(), Some(1));
    assert_eq!(o.status.code(), Some(2));
}
