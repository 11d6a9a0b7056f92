use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn conereg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conereg"))
        .args(args)
        .env("CONEREG_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn exponent_examples() {
    let out = conereg(&["exponent", "--link", "circle:12.566", "--n", "2", "--p", "inf"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["nu1"].as_f64().unwrap() - 0.5).abs() < 1e-4);
    assert!((v["mu"].as_f64().unwrap() - 0.5).abs() < 1e-4);
    assert_eq!(v["regime"], "Holder_nu");

    let v = json(&conereg(&["exponent", "--link", "sphere:2", "--n", "3", "--p", "inf"]));
    assert_eq!(v["nu1"], 1.0);
    assert_eq!(v["regime"], "LogLipschitz");

    let v = json(&conereg(&["exponent", "--link", "circle:6.2832", "--n", "2", "--p", "2"]));
    assert!((v["mu"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["regime"], "Holder_mu");
}

#[test]
fn subcritical_p_and_bad_links_are_errors() {
    let out = conereg(&["exponent", "--link", "circle:6.2832", "--n", "2", "--p", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n/2"));
    let out = conereg(&["exponent", "--link", "torus:1", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = conereg(&["exponent", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_and_suspension() {
    let v = json(&conereg(&["spectrum", "--link", "sphere:2", "--n", "3", "--count", "4"]));
    assert_eq!(v["levels"][1]["multiplicity"], 3);
    assert_eq!(v["levels"][1]["lambda"], 2.0);
    let out = conereg(&["suspension-check", "--link", "circle:12.566370614359172", "--n", "2", "--k", "1,2"]);
    assert!(out.status.success());
    for row in json(&out).as_array().unwrap() {
        assert!(row["check"]["gap"].as_f64().unwrap() < 1e-3);
    }
}

#[test]
fn verify_is_deterministic_and_exit_code_tracks_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "scene.json",
        r#"{"link": {"kind": "circle", "circumference": 12.566370614359172}, "n": 2, "rho": 1.0, "modes": 6}"#,
    );
    let cfg = write(
        dir.path(),
        "verify.json",
        r#"{"scene": "scene.json", "verify": {"suspension": false, "holder_fit": false}, "seed": 3}"#,
    );
    let a = conereg(&["verify", "--config", &cfg]);
    let b = conereg(&["verify", "--config", &cfg]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["pass"], true);
    assert!(v["holder_fit"].is_null());

    let strict = write(
        dir.path(),
        "strict.json",
        r#"{"scene": "scene.json", "verify": {"suspension": false, "holder_fit": false, "monotonicity": false},
            "tolerances": {"dtn_relative": 1e-12}}"#,
    );
    let out = conereg(&["verify", "--config", &strict]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["dtn"]["pass"], false);

    let missing = write(dir.path(), "missing.json", r#"{"scene": "nope.json"}"#);
    assert_eq!(conereg(&["verify", "--config", &missing]).status.code(), Some(2));
}

#[test]
fn solve_and_monotonicity_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("field.csv");
    let profile = dir.path().join("profile.csv");
    let common = [
        "--link", "circle:12.566370614359172", "--n", "2", "--modes", "4", "--potential", "lorentzian:-1:0.5",
        "--p", "inf", "--trace", "1,0.5",
    ];
    let mut args = vec!["solve"];
    args.extend(common);
    args.extend(["--field-csv", field.to_str().unwrap()]);
    let out = conereg(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&field).unwrap().starts_with("r,mode,value"));

    let mut args = vec!["monotonicity"];
    args.extend(common);
    args.extend(["--profile-csv", profile.to_str().unwrap()]);
    let out = conereg(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let c = json(&out)["monotonicity"]["c_fitted"].as_f64().unwrap();
    assert!(c.is_finite() && c >= 0.0);
    assert!(std::fs::read_to_string(&profile).unwrap().starts_with("rho,E0,Eg,phi"));
}

#[test]
fn holder_fit_on_csv_graph() {
    let dir = tempfile::tempdir().unwrap();
    let g = conereg::morrey::square_grid(81, 0.025).unwrap();
    let (v, e, f) = (dir.path().join("v.csv"), dir.path().join("e.csv"), dir.path().join("f.csv"));
    g.write_csv(&v, &e).unwrap();
    let coords = g.coords().unwrap();
    let field: Vec<f64> = coords.iter().map(|c| c[0] + 0.5 * c[1]).collect();
    conereg::morrey::write_field_csv(&f, &field).unwrap();
    let center = (40 * 81 + 40).to_string();
    let out = conereg(&[
        "holder-fit", "--vertices", v.to_str().unwrap(), "--edges", e.to_str().unwrap(), "--field",
        f.to_str().unwrap(), "--centers", &center, "--r-min", "0.08", "--r-max", "0.8",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fit = &json(&out)["report"]["fit"];
    assert_eq!(fit["regime"], "log_corrected");
    assert_eq!(fit["alpha_hat"], 1.0);
}
