use num_complex::Complex64;
use okl_core::cli_io::output::strip_timestamp;
use okl_core::cli_io::{CliError, RunConfig};
use okl_core::kernel_lab::GroupFunctionSpec;
use proptest::prelude::*;
use std::process::{Command, Output};

fn okl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_okl")).args(args).env("OKL_THREADS", "1").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV result after the column line.
fn csv_rows(text: &str, columns: &str) -> Vec<Vec<f64>> {
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    assert_eq!(lines.next(), Some(columns));
    lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

fn tmp(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("okl-cli-{}-{name}", std::process::id()))
}

#[test]
fn semigroup_grid_csv() {
    let o = okl(&["semigroup", "--tau", "1.0", "--x", "0,0.8", "--grid", "default"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert_eq!(header.iter().filter(|l| l.starts_with("# timestamp:")).count(), 1);
    assert!(header.iter().any(|l| l.starts_with("# config_sha256: ")));
    assert!(header.iter().any(|l| l.starts_with("# tool: okl-core")));
    let rows = csv_rows(&text, "n1,t1,re,im,err_estimate");
    assert_eq!(rows.len(), 128 * 128);
    assert!(rows.iter().flatten().all(|v| v.is_finite()));
    let first = text.lines().find(|l| !l.starts_with('#') && !l.starts_with('n')).unwrap();
    let mantissa = first.split(',').next().unwrap().split('e').next().unwrap().trim_start_matches('-').replace('.', "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn resolvent_grid_csv() {
    let o = okl(&["resolvent", "--alpha", "1", "--lambda", "4+0i"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o), "n1,t1,re,im,err_estimate");
    assert_eq!(rows.len(), 16 * 16);
    assert!(rows.iter().all(|r| r[2] > 0.0 && r[3].abs() < 1e-12 && r[4] >= 0.0));
}

#[test]
fn group_resolvent_csv_and_divergent_tail() {
    let o = okl(&["group-resolvent", "--alpha", "1", "--lambda", "4+0i", "--points", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o), "r,re,im,err_estimate");
    assert_eq!(rows.len(), 5);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
    let o = okl(&["group-resolvent", "--alpha", "1", "--lambda=-1+0i"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("DIVERGENT_TAIL"));
}

#[test]
fn usage_and_config_errors_exit_two() {
    assert_eq!(okl(&["semigroup", "--x", "0,0.8", "--grid", "default"]).status.code(), Some(2));
    assert_eq!(okl(&["structure", "--group", "sl4"]).status.code(), Some(2));
    assert_eq!(okl(&["act", "--g", "1,1;0", "--x", "0,1"]).status.code(), Some(2));
    assert_eq!(okl(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(okl(&["chi", "--g", "e", "--x", "0,1", "--chart", "s7"]).status.code(), Some(2));
    let path = tmp("bad.json");
    std::fs::write(&path, r#"{"group": "sl2", "colour": "blue"}"#).unwrap();
    let o = okl(&["structure", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    std::fs::remove_file(path).ok();
}

#[test]
fn structure_sl3() {
    let o = okl(&["structure", "--group", "sl3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let d = &v["data"];
    assert_eq!(d["structure"]["rank"], 2);
    assert_eq!(d["structure"]["k_dim"], 3);
    assert_eq!(d["structure"]["roots"].as_array().unwrap().len(), 6);
    assert_eq!(d["weyl"]["elements"].as_array().unwrap().len(), 6);
}

#[test]
fn vf_and_gamma_emit_one_record_per_point() {
    let o = okl(&["vf", "--y", "0,1;0,0", "--g", "e", "--x", "0.2,0.7", "--x", "-0.1,0.5", "--x", "0,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let recs = v["data"].as_array().unwrap();
    assert_eq!(recs.len(), 3);
    assert_eq!(recs[2]["result"]["field"]["dt"][0].as_f64(), Some(0.0));

    let o = okl(&["gamma", "--g", "e", "--x", "0,1", "--x", "0.3,0.6"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let e = &v["data"][0]["result"]["entries"];
    assert!((e[0][0].as_f64().unwrap() + 1.0).abs() < 1e-6 && (e[1][1].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(v["data"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_structure_and_failed_invariant() {
    let path = tmp("verify.json");
    let o = okl(&["verify", "--suite", "structure", "--group", "sl3", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["data"]["pass"], true);
    assert!(String::from_utf8_lossy(&o.stderr).contains("PASS structure.weyl_order"));

    let mut cfg = RunConfig::default();
    cfg.group = "sl3".into();
    cfg.tolerances.structure = 1e-300;
    let cpath = tmp("strict.json");
    std::fs::write(&cpath, cfg.to_json()).unwrap();
    let o = okl(&["verify", "--suite", "structure", "--config", cpath.to_str().unwrap(), "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL structure.bracket_relations"));
    std::fs::remove_file(path).ok();
    std::fs::remove_file(cpath).ok();
}

#[test]
fn json_output_is_reproducible_without_timestamp() {
    let a = okl(&["act", "--g", "1,1;0,1", "--x", "0.2,0.7", "--format", "json"]);
    let b = okl(&["act", "--g", "1,1;0,1", "--x", "0.2,0.7", "--format", "json"]);
    assert_eq!(strip_timestamp(&stdout(&a)), strip_timestamp(&stdout(&b)));
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["meta"]["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn config_rejects_unknown_nested_keys() {
    let mut v: serde_json::Value = serde_json::from_str(&RunConfig::default().to_json()).unwrap();
    v["grid"]["extra"] = serde_json::json!(1);
    assert!(matches!(RunConfig::from_json(&v.to_string()), Err(CliError::Config(_))));
}

fn positive() -> impl Strategy<Value = f64> {
    (1e-6f64..1e3).prop_map(|v| v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn config_round_trips(
        sl3 in any::<bool>(),
        n_box in positive(), t_box in positive(), v_radius in positive(),
        xi_max in positive(), dxi in positive(),
        n_rho in 1usize..200, cutoff_inner in 0.0f64..0.99,
        tol in positive(), seed in any::<u64>(),
        op in 0usize..4, tau in positive(), re in 0.0f64..100.0, im in -10.0f64..10.0,
        omega in prop::option::of(0.0f64..5.0),
    ) {
        let mut c = RunConfig::default();
        c.group = if sl3 { "sl3".into() } else { "sl2".into() };
        c.boxes.n_box = n_box;
        c.boxes.t_box = t_box;
        c.boxes.v_radius = v_radius;
        c.grid.xi_max = xi_max;
        c.grid.dxi = dxi;
        c.quadrature.n_rho = n_rho;
        c.quadrature.cutoff_inner = cutoff_inner;
        c.quadrature.omega_est = omega;
        c.tolerances.cross_sign = tol;
        c.seed = seed;
        c.operator = match op {
            0 => None,
            1 => Some(GroupFunctionSpec::heat(tau)),
            2 => Some(GroupFunctionSpec::bump(tau)),
            _ => Some(GroupFunctionSpec::resolvent(1.0 + tau, Complex64::new(re, im))),
        };
        let back = RunConfig::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.hash(), c.hash());
    }
}
