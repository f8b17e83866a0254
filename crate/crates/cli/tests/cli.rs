use std::path::Path;
use std::process::{Command, Output};

fn stratawave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stratawave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn missing_k_is_a_usage_error() {
    for cmd in ["dispersion", "expand", "branch", "flow"] {
        let o = stratawave(&[cmd, "--s", "0.01"]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("--k"));
    }
}

#[test]
fn bad_values_exit_2() {
    for args in [
        vec!["expand", "--k", "1", "--branch", "3"],
        vec!["expand", "--k", "1", "--rho", "0.5"],
        vec!["field", "--k", "1"],
        vec!["branch", "--k", "1", "--s-max", "0.01", "--ds", "0.02"],
        vec!["field", "--k", "1", "--s", "0.01", "--nx", "7"],
        vec!["expand", "--k", "1", "--config", "/nonexistent/config.json"],
        vec!["frobnicate"],
    ] {
        assert_eq!(stratawave(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bad_thread_count_exits_2() {
    let o = Command::new(env!("CARGO_BIN_EXE_stratawave"))
        .args(["expand", "--k", "1"])
        .env("STRATAWAVE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dispersion_lines_are_json() {
    let o = stratawave(&["dispersion", "--k", "4", "--omega-bar", "-0.5"]);
    assert!(o.status.success());
    let rows: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for (j, r) in rows.iter().enumerate() {
        assert_eq!(r["k"], j as u64 + 1);
        assert!(r["lambda_1"].as_f64().unwrap() < r["lambda_2"].as_f64().unwrap());
    }
}

#[test]
fn expand_reports_the_shipped_variant() {
    let o = stratawave(&["expand", "--k", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["variant"], "rho_bar_weighted");
    // with ω̄ = σ = 0 the root solves ρ̄ k coth(k) λ² = g (ρ - ρ̄); branch 1 is negative
    let lambda = v["Lambda"].as_f64().unwrap();
    let expected = -(9.8 * (2.0 - 1.0) * 1.0_f64.tanh()).sqrt();
    assert!((lambda - expected).abs() < 1e-13, "{lambda} vs {expected}");
}

#[test]
fn csv_is_deterministic_and_carries_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let common = ["field", "--k", "1", "--s", "0.02", "--nx", "16", "--ny", "9"];
    let run = |out: &Path, threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_stratawave"))
            .args(common)
            .arg("--out")
            .arg(out)
            .env("STRATAWAVE_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run(&a, "1");
    run(&b, "3");
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());

    let text = String::from_utf8(ta).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,psi,u_rel,v,layer"));
    assert_eq!(lines.count(), 2 * 16 * 9);

    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.config.json")).unwrap()).unwrap();
    assert_eq!(side["command"], "field");
    assert_eq!(side["config"]["s"], 0.02);
    assert_eq!(side["config"]["method"], "elliptic");
}

#[test]
fn asymptotic_field_columns() {
    let o = stratawave(&["field", "--k", "2", "--s", "0.01", "--method", "asymptotic", "--nx", "8", "--ny", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,psi,layer"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 8 * 5);
    // bed value ω/2 in the lower layer, zero on the interface
    let bed: f64 = rows[0][2].parse().unwrap();
    assert!((bed - 0.5).abs() < 1e-15);
    let surf: f64 = rows[4][2].parse().unwrap();
    assert_eq!(surf, 0.0);
}

#[test]
fn flow_writes_streamlines_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("flow.csv");
    let o = stratawave(&["flow", "--k", "1", "--s", "0.02", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("id,x,y\n"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("flow.csv.stagnation.json")).unwrap()).unwrap();
    assert_eq!(report["stagnation"]["points"].as_array().unwrap().len(), 3);
    assert_eq!(report["config"]["k"], 1);
    assert!(report["critical_layer_area"].as_f64().unwrap() > 0.0);
}

#[test]
fn plot_emits_svg() {
    let o = stratawave(&["plot", "--k", "1", "--s", "0.03"]);
    assert!(o.status.success());
    let svg = stdout(&o);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("stroke-dasharray") && svg.contains("<polygon"));
}

#[test]
fn numerical_failure_exits_3_with_diagnostic() {
    let o = stratawave(&["field", "--k", "1", "--s", "0.9", "--ds", "0.3"]);
    assert_eq!(o.status.code(), Some(3));
    let diag: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(diag["error"].as_str().unwrap().contains("s = 0.3"));
    assert_eq!(diag["config"]["s"], 0.9);
}

#[test]
fn verify_passes_with_defaults() {
    let o = stratawave(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["all_passed"], true);
    assert_eq!(report["criteria"].as_array().unwrap().len(), 9);
}
