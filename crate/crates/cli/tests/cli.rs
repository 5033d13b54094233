use std::process::{Command, Output};

fn kramers(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kramers"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows of a CSV, provenance comments and header stripped.
fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn classical_slip_coefficient() {
    let o = kramers(&["slip", "--alpha", "-20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("alpha,v1_bose,kv_bose"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 1);
    assert!((rows[0][1] - 1.0162).abs() < 1e-3);
    assert!((rows[0][2] - 1.1466).abs() < 2e-3);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["slip", "--alpha-range", "-1:-4:0.5"],
        vec!["profile", "--x1-range", "0:1:0"],
        vec!["figure", "3"],
        vec!["figure", "7"],
        vec!["slip", "--tol", "-1"],
        vec!["bogus"],
    ] {
        let o = kramers(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn out_of_window_alpha_is_a_domain_error() {
    let o = kramers(&["wall", "--alpha-range", "-1:1:1"]);
    assert_eq!(o.status.code(), Some(2));
    // The valid row is still written.
    assert_eq!(csv_rows(&stdout(&o)).len(), 1);
    assert!(stderr(&o).contains("skipped"));
}

#[test]
fn wall_json_schema() {
    let o = kramers(&[
        "wall", "--alpha", "-20", "--stat", "both", "--format", "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["figure_id", "columns", "rows", "provenance"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let cols: Vec<&str> = v["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(
        cols,
        [
            "alpha",
            "cv0_bose",
            "cv0_fermi",
            "kv_star0_bose",
            "kv_star0_fermi"
        ]
    );
    let row = v["rows"][0].as_array().unwrap();
    assert!((row[1].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-5);
    assert!(v["provenance"]["version"]
        .as_str()
        .unwrap()
        .starts_with("kramers"));
}

#[test]
fn dimensional_report() {
    let base = [
        "dimensional",
        "--alpha",
        "-20",
        "--temperature",
        "300",
        "--mass",
        "6.646e-27",
    ];
    let o = kramers(
        &[
            &base[..],
            &["--collision-frequency", "1e9", "--gradient", "100"],
        ]
        .concat(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let get = |name: &str| {
        v["rows"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r[0] == name)
            .map(|r| r[2].as_f64().unwrap())
            .unwrap()
    };
    let pressure_over_nu = get("number_density") * 1.380649e-23 * 300.0 / 1e9;
    assert!((get("viscosity") / pressure_over_nu - 1.0).abs() < 1e-3);
    assert_eq!(
        get("slip_velocity"),
        get("slip_coefficient") * get("mean_free_path") * 100.0
    );

    let missing = kramers(&base);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("--collision-frequency"));
}

#[test]
fn check_detects_injected_lambda2() {
    let o = kramers(&[
        "check",
        "--alpha",
        "-1",
        "--stat",
        "bose",
        "--inject-lambda2-offset",
        "1e-3",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("factorization"));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn check_reports_unreachable_tolerance() {
    let o = kramers(&[
        "check", "--alpha", "-1", "--stat", "bose", "--tol", "1e-14", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["all_passed"], false);
    let msg = v["results"][0]["error"].as_str().unwrap();
    assert!(msg.contains("tolerance"), "{msg}");
}

#[test]
fn config_file_with_flag_override() {
    let dir = std::env::temp_dir().join(format!("kramers-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# wall sweep\nalpha_range = -3:-1:1\nstat = fermi\n").unwrap();
    let o = kramers(&["wall", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("cv0_fermi"));
    assert_eq!(csv_rows(&text).len(), 3);
    let o = kramers(&[
        "wall",
        "--config",
        cfg.to_str().unwrap(),
        "--alpha",
        "-2",
        "--stat",
        "bose",
    ]);
    let text = stdout(&o);
    assert!(text.contains("cv0_bose"));
    assert_eq!(csv_rows(&text).len(), 1);
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("kramers-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fig6.csv");
    let o = kramers(&["figure", "6", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let file = std::fs::read_to_string(&path).unwrap();
    assert_eq!(file, stdout(&kramers(&["figure", "6"])));
    let rows = csv_rows(&file);
    assert_eq!(rows.len(), 100);
    assert_eq!(rows[0].len(), 3);
}

#[test]
fn distribution_grid_and_homogeneity() {
    let one = csv_rows(&stdout(&kramers(&[
        "distribution",
        "--x1-range",
        "0:1:1",
        "--mu-range",
        "-1:1:1",
    ])));
    let two = csv_rows(&stdout(&kramers(&[
        "distribution",
        "--x1-range",
        "0:1:1",
        "--mu-range",
        "-1:1:1",
        "--gv",
        "2",
    ])));
    assert_eq!(one.len(), 6);
    for (a, b) in one.iter().zip(&two) {
        assert!((b[2] - 2.0 * a[2]).abs() < 1e-8 * a[2].abs().max(1.0));
    }
    // Diffuse wall: h(0, mu > 0) = 0.
    assert!(one[2][2].abs() < 5e-4);
}

#[test]
fn profile_approaches_asymptote_from_below() {
    let rows = csv_rows(&stdout(&kramers(&["profile", "--x1-range", "0:10:2"])));
    let mut last = f64::INFINITY;
    for r in &rows {
        let defect = r[3] - r[1];
        assert!(defect >= 0.0 && defect <= last);
        last = defect;
    }
}
