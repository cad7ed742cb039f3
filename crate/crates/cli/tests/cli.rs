use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mirror-morse"))
        .args(args)
        .env_remove("MIRROR_MORSE_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = run(&full);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_str(&stdout(&out)).unwrap()
}

fn generators(v: &Value) -> &Vec<Value> {
    v["generators"].as_array().unwrap()
}

#[test]
fn hom_lists_points_on_p1() {
    let v = json(&["hom", "--space", "P1", "--from", "0", "--to", "2"]);
    let rows: Vec<(i64, String)> = generators(&v)
        .iter()
        .map(|g| {
            (
                g["index"][0].as_i64().unwrap(),
                g["point"][0].as_str().unwrap().to_string(),
            )
        })
        .collect();
    assert_eq!(
        rows,
        vec![(0, "0".into()), (1, "1".into()), (2, "2".into())]
    );
    assert!(generators(&v).iter().all(|g| g["degree"] == 0));
}

#[test]
fn backward_hom_sits_in_top_degree() {
    let out = run(&["hom", "--space", "P1", "--from", "2", "--to", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("serre_rank=1"));
    let v = json(&["hom", "--space", "P1", "--from", "2", "--to", "0"]);
    let gens = generators(&v);
    assert_eq!(gens.len(), 1);
    assert_eq!(gens[0]["degree"], 1);

    let v = json(&["hom", "--space", "P2", "--from", "1", "--to", "0"]);
    assert!(generators(&v).is_empty());
}

#[test]
fn hom_on_a_product() {
    let v = json(&["hom", "--space", "P1xP2", "--from", "0,0", "--to", "1,1"]);
    assert_eq!(generators(&v).len(), 6);
}

#[test]
fn tables_on_exceptional_collections_have_empty_diff() {
    for (space, range) in [("P1", "0..1"), ("P2", "0..2"), ("P1xP1", "0..1,0..1")] {
        let v = json(&["table", "--space", space, "--range", range]);
        assert_eq!(v["diff"]["empty"], true, "{}", space);
        let products = v["morse"]["products"].as_array().unwrap();
        assert!(!products.is_empty());
        assert_eq!(
            products.len(),
            v["dg"]["products"].as_array().unwrap().len()
        );
        if space == "P1xP1" {
            assert!(products.iter().all(|p| p["case"].is_string()));
        }
    }
}

#[test]
fn table_warns_outside_the_exceptional_range() {
    let out = run(&["table", "--space", "P1", "--range", "0..3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not strongly exceptional"));
}

#[test]
fn table_writes_files_into_a_directory() {
    let dir = std::env::temp_dir().join(format!("mirror-morse-table-{}", std::process::id()));
    let d = dir.to_str().unwrap();
    let out = run(&[
        "--format", "csv", "--out", d, "table", "--space", "P1", "--range", "0..1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    for f in ["morse.csv", "dg.csv", "diff.json"] {
        assert!(dir.join(f).exists(), "{}", f);
    }
    assert_eq!(
        std::fs::read(dir.join("morse.csv")).unwrap(),
        std::fs::read(dir.join("dg.csv")).unwrap()
    );
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn compose_reports_weights_and_case() {
    let v = json(&[
        "compose", "--space", "P1", "--triple", "0,2,3", "--left", "1", "--right", "1",
    ]);
    let p = &v["products"][0];
    assert_eq!(p["result"][0], 2);
    assert_eq!(p["weight"]["factors"]["2"], "2");
    assert_eq!(p["weight"]["factors"]["3"], "-3/2");

    let v = json(&["compose", "--space", "P1xP1", "--triple", "0:0,1:0,1:1"]);
    assert_eq!(v["case"], "(2')");
    assert_eq!(v["products"].as_array().unwrap().len(), 4);
}

#[test]
fn plots_are_svg() {
    let out = run(&["plot", "--space", "P2", "--triple", "0,1,2"]);
    assert_eq!(out.status.code(), Some(0));
    let svg = stdout(&out);
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<circle").count(), 12);

    let out = run(&["plot", "--space", "P1x", "P1", "--triple", "0:0,1:0,1:1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("<polyline"));
}

#[test]
fn usage_errors_exit_with_two() {
    let cases: &[&[&str]] = &[
        &["hom", "--space", "Q3", "--from", "0", "--to", "1"],
        &["hom", "--space", "P1", "--from", "0,1", "--to", "2"],
        &["plot", "--space", "P3", "--triple", "0,1,2"],
        &["verify", "--suite", "all", "--n-max", "0"],
        &["table", "--space", "P2", "--range", "2..1"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{:?}", args);
        assert!(!out.stderr.is_empty());
    }
    let out = Command::new(env!("CARGO_BIN_EXE_mirror-morse"))
        .args(["hom", "--space", "P1", "--from", "0", "--to", "1"])
        .env("MIRROR_MORSE_PRECISION", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn precision_controls_decimal_digits() {
    let wide = Command::new(env!("CARGO_BIN_EXE_mirror-morse"))
        .args([
            "--format", "json", "compose", "--space", "P1", "--triple", "0,2,3", "--left", "1",
            "--right", "1",
        ])
        .env("MIRROR_MORSE_PRECISION", "128")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&wide.stdout).unwrap();
    let approx = v["products"][0]["weight"]["approx"].as_str().unwrap();
    assert!(
        approx.starts_with("0.76980035891950101934553170733594"),
        "{}",
        approx
    );
}

#[test]
fn verify_small_suite_passes() {
    let out = run(&["verify", "--suite", "all", "--n-max", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).ends_with("all checks passed\n"));
}
