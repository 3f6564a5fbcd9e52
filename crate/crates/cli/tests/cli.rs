use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

const REFERENCE_TREE: &str = "((1:1,6:1):0.25,((2:1,3:1):0.3,(4:1,5:1):0.45));";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bhvkit"))
        .args(args)
        .env_remove("BHVKIT_CAP")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn link_reports_petersen_counts() {
    let out = run(&["link", "5", "--json", "-"]);
    assert!(out.status.success());
    let r = &json(&out)[0];
    assert_eq!(r["vertices"], 10);
    assert_eq!(r["edges"], 15);
    assert_eq!(r["degrees_ok"], true);

    let r = &json(&run(&["link", "6"]))[0];
    assert_eq!(r["vertices"], 25);
    assert_eq!(run(&["link", "13"]).status.code(), Some(2));
}

#[test]
fn link_writes_dot_and_json_files() {
    let dir = std::env::temp_dir().join(format!("bhvkit-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let dot = dir.join("l5.dot");
    let report = dir.join("l5.json");
    let out = run(&[
        "link",
        "5",
        "--dot",
        dot.to_str().unwrap(),
        "--json",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(fs::read_to_string(&dot).unwrap().starts_with("graph"));
    let v: Value = serde_json::from_str(fs::read_to_string(&report).unwrap().trim()).unwrap();
    assert_eq!(v["edges"], 15);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn aut_orders() {
    let r = &json(&run(&["aut", "5"]))[0];
    assert_eq!(r["order"], 120);
    assert_eq!(r["realized"], true);
    let r = &json(&run(&["aut", "6"]))[0];
    assert_eq!(r["order"], 720);
    assert_eq!(r["order_is_n_factorial"], true);

    let out = run(&["aut", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("order 3! = 6"));
    assert_eq!(run(&["aut", "8"]).status.code(), Some(2));
}

#[test]
fn volume_reports() {
    let r = &json(&run(&["volume", REFERENCE_TREE, "--eps", "0.1"]))[0];
    assert_eq!(r["p"], 3);
    assert_eq!(r["s_F"], 1);
    assert_eq!(r["is_binary"], true);
    assert_eq!(r["mu"], r["lower"]);

    let r = &json(&run(&["volume", "(1,2,3,4,5,6);", "--eps", "1"]))[0];
    assert_eq!(r["s_F"], 105);
    assert_eq!(r["is_cone_point"], true);
    let a3 = 4.0 * std::f64::consts::PI / 3.0;
    let mu = r["mu"].as_f64().unwrap();
    assert!((mu - 105.0 / 8.0 * a3).abs() < 1e-12 * mu);
}

#[test]
fn volume_rejects_large_epsilon() {
    let out = run(&["volume", REFERENCE_TREE, "--eps", "0.3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0.25"));
}

#[test]
fn volume_reads_tree_files() {
    let path = std::env::temp_dir().join(format!("bhvkit-trees-{}.nwk", std::process::id()));
    fs::write(
        &path,
        format!("# two trees\n{REFERENCE_TREE}\n\n(1,2,3,4,5,6);\n"),
    )
    .unwrap();
    let out = run(&["volume", path.to_str().unwrap(), "--eps", "0.01"]);
    fs::remove_file(&path).unwrap();
    assert!(out.status.success());
    let rows = json(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["p"], 0);
}

#[test]
fn count_and_oracle() {
    assert_eq!(json(&run(&["count", "8"]))[0]["count"], 10395);
    let r = &json(&run(&["count", "6", "--refine", "[[1,2]]"]))[0];
    assert_eq!(r["count"], 15);
    let r = &json(&run(&["count", "6", "--refine", "[[1,2]]", "--oracle"]))[0];
    assert_eq!(r["oracle_ok"], true);
    let r = &json(&run(&["count", "7", "--random-faces", "10", "--seed", "1"]))[0];
    assert_eq!(r["random_faces_ok"], true);
    assert_eq!(
        run(&["count", "6", "--refine", "[[1,2],[1,3]]"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn count_cap_applies_to_enumeration() {
    assert_eq!(
        run(&["count", "8", "--oracle", "--cap", "100"])
            .status
            .code(),
        Some(2)
    );
    let out = Command::new(env!("CARGO_BIN_EXE_bhvkit"))
        .args(["count", "8", "--oracle"])
        .env("BHVKIT_CAP", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(run(&["count", "8", "--cap", "100"]).status.success());
}

#[test]
fn dist_bounds() {
    let a = "((1,2):0.5,3,(4,5):0.3);";
    let r = &json(&run(&["dist", a, a]))[0];
    assert_eq!(r["upper_bound"], 0.0);

    let b = "((1,2):0.5,3,(4,5):0.8);";
    let r = &json(&run(&["dist", a, b]))[0];
    assert!((r["upper_bound"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let x = "((1,2):1,3,4,5);";
    let y = "((1,3):1,2,4,5);";
    let r = &json(&run(&["dist", x, y]))[0];
    assert_eq!(r["same_orthant"], Value::Null);
    assert_eq!(r["cone_path"], 2.0);

    assert_eq!(run(&["dist", a, "(1,2,3,4);"]).status.code(), Some(4));
}

#[test]
fn parse_prints_json_and_newick() {
    let out = run(&["parse", REFERENCE_TREE, "--newick"]);
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "(1:1,((2:1,3:1):0.3,(4:1,5:1):0.45):0.25,6:1);"
    );
    let r = &json(&run(&["parse", REFERENCE_TREE]))[0];
    assert_eq!(r["n"], 6);
    assert_eq!(r["edges"].as_array().unwrap().len(), 3);
    assert_eq!(run(&["parse", "((1,2),3;"]).status.code(), Some(1));
}

#[test]
fn labels_file_maps_names() {
    let path = std::env::temp_dir().join(format!("bhvkit-labels-{}.json", std::process::id()));
    fs::write(&path, r#"{"human":1,"chimp":2,"gorilla":3,"orang":4}"#).unwrap();
    let out = run(&[
        "parse",
        "((human,chimp):0.5,gorilla,orang);",
        "--labels",
        path.to_str().unwrap(),
    ]);
    fs::remove_file(&path).unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(json(&out)[0]["edges"][0]["side"], serde_json::json!([1, 2]));
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["aut", "6"],
        vec!["volume", REFERENCE_TREE, "--eps", "0.2"],
        vec!["count", "7", "--random-faces", "5", "--seed", "9"],
    ] {
        assert_eq!(run(&args).stdout, run(&args).stdout);
    }
}
