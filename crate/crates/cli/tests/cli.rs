use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn symmlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symmlab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

/// `vertices V edges E total_measure M` summary line.
fn counts(o: &Output) -> (usize, usize, f64) {
    let s = String::from_utf8_lossy(&o.stdout);
    let t: Vec<&str> = s.split_whitespace().collect();
    (
        t[1].parse().unwrap(),
        t[3].parse().unwrap(),
        t[5].parse().unwrap(),
    )
}

#[test]
fn mesh_generators() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = symmlab(
        d,
        &[
            "mesh",
            "--gen",
            "icosphere",
            "--level",
            "3",
            "-o",
            "s2.mesh",
        ],
    );
    assert_eq!(code(&o), 0);
    let (_, _, total) = counts(&o);
    assert!((total - 4.0 * PI).abs() < 1e-9);

    let o = symmlab(
        d,
        &[
            "mesh",
            "--gen",
            "circle",
            "--length",
            "6.2831853",
            "--n",
            "256",
            "-o",
            "s1.mesh",
        ],
    );
    assert_eq!(counts(&o).0, 256);

    let o = symmlab(
        d,
        &[
            "mesh", "--gen", "product", "--base", "s1.mesh", "--fiber", "s2.mesh", "--rho",
            "const:1", "-o", "p.mesh",
        ],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(counts(&o).0, 256 * 642);

    let o = symmlab(
        d,
        &[
            "mesh", "--gen", "radial", "--target", "euclid", "--bins", "64", "-o", "r.mesh",
        ],
    );
    assert!((counts(&o).2 - PI).abs() < 1e-9);

    // The config is echoed as a comment line.
    let text = fs::read_to_string(d.join("s2.mesh")).unwrap();
    assert!(text.starts_with("# symmlab mesh {\"gen\":\"icosphere\",\"level\":3"));

    assert_eq!(code(&symmlab(d, &["mesh", "--gen", "torus"])), 2);
    assert_eq!(
        code(&symmlab(d, &["mesh", "--gen", "circle", "--n", "2"])),
        2
    );
    assert_eq!(
        code(&symmlab(
            d,
            &["mesh", "--gen", "product", "--base", "s1.mesh"]
        )),
        2
    );
    assert_eq!(
        code(&symmlab(
            d,
            &[
                "mesh", "--gen", "product", "--base", "s1.mesh", "--fiber", "s2.mesh", "--rho",
                "sin:2"
            ]
        )),
        2
    );
}

#[test]
fn eig_results_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    symmlab(
        d,
        &[
            "mesh",
            "--gen",
            "icosphere",
            "--level",
            "4",
            "-o",
            "s2.mesh",
        ],
    );
    let o = symmlab(d, &["eig", "s2.mesh", "--field-out", "f.csv"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert!((v["lambda1"].as_f64().unwrap() - 2.0).abs() < 0.04, "{v}");
    assert_eq!(
        fs::read_to_string(d.join("f.csv")).unwrap().lines().count(),
        2562
    );

    symmlab(
        d,
        &[
            "mesh",
            "--gen",
            "disc",
            "--spacing",
            "0.02",
            "-o",
            "disc.mesh",
        ],
    );
    let v = json(&symmlab(d, &["eig", "disc.mesh", "--dirichlet"]));
    assert!(
        (v["lambda1"].as_f64().unwrap() / 5.7832 - 1.0).abs() < 0.01,
        "{v}"
    );

    fs::write(
        d.join("two.mesh"),
        "dim 1 | vertices 4 | edges 2\nv 1 0\nv 1 0\nv 1 0\nv 1 0\ne 0 1 1\ne 2 3 1\n",
    )
    .unwrap();
    let o = symmlab(d, &["eig", "two.mesh"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("topology"));

    assert_eq!(code(&symmlab(d, &["eig", "missing.mesh"])), 2);
    fs::write(d.join("bad.mesh"), "dim 1 | vertices 1\n").unwrap();
    assert_eq!(code(&symmlab(d, &["eig", "bad.mesh"])), 2);
}

#[test]
fn rearrange_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    symmlab(
        d,
        &[
            "mesh",
            "--gen",
            "icosphere",
            "--level",
            "3",
            "-o",
            "s2.mesh",
        ],
    );
    fs::write(d.join("one.csv"), "1\n".repeat(642)).unwrap();
    let o = symmlab(d, &["rearrange", "s2.mesh", "one.csv", "-o", "p.csv"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(
        (v["lhs"].as_f64(), v["rhs"].as_f64()),
        (Some(0.0), Some(0.0))
    );
    assert_eq!(v["layers"], 1);
    let csv = fs::read_to_string(d.join("p.csv")).unwrap();
    // Header, the anchor at measure 0 and the single layer.
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3, "{csv}");
    let last: Vec<f64> = rows[2].split(',').map(|t| t.parse().unwrap()).collect();
    assert!(
        (last[0] - 4.0 * PI).abs() < 1e-12 && last[1] == 1.0 && (last[2] - PI).abs() < 1e-12,
        "{csv}"
    );

    // The first eigenfield is its own equality case.
    symmlab(d, &["eig", "s2.mesh", "--field-out", "f.csv"]);
    let v = json(&symmlab(
        d,
        &["rearrange", "s2.mesh", "f.csv", "-o", "p.csv"],
    ));
    let (lhs, rhs) = (v["lhs"].as_f64().unwrap(), v["rhs"].as_f64().unwrap());
    assert!((lhs / rhs - 1.0).abs() < 0.02, "{v}");
    assert!(v["measure_residual"].as_f64().unwrap() < 1e-12);

    fs::write(d.join("short.csv"), "1\n2\n").unwrap();
    assert_eq!(code(&symmlab(d, &["rearrange", "s2.mesh", "short.csv"])), 2);
}

#[test]
fn compare_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = symmlab(d, &["compare", "--theorem", "reference"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["diagnostics"]["table"].as_array().unwrap().len(), 4);

    let o = symmlab(
        d,
        &[
            "compare",
            "--theorem",
            "product",
            "--base-len",
            "6.2831853",
            "--base-n",
            "64",
            "--level",
            "2",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));

    let o = symmlab(
        d,
        &[
            "compare",
            "--theorem",
            "lichnerowicz",
            "--level",
            "3",
            "--slack",
            "0.0001",
        ],
    );
    assert_eq!(code(&o), 4);
    assert_eq!(json(&o)["pass"], false);

    assert_eq!(code(&symmlab(d, &["compare", "--theorem", "fermat"])), 2);
    assert_eq!(
        code(&symmlab(d, &["compare", "--theorem", "hyperbolic-domain"])),
        2
    );
    assert_eq!(
        code(&symmlab(
            d,
            &["compare", "--theorem", "faber-krahn", "--preset", "square"]
        )),
        2
    );

    let o = symmlab(
        d,
        &[
            "compare",
            "--theorem",
            "hyperbolic-domain",
            "--experimental",
            "--spacing",
            "0.1",
            "--base-n",
            "8",
            "--bins",
            "64",
        ],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["asserted"], false);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("c.json"),
        r#"{"compare": {"theorem": "lichnerowicz", "level": 2, "slack": 0.0001}}"#,
    )
    .unwrap();
    let o = symmlab(d, &["--config", "c.json", "compare"]);
    assert_eq!(code(&o), 4);
    let v = json(&o);
    assert_eq!(v["diagnostics"]["config"]["level"], 2);
    let o = symmlab(d, &["--config", "c.json", "compare", "--slack", "0.1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["slack"].as_f64(), Some(0.1));

    fs::write(d.join("typo.json"), r#"{"levl": 2}"#).unwrap();
    assert_eq!(code(&symmlab(d, &["--config", "typo.json", "suite"])), 2);
    assert_eq!(code(&symmlab(d, &["--config", "nothere.json", "suite"])), 2);
}

#[test]
fn quick_suite_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let a = symmlab(d, &["suite", "--level", "2", "--out", "a"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let b = Command::new(env!("CARGO_BIN_EXE_symmlab"))
        .current_dir(d)
        .env("SYMMLAB_THREADS", "1")
        .args(["suite", "--level", "2", "--out", "b"])
        .output()
        .unwrap();
    assert_eq!(code(&b), 0);
    assert_eq!(a.stdout, b.stdout);
    let summary = fs::read_to_string(d.join("a/summary.csv")).unwrap();
    assert!(summary.starts_with("theorem_id,lhs,rhs,margin,slack,asserted,pass,verdict\n"));
    for line in summary.lines().skip(1) {
        let id = line.split(',').next().unwrap();
        let ja = fs::read(d.join(format!("a/{id}.json"))).unwrap();
        assert_eq!(
            ja,
            fs::read(d.join(format!("b/{id}.json"))).unwrap(),
            "{id}"
        );
        let v: Value = serde_json::from_slice(&ja).unwrap();
        assert_eq!(v["diagnostics"]["config"]["level"], 2);
    }
    assert_eq!(summary.lines().count(), 14);

    let tight = symmlab(d, &["suite", "--level", "2", "--slack", "0.0001"]);
    assert_eq!(code(&tight), 4);

    let bad = Command::new(env!("CARGO_BIN_EXE_symmlab"))
        .current_dir(d)
        .env("SYMMLAB_THREADS", "many")
        .args(["suite", "--level", "2"])
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
    assert_eq!(code(&symmlab(d, &["suite", "--level", "1"])), 2);
}
