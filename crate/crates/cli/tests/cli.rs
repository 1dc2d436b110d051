use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ibplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ibplan")).args(args).output().expect("spawn ibplan")
}

fn ok(args: &[&str]) -> String {
    let out = ibplan(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn gen_env_is_deterministic_and_reloadable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (path(dir.path(), "a.json"), path(dir.path(), "b.json"));
    ok(&["gen-env", "--seed", "4", "--obstacles", "2", "--out", &a]);
    ok(&["gen-env", "--seed", "4", "--obstacles", "2", "--out", &b]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let reloaded = ok(&["gen-env", "--env", &a]);
    assert_eq!(reloaded.trim_end(), fs::read_to_string(&a).unwrap().trim_end());
}

#[test]
fn partition_check_and_cover() {
    let json = ok(&["partition", "--seed", "1", "--obstacles", "1"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(v.is_object());

    let check = ok(&["check-ib", "--seed", "1", "--obstacles", "1"]);
    assert!(check.contains("\"representable\": true"));
    // Known non-representable scenario: exit code 2 with a witness.
    let out = ibplan(&["check-ib", "--seed", "36", "--obstacles", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"representable\": false"));

    let cover = ok(&["cover", "--seed", "1", "--obstacles", "1", "--format", "json"]);
    serde_json::from_str::<serde_json::Value>(&cover).unwrap();
    assert!(!ok(&["cover", "--seed", "1", "--obstacles", "1", "--original"]).is_empty());
}

#[test]
fn formulate_reports_sizes() {
    let ib: serde_json::Value = serde_json::from_str(&ok(&["formulate", "--seed", "2", "--obstacles", "1", "--steps", "6"])).unwrap();
    let bigm: serde_json::Value =
        serde_json::from_str(&ok(&["formulate", "--seed", "2", "--obstacles", "1", "--steps", "6", "--method", "bigm"])).unwrap();
    assert_ne!(ib, bigm);
}

#[test]
fn exported_lp_solves_like_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let lp = path(dir.path(), "m.lp");
    let common = ["--seed", "2", "--obstacles", "1", "--steps", "5", "--method", "bigm"];
    let mut args = vec!["export-lp"];
    args.extend(common);
    args.extend(["--out", &lp]);
    ok(&args);
    assert!(fs::read_to_string(&lp).unwrap().contains("Binaries"));

    let steps = path(dir.path(), "steps.json");
    let mut args = vec!["solve"];
    args.extend(common);
    args.extend(["--out", &steps]);
    let direct: serde_json::Value = serde_json::from_str(&ok(&args)).unwrap();
    let from_file: serde_json::Value = serde_json::from_str(&ok(&["solve", "--lp", &lp])).unwrap();
    let (a, b) = (direct["objective"].as_f64().unwrap(), from_file["objective"].as_f64().unwrap());
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    let footholds: Vec<[f64; 2]> = serde_json::from_str(&fs::read_to_string(&steps).unwrap()).unwrap();
    assert_eq!(footholds.len(), 5);
}

#[test]
fn plots_every_stage() {
    for stage in ["triangulation", "partition", "conflict", "separator", "solution"] {
        let svg = ok(&["plot", "--seed", "0", "--obstacles", "1", "--stage", stage, "--steps", "6", "--method", "bigm"]);
        assert!(svg.starts_with("<svg"), "{stage}");
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}

#[test]
fn bench_writes_deterministic_records() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        ok(&["bench", "--seeds", "2", "--obstacles", "1,2", "--steps", "3", "--node-limit", "100", "--out", out])
    };
    let (a, b) = (path(dir.path(), "a"), path(dir.path(), "b"));
    let tables = run(&a);
    run(&b);
    assert!(tables.contains("Fastest"));
    let records = fs::read_to_string(Path::new(&a).join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + 2 * 2 * 3);
    assert_eq!(records, fs::read_to_string(Path::new(&b).join("records.csv")).unwrap());
    assert!(Path::new(&a).join("timings.csv").exists());
    assert!(Path::new(&a).join("tables.txt").exists());
}
