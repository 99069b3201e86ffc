use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracbubble"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("FRACBUBBLE_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn report(dir: &Path, file: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join(file)).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["config_hash"].as_str().is_some_and(|h| h.len() == 16));
    v["report"].clone()
}

#[test]
fn constants_report_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let first = run(&a, &["constants"]);
    let second = run(&b, &["constants"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(std::fs::read(a.join("constants.json")).unwrap(), std::fs::read(b.join("constants.json")).unwrap());
    let r = report(&a, "constants.json");
    let c0 = r["dims"]["energy_mass"].as_f64().unwrap();
    assert!((c0 - 0.408589845602506).abs() < 1e-12);
    assert!(r["provenance"]["energy_mass"].is_string());
    assert_eq!(r["checks"]["sobolev"]["flagged"], false);
}

#[test]
fn invalid_order_exits_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["constants", "--set", "order=0.6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N > 2s violated"));
    assert_eq!(run(tmp.path(), &["constants", "--set", "typo=1"]).status.code(), Some(1));
    assert_eq!(run(tmp.path(), &["no-such-command"]).status.code(), Some(1));
}

#[test]
fn corrupted_amplitude_fails_wholespace_suite() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["verify", "wholespace", "--set", "amplitude=0.9"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(tmp.path(), "wholespace.json")["bubble_equation"]["pass"], false);
    let ok = run(&tmp.path().join("ok"), &["verify", "wholespace"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn empty_admissible_set_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(tmp.path(), &["find-concentration", "--set", "eta=0.45"]).status.code(), Some(1));
}

#[test]
fn concentration_cache_reuses_the_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().join("cache");
    let go = |name: &str| {
        Command::new(env!("CARGO_BIN_EXE_fracbubble"))
            .args(["find-concentration", "--set", "heatmap_points=60", "--out"])
            .arg(tmp.path().join(name))
            .env("FRACBUBBLE_CACHE_DIR", &cache)
            .output()
            .unwrap()
    };
    let first = go("a");
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let entries = std::fs::read_dir(&cache).unwrap().count();
    assert!(entries >= 1);
    let second = go("b");
    assert_eq!(first.stdout, second.stdout);
    for f in ["concentration.json", "varphi_grid.csv", "varphi_grid.svg"] {
        assert_eq!(std::fs::read(tmp.path().join("a").join(f)).unwrap(), std::fs::read(tmp.path().join("b").join(f)).unwrap(), "{f}");
    }
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), entries);
    let r = report(&tmp.path().join("a"), "concentration.json");
    let loc = r["varphi_minimum"]["location"].as_array().unwrap();
    assert!((loc[0].as_f64().unwrap() + loc[1].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn single_bubble_solve_above_ladder_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["solve", "--set", "k=1", "--set", "signs=[1]", "--set", "solve_eps=0.02"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(tmp.path(), "solve.json");
    assert_eq!(r["warnings"].as_array().unwrap().len(), 1);
    let p = &r["points"][0]["assembly"];
    assert_eq!((p["positive_bumps"].as_u64(), p["negative_bumps"].as_u64()), (Some(1), Some(0)));
    let csv = std::fs::read_to_string(tmp.path().join("profile.csv")).unwrap();
    assert!(csv.starts_with("x,ansatz,correction,solution\n"));
    assert!(std::fs::read_to_string(tmp.path().join("profile.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn expansions_emit_one_csv_per_case() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["verify", "expansions", "--set", "svg=false"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(tmp.path(), "expansions.json");
    for case in r["cases"].as_array().unwrap() {
        let tag = case["tag"].as_str().unwrap();
        let csv = std::fs::read_to_string(tmp.path().join(format!("expansions_{tag}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 5, "{tag}");
    }
}

#[test]
fn config_file_is_honored() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    std::fs::write(&cfg, r#"{"order": 0.3}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fracbubble"))
        .args(["constants", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&tmp.path().join("o"), "constants.json")["dims"]["order"], 0.3);
}
