//! Acceptance run: drives the `fracbubble` binary and prints one line per
//! criterion. Commands used for criteria are run twice so the second run
//! doubles as the determinism check.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

struct Run {
    dir: PathBuf,
    code: Option<i32>,
    stdout: Vec<u8>,
    seconds: f64,
}

fn fracbubble(dir: &Path, args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_fracbubble"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("FRACBUBBLE_CACHE_DIR")
        .output()
        .expect("binary runs");
    if !out.status.success() {
        eprintln!("{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    Run { dir: dir.to_path_buf(), code: out.status.code(), stdout: out.stdout, seconds: start.elapsed().as_secs_f64() }
}

fn report(run: &Run, file: &str) -> Value {
    let text = std::fs::read_to_string(run.dir.join(file)).unwrap_or_default();
    serde_json::from_str::<Value>(&text).map(|v| v["report"].clone()).unwrap_or(Value::Null)
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn case<'a>(rep: &'a Value, tag: &str) -> &'a Value {
    rep["cases"].as_array().and_then(|c| c.iter().find(|c| c["tag"] == tag)).unwrap_or(&Value::Null)
}

/// Byte-identical stdout and output files between two runs.
fn identical(a: &Run, b: &Run) -> bool {
    let files = |d: &Path| -> Vec<(String, Vec<u8>)> {
        let mut v: Vec<_> = std::fs::read_dir(d)
            .map(|it| it.flatten().map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap_or_default())).collect())
            .unwrap_or_default();
        v.sort();
        v
    };
    a.code == b.code && a.stdout == b.stdout && files(&a.dir) == files(&b.dir)
}

struct Criteria {
    passed: usize,
    total: usize,
}

impl Criteria {
    fn line(&mut self, id: usize, name: &str, pass: bool, detail: String) {
        self.total += 1;
        if pass {
            self.passed += 1;
        }
        println!("[{}] {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let root = tmp.path();
    let twice = |name: &str, args: &[&str]| (fracbubble(&root.join(format!("{name}-1")), args), fracbubble(&root.join(format!("{name}-2")), args));

    let (ws, ws2) = twice("wholespace", &["verify", "wholespace"]);
    let (constants, constants2) = twice("constants", &["constants"]);
    let (green, green2) = twice("green", &["green"]);
    let (conc, conc2) = twice("concentration", &["find-concentration"]);
    let (exp, exp2) = twice("expansions", &["verify", "expansions"]);
    let (energy, energy2) = twice("energy", &["verify", "energy"]);
    let (red, red2) = twice("reduction", &["verify", "reduction"]);
    let (solve, solve2) = twice("solve", &["solve"]);
    let exp_small = fracbubble(&root.join("expansions-s01"), &["verify", "expansions", "--set", "order=0.1"]);
    let red_small = fracbubble(&root.join("reduction-s01"), &["verify", "reduction", "--set", "order=0.1"]);

    let mut c = Criteria { passed: 0, total: 0 };

    // 1
    let w = report(&ws, "wholespace.json");
    let res = num(&w["bubble_equation"]["max_residual"]);
    let gauss = w["gaussian_self_check"].as_array().map(|g| g.iter().map(|x| num(&x["error"])).fold(0.0, f64::max)).unwrap_or(f64::NAN);
    c.line(
        1,
        "whole-space bubble",
        res <= 1e-3 && gauss <= 1e-4 && ws.seconds < 30.0,
        format!("max residual {res:.2e} <= 1e-3, gaussian self-check {gauss:.2e} <= 1e-4, {:.1} s < 30 s", ws.seconds),
    );

    // 2
    let dil = num(&w["dilation_kernel"]["max_residual"]);
    let tra = num(&w["translation_kernel"]["max_residual"]);
    let ctrl = w["negative_control"]["report"]["residuals"].as_array().map(|r| r.iter().map(num).fold(f64::INFINITY, f64::min)).unwrap_or(f64::NAN);
    c.line(
        2,
        "nondegeneracy kernel",
        dil <= 1e-3 && tra <= 1e-3 && ctrl > 0.5,
        format!("dilation {dil:.2e}, translation {tra:.2e} <= 1e-3; negative control min residual {ctrl:.2} (order one)"),
    );

    // 3
    let k = &report(&constants, "constants.json")["checks"];
    let closed = num(&k["energy_mass_closed_form"]["error"]);
    let inv = num(&k["energy_mass_scale_invariance"]["value"]);
    let scal = num(&k["source_mass_scaling"]["value"]);
    c.line(
        3,
        "constants",
        closed <= 1e-8 && inv <= 1e-10 && scal <= 1e-10,
        format!("c0 vs pi a^10 rel {closed:.1e} <= 1e-8, c0 scale invariance {inv:.1e} <= 1e-10, c1 scaling {scal:.1e} <= 1e-10"),
    );

    // 4
    let sob = &k["sobolev"];
    let mismatch = num(&sob["relative_mismatch"]);
    let flag_consistent = sob["flagged"].as_bool() == Some(mismatch > 1e-6);
    c.line(
        4,
        "Sobolev constant",
        num(&sob["derived"]).is_finite() && num(&sob["formula"]).is_finite() && flag_consistent,
        format!("derived {:.12}, Gamma formula {:.12}, mismatch {mismatch:.1e}, flagged {}", num(&sob["derived"]), num(&sob["formula"]), sob["flagged"]),
    );

    // 5
    let g = report(&green, "green.json");
    let sym = num(&g["symmetry"]["value"]);
    let classical = num(&g["classical_limit"]["error"]);
    let moll = g["mollified_delta"].as_array().map(|m| m.iter().map(|x| num(&x["error"])).fold(0.0, f64::max)).unwrap_or(f64::NAN);
    let dbl = num(&g["robin_mode_doubling"]["value"]);
    c.line(
        5,
        "Green/Robin",
        sym <= 1e-10 && classical <= 1e-4 && moll <= 1e-6 && dbl <= 1e-5,
        format!("symmetry {sym:.1e} <= 1e-10, s->1 limit {classical:.1e} <= 1e-4, mollified delta {moll:.1e} <= 1e-6, mode doubling {dbl:.1e} <= 1e-5"),
    );

    // 6
    let e = report(&exp, "expansions.json");
    let rem = num(&case(&e, "projection_remainder")["slope"]);
    c.line(6, "projection remainder", rem >= 1.05, format!("slope {rem:.3} >= 1.05"));

    // 7
    let e01 = report(&exp_small, "expansions.json");
    let within = |v: f64, p: f64| (v - p).abs() <= 0.15;
    let td = num(&case(&e, "kernel_projection_translation")["slope"]);
    let dd = num(&case(&e, "kernel_projection_dilation")["slope"]);
    let tdp = num(&case(&e, "kernel_projection_translation")["predicted"]);
    let ddp = num(&case(&e, "kernel_projection_dilation")["predicted"]);
    let ni = num(&case(&e, "nonlinear_interaction")["slope"]);
    let ni01 = num(&case(&e01, "nonlinear_interaction")["slope"]);
    let sd = case(&e, "subcritical_defect")["pass"].as_bool() == Some(true) && case(&e, "subcritical_defect_derivative")["pass"].as_bool() == Some(true);
    c.line(
        7,
        "rate suite",
        within(td, tdp) && within(dd, ddp) && within(ni, 1.0) && within(ni01, 0.75) && sd,
        format!(
            "kernel projections {td:.3} vs {tdp:.2}, {dd:.3} vs {ddp:.2}; interaction {ni:.3} vs 1.00 (s=0.4), {ni01:.3} vs 0.75 (s=0.1); defect/(eps|ln eps|) bounded {sd}"
        ),
    );

    // 8
    let en = report(&energy, "energy.json");
    let reps = en["reports"].as_array().cloned().unwrap_or_default();
    let mut ok8 = reps.len() == 2;
    let mut parts = Vec::new();
    for r in &reps {
        let slope = num(&r["rates"]["cases"][0]["slope"]);
        let lead = num(&r["leading"]["rel_err"]);
        let mut coef: f64 = 0.0;
        for f in r["interactions"].as_array().cloned().unwrap_or_default() {
            coef = coef.max((num(&f["self_coefficient"]) - num(&f["self_predicted"])).abs() / num(&f["self_predicted"]).abs());
            coef = coef.max((num(&f["cross_coefficient"]) - num(&f["cross_predicted"])).abs() / num(&f["cross_predicted"]).abs());
        }
        ok8 &= slope >= 1.05 && lead <= 1e-2 && coef <= 5e-2;
        parts.push(format!("k={} slope {slope:.3}, leading {lead:.1e}, coefficients {coef:.1e}", r["k"]));
    }
    c.line(8, "energy expansion", ok8, parts.join("; "));

    // 9
    let cc = report(&conc, "concentration.json");
    let sym9 = num(&cc["symmetry"]["error"]);
    let hit = cc["grid_argmin"]["matches_minimizer"].as_bool() == Some(true);
    let cons = &cc["center_consistency"];
    c.line(
        9,
        "concentration",
        sym9 <= 1e-6 && hit && cons["pass"].as_bool() == Some(true),
        format!(
            "symmetry {sym9:.1e} <= 1e-6, 200^2 grid argmin within one cell {hit}, |grad phi| {:.1e} <= {:.1e}, gap {:.1e} <= {:.1e}",
            num(&cons["grad_norm"]),
            num(&cons["grad_limit"]),
            num(&cons["gap"]),
            num(&cons["gap_limit"])
        ),
    );

    // 10
    let r = report(&red, "reduction.json");
    let r01 = report(&red_small, "reduction.json");
    let s04 = num(&r["rates"]["cases"][0]["slope"]);
    let s01 = num(&r01["rates"]["cases"][0]["slope"]);
    let var = num(&r["coercivity_variation"]).max(num(&r01["coercivity_variation"]));
    let kern = r["kernel_detected"].as_bool() == Some(true) && r01["kernel_detected"].as_bool() == Some(true);
    c.line(
        10,
        "correction rate",
        within(s04, 1.0) && within(s01, 0.75) && var < 0.5 && kern,
        format!("slope {s04:.3} vs 1.00 (s=0.4), {s01:.3} vs 0.75 (s=0.1); coercivity variation {var:.3} < 0.5; kernel detected without constraints {kern}"),
    );

    // 11
    let sv = report(&solve, "solve.json");
    let pts = sv["points"].as_array().cloned().unwrap_or_default();
    let worst = pts.iter().map(|p| num(&p["assembly"]["constrained_residual"])).fold(0.0, f64::max);
    let dec = sv["multipliers_decrease"].as_bool() == Some(true);
    let shape = !pts.is_empty() && pts.iter().all(|p| p["assembly"]["shape_ok"].as_bool() == Some(true));
    let mags: Vec<String> = sv["max_multiplier"].as_array().map(|m| m.iter().map(|x| format!("{:.1e}", num(x))).collect()).unwrap_or_default();
    c.line(
        11,
        "assembled nodal solution",
        !pts.is_empty() && worst <= 1e-8 && dec && shape,
        format!("constrained residual {worst:.1e} <= 1e-8, |c| along ladder [{}] decreasing {dec}, one positive and one negative bump {shape}", mags.join(", ")),
    );

    // 12
    let pairs = [
        ("constants", &constants, &constants2),
        ("green", &green, &green2),
        ("find-concentration", &conc, &conc2),
        ("verify wholespace", &ws, &ws2),
        ("verify expansions", &exp, &exp2),
        ("verify energy", &energy, &energy2),
        ("verify reduction", &red, &red2),
        ("solve", &solve, &solve2),
    ];
    let differing: Vec<&str> = pairs.iter().filter(|(_, a, b)| !identical(a, b)).map(|(n, _, _)| *n).collect();
    c.line(
        12,
        "determinism",
        differing.is_empty(),
        if differing.is_empty() { format!("{} commands byte-identical across repeat runs", pairs.len()) } else { format!("differs: {}", differing.join(", ")) },
    );

    println!("acceptance: {}/{} criteria pass", c.passed, c.total);
    if c.passed != c.total {
        std::process::exit(1);
    }
}
