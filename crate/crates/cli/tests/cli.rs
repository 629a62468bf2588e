use levy_fpe::io::{load_density, read_alpha_star_csv, read_diagram_csv};
use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn levy_fpe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levy-fpe"))
        .args(args)
        .output()
        .unwrap()
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().unwrap_or("")).unwrap_or_else(|_| panic!("stderr: {text}"))
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn out_flag(dir: &Path) -> String {
    format!("--out={}", dir.display())
}

#[test]
fn invalid_alpha_exits_with_a_config_error() {
    let out = levy_fpe(&["solve", "--b", "1", "--alpha", "2.5", "--epsilon", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    let e = stderr_json(&out);
    assert_eq!(e["error"]["field"], "alpha");
    assert!(e["error"]["message"]
        .as_str()
        .unwrap()
        .contains("alpha must lie in (0,2)"));
}

#[test]
fn unknown_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    fs::write(&cfg, "b = 1\nalpah = 0.5\n").unwrap();
    let out = levy_fpe(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["field"], "alpah");
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    fs::write(
        &cfg,
        "# small run\nb = -1\nalpha = 1.5\nepsilon = 0.5\nl = 4\nn = 101\n",
    )
    .unwrap();
    let out = levy_fpe(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "201",
        &out_flag(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["grid"]["n_interior"], 201);
    assert_eq!(report["grid"]["half_width"], 4.0);
    assert_eq!(report["b"], -1.0);
    let d = load_density(&dir.path().join("density.csv")).unwrap();
    assert_eq!(d.grid().n_interior(), 201);
    assert!((d.mass() - 1.0).abs() < 1e-12);
}

#[test]
fn brownian_solve_uses_the_central_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let out = levy_fpe(&[
        "solve",
        "--b",
        "1",
        "--sigma",
        "1",
        "--l",
        "6",
        "--n",
        "301",
        &out_flag(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["scheme"], "central");
    assert_eq!(report["modality"], 2);
}

#[test]
fn transient_options_need_the_transient_solver() {
    let base = ["solve", "--b", "1", "--alpha", "1", "--epsilon", "0.1"];
    let out = levy_fpe(&[&base[..], &["--dt", "0.1"]].concat());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["field"], "dt");

    let dir = tempfile::tempdir().unwrap();
    let out = levy_fpe(
        &[
            &base[..],
            &[
                "--solver",
                "transient",
                "--dt",
                "0.2",
                "--l",
                "4",
                "--n",
                "101",
                &out_flag(dir.path()),
            ],
        ]
        .concat(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["solver"], "transient");
    assert!(report["steps"].as_u64().unwrap() > 1);
}

#[test]
fn sweep_writes_one_density_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/sweep_b_alpha.ini");
    let out = levy_fpe(&["sweep", "--config", cfg, &out_flag(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let mut top: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    top.sort();
    assert_eq!(top, ["densities", "diagram.csv", "plot.gp"]);
    let densities: Vec<_> = fs::read_dir(dir.path().join("densities")).unwrap().collect();
    assert_eq!(densities.len(), 32);
    assert!(dir.path().join("densities/density_b-5_alpha1.999_eps0.1.csv").exists());

    let rows = read_diagram_csv(fs::File::open(dir.path().join("diagram.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 32);
    assert!(rows.iter().all(|r| r.status == "ok"));
    let plot = fs::read_to_string(dir.path().join("plot.gp")).unwrap();
    assert!(plot.contains("set multiplot layout 4,1"));
    assert_eq!(plot.matches("density_b").count(), 32);
}

#[test]
fn bifurcate_reports_failed_pairs_and_keeps_the_rest() {
    let dir = tempfile::tempdir().unwrap();
    // b = 1 stays bimodal on (0.1, 1.5), so its bracket has no sign change
    let out = levy_fpe(&[
        "bifurcate",
        "--b=-1,1",
        "--epsilon",
        "0.1",
        "--l",
        "6",
        "--n",
        "301",
        "--bracket-hi",
        "1.5",
        &out_flag(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let failure = stderr_json(&out);
    assert_eq!(failure["point_failed"]["b"], 1.0);
    assert_eq!(failure["point_failed"]["kind"], "bracket");
    let curve = read_alpha_star_csv(fs::File::open(dir.path().join("alpha_star.csv")).unwrap()).unwrap();
    assert_eq!(curve.len(), 1);
    let [b, eps, alpha_star, lo, hi] = curve[0];
    assert_eq!((b, eps), (-1.0, 0.1));
    assert!(lo <= alpha_star && alpha_star <= hi && hi - lo <= 0.01);
}

#[test]
fn mc_check_agrees_with_the_solver() {
    let dir = tempfile::tempdir().unwrap();
    let out = levy_fpe(&[
        "mc-check",
        "--b=-1",
        "--alpha",
        "1.5",
        "--epsilon",
        "0.5",
        "--paths",
        "128",
        "--t-burn",
        "5",
        "--t-sample",
        "40",
        "--seed",
        "7",
        &out_flag(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let c = json(&dir.path().join("comparison.json"));
    let l1 = c["l1_distance"].as_f64().unwrap();
    assert!(l1 <= 0.1, "L1 = {l1}");
    assert_eq!(c["summary"]["seed"], 7);
    assert!(c["exterior_fractions"]["mc"].as_f64().unwrap() >= 0.0);
    assert!(c["exterior_fractions"]["pde_leak_rate"].as_f64().unwrap() > 0.0);
    let hist = fs::read_to_string(dir.path().join("mc_histogram.csv")).unwrap();
    assert_eq!(hist.lines().next(), Some("x,p_mc,p_pde"));
    assert_eq!(hist.lines().count(), 1 + 999);
}

#[test]
fn mc_check_is_reproducible_byte_for_byte() {
    let run = |dir: &Path| {
        let out = levy_fpe(&[
            "mc-check",
            "--b",
            "1",
            "--alpha",
            "1.2",
            "--epsilon",
            "0.3",
            "--l",
            "4",
            "--n",
            "101",
            "--paths",
            "16",
            "--t-burn",
            "1",
            "--t-sample",
            "2",
            "--seed",
            "99",
            &out_flag(dir),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(a.path());
    run(b.path());
    assert_eq!(
        fs::read(a.path().join("mc_histogram.csv")).unwrap(),
        fs::read(b.path().join("mc_histogram.csv")).unwrap()
    );
    let strip = |p: &Path| {
        let mut v = json(&p.join("comparison.json"));
        v.as_object_mut().unwrap().remove("metadata");
        v
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}

#[test]
fn unwritable_output_is_a_run_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("not-a-dir");
    fs::write(&blocker, "").unwrap();
    let out = levy_fpe(&[
        "solve",
        "--b",
        "1",
        "--alpha",
        "1",
        "--epsilon",
        "0.1",
        "--l",
        "4",
        "--n",
        "51",
        &format!("--out={}", blocker.join("sub").display()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"]["kind"], "io");
}
