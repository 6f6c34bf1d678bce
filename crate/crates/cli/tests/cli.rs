use std::path::Path;
use std::process::{Command, Output};

fn crnmodel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crnmodel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_params(dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v = serde_json::json!({
        "M": 7, "k": 10, "lambda_p": 0.05, "mu_p": 0.4, "lambda_s": 0.25, "mu_s": 0.5,
        "M_rp": 2, "M1_prime": 1, "M_r2": 1, "m": 2, "n": 1
    });
    edit(&mut v);
    let path = dir.join("params.json");
    std::fs::write(&path, v.to_string()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn validate_accepts_reference_file() {
    let dir = tempfile::tempdir().unwrap();
    let params = write_params(dir.path(), |_| {});
    let o = crnmodel(&["validate", "--params", &params]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "valid: M1=4 M2=4");
}

#[test]
fn invalid_params_exit_one_with_named_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let params = write_params(dir.path(), |v| {
        v["M"] = 2.into();
        v["M1_prime"] = 0.into();
    });
    let o = crnmodel(&["validate", "--params", &params]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("M1 negative"), "{}", stderr(&o));

    let params = write_params(dir.path(), |v| v["extra"] = 1.into());
    assert_eq!(
        crnmodel(&["metrics", "--params", &params]).status.code(),
        Some(1)
    );
    assert_eq!(
        crnmodel(&["metrics", "--model", "neither"]).status.code(),
        Some(1)
    );
}

#[test]
fn numerical_failure_exits_two() {
    let o = crnmodel(&["metrics", "--tol", "-1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("tolerance"));
}

#[test]
fn bad_simulation_config_exits_one() {
    let o = crnmodel(&["simulate", "--horizon", "10", "--warmup", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("warmup < horizon violated"));
}

#[test]
fn enumerate_lists_states_in_order() {
    let o = crnmodel(&["enumerate", "--model", "basic"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 120);
    assert_eq!(lines[0], "(0,0,0)");
    assert_eq!(lines[119], "(7,0,0)");
    assert!(stderr(&o).contains("basic: 120 states"));
}

#[test]
fn enumerate_writes_generator_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = crnmodel(&[
        "enumerate",
        "--model",
        "reservation",
        "--generator",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let g = std::fs::read_to_string(dir.path().join("generator_reservation.txt")).unwrap();
    assert!(g.lines().next().unwrap().starts_with("0 "));
    assert!(g.contains("PuArrivalReserved"));
    assert!(dir.path().join("states_reservation.txt").exists());
}

#[test]
fn solve_methods_agree() {
    let dir = tempfile::tempdir().unwrap();
    let read = |method: &str| {
        let out = dir.path().join(method);
        let o = crnmodel(&[
            "solve",
            "--model",
            "basic",
            "--method",
            method,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read_to_string(out.join("pi_basic.csv")).unwrap()
    };
    let (d, u) = (read("direct"), read("uniformization"));
    assert_eq!(d.lines().next(), Some("state_tuple,probability"));
    assert_eq!(d.lines().count(), 121);
    for (a, b) in d.lines().zip(u.lines()).skip(1) {
        let (ta, pa) = a.rsplit_once(',').unwrap();
        let (tb, pb) = b.rsplit_once(',').unwrap();
        assert_eq!(ta, tb);
        let (pa, pb): (f64, f64) = (pa.parse().unwrap(), pb.parse().unwrap());
        assert!((pa - pb).abs() < 1e-8);
    }
}

#[test]
fn metrics_prints_one_row_per_model() {
    let o = crnmodel(&["metrics"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "model,lambda_s,mu_s,rho_1,rho_2,rho_r1,U,Pb_r1,Pb_1,Pb_2,Ph_r1,Ph_1,Ph_2"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("basic,0.25,0.5,"));
    assert_eq!(lines[1].split(',').nth(5), Some(""));
    assert!(lines[2].starts_with("reservation,0.25,0.5,"));
    assert!(lines[2].split(',').all(|f| !f.is_empty()));
}

#[test]
fn min_width_flag_raises_su2_blocking() {
    let pb2 = |extra: &[&str]| -> f64 {
        let mut args = vec!["metrics", "--model", "reservation"];
        args.extend_from_slice(extra);
        let text = stdout(&crnmodel(&args));
        text.lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(9)
            .unwrap()
            .parse()
            .unwrap()
    };
    // Without width-n admission, SU-2 arrivals facing fewer than m idle
    // channels are blocked more often.
    assert!(pb2(&["--no-su2-min-width"]) > 2.0 * pb2(&[]));
    assert_eq!(
        stdout(&crnmodel(&["enumerate", "--model", "reservation"]))
            .lines()
            .count(),
        268
    );
}

#[test]
fn complexity_table() {
    let o = crnmodel(&["complexity", "--max-m", "7"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row0 = text.lines().nth(1).unwrap();
    assert!(row0.starts_with("0,1,1,true,"));
    let row7 = text.lines().nth(8).unwrap();
    assert!(
        row7.starts_with("7,120,120,true,154,154,268,false,"),
        "{row7}"
    );
}

#[test]
fn sweep_writes_csvs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = crnmodel(&[
        "sweep",
        "--axis",
        "lambda-s",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in [
        "capacity.csv",
        "utilization.csv",
        "blocking.csv",
        "handoff.csv",
    ] {
        let text = std::fs::read_to_string(out.join(name)).unwrap();
        assert_eq!(text.lines().count(), 11, "{name}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["params"]["M"], 7);
    assert_eq!(manifest["grid"].as_array().unwrap().len(), 5);
    assert_eq!(manifest["spec"]["axis"], "lambda_s");
}

#[test]
fn minimal_sweep_and_missing_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = crnmodel(&[
        "sweep", "--axis", "mu-s", "--steps", "2", "--model", "basic", "--out", out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("handoff.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().starts_with("basic,0.25,0.5,"));

    assert_eq!(
        crnmodel(&["sweep", "--steps", "1", "--out", out])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(crnmodel(&["sweep"]).status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = crnmodel(&[
            "sweep",
            "--simulate",
            "--horizon",
            "5000",
            "--warmup",
            "50",
            "--replications",
            "3",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let sim = crnmodel(&[
            "simulate",
            "--horizon",
            "5000",
            "--warmup",
            "50",
            "--seed",
            "3",
            "--cross-check",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(sim.status.success(), "{}", stderr(&sim));
        let mut files: Vec<_> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        files
            .iter()
            .map(|f| (f.file_name().unwrap().to_owned(), std::fs::read(f).unwrap()))
            .collect::<Vec<_>>()
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a.len(), 9);
    assert_eq!(a, b);
    let blocking = String::from_utf8(
        a.iter()
            .find(|(n, _)| n == "blocking.csv")
            .unwrap()
            .1
            .clone(),
    )
    .unwrap();
    assert!(
        blocking.lines().next().unwrap().contains(",sim_Pb_1,") && blocking.contains(",ci_Pb_2")
    );
}
