use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_fracmc");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("FRACMC_THREADS").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

// the file without its timestamp line
fn stable(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap().lines().filter(|l| !l.contains("generated_unix=")).collect::<Vec<_>>().join("\n")
}

#[test]
fn symmetric_cone_curvature_contains_zero() {
    let o = run(&["curvature", "--shape", "cone2d", "--d", "1", "--z", "-0.5,0.5", "--s", "0.5", "--seed", "7", "--n", "100000", "--expect", "zero"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["contains_zero"], true);
    assert!(v["header"].as_array().unwrap().iter().any(|h| h == "seed=7"));
}

#[test]
fn failed_verdict_exits_with_two() {
    // the d = 2 cone has H > 0 at its regular points
    let o = run(&["curvature", "--shape", "cone2d", "--d", "2", "--z", "0.5,1", "--seed", "1", "--n", "100000", "--expect", "zero"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert_eq!(json(&o)["verified"], false);
    let o = run(&["curvature", "--shape", "cone2d", "--d", "2", "--z", "0.5,1", "--seed", "1", "--n", "100000", "--expect", "positive"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn errors_exit_with_one_and_name_the_field() {
    let o = run(&["curvature", "--d", "1"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("field `seed`: is required"), "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "seed = 1\nd = one\n").unwrap();
    let o = run(&["curvature", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("config line 2: field `d`"), "{}", stderr(&o));

    std::fs::write(&cfg, "seed = 1\nno equals sign\n").unwrap();
    let o = run(&["curvature", "--config", cfg.to_str().unwrap()]);
    assert!(stderr(&o).contains("config line 2"), "{}", stderr(&o));

    std::fs::write(&cfg, "seed = 1\nwidgets = 3\n").unwrap();
    let o = run(&["cone-scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("field `widgets`"), "{}", stderr(&o));

    let o = Command::new(BIN).args(["cone-scan", "--seed", "1"]).env("FRACMC_THREADS", "many").output().unwrap();
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("FRACMC_THREADS"));
}

#[test]
fn layering_file_json_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let over = dir.path().join("over.json");
    std::fs::write(&cfg, "command = curvature\nseed = 4\nn = 50000\nd = 3\nz = 0.5,1.5\n").unwrap();
    std::fs::write(&over, r#"{"d": 1, "z": [-0.5, 0.5]}"#).unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--override", over.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    let h: Vec<&str> = v["header"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert!(h.contains(&"d=1") && h.contains(&"seed=4") && h.contains(&"z=-0.5,0.5"), "{h:?}");
    // flags win over both
    let o = run(&["curvature", "--config", cfg.to_str().unwrap(), "--override", over.to_str().unwrap(), "--seed", "8"]);
    assert!(json(&o)["header"].as_array().unwrap().iter().any(|x| x == "seed=8"));
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let args = ["cone-scan", "--d", "0.5,1", "--points", "3", "--seed", "11", "--n", "40000"];
    let o = run(&[&args[..], &["--threads", "1", "--out", a.to_str().unwrap()]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = Command::new(BIN).args(args).args(["--out", b.to_str().unwrap()]).env("FRACMC_THREADS", "3").output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    // only the out= line differs besides the timestamp
    let strip = |p: &Path| stable(p).lines().filter(|l| !l.starts_with("# out=")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn cone_scan_csv_is_well_formed() {
    let o = run(&["cone-scan", "--d", "0.5,1,2", "--points", "5", "--seed", "3", "--n", "200000"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let cols: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(cols[0], "d");
    let sign = cols.iter().position(|c| c == "sign").unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 15);
    for (d, want) in [("0.5", "-1"), ("1.0", "0"), ("2.0", "1")] {
        assert!(rows.iter().filter(|x| &x[0] == d).all(|x| &x[sign] == want), "d={d}");
    }
}

#[test]
fn barrier_scan_reports_the_bound() {
    let o = run(&["barrier-scan", "--seed", "1", "--eps", "1e-2,1e-3", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["threshold"], 1e-3);
}

#[test]
fn flow_writes_trace_final_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("near.csv");
    let o = run(&[
        "flow", "--d", "0.05", "--init", "flat-sheets", "--seed", "3", "--energy-lines", "0", "--audit-points", "2",
        "--audit-samples", "20000", "--expect", "connected", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let trace = std::fs::read_to_string(&out).unwrap();
    assert!(trace.lines().any(|l| l.starts_with("step,time,sup_H,n_components")));
    assert!(std::fs::read_to_string(dir.path().join("near.final.csv")).unwrap().contains("chain,index,x1,x2,H"));
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("near.summary.json")).unwrap()).unwrap();
    assert_eq!(s["regime"], "Connected");
    assert_eq!(s["n_components"], 2);
    // same run, wrong expectation
    let o = run(&["flow", "--d", "0.05", "--init", "flat-sheets", "--seed", "3", "--energy-lines", "0", "--audit-points", "0", "--expect", "disconnected"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn probe_finds_the_dent() {
    let o = run(&["probe", "--seed", "1", "--n", "100000", "--expect", "violation"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&o)["verdict"], "ViolatesCriticality");
}

#[test]
fn area_against_the_disk_oracle_and_limit_scan() {
    let o = run(&["area", "--seed", "2", "--n", "200000", "--oracle", "disk"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&o)["verified"], true);
    let o = run(&["limit-scan", "--seed", "1", "--n", "100000", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let k = json(&o)["kappa_fit"].as_f64().unwrap();
    assert!((k - 2.0).abs() < 0.1, "{k}");
}
