use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lcrl(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcrl"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn train_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = lcrl(&["train", "--fixture", "region3", "--ltl", "F G t", "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("o/seed-0");
    for f in ["run.json", "runlog.csv", "policy.json", "psp.json", "q_summary.json"] {
        assert!(run.join(f).exists(), "{f} missing");
    }
    let log = std::fs::read_to_string(run.join("runlog.csv")).unwrap();
    let mut lines = log.lines();
    assert_eq!(lines.next(), Some("# lcrl-csv v1"));
    assert_eq!(lines.next(), Some("episode,iterations,reward,terminal,steps,psp0"));
    // library default budget
    assert_eq!(lines.count(), 100);
    let psp = json(&run.join("psp.json"));
    for entry in psp.as_array().unwrap() {
        let v = entry["value"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v));
        assert!(entry["env_state"].is_u64() && entry["aut_state"].is_string());
    }
    let q = json(&run.join("q_summary.json"));
    assert!(q["q_max"].as_f64().unwrap() <= q["q_bound"].as_f64().unwrap());
}

#[test]
fn same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = lcrl(
            &["train", "--fixture", "region3", "--automaton", "fig3_reach_stay_safe", "--episodes", "40", "--seed", "7", "--out", out],
            dir.path(),
        );
        assert!(o.status.success());
    }
    for f in ["runlog.csv", "policy.json", "psp.json", "q_summary.json"] {
        let a = std::fs::read(dir.path().join("a/seed-7").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b/seed-7").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("exp.cfg"),
        "# two seeds on the 5x5 grid\nfixture = five_by_five\nautomaton = fig10_gfa_gfb_gnc\nepisodes = 30\nseeds = 3, 4\nmu = 0.5\nout = runs\n",
    )
    .unwrap();
    let o = lcrl(&["train", "--config", "exp.cfg", "--episodes", "5"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for seed in [3, 4] {
        let meta = json(&dir.path().join(format!("runs/seed-{seed}/run.json")));
        assert_eq!(meta["params"]["episodes"], 5);
        assert_eq!(meta["params"]["mu"], 0.5);
        assert_eq!(meta["seed"], seed);
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = lcrl(&["train", "--fixture", "region3", "--ltl", "F G t", "--mu", "1.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mu"));

    std::fs::write(dir.path().join("bad.cfg"), "speed = 3\n").unwrap();
    let o = lcrl(&["train", "--config", "bad.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("speed"));

    let o = lcrl(&["train", "--fixture", "region3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = lcrl(&["train", "--fixture", "region3", "--ltl", "F G nope"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = lcrl(&["train", "--fixture", "nowhere", "--ltl", "F G t"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_reports_75_states_on_5x5() {
    let dir = tempfile::tempdir().unwrap();
    let o = lcrl(
        &["oracle", "--fixture", "five_by_five", "--automaton", "fig10_gfa_gfb_gnc", "--out", "o"],
        dir.path(),
    );
    assert!(o.status.success());
    let report = json(&dir.path().join("o/oracle.json"));
    assert_eq!(report["product_states"], 75);
    assert_eq!(report["fixture"], "five_by_five");
    let v = report["value_at_initial"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&v));
    assert!(report["amec_count"].as_u64().unwrap() >= 1);
}

#[test]
fn oversized_pacman_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = lcrl(&["oracle", "--fixture", "pacman_large", "--automaton", "fig6_pacman"], dir.path());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn compare_replays_and_checks_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let ok = |args: &[&str]| {
        let o = lcrl(args, p);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    ok(&["train", "--fixture", "region3", "--automaton", "fig4_fg_t", "--episodes", "60", "--out", "o"]);
    ok(&["train", "--fixture", "region3", "--automaton", "fig4_fg_t", "--episodes", "0", "--out", "z"]);
    ok(&["oracle", "--fixture", "region3", "--automaton", "fig4_fg_t", "--out", "o"]);
    ok(&["compare", "--run", "o/seed-0", "--oracle", "o/oracle.json"]);
    let summary = json(&p.join("o/seed-0/compare.json"));
    assert_eq!(summary["episodes"], 60);
    let gap = summary["policy_gap"].as_f64().unwrap();
    assert!((-1e-9..=1.0).contains(&gap));
    let csv = std::fs::read_to_string(p.join("o/seed-0/compare.csv")).unwrap();
    assert!(csv.starts_with("# lcrl-csv v1\nepisode,max_error\n"));
    assert_eq!(csv.lines().count(), 2 + 61);

    // an untrained run: one row, which is trivially the series maximum
    ok(&["compare", "--run", "z/seed-0", "--oracle", "o/oracle.json", "--out", "zc"]);
    let zc = json(&p.join("zc/compare.json"));
    assert_eq!(zc["initial_max_error"], zc["final_max_error"]);

    ok(&["oracle", "--fixture", "region3", "--automaton", "fig3_reach_stay_safe", "--out", "other"]);
    let o = lcrl(&["compare", "--run", "o/seed-0", "--oracle", "other/oracle.json"], p);
    assert_eq!(o.status.code(), Some(5));

    // tampered artifacts no longer match a replay
    let log = p.join("o/seed-0/runlog.csv");
    let text = std::fs::read_to_string(&log).unwrap().replacen("0,", "9,", 1);
    std::fs::write(&log, text).unwrap();
    let o = lcrl(&["compare", "--run", "o/seed-0", "--oracle", "o/oracle.json"], p);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn psp_writes_fixpoint() {
    let dir = tempfile::tempdir().unwrap();
    let o = lcrl(
        &["psp", "--fixture", "region3", "--automaton", "fig4_fg_t", "--episodes", "30", "--out", "o"],
        dir.path(),
    );
    assert!(o.status.success());
    let fix = json(&dir.path().join("o/seed-0/psp_fixpoint.json"));
    let learned = json(&dir.path().join("o/seed-0/psp.json"));
    assert_eq!(fix.as_array().unwrap().len(), learned.as_array().unwrap().len());
}

#[test]
fn automaton_translate_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = lcrl(
        &["automaton", "translate", "G F a & G F b & G !c", "--alphabet", "a b c", "--out", "gf.ldba"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = lcrl(&["automaton", "check", "gf.ldba"], dir.path());
    assert!(o.status.success());
    let summary: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["alphabet"], serde_json::json!(["a", "b", "c"]));
    assert!(!summary["acceptance"].as_array().unwrap().is_empty());

    std::fs::write(dir.path().join("broken.ldba"), "alphabet: a\nstates: q0\n").unwrap();
    let o = lcrl(&["automaton", "check", "broken.ldba"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = lcrl(&["automaton", "translate", "a U b", "--alphabet", "a b"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
