use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn multistep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multistep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<serde_json::Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn theory_reports_direct_order_and_best_pair() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.txt");
    fs::write(&model, "# cubic\nlevels = 0.9, -0.81, 0.91\nsigma2 = 25\n").unwrap();
    let out = multistep(&["theory", "--model", path(&model), "--h", "3", "--K", "10", "--format", "jsonl"]);
    assert!(out.status.success());
    let v = &json_lines(&out)[0];
    assert_eq!(v["path"], "unit-root");
    assert_eq!(v["p_h"], 2);
    assert_eq!(v["p1"], 3);
    assert_eq!(v["best"], serde_json::json!(["(2,2)"]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 20);

    let text = stdout(&multistep(&["theory", "--levels", "0.9,-0.81,0.91", "--sigma2", "25", "--h", "3", "--K", "10"]));
    assert!(text.contains("best            (2,2)"), "{text}");
}

#[test]
fn theory_uses_the_stationary_path_without_a_unit_root() {
    let out = multistep(&["theory", "--levels", "0,-0.8", "--h", "2", "--K", "4", "--format", "jsonl"]);
    assert!(out.status.success());
    assert_eq!(json_lines(&out)[0]["path"], "stationary");
}

#[test]
fn selection_on_generated_data() {
    let dir = tempfile::tempdir().unwrap();
    let mut hits = 0;
    for seed in 0..5 {
        let file = dir.path().join(format!("s{seed}.csv"));
        let g = multistep(&["generate", "--dgp", "I", "--n", "1000", "--seed", &seed.to_string(), "--out", path(&file)]);
        assert!(g.status.success());
        let out = multistep(&["select", "--input", path(&file), "--h", "2", "--K", "10", "--cn", "B", "--format", "jsonl"]);
        assert!(out.status.success());
        let v = &json_lines(&out)[0];
        assert_eq!(v["candidates"].as_array().unwrap().len(), 20);
        if v["k"] == 1 && v["method"] == "direct" {
            hits += 1;
        }
    }
    assert!(hits >= 4, "{hits}/5");
}

#[test]
fn both_procedures_list_every_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.csv");
    multistep(&["generate", "--dgp", "III", "--n", "300", "--seed", "9", "--out", path(&file)]);
    let out = multistep(&["select", "--input", path(&file), "--h", "2", "--K", "4", "--procedure", "both", "--format", "jsonl"]);
    let rows = json_lines(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["procedure"], "I");
    assert_eq!(rows[1]["procedure"], "II");
    for r in &rows {
        let cands = r["candidates"].as_array().unwrap();
        let chosen = cands
            .iter()
            .find(|c| c["k"] == r["k"] && c["method"] == r["method"])
            .unwrap()["value"]
            .as_f64()
            .unwrap();
        let min = cands
            .iter()
            .filter(|c| c["searched"] == true)
            .map(|c| c["value"].as_f64().unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(chosen, min);
    }
}

#[test]
fn short_series_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("short.csv");
    fs::write(&file, (1..=10).map(|i| format!("{i}\n")).collect::<String>()).unwrap();
    let out = multistep(&["select", "--input", path(&file), "--h", "2", "--K", "8"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "series_too_short");
    assert_eq!(err["exit_code"], 2);
}

#[test]
fn bad_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let out = multistep(&["select", "--input", path(&missing), "--h", "2", "--K", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "io");

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x\n1.0\nabc\n").unwrap();
    let out = multistep(&["select", "--input", path(&bad), "--h", "2", "--K", "2"]);
    assert_eq!(out.status.code(), Some(2));

    let out = multistep(&["theory", "--levels", "0.5", "--h", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn singular_designs_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("zeros.csv");
    fs::write(&file, "0\n".repeat(60)).unwrap();
    let out = multistep(&["select", "--input", path(&file), "--h", "2", "--K", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn seeded_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for f in [&a, &b] {
        let out = multistep(&[
            "simulate", "--dgp", "VII", "--n", "150", "--reps", "6", "--seed", "42", "--format", "csv", "--out", path(f),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let g1 = dir.path().join("g1.csv");
    let g2 = dir.path().join("g2.csv");
    for f in [&g1, &g2] {
        multistep(&["generate", "--dgp", "X", "--n", "50", "--seed", "5", "--out", path(f)]);
    }
    assert_eq!(fs::read(&g1).unwrap(), fs::read(&g2).unwrap());
}

#[test]
fn thread_count_does_not_change_tables() {
    let run = |threads: &str| {
        stdout(&multistep(&[
            "simulate", "--dgp", "III", "--n", "120", "--reps", "8", "--seed", "3", "--threads", threads, "--format", "jsonl",
        ]))
    };
    let one = run("1");
    assert!(!one.is_empty());
    assert_eq!(one, run("3"));
}

#[test]
fn forecasts_match_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("s.csv");
    multistep(&["generate", "--dgp", "X", "--n", "200", "--seed", "1", "--out", path(&file)]);
    let out = multistep(&["forecast", "--input", path(&file), "--h", "2", "--k", "2", "--format", "jsonl"]);
    assert!(out.status.success());
    let rows = json_lines(&out);
    assert_eq!(rows.len(), 2);

    let x = multistep::io::read_series(&file).unwrap();
    let one = multistep_core::fit_one_step(&x, 2, 200).unwrap();
    let plug = multistep_core::plug_in_multi(&one, 2).unwrap();
    let want = multistep_core::predict(&x, &plug, 200).unwrap().value;
    assert_eq!(rows[0]["method"], "plug-in");
    assert_eq!(rows[0]["value"].as_f64().unwrap(), want);
}

#[test]
fn mspe_summary_is_written() {
    let out = multistep(&[
        "simulate", "--kind", "mspe", "--dgp", "X", "--h", "2", "--k", "2", "--method", "plug-in", "--n", "200",
        "--reps", "20", "--seed", "1", "--format", "jsonl",
    ]);
    assert!(out.status.success());
    let v = &json_lines(&out)[0];
    assert_eq!(v["replications"], 20);
    assert_eq!(v["sigma_h2"], 81.25);
}
