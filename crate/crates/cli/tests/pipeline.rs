//! End-to-end pipeline tests over the real binaries: generate, run the
//! stdio reference agents as child processes, evaluate, report.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn trailbench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trailbench"))
}

fn agent_bin() -> &'static str {
    env!("CARGO_BIN_EXE_trailbench-agent")
}

fn write_tiny_config(dir: &Path) -> PathBuf {
    let path = dir.join("tiny.toml");
    fs::write(
        &path,
        "compression_factor = 0.25\n\n\
         [categories.brute_force]\ntp = 2\nfp = 1\n\n\
         [categories.misconfiguration]\ntp = 1\nfp = 2\n",
    )
    .unwrap();
    path
}

fn run_ok(cmd: &mut Command) -> Output {
    let output = cmd.output().unwrap();
    assert!(
        output.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr),
    );
    output
}

fn generate(out: &Path, config: &Path, seed: u64) {
    run_ok(trailbench()
        .arg("generate")
        .arg("--config")
        .arg(config)
        .arg("--seed")
        .arg(seed.to_string())
        .arg("--out")
        .arg(out));
}

fn run_agent(corpus: &Path, out: &Path, agent_args: &[&str]) -> Output {
    let mut cmd = trailbench();
    cmd.arg("run")
        .arg("--corpus")
        .arg(corpus)
        .arg("--out")
        .arg(out)
        .arg("--jobs")
        .arg("2")
        .arg("--")
        .arg(agent_bin())
        .args(agent_args);
    run_ok(&mut cmd)
}

fn evaluate(corpus: &Path, reports: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut cmd = trailbench();
    cmd.arg("evaluate")
        .arg("--corpus")
        .arg(corpus)
        .arg("--reports")
        .arg(reports)
        .arg("--out")
        .arg(out)
        .args(extra);
    run_ok(&mut cmd)
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                files.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    files
}

#[test]
fn generate_run_evaluate_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let bench = dir.path().join("bench");
    generate(&bench, &config, 11);
    assert!(bench.join("corpus.json").exists());
    assert_eq!(fs::read_dir(bench.join("cases")).unwrap().count(), 6);

    run_agent(&bench, &bench, &["keyword"]);
    let reports = bench.join("reports");
    assert!(reports.join("bf-tp-0000").join("transcript.json").exists());
    assert!(reports.join("bf-tp-0000").join("report.json").exists());

    evaluate(&bench, &reports, &bench, &[]);
    let summary = bench.join("summary");
    for file in ["summary.json", "summary.md", "summary.csv"] {
        assert!(summary.join(file).exists(), "{file} missing");
    }

    // Evaluating the same inputs again produces byte-identical summaries.
    let again = dir.path().join("again");
    evaluate(&bench, &reports, &again, &[]);
    assert_eq!(
        fs::read(summary.join("summary.json")).unwrap(),
        fs::read(again.join("summary").join("summary.json")).unwrap()
    );

    let output = run_ok(trailbench()
        .arg("report")
        .arg("--summary")
        .arg(&summary)
        .arg("--format")
        .arg("md"));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("# Evaluation summary"), "{text}");
    assert!(text.contains("## Tool coverage"), "{text}");
}

#[test]
fn regenerating_with_the_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    generate(&a, &config, 7);
    generate(&b, &config, 7);
    assert_eq!(read_tree(&a), read_tree(&b));

    let c = dir.path().join("c");
    generate(&c, &config, 8);
    assert_ne!(read_tree(&a), read_tree(&c));
}

#[test]
fn oracle_outscores_parrot_through_the_real_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let bench = dir.path().join("bench");
    generate(&bench, &config, 12);

    let corpus_flag = bench.to_str().unwrap().to_string();
    for (name, args) in
        [("oracle", vec!["oracle", "--corpus", corpus_flag.as_str()]), ("parrot", vec!["parrot"])]
    {
        let out = dir.path().join(name);
        run_agent(&bench, &out, &args);
        evaluate(&bench, &out.join("reports"), &out, &["--validated"]);
    }

    let read_summary = |name: &str| -> serde_json::Value {
        let text =
            fs::read_to_string(dir.path().join(name).join("summary").join("summary.json"))
                .unwrap();
        serde_json::from_str(&text).unwrap()
    };
    let oracle = read_summary("oracle");
    let parrot = read_summary("parrot");
    let f = |v: &serde_json::Value| v["overall"]["m1_validated"]["f_beta"].as_f64().unwrap();
    assert_eq!(f(&oracle), 1.0);
    // Every parrot TP verdict rests on alert-only evidence and downgrades.
    assert_eq!(f(&parrot), 0.0);
    let novel = |v: &serde_json::Value| v["overall"]["m2_novel"]["hits"].as_u64().unwrap();
    assert!(novel(&oracle) > 0);
    assert_eq!(novel(&parrot), 0);
}

#[test]
fn a_crashing_agent_is_recorded_and_the_run_still_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let bench = dir.path().join("bench");
    generate(&bench, &config, 13);

    let output = run_agent(&bench, &bench, &["crash"]);
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("6 crashed"), "{stderr}");

    let transcript: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(bench.join("reports").join("bf-tp-0000").join("transcript.json"))
            .unwrap(),
    )
    .unwrap();
    assert_eq!(transcript["outcome"]["kind"], "crashed");
    assert!(!bench.join("reports").join("bf-tp-0000").join("report.json").exists());

    evaluate(&bench, &bench.join("reports"), &bench, &[]);
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(bench.join("summary").join("summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["unscorable"].as_array().unwrap().len(), 6);
}

#[test]
fn env_var_overrides_the_tool_budget() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let bench = dir.path().join("bench");
    generate(&bench, &config, 14);

    let mut cmd = trailbench();
    cmd.arg("run")
        .arg("--corpus")
        .arg(&bench)
        .arg("--out")
        .arg(&bench)
        .arg("--")
        .arg(agent_bin())
        .arg("loop");
    cmd.env("TRAILBENCH_MAX_TOOL_CALLS", "2");
    run_ok(&mut cmd);

    let transcript: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(bench.join("reports").join("bf-tp-0000").join("transcript.json"))
            .unwrap(),
    )
    .unwrap();
    // Two calls served; the endless rest refused, then the flood guard
    // ends the session without a report.
    assert_eq!(transcript["tool_calls"].as_array().unwrap().len(), 2);
    assert_eq!(transcript["outcome"]["kind"], "no_report");
}

#[test]
fn beta_changes_f_but_not_the_rates() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let bench = dir.path().join("bench");
    generate(&bench, &config, 15);
    run_agent(&bench, &bench, &["random", "--seed", "3"]);

    let b1 = dir.path().join("b1");
    let b3 = dir.path().join("b3");
    evaluate(&bench, &bench.join("reports"), &b1, &["--beta", "1"]);
    evaluate(&bench, &bench.join("reports"), &b3, &["--beta", "3"]);
    let read = |root: &Path| -> serde_json::Value {
        serde_json::from_str(
            &fs::read_to_string(root.join("summary").join("summary.json")).unwrap(),
        )
        .unwrap()
    };
    let one = read(&b1);
    let three = read(&b3);
    assert_eq!(one["overall"]["m1_raw"]["tp"], three["overall"]["m1_raw"]["tp"]);
    assert_eq!(one["overall"]["m1_raw"]["fp"], three["overall"]["m1_raw"]["fp"]);
    // The random agent is wrong somewhere on a mixed corpus, so the two
    // weightings cannot coincide.
    assert_ne!(one["overall"]["m1_raw"]["f_beta"], three["overall"]["m1_raw"]["f_beta"]);
}

#[test]
fn missing_transcripts_warn_but_still_score() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let bench = dir.path().join("bench");
    generate(&bench, &config, 16);
    run_agent(&bench, &bench, &["parrot"]);
    fs::remove_dir_all(bench.join("reports").join("mis-fp-0001")).unwrap();

    let output = evaluate(&bench, &bench.join("reports"), &bench, &[]);
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("warning"), "{stderr}");
    assert!(stderr.contains("mis-fp-0001"), "{stderr}");

    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(bench.join("summary").join("summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["missing_transcripts"][0], "mis-fp-0001");
}

#[test]
fn bad_inputs_fail_with_nonzero_exits() {
    let dir = tempfile::tempdir().unwrap();

    // Config naming an unknown category.
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[categories.phishing]\ntp = 1\nfp = 1\n").unwrap();
    let output = trailbench()
        .arg("generate")
        .arg("--config")
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("phishing"), "{stderr}");

    // Running against a corpus that does not exist.
    let output = trailbench()
        .arg("run")
        .arg("--corpus")
        .arg(dir.path().join("nowhere"))
        .arg("--out")
        .arg(dir.path().join("y"))
        .arg("--")
        .arg(agent_bin())
        .arg("parrot")
        .output()
        .unwrap();
    assert!(!output.status.success());

    // Evaluating with an out-of-range tau.
    let config = write_tiny_config(dir.path());
    let bench = dir.path().join("bench");
    generate(&bench, &config, 17);
    let output = trailbench()
        .arg("evaluate")
        .arg("--corpus")
        .arg(&bench)
        .arg("--reports")
        .arg(bench.join("reports"))
        .arg("--out")
        .arg(&bench)
        .arg("--tau")
        .arg("1.5")
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("tau"), "{stderr}");
}

#[test]
fn expected_tool_override_changes_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_tiny_config(dir.path());
    let bench = dir.path().join("bench");
    generate(&bench, &config, 18);
    run_agent(&bench, &bench, &["keyword"]);

    let table = dir.path().join("tools.toml");
    fs::write(
        &table,
        "brute_force = [\"lookup_events\"]\nmisconfiguration = [\"lookup_events\"]\n",
    )
    .unwrap();
    let narrowed = dir.path().join("narrowed");
    evaluate(
        &bench,
        &bench.join("reports"),
        &narrowed,
        &["--expected-tools", table.to_str().unwrap()],
    );
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(narrowed.join("summary").join("summary.json")).unwrap(),
    )
    .unwrap();
    // The keyword agent always starts with lookup_events, so a table of
    // just that tool pins coverage at 100% with one expected hit per case.
    assert_eq!(summary["overall"]["m3_tools"]["hits"], 6);
    assert_eq!(summary["overall"]["m3_tools"]["total"], 6);
}
