use std::process::{Command, Output};

fn snowpac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snowpac"))
        .args(args)
        .env_remove("SNOWPAC_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_problems_names_the_registry() {
    let o = snowpac(&["list-problems"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in ["example2d", "hs29", "hs43", "hs100", "hs113", "hs227", "hs228", "hs268", "hs285"] {
        assert!(text.contains(name), "{name} missing from {text}");
    }
}

#[test]
fn unknown_problem_is_a_usage_error() {
    let o = snowpac(&["run", "--problem", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope"));
}

#[test]
fn invalid_constant_is_rejected() {
    assert_eq!(snowpac(&["run", "--lambda-t", "0"]).status.code(), Some(1));
    assert_eq!(snowpac(&["run", "--eta0", "0.9", "--eta1", "0.5"]).status.code(), Some(1));
    assert_eq!(snowpac(&["run", "--no-such-flag"]).status.code(), Some(1));
}

#[test]
fn help_shows_defaults() {
    let o = snowpac(&["run", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("--lambda-t"));
    assert!(text.contains("1.41"), "default for lambda-t not shown:\n{text}");
}

#[test]
fn dumped_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = snowpac(&["run", "--problem", "hs29", "--seed", "7", "--lambda-t", "1.7", "--dump-config"]);
    assert_eq!(first.status.code(), Some(0));
    let dump = stdout(&first);
    assert!(dump.contains("lambda_t = 1.7"));
    let path = dir.path().join("cfg.txt");
    std::fs::write(&path, &dump).unwrap();
    let second = snowpac(&["run", "--config", path.to_str().unwrap(), "--dump-config"]);
    assert_eq!(stdout(&second), dump);
}

#[test]
fn flags_override_environment_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.txt");
    std::fs::write(&path, "seed = 5\n").unwrap();
    let env_only = Command::new(env!("CARGO_BIN_EXE_snowpac"))
        .args(["run", "--dump-config"])
        .env("SNOWPAC_SEED", "3")
        .output()
        .unwrap();
    assert!(stdout(&env_only).contains("seed = 3"));
    let file_wins = Command::new(env!("CARGO_BIN_EXE_snowpac"))
        .args(["run", "--config", path.to_str().unwrap(), "--dump-config"])
        .env("SNOWPAC_SEED", "3")
        .output()
        .unwrap();
    assert!(stdout(&file_wins).contains("seed = 5"));
    let flag_wins = snowpac(&["run", "--config", path.to_str().unwrap(), "--seed", "9", "--dump-config"]);
    assert!(stdout(&flag_wins).contains("seed = 9"));
}

#[test]
fn campaign_writes_outputs_and_profile_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = snowpac(&[
        "campaign", "--problem", "hs228", "--formulation", "mean-mean", "--n-samples", "20", "--repeats", "2",
        "--budget", "20", "--gp-enabled", "false", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["records.csv", "summary.txt", "profile.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let p = snowpac(&["profile", "--input", out.join("records.csv").to_str().unwrap(), "--alpha-max", "5"]);
    assert_eq!(p.status.code(), Some(0));
    assert_eq!(stdout(&p).lines().filter(|l| !l.starts_with('#')).count(), 1 + 6);
}
