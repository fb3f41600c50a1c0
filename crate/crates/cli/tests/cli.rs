//! End-to-end checks of the `stakesim` binary: output schemas, exit codes,
//! diagnostics, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stakesim"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

const RADICAL_EQUAL: &str = r#"
[system]
variant = "radical"
scale = 1e9
coin_difficulty = 100.0
stake_difficulty = 100.0
stake_reward = 16.0
exponent = 0.5

[run]
chain_length = 10
trials = 50
seed = 3
"#;

#[test]
fn analytic_schema_is_pinned() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.toml", RADICAL_EQUAL);
    let output = bin().arg("analytic").arg("--config").arg(&config).output().unwrap();
    assert!(output.status.success(), "{}", stderr(&output));
    let text = stdout(&output);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("variant,L,p,expected_time,upper_bound"));
    // chain_length = 10 expands to a sweep with one row per L.
    assert_eq!(text.lines().count(), 11);
    let first = lines.next().unwrap();
    assert!(first.starts_with("radical,1,1.0000000000000000e0,2.5000000000000000e1,"));
}

#[test]
fn simulate_schema_is_pinned() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.toml", RADICAL_EQUAL);
    let output = bin().arg("simulate").arg("--config").arg(&config).output().unwrap();
    assert!(output.status.success(), "{}", stderr(&output));
    let text = stdout(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "trial,elapsed,stake_rewards");
    assert_eq!(
        lines[51],
        "mean,std_error,ci95_low,ci95_high,analytic_value,z_score"
    );
    assert_eq!(lines.len(), 53);
    assert!(lines[1].starts_with("0,"));
    assert!(lines[50].starts_with("49,"));
}

#[test]
fn race_schema_is_pinned() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "c.toml",
        r#"
[system]
variant = "constant"
scale = 1e6
coin_difficulty = 20.0
stake_difficulty = 20.0
stake_reward = 16.0

[run]
trials = 10
seed = 1

[race]
horizon = 500

[race.honest]
nodes = 2
mode = "endogenous"

[race.attacker]
nodes = 1
mode = "endogenous"
"#,
    );
    let output = bin().arg("race").arg("--config").arg(&config).output().unwrap();
    assert!(output.status.success(), "{}", stderr(&output));
    let text = stdout(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "honest_length,attacker_length,attacker_led");
    assert_eq!(
        lines[11],
        "trials,attacker_led_freq,attacker_ever_led_freq,tie_freq,label"
    );
    assert!(lines[12].ends_with(",exploratory"));
    assert_eq!(lines.len(), 13);
}

#[test]
fn verify_schema_is_pinned_and_passes_on_a_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "c.toml",
        r#"
[verify]
n_max = 20
exponents = [0.5]
success_probs = [0.5, 1.0]
stake_rewards = [4.0]
x_step = 0.01
k_max = 20
"#,
    );
    let output = bin().arg("verify-bounds").arg("--config").arg(&config).output().unwrap();
    assert!(output.status.success(), "{}", stderr(&output));
    let text = stdout(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "check_name,parameters,lhs,rhs,satisfied");
    // 21*1*2 + 21*1*2 + 21 + 21 rows.
    assert_eq!(lines.len(), 1 + 42 + 42 + 21 + 21);
    assert!(lines[1..].iter().all(|line| line.ends_with(",true")));
}

#[test]
fn verification_failure_exits_one() {
    // A negative tolerance turns the tight p = 1 rows into failures; this is
    // the honest way to drive the failure path since the default grid holds.
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "c.toml",
        r#"
[verify]
n_max = 5
exponents = [0.5]
success_probs = [1.0]
stake_rewards = [4.0]
x_step = 0.5
k_max = 5
tolerance = -1.0
"#,
    );
    let output = bin().arg("verify-bounds").arg("--config").arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(stdout(&output).contains(",false"));
}

#[test]
fn config_errors_exit_two_with_named_constraints() {
    let dir = tempfile::tempdir().unwrap();

    let bad_order = RADICAL_EQUAL.replace("stake_difficulty = 100.0", "stake_difficulty = 50.0");
    let config = write_config(dir.path(), "order.toml", &bad_order);
    let output = bin().arg("simulate").arg("--config").arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("stake_difficulty >= coin_difficulty"));

    let bad_mass = format!(
        "{RADICAL_EQUAL}
[party]
nodes = 2
mode = \"exogenous\"
support = [ {{ shares = [0.5, 0.5], mass = 0.9 }} ]
"
    );
    let config = write_config(dir.path(), "mass.toml", &bad_mass);
    let output = bin().arg("simulate").arg("--config").arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("sum to 1"));

    let unknown = format!("{RADICAL_EQUAL}\nmystery = true\n");
    let config = write_config(dir.path(), "unknown.toml", &unknown);
    let output = bin().arg("simulate").arg("--config").arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(2));

    let output = bin()
        .arg("simulate")
        .arg("--config")
        .arg(dir.path().join("missing.toml"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    let config = write_config(dir.path(), "ok.toml", RADICAL_EQUAL);
    let output = bin()
        .arg("simulate")
        .arg("--config")
        .arg(&config)
        .arg("--trials")
        .arg("0")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unwritable_output_path_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.toml", RADICAL_EQUAL);
    let output = bin()
        .arg("analytic")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("no").join("such").join("dir").join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    assert!(stderr(&output).contains("io error"));
}

#[test]
fn saturated_simulation_warns_on_stderr_but_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "c.toml",
        r#"
[system]
variant = "linear"
scale = 100.0
coin_difficulty = 1.0
stake_difficulty = 1.0
stake_reward = 50.0

[run]
chain_length = 5
trials = 4
"#,
    );
    let output = bin().arg("simulate").arg("--config").arg(&config).output().unwrap();
    assert!(output.status.success());
    assert!(stderr(&output).contains("capped"));
}

#[test]
fn json_format_mirrors_the_csv_fields() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.toml", RADICAL_EQUAL);
    let output = bin()
        .arg("simulate")
        .arg("--config")
        .arg(&config)
        .arg("--format")
        .arg("json")
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.starts_with("{\"job\":\"simulate\",\"rows\":[{\"trial\":0,"));
    for field in [
        "\"elapsed\":",
        "\"stake_rewards\":",
        "\"mean\":",
        "\"std_error\":",
        "\"ci95_low\":",
        "\"ci95_high\":",
        "\"analytic_value\":",
        "\"z_score\":",
    ] {
        assert!(text.contains(field), "missing {field}");
    }
}

#[test]
fn identical_runs_emit_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.toml", RADICAL_EQUAL);
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    for out in [&first, &second] {
        let output = bin()
            .arg("simulate")
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert!(output.status.success());
    }
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );
}

#[test]
fn threads_env_variable_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.toml", RADICAL_EQUAL);
    let reference = bin()
        .arg("simulate")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    let with_env = bin()
        .arg("simulate")
        .arg("--config")
        .arg(&config)
        .env("STAKESIM_THREADS", "2")
        .output()
        .unwrap();
    assert!(with_env.status.success());
    assert_eq!(stdout(&reference), stdout(&with_env));
}
