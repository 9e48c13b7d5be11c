//! End-to-end checks of the `epibench` binary: exit codes, output files,
//! and the optimize -> simulate workflow.

use std::path::Path;
use std::process::{Command, Output};

fn epibench(args: &[&str], extra: &[&Path]) -> Output {
    let mut command = Command::new(env!("CARGO_BIN_EXE_epibench"));
    let mut paths = extra.iter();
    for arg in args {
        if *arg == "{}" {
            command.arg(paths.next().expect("path placeholder"));
        } else {
            command.arg(arg);
        }
    }
    command.output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.conf");
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL_SEIR: &str = "model = seir\nt_f = 20\nd = 10\niterations = 4\nn_init = 3\n\
                          adam_steps = 3\nseed = 1\n";

#[test]
fn optimize_writes_report_and_control() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_SEIR);
    let out = dir.path().join("out");
    let output = epibench(
        &["optimize", "--config", "{}", "--out", "{}"],
        &[&config, &out],
    );
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("aofv="), "{stdout}");
    assert!(out.join("report.json").exists());
    let control = std::fs::read_to_string(out.join("best_control.txt")).unwrap();
    assert_eq!(control.lines().count(), 20);

    let report = epibo_bench::io::load_report(&out.join("report.json")).unwrap();
    assert_eq!(report.best_full.len(), 20);
    assert_eq!(report.config_text.as_deref(), Some(SMALL_SEIR));
}

#[test]
fn optimize_flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_SEIR);
    let out = dir.path().join("out");
    let output = epibench(
        &[
            "optimize", "--config", "{}", "--out", "{}", "--d", "5", "--seed", "3", "--fill",
            "identical", "--iterations", "2",
        ],
        &[&config, &out],
    );
    assert!(output.status.success(), "{output:?}");
    let report = epibo_bench::io::load_report(&out.join("report.json")).unwrap();
    assert_eq!(report.config.d, 5);
    assert_eq!(report.seed, 3);
    assert_eq!(report.trace.len(), 2);
}

#[test]
fn bad_configs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let unknown_key = write_config(dir.path(), "frobnicate = 1\n");
    let output = epibench(
        &["optimize", "--config", "{}", "--out", "{}"],
        &[&unknown_key, &out],
    );
    assert_eq!(output.status.code(), Some(2), "{output:?}");

    let missing = dir.path().join("nope.conf");
    let output = epibench(
        &["optimize", "--config", "{}", "--out", "{}"],
        &[&missing, &out],
    );
    assert_eq!(output.status.code(), Some(2), "{output:?}");

    let invalid_value = write_config(dir.path(), "model = seir\nbeta = 2.0\n");
    let output = epibench(
        &["optimize", "--config", "{}", "--out", "{}"],
        &[&invalid_value, &out],
    );
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}

#[test]
fn baseline_subcommand_and_flag_agree() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_SEIR);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let a = epibench(
        &["baseline", "--config", "{}", "--out", "{}"],
        &[&config, &out_a],
    );
    let b = epibench(
        &["optimize", "--config", "{}", "--out", "{}", "--baseline"],
        &[&config, &out_b],
    );
    assert!(a.status.success() && b.status.success());
    let ra = epibo_bench::io::load_report(&out_a.join("report.json")).unwrap();
    let rb = epibo_bench::io::load_report(&out_b.join("report.json")).unwrap();
    assert_eq!(ra.best_full, rb.best_full);
    assert_eq!(ra.best_objective_full, rb.best_objective_full);
}

#[test]
fn simulate_consumes_optimized_controls() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_SEIR);
    let out = dir.path().join("out");
    let output = epibench(
        &["optimize", "--config", "{}", "--out", "{}"],
        &[&config, &out],
    );
    assert!(output.status.success());

    let control = out.join("best_control.txt");
    let sim_out = dir.path().join("sim");
    let output = epibench(
        &[
            "simulate", "--config", "{}", "--out", "{}", "--control", "{}",
        ],
        &[&config, &sim_out, &control],
    );
    assert!(output.status.success(), "{output:?}");
    let table = std::fs::read_to_string(sim_out.join("trajectory.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "t,S,E,I,R,u,cost");
    assert_eq!(table.lines().count(), 21);

    // Zero-control simulation works without a control file.
    let zero_out = dir.path().join("zero");
    let output = epibench(
        &["simulate", "--config", "{}", "--out", "{}"],
        &[&config, &zero_out],
    );
    assert!(output.status.success(), "{output:?}");

    // A control of the wrong length is a config error.
    std::fs::write(dir.path().join("short.txt"), "0.5\n0.5\n").unwrap();
    let output = epibench(
        &["simulate", "--config", "{}", "--out", "{}", "--control", "{}"],
        &[&config, &zero_out, &dir.path().join("short.txt")],
    );
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}

#[test]
fn sweep_writes_table_and_reports_failures() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "model = seir\nt_f = 20\niterations = 3\nn_init = 3\nadam_steps = 2\n\
         d_values = 5, 20\nseeds = 0, 1\nreference_d = 20\n",
    );
    let out = dir.path().join("sweep");
    let output = epibench(&["sweep", "--config", "{}", "--out", "{}"], &[&config, &out]);
    assert!(output.status.success(), "{output:?}");
    let table = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(
        table.lines().next().unwrap(),
        "model,d,fill,seed,aofv,rt_seconds,aofv_ratio,rt_ratio"
    );
    assert_eq!(table.lines().count(), 5);
    assert!(out.join("report_seir_d5_linear_seed0.json").exists());
    assert!(out.join("report_seir_d20_linear_seed1.json").exists());

    // A zero-cost objective makes every AOFV zero, so the ratio against the
    // reference is undefined and each cell is recorded as a failure.
    let degenerate = dir.path().join("degenerate.conf");
    std::fs::write(
        &degenerate,
        "model = seir\nt_f = 20\niterations = 2\nn_init = 3\nadam_steps = 2\n\
         c1 = 0\nc2 = 0\nd_values = 20\nseeds = 0\nreference_d = 20\n",
    )
    .unwrap();
    let out2 = dir.path().join("sweep2");
    let output = epibench(
        &["sweep", "--config", "{}", "--out", "{}"],
        &[&degenerate, &out2],
    );
    assert_eq!(output.status.code(), Some(1), "{output:?}");
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("failed"), "{stderr}");
}
