//! Black-box behavior of the binary: exit codes, output formats, files,
//! configuration precedence, and the thread cap.

use std::path::PathBuf;
use std::process::{Command, Output};

use bellsep_core::json::table_to_json;
use bellsep_core::model::CorrelationTable;
use bellsep_core::polytope::chsh_optimal_directions;

fn bellsep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellsep"))
        .args(args)
        .env("BELLSEP_THREADS", "2")
        .output()
        .unwrap()
}

fn stdout_of(args: &[&str]) -> String {
    let out = bellsep(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_singlet_table(dir: &tempfile::TempDir) -> PathBuf {
    let [x0, x1, y0, y1] = chsh_optimal_directions();
    let table = CorrelationTable::singlet_grid(&[x0, x1], &[y0, y1]).unwrap();
    let path = dir.path().join("table.json");
    std::fs::write(&path, table_to_json(&table).to_string()).unwrap();
    path
}

#[test]
fn success_exits_zero() {
    let out = bellsep(&["cmd-report", "--model", "brans"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
}

#[test]
fn help_and_version_exit_zero() {
    for args in [["--help"], ["--version"]] {
        let out = bellsep(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
    }
    let out = bellsep(&["chsh", "--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_and_input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    let ternary = dir.path().join("ternary.json");
    std::fs::write(
        &ternary,
        r#"{"settings": [["x0", "y0"]], "outcomes": [3, 3],
            "probs": {"x0:y0": [[0.2, 0.1, 0.0], [0.1, 0.2, 0.1], [0.0, 0.1, 0.2]]}}"#,
    )
    .unwrap();
    let garbage = garbage.display().to_string();
    let ternary = ternary.display().to_string();
    let missing = dir.path().join("missing.json").display().to_string();

    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["--no-such-flag"], "unknown flag"),
        (vec!["no-such-command"], "unknown subcommand"),
        (vec!["cmd-report", "--model", "bohm"], "unknown model"),
        (vec!["cmd-report"], "model or file required"),
        (vec!["separability"], "missing positional"),
        (vec!["separability", &missing], "missing input file"),
        (vec!["separability", &garbage], "malformed JSON"),
        (vec!["separability", &ternary], "ternary outcomes"),
        (vec!["chsh", "--model", "brans", "--angles", "0", "1", "2"], "three angles"),
        (vec!["chsh", "--scan", "5"], "scan without model"),
        (vec!["chsh", "--model", "brans", "--samples", "0"], "zero samples"),
        (vec!["cmd-report", "--model", "brans", "--output", "yaml"], "bad format"),
        (vec!["cmd-report", "--model", "brans", "--quadrature-order", "1"], "tiny order"),
    ];
    for (args, what) in cases {
        let out = bellsep(&args);
        assert_eq!(out.status.code(), Some(1), "{what}: {args:?} should exit 1");
        assert!(!out.stderr.is_empty(), "{what}: expected a diagnostic on stderr");
    }

    let out = bellsep(&["separability", &ternary]);
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("binary"),
        "d > 2 rejection should name the binary-outcome restriction"
    );
}

#[test]
fn failed_checks_exit_two() {
    // One sample per correlator gives zero plug-in standard error, so the
    // 5σ agreement check must fail — deterministically, whatever the seed.
    let out = bellsep(&["chsh", "--model", "brans", "--samples", "1", "--check"]);
    assert_eq!(out.status.code(), Some(2));

    let out = bellsep(&[
        "singlet-check",
        "--model",
        "degorre",
        "--pairs",
        "4",
        "--samples",
        "1",
        "--check",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_and_csv_report_the_same_numbers() {
    let json: serde_json::Value =
        serde_json::from_str(&stdout_of(&["cmd-report", "--model", "degorre"])).unwrap();
    let csv = stdout_of(&["cmd-report", "--model", "degorre", "--output", "csv"]);

    let mut csv_values = std::collections::BTreeMap::new();
    for line in csv.lines().skip(1) {
        let (key, value) = line.split_once(',').unwrap();
        csv_values.insert(key.to_string(), value.to_string());
    }
    for key in ["h_max", "inf_hxy", "upper_bound", "exact_value"] {
        let from_json = json[key].as_f64().unwrap_or_else(|| panic!("missing {key}"));
        let from_csv: f64 = csv_values[key].parse().unwrap();
        assert_eq!(from_json, from_csv, "{key} differs between formats");
    }
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let path_str = path.display().to_string();

    let on_stdout = stdout_of(&["cmd-report", "--model", "hall"]);
    let out = bellsep(&["cmd-report", "--model", "hall", "--out", &path_str]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty(), "--out should suppress stdout");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), on_stdout);

    let bad = dir.path().join("no-such-dir").join("report.json").display().to_string();
    let out = bellsep(&["cmd-report", "--model", "hall", "--out", &bad]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_supplies_defaults_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"seed": 5, "samples": 30000, "output": "csv"}"#).unwrap();
    let cfg = cfg.display().to_string();

    let via_config = stdout_of(&["chsh", "--model", "brans", "--config", &cfg]);
    let via_flags = stdout_of(&[
        "chsh",
        "--model",
        "brans",
        "--seed",
        "5",
        "--samples",
        "30000",
        "--output",
        "csv",
    ]);
    assert_eq!(via_config, via_flags);

    let overridden = stdout_of(&["chsh", "--model", "brans", "--config", &cfg, "--seed", "7"]);
    let direct = stdout_of(&[
        "chsh",
        "--model",
        "brans",
        "--seed",
        "7",
        "--samples",
        "30000",
        "--output",
        "csv",
    ]);
    assert_eq!(overridden, direct);
    assert_ne!(via_config, overridden, "different seeds must change the estimates");

    let list = dir.path().join("list.json");
    std::fs::write(&list, "[1, 2, 3]").unwrap();
    let out = bellsep(&["chsh", "--model", "brans", "--config", &list.display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn thread_cap_does_not_change_results_but_must_be_valid() {
    let args = ["chsh", "--model", "degorre", "--samples", "200000", "--seed", "9"];
    let run_with = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_bellsep"))
            .args(args)
            .env("BELLSEP_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run_with("1"), run_with("4"));

    let out = Command::new(env!("CARGO_BIN_EXE_bellsep"))
        .args(["cmd-report", "--model", "brans"])
        .env("BELLSEP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_flag_reproduces_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_singlet_table(&dir).display().to_string();
    let first = dir.path().join("a.json").display().to_string();
    let second = dir.path().join("b.json").display().to_string();

    for (path, _) in [(&first, 0), (&second, 1)] {
        let out = bellsep(&["separability", &table, "--out", path]);
        assert!(out.status.success());
    }
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap(),
        "identical invocations must write identical files"
    );
}
