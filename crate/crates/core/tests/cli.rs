use std::process::{Command, Output};

use cheshire_core::cli;

fn sim(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cheshire-sim"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env(cli::THREADS_ENV, t),
        None => cmd.env_remove(cli::THREADS_ENV),
    };
    cmd.output().expect("binary runs")
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    for format in ["json", "csv", "table"] {
        let args = ["teleport", "--random", "--seed", "7", "--format", format];
        let a = sim(&args, None);
        let b = sim(&args, None);
        assert_eq!(a.status.code(), Some(0));
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["cheshire", "--format", "json"];
    let one = sim(&args, Some("1"));
    let four = sim(&args, Some("4"));
    let auto = sim(&args, Some("0"));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, auto.stdout);
    assert_eq!(sim(&args, Some("many")).status.code(), Some(2));
}

#[test]
fn json_round_trips() {
    let out = sim(&["teleport", "--alpha", "0.6", "--beta", "0.0+0.8i", "--format", "json"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let report = cli::from_json(&text).unwrap();
    assert_eq!(cli::to_json(&report).unwrap(), text);
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["scenario", "config", "postselection_probability", "weak_values", "teleport", "endgame"] {
        assert!(value.get(key).is_some(), "{key}");
    }
    let first = &value["weak_values"][0];
    assert!(first["analytic"]["re"].is_number() && first["estimates"][0]["abs_err"].is_number());
}

#[test]
fn documented_examples() {
    let out = sim(&["cheshire", "--g", "0.4,0.2,0.1,0.05"], None);
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("postselection probability: 0.250000000000"));

    let out = sim(&["teleport", "--alpha", "0.6", "--beta", "0.8", "--g", "0.1", "--format", "json"], None);
    let report = cli::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let t = report.teleport.unwrap();
    assert!((t.fidelity - 1.0).abs() < 1e-10);
    let want = [1.0, 0.0, 0.0, 1.0];
    for chunk in report.weak_values.chunks(4) {
        for (e, w) in chunk.iter().zip(want) {
            assert!((e.analytic.re - w).abs() < 1e-12 && e.analytic.im.abs() < 1e-12);
        }
    }
}

#[test]
fn report_goes_to_out_file() {
    let dir = std::env::temp_dir().join(format!("cheshire-sim-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.csv");
    let out = sim(&["cheshire", "--format", "csv", "--out", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("scenario,observable,g,analytic_re,analytic_im,est_re,est_im,abs_err\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn invalid_configs_exit_with_2() {
    for args in [
        &["cheshire", "--g", "0.05,0.1"][..],
        &["cheshire", "--g", "0.0001"],
        &["cheshire", "--n", "1000"],
        &["cheshire", "--sigma", "-1"],
        &["cheshire", "--g", "10"],
        &["teleport", "--alpha", "0", "--beta", "0"],
        &["teleport", "--alpha", "1+"],
        &["teleport", "--random"],
        &["bogus"],
    ] {
        let out = sim(args, None);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
    assert_eq!(sim(&["--help"], None).status.code(), Some(0));
}
