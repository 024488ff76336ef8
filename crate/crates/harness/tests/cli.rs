use std::path::{Path, PathBuf};

use resetsim::cli::{run, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["resetsim"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn calc_safety() {
    let (code, out, _) = cli(&["calc", "--tr", "0.125", "--dr", "0.020", "--ds", "0.039", "--dss", "0.066"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "safety: satisfied, D=1.119\n");
}

#[test]
fn calc_violated_safety() {
    let (_, out, _) = cli(&["calc", "--tr", "0.1", "--dr", "0.020", "--ds", "0.039", "--dss", "0.066"]);
    assert!(out.starts_with("safety: violated"), "{out}");
}

#[test]
fn calc_brake() {
    let (code, out, _) = cli(&["calc", "--brake", "8", "--tr", "1.0", "--dr", "0.1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "a_eff=7.200\n");
}

#[test]
fn calc_campaign() {
    let (code, out, _) =
        cli(&["calc", "--attacker", "guessing", "--rate", "1000", "--space", "65536", "--uptime", "0.98", "--epochs", "60"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "p_campaign=0.595050\n");
    let (_, out, _) = cli(&["calc", "--attacker", "disclosure", "--time", "1.5", "--tr", "1", "--dr", "0.02", "--epochs", "60"]);
    assert_eq!(out, "p_campaign=0.000000\n");
}

#[test]
fn calc_errors_exit_one() {
    assert_eq!(cli(&["calc"]).0, EXIT_CONFIG);
    assert_eq!(cli(&["calc", "--brake", "8"]).0, EXIT_CONFIG);
    assert_eq!(cli(&["calc", "--brake", "8", "--tr", "0.1", "--dr", "0.2"]).0, EXIT_CONFIG);
    assert_eq!(cli(&["calc", "--attacker", "telepathy", "--uptime", "1"]).0, EXIT_CONFIG);
}

#[test]
fn usage_errors_name_the_flag() {
    let (code, _, err) = cli(&["run", "--config", "x.json", "--out", "o", "--bogus"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("--bogus"), "{err}");
    assert_eq!(cli(&["frobnicate"]).0, EXIT_CONFIG);
    assert_eq!(cli(&[]).0, EXIT_CONFIG);
}

#[test]
fn help_and_version_exit_zero() {
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("sweep"));
    assert_eq!(cli(&["--version"]).0, EXIT_OK);
}

#[test]
fn missing_or_invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    assert_eq!(cli(&["run", "--config", "/nonexistent.json", "--out", out]).0, EXIT_CONFIG);
    let bad = write(dir.path(), "bad.json", "{}");
    let (code, _, err) = cli(&["run", "--config", &bad, "--out", out]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("horizon"), "{err}");
    let ecu = configs().join("ecu_default.json");
    assert_eq!(cli(&["attack", "--config", ecu.to_str().unwrap(), "--trials", "3", "--out", out]).0, EXIT_CONFIG);
}

#[test]
fn divergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "div.json",
        r#"{"schema_version": 1,
            "plant": {"kind": "quad", "wind": {"segments": [{"start": 0, "mean": [1e307, 0, 0], "gust_std": [0, 0, 0], "correlation_time": 0.5}]}},
            "scheduler": null, "horizon": 1.0, "seed": 1}"#,
    );
    let out = dir.path().join("o");
    let (code, _, err) = cli(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_RUNTIME, "{err}");
}

#[test]
fn run_writes_trace_and_metrics_and_seed_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let ecu = configs().join("ecu_default.json");
    let ecu = ecu.to_str().unwrap();
    let p = |s: &str| dir.path().join(s).to_str().unwrap().to_owned();
    assert_eq!(cli(&["run", "--config", ecu, "--out", &p("a")]).0, EXIT_OK);
    assert_eq!(cli(&["run", "--config", ecu, "--seed", "1", "--out", &p("b")]).0, EXIT_OK);
    let read = |s: &str| std::fs::read(p(s)).unwrap();
    assert_eq!(read("a/metrics.csv"), read("b/metrics.csv"));
    assert_eq!(read("a/trace.csv"), read("b/trace.csv"));
    let metrics = String::from_utf8(read("a/metrics.csv")).unwrap();
    assert!(metrics.starts_with("speed_pct,stalled,stall_time,reset_count\n"), "{metrics}");
    let trace = String::from_utf8(read("a/trace.csv")).unwrap();
    // Header plus one row per step.
    assert_eq!(trace.lines().count(), 1 + 20_000);
}

#[test]
fn seed_changes_stochastic_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "q.json",
        r#"{"schema_version": 1,
            "plant": {"kind": "quad", "wind": {"segments": [{"start": 0, "mean": [0, 0, 0], "gust_std": [0.001, 0.001, 0.001], "correlation_time": 0.5}]}},
            "scheduler": {"mode": "periodic", "interval": 1.0}, "horizon": 3.0, "seed": 1}"#,
    );
    let p = |s: &str| dir.path().join(s).to_str().unwrap().to_owned();
    cli(&["run", "--config", &cfg, "--out", &p("a")]);
    cli(&["run", "--config", &cfg, "--seed", "2", "--out", &p("b")]);
    assert_ne!(std::fs::read(p("a/trace.csv")).unwrap(), std::fs::read(p("b/trace.csv")).unwrap());
}

#[test]
fn attack_writes_campaign_and_trials() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("attack_flash_persist.json");
    let out = dir.path().join("o");
    let (code, stdout, _) =
        cli(&["attack", "--config", cfg.to_str().unwrap(), "--trials", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.starts_with("successes 4/4"), "{stdout}");
    let trials = std::fs::read_to_string(out.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 5);
    let campaign = std::fs::read_to_string(out.join("campaign.csv")).unwrap();
    assert!(campaign.starts_with("attacker,"), "{campaign}");
    assert_eq!(cli(&["attack", "--config", cfg.to_str().unwrap(), "--trials", "0", "--out", "x"]).0, EXIT_CONFIG);
}

#[test]
fn plot_from_flags_and_unknown_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "t.csv", "a,b,g\n1,2,x\n2,3,x\n1,1,y\n");
    let svg = dir.path().join("sub/p.svg");
    let svg = svg.to_str().unwrap();
    assert_eq!(cli(&["plot", "--in", &csv, "--x", "a", "--y", "b", "--group", "g", "--out", svg]).0, EXIT_OK);
    let text = std::fs::read_to_string(svg).unwrap();
    assert_eq!(text.matches("class=\"series\"").count(), 2);
    let (code, _, err) = cli(&["plot", "--in", &csv, "--x", "a", "--y", "zz", "--out", svg]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("zz"), "{err}");
    assert_eq!(cli(&["plot", "--in", &csv, "--out", svg]).0, EXIT_CONFIG);
}
