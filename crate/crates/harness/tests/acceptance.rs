//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Built with `harness = false`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use resetsim::attack::{analytic_prediction, run_campaign};
use resetsim::cli;
use resetsim::config::{parse_config, RunConfig};
use resetsim::sweep::{parse_sweep, SweepSpec};
use resetsim_core::controller::stabilization_time;
use resetsim_core::plants::metrics::{attitude_rate_stddev, engine_speed_ratio};
use resetsim_core::plants::{effective_deceleration, EngineParams, PlantConfig};
use resetsim_core::scheduler::{recovery_ratio, safety_condition, ResetMode, SafetyParams};
use resetsim_core::security::AttackerModel;
use resetsim_core::sim::run_scenario;

const ENGINE_INTERVALS: [f64; 5] = [1.0, 0.5, 0.25, 0.125, 0.0625];

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> RunConfig {
    let text = std::fs::read_to_string(configs().join(name)).expect("bundled config");
    parse_config(&text).expect("bundled config parses")
}

fn load_sweep(name: &str) -> SweepSpec {
    let text = std::fs::read_to_string(configs().join(name)).expect("bundled sweep");
    parse_sweep(&text).expect("bundled sweep parses")
}

fn sweep_base(name: &str) -> RunConfig {
    let spec = load_sweep(name);
    parse_config(&spec.base.to_string()).expect("sweep base parses")
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn c1_safety() -> Verdict {
    let (tr, dr, ds, dss) = (0.125, 0.020, 0.039, 0.066);
    let holds = safety_condition(tr, dr, ds, dss);
    let equality = (tr - (dr + ds + dss)).abs() < 1e-12;
    let d = recovery_ratio(&SafetyParams { interval: tr, downtime: dr, stabilization: ds, stable: dss }).unwrap();
    verdict(
        holds && equality && (d - 1.119).abs() <= 0.001,
        format!("condition={holds} equality={equality} D={d:.4} (want 1.119 +- 0.001)"),
    )
}

fn c2_stabilization() -> Verdict {
    let ds = stabilization_time(&PlantConfig::Engine { params: EngineParams::default() });
    verdict((0.039..=0.040 + 1e-12).contains(&ds), format!("d_S={ds:.5} s at 4500 RPM (want [0.039, 0.040])"))
}

fn c3_brake() -> Verdict {
    let a1 = effective_deceleration(8.0, 0.0, 1.0, 0.1).unwrap();
    let a2 = effective_deceleration(8.0, 0.0, 0.125, 0.020).unwrap();
    let a0 = effective_deceleration(8.0, 0.0, 1.0, 0.0).unwrap();
    let rel = |a: f64, r: f64| (a - r).abs() / r;
    verdict(
        rel(a1, 7.27) <= 0.05 && rel(a2, 6.96) <= 0.05 && a0 == 8.0,
        format!(
            "1 s/100 ms: {a1:.3} vs 7.27 ({:.1}%), 125 ms/20 ms: {a2:.3} vs 6.96 ({:.1}%), d_R=0: {a0}",
            100.0 * rel(a1, 7.27),
            100.0 * rel(a2, 6.96)
        ),
    )
}

fn c4_flash() -> Verdict {
    const TRIALS: u64 = 1000;
    let base = load("attack_flash_persist.json");
    let mut failures = Vec::new();
    let mut report = Vec::new();
    let short = [
        ("periodic 0.125", ResetMode::Periodic { interval: 0.125 }),
        ("periodic 0.5", ResetMode::Periodic { interval: 0.5 }),
        ("periodic 0.670", ResetMode::Periodic { interval: 0.670 }),
        ("random [0.3, 0.67]", ResetMode::Random { low: 0.3, high: 0.67 }),
    ];
    for (name, mode) in short {
        let mut c = base.clone();
        c.scheduler = Some(mode);
        c.horizon = 5.0;
        let r = run_campaign(&c, TRIALS, true).unwrap();
        report.push(format!("{name}: {}", r.successes));
        if r.successes != 0 {
            failures.push(name);
        }
    }
    for (name, interval) in [("periodic 2.0", 2.0), ("periodic 0.7", 0.7)] {
        let mut c = base.clone();
        c.scheduler = Some(ResetMode::Periodic { interval });
        let r = run_campaign(&c, TRIALS, true).unwrap();
        report.push(format!("{name}: {}", r.successes));
        if r.successes == 0 {
            failures.push(name);
        }
    }
    verdict(failures.is_empty(), format!("{TRIALS} trials each, successes {}", report.join(", ")))
}

fn c5_probability() -> Verdict {
    let c = load("attack_guessing.json");
    let (uptime, epochs, p) = analytic_prediction(&c).unwrap();
    let n = 10_000u64;
    let r = run_campaign(&c, n, true).unwrap();
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    let z = (r.success_rate - p) / sigma;
    let d = load("attack_disclosure.json");
    let AttackerModel::Disclosure { collect_time } = d.attacker.clone().unwrap() else { unreachable!() };
    let (du, _, _) = analytic_prediction(&d).unwrap();
    let dr = run_campaign(&d, 1000, true).unwrap();
    verdict(
        z.abs() <= 3.0 && (p - 0.595).abs() < 0.001 && collect_time > du && dr.successes == 0,
        format!(
            "guessing u={uptime:.3} k={epochs}: empirical {:.4} vs analytic {p:.4} (z={z:+.2}, n={n}); disclosure T={collect_time} > u={du:.2}: {}/{} successes",
            r.success_rate, dr.successes, dr.trials
        ),
    )
}

/// Engine speed in percent, `None` when the engine stalled.
fn engine_speed(interval: f64, downtime: f64) -> Option<f64> {
    let mut c = load("ecu_default.json");
    c.scheduler = Some(ResetMode::Periodic { interval });
    c.controller.downtime = Some(downtime);
    let trace = run_scenario(&c.scenario()).unwrap();
    engine_speed_ratio(&trace, 4500.0, c.warmup()).ok()
}

fn stall_boundary(interval: f64) -> Option<f64> {
    let (mut lo, mut hi) = (0.0, interval * 0.999);
    if engine_speed(interval, lo).is_none() || engine_speed(interval, hi).is_some() {
        return None;
    }
    while hi - lo > 2e-4 {
        let mid = 0.5 * (lo + hi);
        if engine_speed(interval, mid).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn c6_engine() -> Verdict {
    let at_1s = engine_speed(1.0, 0.020);
    let spec = load_sweep("engine_sweep.json");
    let downtimes: Vec<f64> = spec.axes[1].values.iter().map(|v| v.as_f64().unwrap()).collect();
    let mut monotone = true;
    for tr in ENGINE_INTERVALS {
        // Stalled counts as below any speed.
        let speeds: Vec<f64> = downtimes
            .iter()
            .filter(|&&d| d < tr)
            .map(|&d| engine_speed(tr, d).unwrap_or(f64::NEG_INFINITY))
            .collect();
        monotone &= speeds.windows(2).all(|w| w[1] <= w[0]);
    }
    let bounds: Vec<Option<f64>> = ENGINE_INTERVALS.iter().map(|&tr| stall_boundary(tr)).collect();
    let exists = bounds.iter().all(Option::is_some);
    let ordered = exists && bounds.windows(2).all(|w| w[1] < w[0]);
    let shown: Vec<String> = ENGINE_INTERVALS
        .iter()
        .zip(&bounds)
        .map(|(tr, b)| format!("{tr}:{}", b.map_or("none".into(), |b| format!("{:.1}ms", b * 1e3))))
        .collect();
    verdict(
        at_1s.is_some_and(|s| s >= 99.0) && monotone && ordered,
        format!(
            "speed(1 s, 20 ms)={}%, monotone in d_R={monotone}, stall boundary d_R by T_R [{}]",
            at_1s.map_or("stalled".into(), |s| format!("{s:.2}")),
            shown.join(" ")
        ),
    )
}

fn quad_stddev(c: &RunConfig) -> f64 {
    let trace = run_scenario(&c.scenario()).unwrap();
    attitude_rate_stddev(&trace, c.warmup()).unwrap()
}

fn c7_quad() -> Verdict {
    let base = sweep_base("quad_r_sweep.json");
    let with = |mode: Option<ResetMode>| {
        let mut c = base.clone();
        c.scheduler = mode;
        quad_stddev(&c)
    };
    let s0 = with(None);
    let s8 = with(Some(ResetMode::Periodic { interval: 8.0 }));
    let s025 = with(Some(ResetMode::Periodic { interval: 0.25 }));
    verdict(
        (s8 - s0).abs() / s0 <= 0.10 && s025 >= 2.0 * s0,
        format!("baseline {s0:.5}, T_R=8 s {s8:.5} ({:.3}x), T_R=0.25 s {s025:.5} ({:.1}x)", s8 / s0, s025 / s0),
    )
}

fn c8_adaptive() -> Verdict {
    let base = sweep_base("quad_att_wind.json");
    let spec = load_sweep("quad_att_wind.json");
    let modes: Vec<ResetMode> =
        spec.axes[0].values[..3].iter().map(|v| serde_json::from_value(v.clone()).unwrap()).collect();
    let mut ok = true;
    let mut report = Vec::new();
    for seed in 1..=4 {
        let s: Vec<f64> = modes
            .iter()
            .map(|m| {
                let mut c = base.clone();
                c.seed = seed;
                c.scheduler = Some(m.clone());
                quad_stddev(&c)
            })
            .collect();
        let (adaptive, fixed1, fixed8) = (s[0], s[1], s[2]);
        ok &= adaptive <= fixed1 && (adaptive - fixed8).abs() / fixed8 <= 0.15;
        report.push(format!("seed {seed}: {:.3}x T8, {:.3}x T1", adaptive / fixed8, adaptive / fixed1));
    }
    verdict(ok, format!("adaptive stddev relative to fixed schedules: {}", report.join("; ")))
}

fn c9_defeat() -> Verdict {
    let c = load("attack_defeat_device.json");
    let with = run_campaign(&c, 5, true).unwrap();
    let mut bare = c.clone();
    bare.scheduler = None;
    let without = run_campaign(&bare, 5, true).unwrap();
    let t = without.mean_success_time;
    verdict(
        with.successes == 0 && without.successes == without.trials,
        format!(
            "T_accum=300 s over {} s: {}/{} with 1 s resets, {}/{} without resets (triggered at {} s)",
            c.horizon,
            with.successes,
            with.trials,
            without.successes,
            without.trials,
            t.map_or("-".into(), |t| format!("{t:.1}"))
        ),
    )
}

fn cli_run(args: &[&str]) -> i32 {
    let mut argv = vec!["resetsim"];
    argv.extend_from_slice(args);
    cli::run(argv, &mut std::io::sink(), &mut std::io::sink())
}

fn c10_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_str().unwrap().to_owned();
    let cfg = configs();
    let ecu = cfg.join("ecu_default.json");
    let sweep = cfg.join("engine_sweep.json");
    let plot = cfg.join("plots/engine_sweep.json");
    let ecu = ecu.to_str().unwrap();
    let sweep = sweep.to_str().unwrap();
    let plot = plot.to_str().unwrap();
    let codes = [
        cli_run(&["run", "--config", ecu, "--out", &p("run1")]),
        cli_run(&["run", "--config", ecu, "--out", &p("run2")]),
        cli_run(&["sweep", "--config", sweep, "--out", &p("par")]),
        cli_run(&["sweep", "--config", sweep, "--out", &p("ser"), "--serial"]),
        cli_run(&["plot", "--in", &p("par/sweep.csv"), "--spec", plot, "--out", &p("par.svg")]),
        cli_run(&["plot", "--in", &p("ser/sweep.csv"), "--spec", plot, "--out", &p("ser.svg")]),
    ];
    let same = |a: &str, b: &str| std::fs::read(p(a)).ok().is_some_and(|x| Some(x) == std::fs::read(p(b)).ok());
    let checks = [
        ("trace.csv", same("run1/trace.csv", "run2/trace.csv")),
        ("metrics.csv", same("run1/metrics.csv", "run2/metrics.csv")),
        ("sweep.csv serial/parallel", same("par/sweep.csv", "ser/sweep.csv")),
        ("svg", same("par.svg", "ser.svg")),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    verdict(
        codes.iter().all(|&c| c == 0) && failed.is_empty(),
        format!("exit codes {codes:?}, differing outputs: {failed:?}"),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        ("safety calculus", c1_safety),
        ("stabilization time", c2_stabilization),
        ("brake effective deceleration", c3_brake),
        ("flash persistence bound", c4_flash),
        ("attack probability", c5_probability),
        ("engine sweep properties", c6_engine),
        ("quad stability", c7_quad),
        ("adaptive wind schedule", c8_adaptive),
        ("defeat device", c9_defeat),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name}: {} [{:.1}s]", i + 1, v.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
