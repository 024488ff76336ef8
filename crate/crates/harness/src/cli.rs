//! Command-line interface. Exit codes: 0 success, 1 usage or config error,
//! 2 runtime error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use resetsim_core::plants::effective_deceleration;
use resetsim_core::scheduler::{recovery_ratio, safety_condition, SafetyParams};
use resetsim_core::security::{campaign_success_prob, AttackerModel};

use crate::attack::{run_campaign, summary_table, trials_table};
use crate::config::{parse_config, RunConfig};
use crate::metrics::run_config;
use crate::plot::{emit_plot, parse_plot_spec, PlotSpec};
use crate::reference::write_reference;
use crate::sweep::{parse_sweep, run_sweep, set_path};
use crate::table::{fmt_opt, trace_table, CsvTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "resetsim", version, about = "Co-simulation of reset-and-diversify controllers on inertial plants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario; writes trace.csv and metrics.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a parameter sweep; writes sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the base config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Run cells one after another instead of in parallel.
        #[arg(long)]
        serial: bool,
    },
    /// Monte-Carlo attack campaign; writes campaign.csv and trials.csv.
    Attack {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        serial: bool,
    },
    /// Render a CSV table as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        /// Plot spec JSON file; or give --x/--y/--group directly.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed-form calculators.
    Calc(CalcArgs),
    /// Write the configuration reference and JSON schemas.
    Reference {
        #[arg(long, default_value = "docs")]
        out: PathBuf,
    },
}

#[derive(Debug, Args, Default)]
pub struct CalcArgs {
    /// Reset interval T_R, s.
    #[arg(long)]
    pub tr: Option<f64>,
    /// Reset downtime d_R, s.
    #[arg(long)]
    pub dr: Option<f64>,
    /// Stabilization time d_S, s.
    #[arg(long)]
    pub ds: Option<f64>,
    /// Stable duration d_SS, s. Defaults to T_R - d_R - d_S.
    #[arg(long)]
    pub dss: Option<f64>,
    /// Braking deceleration, m/s².
    #[arg(long)]
    pub brake: Option<f64>,
    /// Coasting deceleration, m/s².
    #[arg(long, default_value_t = 0.0)]
    pub coast: f64,
    /// Attacker for the campaign probability: disclosure, guessing,
    /// flash_persist, defeat_device.
    #[arg(long)]
    pub attacker: Option<String>,
    /// Per-epoch uptime u, s. Defaults to T_R - d_R.
    #[arg(long)]
    pub uptime: Option<f64>,
    #[arg(long)]
    pub epochs: Option<u64>,
    /// Attacker time parameter (collect or accumulation time), s.
    #[arg(long)]
    pub time: Option<f64>,
    /// Guesses per second.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Search space size N.
    #[arg(long)]
    pub space: Option<u64>,
    /// Campaign without diversification.
    #[arg(long)]
    pub no_diversify: bool,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

type Outcome = Result<(), Failure>;

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig, Failure> {
    let mut c = parse_config(&read(path)?).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        c.seed = s;
    }
    Ok(c)
}

fn write_table(dir: &Path, name: &str, table: &CsvTable) -> Outcome {
    std::fs::create_dir_all(dir).map_err(runtime_err)?;
    table.write(&dir.join(name)).map_err(runtime_err)
}

/// Parse `args` (including the program name) and execute.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_CONFIG
        }
        Err(Failure::Runtime(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_RUNTIME
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Run { config, seed, out: dir } => {
            let c = load_config(&config, seed)?;
            let (trace, metrics) = run_config(&c).map_err(runtime_err)?;
            write_table(&dir, "trace.csv", &trace_table(&trace))?;
            let mut t = CsvTable::new(metrics.values.iter().map(|(n, _)| n.to_string()).collect());
            t.rows.push(metrics.values.iter().map(|(_, v)| fmt_opt(*v)).collect());
            write_table(&dir, "metrics.csv", &t)?;
            for (n, v) in &metrics.values {
                let _ = writeln!(out, "{n} = {}", v.map_or("-".into(), |v| v.to_string()));
            }
            Ok(())
        }
        Command::Sweep { config, seed, out: dir, serial } => {
            let text = read(&config)?;
            let mut spec = parse_sweep(&text).map_err(|e| config_err(format!("{}: {e}", config.display())))?;
            if let Some(s) = seed {
                set_path(&mut spec.base, "seed", s.into());
            }
            let table = run_sweep(&spec, !serial).map_err(config_err)?;
            write_table(&dir, "sweep.csv", &table)?;
            let failed = table
                .column("error")
                .map_or(0, |e| table.rows.iter().filter(|r| !r[e].is_empty()).count());
            let _ = writeln!(out, "{} cells, {failed} with errors", table.rows.len());
            Ok(())
        }
        Command::Attack { config, trials, seed, out: dir, serial } => {
            if trials == 0 {
                return Err(Failure::Config("--trials must be >= 1".into()));
            }
            let c = load_config(&config, seed)?;
            if c.attacker.is_none() {
                return Err(Failure::Config(format!("{}: attack needs an `attacker`", config.display())));
            }
            let result = run_campaign(&c, trials, !serial).map_err(runtime_err)?;
            write_table(&dir, "campaign.csv", &summary_table(&c, &result))?;
            write_table(&dir, "trials.csv", &trials_table(&c, &result))?;
            let _ = writeln!(
                out,
                "successes {}/{} rate={:.4} ci=[{:.4}, {:.4}]",
                result.successes, result.trials, result.success_rate, result.ci_low, result.ci_high
            );
            Ok(())
        }
        Command::Plot { input, spec, x, y, group, out: path } => {
            let spec = match (spec, x, y) {
                (Some(p), _, _) => parse_plot_spec(&read(&p)?).map_err(config_err)?,
                (None, Some(x), Some(y)) => PlotSpec::new(&x, &y, group.as_deref()),
                _ => return Err(Failure::Config("plot needs --spec or both --x and --y".into())),
            };
            let table = CsvTable::read(&input).map_err(|e| config_err(format!("{}: {e}", input.display())))?;
            let svg = emit_plot(&table, &spec).map_err(config_err)?;
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(runtime_err)?;
            }
            std::fs::write(&path, svg).map_err(runtime_err)
        }
        Command::Calc(args) => {
            for line in calc(&args).map_err(Failure::Config)? {
                let _ = writeln!(out, "{line}");
            }
            Ok(())
        }
        Command::Reference { out: dir } => write_reference(&dir).map_err(runtime_err),
    }
}

/// Evaluate whichever calculators the flags fully determine.
pub fn calc(a: &CalcArgs) -> Result<Vec<String>, String> {
    let mut lines = Vec::new();
    if let (Some(tr), Some(dr), Some(ds)) = (a.tr, a.dr, a.ds) {
        let dss = a.dss.unwrap_or(tr - dr - ds);
        let ok = safety_condition(tr, dr, ds, dss);
        let p = SafetyParams { interval: tr, downtime: dr, stabilization: ds, stable: dss };
        let d = recovery_ratio(&p).map_err(|e| e.to_string())?;
        lines.push(format!("safety: {}, D={d:.3}", if ok { "satisfied" } else { "violated" }));
    }
    if let Some(ab) = a.brake {
        let (Some(tr), Some(dr)) = (a.tr, a.dr) else {
            return Err("--brake needs --tr and --dr".into());
        };
        let e = effective_deceleration(ab, a.coast, tr, dr).map_err(|e| e.to_string())?;
        lines.push(format!("a_eff={e:.3}"));
    }
    if let Some(name) = &a.attacker {
        let model = match name.as_str() {
            "disclosure" => AttackerModel::Disclosure { collect_time: a.time.ok_or("--attacker disclosure needs --time")? },
            "guessing" => AttackerModel::Guessing {
                rate: a.rate.ok_or("--attacker guessing needs --rate")?,
                space: a.space.ok_or("--attacker guessing needs --space")?,
            },
            "flash_persist" => AttackerModel::FlashPersist { sector: 0 },
            "defeat_device" => AttackerModel::DefeatDevice {
                accumulation_time: a.time.ok_or("--attacker defeat_device needs --time")?,
            },
            other => return Err(format!("--attacker: unknown model `{other}`")),
        };
        model.validate()?;
        let uptime = match (a.uptime, a.tr, a.dr) {
            (Some(u), _, _) => u,
            (None, Some(tr), Some(dr)) => tr - dr,
            _ => return Err("--attacker needs --uptime or --tr and --dr".into()),
        };
        let epochs = a.epochs.unwrap_or(1);
        if epochs == 0 {
            return Err("--epochs must be >= 1".into());
        }
        let p = campaign_success_prob(uptime, epochs, &model, !a.no_diversify);
        lines.push(format!("p_campaign={p:.6}"));
    }
    if lines.is_empty() {
        return Err("calc: give --tr --dr --ds [--dss], --brake --tr --dr, or --attacker ...".into());
    }
    Ok(lines)
}
