//! Generated configuration reference and JSON schemas.

use std::fmt::Write as _;
use std::path::Path;

use resetsim_core::clock::DEFAULT_DT;
use resetsim_core::controller::{ControllerConfig, FlashConfig};
use resetsim_core::plants::{BrakeParams, EngineParams, PlantKind, QuadParams, WindSegment};
use resetsim_core::security::DiversificationStrategy;
use serde::Serialize;

use crate::config::{RunConfig, REQUIRED_KEYS, SCHEMA_VERSION};
use crate::plot::PlotSpec;
use crate::sweep::{SweepSpec, DEFAULT_MAX_CELLS};

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

pub fn run_config_schema() -> String {
    pretty(&schemars::schema_for!(RunConfig))
}

pub fn sweep_schema() -> String {
    pretty(&schemars::schema_for!(SweepSpec))
}

pub fn plot_schema() -> String {
    pretty(&schemars::schema_for!(PlotSpec))
}

fn block(out: &mut String, title: &str, json: String) {
    let _ = writeln!(out, "{title}\n\n```json\n{json}\n```\n");
}

/// Markdown reference listing every key and its default.
pub fn config_reference() -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Configuration reference\n");
    let _ = writeln!(
        s,
        "Generated by `resetsim reference`; do not edit by hand. JSON schemas for the three \
         document types live next to this file in `schema/`.\n"
    );
    let _ = writeln!(s, "## Run config\n");
    let _ = writeln!(
        s,
        "Unknown keys are rejected at every level. Required keys: {}. `schema_version` must be {SCHEMA_VERSION}.\n",
        REQUIRED_KEYS.map(|k| format!("`{k}`")).join(", ")
    );
    let rows = [
        ("schema_version", "integer", "required", "Document format version."),
        ("name", "string", "none", "Free-form label."),
        ("comment", "string", "none", "Free-form description."),
        ("plant", "object", "required", "`{\"kind\": \"engine\" | \"quad\" | \"brake\", ...}`, see below."),
        ("controller", "object", "per plant", "Overrides layered on the per-plant controller defaults."),
        ("scheduler", "object or null", "required", "Reset schedule; `null` runs without resets."),
        ("diversification", "object", "path_randomization", "Per-reset diversification strategy."),
        ("attacker", "object or null", "null", "Attacker model stepped with the controller."),
        ("horizon", "number, s", "required", "Simulated time. Must cover one reset interval."),
        ("dt", "number, s", "", "Fixed step, in (0, 0.001]."),
        ("seed", "integer", "required", "Root seed; every random draw derives from it."),
        ("warmup", "number, s", "2 (engine), 1 (quad), 0 (brake)", "Span excluded from plant metrics."),
    ];
    let _ = writeln!(s, "| key | type | default | meaning |\n|---|---|---|---|");
    for (k, t, d, m) in rows {
        let d = if k == "dt" { DEFAULT_DT.to_string() } else { d.to_string() };
        let _ = writeln!(s, "| `{k}` | {t} | {d} | {m} |");
    }
    let _ = writeln!(s);

    let _ = writeln!(s, "### plant\n");
    let _ = writeln!(
        s,
        "Every `params` key is optional and defaults to the value shown. The engine defaults are \
         calibrated: peak ignition torque is solved so that full ignition holds exactly the nominal \
         speed, and viscous friction gives a 2 s unpowered spin-down constant.\n"
    );
    block(&mut s, "Engine (`\"kind\": \"engine\"`), `params`:", pretty(&EngineParams::default()));
    block(&mut s, "Quad (`\"kind\": \"quad\"`), `params`:", pretty(&QuadParams::default()));
    let _ = writeln!(
        s,
        "Quad `wind` is `{{\"segments\": [...]}}`, default calm (no segments). Each segment holds from \
         `start` until the next one: a mean torque plus Ornstein-Uhlenbeck gusts with the given \
         standard deviation and correlation time.\n"
    );
    block(
        &mut s,
        "Wind segment:",
        pretty(&WindSegment { start: 0.0, mean: [0.0; 3], gust_std: [0.0; 3], correlation_time: 0.5 }),
    );
    block(&mut s, "Brake (`\"kind\": \"brake\"`), `params`:", pretty(&BrakeParams::default()));

    let _ = writeln!(s, "### controller\n");
    let _ = writeln!(
        s,
        "All keys optional: `reset` (`{{\"kind\": \"power_cycle\" | \"snapshot_restore\", \"downtime\": s}}`), \
         `downtime` (replaces the downtime of the strategy in effect), `nominal_latency`, `control_period`, \
         `ram_size`, `flash`, `persisted` (name to number map restored on every reset). Defaults per plant:\n"
    );
    for kind in [PlantKind::Engine, PlantKind::Quad, PlantKind::Brake] {
        block(&mut s, &format!("{}:", kind.name()), pretty(&ControllerConfig::for_plant(kind)));
    }
    block(&mut s, "`flash` default:", pretty(&FlashConfig::default()));

    let _ = writeln!(s, "### scheduler\n");
    let _ = writeln!(
        s,
        "- `{{\"mode\": \"periodic\", \"interval\": T_R}}`\n\
         - `{{\"mode\": \"random\", \"low\": T_lo, \"high\": T_hi}}`: uniform draw at each reset\n\
         - `{{\"mode\": \"adaptive\", \"min\": T_min, \"max\": T_max, \"window\": s, \"threshold\": x}}`: \
         `max` while the pooled body-rate standard deviation over the trailing window exceeds `threshold`, else `min`\n\n\
         The first reset fires at t = 0. The reset downtime must be shorter than the smallest interval.\n"
    );

    let _ = writeln!(s, "### diversification\n");
    block(&mut s, "Default:", pretty(&DiversificationStrategy::default()));
    let _ = writeln!(
        s,
        "Other forms: `{{\"kind\": \"canary_rekey\"}}` (slowdown 1) and `{{\"kind\": \"none\"}}` (secret kept across resets).\n"
    );

    let _ = writeln!(s, "### attacker\n");
    let _ = writeln!(
        s,
        "- `{{\"kind\": \"disclosure\", \"collect_time\": s}}`\n\
         - `{{\"kind\": \"guessing\", \"rate\": per_s, \"space\": N}}`\n\
         - `{{\"kind\": \"flash_persist\", \"sector\": i}}`\n\
         - `{{\"kind\": \"defeat_device\", \"accumulation_time\": s}}`\n\n\
         Progress accrues on every step the controller is not Down.\n"
    );

    let _ = writeln!(s, "## Sweep spec\n");
    let _ = writeln!(
        s,
        "| key | default | meaning |\n|---|---|---|\n\
         | `schema_version` | required | {SCHEMA_VERSION} |\n\
         | `base` | required | A complete run config. |\n\
         | `axes` | required | List of `{{\"path\": \"a.b\", \"values\": [...]}}` or zipped `{{\"paths\": [...], \"values\": [[...], ...]}}`, optional `labels` and `name`. |\n\
         | `max_cells` | {DEFAULT_MAX_CELLS} | Cap on the cross-product size. |\n\
         | `seeds` | `derived` | `derived`: cell seed = derive_seed(base seed, cell index); `shared`: base seed everywhere. |\n\n\
         Paths are dotted; numeric parts index arrays. The first axis varies slowest. Failing cells \
         report their error in the `error` column.\n"
    );
    let _ = writeln!(s, "## Plot spec\n");
    block(&mut s, "Defaults:", pretty(&PlotSpec::new("x_column", "y_column", None)));
    s
}

/// Write the reference page and schemas under `dir`.
pub fn write_reference(dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir.join("schema"))?;
    std::fs::write(dir.join("config-reference.md"), config_reference())?;
    std::fs::write(dir.join("schema/run-config.schema.json"), run_config_schema() + "\n")?;
    std::fs::write(dir.join("schema/sweep.schema.json"), sweep_schema() + "\n")?;
    std::fs::write(dir.join("schema/plot.schema.json"), plot_schema() + "\n")?;
    Ok(())
}
