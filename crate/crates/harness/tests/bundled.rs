//! Bundled configs parse, and the generated docs match the code.

use std::path::{Path, PathBuf};

use resetsim::config::parse_config;
use resetsim::plot::parse_plot_spec;
use resetsim::reference::{config_reference, plot_schema, run_config_schema, sweep_schema};
use resetsim::sweep::parse_sweep;
use resetsim_core::scheduler::ResetMode;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn json_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

#[test]
fn every_bundled_config_parses_and_has_a_comment() {
    let files = json_files(&root().join("configs"));
    assert!(files.len() >= 9, "{files:?}");
    for f in files {
        let text = std::fs::read_to_string(&f).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let comment = value.get("comment").and_then(|c| c.as_str()).unwrap_or("");
        assert!(!comment.is_empty(), "{} lacks a comment", f.display());
        let stem = f.file_stem().unwrap().to_str().unwrap();
        assert_eq!(value["name"], stem, "{}", f.display());
        if value.get("base").is_some() {
            parse_sweep(&text).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        } else {
            parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        }
    }
    for f in json_files(&root().join("configs/plots")) {
        parse_plot_spec(&std::fs::read_to_string(&f).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
    }
}

#[test]
fn ecu_default_values() {
    let c = parse_config(&std::fs::read_to_string(root().join("configs/ecu_default.json")).unwrap()).unwrap();
    assert_eq!(c.scheduler, Some(ResetMode::Periodic { interval: 0.125 }));
    assert_eq!(c.scenario().downtime(), 0.020);
}

#[test]
fn sweep_cell_counts() {
    let count = |n: &str| parse_sweep(&std::fs::read_to_string(root().join("configs").join(n)).unwrap()).unwrap().cell_count();
    assert_eq!(count("engine_sweep.json"), 50);
    assert_eq!(count("quad_r_sweep.json"), 6);
    assert_eq!(count("braking.json"), 2);
}

#[test]
fn docs_are_up_to_date() {
    let docs = root().join("docs");
    let read = |p: &str| std::fs::read_to_string(docs.join(p)).unwrap_or_default();
    let hint = "regenerate with `resetsim reference --out docs`";
    assert_eq!(read("config-reference.md"), config_reference(), "{hint}");
    assert_eq!(read("schema/run-config.schema.json"), run_config_schema() + "\n", "{hint}");
    assert_eq!(read("schema/sweep.schema.json"), sweep_schema() + "\n", "{hint}");
    assert_eq!(read("schema/plot.schema.json"), plot_schema() + "\n", "{hint}");
}
