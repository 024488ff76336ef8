use std::path::Path;

use resetsim::plot::{emit_plot, parse_plot_spec};
use resetsim::sweep::{parse_sweep, run_sweep};

#[test]
fn engine_sweep_plot_has_one_series_per_interval() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let spec = parse_sweep(&std::fs::read_to_string(root.join("engine_sweep.json")).unwrap()).unwrap();
    let table = run_sweep(&spec, true).unwrap();
    let plot = parse_plot_spec(&std::fs::read_to_string(root.join("plots/engine_sweep.json")).unwrap()).unwrap();
    let svg = emit_plot(&table, &plot).unwrap();
    assert_eq!(svg.matches("class=\"series\"").count(), 5);
    assert!(svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg, emit_plot(&table, &plot).unwrap());
}
