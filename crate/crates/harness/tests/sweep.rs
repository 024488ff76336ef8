use resetsim::metrics::metric_names;
use resetsim::sweep::{parse_sweep, run_sweep, SweepError};
use resetsim::table::CsvTable;
use resetsim_core::plants::PlantKind;

const BRAKE: &str = r#"{
    "schema_version": 1,
    "base": {"schema_version": 1, "plant": {"kind": "brake"},
             "scheduler": {"mode": "periodic", "interval": 1.0}, "horizon": 6.0, "seed": 3},
    "axes": [
        {"paths": ["scheduler.interval", "controller.downtime"], "values": [[1.0, 0.1], [0.125, 0.02]], "labels": ["slow", "fast"]}
    ]
}"#;

fn column(t: &CsvTable, name: &str) -> Vec<f64> {
    let i = t.column(name).unwrap_or_else(|| panic!("{name} in {:?}", t.header));
    t.numeric(i).into_iter().map(|v| v.unwrap()).collect()
}

#[test]
fn brake_sweep_effective_deceleration() {
    let t = run_sweep(&parse_sweep(BRAKE).unwrap(), false).unwrap();
    let a = column(&t, "effective_deceleration");
    assert!((a[0] - 7.20).abs() < 1e-9 && (a[1] - 6.72).abs() < 1e-9, "{a:?}");
    let mut header = vec!["cell_index", "scheduler.interval", "controller.downtime", "label"];
    header.extend(metric_names(PlantKind::Brake, false));
    header.push("error");
    assert_eq!(t.header, header);
    assert_eq!(t.rows[1][3], "fast");
}

#[test]
fn serial_and_parallel_are_byte_identical() {
    let doc = r#"{
        "schema_version": 1,
        "base": {"schema_version": 1,
                 "plant": {"kind": "quad", "wind": {"segments": [{"start": 0, "mean": [0, 0, 0], "gust_std": [0.001, 0.001, 0.001], "correlation_time": 0.5}]}},
                 "controller": {"downtime": 0.003},
                 "scheduler": {"mode": "periodic", "interval": 1.0}, "horizon": 3.0, "seed": 5},
        "axes": [{"path": "scheduler.interval", "values": [0.5, 1.0, 2.0]}, {"path": "controller.downtime", "values": [0.003, 0.6]}]
    }"#;
    let spec = parse_sweep(doc).unwrap();
    let a = run_sweep(&spec, true).unwrap().to_bytes().unwrap();
    let b = run_sweep(&spec, false).unwrap().to_bytes().unwrap();
    assert_eq!(a, b);
    let t = CsvTable::from_reader(&a[..]).unwrap();
    assert_eq!(t.rows.len(), 6);
    // d_R = 0.6 with T_R = 0.5 fails in its own cell only.
    let e = t.column("error").unwrap();
    let failed: Vec<usize> = t.rows.iter().enumerate().filter(|(_, r)| !r[e].is_empty()).map(|(i, _)| i).collect();
    assert_eq!(failed, vec![1]);
    assert!(t.rows[1][e].contains("d_R"));
}

#[test]
fn derived_seeds_differ_per_cell_and_shared_seeds_do_not() {
    let doc = |mode: &str| {
        format!(
            r#"{{"schema_version": 1, "seeds": "{mode}",
                "base": {{"schema_version": 1,
                          "plant": {{"kind": "quad", "wind": {{"segments": [{{"start": 0, "mean": [0, 0, 0], "gust_std": [0.001, 0.001, 0.001], "correlation_time": 0.5}}]}}}},
                          "scheduler": null, "horizon": 2.0, "seed": 5}},
                "axes": [{{"path": "name", "values": ["a", "b"]}}]}}"#
        )
    };
    let stddev = |mode: &str| column(&run_sweep(&parse_sweep(&doc(mode)).unwrap(), false).unwrap(), "rate_stddev");
    let d = stddev("derived");
    let s = stddev("shared");
    assert_ne!(d[0], d[1]);
    assert_eq!(s[0], s[1]);
}

#[test]
fn too_many_cells_rejected() {
    let doc = BRAKE.replace("\"axes\"", "\"max_cells\": 1, \"axes\"");
    assert!(matches!(parse_sweep(&doc), Err(SweepError::TooManyCells { cells: 2, max: 1 })));
}

#[test]
fn bad_base_rejected_up_front() {
    let doc = BRAKE.replace("\"horizon\": 6.0, ", "");
    assert!(matches!(parse_sweep(&doc), Err(SweepError::Base(_))));
}
