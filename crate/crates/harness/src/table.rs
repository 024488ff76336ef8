//! CSV tables with fixed numeric formatting.

use std::io;
use std::path::Path;

use resetsim_core::plants::{ActuatorCommand, Observation, PlantKind, RPM_TO_RAD_S};
use resetsim_core::sim::TraceLog;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("table has no header row")]
    NoHeader,
}

/// 17 significant digits in scientific notation; identical values always
/// print identically. Non-finite values print as `nan`, `inf`, `-inf`.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric view of a column; empty or unparsable cells are `None`.
    pub fn numeric(&self, col: usize) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .map(|r| r.get(col).and_then(|c| c.parse::<f64>().ok()))
            .collect()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, TableError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| TableError::Io(e.into_error()))
    }

    pub fn write(&self, path: &Path) -> Result<(), TableError> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn from_reader<R: io::Read>(r: R) -> Result<Self, TableError> {
        let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
        let mut records = rd.records();
        let header = match records.next() {
            Some(h) => h?.iter().map(str::to_owned).collect(),
            None => return Err(TableError::NoHeader),
        };
        let mut rows = Vec::new();
        for rec in records {
            rows.push(rec?.iter().map(str::to_owned).collect());
        }
        Ok(Self { header, rows })
    }

    pub fn read(path: &Path) -> Result<Self, TableError> {
        Self::from_reader(std::fs::File::open(path)?)
    }
}

fn bool_cell(b: bool) -> String {
    if b { "1".into() } else { "0".into() }
}

/// Per-step trace as a table.
pub fn trace_table(trace: &TraceLog) -> CsvTable {
    let mut header: Vec<&str> = vec!["t", "phase", "reset", "epoch", "controller_output"];
    header.extend(match trace.plant {
        PlantKind::Engine => vec!["omega", "rpm", "crank_angle", "stalled", "ignition"],
        PlantKind::Quad => vec!["roll", "pitch", "yaw", "roll_rate", "pitch_rate", "yaw_rate", "m0", "m1", "m2", "m3"],
        PlantKind::Brake => vec!["speed", "distance", "brake"],
    });
    header.extend(["reset_interval", "reset_metric", "attacker_progress", "attack_success"]);
    let mut table = CsvTable::new(header.into_iter().map(String::from).collect());
    for r in &trace.rows {
        let mut row = vec![
            fmt_num(r.t),
            r.phase.name().to_owned(),
            bool_cell(r.reset),
            r.epoch.to_string(),
            bool_cell(r.controller_output),
        ];
        match r.observation {
            Observation::Engine { omega, crank_angle, stalled } => {
                row.extend([fmt_num(omega), fmt_num(omega / RPM_TO_RAD_S), fmt_num(crank_angle), bool_cell(stalled)]);
            }
            Observation::Quad { angles, rates } => {
                row.extend(angles.iter().chain(rates.iter()).map(|v| fmt_num(*v)));
            }
            Observation::Brake { speed, distance } => row.extend([fmt_num(speed), fmt_num(distance)]),
        }
        match r.command {
            ActuatorCommand::Ignition(b) | ActuatorCommand::Brake(b) => row.push(bool_cell(b)),
            ActuatorCommand::Motors(m) => row.extend(m.iter().map(|v| fmt_num(*v))),
        }
        row.extend([
            fmt_opt(r.reset_interval),
            fmt_opt(r.reset_metric),
            fmt_num(r.attacker_progress),
            bool_cell(r.attack_success),
        ]);
        table.rows.push(row);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(7.2), "7.2000000000000002e0");
        assert_eq!(fmt_num(0.0), "0.0000000000000000e0");
        for v in [0.1, 1.0 / 3.0, 6.72, 1e-300, -12345.678] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut t = CsvTable::new(vec!["a".into(), "b,c".into()]);
        t.rows.push(vec!["1".into(), "x\"y".into()]);
        let bytes = t.to_bytes().unwrap();
        assert_eq!(CsvTable::from_reader(&bytes[..]).unwrap(), t);
    }
}
