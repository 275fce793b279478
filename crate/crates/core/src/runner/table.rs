//! CSV files with a mandatory header row. Numbers use the shortest decimal
//! string that parses back to the same `f64`.

use std::path::Path;

use crate::classical::{ClassicalRun, PhasePortrait, Separatrix};
use crate::error::{Error, Result};
use crate::master::MasterRun;
use crate::trajectory::{EnsembleStats, TrajectoryRecord};

pub const TRAJECTORY_HEADER: &[&str] = &["t", "z", "phi", "phi_defined", "n_right_counts_cum", "n_left_counts_cum"];
pub const JUMPS_HEADER: &[&str] = &["t", "detector"];
pub const CLASSICAL_HEADER: &[&str] = &["t", "z", "phi", "energy"];
pub const PORTRAIT_HEADER: &[&str] = &["z", "phi", "H"];
pub const SEPARATRIX_HEADER: &[&str] = &["lobe", "z", "phi"];
pub const ENSEMBLE_HEADER: &[&str] = &["t", "z_mean", "z_sem", "z2_mean", "z2_sem"];
pub const MASTER_HEADER: &[&str] = &["t", "z", "z2", "purity"];

/// Shortest round-trip representation; exponent form only for very small or
/// very large magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Parsed file: header and raw string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let header = reader
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = reader
            .records()
            .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| csv_error(path, e))?;
        Ok(Table { header, rows })
    }

    pub fn has_header(&self, expected: &[&str]) -> bool {
        self.header.iter().map(String::as_str).eq(expected.iter().copied())
    }

    pub fn expect_header(&self, expected: &[&str], path: &Path) -> Result<()> {
        if self.has_header(expected) {
            Ok(())
        } else {
            Err(Error::Parse {
                path: path.to_path_buf(),
                reason: format!("expected columns {:?}, found {:?}", expected, self.header),
            })
        }
    }

    /// Column `name` parsed as numbers.
    pub fn column(&self, name: &str, path: &Path) -> Result<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            reason: format!("missing column {name}"),
        })?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row[idx].parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    reason: format!("row {}: column {name} is not a number: {:?}", i + 1, row[idx]),
                })
            })
            .collect()
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::Parse { path: path.to_path_buf(), reason: e.to_string() }
    }
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trajectory(path: &Path, rec: &TrajectoryRecord) -> Result<()> {
    let counts = rec.cumulative_counts();
    let rows = (0..rec.sample_times.len()).map(|i| {
        let (phi, defined) = match rec.phi_series[i] {
            Some(p) => (fmt_f64(p), "1"),
            None => ("NaN".to_string(), "0"),
        };
        vec![
            fmt_f64(rec.sample_times[i]),
            fmt_f64(rec.z_series[i]),
            phi,
            defined.to_string(),
            counts[i].0.to_string(),
            counts[i].1.to_string(),
        ]
    });
    write_rows(path, TRAJECTORY_HEADER, rows)
}

pub fn write_jumps(path: &Path, rec: &TrajectoryRecord) -> Result<()> {
    let rows = rec
        .jumps
        .iter()
        .map(|j| vec![fmt_f64(j.time), j.detector.label().to_string()]);
    write_rows(path, JUMPS_HEADER, rows)
}

pub fn write_classical(path: &Path, run: &ClassicalRun) -> Result<()> {
    let rows = run
        .times
        .iter()
        .zip(&run.states)
        .zip(&run.energies)
        .map(|((t, s), e)| vec![fmt_f64(*t), fmt_f64(s.z), fmt_f64(s.phi), fmt_f64(*e)]);
    write_rows(path, CLASSICAL_HEADER, rows)
}

pub fn write_portrait(path: &Path, portrait: &PhasePortrait) -> Result<()> {
    let rows = portrait.z.iter().enumerate().flat_map(|(i, z)| {
        portrait
            .phi
            .iter()
            .enumerate()
            .map(move |(j, phi)| vec![fmt_f64(*z), fmt_f64(*phi), fmt_f64(portrait.energy[i][j])])
    });
    write_rows(path, PORTRAIT_HEADER, rows)
}

/// `sep = None` (no hyperbolic point) writes a header-only file.
pub fn write_separatrix(path: &Path, sep: Option<&Separatrix>) -> Result<()> {
    let rows = sep.into_iter().flat_map(|s| {
        s.lobes.iter().enumerate().flat_map(|(lobe, pts)| {
            pts.iter().map(move |p| vec![lobe.to_string(), fmt_f64(p.z), fmt_f64(p.phi)])
        })
    });
    write_rows(path, SEPARATRIX_HEADER, rows)
}

pub fn write_ensemble_mean(path: &Path, stats: &EnsembleStats) -> Result<()> {
    let rows = (0..stats.times.len()).map(|i| {
        vec![
            fmt_f64(stats.times[i]),
            fmt_f64(stats.z_mean[i]),
            fmt_f64(stats.z_sem[i]),
            fmt_f64(stats.z2_mean[i]),
            fmt_f64(stats.z2_sem[i]),
        ]
    });
    write_rows(path, ENSEMBLE_HEADER, rows)
}

pub fn write_master(path: &Path, run: &MasterRun) -> Result<()> {
    let rows = run
        .samples
        .iter()
        .map(|s| vec![fmt_f64(s.t), fmt_f64(s.z), fmt_f64(s.z2), fmt_f64(s.purity)]);
    write_rows(path, MASTER_HEADER, rows)
}
