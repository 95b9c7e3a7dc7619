//! CSV tables and the JSON run manifest.
//!
//! Numbers are written in Rust's shortest round-trip form, so reading a file
//! back gives bit-identical values. Times are in s, frequencies in rad/s.

use std::fs::File;
use std::path::{Path, PathBuf};

use nmor_core::correlation::{CorrelationFunction, FieldTracePair};
use nmor_core::noise::FrequencyTrace;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::harness::SweepRow;
use crate::HarnessError;

/// Allowed deviation of a time step from the mean step, relative.
pub const GRID_JITTER: f64 = 1e-6;

pub const SWEEP_HEADER: [&str; 7] =
    ["b_gauss", "omega_cb_mhz", "transmission", "phi", "g2_zero", "g2_zero_stderr", "g2_closed_form"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path, e: csv::Error) -> HarnessError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => HarnessError::Io { path: path.to_path_buf(), source },
        kind => HarnessError::Parse { path: path.to_path_buf(), line, message: format!("{kind:?}") },
    }
}

fn write_table<const N: usize>(path: &Path, header: [&str; N], rows: impl Iterator<Item = [f64; N]>) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(File::create(path).map_err(io_err(path))?);
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

/// Rows of an N-column numeric table with a header line, each with its line
/// number.
fn read_table<const N: usize>(path: &Path) -> Result<Vec<(u64, [f64; N])>, HarnessError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(file);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| HarnessError::Parse { path: path.to_path_buf(), line, message };
        if rec.len() != N {
            return Err(bad(format!("expected {N} columns, found {}", rec.len())));
        }
        let mut row = [0.0; N];
        for (slot, field) in row.iter_mut().zip(rec.iter()) {
            *slot = field.parse().map_err(|_| bad(format!("not a number: {field:?}")))?;
        }
        rows.push((line, row));
    }
    Ok(rows)
}

/// Start and step of a time column, checked for uniform spacing.
fn uniform_grid(path: &Path, rows: &[(u64, f64)]) -> Result<(f64, f64), HarnessError> {
    let (first, last) = (rows[0].1, rows[rows.len() - 1].1);
    let dt = (last - first) / (rows.len() - 1) as f64;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(HarnessError::NonuniformGrid { path: path.to_path_buf(), line: rows[0].0 });
    }
    for (k, &(line, t)) in rows.iter().enumerate() {
        if ((t - first) - k as f64 * dt).abs() > GRID_JITTER * dt {
            return Err(HarnessError::NonuniformGrid { path: path.to_path_buf(), line });
        }
    }
    Ok((first, dt))
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), HarnessError> {
    write_table(
        path,
        SWEEP_HEADER,
        rows.iter().map(|r| {
            [r.b_gauss, r.omega_cb_mhz, r.transmission, r.phi, r.g2_zero, r.g2_zero_stderr, r.g2_closed_form]
        }),
    )
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>, HarnessError> {
    Ok(read_table::<7>(path)?
        .into_iter()
        .map(|(_, v)| SweepRow {
            b_gauss: v[0],
            omega_cb_mhz: v[1],
            transmission: v[2],
            phi: v[3],
            g2_zero: v[4],
            g2_zero_stderr: v[5],
            g2_closed_form: v[6],
        })
        .collect())
}

/// Two detector channels as (t, S1, S2).
pub fn write_trace_csv(path: &Path, pair: &FieldTracePair) -> Result<(), HarnessError> {
    write_table(path, ["t", "S1", "S2"], (0..pair.len()).map(|k| [pair.time(k), pair.ch1[k], pair.ch2[k]]))
}

pub fn read_trace_csv(path: &Path) -> Result<FieldTracePair, HarnessError> {
    let rows = read_table::<3>(path)?;
    if rows.len() < 2 {
        return Err(HarnessError::Parse {
            path: path.to_path_buf(),
            line: rows.first().map_or(1, |r| r.0),
            message: "need at least two samples".into(),
        });
    }
    let times: Vec<(u64, f64)> = rows.iter().map(|(l, v)| (*l, v[0])).collect();
    let (t0, dt) = uniform_grid(path, &times)?;
    let (ch1, ch2) = rows.iter().map(|(_, v)| (v[1], v[2])).unzip();
    FieldTracePair::new(t0, dt, ch1, ch2).map_err(|e| HarnessError::Parse {
        path: path.to_path_buf(),
        line: rows[0].0,
        message: e.to_string(),
    })
}

/// Laser frequency deviation as (t, delta_nu), δν in rad/s.
pub fn write_noise_csv(path: &Path, trace: &FrequencyTrace) -> Result<(), HarnessError> {
    write_table(path, ["t", "delta_nu"], (0..trace.len()).map(|k| [trace.time(k), trace.values[k]]))
}

pub fn read_noise_csv(path: &Path) -> Result<FrequencyTrace, HarnessError> {
    let rows = read_table::<2>(path)?;
    if rows.len() < 2 {
        return Err(HarnessError::Parse { path: path.to_path_buf(), line: 1, message: "need at least two samples".into() });
    }
    let times: Vec<(u64, f64)> = rows.iter().map(|(l, v)| (*l, v[0])).collect();
    let (t0, dt) = uniform_grid(path, &times)?;
    Ok(FrequencyTrace { t0, dt, values: rows.iter().map(|(_, v)| v[1]).collect() })
}

pub fn write_correlation_csv(path: &Path, cf: &CorrelationFunction) -> Result<(), HarnessError> {
    write_table(path, ["tau", "G2"], cf.taus.iter().zip(&cf.values).map(|(&t, &g)| [t, g]))
}

/// Reads (tau, G2); the window is not stored in the file and comes back NaN.
pub fn read_correlation_csv(path: &Path) -> Result<CorrelationFunction, HarnessError> {
    let (taus, values) = read_table::<2>(path)?.into_iter().map(|(_, v)| (v[0], v[1])).unzip();
    Ok(CorrelationFunction { taus, values, window: f64::NAN })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Versions {
    pub nmor: &'static str,
    pub nmor_core: &'static str,
}

/// Everything needed to reproduce a run. Contains no timestamps, so
/// identical runs give identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub versions: Versions,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, cfg: &ExperimentConfig, seeds: Vec<u64>, files: Vec<String>) -> Self {
        Self {
            command: command.into(),
            config_sha256: config_hash(cfg),
            config: cfg.clone(),
            seeds,
            versions: Versions { nmor: env!("CARGO_PKG_VERSION"), nmor_core: nmor_core::VERSION },
            files,
        }
    }
}

/// SHA-256 of the canonical TOML form of the configuration, hex encoded.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    Sha256::digest(cfg.to_toml_string().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

/// `dir/name`, creating `dir` if needed.
pub fn output_path(dir: &Path, name: &str) -> Result<PathBuf, HarnessError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    Ok(dir.join(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(text: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), text).unwrap();
        f
    }

    #[test]
    fn parse_error_reports_line() {
        let f = write("t,S1,S2\n0,1,2\n1e-9,1,x\n");
        match read_trace_csv(f.path()) {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let f = write("t,S1,S2\n0,1,2\n1e-9,1\n");
        assert!(matches!(read_trace_csv(f.path()), Err(HarnessError::Parse { line: 3, .. })));
    }

    #[test]
    fn jittered_grid_is_rejected() {
        let f = write("t,S1,S2\n0,1,2\n1.0,1,2\n2.001,3,4\n3.0,1,1\n");
        assert!(matches!(read_trace_csv(f.path()), Err(HarnessError::NonuniformGrid { line: 4, .. })));
        let ok = write("t,S1,S2\n0,1,2\n1.0000000001,1,2\n2.0,3,4\n");
        assert!(read_trace_csv(ok.path()).is_ok());
    }

    #[test]
    fn hash_tracks_config() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.noise.seed = 9;
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
