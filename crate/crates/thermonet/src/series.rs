//! Scalar time series with pipeline stage tracking.
//!
//! A [`TimeSeries`] carries its processing stage so downstream operations
//! can reject inputs that skipped a step. Stages only move forward:
//! raw-mean/pc1 -> baselined -> detrended -> normalized -> pooled.

use crate::error::{Error, Result};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    RawMean,
    Pc1,
    Baselined,
    Detrended,
    Normalized,
    Pooled,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::RawMean => "raw-mean",
            Stage::Pc1 => "pc1",
            Stage::Baselined => "baselined",
            Stage::Detrended => "detrended",
            Stage::Normalized => "normalized",
            Stage::Pooled => "pooled",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "raw-mean" => Stage::RawMean,
            "pc1" => Stage::Pc1,
            "baselined" => Stage::Baselined,
            "detrended" => Stage::Detrended,
            "normalized" => Stage::Normalized,
            "pooled" => Stage::Pooled,
            other => return Err(Error::InvalidArgument(format!("unknown stage `{other}`"))),
        })
    }
}

/// Uniformly sampled scalar series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub values: Vec<f64>,
    /// Seconds per sample.
    pub dt: f64,
    /// Opaque group/subject tag.
    pub label: String,
    pub stage: Stage,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, dt: f64, label: impl Into<String>, stage: Stage) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("time series has no values".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
        }
        Ok(TimeSeries {
            values,
            dt,
            label: label.into(),
            stage,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total duration in seconds (`len * dt`).
    pub fn duration(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    /// Write as `t,value` CSV. `t` is sample index times `dt`.
    ///
    /// Values are written with Rust's shortest round-trip float formatting,
    /// so a read-back reproduces them exactly (well past 12 significant digits).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", i as f64 * self.dt, v)?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        self.write_csv(std::io::BufWriter::new(f))
            .map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })
    }

    /// Read a `t,value` CSV written by [`write_csv`](Self::write_csv).
    ///
    /// `dt` is inferred from the first two timestamps; a single-row file
    /// gets dt = 1. The label defaults to the file stem.
    pub fn read_csv_file(path: &Path, stage: Stage) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let reader = BufReader::new(f);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if lineno == 0 && line.starts_with(|c: char| c.is_alphabetic()) {
                continue; // header
            }
            let mut parts = line.splitn(2, ',');
            let parse = |s: Option<&str>, what: &str| -> Result<f64> {
                s.ok_or_else(|| Error::CsvParse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    reason: format!("missing {what} column"),
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::CsvParse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    reason: format!("bad {what}: {e}"),
                })
            };
            times.push(parse(parts.next(), "t")?);
            values.push(parse(parts.next(), "value")?);
        }
        if values.is_empty() {
            return Err(Error::EmptyInput(format!(
                "{}: no data rows",
                path.display()
            )));
        }
        let dt = if times.len() >= 2 {
            times[1] - times[0]
        } else {
            1.0
        };
        if !(dt > 0.0) {
            return Err(Error::CsvParse {
                path: path.to_path_buf(),
                line: 2,
                reason: format!("non-increasing time axis (dt = {dt})"),
            });
        }
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        TimeSeries::new(values, dt, label, stage)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duration_135_frames_at_9_fps_is_15_s() {
        let s = TimeSeries::new(vec![0.0; 135], 1.0 / 9.0, "clip", Stage::RawMean).unwrap();
        assert!((s.duration() - 15.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty_and_bad_dt() {
        assert!(TimeSeries::new(vec![], 1.0, "x", Stage::RawMean).is_err());
        assert!(TimeSeries::new(vec![1.0], 0.0, "x", Stage::RawMean).is_err());
        assert!(TimeSeries::new(vec![1.0], -1.0, "x", Stage::RawMean).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let vals = vec![0.1234567890123456, -3.0e-7, 65535.0, 2.0 / 3.0];
        let s = TimeSeries::new(vals.clone(), 0.125, "rt", Stage::Detrended).unwrap();
        s.write_csv_file(&path).unwrap();
        let back = TimeSeries::read_csv_file(&path, Stage::Detrended).unwrap();
        assert_eq!(back.values, vals);
        assert_eq!(back.dt, 0.125);
    }
}
