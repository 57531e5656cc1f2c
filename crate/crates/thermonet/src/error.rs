//! Error types shared across the pipeline.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("frame {index} ({path}): geometry mismatch, expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    GeometryMismatch {
        index: usize,
        path: PathBuf,
        expected_w: u32,
        expected_h: u32,
        got_w: u32,
        got_h: u32,
    },

    #[error("frame {index} ({path}): {reason}")]
    FrameDecode {
        index: usize,
        path: PathBuf,
        reason: String,
    },

    #[error("roi out of bounds: roi {roi} does not fit in {width}x{height} frame")]
    RoiOutOfBounds {
        roi: String,
        width: u32,
        height: u32,
    },

    #[error("zero variance: all frames identical, no principal direction exists")]
    ZeroVariance,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series too short: need at least {need} samples, got {got}")]
    SeriesTooShort { need: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("csv parse error at {path}:{line}: {reason}")]
    CsvParse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("json error on {path}: {reason}")]
    Json { path: PathBuf, reason: String },
}

impl Error {
    /// Short machine-parsable code for CLI stderr lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io-error",
            Error::Manifest(_) => "bad-manifest",
            Error::GeometryMismatch { .. } => "geometry-mismatch",
            Error::FrameDecode { .. } => "frame-decode-error",
            Error::RoiOutOfBounds { .. } => "roi-out-of-bounds",
            Error::ZeroVariance => "zero-variance",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::SeriesTooShort { .. } => "series-too-short",
            Error::EmptyInput(_) => "empty-input",
            Error::CsvParse { .. } => "csv-parse-error",
            Error::Json { .. } => "bad-json",
        }
    }

    /// CLI exit status: 2 for usage/contract errors, 3 for data errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::RoiOutOfBounds { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
