//! Frame-sequence loading, cropping, and frame-to-scalar reduction.
//!
//! Frames arrive as 16-bit grayscale rasters, either binary PGM (P5,
//! maxval up to 65535, big-endian samples) or headerless little-endian
//! 16-bit raw with geometry taken from the manifest. A manifest JSON
//! lists the frame files in temporal order together with fps and geometry.

use crate::error::{Error, Result};
use crate::series::{Stage, TimeSeries};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// One 16-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u16>,
}

impl Frame {
    pub fn new(width: u32, height: u32, pixels: Vec<u16>) -> Result<Self> {
        if pixels.len() != (width as usize) * (height as usize) {
            return Err(Error::InvalidArgument(format!(
                "pixel buffer length {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Frame {
            width,
            height,
            pixels,
        })
    }

    pub fn get(&self, x: u32, y: u32) -> u16 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn mean(&self) -> f64 {
        let sum: u64 = self.pixels.iter().map(|&p| p as u64).sum();
        sum as f64 / self.pixels.len() as f64
    }
}

/// Ordered frames plus timing metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub frames: Vec<Frame>,
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    pub source_id: String,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>, fps: f64, source_id: impl Into<String>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::EmptyInput("frame sequence has no frames".into()));
        }
        if !(fps > 0.0) {
            return Err(Error::InvalidArgument(format!("fps must be > 0, got {fps}")));
        }
        let (width, height) = (frames[0].width, frames[0].height);
        for (i, f) in frames.iter().enumerate() {
            if f.width != width || f.height != height {
                return Err(Error::GeometryMismatch {
                    index: i,
                    path: PathBuf::new(),
                    expected_w: width,
                    expected_h: height,
                    got_w: f.width,
                    got_h: f.height,
                });
            }
        }
        Ok(FrameSequence {
            frames,
            width,
            height,
            fps,
            source_id: source_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Seconds per frame.
    pub fn dt(&self) -> f64 {
        1.0 / self.fps
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 * self.dt()
    }
}

/// Rectangular region of interest, top-left origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Roi {
    pub x0: u32,
    pub y0: u32,
    pub w: u32,
    pub h: u32,
}

impl Roi {
    pub fn new(x0: u32, y0: u32, w: u32, h: u32) -> Result<Self> {
        if w < 1 || h < 1 {
            return Err(Error::InvalidArgument(format!(
                "roi extent must be >= 1, got {w}x{h}"
            )));
        }
        Ok(Roi { x0, y0, w, h })
    }

    fn fits(&self, width: u32, height: u32) -> bool {
        self.x0 as u64 + self.w as u64 <= width as u64 && self.y0 as u64 + self.h as u64 <= height as u64
    }
}

impl std::fmt::Display for Roi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{},{}", self.x0, self.y0, self.w, self.h)
    }
}

impl std::str::FromStr for Roi {
    type Err = Error;
    /// Parses `x0,y0,w,h`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::InvalidArgument(format!(
                "roi must be x0,y0,w,h, got `{s}`"
            )));
        }
        let mut nums = [0u32; 4];
        for (i, p) in parts.iter().enumerate() {
            nums[i] = p.trim().parse().map_err(|e| {
                Error::InvalidArgument(format!("bad roi component `{p}`: {e}"))
            })?;
        }
        Roi::new(nums[0], nums[1], nums[2], nums[3])
    }
}

/// Per-component explained-variance fractions, descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub explained: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub fps: f64,
    pub width: u32,
    pub height: u32,
    pub format: FrameFormat,
    pub frames: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameFormat {
    #[serde(rename = "pgm16")]
    Pgm16,
    #[serde(rename = "raw16le")]
    Raw16Le,
}

/// Load a frame sequence described by a manifest JSON.
///
/// Frame paths are resolved relative to the manifest's directory and
/// decoded in manifest order.
pub fn load_frames(manifest_path: &Path) -> Result<FrameSequence> {
    let text = std::fs::read_to_string(manifest_path).map_err(|e| Error::Io {
        path: manifest_path.to_path_buf(),
        source: e,
    })?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: manifest_path.to_path_buf(),
        reason: e.to_string(),
    })?;
    if manifest.frames.is_empty() {
        return Err(Error::Manifest(format!(
            "{}: manifest lists no frames",
            manifest_path.display()
        )));
    }
    if !(manifest.fps > 0.0) {
        return Err(Error::Manifest(format!(
            "{}: fps must be > 0, got {}",
            manifest_path.display(),
            manifest.fps
        )));
    }
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut frames = Vec::with_capacity(manifest.frames.len());
    for (index, rel) in manifest.frames.iter().enumerate() {
        let path = base.join(rel);
        let frame = match manifest.format {
            FrameFormat::Pgm16 => read_pgm16(&path, index)?,
            FrameFormat::Raw16Le => read_raw16le(&path, index, manifest.width, manifest.height)?,
        };
        if frame.width != manifest.width || frame.height != manifest.height {
            return Err(Error::GeometryMismatch {
                index,
                path,
                expected_w: manifest.width,
                expected_h: manifest.height,
                got_w: frame.width,
                got_h: frame.height,
            });
        }
        frames.push(frame);
    }
    let source_id = manifest_path.to_string_lossy().into_owned();
    FrameSequence::new(frames, manifest.fps, source_id)
}

/// Decode a binary PGM (P5) with maxval up to 65535. Samples above 255
/// use two bytes, big-endian, per the PGM convention.
pub fn read_pgm16(path: &Path, index: usize) -> Result<Frame> {
    let data = std::fs::read(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let err = |reason: String| Error::FrameDecode {
        index,
        path: path.to_path_buf(),
        reason,
    };
    let mut cursor = 0usize;
    if data.len() < 2 || &data[0..2] != b"P5" {
        return Err(err("not a binary PGM (missing P5 magic)".into()));
    }
    cursor += 2;
    let mut fields = [0u64; 3];
    for field in fields.iter_mut() {
        // skip whitespace and `#` comments between header tokens
        loop {
            match data.get(cursor) {
                Some(b) if b.is_ascii_whitespace() => cursor += 1,
                Some(b'#') => {
                    while let Some(&b) = data.get(cursor) {
                        cursor += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        let start = cursor;
        while data.get(cursor).is_some_and(|b| b.is_ascii_digit()) {
            cursor += 1;
        }
        if cursor == start {
            return Err(err("truncated PGM header".into()));
        }
        let tok = std::str::from_utf8(&data[start..cursor]).unwrap();
        *field = tok.parse().map_err(|e| err(format!("bad header token: {e}")))?;
    }
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 65535 {
        return Err(err(format!("maxval {maxval} exceeds 16 bits")));
    }
    match data.get(cursor) {
        Some(b) if b.is_ascii_whitespace() => cursor += 1,
        _ => return Err(err("missing whitespace after maxval".into())),
    }
    let n = (width * height) as usize;
    let pixels: Vec<u16> = if maxval > 255 {
        let body = &data[cursor..];
        if body.len() < 2 * n {
            return Err(err(format!(
                "pixel data truncated: need {} bytes, have {}",
                2 * n,
                body.len()
            )));
        }
        body.chunks_exact(2)
            .take(n)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    } else {
        let body = &data[cursor..];
        if body.len() < n {
            return Err(err(format!(
                "pixel data truncated: need {n} bytes, have {}",
                body.len()
            )));
        }
        body.iter().take(n).map(|&b| b as u16).collect()
    };
    Frame::new(width as u32, height as u32, pixels)
}

/// Decode a headerless little-endian 16-bit raster; geometry comes from
/// the manifest.
pub fn read_raw16le(path: &Path, index: usize, width: u32, height: u32) -> Result<Frame> {
    let data = std::fs::read(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let n = (width as usize) * (height as usize);
    if data.len() != 2 * n {
        return Err(Error::FrameDecode {
            index,
            path: path.to_path_buf(),
            reason: format!(
                "raw16le size {} does not match {width}x{height} ({} bytes expected)",
                data.len(),
                2 * n
            ),
        });
    }
    let pixels = data
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    Frame::new(width, height, pixels)
}

/// Write a frame as binary PGM (P5) with maxval 65535, big-endian samples.
pub fn write_pgm16(path: &Path, frame: &Frame) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut w = BufWriter::new(f);
    let inner = (|| -> std::io::Result<()> {
        write!(w, "P5\n{} {}\n65535\n", frame.width, frame.height)?;
        for &p in &frame.pixels {
            w.write_all(&p.to_be_bytes())?;
        }
        w.flush()
    })();
    inner.map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Crop every frame to `roi`, preserving order and fps.
pub fn crop(seq: &FrameSequence, roi: Roi) -> Result<FrameSequence> {
    if !roi.fits(seq.width, seq.height) {
        return Err(Error::RoiOutOfBounds {
            roi: roi.to_string(),
            width: seq.width,
            height: seq.height,
        });
    }
    let frames = seq
        .frames
        .iter()
        .map(|f| {
            let mut pixels = Vec::with_capacity((roi.w * roi.h) as usize);
            for y in roi.y0..roi.y0 + roi.h {
                let row = y as usize * f.width as usize;
                pixels.extend_from_slice(
                    &f.pixels[row + roi.x0 as usize..row + (roi.x0 + roi.w) as usize],
                );
            }
            Frame {
                width: roi.w,
                height: roi.h,
                pixels,
            }
        })
        .collect();
    FrameSequence::new(frames, seq.fps, seq.source_id.clone())
}

/// Mean pixel value of each frame.
pub fn mean_series(seq: &FrameSequence) -> Result<TimeSeries> {
    let values = seq.frames.iter().map(Frame::mean).collect();
    TimeSeries::new(values, seq.dt(), seq.source_id.clone(), Stage::RawMean)
}

/// Projection of each frame onto the first principal direction of the
/// per-pixel-centered time x pixel matrix, plus the variance fractions of
/// the first `k` components.
///
/// The eigenproblem is solved on the time x time Gram matrix, so cost is
/// governed by the frame count, not the pixel count. The principal-series
/// sign is fixed so its correlation with the mean-pixel series is
/// non-negative.
pub fn pc1_series(seq: &FrameSequence, k: usize) -> Result<(TimeSeries, VarianceReport)> {
    if seq.len() < 2 {
        return Err(Error::SeriesTooShort {
            need: 2,
            got: seq.len(),
        });
    }
    if k < 1 {
        return Err(Error::InvalidArgument("component count k must be >= 1".into()));
    }
    let t = seq.len();
    let npix = (seq.width as usize) * (seq.height as usize);

    // Per-pixel mean over time.
    let mut pixel_mean = vec![0.0f64; npix];
    for frame in &seq.frames {
        for (m, &p) in pixel_mean.iter_mut().zip(&frame.pixels) {
            *m += p as f64;
        }
    }
    for m in &mut pixel_mean {
        *m /= t as f64;
    }

    // Gram matrix of the centered rows: G[i][j] = <x_i - mu, x_j - mu>.
    let centered: Vec<Vec<f64>> = seq
        .frames
        .iter()
        .map(|f| {
            f.pixels
                .iter()
                .zip(&pixel_mean)
                .map(|(&p, &m)| p as f64 - m)
                .collect()
        })
        .collect();
    let mut gram = DMatrix::<f64>::zeros(t, t);
    for i in 0..t {
        for j in i..t {
            let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            gram[(i, j)] = dot;
            gram[(j, i)] = dot;
        }
    }
    let trace: f64 = (0..t).map(|i| gram[(i, i)]).sum();
    if trace <= 0.0 {
        return Err(Error::ZeroVariance);
    }

    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let lead = order[0];
    let lambda1 = eig.eigenvalues[lead].max(0.0);
    if lambda1 <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    // The score of frame i on PC1 is sqrt(lambda1) * u1[i].
    let scale = lambda1.sqrt();
    let mut values: Vec<f64> = (0..t).map(|i| scale * eig.eigenvectors[(i, lead)]).collect();

    // Fix the sign: non-negative correlation with the mean-pixel series.
    let means: Vec<f64> = seq.frames.iter().map(Frame::mean).collect();
    let mean_of_means = means.iter().sum::<f64>() / t as f64;
    let corr: f64 = values
        .iter()
        .zip(&means)
        .map(|(v, m)| v * (m - mean_of_means))
        .sum();
    if corr < 0.0 {
        for v in &mut values {
            *v = -*v;
        }
    }

    let explained: Vec<f64> = order
        .iter()
        .take(k.min(t))
        .map(|&i| eig.eigenvalues[i].max(0.0) / trace)
        .collect();

    let series = TimeSeries::new(values, seq.dt(), seq.source_id.clone(), Stage::Pc1)?;
    Ok((series, VarianceReport { explained }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq_from(frames: Vec<(u32, u32, Vec<u16>)>, fps: f64) -> FrameSequence {
        let frames = frames
            .into_iter()
            .map(|(w, h, p)| Frame::new(w, h, p).unwrap())
            .collect();
        FrameSequence::new(frames, fps, "test").unwrap()
    }

    #[test]
    fn mean_of_small_frame() {
        let seq = seq_from(vec![(2, 2, vec![1, 2, 3, 4])], 1.0);
        let s = mean_series(&seq).unwrap();
        assert_eq!(s.values, vec![2.5]);
        assert_eq!(s.stage, Stage::RawMean);
    }

    #[test]
    fn mean_preserves_extremes() {
        let seq = seq_from(
            vec![(2, 2, vec![0, 0, 0, 0]), (2, 2, vec![65535; 4])],
            1.0,
        );
        let s = mean_series(&seq).unwrap();
        assert_eq!(s.values, vec![0.0, 65535.0]);
    }

    #[test]
    fn constant_frames_give_constant_series() {
        let seq = seq_from(vec![(2, 2, vec![7; 4]), (2, 2, vec![7; 4])], 2.0);
        let s = mean_series(&seq).unwrap();
        assert_eq!(s.values, vec![7.0, 7.0]);
        assert_eq!(s.dt, 0.5);
    }

    #[test]
    fn identity_crop() {
        let seq = seq_from(vec![(4, 4, (0..16).collect())], 1.0);
        let out = crop(&seq, Roi::new(0, 0, 4, 4).unwrap()).unwrap();
        assert_eq!(out.frames, seq.frames);
    }

    #[test]
    fn central_crop() {
        let seq = seq_from(vec![(4, 4, (0..16).collect())], 1.0);
        let out = crop(&seq, Roi::new(1, 1, 2, 2).unwrap()).unwrap();
        assert_eq!(out.frames[0].pixels, vec![5, 6, 9, 10]);
    }

    #[test]
    fn out_of_bounds_roi_rejected() {
        let seq = seq_from(vec![(4, 4, (0..16).collect())], 1.0);
        let err = crop(&seq, Roi::new(3, 3, 2, 2).unwrap()).unwrap_err();
        assert!(matches!(err, Error::RoiOutOfBounds { .. }));
    }

    #[test]
    fn nested_crops_compose() {
        let seq = seq_from(vec![(6, 6, (0..36).collect())], 1.0);
        let a = crop(&seq, Roi::new(1, 1, 4, 4).unwrap()).unwrap();
        let b = crop(&a, Roi::new(1, 2, 2, 2).unwrap()).unwrap();
        let direct = crop(&seq, Roi::new(2, 3, 2, 2).unwrap()).unwrap();
        assert_eq!(b.frames, direct.frames);
    }

    #[test]
    fn pc1_recovers_rank_one_temporal_factor() {
        // F_t = a(t) * P with fixed positive P.
        let pattern = [3u16, 1, 4, 1, 5, 9];
        let a = [1.0f64, 3.0, 2.0, 5.0, 4.0];
        let frames: Vec<Frame> = a
            .iter()
            .map(|&at| {
                Frame::new(
                    3,
                    2,
                    pattern.iter().map(|&p| (p as f64 * at) as u16).collect(),
                )
                .unwrap()
            })
            .collect();
        let seq = FrameSequence::new(frames, 1.0, "rank1").unwrap();
        let (pc1, report) = pc1_series(&seq, 3).unwrap();
        // Pearson correlation of pc1 against a(t).
        let n = a.len() as f64;
        let (ma, mp) = (
            a.iter().sum::<f64>() / n,
            pc1.values.iter().sum::<f64>() / n,
        );
        let cov: f64 = a
            .iter()
            .zip(&pc1.values)
            .map(|(x, y)| (x - ma) * (y - mp))
            .sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vp: f64 = pc1.values.iter().map(|y| (y - mp).powi(2)).sum();
        let r = cov / (va * vp).sqrt();
        assert!(r.abs() > 1.0 - 1e-9, "r = {r}");
        assert!((report.explained[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn all_identical_frames_is_zero_variance() {
        let seq = seq_from(vec![(2, 2, vec![5; 4]); 3], 1.0);
        let err = pc1_series(&seq, 1).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance));
    }

    #[test]
    fn manifest_round_trip_and_duration() {
        let dir = tempfile::tempdir().unwrap();
        for i in 0..3 {
            write_pgm16(
                &dir.path().join(format!("f{i}.pgm")),
                &Frame::new(2, 2, vec![10, 20, 30, 40]).unwrap(),
            )
            .unwrap();
        }
        let manifest = serde_json::json!({
            "fps": 9.0, "width": 2, "height": 2, "format": "pgm16",
            "frames": ["f0.pgm", "f1.pgm", "f2.pgm"]
        });
        let mpath = dir.path().join("m.json");
        std::fs::write(&mpath, manifest.to_string()).unwrap();
        let seq = load_frames(&mpath).unwrap();
        assert_eq!(seq.len(), 3);
        assert_eq!((seq.width, seq.height), (2, 2));
        assert_eq!(seq.fps, 9.0);
        assert_eq!(seq.frames[0].pixels, vec![10, 20, 30, 40]);
    }

    #[test]
    fn manifest_geometry_mismatch_names_offender() {
        let dir = tempfile::tempdir().unwrap();
        write_pgm16(
            &dir.path().join("f0.pgm"),
            &Frame::new(3, 3, vec![0; 9]).unwrap(),
        )
        .unwrap();
        let manifest = serde_json::json!({
            "fps": 9.0, "width": 2, "height": 2, "format": "pgm16",
            "frames": ["f0.pgm"]
        });
        let mpath = dir.path().join("m.json");
        std::fs::write(&mpath, manifest.to_string()).unwrap();
        let err = load_frames(&mpath).unwrap_err();
        match err {
            Error::GeometryMismatch { index, got_w, .. } => {
                assert_eq!(index, 0);
                assert_eq!(got_w, 3);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn empty_manifest_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mpath = dir.path().join("m.json");
        std::fs::write(
            &mpath,
            r#"{"fps": 9.0, "width": 2, "height": 2, "format": "pgm16", "frames": []}"#,
        )
        .unwrap();
        assert!(matches!(load_frames(&mpath).unwrap_err(), Error::Manifest(_)));
    }

    #[test]
    fn missing_frame_file_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let mpath = dir.path().join("m.json");
        std::fs::write(
            &mpath,
            r#"{"fps": 9.0, "width": 2, "height": 2, "format": "pgm16", "frames": ["gone.pgm"]}"#,
        )
        .unwrap();
        let err = load_frames(&mpath).unwrap_err();
        assert!(err.to_string().contains("gone.pgm"), "{err}");
    }

    #[test]
    fn raw16le_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f0.raw");
        let pixels: Vec<u16> = vec![0, 1, 65535, 256];
        let bytes: Vec<u8> = pixels.iter().flat_map(|p| p.to_le_bytes()).collect();
        std::fs::write(&path, bytes).unwrap();
        let frame = read_raw16le(&path, 0, 2, 2).unwrap();
        assert_eq!(frame.pixels, pixels);
    }

    #[test]
    fn mean_series_grand_mean_matches_pixel_grand_mean() {
        let seq = seq_from(
            vec![(2, 2, vec![1, 2, 3, 4]), (2, 2, vec![10, 20, 30, 40])],
            1.0,
        );
        let s = mean_series(&seq).unwrap();
        let series_mean = s.values.iter().sum::<f64>() / s.len() as f64;
        let all: f64 = seq
            .frames
            .iter()
            .flat_map(|f| f.pixels.iter())
            .map(|&p| p as f64)
            .sum::<f64>()
            / 8.0;
        assert!((series_mean - all).abs() <= 1e-9 * all.abs().max(1.0));
    }
}
