//! Deterministic synthetic series and frame sequences.
//!
//! All randomness comes from ChaCha8 seeded with a caller-supplied
//! 64-bit seed, so fixtures are reproducible across platforms and
//! thread counts. The two regimes model qualitatively different
//! fluctuation character: `smooth` is a plain AR(1), `jumpy` is the
//! same recursion plus rare sign-symmetric jumps.

use crate::error::{Error, Result};
use crate::ingest::{Frame, FrameSequence};
use crate::series::{Stage, TimeSeries};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeKind {
    Smooth,
    Jumpy,
}

impl std::str::FromStr for RegimeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth" => Ok(RegimeKind::Smooth),
            "jumpy" => Ok(RegimeKind::Jumpy),
            other => Err(Error::InvalidArgument(format!(
                "unknown regime kind `{other}` (expected smooth|jumpy)"
            ))),
        }
    }
}

/// Parameters for one synthetic regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeParams {
    pub kind: RegimeKind,
    pub n: usize,
    /// AR coefficient, |phi| < 1.
    pub phi: f64,
    /// Innovation scale, >= 0.
    pub sigma: f64,
    /// Per-step jump probability (jumpy only), in [0, 1).
    pub jump_prob: f64,
    /// Jump magnitude as a multiple of sigma (jumpy only).
    pub jump_scale: f64,
    pub seed: u64,
}

impl RegimeParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("series length must be >= 1".into()));
        }
        if !(self.phi.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "phi must satisfy |phi| < 1, got {}",
                self.phi
            )));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sigma must be a non-negative real, got {}",
                self.sigma
            )));
        }
        if self.kind == RegimeKind::Jumpy {
            if !(0.0..1.0).contains(&self.jump_prob) {
                return Err(Error::InvalidArgument(format!(
                    "jump_prob must lie in [0,1), got {}",
                    self.jump_prob
                )));
            }
            if !(self.jump_scale >= 0.0) || !self.jump_scale.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "jump_scale must be a non-negative real, got {}",
                    self.jump_scale
                )));
            }
        }
        Ok(())
    }
}

/// Generate one AR(1) series, optionally with jumps.
///
/// x[0] = 0; x[t] = phi*x[t-1] + sigma*eps_t, plus (jumpy regime) a jump
/// of magnitude jump_scale*sigma with uniform random sign at jump steps.
pub fn gen_series(p: &RegimeParams) -> Result<TimeSeries> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut values = Vec::with_capacity(p.n);
    let mut x = 0.0f64;
    values.push(x);
    for _ in 1..p.n {
        let eps: f64 = rng.sample(StandardNormal);
        x = p.phi * x + p.sigma * eps;
        if p.kind == RegimeKind::Jumpy && p.jump_prob > 0.0 {
            // Draw both variates unconditionally so the stream layout
            // does not depend on earlier outcomes.
            let u: f64 = rng.gen();
            let flip: bool = rng.gen();
            if u < p.jump_prob {
                let sign = if flip { 1.0 } else { -1.0 };
                x += sign * p.jump_scale * p.sigma;
            }
        }
        values.push(x);
    }
    let label = format!(
        "{}-seed{}",
        match p.kind {
            RegimeKind::Smooth => "smooth",
            RegimeKind::Jumpy => "jumpy",
        },
        p.seed
    );
    TimeSeries::new(values, 1.0, label, Stage::RawMean)
}

/// Build a rank-one-plus-noise frame sequence driven by `signal`.
///
/// frame_t = round(clip(base + signal[t]*P + noise)), with P a fixed
/// positive pattern drawn once from `pattern_seed` and noise i.i.d.
/// Gaussian per pixel.
#[allow(clippy::too_many_arguments)]
pub fn gen_video(
    n_frames: usize,
    w: u32,
    h: u32,
    pattern_seed: u64,
    signal: &TimeSeries,
    noise_sigma: f64,
    base: f64,
    fps: f64,
) -> Result<FrameSequence> {
    if signal.len() != n_frames {
        return Err(Error::InvalidArgument(format!(
            "signal length {} does not match frame count {n_frames}",
            signal.len()
        )));
    }
    if w < 1 || h < 1 {
        return Err(Error::InvalidArgument(format!(
            "frame geometry must be >= 1x1, got {w}x{h}"
        )));
    }
    if !(noise_sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise_sigma must be >= 0, got {noise_sigma}"
        )));
    }
    let npix = (w as usize) * (h as usize);
    let mut pattern_rng = ChaCha8Rng::seed_from_u64(pattern_seed);
    // Positive pattern in [0.5, 1.5).
    let pattern: Vec<f64> = (0..npix).map(|_| 0.5 + pattern_rng.gen::<f64>()).collect();

    let mut noise_rng = ChaCha8Rng::seed_from_u64(pattern_seed.wrapping_add(0x9e3779b97f4a7c15));
    let mut frames = Vec::with_capacity(n_frames);
    for t in 0..n_frames {
        let pixels: Vec<u16> = pattern
            .iter()
            .map(|&p| {
                let noise = if noise_sigma > 0.0 {
                    noise_sigma * noise_rng.sample::<f64, _>(StandardNormal)
                } else {
                    0.0
                };
                let v = base + signal.values[t] * p + noise;
                v.round().clamp(0.0, 65535.0) as u16
            })
            .collect();
        frames.push(Frame::new(w, h, pixels)?);
    }
    FrameSequence::new(frames, fps, format!("synth-{pattern_seed}"))
}

/// Frozen fixture parameters for the two-regime demonstration corpus.
///
/// Calibrated once against the full pipeline so that the smooth pool
/// builds a dense transition network (low edge betweenness everywhere)
/// while the jumpy pool builds a sparse banded one with a clear
/// bottleneck (high maximum edge betweenness).
pub mod fixture {
    use super::{RegimeKind, RegimeParams};

    pub const SERIES_LEN: usize = 2000;
    pub const SERIES_PER_GROUP: usize = 15;

    pub fn smooth(seed: u64) -> RegimeParams {
        RegimeParams {
            kind: RegimeKind::Smooth,
            n: SERIES_LEN,
            phi: 0.2,
            sigma: 1.0,
            jump_prob: 0.0,
            jump_scale: 0.0,
            seed,
        }
    }

    pub fn jumpy(seed: u64) -> RegimeParams {
        RegimeParams {
            kind: RegimeKind::Jumpy,
            n: SERIES_LEN,
            phi: 0.9995,
            sigma: 1.0,
            jump_prob: 0.01,
            jump_scale: 10.0,
            seed,
        }
    }
}
