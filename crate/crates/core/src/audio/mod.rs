//! Audio level, octave bands and music transition points.
//!
//! PCM is analyzed every 10 ms with a Hann-windowed FFT, reduced to a level
//! and ten octave bands, averaged into 500 ms blocks, and then walked block
//! by block to find instants where the band statistics of the current music
//! segment change significantly.

mod segment;
mod spectral;

pub use segment::{detect_music_cuts, dynamic_threshold, proximity_multiplier, segment_deviations};
pub use spectral::{aggregate_blocks, band_edges, compute_spectral_frames, BlockFeatures, SpectralFrame};

use crate::ingest::PcmStream;
use crate::video::check_cuts;
use crate::{block_count, min_max_normalize};

/// Octave bands per spectral frame.
pub const BAND_COUNT: usize = 10;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AudioError {
    #[error("audio too short: {samples} samples, need at least {needed}")]
    TooShort { samples: usize, needed: usize },
    #[error("invalid audio analysis config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AudioAnalysisConfig {
    pub hop_seconds: f64,
    pub fft_size: usize,
    /// Global sensitivity; larger values report fewer music cuts.
    pub scale_factor: f64,
    /// Below this distance from the previous cut the threshold is tripled.
    pub min_segment_seconds: f64,
    /// Beyond this distance from the previous cut the proximity term is 1.
    pub target_segment_seconds: f64,
    /// Threshold grows as `c0 + c1 * level`.
    pub level_coefficients: (f64, f64),
    pub proximity_multiplier: f64,
    /// Blocks in the trailing window for the local band deviation.
    pub local_std_blocks: usize,
    /// Fraction of the mean band value added to the deviation-change
    /// denominator, so stationary segments do not divide by ~0.
    pub std_floor_ratio: f64,
    pub epsilon: f64,
}

impl Default for AudioAnalysisConfig {
    fn default() -> Self {
        AudioAnalysisConfig {
            hop_seconds: 0.010,
            fft_size: 2048,
            scale_factor: 1.0,
            min_segment_seconds: 4.0,
            target_segment_seconds: 20.0,
            level_coefficients: (0.10, 0.90),
            proximity_multiplier: 3.0,
            local_std_blocks: 4,
            std_floor_ratio: 0.1,
            epsilon: 1e-9,
        }
    }
}

impl AudioAnalysisConfig {
    pub fn validate(&self) -> Result<(), AudioError> {
        let bad = |m: &str| Err(AudioError::InvalidConfig(m.to_string()));
        if !(self.hop_seconds > 0.0) {
            return bad("hop_seconds must be > 0");
        }
        if !self.fft_size.is_power_of_two() || self.fft_size < 2 {
            return bad("fft_size must be a power of two");
        }
        if !(self.scale_factor > 0.0) {
            return bad("scale_factor must be > 0");
        }
        if !(self.min_segment_seconds > 0.0 && self.min_segment_seconds < self.target_segment_seconds) {
            return bad("need 0 < min_segment_seconds < target_segment_seconds");
        }
        if !(self.proximity_multiplier >= 1.0) {
            return bad("proximity_multiplier must be >= 1");
        }
        if self.local_std_blocks < 2 {
            return bad("local_std_blocks must be >= 2");
        }
        let (c0, c1) = self.level_coefficients;
        if !(c0 > 0.0 && c1 >= 0.0) {
            return bad("level coefficients need c0 > 0 and c1 >= 0");
        }
        if !(self.std_floor_ratio >= 0.0 && self.epsilon > 0.0) {
            return bad("std_floor_ratio must be >= 0 and epsilon > 0");
        }
        Ok(())
    }

    /// Hop length in samples at `sample_rate`.
    pub fn hop_samples(&self, sample_rate: u32) -> usize {
        ((self.hop_seconds * f64::from(sample_rate)).round() as usize).max(1)
    }

    /// Spectral frames averaged into one 500 ms block.
    pub fn frames_per_block(&self) -> usize {
        ((crate::BLOCK_SECONDS / self.hop_seconds).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AudioProfile {
    pub media_id: String,
    /// Per-block level, min-max normalized over the clip.
    pub block_level: Vec<f64>,
    pub block_bands: Vec<[f64; BAND_COUNT]>,
    /// Transition points in seconds; always starts with 0.0.
    pub music_cuts: Vec<f64>,
    pub duration: f64,
    pub sample_rate: u32,
}

impl AudioProfile {
    pub fn block_count(&self) -> usize {
        self.block_level.len()
    }

    pub fn validate(&self) -> Result<(), String> {
        let id = &self.media_id;
        if !(self.duration > 0.0) || self.sample_rate == 0 {
            return Err(format!("{id}: duration and sample rate must be positive"));
        }
        let expected = block_count(self.duration);
        if self.block_level.len() != expected || self.block_bands.len() != expected {
            return Err(format!(
                "{id}: {}/{} level/band blocks for {} s (expected {expected})",
                self.block_level.len(),
                self.block_bands.len(),
                self.duration
            ));
        }
        if self.block_level.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(format!("{id}: level outside [0, 1]"));
        }
        if self.block_bands.iter().flatten().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(format!("{id}: band values must be finite and >= 0"));
        }
        if self.music_cuts.first() != Some(&0.0) {
            return Err(format!("{id}: music cuts must start at 0.0"));
        }
        check_cuts(&self.music_cuts, self.duration).map_err(|e| format!("{id}: {e}"))
    }
}

/// Full audio analysis of one clip.
///
/// The spectral frame grid stops one FFT window short of the end, so the
/// last block or two can be missing; they repeat the final analyzed block
/// so the profile always covers the whole clip.
pub fn analyze_audio(id: &str, pcm: &PcmStream, cfg: &AudioAnalysisConfig) -> Result<AudioProfile, AudioError> {
    cfg.validate()?;
    let frames = compute_spectral_frames(pcm, cfg)?;
    let duration = pcm.duration();
    let blocks = block_count(duration);

    let (mut raw_level, mut bands) = spectral::aggregate_raw(&frames, cfg.frames_per_block());
    while raw_level.len() < blocks {
        raw_level.push(*raw_level.last().expect("at least one frame"));
        bands.push(*bands.last().expect("at least one frame"));
    }
    raw_level.truncate(blocks);
    bands.truncate(blocks);
    let block_level = min_max_normalize(&raw_level);

    let music_cuts = if blocks >= 2 { detect_music_cuts(&block_level, &bands, cfg) } else { vec![0.0] };
    Ok(AudioProfile {
        media_id: id.to_string(),
        block_level,
        block_bands: bands,
        music_cuts,
        duration,
        sample_rate: pcm.sample_rate,
    })
}
