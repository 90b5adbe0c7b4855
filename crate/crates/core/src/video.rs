//! Video movement and scene cuts from adjacent-frame differencing.

use crate::ingest::{FrameStream, LumaFrame};
use crate::{block_count, min_max_normalize, BLOCK_SECONDS};

/// Rolling means at or below this value never produce a cut.
pub const MEAN_FLOOR: f64 = 1e-6;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum VideoError {
    #[error("frame dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("need at least 2 frames, got {0}")]
    TooShort(usize),
    #[error("invalid video analysis config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoAnalysisConfig {
    /// Length of the trailing window the cut test compares against.
    pub window_seconds: f64,
    /// A frame is a cut when its difference exceeds this multiple of the
    /// trailing mean.
    pub cut_factor: f64,
    pub block_seconds: f64,
}

impl Default for VideoAnalysisConfig {
    fn default() -> Self {
        VideoAnalysisConfig { window_seconds: 1.5, cut_factor: 2.0, block_seconds: BLOCK_SECONDS }
    }
}

impl VideoAnalysisConfig {
    pub fn validate(&self) -> Result<(), VideoError> {
        if !(self.window_seconds > 0.0) {
            return Err(VideoError::InvalidConfig("window_seconds must be > 0".into()));
        }
        if !(self.cut_factor > 1.0) {
            return Err(VideoError::InvalidConfig("cut_factor must be > 1".into()));
        }
        if self.block_seconds != BLOCK_SECONDS {
            return Err(VideoError::InvalidConfig("block_seconds is fixed at 0.5".into()));
        }
        Ok(())
    }

    /// Window length in frames for the given frame rate, rounded up so the
    /// window never covers less than `window_seconds`.
    pub fn window_frames(&self, fps: f64) -> usize {
        ((self.window_seconds * fps - 1e-9).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovementProfile {
    pub media_id: String,
    /// One value per 500 ms block, min-max normalized over the video.
    pub block_movement: Vec<f64>,
    /// Scene cut instants in seconds, strictly increasing.
    pub scene_cuts: Vec<f64>,
    pub fps: f64,
    pub duration: f64,
}

impl MovementProfile {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.duration > 0.0) || !(self.fps > 0.0) {
            return Err(format!("{}: duration and fps must be positive", self.media_id));
        }
        let expected = block_count(self.duration);
        if self.block_movement.len() != expected {
            return Err(format!(
                "{}: {} movement blocks for {} s (expected {expected})",
                self.media_id,
                self.block_movement.len(),
                self.duration
            ));
        }
        if self.block_movement.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(format!("{}: movement outside [0, 1]", self.media_id));
        }
        check_cuts(&self.scene_cuts, self.duration).map_err(|e| format!("{}: {e}", self.media_id))
    }
}

pub(crate) fn check_cuts(cuts: &[f64], duration: f64) -> Result<(), String> {
    if cuts.windows(2).any(|w| !(w[0] < w[1])) {
        return Err("cuts are not strictly increasing".into());
    }
    if cuts.iter().any(|c| !(0.0..=duration).contains(c)) {
        return Err("cut outside [0, duration]".into());
    }
    Ok(())
}

/// Mean absolute per-pixel luminance difference, in `[0, 255]`.
pub fn frame_difference(a: &LumaFrame, b: &LumaFrame) -> Result<f64, VideoError> {
    if a.width != b.width || a.height != b.height || a.pixels.len() != b.pixels.len() {
        return Err(VideoError::DimensionMismatch(a.width, a.height, b.width, b.height));
    }
    if a.pixels.is_empty() {
        return Ok(0.0);
    }
    let total: u64 = a.pixels.iter().zip(&b.pixels).map(|(&x, &y)| u64::from(x.abs_diff(y))).sum();
    Ok(total as f64 / a.pixels.len() as f64)
}

/// Indices into `diffs` that are scene cuts.
///
/// Index `i` is tested once the current window holds `n` values: it is a
/// cut when `diffs[i] > cut_factor * mean(diffs[i-n..i])` and that mean is
/// above [`MEAN_FLOOR`]. After a cut the window starts again right after
/// the cut index.
pub fn scene_cut_indices(diffs: &[f64], window: usize, cut_factor: f64) -> Vec<usize> {
    cut_indices(diffs, window, cut_factor, true)
}

fn cut_indices(diffs: &[f64], window: usize, cut_factor: f64, restart: bool) -> Vec<usize> {
    let mut cuts = Vec::new();
    let mut window_start = 0;
    let mut i = window_start + window;
    while i < diffs.len() {
        let mean = diffs[i - window..i].iter().sum::<f64>() / window as f64;
        if mean > MEAN_FLOOR && diffs[i] > cut_factor * mean {
            cuts.push(i);
            if restart {
                window_start = i + 1;
                i = window_start + window;
            } else {
                i += 1;
            }
        } else {
            i += 1;
        }
    }
    cuts
}

/// Scene cut times in seconds for a per-frame difference series, where
/// `diffs[i]` belongs to the frame at `i / fps`.
pub fn detect_scene_cuts(diffs: &[f64], fps: f64, cfg: &VideoAnalysisConfig) -> Vec<f64> {
    if diffs.len() < 2 || !(fps > 0.0) {
        return Vec::new();
    }
    scene_cut_indices(diffs, cfg.window_frames(fps), cfg.cut_factor).into_iter().map(|i| i as f64 / fps).collect()
}

/// Differences between consecutive frames; entry `j` describes the change
/// into frame `j + 1`.
pub fn adjacent_differences(frames: &[LumaFrame]) -> Result<Vec<f64>, VideoError> {
    frames.windows(2).map(|w| frame_difference(&w[0], &w[1])).collect()
}

/// Averages per-frame differences into 500 ms blocks.
///
/// Difference `j` is stamped at the later frame's time `(j + 1) / fps`.
/// Blocks that receive no difference inherit the previous block's value.
pub fn block_averages(diffs: &[f64], fps: f64, blocks: usize) -> Vec<f64> {
    let mut sums = vec![0.0; blocks];
    let mut counts = vec![0usize; blocks];
    for (j, d) in diffs.iter().enumerate() {
        let t = (j + 1) as f64 / fps;
        let b = ((t / BLOCK_SECONDS + 1e-9).floor() as usize).min(blocks.saturating_sub(1));
        sums[b] += d;
        counts[b] += 1;
    }
    let means: Vec<Option<f64>> = sums.into_iter().zip(counts).map(|(s, c)| (c > 0).then(|| s / c as f64)).collect();
    // Leading empty blocks take the first populated value.
    let mut last = means.iter().flatten().copied().next().unwrap_or(0.0);
    means
        .into_iter()
        .map(|m| {
            if let Some(v) = m {
                last = v;
            }
            last
        })
        .collect()
}

pub fn analyze_video(id: &str, stream: &FrameStream, cfg: &VideoAnalysisConfig) -> Result<MovementProfile, VideoError> {
    cfg.validate()?;
    if stream.frames.len() < 2 {
        return Err(VideoError::TooShort(stream.frames.len()));
    }
    let diffs = adjacent_differences(&stream.frames)?;
    let duration = stream.duration();
    let blocks = block_count(duration);
    let block_movement = min_max_normalize(&block_averages(&diffs, stream.fps, blocks));
    let scene_cuts = scene_cut_indices(&diffs, cfg.window_frames(stream.fps), cfg.cut_factor)
        .into_iter()
        .map(|j| ((j + 1) as f64 / stream.fps).min(duration))
        .collect();
    Ok(MovementProfile { media_id: id.to_string(), block_movement, scene_cuts, fps: stream.fps, duration })
}
