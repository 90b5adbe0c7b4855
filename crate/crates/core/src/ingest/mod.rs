//! Raw media acquisition and feature persistence.
//!
//! Decoding is delegated to an external command (ffmpeg by default) that
//! writes raw samples or rasters to its standard output. Extracted profiles
//! are stored as small line-oriented text files so each medium is analyzed
//! only once.

mod decode;
mod features;

pub use decode::{decode_audio, decode_video, probe_media, target_dimensions, DecoderConfig};
pub use features::{load_features, save_features, Profile, FORMAT_VERSION};

use std::fmt;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("decoder `{command}` is not available: {source}")]
    DecoderUnavailable {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("decoding {path} failed: {reason}")]
    DecodeFailed { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {reason}")]
    Format { path: PathBuf, line: usize, reason: String },
    #[error("invalid media descriptor: {0}")]
    InvalidDescriptor(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MediaKind {
    Audio,
    Video,
}

impl MediaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MediaKind::Audio => "audio",
            MediaKind::Video => "video",
        }
    }
}

impl fmt::Display for MediaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MediaKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "audio" => Ok(MediaKind::Audio),
            "video" => Ok(MediaKind::Video),
            other => Err(format!("unknown media kind `{other}`")),
        }
    }
}

/// What the decoder needs to know about one input file.
///
/// `rate` is the sample rate for audio and the frame rate for video.
/// `width`/`height` are the source raster size and are only meaningful for
/// video.
#[derive(Debug, Clone, PartialEq)]
pub struct MediaDescriptor {
    pub id: String,
    pub kind: MediaKind,
    pub duration: f64,
    pub rate: f64,
    pub width: u32,
    pub height: u32,
    pub source_path: PathBuf,
}

impl MediaDescriptor {
    pub fn audio(id: impl Into<String>, path: impl Into<PathBuf>, duration: f64, sample_rate: f64) -> Self {
        MediaDescriptor {
            id: id.into(),
            kind: MediaKind::Audio,
            duration,
            rate: sample_rate,
            width: 0,
            height: 0,
            source_path: path.into(),
        }
    }

    pub fn video(
        id: impl Into<String>,
        path: impl Into<PathBuf>,
        duration: f64,
        fps: f64,
        width: u32,
        height: u32,
    ) -> Self {
        MediaDescriptor {
            id: id.into(),
            kind: MediaKind::Video,
            duration,
            rate: fps,
            width,
            height,
            source_path: path.into(),
        }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let bad = |msg: String| Err(IngestError::InvalidDescriptor(msg));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad(format!("{}: duration must be positive, got {}", self.id, self.duration));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return bad(format!("{}: rate must be positive, got {}", self.id, self.rate));
        }
        if self.kind == MediaKind::Video && (self.width == 0 || self.height == 0) {
            return bad(format!("{}: video without dimensions", self.id));
        }
        Ok(())
    }
}

/// Mono PCM, normalized to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PcmStream {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl PcmStream {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Self {
        PcmStream { samples, sample_rate }
    }

    /// Converts signed 16-bit samples using the ÷32768 convention.
    pub fn from_i16(samples: &[i16], sample_rate: u32) -> Self {
        let samples = samples.iter().map(|&s| f32::from(s) / 32768.0).collect();
        PcmStream { samples, sample_rate }
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }
}

/// One 8-bit luminance raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LumaFrame {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl LumaFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Self {
        assert_eq!(pixels.len(), width * height, "raster size does not match dimensions");
        LumaFrame { width, height, pixels }
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        LumaFrame { width, height, pixels: vec![value; width * height] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameStream {
    pub frames: Vec<LumaFrame>,
    pub fps: f64,
    pub width: usize,
    pub height: usize,
}

impl FrameStream {
    pub fn new(frames: Vec<LumaFrame>, fps: f64) -> Self {
        let (width, height) = frames.first().map(|f| (f.width, f.height)).unwrap_or((0, 0));
        FrameStream { frames, fps, width, height }
    }

    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 / self.fps
    }
}
