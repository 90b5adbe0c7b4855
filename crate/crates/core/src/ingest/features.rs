//! `.gsfeat` feature files.
//!
//! ```text
//! GSFEAT 1 <kind> <id> <duration> <rate-or-fps>
//! B <level> <band0> ... <band9>      (audio, one line per block)
//! B <movement>                       (video, one line per block)
//! C <seconds>                        (one line per cut)
//! ```
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! load after a save reproduces every value bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{IngestError, MediaKind};
use crate::audio::{AudioProfile, BAND_COUNT};
use crate::video::MovementProfile;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "GSFEAT";

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Audio(AudioProfile),
    Video(MovementProfile),
}

impl Profile {
    pub fn kind(&self) -> MediaKind {
        match self {
            Profile::Audio(_) => MediaKind::Audio,
            Profile::Video(_) => MediaKind::Video,
        }
    }

    pub fn media_id(&self) -> &str {
        match self {
            Profile::Audio(p) => &p.media_id,
            Profile::Video(p) => &p.media_id,
        }
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            Profile::Audio(p) => p.validate(),
            Profile::Video(p) => p.validate(),
        }
    }
}

impl From<AudioProfile> for Profile {
    fn from(p: AudioProfile) -> Self {
        Profile::Audio(p)
    }
}

impl From<MovementProfile> for Profile {
    fn from(p: MovementProfile) -> Self {
        Profile::Video(p)
    }
}

pub fn save_features(profile: &Profile, path: &Path) -> Result<(), IngestError> {
    let format_err = |reason: String| IngestError::Format { path: path.to_path_buf(), line: 0, reason };
    profile.validate().map_err(format_err)?;
    let id = profile.media_id();
    if id.is_empty() || id.chars().any(char::is_whitespace) {
        return Err(format_err(format!("media id `{id}` must be non-empty and free of whitespace")));
    }

    let mut out = String::new();
    match profile {
        Profile::Audio(p) => {
            let _ = writeln!(out, "{MAGIC} {FORMAT_VERSION} audio {} {} {}", p.media_id, p.duration, p.sample_rate);
            for (level, bands) in p.block_level.iter().zip(&p.block_bands) {
                let _ = write!(out, "B {level}");
                for b in bands {
                    let _ = write!(out, " {b}");
                }
                out.push('\n');
            }
            for c in &p.music_cuts {
                let _ = writeln!(out, "C {c}");
            }
        }
        Profile::Video(p) => {
            let _ = writeln!(out, "{MAGIC} {FORMAT_VERSION} video {} {} {}", p.media_id, p.duration, p.fps);
            for m in &p.block_movement {
                let _ = writeln!(out, "B {m}");
            }
            for c in &p.scene_cuts {
                let _ = writeln!(out, "C {c}");
            }
        }
    }
    fs::write(path, out).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })
}

pub fn load_features(path: &Path) -> Result<Profile, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    parse(&text).map_err(|(line, reason)| IngestError::Format { path: path.to_path_buf(), line, reason })
}

fn num(token: &str, line: usize) -> Result<f64, (usize, String)> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| (line, format!("`{token}` is not a finite number")))
}

fn parse(text: &str) -> Result<Profile, (usize, String)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or((1, "empty file".to_string()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 6 || fields[0] != MAGIC {
        return Err((1, "expected `GSFEAT <version> <kind> <id> <duration> <rate>`".into()));
    }
    let version: u32 = fields[1].parse().map_err(|_| (1, format!("bad version `{}`", fields[1])))?;
    if version != FORMAT_VERSION {
        return Err((1, format!("unsupported format version {version} (expected {FORMAT_VERSION})")));
    }
    let kind: MediaKind = fields[2].parse().map_err(|e| (1, e))?;
    let id = fields[3].to_string();
    let duration = num(fields[4], 1)?;
    let rate = num(fields[5], 1)?;

    let mut blocks: Vec<Vec<f64>> = Vec::new();
    let mut cuts = Vec::new();
    for (n, line) in lines {
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            None => continue,
            Some("B") => {
                if !cuts.is_empty() {
                    return Err((n, "block line after cut lines".into()));
                }
                let values = tokens.map(|t| num(t, n)).collect::<Result<Vec<_>, _>>()?;
                let expected = match kind {
                    MediaKind::Audio => 1 + BAND_COUNT,
                    MediaKind::Video => 1,
                };
                if values.len() != expected {
                    return Err((n, format!("expected {expected} values, found {}", values.len())));
                }
                blocks.push(values);
            }
            Some("C") => {
                let value = tokens.next().ok_or((n, "cut line without a time".to_string()))?;
                if tokens.next().is_some() {
                    return Err((n, "trailing data on cut line".into()));
                }
                cuts.push(num(value, n)?);
            }
            Some(other) => return Err((n, format!("unknown record `{other}`"))),
        }
    }

    let profile = match kind {
        MediaKind::Audio => {
            if rate.fract() != 0.0 || rate <= 0.0 || rate > f64::from(u32::MAX) {
                return Err((1, format!("sample rate `{rate}` is not a positive integer")));
            }
            let mut block_level = Vec::with_capacity(blocks.len());
            let mut block_bands = Vec::with_capacity(blocks.len());
            for b in &blocks {
                block_level.push(b[0]);
                let mut bands = [0.0; BAND_COUNT];
                bands.copy_from_slice(&b[1..]);
                block_bands.push(bands);
            }
            Profile::Audio(AudioProfile {
                media_id: id,
                block_level,
                block_bands,
                music_cuts: cuts,
                duration,
                sample_rate: rate as u32,
            })
        }
        MediaKind::Video => Profile::Video(MovementProfile {
            media_id: id,
            block_movement: blocks.iter().map(|b| b[0]).collect(),
            scene_cuts: cuts,
            fps: rate,
            duration,
        }),
    };
    profile.validate().map_err(|reason| (0, reason))?;
    Ok(profile)
}
