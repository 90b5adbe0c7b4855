use std::collections::HashMap;
use std::io::ErrorKind;
use std::path::Path;
use std::process::{Command, Stdio};

use super::{FrameStream, IngestError, LumaFrame, MediaDescriptor, MediaKind, PcmStream};

/// Command templates for the external decoder.
///
/// Templates are split on whitespace into an argument vector before the
/// placeholders `{input}`, `{rate}`, `{width}` and `{height}` are
/// substituted, so paths containing spaces survive intact. No shell is
/// involved.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderConfig {
    /// Must write raw signed 16-bit little-endian mono samples to stdout.
    pub audio_command: String,
    /// Must write raw 8-bit grayscale rasters of `{width}`x`{height}` to stdout.
    pub video_command: String,
    /// Must print `duration=<seconds>` on stdout.
    pub audio_probe: String,
    /// Must print `width=`, `height=`, `r_frame_rate=` and `duration=` lines.
    pub video_probe: String,
    pub sample_rate: u32,
    /// Long edge of the analysis raster; smaller sources are not upscaled.
    pub long_edge: u32,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            audio_command: "ffmpeg -v error -nostdin -i {input} -vn -ac 1 -ar {rate} -f s16le -acodec pcm_s16le -"
                .to_string(),
            video_command: "ffmpeg -v error -nostdin -i {input} -an -vf scale={width}:{height} -pix_fmt gray -f rawvideo -"
                .to_string(),
            audio_probe: "ffprobe -v error -show_entries format=duration -of default=noprint_wrappers=1 {input}"
                .to_string(),
            video_probe: "ffprobe -v error -select_streams v:0 -show_entries stream=width,height,r_frame_rate:format=duration -of default=noprint_wrappers=1 {input}"
                .to_string(),
            sample_rate: 44_100,
            long_edge: 160,
        }
    }
}

/// Analysis raster size for a `width`x`height` source.
pub fn target_dimensions(width: u32, height: u32, long_edge: u32) -> (u32, u32) {
    let long = width.max(height);
    if long <= long_edge || long == 0 {
        return (width, height);
    }
    let scale = f64::from(long_edge) / f64::from(long);
    let w = ((f64::from(width) * scale).round() as u32).max(1);
    let h = ((f64::from(height) * scale).round() as u32).max(1);
    (w, h)
}

fn expand(template: &str, vars: &[(&str, String)]) -> Vec<String> {
    template
        .split_whitespace()
        .map(|arg| {
            let mut arg = arg.to_string();
            for (key, value) in vars {
                arg = arg.replace(&format!("{{{key}}}"), value);
            }
            arg
        })
        .collect()
}

/// Runs a decoder command and returns its standard output.
fn run(argv: &[String], input: &Path) -> Result<Vec<u8>, IngestError> {
    let (program, args) = argv.split_first().ok_or_else(|| IngestError::DecodeFailed {
        path: input.to_path_buf(),
        reason: "empty decoder command".into(),
    })?;
    log::debug!("spawning {argv:?}");
    let output =
        Command::new(program).args(args).stdin(Stdio::null()).output().map_err(|source| match source.kind() {
            ErrorKind::NotFound | ErrorKind::PermissionDenied => {
                IngestError::DecoderUnavailable { command: program.clone(), source }
            }
            _ => IngestError::Io { path: input.to_path_buf(), source },
        })?;
    if !output.status.success() {
        let stderr = String::from_utf8_lossy(&output.stderr);
        let detail = stderr.lines().last().unwrap_or("").trim();
        return Err(IngestError::DecodeFailed {
            path: input.to_path_buf(),
            reason: format!("`{program}` exited with {}: {detail}", output.status),
        });
    }
    Ok(output.stdout)
}

fn parse_rate(value: &str) -> Option<f64> {
    match value.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().ok()?;
            let den: f64 = den.trim().parse().ok()?;
            (den != 0.0).then(|| num / den)
        }
        None => value.trim().parse().ok(),
    }
}

/// Queries duration (and for video, raster size and frame rate) through the
/// configured probe command.
pub fn probe_media(
    id: &str,
    path: &Path,
    kind: MediaKind,
    cfg: &DecoderConfig,
) -> Result<MediaDescriptor, IngestError> {
    let template = match kind {
        MediaKind::Audio => &cfg.audio_probe,
        MediaKind::Video => &cfg.video_probe,
    };
    let argv = expand(template, &[("input", path.display().to_string())]);
    let stdout = run(&argv, path)?;
    let text = String::from_utf8_lossy(&stdout);

    let mut fields: HashMap<&str, &str> = HashMap::new();
    for line in text.lines() {
        if let Some((key, value)) = line.split_once('=') {
            let value = value.trim();
            // Stream-level entries may read N/A while the container has a value.
            if value != "N/A" {
                fields.insert(key.trim(), value);
            }
        }
    }
    let failed = |reason: String| IngestError::DecodeFailed { path: path.to_path_buf(), reason };
    let duration = fields
        .get("duration")
        .and_then(|v| v.parse::<f64>().ok())
        .ok_or_else(|| failed("probe reported no duration".into()))?;

    let descriptor = match kind {
        MediaKind::Audio => MediaDescriptor::audio(id, path, duration, f64::from(cfg.sample_rate)),
        MediaKind::Video => {
            let dim = |key: &str| fields.get(key).and_then(|v| v.parse::<u32>().ok());
            let (width, height) =
                dim("width").zip(dim("height")).ok_or_else(|| failed("probe reported no raster size".into()))?;
            let fps = fields
                .get("r_frame_rate")
                .or_else(|| fields.get("fps"))
                .and_then(|v| parse_rate(v))
                .ok_or_else(|| failed("probe reported no frame rate".into()))?;
            MediaDescriptor::video(id, path, duration, fps, width, height)
        }
    };
    descriptor.validate()?;
    Ok(descriptor)
}

/// Decodes an audio medium to mono PCM at `cfg.sample_rate`.
pub fn decode_audio(descriptor: &MediaDescriptor, cfg: &DecoderConfig) -> Result<PcmStream, IngestError> {
    if descriptor.kind != MediaKind::Audio {
        return Err(IngestError::InvalidDescriptor(format!("{} is not an audio medium", descriptor.id)));
    }
    let path = &descriptor.source_path;
    let argv =
        expand(&cfg.audio_command, &[("input", path.display().to_string()), ("rate", cfg.sample_rate.to_string())]);
    let bytes = run(&argv, path)?;
    pcm_from_s16le(&bytes, cfg.sample_rate)
        .map_err(|reason| IngestError::DecodeFailed { path: path.clone(), reason })
        .inspect(|pcm| {
            let expected = descriptor.duration * f64::from(cfg.sample_rate);
            if (pcm.samples.len() as f64 - expected).abs() > 1.0 {
                log::warn!(
                    "{}: decoded {} samples, container suggests {:.0}; using decoded length",
                    descriptor.id,
                    pcm.samples.len(),
                    expected
                );
            }
        })
}

fn pcm_from_s16le(bytes: &[u8], sample_rate: u32) -> Result<PcmStream, String> {
    if bytes.is_empty() {
        return Err("decoder produced no samples".into());
    }
    if !bytes.len().is_multiple_of(2) {
        return Err(format!("truncated stream: {} bytes is not a whole number of samples", bytes.len()));
    }
    let samples: Vec<i16> = bytes.chunks_exact(2).map(|b| i16::from_le_bytes([b[0], b[1]])).collect();
    Ok(PcmStream::from_i16(&samples, sample_rate))
}

/// Decodes a video medium to grayscale frames at its native frame rate.
pub fn decode_video(descriptor: &MediaDescriptor, cfg: &DecoderConfig) -> Result<FrameStream, IngestError> {
    if descriptor.kind != MediaKind::Video {
        return Err(IngestError::InvalidDescriptor(format!("{} is not a video medium", descriptor.id)));
    }
    descriptor.validate()?;
    let path = &descriptor.source_path;
    let (width, height) = target_dimensions(descriptor.width, descriptor.height, cfg.long_edge);
    let argv = expand(
        &cfg.video_command,
        &[
            ("input", path.display().to_string()),
            ("width", width.to_string()),
            ("height", height.to_string()),
            ("rate", descriptor.rate.to_string()),
        ],
    );
    let bytes = run(&argv, path)?;
    frames_from_gray8(&bytes, width as usize, height as usize, descriptor.rate)
        .map_err(|reason| IngestError::DecodeFailed { path: path.clone(), reason })
}

fn frames_from_gray8(bytes: &[u8], width: usize, height: usize, fps: f64) -> Result<FrameStream, String> {
    let frame_len = width * height;
    if bytes.is_empty() {
        return Err("decoder produced no frames".into());
    }
    if !bytes.len().is_multiple_of(frame_len) {
        return Err(format!(
            "truncated stream: {} bytes is not a whole number of {width}x{height} frames",
            bytes.len()
        ));
    }
    let frames = bytes.chunks_exact(frame_len).map(|chunk| LumaFrame::new(width, height, chunk.to_vec())).collect();
    Ok(FrameStream { frames, fps, width, height })
}
