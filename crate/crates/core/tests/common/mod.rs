//! Synthetic media and independent reference computations shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use soundfit::ga::{Chromosome, ClipPool, FitnessWeights, Gene};
use soundfit::ingest::{FrameStream, LumaFrame};
use soundfit::pipeline::Config;
use soundfit::video::MovementProfile;

pub const SAMPLE_RATE: u32 = 44_100;
pub const FPS: f64 = 25.0;

/// A config whose "decoder" is `cat`: media files hold raw s16le / gray8
/// data and a `<file>.probe` sidecar answers the probe.
pub fn raw_config() -> Config {
    let mut cfg = Config::default();
    cfg.decoder.audio_command = "cat {input}".into();
    cfg.decoder.video_command = "cat {input}".into();
    cfg.decoder.audio_probe = "cat {input}.probe".into();
    cfg.decoder.video_probe = "cat {input}.probe".into();
    cfg.decoder.sample_rate = SAMPLE_RATE;
    cfg.render.sample_rate = SAMPLE_RATE;
    cfg
}

/// A tone made of `(seconds, frequency, amplitude)` segments. Samples are
/// even integers so that halving them is exact.
pub fn tone_segments(segments: &[(f64, f64, f64)]) -> Vec<i16> {
    let mut out = Vec::new();
    let mut phase = 0.0f64;
    for &(seconds, freq, amp) in segments {
        let n = (seconds * SAMPLE_RATE as f64).round() as usize;
        let step = 2.0 * PI * freq / SAMPLE_RATE as f64;
        for _ in 0..n {
            let v = (amp * 32_000.0 * phase.sin()).round() as i32;
            out.push((v & !1) as i16);
            phase = (phase + step) % (2.0 * PI);
        }
    }
    out
}

pub fn write_audio(path: &Path, samples: &[i16]) {
    let bytes: Vec<u8> = samples.iter().flat_map(|s| s.to_le_bytes()).collect();
    fs::write(path, bytes).unwrap();
    let duration = samples.len() as f64 / SAMPLE_RATE as f64;
    fs::write(probe_path(path), format!("duration={duration}\n")).unwrap();
}

pub fn write_video(path: &Path, stream: &FrameStream) {
    let bytes: Vec<u8> = stream.frames.iter().flat_map(|f| f.pixels.iter().copied()).collect();
    fs::write(path, bytes).unwrap();
    fs::write(
        probe_path(path),
        format!(
            "width={}\nheight={}\nr_frame_rate=25/1\nduration={}\n",
            stream.width,
            stream.height,
            stream.duration()
        ),
    )
    .unwrap();
}

fn probe_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".probe");
    PathBuf::from(p)
}

/// One shot: a textured pattern at `base` brightness that shimmers every
/// frame. Distinct `(base, seed)` give clearly different content.
#[derive(Debug, Clone, Copy)]
pub struct Shot {
    pub seconds: f64,
    pub base: u8,
    pub seed: usize,
    /// Modulus of the shimmer; the mean per-frame change is about half of it.
    pub motion: usize,
}

pub fn shot_video(shots: &[Shot], width: usize, height: usize) -> FrameStream {
    let mut frames = Vec::new();
    for s in shots {
        let count = (s.seconds * FPS).round() as usize;
        let (a, b, c) = (3 + s.seed % 7, 5 + s.seed % 11, 1 + s.seed % 5);
        for k in 0..count {
            let pixels = (0..width * height)
                .map(|p| {
                    let (x, y) = (p % width, p / width);
                    let texture = (x * a + y * b) % 23;
                    let shimmer = if s.motion > 1 { (x * c + y * 7 + k) % s.motion } else { 0 };
                    (s.base as usize + texture + shimmer).min(255) as u8
                })
                .collect();
            frames.push(LumaFrame::new(width, height, pixels));
        }
    }
    FrameStream::new(frames, FPS)
}

/// Brute force over every chromosome of `size` genes that satisfies the
/// duration and cut-alignment restrictions, built by tiling snippets.
pub fn enumerate_valid(pool: &ClipPool, size: usize, min_blocks: usize) -> Vec<Vec<Gene>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut genes = Vec::with_capacity(size);
    tile(pool, size, min_blocks, &mut genes, &mut seen, &mut out);
    out
}

fn tile(
    pool: &ClipPool,
    size: usize,
    min_blocks: usize,
    genes: &mut Vec<Gene>,
    seen: &mut HashSet<Vec<Gene>>,
    out: &mut Vec<Vec<Gene>>,
) {
    let remaining = size - genes.len();
    if remaining == 0 {
        if seen.insert(genes.clone()) {
            out.push(genes.clone());
        }
        return;
    }
    for len in 1..=remaining {
        genes.extend(std::iter::repeat_n(Gene::Silence, len));
        tile(pool, size, min_blocks, genes, seen, out);
        genes.truncate(genes.len() - len);
    }
    for (ci, clip) in pool.clips().iter().enumerate() {
        for &cut in &clip.cut_blocks {
            let max_len = remaining.min(clip.block_count() - cut);
            for len in min_blocks..=max_len {
                genes.extend((cut..cut + len).map(|b| Gene::clip(ci, b)));
                tile(pool, size, min_blocks, genes, seen, out);
                genes.truncate(genes.len() - len);
            }
        }
    }
}

/// Straightforward restatement of the fitness for cross-checking: snippets
/// split wherever playback is not continuous.
pub fn reference_fitness(
    genes: &[Gene],
    video: &MovementProfile,
    pool: &ClipPool,
    w: &FitnessWeights,
    min_blocks: usize,
    silence_budget: f64,
) -> f64 {
    let n = genes.len() as f64;
    let level = |g: &Gene| match g {
        Gene::Silence => 0.0,
        Gene::Clip { clip, block } => pool.clip(*clip as usize).block_level[*block as usize],
    };
    let x: Vec<f64> = genes.iter().map(level).collect();
    let y = &video.block_movement;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r = if vx == 0.0 || vy == 0.0 { 0.0 } else { cov / (vx * vy).sqrt() };
    let f_corr = (1.0 + r) / 2.0;

    let mut starts = vec![0usize];
    for i in 1..genes.len() {
        let continues = match (genes[i - 1], genes[i]) {
            (Gene::Silence, Gene::Silence) => true,
            (Gene::Clip { clip: a, block: p }, Gene::Clip { clip: b, block: q }) => a == b && q == p + 1,
            _ => false,
        };
        if !continues {
            starts.push(i);
        }
    }
    let f_snip = ((n / starts.len() as f64) / (2.0 * min_blocks as f64)).min(1.0);

    let silence = genes.iter().filter(|g| **g == Gene::Silence).count() as f64 / n;
    let f_sil = if silence <= silence_budget { 1.0 } else { (1.0 - silence) / (1.0 - silence_budget) };

    let clip_starts: Vec<usize> = starts.into_iter().filter(|&s| genes[s] != Gene::Silence).collect();
    let f_temp = if clip_starts.is_empty() {
        0.0
    } else {
        let anchors: Vec<f64> = std::iter::once(0.0).chain(video.scene_cuts.iter().map(|t| t * 2.0)).collect();
        clip_starts
            .iter()
            .map(|&s| {
                let d = anchors.iter().map(|a| (s as f64 - a).abs()).fold(f64::INFINITY, f64::min);
                (-d / 4.0).exp()
            })
            .sum::<f64>()
            / clip_starts.len() as f64
    };
    w.corr * f_corr + w.snip * f_snip + w.sil * f_sil + w.temp * f_temp
}

/// Optimum of `reference_fitness` over all valid chromosomes, with the
/// silence fraction of the (first) optimal chromosome.
pub fn oracle_optimum(
    pool: &ClipPool,
    video: &MovementProfile,
    w: &FitnessWeights,
    min_blocks: usize,
    silence_budget: f64,
) -> (f64, f64, Vec<Gene>) {
    let mut best = (f64::NEG_INFINITY, 0.0, Vec::new());
    for genes in enumerate_valid(pool, video.block_movement.len(), min_blocks) {
        let f = reference_fitness(&genes, video, pool, w, min_blocks, silence_budget);
        if f > best.0 {
            let sil = Chromosome::new(genes.clone()).silence_fraction();
            best = (f, sil, genes);
        }
    }
    best
}

pub fn movement_profile(movement: Vec<f64>, scene_cuts: Vec<f64>) -> MovementProfile {
    MovementProfile {
        media_id: "video".into(),
        duration: movement.len() as f64 * 0.5,
        block_movement: movement,
        scene_cuts,
        fps: FPS,
    }
}
