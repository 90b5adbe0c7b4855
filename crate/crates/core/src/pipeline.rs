//! Configuration files and the end-to-end `match` run.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::audio::{analyze_audio, AudioAnalysisConfig, AudioError, AudioProfile};
use crate::ga::{evolve, ClipPool, FitnessWeights, GaConfig, GaError};
use crate::ingest::{
    decode_audio, decode_video, load_features, probe_media, save_features, DecoderConfig, IngestError, MediaKind,
    Profile,
};
use crate::output::{
    chromosome_to_edl, emit_plots, emit_render_script, write_edl, OutputError, RenderOptions, SILENCE_TOKEN,
};
use crate::video::{analyze_video, MovementProfile, VideoAnalysisConfig, VideoError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("input file {0} does not exist")]
    MissingInput(PathBuf),
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("video analysis of {path} failed: {source}")]
    Video {
        path: PathBuf,
        #[source]
        source: VideoError,
    },
    #[error("audio analysis of {path} failed: {source}")]
    Audio {
        path: PathBuf,
        #[source]
        source: AudioError,
    },
    #[error(transparent)]
    Ga(#[from] GaError),
    #[error(transparent)]
    Output(#[from] OutputError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

/// Everything a run can be configured with.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub ga: GaConfig,
    pub video: VideoAnalysisConfig,
    pub audio: AudioAnalysisConfig,
    pub weights: FitnessWeights,
    pub decoder: DecoderConfig,
    pub render: RenderOptions,
    pub fade_seconds: f64,
    pub top_k: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            ga: GaConfig::default(),
            video: VideoAnalysisConfig::default(),
            audio: AudioAnalysisConfig::default(),
            weights: FitnessWeights::default(),
            decoder: DecoderConfig::default(),
            render: RenderOptions::default(),
            fade_seconds: 0.5,
            top_k: 5,
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("`{value}` is not a valid value for {key}"))
}

impl Config {
    /// Parses flat `key = value` text; `#` starts a comment line. Keys not
    /// mentioned keep their defaults; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Config, PipelineError> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| PipelineError::Config { line: i + 1, reason };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            cfg.set(key.trim(), value.trim()).map_err(err)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config, PipelineError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Config::parse(&text)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        let (ga, va, au, w, dec) =
            (&mut self.ga, &mut self.video, &mut self.audio, &mut self.weights, &mut self.decoder);
        match key {
            "population_size" => ga.population_size = num(key, v)?,
            "generations" => ga.generations = num(key, v)?,
            "tournament_size" => ga.tournament_size = num(key, v)?,
            "selection_fraction" => ga.selection_fraction = num(key, v)?,
            "crossover_rate" => ga.crossover_rate = num(key, v)?,
            "snippet_mutation_prob" => ga.snippet_mutation_prob = num(key, v)?,
            "silence_prob_init" => ga.silence_prob_init = num(key, v)?,
            "min_snippet_seconds" => ga.min_snippet_seconds = num(key, v)?,
            "silence_budget_fraction" => ga.silence_budget_fraction = num(key, v)?,
            "elitism" => ga.elitism = num(key, v)?,
            "seed" => ga.seed = num(key, v)?,
            "window_seconds" => va.window_seconds = num(key, v)?,
            "cut_factor" => va.cut_factor = num(key, v)?,
            "hop_seconds" => au.hop_seconds = num(key, v)?,
            "fft_size" => au.fft_size = num(key, v)?,
            "scale_factor" => au.scale_factor = num(key, v)?,
            "min_segment_seconds" => au.min_segment_seconds = num(key, v)?,
            "target_segment_seconds" => au.target_segment_seconds = num(key, v)?,
            "level_c0" => au.level_coefficients.0 = num(key, v)?,
            "level_c1" => au.level_coefficients.1 = num(key, v)?,
            "proximity_multiplier" => au.proximity_multiplier = num(key, v)?,
            "local_std_blocks" => au.local_std_blocks = num(key, v)?,
            "std_floor_ratio" => au.std_floor_ratio = num(key, v)?,
            "epsilon" => au.epsilon = num(key, v)?,
            "w_corr" => w.corr = num(key, v)?,
            "w_snip" => w.snip = num(key, v)?,
            "w_sil" => w.sil = num(key, v)?,
            "w_temp" => w.temp = num(key, v)?,
            "fade_seconds" => self.fade_seconds = num(key, v)?,
            "top_k" => self.top_k = num(key, v)?,
            "audio_command" => dec.audio_command = v.to_string(),
            "video_command" => dec.video_command = v.to_string(),
            "audio_probe" => dec.audio_probe = v.to_string(),
            "video_probe" => dec.video_probe = v.to_string(),
            "sample_rate" => {
                dec.sample_rate = num(key, v)?;
                self.render.sample_rate = dec.sample_rate;
            }
            "long_edge" => dec.long_edge = num(key, v)?,
            "render_tool" => self.render.tool = v.to_string(),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Settings that affect feature extraction; cached features are only
    /// reused when these match.
    fn analysis_lines(&self) -> String {
        let (v, a, d) = (&self.video, &self.audio, &self.decoder);
        let mut s = String::new();
        for (k, val) in [
            ("window_seconds", v.window_seconds.to_string()),
            ("cut_factor", v.cut_factor.to_string()),
            ("hop_seconds", a.hop_seconds.to_string()),
            ("fft_size", a.fft_size.to_string()),
            ("scale_factor", a.scale_factor.to_string()),
            ("min_segment_seconds", a.min_segment_seconds.to_string()),
            ("target_segment_seconds", a.target_segment_seconds.to_string()),
            ("level_c0", a.level_coefficients.0.to_string()),
            ("level_c1", a.level_coefficients.1.to_string()),
            ("proximity_multiplier", a.proximity_multiplier.to_string()),
            ("local_std_blocks", a.local_std_blocks.to_string()),
            ("std_floor_ratio", a.std_floor_ratio.to_string()),
            ("epsilon", a.epsilon.to_string()),
            ("audio_command", d.audio_command.clone()),
            ("video_command", d.video_command.clone()),
            ("audio_probe", d.audio_probe.clone()),
            ("video_probe", d.video_probe.clone()),
            ("sample_rate", d.sample_rate.to_string()),
            ("long_edge", d.long_edge.to_string()),
        ] {
            let _ = writeln!(s, "{k} = {val}");
        }
        s
    }

    /// The full configuration in the same format [`Config::parse`] reads.
    pub fn to_text(&self) -> String {
        let (g, w) = (&self.ga, &self.weights);
        let mut s = String::new();
        for (k, val) in [
            ("population_size", g.population_size.to_string()),
            ("generations", g.generations.to_string()),
            ("tournament_size", g.tournament_size.to_string()),
            ("selection_fraction", g.selection_fraction.to_string()),
            ("crossover_rate", g.crossover_rate.to_string()),
            ("snippet_mutation_prob", g.snippet_mutation_prob.to_string()),
            ("silence_prob_init", g.silence_prob_init.to_string()),
            ("min_snippet_seconds", g.min_snippet_seconds.to_string()),
            ("silence_budget_fraction", g.silence_budget_fraction.to_string()),
            ("elitism", g.elitism.to_string()),
            ("seed", g.seed.to_string()),
            ("w_corr", w.corr.to_string()),
            ("w_snip", w.snip.to_string()),
            ("w_sil", w.sil.to_string()),
            ("w_temp", w.temp.to_string()),
            ("fade_seconds", self.fade_seconds.to_string()),
            ("top_k", self.top_k.to_string()),
            ("render_tool", self.render.tool.clone()),
        ] {
            let _ = writeln!(s, "{k} = {val}");
        }
        s.push_str(&self.analysis_lines());
        s
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let invalid = |e: String| PipelineError::InvalidConfig(e);
        self.ga.validate()?;
        self.weights.validate()?;
        self.video.validate().map_err(|e| invalid(e.to_string()))?;
        self.audio.validate().map_err(|e| invalid(e.to_string()))?;
        if self.top_k == 0 {
            return Err(invalid("top_k must be >= 1".into()));
        }
        if !(self.fade_seconds >= 0.0) {
            return Err(invalid("fade_seconds must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MatchOptions {
    pub video: PathBuf,
    pub audio: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub config: Config,
    pub features_only: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub video_id: String,
    pub clip_ids: Vec<String>,
    pub feature_files: Vec<PathBuf>,
    /// `(edl path, fitness)` in rank order; empty for a features-only run.
    pub candidates: Vec<(PathBuf, f64)>,
}

/// Media ids from file stems: whitespace becomes `_`, and clashes (with
/// each other or with the silence token) get a numeric suffix.
pub fn media_ids(paths: &[&Path]) -> Vec<String> {
    let mut taken: HashSet<String> = HashSet::from([SILENCE_TOKEN.to_string()]);
    paths
        .iter()
        .map(|p| {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let mut base: String = stem.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
            if base.is_empty() {
                base = "media".into();
            }
            let mut id = base.clone();
            let mut n = 2;
            while !taken.insert(id.clone()) {
                id = format!("{base}-{n}");
                n += 1;
            }
            id
        })
        .collect()
}

pub fn analyze_video_file(id: &str, path: &Path, cfg: &Config) -> Result<MovementProfile, PipelineError> {
    let desc = probe_media(id, path, MediaKind::Video, &cfg.decoder)?;
    let frames = decode_video(&desc, &cfg.decoder)?;
    analyze_video(id, &frames, &cfg.video).map_err(|source| PipelineError::Video { path: path.to_path_buf(), source })
}

pub fn analyze_audio_file(id: &str, path: &Path, cfg: &Config) -> Result<AudioProfile, PipelineError> {
    let desc = probe_media(id, path, MediaKind::Audio, &cfg.decoder)?;
    let pcm = decode_audio(&desc, &cfg.decoder)?;
    analyze_audio(id, &pcm, &cfg.audio).map_err(|source| PipelineError::Audio { path: path.to_path_buf(), source })
}

fn cache_is_fresh(cache: &Path, source: &Path) -> bool {
    let modified = |p: &Path| fs::metadata(p).and_then(|m| m.modified()).ok();
    matches!((modified(cache), modified(source)), (Some(c), Some(s)) if c >= s)
}

/// Loads `<out>/<id>.gsfeat` when it is usable, otherwise analyzes the
/// source and writes the file.
fn profile_for(
    id: &str,
    kind: MediaKind,
    source: &Path,
    out_dir: &Path,
    cfg: &Config,
    cache_ok: bool,
) -> Result<(Profile, PathBuf), PipelineError> {
    let cache = out_dir.join(format!("{id}.gsfeat"));
    if cache_ok && cache_is_fresh(&cache, source) {
        match load_features(&cache) {
            Ok(p) if p.kind() == kind && p.media_id() == id => {
                log::info!("{id}: using cached features {}", cache.display());
                return Ok((p, cache));
            }
            Ok(_) => log::warn!("{}: cached features describe another medium; re-analyzing", cache.display()),
            Err(e) => log::warn!("ignoring unreadable cache: {e}"),
        }
    }
    log::info!("{id}: analyzing {}", source.display());
    let profile = match kind {
        MediaKind::Video => Profile::Video(analyze_video_file(id, source, cfg)?),
        MediaKind::Audio => Profile::Audio(analyze_audio_file(id, source, cfg)?),
    };
    save_features(&profile, &cache)?;
    Ok((profile, cache))
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(io_err(path))
}

#[cfg(unix)]
fn make_executable(path: &Path) -> Result<(), PipelineError> {
    use std::os::unix::fs::PermissionsExt;
    fs::set_permissions(path, fs::Permissions::from_mode(0o755)).map_err(io_err(path))
}

#[cfg(not(unix))]
fn make_executable(_: &Path) -> Result<(), PipelineError> {
    Ok(())
}

/// Analyze (or reuse cached features) → evolve → write the top-K EDLs,
/// render scripts, plot CSVs and `manifest.txt` into `out_dir`.
pub fn run_match(opts: &MatchOptions) -> Result<MatchReport, PipelineError> {
    let cfg = &opts.config;
    cfg.validate()?;
    if opts.audio.is_empty() {
        return Err(GaError::NoClips.into());
    }
    for p in std::iter::once(&opts.video).chain(&opts.audio) {
        if !p.is_file() {
            return Err(PipelineError::MissingInput(p.clone()));
        }
    }
    let out = &opts.out_dir;
    fs::create_dir_all(out).map_err(io_err(out))?;

    let paths: Vec<&Path> =
        std::iter::once(opts.video.as_path()).chain(opts.audio.iter().map(PathBuf::as_path)).collect();
    let ids = media_ids(&paths);

    // Cached features are only trusted if they were made with these settings.
    let key_path = out.join("features.cfg");
    let key = cfg.analysis_lines();
    let cache_ok = fs::read_to_string(&key_path).is_ok_and(|k| k == key);
    let profiles = ids
        .par_iter()
        .zip(paths.par_iter())
        .enumerate()
        .map(|(i, (id, path))| {
            let kind = if i == 0 { MediaKind::Video } else { MediaKind::Audio };
            profile_for(id, kind, path, out, cfg, cache_ok)
        })
        .collect::<Result<Vec<_>, _>>()?;
    write_file(&key_path, &key)?;

    let feature_files: Vec<PathBuf> = profiles.iter().map(|(_, p)| p.clone()).collect();
    let mut profiles = profiles.into_iter().map(|(p, _)| p);
    let Some(Profile::Video(video)) = profiles.next() else {
        unreachable!("first profile is the video");
    };
    let clips: Vec<AudioProfile> = profiles
        .map(|p| match p {
            Profile::Audio(a) => a,
            Profile::Video(_) => unreachable!("remaining profiles are audio"),
        })
        .collect();

    let mut report = MatchReport {
        video_id: video.media_id.clone(),
        clip_ids: clips.iter().map(|c| c.media_id.clone()).collect(),
        feature_files,
        candidates: Vec::new(),
    };
    if opts.features_only {
        return Ok(report);
    }

    let pool = ClipPool::from_profiles(&clips)?;
    let evolution = evolve(&video, &pool, &cfg.weights, &cfg.ga)?;
    let audio_paths: BTreeMap<String, PathBuf> =
        report.clip_ids.iter().cloned().zip(opts.audio.iter().cloned()).collect();

    let plots = out.join("plots");
    for (i, c) in evolution.hall_of_fame.iter().take(cfg.top_k).enumerate() {
        let rank = i + 1;
        let edl = chromosome_to_edl(c, &pool, &video.media_id, rank, cfg.fade_seconds);
        let edl_path = out.join(format!("candidate_{rank}.edl"));
        write_file(&edl_path, &write_edl(&edl))?;
        let script_path = out.join(format!("render_{rank}.sh"));
        write_file(&script_path, &emit_render_script(&edl, &opts.video, &audio_paths, &cfg.render)?)?;
        make_executable(&script_path)?;
        emit_plots(&video, &pool, &edl, &plots)?;
        report.candidates.push((edl_path, edl.fitness));
    }

    let mut manifest = String::new();
    let _ = writeln!(manifest, "video = {}", video.media_id);
    let _ = writeln!(manifest, "clips = {}", report.clip_ids.join(","));
    let _ = writeln!(manifest, "video_blocks = {}", video.block_movement.len());
    let _ = writeln!(manifest, "generations_run = {}", evolution.best_per_generation.len() - 1);
    manifest.push_str(&cfg.to_text());
    for (rank, (_, fitness)) in report.candidates.iter().enumerate() {
        let _ = writeln!(manifest, "candidate_{} = {fitness}", rank + 1);
    }
    write_file(&out.join("manifest.txt"), &manifest)?;
    log::info!("wrote {} candidates to {}", report.candidates.len(), out.display());
    Ok(report)
}

/// `candidate_<rank> = fitness` entries of a manifest, in rank order.
pub fn manifest_fitness(text: &str) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = text
        .lines()
        .filter_map(|l| {
            let (k, v) = l.split_once('=')?;
            let rank = k.trim().strip_prefix("candidate_")?.parse().ok()?;
            Some((rank, v.trim().parse().ok()?))
        })
        .collect();
    out.sort_by_key(|&(r, _)| r);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let cfg = Config::parse("# comment\nseed = 42\nw_sil = 0.75\nscale_factor=100\naudio_command = cat {input}\n")
            .unwrap();
        assert_eq!(cfg.ga.seed, 42);
        assert_eq!(cfg.weights.sil, 0.75);
        assert_eq!(cfg.audio.scale_factor, 100.0);
        assert_eq!(cfg.decoder.audio_command, "cat {input}");
        assert_eq!(Config::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn config_errors_name_the_line() {
        let e = Config::parse("seed = 1\nbogus = 3\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(e.to_string().contains("bogus"));
        assert!(Config::parse("seed = x").is_err());
        assert!(Config::parse("seed").is_err());
    }

    #[test]
    fn ids_are_sanitized_and_unique() {
        let paths =
            [Path::new("/a/my clip.wav"), Path::new("/b/my clip.mp3"), Path::new("/c/SILENCE.wav"), Path::new("x.wav")];
        assert_eq!(media_ids(&paths), vec!["my_clip", "my_clip-2", "SILENCE-2", "x"]);
    }

    #[test]
    fn manifest_fitness_parsing() {
        let m = "seed = 1\ncandidate_2 = 0.5\ncandidate_1 = 0.75\n";
        assert_eq!(manifest_fitness(m), vec![(1, 0.75), (2, 0.5)]);
    }

    #[test]
    fn missing_input_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let video = dir.path().join("v.raw");
        fs::write(&video, b"x").unwrap();
        let opts = MatchOptions {
            video,
            audio: vec![dir.path().join("nowhere.wav")],
            out_dir: dir.path().join("out"),
            config: Config::default(),
            features_only: false,
        };
        let e = run_match(&opts).unwrap_err();
        assert!(e.to_string().contains("nowhere.wav"), "{e}");
    }
}
