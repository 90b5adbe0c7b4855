mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;

struct Fixture {
    _tmp: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let tmp = tempfile::tempdir().unwrap();
        let root = tmp.path().to_path_buf();
        let shots = [
            Shot { seconds: 6.0, base: 60, seed: 2, motion: 5 },
            Shot { seconds: 6.0, base: 170, seed: 9, motion: 13 },
        ];
        write_video(&root.join("v.raw"), &shot_video(&shots, 32, 24));
        write_audio(&root.join("song.raw"), &tone_segments(&[(5.0, 440.0, 0.3), (7.0, 660.0, 0.8)]));
        let mut cfg = raw_config();
        cfg.ga.population_size = 24;
        cfg.ga.generations = 8;
        fs::write(root.join("run.cfg"), cfg.to_text()).unwrap();
        Fixture { _tmp: tmp, root }
    }

    fn path(&self, name: &str) -> String {
        self.root.join(name).to_string_lossy().into_owned()
    }

    fn soundfit(&self, extra: &[&str], audio: &str) -> Output {
        let mut args = vec!["match".to_string(), self.path("v.raw"), self.path(audio)];
        args.extend(["--config".into(), self.path("run.cfg"), "--out".into(), self.path("out")]);
        args.extend(extra.iter().map(|s| s.to_string()));
        Command::new(env!("CARGO_BIN_EXE_soundfit")).args(&args).output().unwrap()
    }
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn match_prints_ranked_candidates() {
    let fx = Fixture::new();
    let out = fx.soundfit(&["--top", "3", "--seed", "11"], "song.raw");
    assert!(out.status.success(), "{}", text(&out.stderr));
    let lines: Vec<String> = text(&out.stdout).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 3);
    for (i, line) in lines.iter().enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields[0], (i + 1).to_string());
        assert!(fields[1].parse::<f64>().is_ok());
        assert!(Path::new(fields[2]).is_file());
    }
    let manifest = fs::read_to_string(fx.root.join("out/manifest.txt")).unwrap();
    assert!(manifest.contains("seed = 11"));
    assert!(manifest.contains("top_k = 3"));
}

#[test]
fn features_only_lists_feature_files() {
    let fx = Fixture::new();
    let out = fx.soundfit(&["--features-only"], "song.raw");
    assert!(out.status.success(), "{}", text(&out.stderr));
    let files: Vec<String> = text(&out.stdout).lines().map(str::to_string).collect();
    assert_eq!(files.len(), 2);
    assert!(files.iter().all(|f| f.ends_with(".gsfeat") && Path::new(f).is_file()));
    assert!(!fx.root.join("out/candidate_1.edl").exists());
}

#[test]
fn missing_audio_fails_with_its_path() {
    let fx = Fixture::new();
    let out = fx.soundfit(&[], "absent.raw");
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(err.starts_with("error:"), "{err}");
    assert!(err.contains("absent.raw"), "{err}");
}

#[test]
fn malformed_weights_are_rejected() {
    let fx = Fixture::new();
    for bad in ["1,2,3", "1,x,0.5,0.25", "1,-1,0.5,0.25"] {
        let out = fx.soundfit(&["--weights", bad], "song.raw");
        assert_eq!(out.status.code(), Some(1), "{bad}");
        assert!(!fx.root.join("out/manifest.txt").exists());
    }
}

#[test]
fn config_errors_name_the_line() {
    let fx = Fixture::new();
    fs::write(fx.root.join("run.cfg"), "seed = 3\nbogus_key = 1\n").unwrap();
    let out = fx.soundfit(&[], "song.raw");
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}
