use std::fs;
use std::path::{Path, PathBuf};

use super::{EditDecisionList, OutputError};
use crate::ga::ClipPool;
use crate::video::MovementProfile;
use crate::BLOCK_SECONDS;

fn csv_error(path: &Path, e: csv::Error) -> OutputError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    OutputError::Io { path: path.to_path_buf(), source }
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(OutputError::io(path))
}

fn series_rows(values: &[f64], is_cut: impl Fn(usize) -> bool) -> Vec<Vec<String>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let flag = if is_cut(i) { "1" } else { "0" };
            vec![(i as f64 * BLOCK_SECONDS).to_string(), v.to_string(), flag.to_string()]
        })
        .collect()
}

/// Writes `movement.csv`, one `audio_<clip>.csv` per clip and
/// `selections_<rank>.csv` into `dir`, returning the files written.
///
/// Series files have one row per block (`time,value,isCut`), flagged when a
/// cut falls inside the block. The selections file has one row per EDL
/// entry, silence included.
pub fn emit_plots(
    video: &MovementProfile,
    pool: &ClipPool,
    edl: &EditDecisionList,
    dir: &Path,
) -> Result<Vec<PathBuf>, OutputError> {
    fs::create_dir_all(dir).map_err(OutputError::io(dir))?;
    let header = ["time", "value", "isCut"];
    let mut written = Vec::new();

    let path = dir.join("movement.csv");
    let in_block = |i: usize, t: f64| {
        let start = i as f64 * BLOCK_SECONDS;
        t >= start && t < start + BLOCK_SECONDS
    };
    let rows = series_rows(&video.block_movement, |i| video.scene_cuts.iter().any(|&t| in_block(i, t)));
    write_rows(&path, &header, rows)?;
    written.push(path);

    for clip in pool.clips() {
        let path = dir.join(format!("audio_{}.csv", clip.id));
        write_rows(&path, &header, series_rows(&clip.block_level, |i| clip.is_cut(i)))?;
        written.push(path);
    }

    let path = dir.join(format!("selections_{}.csv", edl.rank));
    let rows = edl.entries.iter().map(|e| {
        vec![
            e.clip_id.clone().unwrap_or_else(|| super::SILENCE_TOKEN.to_string()),
            e.source_start.to_string(),
            e.source_end.to_string(),
            e.dest_start.to_string(),
        ]
    });
    write_rows(&path, &["clipId", "sourceStart", "sourceEnd", "destStart"], rows)?;
    written.push(path);
    Ok(written)
}
