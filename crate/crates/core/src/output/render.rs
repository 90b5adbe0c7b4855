use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{EditDecisionList, OutputError};

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    /// Media tool invoked by the script; overridable at run time via `$FFMPEG`.
    pub tool: String,
    pub sample_rate: u32,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { tool: "ffmpeg".into(), sample_rate: 44_100 }
    }
}

/// POSIX single-quoting.
fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

fn quote_path(p: &Path) -> String {
    quote(&p.display().to_string())
}

/// A `/bin/sh` script that trims and fades every clip entry, generates
/// silence of the exact length for silence entries, concatenates the parts
/// and muxes the result under the video.
///
/// The script changes to its own directory first and names its outputs
/// relative to it, so the text depends only on the EDL and the input paths.
pub fn emit_render_script(
    edl: &EditDecisionList,
    video_path: &Path,
    audio_paths: &BTreeMap<String, PathBuf>,
    opts: &RenderOptions,
) -> Result<String, OutputError> {
    edl.validate()?;
    let rate = opts.sample_rate;
    let parts = format!("render_{}.parts", edl.rank);
    let output = format!("render_{}.mp4", edl.rank);

    let mut s = String::new();
    let _ = writeln!(s, "#!/bin/sh");
    let _ = writeln!(s, "# rank {} soundtrack for {} (fitness {})", edl.rank, edl.video_id, edl.fitness);
    let _ = writeln!(s, "set -eu");
    let _ = writeln!(s, "cd \"$(dirname \"$0\")\"");
    let _ = writeln!(s, "TOOL=\"${{FFMPEG:-{}}}\"", opts.tool.replace(['"', '$', '`', '\\'], ""));
    let _ = writeln!(s, "PARTS={}", quote(&parts));
    let _ = writeln!(s, "rm -rf \"$PARTS\" && mkdir -p \"$PARTS\"");

    let mut names = Vec::with_capacity(edl.entries.len());
    for (i, e) in edl.entries.iter().enumerate() {
        let name = format!("{i:04}.wav");
        let d = e.duration();
        match &e.clip_id {
            Some(id) => {
                let src = audio_paths.get(id).ok_or_else(|| OutputError::MissingSourcePath(id.clone()))?;
                let out_start = d - e.fade_out;
                let _ = writeln!(
                    s,
                    "\"$TOOL\" -v error -y -ss {} -t {d} -i {} -af 'afade=t=in:st=0:d={},afade=t=out:st={out_start}:d={}' -ar {rate} -ac 1 \"$PARTS/{name}\"",
                    e.source_start,
                    quote_path(src),
                    e.fade_in,
                    e.fade_out
                );
            }
            None => {
                let _ =
                    writeln!(s, "\"$TOOL\" -v error -y -f lavfi -i anullsrc=r={rate}:cl=mono -t {d} \"$PARTS/{name}\"");
            }
        }
        names.push(name);
    }

    let _ = writeln!(s, ": > \"$PARTS/list.txt\"");
    for name in &names {
        let _ = writeln!(s, "echo \"file '{name}'\" >> \"$PARTS/list.txt\"");
    }
    let _ =
        writeln!(s, "\"$TOOL\" -v error -y -f concat -safe 0 -i \"$PARTS/list.txt\" -c copy \"$PARTS/soundtrack.wav\"");
    let _ = writeln!(
        s,
        "\"$TOOL\" -v error -y -i {} -i \"$PARTS/soundtrack.wav\" -map 0:v:0 -map 1:a:0 -c:v copy -c:a aac -t {} {}",
        quote_path(video_path),
        edl.duration(),
        quote(&output)
    );
    let _ = writeln!(s, "rm -rf \"$PARTS\"");
    Ok(s)
}
