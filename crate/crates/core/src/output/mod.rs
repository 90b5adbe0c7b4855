//! What a run leaves behind: edit decision lists, render scripts and plot
//! CSVs.

mod edl;
mod plots;
mod render;

pub use edl::{chromosome_to_edl, edl_to_chromosome, parse_edl, write_edl, EditDecisionList, EdlEntry, SILENCE_TOKEN};
pub use plots::emit_plots;
pub use render::{emit_render_script, RenderOptions};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("edit decision list line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("no source path known for clip `{0}`")]
    MissingSourcePath(String),
    #[error("edit decision list refers to unknown clip `{0}`")]
    UnknownClip(String),
    #[error("invalid edit decision list: {0}")]
    Invalid(String),
}

impl OutputError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> OutputError {
        let path = path.into();
        move |source| OutputError::Io { path, source }
    }
}
