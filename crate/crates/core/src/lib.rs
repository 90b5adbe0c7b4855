//! Evolutionary soundtrack matching.
//!
//! Both media are reduced to per-500 ms feature blocks: video movement from
//! adjacent-frame differencing plus scene cuts, and audio level plus ten
//! octave bands with detected music transition points. A genetic algorithm
//! then assembles snippets of the audio clips (or silence) into soundtracks
//! that follow the video, and the best candidates are written out as edit
//! decision lists, render scripts and plot data.
//!
//! Module map:
//!
//! - [`ingest`]: external-decoder subprocess contract and feature files.
//! - [`video`]: frame differencing, scene cuts, block movement.
//! - [`audio`]: short-time spectra, block aggregation, music cuts.
//! - [`ga`]: chromosome encoding, fitness, operators and the generation loop.
//! - [`output`]: edit decision lists, render scripts, plot CSVs.
//! - [`pipeline`]: config files and the end-to-end `match` run.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio;
pub mod ga;
pub mod ingest;
pub mod output;
pub mod pipeline;
pub mod video;

/// Length of one analysis block (and one gene) in seconds.
pub const BLOCK_SECONDS: f64 = 0.5;

/// Number of 500 ms blocks needed to cover `duration` seconds.
pub fn block_count(duration: f64) -> usize {
    if duration <= 0.0 {
        return 0;
    }
    // Guard against 70.0 / 0.5 landing a hair above 140.
    (duration / BLOCK_SECONDS - 1e-9).ceil() as usize
}

/// Min-max normalization to `[0, 1]`. A constant series maps to all zeros.
pub(crate) fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if !(range > 0.0) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - min) / range).collect()
}
