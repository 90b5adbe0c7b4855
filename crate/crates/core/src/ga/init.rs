use rand::Rng;

use super::{restriction_violation, snippets, Chromosome, ClipPool, GaConfig, GaError, Gene};

/// Builds one random chromosome by appending clip sections and silences
/// until `size` genes are filled.
///
/// A clip section starts on a randomly chosen music cut and ends at a
/// uniform block after it, clamped so it never overruns the space left.
pub fn init_chromosome<R: Rng + ?Sized>(
    pool: &ClipPool,
    size: usize,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<Chromosome, GaError> {
    if pool.is_empty() {
        return Err(GaError::NoClips);
    }
    let mut genes = Vec::with_capacity(size);
    let mut remaining = size;
    while remaining > 0 {
        if rng.gen_bool(1.0 - cfg.silence_prob_init) {
            let clip_index = rng.gen_range(0..pool.len());
            let clip = pool.clip(clip_index);
            let start = clip.cut_blocks[rng.gen_range(0..clip.cut_blocks.len())];
            let end = rng.gen_range(start + 1..=clip.block_count()).min(start + remaining);
            genes.extend((start..end).map(|b| Gene::clip(clip_index, b)));
            remaining -= end - start;
        } else {
            let len = rng.gen_range(1..=remaining);
            genes.extend(std::iter::repeat_n(Gene::Silence, len));
            remaining -= len;
        }
    }
    Ok(Chromosome::new(genes))
}

const VALID_ATTEMPTS: usize = 64;

/// A random chromosome that passes both decimation restrictions.
///
/// Tries [`init_chromosome`] a bounded number of times; if none qualifies,
/// the offending snippets of the last attempt are turned into silence.
pub fn fresh_valid_chromosome<R: Rng + ?Sized>(
    pool: &ClipPool,
    size: usize,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<Chromosome, GaError> {
    let min_blocks = cfg.min_snippet_blocks();
    let mut candidate = init_chromosome(pool, size, cfg, rng)?;
    for _ in 1..VALID_ATTEMPTS {
        if restriction_violation(&candidate, pool, min_blocks).is_none() {
            return Ok(candidate);
        }
        candidate = init_chromosome(pool, size, cfg, rng)?;
    }
    for s in snippets(&candidate.genes) {
        if let (Some(clip), Some(start_block)) = (s.source, s.start_block) {
            if s.len() < min_blocks || !pool.clip(clip).is_cut(start_block) {
                candidate.genes[s.start..s.end].fill(Gene::Silence);
            }
        }
    }
    Ok(candidate)
}
