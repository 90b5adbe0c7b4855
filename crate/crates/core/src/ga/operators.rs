use rand::Rng;

use super::{
    fresh_valid_chromosome, restriction_violation, snippets, Chromosome, ClipPool, GaConfig, GaError, Gene, Snippet,
};

/// Picks `k` members uniformly with replacement and returns the index of
/// the fittest; ties go to the lowest index.
pub fn tournament_select<R: Rng + ?Sized>(population: &[Chromosome], k: usize, rng: &mut R) -> Result<usize, GaError> {
    if population.is_empty() {
        return Err(GaError::EmptyPopulation);
    }
    let mut best: Option<(usize, f64)> = None;
    for _ in 0..k.max(1) {
        let i = rng.gen_range(0..population.len());
        let f = population[i].fitness.ok_or(GaError::Unevaluated(i))?;
        best = match best {
            Some((bi, bf)) if bf > f || (bf == f && bi < i) => Some((bi, bf)),
            _ => Some((i, f)),
        };
    }
    Ok(best.expect("k >= 1").0)
}

/// Exchanges the tails of two parents after gene `point`.
pub fn crossover_at(a: &Chromosome, b: &Chromosome, point: usize) -> Result<(Chromosome, Chromosome), GaError> {
    if a.len() != b.len() {
        return Err(GaError::LengthMismatch { expected: a.len(), actual: b.len() });
    }
    let p = point.min(a.len());
    let mut first = a.genes[..p].to_vec();
    first.extend_from_slice(&b.genes[p..]);
    let mut second = b.genes[..p].to_vec();
    second.extend_from_slice(&a.genes[p..]);
    Ok((Chromosome::new(first), Chromosome::new(second)))
}

/// One-point crossover at a uniform gene index in `[1, len - 1]`.
pub fn crossover<R: Rng + ?Sized>(
    a: &Chromosome,
    b: &Chromosome,
    rng: &mut R,
) -> Result<(Chromosome, Chromosome), GaError> {
    if a.len() != b.len() {
        return Err(GaError::LengthMismatch { expected: a.len(), actual: b.len() });
    }
    if a.len() < 2 {
        return Ok((Chromosome::new(a.genes.clone()), Chromosome::new(b.genes.clone())));
    }
    let point = rng.gen_range(1..a.len());
    crossover_at(a, b, point)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationKind {
    /// Swap places with an adjacent snippet.
    Move,
    /// Overwrite the snippet with a section starting at a random music cut.
    Replace,
    /// Grow or shrink by 1-4 blocks, a neighbor absorbing the difference.
    Stretch,
    /// Overwrite the snippet with silence.
    Remove,
}

const KINDS: [MutationKind; 4] =
    [MutationKind::Move, MutationKind::Replace, MutationKind::Stretch, MutationKind::Remove];
const MAX_STRETCH: usize = 4;

/// `len` genes playing on from `first`, or `None` if that leaves the clip.
fn run_from(pool: &ClipPool, first: Gene, len: usize) -> Option<Vec<Gene>> {
    match first {
        Gene::Silence => Some(vec![Gene::Silence; len]),
        Gene::Clip { clip, block } => {
            let end = block as usize + len;
            (end <= pool.clip(clip as usize).block_count())
                .then(|| (block as usize..end).map(|b| Gene::clip(clip as usize, b)).collect())
        }
    }
}

/// Moves the boundary between snippet `idx` and a neighbor by `d` genes.
/// Every snippet keeps its first block, so cut alignment is preserved: the
/// side that grows plays further into its clip and the side that shrinks
/// loses its tail. The right neighbor is tried first.
fn stretch(genes: &mut [Gene], parts: &[Snippet], idx: usize, grow: bool, d: usize, pool: &ClipPool) -> bool {
    let s = parts[idx];
    let head = genes[s.start];
    if let Some(&r) = parts.get(idx + 1) {
        let r_head = genes[r.start];
        if grow && r.len() > d {
            if let (Some(new_s), Some(new_r)) = (run_from(pool, head, s.len() + d), run_from(pool, r_head, r.len() - d))
            {
                genes[s.start..s.end + d].copy_from_slice(&new_s);
                genes[s.end + d..r.end].copy_from_slice(&new_r);
                return true;
            }
        }
        if !grow && s.len() > d {
            if let Some(new_r) = run_from(pool, r_head, r.len() + d) {
                genes[s.end - d..r.end].copy_from_slice(&new_r);
                return true;
            }
        }
    }
    if let Some(&l) = idx.checked_sub(1).map(|i| &parts[i]) {
        if grow && l.len() > d {
            if let Some(new_s) = run_from(pool, head, s.len() + d) {
                genes[s.start - d..s.end].copy_from_slice(&new_s);
                return true;
            }
        }
        if !grow && s.len() > d {
            if let (Some(new_l), Some(new_s)) =
                (run_from(pool, genes[l.start], l.len() + d), run_from(pool, head, s.len() - d))
            {
                genes[l.start..l.end + d].copy_from_slice(&new_l);
                genes[s.start + d..s.end].copy_from_slice(&new_s);
                return true;
            }
        }
    }
    false
}

/// Applies one mutation to snippet `idx`. Returns whether anything changed
/// (infeasible mutations are skipped). Chromosome length never changes.
pub fn apply_mutation<R: Rng + ?Sized>(
    genes: &mut [Gene],
    idx: usize,
    kind: MutationKind,
    pool: &ClipPool,
    rng: &mut R,
) -> bool {
    let parts = snippets(genes);
    let Some(&s) = parts.get(idx) else {
        return false;
    };
    let before = genes.to_vec();
    match kind {
        MutationKind::Move => {
            let left = idx.checked_sub(1).map(|i| parts[i]);
            let right = parts.get(idx + 1).copied();
            let neighbor = match (left, right) {
                (None, None) => return false,
                (Some(l), Some(r)) => {
                    if rng.gen_bool(0.5) {
                        r
                    } else {
                        l
                    }
                }
                (l, r) => l.or(r).expect("one neighbor"),
            };
            // Swap places with the whole neighbor so neither is cut apart.
            if neighbor.start > s.start {
                genes[s.start..neighbor.end].rotate_left(s.len());
            } else {
                genes[neighbor.start..s.end].rotate_left(neighbor.len());
            }
        }
        MutationKind::Replace => {
            let clip_index = rng.gen_range(0..pool.len());
            let clip = pool.clip(clip_index);
            let cut = clip.cut_blocks[rng.gen_range(0..clip.cut_blocks.len())];
            let audible = s.len().min(clip.block_count() - cut);
            for (j, g) in genes[s.start..s.end].iter_mut().enumerate() {
                *g = if j < audible { Gene::clip(clip_index, cut + j) } else { Gene::Silence };
            }
        }
        MutationKind::Stretch => {
            let grow = rng.gen_bool(0.5);
            let d = rng.gen_range(1..=MAX_STRETCH);
            if !stretch(genes, &parts, idx, grow, d, pool) {
                return false;
            }
        }
        MutationKind::Remove => genes[s.start..s.end].fill(Gene::Silence),
    }
    genes != before.as_slice()
}

/// Mutates each snippet independently with probability `prob`, choosing
/// uniformly among the four mutation kinds.
pub fn mutate<R: Rng + ?Sized>(c: &Chromosome, pool: &ClipPool, prob: f64, rng: &mut R) -> Chromosome {
    let mut genes = c.genes.clone();
    let mut changed = false;
    let mut idx = 0;
    while idx < snippets(&genes).len() {
        if rng.gen_bool(prob) {
            let kind = KINDS[rng.gen_range(0..KINDS.len())];
            changed |= apply_mutation(&mut genes, idx, kind, pool, rng);
        }
        idx += 1;
    }
    if changed && genes != c.genes {
        Chromosome::new(genes)
    } else {
        c.clone()
    }
}

/// Replaces every chromosome that breaks a restriction (snippet shorter
/// than the minimum or not starting on a music cut) with a fresh valid
/// one, in place. Valid chromosomes keep their position.
pub fn decimate<R: Rng + ?Sized>(
    mut population: Vec<Chromosome>,
    pool: &ClipPool,
    size: usize,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<Vec<Chromosome>, GaError> {
    let min_blocks = cfg.min_snippet_blocks();
    for c in population.iter_mut() {
        if c.len() != size || restriction_violation(c, pool, min_blocks).is_some() {
            *c = fresh_valid_chromosome(pool, size, cfg, rng)?;
        }
    }
    Ok(population)
}
