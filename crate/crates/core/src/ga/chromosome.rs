use super::ClipPool;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gene {
    Silence,
    Clip { clip: u32, block: u32 },
}

impl Gene {
    pub fn clip(clip: usize, block: usize) -> Gene {
        Gene::Clip { clip: clip as u32, block: block as u32 }
    }

    pub fn is_silence(self) -> bool {
        matches!(self, Gene::Silence)
    }

    /// Whether `next` continues playback right after `self`.
    pub fn continues_into(self, next: Gene) -> bool {
        match (self, next) {
            (Gene::Silence, Gene::Silence) => true,
            (Gene::Clip { clip: a, block: i }, Gene::Clip { clip: b, block: j }) => a == b && j == i + 1,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub genes: Vec<Gene>,
    pub fitness: Option<f64>,
}

impl Chromosome {
    pub fn new(genes: Vec<Gene>) -> Self {
        Chromosome { genes, fitness: None }
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn snippets(&self) -> Vec<Snippet> {
        snippets(&self.genes)
    }

    pub fn silence_fraction(&self) -> f64 {
        if self.genes.is_empty() {
            return 0.0;
        }
        self.genes.iter().filter(|g| g.is_silence()).count() as f64 / self.genes.len() as f64
    }
}

/// A maximal run of genes that plays one clip continuously, or a maximal
/// run of silence. `end` is exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Snippet {
    pub source: Option<usize>,
    pub start: usize,
    pub end: usize,
    pub start_block: Option<usize>,
}

impl Snippet {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn is_silence(&self) -> bool {
        self.source.is_none()
    }
}

/// Splits genes into snippets. Two adjacent genes of the same clip belong
/// to the same snippet only when their block indices are consecutive, so
/// two separately chosen sections of one clip stay two snippets.
pub fn snippets(genes: &[Gene]) -> Vec<Snippet> {
    let mut out: Vec<Snippet> = Vec::new();
    for (i, &g) in genes.iter().enumerate() {
        let extends = i > 0 && genes[i - 1].continues_into(g);
        if extends {
            out.last_mut().expect("previous snippet").end = i + 1;
        } else {
            let (source, start_block) = match g {
                Gene::Silence => (None, None),
                Gene::Clip { clip, block } => (Some(clip as usize), Some(block as usize)),
            };
            out.push(Snippet { source, start: i, end: i + 1, start_block });
        }
    }
    out
}

/// Structural invariants every operator must preserve: exact length and
/// clip references inside the pool.
pub fn check_chromosome(c: &Chromosome, size: usize, pool: &ClipPool) -> Result<(), String> {
    if c.genes.len() != size {
        return Err(format!("length {} != {size}", c.genes.len()));
    }
    for (i, g) in c.genes.iter().enumerate() {
        if let Gene::Clip { clip, block } = *g {
            let clip = clip as usize;
            if clip >= pool.len() {
                return Err(format!("gene {i}: unknown clip {clip}"));
            }
            if block as usize >= pool.clip(clip).block_count() {
                return Err(format!("gene {i}: block {block} outside clip {clip}"));
            }
        }
    }
    // Snippets must tile the chromosome with continuous playback inside.
    let mut next = 0;
    for s in snippets(&c.genes) {
        if s.start != next || s.is_empty() {
            return Err(format!("snippet at {} does not tile", s.start));
        }
        if !c.genes[s.start..s.end].windows(2).all(|w| w[0].continues_into(w[1])) {
            return Err(format!("snippet at {} is not continuous", s.start));
        }
        next = s.end;
    }
    if next != size {
        return Err("snippets do not cover the chromosome".into());
    }
    Ok(())
}

/// First decimation restriction broken by `c`, if any: every clip snippet
/// must last at least `min_blocks` and start on one of its clip's music
/// cuts. Silence is exempt.
pub fn restriction_violation(c: &Chromosome, pool: &ClipPool, min_blocks: usize) -> Option<String> {
    for s in snippets(&c.genes) {
        let (Some(clip), Some(start_block)) = (s.source, s.start_block) else {
            continue;
        };
        if s.len() < min_blocks {
            return Some(format!("snippet at gene {} lasts {} < {min_blocks} blocks", s.start, s.len()));
        }
        if !pool.clip(clip).is_cut(start_block) {
            return Some(format!(
                "snippet at gene {} starts at block {start_block}, not a music cut of clip {clip}",
                s.start
            ));
        }
    }
    None
}
