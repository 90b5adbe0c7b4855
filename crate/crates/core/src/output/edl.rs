use std::fmt::Write as _;

use super::OutputError;
use crate::ga::{snippets, Chromosome, ClipPool, Gene};
use crate::BLOCK_SECONDS;

pub const SILENCE_TOKEN: &str = "SILENCE";
const MAGIC: &str = "GSEDL";
const VERSION: u32 = 1;

/// One stretch of the soundtrack. For silence `clip_id` is `None`, the
/// source range is `0..duration` and both fades are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EdlEntry {
    pub clip_id: Option<String>,
    pub source_start: f64,
    pub source_end: f64,
    pub dest_start: f64,
    pub fade_in: f64,
    pub fade_out: f64,
}

impl EdlEntry {
    pub fn duration(&self) -> f64 {
        self.source_end - self.source_start
    }

    pub fn is_silence(&self) -> bool {
        self.clip_id.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EditDecisionList {
    pub video_id: String,
    pub rank: usize,
    pub fitness: f64,
    pub entries: Vec<EdlEntry>,
}

impl EditDecisionList {
    pub fn duration(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.dest_start + e.duration())
    }

    /// Entries must tile `[0, duration]` on the block grid with sane fades.
    pub fn validate(&self) -> Result<(), OutputError> {
        let bad = |m: String| Err(OutputError::Invalid(m));
        let mut cursor = 0.0;
        for (i, e) in self.entries.iter().enumerate() {
            if e.dest_start != cursor {
                return bad(format!("entry {i} starts at {} instead of {cursor}", e.dest_start));
            }
            if !(e.duration() > 0.0) {
                return bad(format!("entry {i} is empty"));
            }
            if (e.dest_start / BLOCK_SECONDS).fract() != 0.0 {
                return bad(format!("entry {i} is off the block grid"));
            }
            let limit = e.duration() / 2.0;
            if !(0.0..=limit).contains(&e.fade_in) || !(0.0..=limit).contains(&e.fade_out) {
                return bad(format!("entry {i} has fades longer than half its duration"));
            }
            cursor += e.duration();
        }
        Ok(())
    }
}

/// Merges each snippet of `c` into one entry. Clip entries fade in and out
/// over `min(fade_seconds, duration / 2)`.
pub fn chromosome_to_edl(
    c: &Chromosome,
    pool: &ClipPool,
    video_id: &str,
    rank: usize,
    fade_seconds: f64,
) -> EditDecisionList {
    let entries = snippets(&c.genes)
        .into_iter()
        .map(|s| {
            let duration = s.len() as f64 * BLOCK_SECONDS;
            let dest_start = s.start as f64 * BLOCK_SECONDS;
            match (s.source, s.start_block) {
                (Some(clip), Some(block)) => {
                    let source_start = block as f64 * BLOCK_SECONDS;
                    let fade = fade_seconds.min(duration / 2.0).max(0.0);
                    EdlEntry {
                        clip_id: Some(pool.clip(clip).id.clone()),
                        source_start,
                        source_end: source_start + duration,
                        dest_start,
                        fade_in: fade,
                        fade_out: fade,
                    }
                }
                _ => EdlEntry {
                    clip_id: None,
                    source_start: 0.0,
                    source_end: duration,
                    dest_start,
                    fade_in: 0.0,
                    fade_out: 0.0,
                },
            }
        })
        .collect();
    EditDecisionList { video_id: video_id.to_string(), rank, fitness: c.fitness.unwrap_or(f64::NAN), entries }
}

fn blocks(seconds: f64, what: &str) -> Result<usize, OutputError> {
    let b = seconds / BLOCK_SECONDS;
    if b < 0.0 || (b - b.round()).abs() > 1e-9 {
        return Err(OutputError::Invalid(format!("{what} {seconds} is not a whole number of blocks")));
    }
    Ok(b.round() as usize)
}

/// Expands an EDL back into genes. The fitness is carried over unless it
/// is NaN.
pub fn edl_to_chromosome(edl: &EditDecisionList, pool: &ClipPool) -> Result<Chromosome, OutputError> {
    edl.validate()?;
    let mut genes = Vec::new();
    for e in &edl.entries {
        let len = blocks(e.duration(), "duration")?;
        match &e.clip_id {
            None => genes.extend(std::iter::repeat_n(Gene::Silence, len)),
            Some(id) => {
                let clip = pool.index_of(id).ok_or_else(|| OutputError::UnknownClip(id.clone()))?;
                let first = blocks(e.source_start, "source start")?;
                if first + len > pool.clip(clip).block_count() {
                    return Err(OutputError::Invalid(format!("entry for `{id}` runs past the end of the clip")));
                }
                genes.extend((first..first + len).map(|b| Gene::clip(clip, b)));
            }
        }
    }
    let mut c = Chromosome::new(genes);
    c.fitness = (!edl.fitness.is_nan()).then_some(edl.fitness);
    Ok(c)
}

/// Tab-separated text: a header line, then one line per entry with
/// `clip source_start source_end dest_start fade_in fade_out`.
pub fn write_edl(edl: &EditDecisionList) -> String {
    let mut out = format!("{MAGIC}\t{VERSION}\t{}\t{}\t{}\n", edl.video_id, edl.rank, edl.fitness);
    for e in &edl.entries {
        let clip = e.clip_id.as_deref().unwrap_or(SILENCE_TOKEN);
        let _ = writeln!(
            out,
            "{clip}\t{}\t{}\t{}\t{}\t{}",
            e.source_start, e.source_end, e.dest_start, e.fade_in, e.fade_out
        );
    }
    out
}

pub fn parse_edl(text: &str) -> Result<EditDecisionList, OutputError> {
    let err = |line: usize, reason: String| OutputError::Parse { line, reason };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty input".into()))?;
    let h: Vec<&str> = header.split('\t').collect();
    if h.len() != 5 || h[0] != MAGIC {
        return Err(err(1, "not an edit decision list header".into()));
    }
    if h[1] != VERSION.to_string() {
        return Err(err(1, format!("unsupported version {}", h[1])));
    }
    let rank = h[3].parse().map_err(|_| err(1, format!("bad rank `{}`", h[3])))?;
    let fitness = h[4].parse().map_err(|_| err(1, format!("bad fitness `{}`", h[4])))?;

    let mut entries = Vec::new();
    for (i, line) in lines {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            return Err(err(i + 1, format!("expected 6 fields, found {}", f.len())));
        }
        let mut num = [0.0; 5];
        for (k, field) in f[1..].iter().enumerate() {
            num[k] = field.parse().map_err(|_| err(i + 1, format!("bad number `{field}`")))?;
        }
        entries.push(EdlEntry {
            clip_id: (f[0] != SILENCE_TOKEN).then(|| f[0].to_string()),
            source_start: num[0],
            source_end: num[1],
            dest_start: num[2],
            fade_in: num[3],
            fade_out: num[4],
        });
    }
    let edl = EditDecisionList { video_id: h[2].to_string(), rank, fitness, entries };
    edl.validate()?;
    Ok(edl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ga::{check_chromosome, init_chromosome, ClipInfo, GaConfig};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pool() -> ClipPool {
        ClipPool::new(vec![
            ClipInfo::new("A", vec![0.0; 40], vec![0, 12]),
            ClipInfo::new("B", vec![0.0; 25], vec![0, 9]),
        ])
        .unwrap()
    }

    fn entry(clip: Option<&str>, s: f64, e: f64, d: f64, fade: f64) -> EdlEntry {
        EdlEntry {
            clip_id: clip.map(str::to_string),
            source_start: s,
            source_end: e,
            dest_start: d,
            fade_in: fade,
            fade_out: fade,
        }
    }

    #[test]
    fn single_run() {
        let c = Chromosome::new((0..4).map(|b| Gene::clip(0, b)).collect());
        let edl = chromosome_to_edl(&c, &pool(), "v", 1, 0.5);
        assert_eq!(edl.entries, vec![entry(Some("A"), 0.0, 2.0, 0.0, 0.5)]);
    }

    #[test]
    fn run_merge_with_silence() {
        let c = Chromosome::new(vec![Gene::clip(0, 0), Gene::clip(0, 1), Gene::Silence, Gene::Silence]);
        let edl = chromosome_to_edl(&c, &pool(), "v", 1, 0.5);
        assert_eq!(edl.entries, vec![entry(Some("A"), 0.0, 1.0, 0.0, 0.5), entry(None, 0.0, 1.0, 1.0, 0.0)]);
    }

    #[test]
    fn short_entry_fades_are_clamped() {
        let c = Chromosome::new(vec![Gene::clip(1, 3)]);
        let edl = chromosome_to_edl(&c, &pool(), "v", 1, 0.5);
        assert_eq!(edl.entries[0].fade_in, 0.25);
        assert_eq!(edl.entries[0].fade_out, 0.25);
    }

    #[test]
    fn text_format() {
        let mut c = Chromosome::new(vec![Gene::clip(1, 9), Gene::clip(1, 10), Gene::Silence]);
        c.fitness = Some(1.25);
        let text = write_edl(&chromosome_to_edl(&c, &pool(), "clip-v", 3, 0.5));
        assert_eq!(text, "GSEDL\t1\tclip-v\t3\t1.25\nB\t4.5\t5.5\t0\t0.5\t0.5\nSILENCE\t0\t0.5\t1\t0\t0\n");
        assert!(parse_edl("GSEDL\t2\tv\t1\t0\n").is_err());
        assert!(parse_edl("GSEDL\t1\tv\t1\t0\nA\t0\t1\t0.5\t0\t0\n").is_err()); // gap at 0
        assert!(parse_edl("GSEDL\t1\tv\t1\t0\nA\t0\t1\n").is_err());
    }

    #[test]
    fn unknown_clip_is_rejected() {
        let edl = parse_edl("GSEDL\t1\tv\t1\t0\nZ\t0\t1\t0\t0.5\t0.5\n").unwrap();
        assert!(matches!(edl_to_chromosome(&edl, &pool()), Err(OutputError::UnknownClip(id)) if id == "Z"));
    }

    proptest! {
        #[test]
        fn round_trip_through_text(seed in any::<u64>(), size in 1usize..80) {
            let pool = pool();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut c = init_chromosome(&pool, size, &GaConfig::default(), &mut rng).unwrap();
            c.fitness = Some(seed as f64 / 7.0);
            let edl = chromosome_to_edl(&c, &pool, "v", 1, 0.5);
            edl.validate().unwrap();
            prop_assert_eq!(edl.duration(), size as f64 * 0.5);
            let back = edl_to_chromosome(&parse_edl(&write_edl(&edl)).unwrap(), &pool).unwrap();
            check_chromosome(&back, size, &pool).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
