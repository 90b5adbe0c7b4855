use super::{snippets, Chromosome, ClipPool, GaConfig, GaError};
use crate::video::MovementProfile;
use crate::BLOCK_SECONDS;

/// Decay length, in blocks, of the snippet-start / scene-cut reward.
const TEMPORAL_DECAY_BLOCKS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessWeights {
    pub corr: f64,
    pub snip: f64,
    pub sil: f64,
    pub temp: f64,
}

impl Default for FitnessWeights {
    fn default() -> Self {
        FitnessWeights { corr: 1.0, snip: 0.25, sil: 0.5, temp: 0.25 }
    }
}

impl FitnessWeights {
    pub fn validate(&self) -> Result<(), GaError> {
        let w = [self.corr, self.snip, self.sil, self.temp];
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || !w.iter().any(|v| *v > 0.0) {
            return Err(GaError::InvalidConfig("weights must be >= 0 with at least one > 0".into()));
        }
        Ok(())
    }
}

/// The four fitness criteria, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessTerms {
    /// `(1 + r) / 2` for the Pearson correlation `r` of gene level and movement.
    pub corr: f64,
    /// Mean snippet length relative to twice the minimum snippet length.
    pub snip: f64,
    /// 1 within the silence budget, falling linearly to 0 at all-silence.
    pub sil: f64,
    /// Mean `exp(-d / 4)` over clip snippet starts, `d` being the distance in
    /// blocks to the nearest scene cut or the chromosome start.
    pub temp: f64,
}

impl FitnessTerms {
    pub fn weighted(&self, w: &FitnessWeights) -> f64 {
        w.corr * self.corr + w.snip * self.snip + w.sil * self.sil + w.temp * self.temp
    }
}

/// Pearson correlation; 0 when either series is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n == 0 {
        return 0.0;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut cov, mut vx, mut vy) = (0.0, 0.0, 0.0);
    for (a, b) in x[..n].iter().zip(&y[..n]) {
        let (dx, dy) = (a - mx, b - my);
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    // sqrt of the product, so that identical series give exactly 1.
    (cov / (vx * vy).sqrt()).clamp(-1.0, 1.0)
}

pub fn fitness_terms(
    c: &Chromosome,
    video: &MovementProfile,
    pool: &ClipPool,
    cfg: &GaConfig,
) -> Result<FitnessTerms, GaError> {
    let n = c.genes.len();
    if video.block_movement.len() != n {
        return Err(GaError::LengthMismatch { expected: video.block_movement.len(), actual: n });
    }
    if n == 0 {
        return Ok(FitnessTerms { corr: 0.5, snip: 0.0, sil: 1.0, temp: 0.0 });
    }

    let levels: Vec<f64> = c.genes.iter().map(|&g| pool.level(g)).collect();
    let corr = (1.0 + pearson(&levels, &video.block_movement)) / 2.0;

    let parts = snippets(&c.genes);
    let mean_len = n as f64 / parts.len() as f64;
    let snip = (mean_len / (2.0 * cfg.min_snippet_blocks() as f64)).clamp(0.0, 1.0);

    let silence = c.silence_fraction();
    let budget = cfg.silence_budget_fraction;
    let sil = if silence <= budget || budget >= 1.0 { 1.0 } else { ((1.0 - silence) / (1.0 - budget)).clamp(0.0, 1.0) };

    let anchors: Vec<f64> = std::iter::once(0.0).chain(video.scene_cuts.iter().map(|t| t / BLOCK_SECONDS)).collect();
    let starts: Vec<f64> = parts.iter().filter(|s| !s.is_silence()).map(|s| s.start as f64).collect();
    let temp = if starts.is_empty() {
        0.0
    } else {
        starts
            .iter()
            .map(|&s| {
                let d = anchors.iter().map(|a| (s - a).abs()).fold(f64::INFINITY, f64::min);
                (-d / TEMPORAL_DECAY_BLOCKS).exp()
            })
            .sum::<f64>()
            / starts.len() as f64
    };

    Ok(FitnessTerms { corr, snip, sil, temp })
}

pub fn evaluate_fitness(
    c: &Chromosome,
    video: &MovementProfile,
    pool: &ClipPool,
    weights: &FitnessWeights,
    cfg: &GaConfig,
) -> Result<f64, GaError> {
    Ok(fitness_terms(c, video, pool, cfg)?.weighted(weights))
}
