use super::{AudioAnalysisConfig, BAND_COUNT};
use crate::BLOCK_SECONDS;

/// Threshold factor for the distance to the previous music cut: the full
/// multiplier inside `min_segment_seconds`, decaying linearly to 1 at
/// `target_segment_seconds`.
pub fn proximity_multiplier(since_last_cut: f64, cfg: &AudioAnalysisConfig) -> f64 {
    let (min, target) = (cfg.min_segment_seconds, cfg.target_segment_seconds);
    let peak = cfg.proximity_multiplier;
    if since_last_cut < min {
        peak
    } else if since_last_cut <= target {
        peak - (peak - 1.0) * (since_last_cut - min) / (target - min)
    } else {
        1.0
    }
}

/// Bar a block's deviation must clear to open a new music segment.
pub fn dynamic_threshold(level_norm: f64, since_last_cut: f64, cfg: &AudioAnalysisConfig) -> f64 {
    let (c0, c1) = cfg.level_coefficients;
    cfg.scale_factor * (c0 + c1 * level_norm) * proximity_multiplier(since_last_cut, cfg)
}

fn mean_and_std(rows: &[[f64; BAND_COUNT]]) -> ([f64; BAND_COUNT], [f64; BAND_COUNT]) {
    let n = rows.len() as f64;
    let mut mean = [0.0; BAND_COUNT];
    for row in rows {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut std = [0.0; BAND_COUNT];
    for row in rows {
        for ((s, v), m) in std.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    std.iter_mut().for_each(|s| *s = (*s / n).sqrt());
    (mean, std)
}

fn band_mean(values: &[f64; BAND_COUNT]) -> f64 {
    values.iter().sum::<f64>() / BAND_COUNT as f64
}

/// Deviations of block `t` from the segment `bands[segment_start..t]`.
///
/// Returns `(mean deviation, deviation change)`:
///
/// - mean deviation: `mean_k |b[t][k] - mu[k]| / (mean_k mu + eps)`
/// - deviation change: `mean_k |s_local[k] - s[k]| / (mean_k s + r * mean_k mu + eps)`
///
/// where `mu`/`s` are the segment's per-band mean and standard deviation,
/// `s_local` the standard deviation over the trailing `local_std_blocks`
/// blocks ending at `t` (never reaching before the segment start) and `r`
/// is `std_floor_ratio`.
pub fn segment_deviations(
    bands: &[[f64; BAND_COUNT]],
    segment_start: usize,
    t: usize,
    cfg: &AudioAnalysisConfig,
) -> (f64, f64) {
    assert!(segment_start < t && t < bands.len());
    let (mu, sigma) = mean_and_std(&bands[segment_start..t]);
    let local_start = segment_start.max((t + 1).saturating_sub(cfg.local_std_blocks));
    let (_, sigma_local) = mean_and_std(&bands[local_start..=t]);

    let mean_mu = band_mean(&mu);
    let mean_sigma = band_mean(&sigma);
    let mut mean_dev = [0.0; BAND_COUNT];
    let mut std_dev = [0.0; BAND_COUNT];
    for k in 0..BAND_COUNT {
        mean_dev[k] = (bands[t][k] - mu[k]).abs();
        std_dev[k] = (sigma_local[k] - sigma[k]).abs();
    }
    let d_mean = band_mean(&mean_dev) / (mean_mu + cfg.epsilon);
    let d_std = band_mean(&std_dev) / (mean_sigma + cfg.std_floor_ratio * mean_mu + cfg.epsilon);
    (d_mean, d_std)
}

/// Music transition points in seconds, always starting with 0.0.
///
/// Blocks are walked left to right. The block that triggers a cut straddles
/// the transition, so the next segment's statistics start one block later.
pub fn detect_music_cuts(
    block_level: &[f64],
    block_bands: &[[f64; BAND_COUNT]],
    cfg: &AudioAnalysisConfig,
) -> Vec<f64> {
    let n = block_bands.len().min(block_level.len());
    let mut cuts = vec![0.0];
    let mut last_cut = 0usize;
    let mut segment_start = 0usize;
    for (t, &level) in block_level.iter().enumerate().take(n) {
        if t <= segment_start {
            continue;
        }
        let (d_mean, d_std) = segment_deviations(block_bands, segment_start, t, cfg);
        let since = (t - last_cut) as f64 * BLOCK_SECONDS;
        let threshold = dynamic_threshold(level, since, cfg);
        if d_mean > threshold || d_std > threshold {
            log::trace!("music cut at block {t}: mean {d_mean:.3} std {d_std:.3} > {threshold:.3}");
            cuts.push(t as f64 * BLOCK_SECONDS);
            last_cut = t;
            segment_start = t + 1;
        }
    }
    cuts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> AudioAnalysisConfig {
        AudioAnalysisConfig::default()
    }

    #[test]
    fn threshold_endpoints() {
        let c = cfg();
        assert!((dynamic_threshold(0.0, 25.0, &c) - 0.10).abs() < 1e-15);
        assert!((dynamic_threshold(1.0, 20.0, &c) - 1.00).abs() < 1e-15);
        assert!((dynamic_threshold(1.0, 0.0, &c) - 3.00).abs() < 1e-15);
        assert!((dynamic_threshold(1.0, 3.99, &c) - 3.00).abs() < 1e-15);
        // Halfway through the decay.
        assert!((proximity_multiplier(12.0, &c) - 2.0).abs() < 1e-15);
        let scaled = AudioAnalysisConfig { scale_factor: 100.0, ..cfg() };
        assert!((dynamic_threshold(0.0, 30.0, &scaled) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn proximity_is_continuous_and_nonincreasing() {
        let c = cfg();
        let mut prev = f64::INFINITY;
        for i in 0..=300 {
            let p = proximity_multiplier(i as f64 * 0.1, &c);
            assert!(p <= prev + 1e-12 && (1.0..=3.0).contains(&p));
            prev = p;
        }
        assert!((proximity_multiplier(4.0, &c) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_bands_have_no_cuts() {
        let bands = vec![[0.2, 0.1, 0.0, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.01]; 80];
        assert_eq!(detect_music_cuts(&vec![0.0; 80], &bands, &cfg()), vec![0.0]);
        assert_eq!(detect_music_cuts(&vec![0.0; 80], &vec![[0.0; BAND_COUNT]; 80], &cfg()), vec![0.0]);
    }

    #[test]
    fn doubling_step_is_one_cut() {
        // Block vector b for 60 blocks, then 2b. At block 60 the segment
        // stats are mu = b, sigma = 0, the local window holds b, b, b, 2b
        // (std = sqrt(3)/4 * b), so the deviation change is
        // (sqrt(3)/4) / 0.1 = 4.33 > threshold 1.0 (level 1, 30 s since 0).
        let b = [0.0, 0.01, 0.02, 0.3, 0.05, 0.0, 0.0, 0.0, 0.0, 0.0];
        let mut bands = vec![b; 60];
        bands.extend(vec![b.map(|v| 2.0 * v); 60]);
        let mut level = vec![0.0; 60];
        level.extend(vec![1.0; 60]);
        let (d_mean, d_std) = segment_deviations(&bands, 0, 60, &cfg());
        assert!((d_mean - 1.0).abs() < 1e-6);
        assert!((d_std / (2.5 * 3f64.sqrt()) - 1.0).abs() < 1e-5, "{d_std}");
        assert_eq!(detect_music_cuts(&level, &bands, &cfg()), vec![0.0, 30.0]);

        let insensitive = AudioAnalysisConfig { scale_factor: 100.0, ..cfg() };
        assert_eq!(detect_music_cuts(&level, &bands, &insensitive), vec![0.0]);
    }

    #[test]
    fn straddling_block_does_not_double_fire() {
        let soft = [0.0, 0.0, 0.0, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let loud = [0.0, 0.0, 0.0, 0.0, 0.0, 0.1, 0.0, 0.0, 0.0, 0.0];
        let mut bands = vec![soft; 40];
        // Half-and-half transition block, then the new content.
        bands.push([0.0, 0.0, 0.0, 0.05, 0.0, 0.05, 0.0, 0.0, 0.0, 0.0]);
        bands.extend(vec![loud; 40]);
        let level: Vec<f64> = (0..bands.len()).map(|i| if i < 40 { 0.0 } else { 1.0 }).collect();
        assert_eq!(detect_music_cuts(&level, &bands, &cfg()), vec![0.0, 20.0]);
    }

    #[test]
    fn cuts_strictly_increase() {
        let bands: Vec<[f64; BAND_COUNT]> =
            (0..200).map(|i| [((i * 7919) % 13) as f64 * 0.1 + 0.01; BAND_COUNT]).collect();
        let level: Vec<f64> = (0..200).map(|i| ((i * 31) % 17) as f64 / 16.0).collect();
        let cuts = detect_music_cuts(&level, &bands, &cfg());
        assert_eq!(cuts[0], 0.0);
        assert!(cuts.windows(2).all(|w| w[0] < w[1]));
    }
}
