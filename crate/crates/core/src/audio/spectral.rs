use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{AudioAnalysisConfig, AudioError, BAND_COUNT};
use crate::ingest::PcmStream;
use crate::min_max_normalize;

/// Lower edge of the lowest octave band in Hz.
const LOWEST_BAND_EDGE: f64 = 21.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFrame {
    pub time: f64,
    pub level: f64,
    pub bands: [f64; BAND_COUNT],
}

/// Band edges `21.5 * 2^k` for `k = 0..=10`, clamped to Nyquist.
pub fn band_edges(sample_rate: u32) -> [f64; BAND_COUNT + 1] {
    let nyquist = f64::from(sample_rate) / 2.0;
    let mut edges = [0.0; BAND_COUNT + 1];
    for (k, e) in edges.iter_mut().enumerate() {
        *e = (LOWEST_BAND_EDGE * 2f64.powi(k as i32)).min(nyquist);
    }
    edges[BAND_COUNT] = nyquist;
    edges
}

/// Band of every FFT bin `0..=fft_size/2`, or `None` for bins outside all
/// bands (the DC bin always is).
fn bin_bands(fft_size: usize, sample_rate: u32) -> Vec<Option<usize>> {
    let edges = band_edges(sample_rate);
    let resolution = f64::from(sample_rate) / fft_size as f64;
    (0..=fft_size / 2)
        .map(|bin| {
            if bin == 0 {
                return None;
            }
            let f = bin as f64 * resolution;
            (0..BAND_COUNT).find(|&k| {
                let last = k + 1 == BAND_COUNT;
                f >= edges[k] && (f < edges[k + 1] || (last && f <= edges[k + 1]))
            })
        })
        .collect()
}

/// One frame per hop: window-normalized RMS level and mean FFT magnitude
/// per octave band.
///
/// The level is `sqrt(sum (w x)^2 / sum w^2)`, so a constant full-scale
/// signal has level 1 regardless of the window. Magnitudes are scaled by
/// `2 / sum w`, which puts a full-scale sinusoid's peak bin near 1.
pub fn compute_spectral_frames(pcm: &PcmStream, cfg: &AudioAnalysisConfig) -> Result<Vec<SpectralFrame>, AudioError> {
    let n = cfg.fft_size;
    if pcm.samples.len() < n {
        return Err(AudioError::TooShort { samples: pcm.samples.len(), needed: n });
    }
    let hop = cfg.hop_samples(pcm.sample_rate);
    let count = (pcm.samples.len() - n) / hop + 1;

    let window: Vec<f64> = (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect();
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let magnitude_scale = 2.0 / window.iter().sum::<f64>();

    let bands_of = bin_bands(n, pcm.sample_rate);
    let mut bins_per_band = [0usize; BAND_COUNT];
    for k in bands_of.iter().flatten() {
        bins_per_band[*k] += 1;
    }

    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut buffer = vec![Complex::new(0.0, 0.0); n];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    let mut frames = Vec::with_capacity(count);
    for i in 0..count {
        let start = i * hop;
        let slice = &pcm.samples[start..start + n];
        let mut energy = 0.0;
        for ((b, &x), &w) in buffer.iter_mut().zip(slice).zip(&window) {
            let v = f64::from(x) * w;
            energy += v * v;
            *b = Complex::new(v, 0.0);
        }
        fft.process_with_scratch(&mut buffer, &mut scratch);

        let mut bands = [0.0; BAND_COUNT];
        for (bin, band) in bands_of.iter().enumerate() {
            if let Some(k) = band {
                bands[*k] += buffer[bin].norm() * magnitude_scale;
            }
        }
        for (b, &count) in bands.iter_mut().zip(&bins_per_band) {
            if count > 0 {
                *b /= count as f64;
            }
        }
        frames.push(SpectralFrame {
            time: start as f64 / f64::from(pcm.sample_rate),
            level: (energy / window_power).sqrt(),
            bands,
        });
    }
    Ok(frames)
}

/// Per-block raw (unnormalized) levels and band means.
pub(crate) fn aggregate_raw(frames: &[SpectralFrame], per_block: usize) -> (Vec<f64>, Vec<[f64; BAND_COUNT]>) {
    let mut levels = Vec::with_capacity(frames.len() / per_block + 1);
    let mut bands = Vec::with_capacity(levels.capacity());
    for chunk in frames.chunks(per_block) {
        let len = chunk.len() as f64;
        levels.push(chunk.iter().map(|f| f.level).sum::<f64>() / len);
        let mut mean = [0.0; BAND_COUNT];
        for f in chunk {
            for (m, b) in mean.iter_mut().zip(&f.bands) {
                *m += b;
            }
        }
        for m in &mut mean {
            *m /= len;
        }
        bands.push(mean);
    }
    (levels, bands)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockFeatures {
    /// Min-max normalized block levels.
    pub level: Vec<f64>,
    pub bands: Vec<[f64; BAND_COUNT]>,
}

/// Averages spectral frames into 500 ms blocks; a trailing partial block is
/// averaged over the frames it has.
pub fn aggregate_blocks(frames: &[SpectralFrame], cfg: &AudioAnalysisConfig) -> BlockFeatures {
    let (raw, bands) = aggregate_raw(frames, cfg.frames_per_block());
    BlockFeatures { level: min_max_normalize(&raw), bands }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RATE: u32 = 44_100;

    fn sine(freq: f64, amplitude: f64, seconds: f64) -> PcmStream {
        let n = (seconds * f64::from(RATE)) as usize;
        let samples =
            (0..n).map(|i| (amplitude * (2.0 * PI * freq * i as f64 / f64::from(RATE)).sin()) as f32).collect();
        PcmStream::new(samples, RATE)
    }

    fn frame(level: f64) -> SpectralFrame {
        SpectralFrame { time: 0.0, level, bands: [level; BAND_COUNT] }
    }

    #[test]
    fn silence_is_zero() {
        let pcm = PcmStream::new(vec![0.0; 44_100], RATE);
        let frames = compute_spectral_frames(&pcm, &AudioAnalysisConfig::default()).unwrap();
        assert!(frames.iter().all(|f| f.level == 0.0 && f.bands.iter().all(|&b| b == 0.0)));
    }

    #[test]
    fn frame_count_formula() {
        let cfg = AudioAnalysisConfig::default();
        for len in [2048usize, 2049, 2489, 2490, 44_100, 100_000] {
            let pcm = PcmStream::new(vec![0.1; len], RATE);
            let frames = compute_spectral_frames(&pcm, &cfg).unwrap();
            assert_eq!(frames.len(), (len - 2048) / 441 + 1, "len {len}");
        }
    }

    #[test]
    fn too_short_input() {
        let pcm = PcmStream::new(vec![0.0; 2047], RATE);
        assert_eq!(
            compute_spectral_frames(&pcm, &AudioAnalysisConfig::default()),
            Err(AudioError::TooShort { samples: 2047, needed: 2048 })
        );
    }

    #[test]
    fn band_layout_at_44k() {
        let edges = band_edges(RATE);
        assert_eq!(edges[0], 21.5);
        assert_eq!(edges[5], 688.0);
        assert_eq!(edges[6], 1376.0);
        assert_eq!(edges[10], 22_050.0);
        let bands = bin_bands(2048, RATE);
        assert_eq!(bands[0], None);
        // Bin 1 sits at 21.53 Hz, the only bin of band 0.
        assert_eq!(bands[1], Some(0));
        assert_eq!(bands[2], Some(1));
        // 1 kHz falls between bins 46 and 47 (46.44), both in band 5.
        assert_eq!(bands[46], Some(5));
        assert_eq!(bands[47], Some(5));
        assert_eq!(bands[1024], Some(9));
        assert!(bands[1..].iter().all(Option::is_some));
    }

    #[test]
    fn one_khz_peaks_in_band_five() {
        let frames = compute_spectral_frames(&sine(1000.0, 0.5, 1.0), &AudioAnalysisConfig::default()).unwrap();
        for f in &frames {
            let argmax = (0..BAND_COUNT).max_by(|&a, &b| f.bands[a].total_cmp(&f.bands[b])).unwrap();
            assert_eq!(argmax, 5);
        }
    }

    #[test]
    fn sine_lands_in_its_octave() {
        for hz in [30.0, 100.0, 500.0, 2000.0, 8000.0] {
            let expected = (hz / 21.5f64).log2().floor() as usize;
            let frames = compute_spectral_frames(&sine(hz, 0.5, 1.0), &AudioAnalysisConfig::default()).unwrap();
            for f in &frames {
                let argmax = (0..BAND_COUNT).max_by(|&a, &b| f.bands[a].total_cmp(&f.bands[b])).unwrap();
                assert_eq!(argmax, expected, "{hz} Hz");
            }
        }
    }

    #[test]
    fn constant_full_scale_has_unit_level() {
        for v in [1.0f32, -1.0] {
            let frames =
                compute_spectral_frames(&PcmStream::new(vec![v; 8192], RATE), &AudioAnalysisConfig::default()).unwrap();
            for f in &frames {
                assert!((f.level - 1.0).abs() < 1e-12, "{}", f.level);
                let argmax = (0..BAND_COUNT).max_by(|&a, &b| f.bands[a].total_cmp(&f.bands[b])).unwrap();
                assert_eq!(argmax, 0);
            }
        }
    }

    #[test]
    fn sine_level_is_rms() {
        let frames = compute_spectral_frames(&sine(1000.0, 0.5, 0.5), &AudioAnalysisConfig::default()).unwrap();
        let expected = 0.5 / 2f64.sqrt();
        assert!(frames.iter().all(|f| (f.level - expected).abs() < 2e-3));
    }

    #[test]
    fn constant_level_blocks_normalize_to_zero() {
        let frames = vec![frame(0.3); 100];
        let b = aggregate_blocks(&frames, &AudioAnalysisConfig::default());
        assert_eq!(b.level, vec![0.0, 0.0]);
        let (raw, _) = aggregate_raw(&frames, 50);
        assert!(raw.iter().all(|r| (r - 0.3).abs() < 1e-15));
    }

    #[test]
    fn alternating_levels_average() {
        let frames: Vec<_> = (0..50).map(|i| frame(if i % 2 == 0 { 0.2 } else { 0.4 })).collect();
        let (raw, bands) = aggregate_raw(&frames, 50);
        assert!((raw[0] - 0.3).abs() < 1e-15);
        assert!((bands[0][3] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn partial_trailing_block() {
        let frames: Vec<_> = (0..120).map(|i| frame(if i < 100 { 0.0 } else { 1.0 })).collect();
        let (raw, _) = aggregate_raw(&frames, 50);
        assert_eq!(raw, vec![0.0, 0.0, 1.0]);
        assert_eq!(aggregate_blocks(&frames, &AudioAnalysisConfig::default()).level.len(), 3);
    }
}
