use super::{GaError, Gene};
use crate::audio::AudioProfile;
use crate::BLOCK_SECONDS;

/// What the GA needs from one analyzed clip.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipInfo {
    pub id: String,
    pub block_level: Vec<f64>,
    /// Block indices of the music cuts, ascending, always containing 0.
    pub cut_blocks: Vec<usize>,
}

impl ClipInfo {
    pub fn new(id: impl Into<String>, block_level: Vec<f64>, mut cut_blocks: Vec<usize>) -> Self {
        let n = block_level.len();
        cut_blocks.push(0);
        cut_blocks.retain(|&b| b < n);
        cut_blocks.sort_unstable();
        cut_blocks.dedup();
        ClipInfo { id: id.into(), block_level, cut_blocks }
    }

    pub fn from_profile(profile: &AudioProfile) -> Self {
        let cuts = profile.music_cuts.iter().map(|c| (c / BLOCK_SECONDS).round() as usize).collect();
        ClipInfo::new(profile.media_id.clone(), profile.block_level.clone(), cuts)
    }

    pub fn block_count(&self) -> usize {
        self.block_level.len()
    }

    pub fn is_cut(&self, block: usize) -> bool {
        self.cut_blocks.binary_search(&block).is_ok()
    }
}

/// The audio clips a chromosome may draw from; genes refer to clips by
/// their index here.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipPool {
    clips: Vec<ClipInfo>,
}

impl ClipPool {
    pub fn new(clips: Vec<ClipInfo>) -> Result<Self, GaError> {
        if clips.is_empty() || clips.iter().any(|c| c.block_count() == 0) {
            return Err(GaError::NoClips);
        }
        Ok(ClipPool { clips })
    }

    pub fn from_profiles(profiles: &[AudioProfile]) -> Result<Self, GaError> {
        ClipPool::new(profiles.iter().map(ClipInfo::from_profile).collect())
    }

    pub fn len(&self) -> usize {
        self.clips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clips.is_empty()
    }

    pub fn clip(&self, index: usize) -> &ClipInfo {
        &self.clips[index]
    }

    pub fn clips(&self) -> &[ClipInfo] {
        &self.clips
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.clips.iter().position(|c| c.id == id)
    }

    /// Level a gene contributes; silence is 0.
    pub fn level(&self, gene: Gene) -> f64 {
        match gene {
            Gene::Silence => 0.0,
            Gene::Clip { clip, block } => self.clips[clip as usize].block_level[block as usize],
        }
    }
}
