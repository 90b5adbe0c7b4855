//! Genetic search over soundtracks.
//!
//! A chromosome has one gene per 500 ms of video. Each gene is either
//! silence or a reference to one block of one audio clip; runs of genes
//! that play a clip continuously form snippets. The fitness rewards level
//! following movement, long snippets, little silence and snippet starts on
//! scene cuts.

mod chromosome;
mod evolve;
mod fitness;
mod init;
mod operators;
mod pool;

pub use chromosome::{check_chromosome, restriction_violation, snippets, Chromosome, Gene, Snippet};
pub use evolve::{evaluate_population, evolve, Evolution};
pub use fitness::{evaluate_fitness, fitness_terms, pearson, FitnessTerms, FitnessWeights};
pub use init::{fresh_valid_chromosome, init_chromosome};
pub use operators::{apply_mutation, crossover, crossover_at, decimate, mutate, tournament_select, MutationKind};
pub use pool::{ClipInfo, ClipPool};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GaError {
    #[error("no audio clips to choose from")]
    NoClips,
    #[error("length mismatch: expected {expected} genes, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("population is empty")]
    EmptyPopulation,
    #[error("chromosome {0} has no cached fitness")]
    Unevaluated(usize),
    #[error("invalid GA config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    /// Share of the population drawn by tournament into the mating pool.
    pub selection_fraction: f64,
    pub crossover_rate: f64,
    /// Per-snippet mutation probability.
    pub snippet_mutation_prob: f64,
    /// Probability that initialization picks silence over a clip.
    pub silence_prob_init: f64,
    pub min_snippet_seconds: f64,
    /// Silence share tolerated before the silence term starts to drop.
    pub silence_budget_fraction: f64,
    pub elitism: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 100,
            generations: 200,
            tournament_size: 3,
            selection_fraction: 0.5,
            crossover_rate: 0.9,
            snippet_mutation_prob: 0.10,
            silence_prob_init: 0.15,
            min_snippet_seconds: 4.0,
            silence_budget_fraction: 0.10,
            elitism: 2,
            seed: 1,
        }
    }
}

impl GaConfig {
    pub fn min_snippet_blocks(&self) -> usize {
        ((self.min_snippet_seconds / crate::BLOCK_SECONDS - 1e-9).ceil() as usize).max(1)
    }

    pub fn validate(&self) -> Result<(), GaError> {
        let bad = |m: String| Err(GaError::InvalidConfig(m));
        if self.population_size < 2 {
            return bad("population_size must be >= 2".into());
        }
        if self.tournament_size < 1 {
            return bad("tournament_size must be >= 1".into());
        }
        if self.elitism >= self.population_size {
            return bad("elitism must be smaller than population_size".into());
        }
        for (name, p) in [
            ("selection_fraction", self.selection_fraction),
            ("crossover_rate", self.crossover_rate),
            ("snippet_mutation_prob", self.snippet_mutation_prob),
            ("silence_prob_init", self.silence_prob_init),
            ("silence_budget_fraction", self.silence_budget_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if !(self.min_snippet_seconds > 0.0) {
            return bad("min_snippet_seconds must be > 0".into());
        }
        Ok(())
    }
}
