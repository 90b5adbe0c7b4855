use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    crossover, decimate, evaluate_fitness, init_chromosome, mutate, tournament_select, Chromosome, ClipPool,
    FitnessWeights, GaConfig, GaError, Gene,
};
use crate::video::MovementProfile;

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    /// Final population, best first, without duplicate gene sequences.
    pub ranked: Vec<Chromosome>,
    /// Best fitness of the initial population and after each generation.
    pub best_per_generation: Vec<f64>,
    /// The best distinct chromosomes evaluated at any point of the run (at
    /// most one population's worth), best first. A converged population may
    /// hold only a handful of distinct members; this keeps alternatives.
    pub hall_of_fame: Vec<Chromosome>,
}

impl Evolution {
    pub fn best(&self) -> &Chromosome {
        &self.ranked[0]
    }
}

/// Fills in the fitness of every chromosome that has none. Runs in parallel;
/// evaluation draws no random numbers, so the result is deterministic.
pub fn evaluate_population(
    population: &mut [Chromosome],
    video: &MovementProfile,
    pool: &ClipPool,
    weights: &FitnessWeights,
    cfg: &GaConfig,
) -> Result<(), GaError> {
    population.par_iter_mut().filter(|c| c.fitness.is_none()).try_for_each(|c| {
        c.fitness = Some(evaluate_fitness(c, video, pool, weights, cfg)?);
        Ok(())
    })
}

fn best_fitness(population: &[Chromosome]) -> f64 {
    population.iter().filter_map(|c| c.fitness).fold(f64::NEG_INFINITY, f64::max)
}

/// Merges `population` into `hall`, keeping the `cap` best distinct
/// chromosomes. Earlier entries win ties.
fn update_hall(hall: &mut Vec<Chromosome>, population: &[Chromosome], cap: usize) {
    let mut seen: HashSet<&[Gene]> = hall.iter().map(|c| c.genes.as_slice()).collect();
    let fresh: Vec<Chromosome> = population.iter().filter(|c| seen.insert(&c.genes)).cloned().collect();
    hall.extend(fresh);
    let order = ranking(hall);
    let mut sorted: Vec<Chromosome> = order.into_iter().take(cap).map(|i| hall[i].clone()).collect();
    std::mem::swap(hall, &mut sorted);
}

/// Indices sorted by fitness descending; ties keep population order.
fn ranking(population: &[Chromosome]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) =
            (population[a].fitness.unwrap_or(f64::NEG_INFINITY), population[b].fitness.unwrap_or(f64::NEG_INFINITY));
        fb.total_cmp(&fa)
    });
    order
}

pub fn evolve(
    video: &MovementProfile,
    pool: &ClipPool,
    weights: &FitnessWeights,
    cfg: &GaConfig,
) -> Result<Evolution, GaError> {
    cfg.validate()?;
    weights.validate()?;
    if pool.is_empty() {
        return Err(GaError::NoClips);
    }
    let size = video.block_movement.len();
    if size == 0 {
        return Err(GaError::InvalidConfig("video has no blocks".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let initial =
        (0..cfg.population_size).map(|_| init_chromosome(pool, size, cfg, &mut rng)).collect::<Result<Vec<_>, _>>()?;
    let mut population = decimate(initial, pool, size, cfg, &mut rng)?;
    evaluate_population(&mut population, video, pool, weights, cfg)?;
    let mut best_per_generation = vec![best_fitness(&population)];
    let mut hall = Vec::new();
    update_hall(&mut hall, &population, cfg.population_size);

    let pool_size = ((cfg.selection_fraction * cfg.population_size as f64).ceil() as usize).max(2);
    for generation in 0..cfg.generations {
        let order = ranking(&population);
        let mut next: Vec<Chromosome> = order[..cfg.elitism].iter().map(|&i| population[i].clone()).collect();

        let mating: Vec<usize> = (0..pool_size)
            .map(|_| tournament_select(&population, cfg.tournament_size, &mut rng))
            .collect::<Result<_, _>>()?;
        let mut offspring = Vec::with_capacity(cfg.population_size - cfg.elitism);
        while offspring.len() < cfg.population_size - cfg.elitism {
            let a = &population[mating[rng.gen_range(0..mating.len())]];
            let b = &population[mating[rng.gen_range(0..mating.len())]];
            let (c1, c2) =
                if rng.gen_bool(cfg.crossover_rate) { crossover(a, b, &mut rng)? } else { (a.clone(), b.clone()) };
            offspring.push(mutate(&c1, pool, cfg.snippet_mutation_prob, &mut rng));
            if offspring.len() < cfg.population_size - cfg.elitism {
                offspring.push(mutate(&c2, pool, cfg.snippet_mutation_prob, &mut rng));
            }
        }
        next.extend(decimate(offspring, pool, size, cfg, &mut rng)?);
        evaluate_population(&mut next, video, pool, weights, cfg)?;
        population = next;
        update_hall(&mut hall, &population, cfg.population_size);
        best_per_generation.push(best_fitness(&population));
        log::trace!("generation {generation}: best {}", best_per_generation.last().unwrap());
    }

    let mut seen = HashSet::new();
    let ranked = ranking(&population)
        .into_iter()
        .filter(|&i| seen.insert(population[i].genes.clone()))
        .map(|i| population[i].clone())
        .collect();
    Ok(Evolution { ranked, best_per_generation, hall_of_fame: hall })
}
