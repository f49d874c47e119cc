//! Genetic algorithm over permutation routes: random initial population,
//! uniform partially-matched crossover, uniform swap mutation, tournament
//! selection, elitism, and per-generation convergence recording.
//!
//! Every run is driven by a single ChaCha8 generator seeded from
//! `GaConfig::seed`, with a fixed draw order (population init, then per
//! generation: selection draws, crossover coin and mask, mutation coins and
//! partners, pair by pair). Identical configs therefore give identical
//! results on every platform, and fitness evaluation may be parallelized
//! without affecting the outcome because all draws stay on the coordinating
//! thread.

use crate::problem::{ProblemInstance, ValidationError};
use crate::route::{evaluate_route, Route, RouteError, RouteEvaluation};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// GA hyperparameters. Defaults follow the reference setup of 100
/// individuals over 30 generations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    /// Probability a selected pair is crossed over (else copied).
    pub crossover_prob: f64,
    /// Per-position exchange probability of the uniform PMX.
    pub crossover_swap_prob: f64,
    /// Probability an offspring is mutated.
    pub mutation_prob: f64,
    /// Per-position swap probability of the uniform mutation.
    pub mutation_swap_prob: f64,
    pub tournament_size: usize,
    pub elitism_count: usize,
    pub penalty_coefficient: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 100,
            generations: 30,
            crossover_prob: 0.9,
            crossover_swap_prob: 0.2,
            mutation_prob: 0.2,
            mutation_swap_prob: 0.05,
            tournament_size: 3,
            elitism_count: 1,
            penalty_coefficient: 1e4,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        let bad = |msg: &str| Err(GaError::Config(msg.to_string()));
        if self.population_size < 2 {
            return bad("population_size must be >= 2");
        }
        if self.generations < 1 {
            return bad("generations must be >= 1");
        }
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("crossover_swap_prob", self.crossover_swap_prob),
            ("mutation_prob", self.mutation_prob),
            ("mutation_swap_prob", self.mutation_swap_prob),
        ] {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(GaError::Config(format!("{name} must be in [0,1]")));
            }
        }
        if self.tournament_size < 1 || self.tournament_size > self.population_size {
            return bad("tournament_size must be in [1, population_size]");
        }
        if self.elitism_count >= self.population_size {
            return bad("elitism_count must be < population_size");
        }
        if !(self.penalty_coefficient.is_finite() && self.penalty_coefficient >= 0.0) {
            return bad("penalty_coefficient must be >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GaError {
    #[error("invalid GA config: {0}")]
    Config(String),
    #[error(transparent)]
    Instance(#[from] ValidationError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error("parents have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("population and fitness lists differ in length ({0} vs {1})")]
    Misaligned(usize, usize),
}

/// Fitness summary of one generation's population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub worst_fitness: f64,
    /// Distance of the generation's best individual (which may differ from
    /// its fitness when infeasible).
    pub best_distance: f64,
    pub best_feasible: bool,
}

/// Outcome of one GA run: the best route ever observed plus the full
/// convergence history (generation 0 included).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaRunResult {
    pub best_route: Route,
    pub best_evaluation: RouteEvaluation,
    pub history: Vec<GenerationStats>,
    pub config: GaConfig,
    pub seed: u64,
}

/// How fitness evaluation is scheduled; the result is identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Sequential,
    Parallel,
}

/// `population_size` independent uniform random permutations of
/// `{0..n_assets-1}`.
pub fn init_population<R: Rng>(
    n_assets: usize,
    population_size: usize,
    rng: &mut R,
) -> Vec<Route> {
    (0..population_size)
        .map(|_| {
            let mut order: Vec<usize> = (0..n_assets).collect();
            order.shuffle(rng);
            Route::from_permutation(order)
        })
        .collect()
}

/// Uniform partially-matched crossover.
///
/// For each position, with independent probability `swap_prob`, the two
/// children exchange the genes at that position; each child repairs the
/// resulting duplicate by swapping it with the position that held the
/// incoming gene. Both outputs are always valid permutations.
pub fn uniform_pmx_crossover<R: Rng>(
    parent1: &Route,
    parent2: &Route,
    swap_prob: f64,
    rng: &mut R,
) -> Result<(Route, Route), GaError> {
    if parent1.len() != parent2.len() {
        return Err(GaError::LengthMismatch(parent1.len(), parent2.len()));
    }
    let mask: Vec<bool> = (0..parent1.len())
        .map(|_| rng.random::<f64>() < swap_prob)
        .collect();
    Ok(pmx_with_mask(parent1, parent2, &mask))
}

// Deterministic core of the uniform PMX, driven by an explicit position mask.
fn pmx_with_mask(parent1: &Route, parent2: &Route, mask: &[bool]) -> (Route, Route) {
    let n = parent1.len();
    let mut c1 = parent1.order().to_vec();
    let mut c2 = parent2.order().to_vec();
    let mut pos1 = vec![0usize; n];
    let mut pos2 = vec![0usize; n];
    for i in 0..n {
        pos1[c1[i]] = i;
        pos2[c2[i]] = i;
    }
    for i in 0..n {
        if !mask[i] {
            continue;
        }
        let a = c1[i];
        let b = c2[i];
        let j = pos1[b];
        c1.swap(i, j);
        pos1[c1[i]] = i;
        pos1[c1[j]] = j;
        let k = pos2[a];
        c2.swap(i, k);
        pos2[c2[i]] = i;
        pos2[c2[k]] = k;
    }
    (Route::from_permutation(c1), Route::from_permutation(c2))
}

/// Uniform swap mutation: each position, with independent probability
/// `swap_prob`, swaps its gene with a uniformly chosen other position.
pub fn uniform_swap_mutation<R: Rng>(route: &Route, swap_prob: f64, rng: &mut R) -> Route {
    let n = route.len();
    let mut order = route.order().to_vec();
    for i in 0..n {
        if rng.random::<f64>() < swap_prob && n > 1 {
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            order.swap(i, j);
        }
    }
    Route::from_permutation(order)
}

// Winner of one tournament: minimal fitness among the drawn candidates,
// ties broken by lowest population index.
fn tournament_winner(fitnesses: &[f64], candidates: &[usize]) -> usize {
    let mut best = candidates[0];
    for &c in &candidates[1..] {
        if fitnesses[c] < fitnesses[best] || (fitnesses[c] == fitnesses[best] && c < best) {
            best = c;
        }
    }
    best
}

fn tournament_pick<R: Rng>(fitnesses: &[f64], tournament_size: usize, rng: &mut R) -> usize {
    let draws: Vec<usize> = (0..tournament_size)
        .map(|_| rng.random_range(0..fitnesses.len()))
        .collect();
    tournament_winner(fitnesses, &draws)
}

/// Tournament selection: `count` independent tournaments of
/// `tournament_size` individuals drawn uniformly with replacement, each
/// emitting a copy of its fittest member.
pub fn tournament_select<R: Rng>(
    population: &[Route],
    fitnesses: &[f64],
    tournament_size: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Route>, GaError> {
    if population.len() != fitnesses.len() {
        return Err(GaError::Misaligned(population.len(), fitnesses.len()));
    }
    if population.is_empty() || tournament_size < 1 || tournament_size > population.len() {
        return Err(GaError::Config(
            "tournament_size must be in [1, population size]".into(),
        ));
    }
    Ok((0..count)
        .map(|_| population[tournament_pick(fitnesses, tournament_size, rng)].clone())
        .collect())
}

fn evaluate_population(
    instance: &ProblemInstance,
    population: &[Route],
    penalty: f64,
    mode: EvalMode,
) -> Result<Vec<RouteEvaluation>, GaError> {
    let evals: Result<Vec<_>, RouteError> = match mode {
        EvalMode::Sequential => population
            .iter()
            .map(|r| evaluate_route(instance, r, penalty))
            .collect(),
        EvalMode::Parallel => population
            .par_iter()
            .map(|r| evaluate_route(instance, r, penalty))
            .collect(),
    };
    Ok(evals?)
}

// Index of the generation's best individual: minimal fitness, ties by
// lowest index.
fn best_index(evals: &[RouteEvaluation]) -> usize {
    let mut best = 0;
    for (i, e) in evals.iter().enumerate().skip(1) {
        if e.fitness < evals[best].fitness {
            best = i;
        }
    }
    best
}

fn stats_for(generation: usize, evals: &[RouteEvaluation]) -> GenerationStats {
    let best = best_index(evals);
    let sum: f64 = evals.iter().map(|e| e.fitness).sum();
    let worst = evals.iter().map(|e| e.fitness).fold(f64::MIN, f64::max);
    GenerationStats {
        generation,
        best_fitness: evals[best].fitness,
        mean_fitness: sum / evals.len() as f64,
        worst_fitness: worst,
        best_distance: evals[best].total_distance,
        best_feasible: evals[best].feasible,
    }
}

/// Runs the GA with sequential fitness evaluation.
pub fn run_ga(instance: &ProblemInstance, config: &GaConfig) -> Result<GaRunResult, GaError> {
    run_ga_with_mode(instance, config, EvalMode::Sequential)
}

/// Runs the full generational loop. The best-ever individual is tracked
/// across all generations independently of elitism.
pub fn run_ga_with_mode(
    instance: &ProblemInstance,
    config: &GaConfig,
    mode: EvalMode,
) -> Result<GaRunResult, GaError> {
    instance.validate()?;
    config.validate()?;
    let n = instance.n_assets();
    let penalty = config.penalty_coefficient;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut population = init_population(n, config.population_size, &mut rng);
    let mut evals = evaluate_population(instance, &population, penalty, mode)?;

    let mut history = Vec::with_capacity(config.generations + 1);
    history.push(stats_for(0, &evals));
    let mut best_ever = best_index(&evals);
    let mut best_route = population[best_ever].clone();
    let mut best_eval = evals[best_ever].clone();

    for generation in 1..=config.generations {
        // elites: best individuals by (fitness, index)
        let mut ranked: Vec<usize> = (0..population.len()).collect();
        ranked.sort_by(|&a, &b| {
            evals[a]
                .fitness
                .partial_cmp(&evals[b].fitness)
                .unwrap()
                .then(a.cmp(&b))
        });
        let fitnesses: Vec<f64> = evals.iter().map(|e| e.fitness).collect();

        let mut next: Vec<Route> = ranked[..config.elitism_count]
            .iter()
            .map(|&i| population[i].clone())
            .collect();

        while next.len() < config.population_size {
            let p1 = tournament_pick(&fitnesses, config.tournament_size, &mut rng);
            let p2 = tournament_pick(&fitnesses, config.tournament_size, &mut rng);
            let (mut c1, mut c2) = if rng.random::<f64>() < config.crossover_prob {
                uniform_pmx_crossover(
                    &population[p1],
                    &population[p2],
                    config.crossover_swap_prob,
                    &mut rng,
                )?
            } else {
                (population[p1].clone(), population[p2].clone())
            };
            if rng.random::<f64>() < config.mutation_prob {
                c1 = uniform_swap_mutation(&c1, config.mutation_swap_prob, &mut rng);
            }
            if rng.random::<f64>() < config.mutation_prob {
                c2 = uniform_swap_mutation(&c2, config.mutation_swap_prob, &mut rng);
            }
            next.push(c1);
            if next.len() < config.population_size {
                next.push(c2);
            }
        }

        population = next;
        evals = evaluate_population(instance, &population, penalty, mode)?;
        history.push(stats_for(generation, &evals));

        let gen_best = best_index(&evals);
        if evals[gen_best].fitness < best_eval.fitness {
            best_ever = gen_best;
            best_route = population[best_ever].clone();
            best_eval = evals[best_ever].clone();
        }
    }

    Ok(GaRunResult {
        best_route,
        best_evaluation: best_eval,
        history,
        config: config.clone(),
        seed: config.seed,
    })
}

/// Convergence history as CSV, one row per generation including
/// generation 0.
pub fn history_csv(history: &[GenerationStats]) -> String {
    let mut out =
        String::from("generation,best_fitness,mean_fitness,worst_fitness,best_distance,best_feasible\n");
    for s in history {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.generation, s.best_fitness, s.mean_fitness, s.worst_fitness, s.best_distance,
            s.best_feasible
        ));
    }
    out
}
