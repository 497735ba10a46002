//! Genetic tuning of controller genomes over a pool of environments.
//!
//! The loop is a generational genetic algorithm with one elite: every
//! generation draws a subset of the training environments (optionally biased
//! toward currently difficult ones, see [`doping`]), evaluates the whole
//! population on that subset with a shared episode seed per environment,
//! records per-environment median costs into the difficulty ledger, and then
//! produces the next population by tournament-selected exponential crossover
//! and bounded polynomial mutation ([`ops`]). A single coordinator RNG drives
//! every stochastic choice, so a (seed, environment set) pair fixes the whole
//! trace; checkpoints serialize that RNG so interrupted runs resume on the
//! exact same trajectory.

pub mod doping;
pub mod ops;

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controller::Policy;
use crate::env::bundle::EnvBundle;
use crate::genome::Genome;
use crate::seeds::{self, D_EPISODE, D_EVOLVE};
use crate::sim::{run_episode, SimConfig};
use crate::{Error, Result};

use doping::{doping_probabilities, median, select_environments, DifficultyLedger};
use ops::{exponential_crossover, polynomial_mutation, tournament_select};

/// Number of best individuals copied unchanged into the next generation.
pub const ELITE_COUNT: usize = 1;

/// Checkpoint format version.
pub const CHECKPOINT_VERSION: u32 = 1;

/// Settings for an evolution run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvoConfig {
    /// Population size (even, at least 2).
    pub population: usize,
    /// Number of generations to run.
    pub generations: usize,
    /// Tournament size for donor selection (at least 2).
    pub tournament: usize,
    /// Probability that a child is produced by crossover; also the
    /// gene-continuation probability inside the exponential crossover.
    pub crossover_prob: f64,
    /// Per-gene mutation probability.
    pub mutation_prob: f64,
    /// Polynomial-mutation distribution index.
    pub eta: f64,
    /// Environments drawn per generation.
    pub envs_per_gen: usize,
    /// Bias environment draws toward currently difficult environments.
    pub doping: bool,
    /// Write a checkpoint every this many generations (0 disables).
    pub checkpoint_every: usize,
    /// Root seed for the whole run.
    pub seed: u64,
}

impl Default for EvoConfig {
    fn default() -> Self {
        EvoConfig {
            population: 24,
            generations: 60,
            tournament: 3,
            crossover_prob: 0.9,
            mutation_prob: 0.1,
            eta: 1.0,
            envs_per_gen: 6,
            doping: true,
            checkpoint_every: 10,
            seed: 0,
        }
    }
}

impl EvoConfig {
    /// Reject configurations the loop cannot run with.
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 || self.population % 2 != 0 {
            return Err(Error::Config(format!(
                "population must be an even number of at least 2, got {}",
                self.population
            )));
        }
        if self.generations == 0 {
            return Err(Error::Config("generations must be at least 1".into()));
        }
        if self.tournament < 2 {
            return Err(Error::Config(format!(
                "tournament size must be at least 2, got {}",
                self.tournament
            )));
        }
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        if !(self.eta > 0.0) {
            return Err(Error::Config(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if self.envs_per_gen == 0 {
            return Err(Error::Config("envs_per_gen must be at least 1".into()));
        }
        Ok(())
    }
}

/// One generation's summary, recorded after evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenRecord {
    pub gen: usize,
    /// Lowest mean cost in the population this generation.
    pub best_cost: f64,
    /// Median of the population's mean costs this generation.
    pub median_cost: f64,
    /// Ids of the environments the generation trained on.
    pub env_ids: Vec<String>,
}

/// Final state of an evolution run.
#[derive(Debug, Clone)]
pub struct EvolveResult {
    /// Best individual of the last evaluated generation.
    pub best: Genome,
    /// Its mean cost on that generation's environments.
    pub best_cost: f64,
    pub history: Vec<GenRecord>,
    pub population: Vec<Genome>,
    pub ledger: DifficultyLedger,
}

/// Everything needed to continue an interrupted run.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    config: EvoConfig,
    /// Ids of the training bundles, in order; resume refuses a different set.
    env_ids: Vec<String>,
    /// First generation that has not run yet.
    next_gen: usize,
    population: Vec<Genome>,
    ledger: DifficultyLedger,
    history: Vec<GenRecord>,
    best: Genome,
    best_cost: f64,
    rng: ChaCha8Rng,
}

struct LoopState {
    population: Vec<Genome>,
    ledger: DifficultyLedger,
    history: Vec<GenRecord>,
    best: Genome,
    best_cost: f64,
    rng: ChaCha8Rng,
    next_gen: usize,
}

fn bundle_ids(bundles: &[&EnvBundle]) -> Vec<String> {
    bundles.iter().map(|b| b.env.id.clone()).collect()
}

fn initial_state(cfg: &EvoConfig, n_envs: usize) -> LoopState {
    let mut rng = seeds::stream(cfg.seed, &[D_EVOLVE]);
    let population: Vec<Genome> = (0..cfg.population)
        .map(|_| Genome::random(&mut rng))
        .collect();
    let best = population[0];
    LoopState {
        population,
        ledger: DifficultyLedger::new(n_envs),
        history: Vec::new(),
        best,
        best_cost: f64::INFINITY,
        rng,
        next_gen: 0,
    }
}

/// Evaluate every individual on the selected environments.
///
/// Returns `(per-individual mean cost, per-selected-env median cost)`. Episode
/// seeds are shared across the population (one per environment) so candidates
/// compete on identical spawn draws; work fans out to worker threads but is
/// merged in a canonical (individual, environment) order.
fn evaluate_generation(
    population: &[Genome],
    bundles: &[&EnvBundle],
    selected: &[usize],
    episode_root: u64,
    sim_cfg: &SimConfig,
) -> (Vec<f64>, Vec<f64>) {
    let jobs: Vec<(usize, usize)> = (0..population.len())
        .flat_map(|i| selected.iter().map(move |&e| (i, e)))
        .collect();
    let costs: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, e)| {
            let seed = seeds::derive(episode_root, &[D_EPISODE, e as u64]);
            run_episode(bundles[e], Policy::Pso, &population[i], seed, sim_cfg).mean_cost()
        })
        .collect();
    let n_sel = selected.len();
    let individual: Vec<f64> = (0..population.len())
        .map(|i| costs[i * n_sel..(i + 1) * n_sel].iter().sum::<f64>() / n_sel as f64)
        .collect();
    let per_env: Vec<f64> = (0..n_sel)
        .map(|s| {
            let col: Vec<f64> = (0..population.len()).map(|i| costs[i * n_sel + s]).collect();
            median(&col)
        })
        .collect();
    (individual, per_env)
}

fn write_checkpoint(
    path: &Path,
    cfg: &EvoConfig,
    env_ids: &[String],
    state: &LoopState,
) -> Result<()> {
    let ckpt = Checkpoint {
        version: CHECKPOINT_VERSION,
        config: cfg.clone(),
        env_ids: env_ids.to_vec(),
        next_gen: state.next_gen,
        population: state.population.clone(),
        ledger: state.ledger.clone(),
        history: state.history.clone(),
        best: state.best,
        best_cost: state.best_cost,
        rng: state.rng.clone(),
    };
    std::fs::write(path, serde_json::to_vec(&ckpt)?)?;
    Ok(())
}

fn run_loop(
    mut state: LoopState,
    cfg: &EvoConfig,
    bundles: &[&EnvBundle],
    sim_cfg: &SimConfig,
    checkpoint_path: Option<&Path>,
) -> Result<EvolveResult> {
    let ids = bundle_ids(bundles);
    for gen in state.next_gen..cfg.generations {
        let probs = doping_probabilities(&state.ledger, cfg.doping);
        let selected = select_environments(&probs, cfg.envs_per_gen, &mut state.rng);
        let episode_root: u64 = state.rng.gen();
        let (costs, env_medians) =
            evaluate_generation(&state.population, bundles, &selected, episode_root, sim_cfg);
        for (slot, &e) in selected.iter().enumerate() {
            state.ledger.record(e, env_medians[slot]);
        }

        let elite_idx = costs
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("cost is NaN"))
            .map(|(i, _)| i)
            .expect("population is non-empty");
        state.best = state.population[elite_idx];
        state.best_cost = costs[elite_idx];
        state.history.push(GenRecord {
            gen,
            best_cost: costs[elite_idx],
            median_cost: median(&costs),
            env_ids: selected.iter().map(|&e| ids[e].clone()).collect(),
        });

        let mut next = Vec::with_capacity(cfg.population);
        for i in 0..cfg.population {
            let mut child = state.population[i];
            if state.rng.gen::<f64>() < cfg.crossover_prob {
                let donor = tournament_select(&costs, cfg.tournament, &mut state.rng);
                child = exponential_crossover(
                    &state.population[i],
                    &state.population[donor],
                    cfg.crossover_prob,
                    &mut state.rng,
                );
            }
            child = polynomial_mutation(&child, cfg.mutation_prob, cfg.eta, &mut state.rng);
            next.push(child);
        }
        next[elite_idx] = state.best;
        state.population = next;
        state.next_gen = gen + 1;

        if let Some(path) = checkpoint_path {
            let due = cfg.checkpoint_every > 0 && state.next_gen % cfg.checkpoint_every == 0;
            if due || state.next_gen == cfg.generations {
                write_checkpoint(path, cfg, &ids, &state)?;
            }
        }
    }
    Ok(EvolveResult {
        best: state.best,
        best_cost: state.best_cost,
        history: state.history,
        population: state.population,
        ledger: state.ledger,
    })
}

/// Run evolution from scratch.
///
/// `checkpoint_path`, when given, receives a resumable snapshot every
/// `checkpoint_every` generations and at the end of the run.
pub fn evolve(
    cfg: &EvoConfig,
    bundles: &[&EnvBundle],
    sim_cfg: &SimConfig,
    checkpoint_path: Option<&Path>,
) -> Result<EvolveResult> {
    cfg.validate()?;
    sim_cfg.validate()?;
    if bundles.is_empty() {
        return Err(Error::Config("no training environments given".into()));
    }
    if cfg.envs_per_gen > bundles.len() {
        return Err(Error::Config(format!(
            "envs_per_gen ({}) exceeds available environments ({})",
            cfg.envs_per_gen,
            bundles.len()
        )));
    }
    let state = initial_state(cfg, bundles.len());
    run_loop(state, cfg, bundles, sim_cfg, checkpoint_path)
}

/// Continue an interrupted run from a checkpoint file.
///
/// The bundle set must match the one the checkpoint was created with.
/// `extend_generations`, when given, replaces the stored generation count
/// (it must not be below the generations already completed).
pub fn resume(
    checkpoint_path: &Path,
    bundles: &[&EnvBundle],
    sim_cfg: &SimConfig,
    extend_generations: Option<usize>,
) -> Result<EvolveResult> {
    let bytes = std::fs::read(checkpoint_path)?;
    let ckpt: Checkpoint = serde_json::from_slice(&bytes)
        .map_err(|e| Error::Parse(format!("checkpoint does not parse: {e}")))?;
    if ckpt.version != CHECKPOINT_VERSION {
        return Err(Error::Parse(format!(
            "checkpoint version {} is not supported (expected {})",
            ckpt.version, CHECKPOINT_VERSION
        )));
    }
    let ids = bundle_ids(bundles);
    if ids != ckpt.env_ids {
        return Err(Error::Config(
            "checkpoint was created with a different environment set".into(),
        ));
    }
    let mut cfg = ckpt.config.clone();
    if let Some(g) = extend_generations {
        if g < ckpt.next_gen {
            return Err(Error::Config(format!(
                "cannot resume to generation {g}: checkpoint has already completed {}",
                ckpt.next_gen
            )));
        }
        cfg.generations = g;
    }
    cfg.validate()?;
    sim_cfg.validate()?;
    let state = LoopState {
        population: ckpt.population,
        ledger: ckpt.ledger,
        history: ckpt.history,
        best: ckpt.best,
        best_cost: ckpt.best_cost,
        rng: ckpt.rng,
        next_gen: ckpt.next_gen,
    };
    run_loop(state, &cfg, bundles, sim_cfg, Some(checkpoint_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::tests::empty_bundle;

    fn quick_sim() -> SimConfig {
        SimConfig {
            episode_len: 20.0,
            ..SimConfig::default()
        }
    }

    fn quick_cfg() -> EvoConfig {
        EvoConfig {
            population: 4,
            generations: 2,
            tournament: 2,
            envs_per_gen: 1,
            checkpoint_every: 0,
            seed: 77,
            ..EvoConfig::default()
        }
    }

    #[test]
    fn zero_variation_keeps_population() {
        let bundle = empty_bundle();
        let cfg = EvoConfig {
            crossover_prob: 0.0,
            mutation_prob: 0.0,
            generations: 1,
            ..quick_cfg()
        };
        let initial = initial_state(&cfg, 1).population;
        let out = evolve(&cfg, &[&bundle], &quick_sim(), None).unwrap();
        assert_eq!(out.population, initial);
        assert_eq!(out.history.len(), 1);
    }

    #[test]
    fn trace_is_deterministic_in_seed() {
        let bundle = empty_bundle();
        let cfg = quick_cfg();
        let sim = quick_sim();
        let a = evolve(&cfg, &[&bundle], &sim, None).unwrap();
        let b = evolve(&cfg, &[&bundle], &sim, None).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.population, b.population);
        assert_eq!(a.best, b.best);
        let other = evolve(
            &EvoConfig {
                seed: 78,
                ..quick_cfg()
            },
            &[&bundle],
            &sim,
            None,
        )
        .unwrap();
        assert_ne!(a.population, other.population);
    }

    #[test]
    fn history_ledger_and_ranges_are_consistent() {
        let bundle = empty_bundle();
        let mut second = empty_bundle();
        second.env.id = "empty-b".into();
        let cfg = EvoConfig {
            population: 6,
            generations: 3,
            envs_per_gen: 2,
            ..quick_cfg()
        };
        let out = evolve(&cfg, &[&bundle, &second], &quick_sim(), None).unwrap();
        assert_eq!(out.history.len(), 3);
        for (g, rec) in out.history.iter().enumerate() {
            assert_eq!(rec.gen, g);
            assert_eq!(rec.env_ids.len(), 2);
            assert_ne!(rec.env_ids[0], rec.env_ids[1]);
            assert!(rec.best_cost <= rec.median_cost);
            assert!(rec.best_cost.is_finite());
        }
        for env in 0..2 {
            assert!(out.ledger.history(env).len() <= 3);
            assert!(!out.ledger.history(env).is_empty());
        }
        assert!(out.population.iter().all(Genome::in_range));
        assert!(out.population.contains(&out.best));
        assert_eq!(out.best_cost, out.history.last().unwrap().best_cost);
    }

    #[test]
    fn checkpoint_resume_reproduces_uninterrupted_trace() {
        let bundle = empty_bundle();
        let sim = quick_sim();
        let dir = tempfile::tempdir().unwrap();
        let ckpt = dir.path().join("run.ckpt.json");

        // Uninterrupted reference: 4 generations.
        let full_cfg = EvoConfig {
            generations: 4,
            ..quick_cfg()
        };
        let full = evolve(&full_cfg, &[&bundle], &sim, None).unwrap();

        // Interrupted run: stop after 2, then resume to 4 from the file.
        let half_cfg = EvoConfig {
            generations: 2,
            checkpoint_every: 1,
            ..quick_cfg()
        };
        let half = evolve(&half_cfg, &[&bundle], &sim, Some(&ckpt)).unwrap();
        assert_eq!(half.history, full.history[..2].to_vec());
        let resumed = resume(&ckpt, &[&bundle], &sim, Some(4)).unwrap();
        assert_eq!(resumed.history, full.history);
        assert_eq!(resumed.population, full.population);
        assert_eq!(resumed.best, full.best);

        // Wrong environment set is refused.
        let mut renamed = empty_bundle();
        renamed.env.id = "other".into();
        let err = resume(&ckpt, &[&renamed], &sim, Some(4)).unwrap_err();
        assert!(err.to_string().contains("environment set"), "{err}");
        // Rewinding below completed work is refused.
        let err = resume(&ckpt, &[&bundle], &sim, Some(1)).unwrap_err();
        assert!(err.to_string().contains("already completed"), "{err}");
    }

    #[test]
    fn invalid_configs_are_rejected_by_name() {
        let bundle = empty_bundle();
        let sim = quick_sim();
        let cases: Vec<(EvoConfig, &str)> = vec![
            (
                EvoConfig {
                    population: 5,
                    ..quick_cfg()
                },
                "population",
            ),
            (
                EvoConfig {
                    tournament: 1,
                    ..quick_cfg()
                },
                "tournament",
            ),
            (
                EvoConfig {
                    crossover_prob: 1.5,
                    ..quick_cfg()
                },
                "crossover_prob",
            ),
            (
                EvoConfig {
                    envs_per_gen: 2,
                    ..quick_cfg()
                },
                "envs_per_gen",
            ),
        ];
        for (cfg, key) in cases {
            let err = evolve(&cfg, &[&bundle], &sim, None).unwrap_err();
            assert!(err.to_string().contains(key), "{key}: {err}");
        }
    }
}
