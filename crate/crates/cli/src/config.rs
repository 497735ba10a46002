//! Plain-text `key=value` experiment configuration for `sniffy evolve`.
//!
//! One key per line; `#` starts a comment; unknown keys are rejected by
//! name. Command-line flags override file values, so a config file records
//! the experiment while flags carry one-off tweaks.

use crate::util::{parse_on_off, usage, Result};

/// Optional overrides collected from a config file or from flags. `None`
/// means "not specified here"; later layers win when merging.
#[derive(Debug, Default, Clone)]
pub struct EvolveOverrides {
    pub population: Option<usize>,
    pub generations: Option<usize>,
    pub tournament: Option<usize>,
    pub crossover_prob: Option<f64>,
    pub mutation_prob: Option<f64>,
    pub eta: Option<f64>,
    pub envs_per_gen: Option<usize>,
    pub doping: Option<bool>,
    pub checkpoint_every: Option<usize>,
    pub seed: Option<u64>,
    pub episode_len: Option<f64>,
    pub agents: Option<usize>,
}

impl EvolveOverrides {
    /// Layer `over` on top of `self`: any field set in `over` wins.
    pub fn merged_with(&self, over: &EvolveOverrides) -> EvolveOverrides {
        EvolveOverrides {
            population: over.population.or(self.population),
            generations: over.generations.or(self.generations),
            tournament: over.tournament.or(self.tournament),
            crossover_prob: over.crossover_prob.or(self.crossover_prob),
            mutation_prob: over.mutation_prob.or(self.mutation_prob),
            eta: over.eta.or(self.eta),
            envs_per_gen: over.envs_per_gen.or(self.envs_per_gen),
            doping: over.doping.or(self.doping),
            checkpoint_every: over.checkpoint_every.or(self.checkpoint_every),
            seed: over.seed.or(self.seed),
            episode_len: over.episode_len.or(self.episode_len),
            agents: over.agents.or(self.agents),
        }
    }

    /// True when any evolution knob is set (used to reject knobs that would
    /// silently disagree with a resumed checkpoint).
    pub fn any_run_knob(&self) -> Option<&'static str> {
        if self.population.is_some() {
            Some("population")
        } else if self.tournament.is_some() {
            Some("tournament")
        } else if self.crossover_prob.is_some() {
            Some("crossover_prob")
        } else if self.mutation_prob.is_some() {
            Some("mutation_prob")
        } else if self.eta.is_some() {
            Some("eta")
        } else if self.envs_per_gen.is_some() {
            Some("envs_per_gen")
        } else if self.doping.is_some() {
            Some("doping")
        } else if self.seed.is_some() {
            Some("seed")
        } else {
            None
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| usage(format!("config key {key:?}: cannot parse value {value:?}")))
}

/// Parse a config file's text. Unknown keys are an error naming the key.
pub fn parse_config(text: &str) -> Result<EvolveOverrides> {
    let mut o = EvolveOverrides::default();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            usage(format!(
                "config line {}: expected key=value, got {raw:?}",
                ln + 1
            ))
        })?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "population" => o.population = Some(parse_num(key, value)?),
            "generations" => o.generations = Some(parse_num(key, value)?),
            "tournament" => o.tournament = Some(parse_num(key, value)?),
            "crossover_prob" => o.crossover_prob = Some(parse_num(key, value)?),
            "mutation_prob" => o.mutation_prob = Some(parse_num(key, value)?),
            "eta" => o.eta = Some(parse_num(key, value)?),
            "envs_per_gen" => o.envs_per_gen = Some(parse_num(key, value)?),
            "doping" => o.doping = Some(parse_on_off("config key \"doping\"", value)?),
            "checkpoint_every" => o.checkpoint_every = Some(parse_num(key, value)?),
            "seed" => o.seed = Some(parse_num(key, value)?),
            "episode_len" => o.episode_len = Some(parse_num(key, value)?),
            "agents" => o.agents = Some(parse_num(key, value)?),
            other => {
                return Err(usage(format!("unknown config key {other:?}")));
            }
        }
    }
    Ok(o)
}
