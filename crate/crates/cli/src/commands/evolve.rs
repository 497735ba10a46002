//! `sniffy evolve`: run (or resume) the genetic search for controller
//! parameters over a directory of environment bundles.

use std::path::PathBuf;

use clap::Args;
use sniffy_core::env::bundle::EnvBundle;
use sniffy_core::evolution::{self, EvoConfig, EvolveResult};
use sniffy_core::sim::SimConfig;

use crate::config::{parse_config, EvolveOverrides};
use crate::util::{data, file_header, parse_on_off, resolve_seed, usage, Result};

#[derive(Args, Debug)]
pub struct EvolveArgs {
    /// Directory of .gdm training bundles.
    #[arg(long, value_name = "DIR")]
    pub bundles: PathBuf,

    /// Output directory for history.csv, best.genome, and checkpoint.json.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// key=value config file; flags below override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Population size (even, at least 2).
    #[arg(long)]
    pub population: Option<usize>,

    /// Number of generations to run (with --resume: the new total).
    #[arg(long)]
    pub generations: Option<usize>,

    /// Tournament size for parent selection.
    #[arg(long)]
    pub tournament: Option<usize>,

    /// Crossover probability in [0, 1].
    #[arg(long)]
    pub crossover_prob: Option<f64>,

    /// Per-gene mutation probability in [0, 1].
    #[arg(long)]
    pub mutation_prob: Option<f64>,

    /// Mutation distribution index (larger = smaller steps).
    #[arg(long)]
    pub eta: Option<f64>,

    /// Training environments drawn per generation.
    #[arg(long)]
    pub envs_per_gen: Option<usize>,

    /// Difficulty-weighted environment selection: "on" or "off".
    #[arg(long, value_name = "on|off")]
    pub doping: Option<String>,

    /// Write a resumable checkpoint every N generations (0 = end only).
    #[arg(long)]
    pub checkpoint_every: Option<usize>,

    /// Root seed; falls back to SNIFFY_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Episode length in seconds used for fitness evaluation.
    #[arg(long)]
    pub episode_len: Option<f64>,

    /// Agents per episode.
    #[arg(long)]
    pub agents: Option<usize>,

    /// Resume from a checkpoint file written by a previous run. The
    /// checkpoint carries the configuration; only --generations (to extend
    /// the run), --episode-len, and --agents (which must repeat the original
    /// run's values) may be combined with it.
    #[arg(long, value_name = "FILE")]
    pub resume: Option<PathBuf>,
}

fn flag_overrides(args: &EvolveArgs) -> Result<EvolveOverrides> {
    Ok(EvolveOverrides {
        population: args.population,
        generations: args.generations,
        tournament: args.tournament,
        crossover_prob: args.crossover_prob,
        mutation_prob: args.mutation_prob,
        eta: args.eta,
        envs_per_gen: args.envs_per_gen,
        doping: match &args.doping {
            Some(s) => Some(parse_on_off("--doping", s)?),
            None => None,
        },
        checkpoint_every: args.checkpoint_every,
        seed: args.seed,
        episode_len: args.episode_len,
        agents: args.agents,
    })
}

/// Root seed recorded in a checkpoint, for output headers on resume.
fn checkpoint_seed(path: &PathBuf) -> Result<u64> {
    let bytes = std::fs::read(path)
        .map_err(|e| data(format!("cannot read checkpoint {}: {e}", path.display())))?;
    let v: serde_json::Value = serde_json::from_slice(&bytes)
        .map_err(|e| data(format!("checkpoint does not parse: {e}")))?;
    v.get("config")
        .and_then(|c| c.get("seed"))
        .and_then(|s| s.as_u64())
        .ok_or_else(|| data("checkpoint is missing its root seed"))
}

fn history_csv(result: &EvolveResult, root: u64, doping: bool, n_bundles: usize) -> String {
    let mut csv = file_header(
        "evolve",
        root,
        &[
            ("doping", if doping { "on" } else { "off" }.to_string()),
            ("environments", n_bundles.to_string()),
        ],
    );
    csv.push_str("generation,best_cost,median_cost,env_ids\n");
    for rec in &result.history {
        csv.push_str(&format!(
            "{},{:.9},{:.9},{}\n",
            rec.gen,
            rec.best_cost,
            rec.median_cost,
            rec.env_ids.join(";")
        ));
    }
    csv
}

pub fn run(args: &EvolveArgs) -> Result<()> {
    let bundles = crate::util::load_bundle_dir(&args.bundles)?;
    let refs: Vec<&EnvBundle> = bundles.iter().map(|(_, b)| b).collect();
    let flags = flag_overrides(args)?;

    let mut sim = SimConfig::default();
    if let Some(len) = flags.episode_len {
        sim.episode_len = len;
    }
    if let Some(n) = flags.agents {
        sim.n_agents = n;
    }

    std::fs::create_dir_all(&args.out)
        .map_err(|e| data(format!("cannot create output directory: {e}")))?;
    let checkpoint_path = args.out.join("checkpoint.json");

    let (result, root, doping) = if let Some(ckpt) = &args.resume {
        if args.config.is_some() {
            return Err(usage(
                "--config cannot be combined with --resume (the checkpoint carries the configuration)",
            ));
        }
        if let Some(knob) = flags.any_run_knob() {
            return Err(usage(format!(
                "--{} cannot be combined with --resume (the checkpoint carries the configuration)",
                knob.replace('_', "-")
            )));
        }
        let root = checkpoint_seed(ckpt)?;
        let result = evolution::resume(ckpt, &refs, &sim, args.generations)?;
        // Doping state for the header comes from the checkpoint config.
        let bytes = std::fs::read(ckpt)?;
        let v: serde_json::Value = serde_json::from_slice(&bytes)
            .map_err(|e| data(format!("checkpoint does not parse: {e}")))?;
        let doping = v
            .get("config")
            .and_then(|c| c.get("doping"))
            .and_then(|d| d.as_bool())
            .unwrap_or(true);
        (result, root, doping)
    } else {
        let mut merged = EvolveOverrides::default();
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| data(format!("cannot read config {}: {e}", path.display())))?;
            merged = parse_config(&text)?;
        }
        merged = merged.merged_with(&flags);
        if let Some(len) = merged.episode_len {
            sim.episode_len = len;
        }
        if let Some(n) = merged.agents {
            sim.n_agents = n;
        }
        let defaults = EvoConfig::default();
        let cfg = EvoConfig {
            population: merged.population.unwrap_or(defaults.population),
            generations: merged.generations.unwrap_or(defaults.generations),
            tournament: merged.tournament.unwrap_or(defaults.tournament),
            crossover_prob: merged.crossover_prob.unwrap_or(defaults.crossover_prob),
            mutation_prob: merged.mutation_prob.unwrap_or(defaults.mutation_prob),
            eta: merged.eta.unwrap_or(defaults.eta),
            envs_per_gen: merged.envs_per_gen.unwrap_or(defaults.envs_per_gen),
            doping: merged.doping.unwrap_or(defaults.doping),
            checkpoint_every: merged.checkpoint_every.unwrap_or(defaults.checkpoint_every),
            seed: resolve_seed(merged.seed)?,
        };
        let root = cfg.seed;
        let doping = cfg.doping;
        let result = evolution::evolve(&cfg, &refs, &sim, Some(&checkpoint_path))?;
        (result, root, doping)
    };

    let csv = history_csv(&result, root, doping, refs.len());
    std::fs::write(args.out.join("history.csv"), csv)
        .map_err(|e| data(format!("cannot write history.csv: {e}")))?;

    let mut preset = file_header("evolve best genome", root, &[]);
    preset.push_str(&result.best.to_preset_string());
    std::fs::write(args.out.join("best.genome"), preset)
        .map_err(|e| data(format!("cannot write best.genome: {e}")))?;

    println!(
        "generations: {}  best cost: {:.6}",
        result.history.len(),
        result.best_cost
    );
    println!("wrote history.csv, best.genome, checkpoint.json");
    Ok(())
}
