//! `sniffy eval`: run one policy over every bundle in a directory with a
//! batch of episode seeds, writing one CSV row per run plus an aggregate
//! summary (success rate, mean distance, mean time with the cap applied).

use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use rayon::prelude::*;
use sniffy_core::controller::Policy;
use sniffy_core::seeds;
use sniffy_core::sim::{bootstrap_mean_ci, run_episode, summarize, RunMetrics, SimConfig};

use crate::util::{data, file_header, resolve_genome, resolve_seed, usage, Result};

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Policy to evaluate: pso, chemotaxis, or anemotaxis.
    #[arg(long)]
    pub policy: String,

    /// Genome: "manual", "evolved", or a preset file path.
    #[arg(long, default_value = "manual")]
    pub genome: String,

    /// Directory of .gdm bundles to evaluate on.
    #[arg(long, value_name = "DIR")]
    pub bundles: PathBuf,

    /// Episode seeds per environment (spawn randomization count).
    #[arg(long, default_value_t = 10)]
    pub seeds: usize,

    /// Root seed; falls back to SNIFFY_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory for metrics.csv and summary.txt.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// Episode length in seconds (also the time cap for failed runs).
    #[arg(long, default_value_t = 100.0)]
    pub episode_len: f64,

    /// Agents per episode.
    #[arg(long, default_value_t = 3)]
    pub agents: usize,
}

/// One CSV row per run (episode), in bundle-name then seed order.
fn metrics_rows(metrics: &[RunMetrics]) -> String {
    let mut s = String::from(
        "env_id,policy,episode_seed,mean_cost,mean_distance,min_distance,time_to_source,success,crashes,trajectory_hash\n",
    );
    for m in metrics {
        let min_dist = m
            .min_dist
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let crashes = m.crashed.iter().filter(|c| c.is_some()).count();
        s.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{}\n",
            m.env_id,
            m.policy,
            m.seed,
            m.mean_cost(),
            m.mean_distance(),
            min_dist,
            m.time_to_source,
            u8::from(m.success),
            crashes,
            m.trajectory_hash(),
        ));
    }
    s
}

pub fn run(args: &EvalArgs) -> Result<()> {
    if args.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    let policy = Policy::from_str(&args.policy).map_err(|_| {
        usage(format!(
            "unknown policy {:?} (expected pso, chemotaxis, or anemotaxis)",
            args.policy
        ))
    })?;
    let genome = resolve_genome(&args.genome)?;
    let root = resolve_seed(args.seed)?;
    let bundles = crate::util::load_bundle_dir(&args.bundles)?;
    let sim = SimConfig {
        episode_len: args.episode_len,
        n_agents: args.agents,
        ..SimConfig::default()
    };
    sim.validate()?;

    // Episode seeds derive from the root seed and the environment's own
    // generation seed, so results do not depend on directory layout.
    let jobs: Vec<(usize, u64)> = bundles
        .iter()
        .enumerate()
        .flat_map(|(i, (_, b))| {
            (0..args.seeds).map(move |k| {
                (
                    i,
                    seeds::derive(root, &[seeds::D_VALIDATION, b.env.seed, k as u64]),
                )
            })
        })
        .collect();
    let metrics: Vec<RunMetrics> = jobs
        .par_iter()
        .map(|&(i, ep_seed)| run_episode(&bundles[i].1, policy, &genome, ep_seed, &sim))
        .collect();

    std::fs::create_dir_all(&args.out)
        .map_err(|e| data(format!("cannot create output directory: {e}")))?;

    let header = file_header(
        "eval",
        root,
        &[
            ("policy", policy.to_string()),
            ("genome", args.genome.clone()),
            ("environments", bundles.len().to_string()),
            ("seeds-per-env", args.seeds.to_string()),
        ],
    );
    let mut csv = header.clone();
    csv.push_str(&metrics_rows(&metrics));
    std::fs::write(args.out.join("metrics.csv"), csv)
        .map_err(|e| data(format!("cannot write metrics.csv: {e}")))?;

    let agg = summarize(&metrics);
    let dists: Vec<f64> = metrics.iter().map(RunMetrics::mean_distance).collect();
    let (dist_mean, dist_lo, dist_hi) = bootstrap_mean_ci(&dists, 1000, 0.95, root);
    let mut summary = header;
    summary.push_str(&format!(
        "runs: {}\nsuccess-rate: {:.6}\nmean-distance: {:.6}\nmean-time: {:.6}\nmean-distance-ci95: [{:.6}, {:.6}]\n",
        agg.runs, agg.success_rate, dist_mean, agg.mean_time, dist_lo, dist_hi
    ));
    std::fs::write(args.out.join("summary.txt"), &summary)
        .map_err(|e| data(format!("cannot write summary.txt: {e}")))?;

    println!(
        "runs: {}  success-rate: {:.3}  mean-distance: {:.3}  mean-time: {:.1}",
        agg.runs, agg.success_rate, agg.mean_distance, agg.mean_time
    );
    println!("wrote metrics.csv, summary.txt");
    Ok(())
}
