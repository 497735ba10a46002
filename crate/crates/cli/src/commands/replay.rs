//! `sniffy replay`: re-run one episode deterministically from a bundle and
//! an episode seed, render it to SVG, and optionally verify the trajectory
//! hash recorded by `eval`.

use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use sniffy_core::controller::Policy;
use sniffy_core::env::bundle::load_bundle;
use sniffy_core::sim::{run_episode, SimConfig};
use sniffy_core::svg::render_episode_svg;

use crate::util::{data, resolve_genome, usage, Result};

#[derive(Args, Debug)]
pub struct ReplayArgs {
    /// Bundle file (.gdm) to replay in.
    #[arg(long, value_name = "FILE")]
    pub bundle: PathBuf,

    /// Episode seed (the episode_seed column of an eval metrics row).
    #[arg(long)]
    pub seed: u64,

    /// Policy: pso, chemotaxis, or anemotaxis.
    #[arg(long, default_value = "pso")]
    pub policy: String,

    /// Genome: "manual", "evolved", or a preset file path.
    #[arg(long, default_value = "manual")]
    pub genome: String,

    /// Output SVG file.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,

    /// Expected trajectory hash (from an eval metrics row); the replay
    /// fails with a data error if the recomputed hash differs.
    #[arg(long)]
    pub expect_hash: Option<u64>,

    /// Episode length in seconds.
    #[arg(long, default_value_t = 100.0)]
    pub episode_len: f64,

    /// Agents per episode.
    #[arg(long, default_value_t = 3)]
    pub agents: usize,
}

pub fn run(args: &ReplayArgs) -> Result<()> {
    let policy = Policy::from_str(&args.policy).map_err(|_| {
        usage(format!(
            "unknown policy {:?} (expected pso, chemotaxis, or anemotaxis)",
            args.policy
        ))
    })?;
    let genome = resolve_genome(&args.genome)?;
    let bundle = load_bundle(&args.bundle)
        .map_err(|e| data(format!("cannot load bundle {}: {e}", args.bundle.display())))?;
    let sim = SimConfig {
        episode_len: args.episode_len,
        n_agents: args.agents,
        ..SimConfig::default()
    };
    sim.validate()?;

    let metrics = run_episode(&bundle, policy, &genome, args.seed, &sim);
    let hash = metrics.trajectory_hash();
    if let Some(expected) = args.expect_hash {
        if hash != expected {
            return Err(data(format!(
                "trajectory hash mismatch: expected {expected}, replay produced {hash}"
            )));
        }
    }

    let mut svg = format!(
        "<!-- sniffy replay episode-seed={} policy={} trajectory-hash={} -->\n",
        args.seed, policy, hash
    );
    svg.push_str(&render_episode_svg(&bundle, &metrics));
    std::fs::write(&args.out, svg)
        .map_err(|e| data(format!("cannot write SVG: {e}")))?;

    println!("trajectory-hash: {hash}");
    println!(
        "success: {}  crashes: {}",
        u8::from(metrics.success),
        metrics.crashed.iter().filter(|c| c.is_some()).count()
    );
    Ok(())
}
