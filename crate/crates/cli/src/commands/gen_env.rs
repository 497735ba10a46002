//! `sniffy gen-env`: procedurally generate environment bundles (floor plan,
//! airflow field, gas record) and write a manifest describing the batch.

use std::path::PathBuf;

use clap::Args;
use sniffy_core::env::bundle::{save_bundle, EnvBundle};
use sniffy_core::env::flow::solve_flow;
use sniffy_core::env::gas::{simulate_filaments, GasConfig};
use sniffy_core::env::{generate_environment, EnvConfig};
use sniffy_core::seeds;

use crate::util::{data, resolve_seed, usage, file_header, Result};

#[derive(Args, Debug)]
pub struct GenEnvArgs {
    /// Number of environment bundles to generate.
    #[arg(long, default_value_t = 1)]
    pub count: usize,

    /// Arena size in metres: one number for a square ("10") or "WxH".
    #[arg(long, default_value = "10")]
    pub size: String,

    /// Rooms per floor plan (0 = empty arena with no interior walls).
    #[arg(long, default_value_t = 4)]
    pub rooms: usize,

    /// Door width in metres.
    #[arg(long, default_value_t = 1.0)]
    pub door_width: f64,

    /// Root seed; falls back to SNIFFY_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output directory for the .gdm bundles and manifest.txt.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// Airflow solver grid resolution in metres.
    #[arg(long, default_value_t = 0.25)]
    pub flow_res: f64,

    /// Maximum |divergence| per cell accepted by the airflow solver (1/s).
    #[arg(long, default_value_t = 1e-3)]
    pub flow_tol: f64,

    /// Gas record length in seconds (frames are stored per recording window).
    #[arg(long, default_value_t = 100.0)]
    pub gas_duration: f64,
}

fn parse_size(spec: &str) -> Result<(f64, f64)> {
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| usage(format!("--size: cannot parse {s:?} as metres")))
    };
    let (w, h) = match spec.split_once(['x', 'X']) {
        Some((w, h)) => (parse(w)?, parse(h)?),
        None => {
            let side = parse(spec)?;
            (side, side)
        }
    };
    if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
        return Err(usage(format!("--size: dimensions must be positive, got {w}x{h}")));
    }
    Ok((w, h))
}

pub fn run(args: &GenEnvArgs) -> Result<()> {
    if args.count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    let root = resolve_seed(args.seed)?;
    let (width, height) = parse_size(&args.size)?;
    let env_cfg = EnvConfig {
        width,
        height,
        room_count: args.rooms,
        door_width: args.door_width,
    };
    let gas_cfg = GasConfig {
        duration: args.gas_duration,
        ..GasConfig::default()
    };
    std::fs::create_dir_all(&args.out)
        .map_err(|e| data(format!("cannot create output directory: {e}")))?;

    let mut manifest = file_header(
        "gen-env",
        root,
        &[
            ("count", args.count.to_string()),
            ("size", format!("{width}x{height}")),
            ("rooms", args.rooms.to_string()),
            ("gas-duration", format!("{}", args.gas_duration)),
        ],
    );

    let mut made = 0usize;
    let mut attempt = 0u64;
    // Each attempt index maps to one derived seed; rejected seeds are
    // reported and skipped, so the manifest always lists `count` bundles.
    let max_attempts = (args.count as u64) * 50;
    while made < args.count {
        if attempt >= max_attempts {
            return Err(data(format!(
                "only {made} of {} environments generated after {attempt} attempts",
                args.count
            )));
        }
        let env_seed = seeds::derive(root, &[seeds::D_ENV, attempt]);
        attempt += 1;
        let env = match generate_environment(env_seed, &env_cfg) {
            Ok(env) => env,
            Err(e) => {
                eprintln!("seed {env_seed}: rejected ({e})");
                continue;
            }
        };
        let flow = match solve_flow(&env, args.flow_res, args.flow_tol, 20_000) {
            Ok(flow) => flow,
            Err(e) => {
                eprintln!("seed {env_seed}: rejected (airflow: {e})");
                continue;
            }
        };
        let gas = match simulate_filaments(&env, &flow, &gas_cfg, env_seed) {
            Ok(gas) => gas,
            Err(e) => {
                eprintln!("seed {env_seed}: rejected (gas: {e})");
                continue;
            }
        };
        let file = format!("{}.gdm", env.id);
        let id = env.id.clone();
        let bundle = EnvBundle { env, flow, gas };
        save_bundle(&bundle, &args.out.join(&file))
            .map_err(|e| data(format!("cannot write {file}: {e}")))?;
        manifest.push_str(&format!("{file}\tseed={env_seed}\tid={id}\n"));
        made += 1;
        println!("wrote {file}");
    }

    std::fs::write(args.out.join("manifest.txt"), &manifest)
        .map_err(|e| data(format!("cannot write manifest: {e}")))?;
    println!("wrote manifest.txt ({made} bundles)");
    Ok(())
}
