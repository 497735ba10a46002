//! Desk-scale laboratory for gas-seeking nano-drone swarms.
//!
//! The crate models the full pipeline end to end: procedural indoor
//! environments with a coarse steady-state airflow solve and a filament-based
//! gas release ([`env`]), a particle-swarm waypoint controller with reactive
//! obstacle handling ([`controller`]), chemotaxis/anemotaxis reference
//! policies ([`baselines`]), a kinematic multi-agent episode simulator
//! ([`sim`]), and a genetic tuner with difficulty-weighted environment
//! sampling ([`evolution`]). Everything is deterministic given a root seed
//! (see [`seeds`]).

pub mod baselines;
pub mod controller;
pub mod env;
pub mod evolution;
pub mod genome;
pub mod geometry;
pub mod seeds;
pub mod sensor;
pub mod sim;
pub mod svg;

pub use genome::Genome;
pub use geometry::{Rect, Segment, Vec2};

/// Unified error type for the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("environment generation failed: {0}")]
    EnvGen(String),
    #[error("flow solve did not converge after {iters} iterations (max divergence {residual:.3e} 1/s)")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("flow solve needs at least one inlet span and one outlet span")]
    NoVents,
    #[error("bundle: {0}")]
    Bundle(String),
}

pub type Result<T> = std::result::Result<T, Error>;
