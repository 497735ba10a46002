//! Reference seekers used for comparison: chemotaxis (follow the local
//! concentration gradient, estimated by probing short legs in x and y) and
//! anemotaxis (move upwind while in the plume). Both plug into the same
//! waypoint-trigger/tracking machinery as the swarm-search policy — only the
//! goal placement differs.

use crate::controller::{pso, ControllerConfig, Observation};
use crate::genome::Genome;
use crate::geometry::Vec2;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Probe leg length for the gradient estimate.
pub const PROBE_DELTA: f64 = 0.3;
/// Displacement of a gradient / upwind goal from the agent.
pub const STEP_LEN: f64 = 2.0;
/// Arrival radius while traversing a probe leg (must be smaller than the
/// leg itself, unlike the genome's waypoint radius).
pub const PROBE_ARRIVE: f64 = 0.15;
/// Give up on a probe leg after this long.
pub const PROBE_TIMEOUT: f64 = 10.0;

/// Chemotaxis gradient-probe progress: measure at the base point, at
/// base + δx, then at base + δy.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum ChemoPhase {
    #[default]
    Idle,
    LegX { base: Vec2, r0: f64 },
    LegY { base: Vec2, r0: f64, r1: f64 },
}

/// Per-agent baseline memory.
#[derive(Debug, Clone, Default)]
pub struct BaselineState {
    /// Where the agent last sensed a supra-threshold reading.
    pub last_in_plume: Option<Vec2>,
    pub phase: ChemoPhase,
}

impl BaselineState {
    /// Mid-probe: waypoint arrival/timeout run on the probe constants.
    pub fn probing(&self) -> bool {
        self.phase != ChemoPhase::Idle
    }

    /// Chemotaxis goal on a waypoint trigger: step through the probe
    /// sequence, then place a goal up the measured gradient (or fall back to
    /// exploration on a flat field). A leg that timed out contributes the
    /// reading wherever the agent actually is — the next cycle recovers.
    pub fn chemotaxis_trigger<R: Rng>(
        &mut self,
        obs: &Observation,
        prev_goal: Option<Vec2>,
        genome: &Genome,
        cfg: &ControllerConfig,
        rng: &mut R,
    ) -> Vec2 {
        match self.phase {
            ChemoPhase::Idle => {
                self.phase = ChemoPhase::LegX { base: obs.pos, r0: obs.reading };
                obs.pos + Vec2::new(PROBE_DELTA, 0.0)
            }
            ChemoPhase::LegX { base, r0 } => {
                self.phase = ChemoPhase::LegY { base, r0, r1: obs.reading };
                base + Vec2::new(0.0, PROBE_DELTA)
            }
            ChemoPhase::LegY { base: _, r0, r1 } => {
                self.phase = ChemoPhase::Idle;
                chemotaxis_waypoint(
                    obs.pos,
                    prev_goal,
                    [r0, r1, obs.reading],
                    genome,
                    cfg,
                    rng,
                )
            }
        }
    }

    /// Anemotaxis goal on a waypoint trigger.
    pub fn anemotaxis_trigger<R: Rng>(
        &mut self,
        obs: &Observation,
        prev_goal: Option<Vec2>,
        genome: &Genome,
        cfg: &ControllerConfig,
        rng: &mut R,
    ) -> Vec2 {
        anemotaxis_waypoint(
            obs.pos,
            prev_goal,
            obs.reading,
            obs.wind,
            self.last_in_plume,
            genome,
            cfg,
            rng,
        )
    }
}

/// Gradient goal from probe readings `[r(base), r(base+δx), r(base+δy)]`:
/// a `STEP_LEN` displacement along the finite nonzero gradient, otherwise an
/// exploration draw identical to the swarm-search explore mode.
pub fn chemotaxis_waypoint<R: Rng>(
    pos: Vec2,
    prev_goal: Option<Vec2>,
    readings: [f64; 3],
    genome: &Genome,
    cfg: &ControllerConfig,
    rng: &mut R,
) -> Vec2 {
    let grad = Vec2::new(
        (readings[1] - readings[0]) / PROBE_DELTA,
        (readings[2] - readings[0]) / PROBE_DELTA,
    );
    if grad.x.is_finite() && grad.y.is_finite() && grad.norm() > 1e-12 {
        pos + grad.normalized() * STEP_LEN
    } else {
        explore_fallback(pos, prev_goal, genome, cfg, rng)
    }
}

/// Upwind goal while the plume is sensed; random waypoints around the last
/// in-plume point while it is lost; pure exploration if it was never found.
/// Zero wind inside the plume degrades to a local random waypoint.
#[allow(clippy::too_many_arguments)]
pub fn anemotaxis_waypoint<R: Rng>(
    pos: Vec2,
    prev_goal: Option<Vec2>,
    reading: f64,
    wind: Vec2,
    last_in_plume: Option<Vec2>,
    genome: &Genome,
    cfg: &ControllerConfig,
    rng: &mut R,
) -> Vec2 {
    if reading > cfg.detection_threshold {
        if wind.norm() > 1e-12 {
            pos - wind.normalized() * STEP_LEN
        } else {
            pos + pso::square_draw(rng, cfg.r_rand)
        }
    } else if let Some(anchor) = last_in_plume {
        anchor + pso::square_draw(rng, cfg.r_rand)
    } else {
        explore_fallback(pos, prev_goal, genome, cfg, rng)
    }
}

fn explore_fallback<R: Rng>(
    pos: Vec2,
    prev_goal: Option<Vec2>,
    genome: &Genome,
    cfg: &ControllerConfig,
    rng: &mut R,
) -> Vec2 {
    pso::next_goal(pos, prev_goal, None, None, genome, cfg.r_rand, rng)
}
