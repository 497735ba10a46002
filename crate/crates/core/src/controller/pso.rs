//! Waypoint generation: each agent carries a particle-swarm state whose
//! "velocity" displaces the next goal from the current position. Two regimes:
//! random exploration before any gas has been confirmed, best-position
//! seeking afterwards.

use crate::genome::Genome;
use crate::geometry::Vec2;
use rand::Rng;

/// Goal from position plus waypoint velocity.
pub fn waypoint(pos: Vec2, v: Vec2) -> Vec2 {
    pos + v
}

/// Exploration velocity: inertia on the previous goal plus attraction to a
/// random point.
pub fn explore_velocity(prev_goal: Vec2, pos: Vec2, rand_pt: Vec2, genome: &Genome) -> Vec2 {
    (prev_goal - pos) * genome.explore_inertia + (rand_pt - pos) * genome.random_gain
}

/// Seeking velocity: inertia plus weighted attraction to the agent's own and
/// the swarm's best-reading positions. `alpha`/`beta` are the per-iteration
/// uniform(0,1) draws.
pub fn seek_velocity(
    prev_goal: Vec2,
    pos: Vec2,
    personal_best: Vec2,
    swarm_best: Vec2,
    alpha: f64,
    beta: f64,
    genome: &Genome,
) -> Vec2 {
    (prev_goal - pos) * genome.seek_inertia
        + (personal_best - pos) * (genome.personal_gain * alpha)
        + (swarm_best - pos) * (genome.social_gain * beta)
}

/// Uniform draw from the square of side `side` centered on the origin.
/// x then y, so callers share a stable draw order.
pub fn square_draw<R: Rng>(rng: &mut R, side: f64) -> Vec2 {
    let h = side / 2.0;
    let x = rng.gen_range(-h..=h);
    let y = rng.gen_range(-h..=h);
    Vec2::new(x, y)
}

/// Next goal for the swarm-search policy. The very first iteration starts
/// from a uniform point in the `r_rand` square around the agent; afterwards
/// the goal follows the explore/seek velocity depending on whether any agent
/// has confirmed gas.
#[allow(clippy::too_many_arguments)]
pub fn next_goal<R: Rng>(
    pos: Vec2,
    prev_goal: Option<Vec2>,
    personal_best: Option<Vec2>,
    swarm_best: Option<Vec2>,
    genome: &Genome,
    r_rand: f64,
    rng: &mut R,
) -> Vec2 {
    let prev = match prev_goal {
        None => return pos + square_draw(rng, r_rand),
        Some(g) => g,
    };
    match swarm_best {
        Some(s) => {
            let alpha: f64 = rng.gen_range(0.0..1.0);
            let beta: f64 = rng.gen_range(0.0..1.0);
            // Before this agent's own first confirmed reading its personal
            // attraction term vanishes (best taken as the current position).
            let p = personal_best.unwrap_or(pos);
            waypoint(pos, seek_velocity(prev, pos, p, s, alpha, beta, genome))
        }
        None => {
            let r = pos + square_draw(rng, r_rand);
            waypoint(pos, explore_velocity(prev, pos, r, genome))
        }
    }
}
