//! The swarm agent controller: waypoint generation (see [`pso`]) plus the
//! three-state goal-tracking machine — line following toward the goal, wall
//! following around obstacles, and attraction-repulsion when other agents are
//! close. Agents fly at constant yaw with four fixed range sensors along the
//! world axes and are commanded by velocity setpoints of magnitude
//! `v_desired` (zero only when boxed in on all four sides).

pub mod pso;

use crate::baselines::BaselineState;
use crate::genome::Genome;
use crate::geometry::{Rect, Vec2};
use crate::seeds;
use serde::{Deserialize, Serialize};

/// World-frame laser directions, index k = 0..3 → +x, +y, −x, −y.
/// The single source of truth for laser indexing: the avoidance rotation
/// `R((k+2)/2·π)·i` equals `LASER_AXES[(k+2) % 4]`, which points directly
/// away from whatever laser k sees.
pub const LASER_AXES: [Vec2; 4] = [
    Vec2 { x: 1.0, y: 0.0 },
    Vec2 { x: 0.0, y: 1.0 },
    Vec2 { x: -1.0, y: 0.0 },
    Vec2 { x: 0.0, y: -1.0 },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    LineFollowing,
    WallFollowing,
    AttractionRepulsion,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::LineFollowing => "line",
            Mode::WallFollowing => "wall",
            Mode::AttractionRepulsion => "avoid",
        })
    }
}

/// Which waypoint generator drives the agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Policy {
    Pso,
    Chemotaxis,
    Anemotaxis,
}

impl std::str::FromStr for Policy {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Policy> {
        match s {
            "pso" => Ok(Policy::Pso),
            "chemotaxis" => Ok(Policy::Chemotaxis),
            "anemotaxis" => Ok(Policy::Anemotaxis),
            other => Err(crate::Error::Config(format!(
                "unknown policy {other:?} (expected pso, chemotaxis, or anemotaxis)"
            ))),
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Policy::Pso => "pso",
            Policy::Chemotaxis => "chemotaxis",
            Policy::Anemotaxis => "anemotaxis",
        })
    }
}

/// Everything an agent senses in one control step. `neighbors` holds offsets
/// (neighbor position minus own position) of the other live agents; `wind`
/// is the ground-truth airflow at the agent (used by anemotaxis only).
#[derive(Debug, Clone)]
pub struct Observation {
    pub t: f64,
    pub pos: Vec2,
    pub lasers: [f64; 4],
    pub reading: f64,
    pub neighbors: Vec<Vec2>,
    pub wind: Vec2,
}

/// State shared across the swarm, updated between control steps. The best
/// position/reading pair exists only once some agent has exceeded the
/// detection threshold; `event` marks the steps on which it improved.
#[derive(Debug, Clone, Default)]
pub struct SwarmShared {
    pub best: Option<(Vec2, f64)>,
    pub event: bool,
}

impl SwarmShared {
    /// The swarm switches from exploring to seeking once a best exists.
    pub fn seeking(&self) -> bool {
        self.best.is_some()
    }
}

/// Corridor bookkeeping for the wall-following termination rule: the
/// obstacle counts as avoided when the agent has left the corridor of
/// half-width `line_margin` around the original line and re-entered it
/// strictly closer to the goal than where it left.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct CorridorTrack {
    exited: bool,
    exit_dist: f64,
    was_inside: bool,
}

impl CorridorTrack {
    fn inside(pos: Vec2, goal: Vec2, line_start: Vec2, margin: f64) -> bool {
        let e = (goal - line_start).normalized();
        if e == Vec2::ZERO {
            return true;
        }
        e.cross(pos - line_start).abs() <= margin
    }

    /// Start tracking at wall-follow entry. Entering outside the corridor
    /// counts as already exited from the entry point.
    pub fn begin(pos: Vec2, goal: Vec2, line_start: Vec2, margin: f64) -> CorridorTrack {
        let inside = CorridorTrack::inside(pos, goal, line_start, margin);
        CorridorTrack {
            exited: !inside,
            exit_dist: if inside { 0.0 } else { pos.dist(goal) },
            was_inside: inside,
        }
    }

    /// Advance one step; true when the avoided predicate fires.
    fn update(&mut self, pos: Vec2, goal: Vec2, line_start: Vec2, margin: f64) -> bool {
        let inside = CorridorTrack::inside(pos, goal, line_start, margin);
        let mut avoided = false;
        if self.was_inside && !inside {
            self.exited = true;
            self.exit_dist = pos.dist(goal);
        } else if self.exited && inside && !self.was_inside {
            avoided = pos.dist(goal) < self.exit_dist;
        }
        self.was_inside = inside;
        avoided
    }
}

/// Per-agent controller memory.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub mode: Mode,
    pub goal: Option<Vec2>,
    pub line_start: Vec2,
    pub last_wp_time: f64,
    /// Waypoint iteration index j; also keys the per-iteration RNG stream.
    pub iteration: u64,
    /// Position and value of the agent's best supra-threshold reading.
    pub personal_best: Option<(Vec2, f64)>,
    /// Set while boxed in on all four laser axes (zero command issued).
    pub stuck: bool,
    pub corridor: CorridorTrack,
}

impl Default for AgentState {
    fn default() -> Self {
        AgentState {
            mode: Mode::LineFollowing,
            goal: None,
            line_start: Vec2::ZERO,
            last_wp_time: 0.0,
            iteration: 0,
            personal_best: None,
            stuck: false,
            corridor: CorridorTrack::default(),
        }
    }
}

/// Controller-facing configuration shared by every agent in an episode.
#[derive(Debug, Clone, Copy)]
pub struct ControllerConfig {
    pub v_desired: f64,
    /// Side of the random-waypoint square (exploration and first iteration).
    pub r_rand: f64,
    /// Corrected-reading level that counts as a detection.
    pub detection_threshold: f64,
    /// Arena bounding box; baseline goals are clamped into it.
    pub arena: Rect,
}

/// One agent's controller. `step` is pure given (state, observation, shared):
/// replaying a logged observation stream reproduces the same commands and
/// mode sequence.
#[derive(Debug, Clone)]
pub struct AgentController {
    pub id: usize,
    pub genome: Genome,
    pub policy: Policy,
    pub cfg: ControllerConfig,
    pub state: AgentState,
    pub baseline: BaselineState,
    episode_seed: u64,
}

impl AgentController {
    pub fn new(
        id: usize,
        genome: Genome,
        policy: Policy,
        cfg: ControllerConfig,
        episode_seed: u64,
    ) -> AgentController {
        AgentController {
            id,
            genome,
            policy,
            cfg,
            state: AgentState::default(),
            baseline: BaselineState::default(),
            episode_seed,
        }
    }

    /// Fold one gas observation into the agent's memory: the personal best
    /// moves only on a reading that strictly beats both the previous best
    /// and the detection threshold; the plume-membership marker used by the
    /// baselines updates on any supra-threshold reading.
    pub fn observe_gas(&mut self, pos: Vec2, reading: f64) {
        if reading > self.cfg.detection_threshold {
            if self.state.personal_best.map_or(true, |(_, r)| reading > r) {
                self.state.personal_best = Some((pos, reading));
            }
            self.baseline.last_in_plume = Some(pos);
        }
    }

    fn arrival_radius(&self) -> f64 {
        if self.policy == Policy::Chemotaxis && self.baseline.probing() {
            crate::baselines::PROBE_ARRIVE
        } else {
            self.genome.wp_radius
        }
    }

    fn timeout(&self) -> f64 {
        if self.policy == Policy::Chemotaxis && self.baseline.probing() {
            crate::baselines::PROBE_TIMEOUT
        } else {
            self.genome.wp_timeout
        }
    }

    fn regenerate(&mut self, obs: &Observation, shared: &SwarmShared) {
        let mut rng = seeds::stream(
            self.episode_seed,
            &[seeds::D_WAYPOINT, self.id as u64, self.state.iteration],
        );
        let prev = self.state.goal;
        let goal = match self.policy {
            Policy::Pso => {
                let g = pso::next_goal(
                    obs.pos,
                    prev,
                    self.state.personal_best.map(|(p, _)| p),
                    shared.best.map(|(p, _)| p),
                    &self.genome,
                    self.cfg.r_rand,
                    &mut rng,
                );
                // Waypoints may land outside the arena (the tracker then
                // simply steers toward an unreachable direction), but they
                // are leashed to one random-box width around it: with an
                // inertia weight above 1 the goal recurrence otherwise grows
                // without bound and overflows.
                self.cfg.arena.inset(-self.cfg.r_rand).clamp_point(g)
            }
            Policy::Chemotaxis => {
                let g = self
                    .baseline
                    .chemotaxis_trigger(obs, prev, &self.genome, &self.cfg, &mut rng);
                self.cfg.arena.clamp_point(g)
            }
            Policy::Anemotaxis => {
                let g = self
                    .baseline
                    .anemotaxis_trigger(obs, prev, &self.genome, &self.cfg, &mut rng);
                self.cfg.arena.clamp_point(g)
            }
        };
        self.state.goal = Some(goal);
        self.state.line_start = obs.pos;
        self.state.last_wp_time = obs.t;
        self.state.iteration += 1;
        self.state.mode = Mode::LineFollowing;
        self.state.corridor = CorridorTrack::default();
    }

    /// One control step: regenerate the waypoint if a trigger fired, resolve
    /// the tracking mode, and emit a velocity command.
    pub fn step(&mut self, obs: &Observation, shared: &SwarmShared) -> Vec2 {
        let trigger = waypoint_trigger(
            obs.pos,
            self.state.goal,
            obs.t,
            self.state.last_wp_time,
            self.arrival_radius(),
            self.timeout(),
            self.policy == Policy::Pso && shared.event,
        );
        if trigger {
            self.regenerate(obs, shared);
        }

        // Another agent inside the swarm radius forces avoidance regardless
        // of the current mode; once clear, fall back to the line.
        let close = obs
            .neighbors
            .iter()
            .any(|rel| rel.norm() < self.genome.swarm_radius);
        if close {
            self.state.mode = Mode::AttractionRepulsion;
        } else if self.state.mode == Mode::AttractionRepulsion {
            self.state.mode = Mode::LineFollowing;
        }

        let goal = self.state.goal.expect("goal set by first trigger");
        self.state.stuck = false;

        if self.state.mode == Mode::AttractionRepulsion {
            return attraction_repulsion_command(
                &obs.neighbors,
                obs.lasers,
                goal - obs.pos,
                &self.genome,
                self.cfg.v_desired,
            );
        }

        if self.state.mode == Mode::WallFollowing
            && self
                .state
                .corridor
                .update(obs.pos, goal, self.state.line_start, self.genome.line_margin)
        {
            self.state.mode = Mode::LineFollowing;
        }

        if self.state.mode == Mode::LineFollowing {
            match line_follow_axis(obs.pos, goal, self.state.line_start, &obs.lasers, &self.genome)
            {
                Some(k) => return LASER_AXES[k] * self.cfg.v_desired,
                None => {
                    self.state.mode = Mode::WallFollowing;
                    self.state.corridor = CorridorTrack::begin(
                        obs.pos,
                        goal,
                        self.state.line_start,
                        self.genome.line_margin,
                    );
                }
            }
        }

        let (cmd, stuck) =
            wall_follow_command(obs.pos, goal, &obs.lasers, &self.genome, self.cfg.v_desired);
        self.state.stuck = stuck;
        cmd
    }
}

/// Should the agent pick a new waypoint now? Fires on arrival, timeout, a
/// swarm-wide best improvement, or when no goal exists yet.
pub fn waypoint_trigger(
    pos: Vec2,
    goal: Option<Vec2>,
    now: f64,
    last_wp_time: f64,
    arrival_radius: f64,
    timeout: f64,
    swarm_event: bool,
) -> bool {
    match goal {
        None => true,
        Some(g) => {
            pos.dist(g) < arrival_radius || now - last_wp_time > timeout || swarm_event
        }
    }
}

/// Axis with the largest projection on `dir` (ties resolve to the lowest
/// index, deterministically).
fn best_axis(dir: Vec2) -> usize {
    let mut best = 0;
    let mut best_dot = f64::NEG_INFINITY;
    for (k, a) in LASER_AXES.iter().enumerate() {
        let d = a.dot(dir);
        if d > best_dot {
            best_dot = d;
            best = k;
        }
    }
    best
}

/// Line-following axis choice: outside the corridor, move along the axis
/// that best pulls back toward the line; inside, along the axis that best
/// advances on the goal. `None` when the chosen axis is blocked (the caller
/// switches to wall following).
pub fn line_follow_axis(
    pos: Vec2,
    goal: Vec2,
    line_start: Vec2,
    lasers: &[f64; 4],
    genome: &Genome,
) -> Option<usize> {
    let e = (goal - line_start).normalized();
    let cross = if e == Vec2::ZERO { 0.0 } else { e.cross(pos - line_start) };
    let dir = if cross.abs() > genome.line_margin {
        Vec2::new(-e.y, e.x) * (-cross)
    } else {
        goal - pos
    };
    let k = best_axis(dir);
    (lasers[k] > genome.laser_safe).then_some(k)
}

/// Wall-following command: from the laser pointing most directly at the
/// goal, scan toward the goal side for the first safe axis. All four blocked
/// → zero command and the stuck flag.
pub fn wall_follow_command(
    pos: Vec2,
    goal: Vec2,
    lasers: &[f64; 4],
    genome: &Genome,
    v_desired: f64,
) -> (Vec2, bool) {
    let to_goal = goal - pos;
    let desired = best_axis(to_goal);
    let side: i32 = if LASER_AXES[desired].cross(to_goal) >= 0.0 { 1 } else { -1 };
    for j in 0..4i32 {
        let k = (desired as i32 + side * j).rem_euclid(4) as usize;
        if lasers[k] > genome.laser_safe {
            return (LASER_AXES[k] * v_desired, false);
        }
    }
    (Vec2::ZERO, true)
}

/// Un-normalized avoidance field: neighbor repulsion, laser repulsion, and
/// goal attraction at `v_desired` scale. `neighbors` are offsets to the
/// other agents; a repulsion term pushes directly away from each one closer
/// than the swarm radius. A coincident neighbor (zero offset) has no defined
/// direction and contributes nothing.
pub fn avoidance_vector(
    neighbors: &[Vec2],
    lasers: [f64; 4],
    to_goal: Vec2,
    genome: &Genome,
    v_desired: f64,
) -> Vec2 {
    let mut a = Vec2::ZERO;
    for rel in neighbors {
        let d = rel.norm();
        let gap = genome.swarm_radius - d;
        if gap > 0.0 && d > 1e-12 {
            a += *rel * (-(genome.swarm_gain * gap) / d);
        }
    }
    for (k, reading) in lasers.iter().enumerate() {
        let gap = genome.laser_avoid - reading;
        if gap > 0.0 {
            a += LASER_AXES[(k + 2) % 4] * (genome.laser_gain * gap);
        }
    }
    a + to_goal.normalized() * v_desired
}

/// The avoidance field normalized to a constant-speed command. A vanishing
/// field falls back to plain goal attraction.
pub fn attraction_repulsion_command(
    neighbors: &[Vec2],
    lasers: [f64; 4],
    to_goal: Vec2,
    genome: &Genome,
    v_desired: f64,
) -> Vec2 {
    let a = avoidance_vector(neighbors, lasers, to_goal, genome, v_desired).normalized();
    if a == Vec2::ZERO {
        to_goal.normalized() * v_desired
    } else {
        a * v_desired
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLEAR: [f64; 4] = [4.0, 4.0, 4.0, 4.0];

    fn cfg() -> ControllerConfig {
        ControllerConfig {
            v_desired: 0.5,
            r_rand: 10.0,
            detection_threshold: 0.05,
            arena: Rect::new(Vec2::ZERO, Vec2::new(10.0, 10.0)),
        }
    }

    fn obs(pos: Vec2, lasers: [f64; 4]) -> Observation {
        Observation { t: 0.0, pos, lasers, reading: 0.0, neighbors: vec![], wind: Vec2::ZERO }
    }

    /// Controller mid-episode: goal installed, no trigger pending.
    fn tracking(policy: Policy, goal: Vec2, line_start: Vec2) -> AgentController {
        let mut c = AgentController::new(0, Genome::manual(), policy, cfg(), 1);
        c.state.goal = Some(goal);
        c.state.line_start = line_start;
        c.state.last_wp_time = 0.0;
        c.state.iteration = 1;
        c
    }

    #[test]
    fn trigger_examples() {
        // Arrival radius 2.69, distance 2.5 → fires.
        assert!(waypoint_trigger(
            Vec2::ZERO, Some(Vec2::new(2.5, 0.0)), 0.0, 0.0, 2.69, 51.979, false
        ));
        // Timeout 51.979 s, elapsed 60 s → fires.
        assert!(waypoint_trigger(
            Vec2::ZERO, Some(Vec2::new(9.0, 0.0)), 60.0, 0.0, 2.69, 51.979, false
        ));
        // None of the three conditions → quiet.
        assert!(!waypoint_trigger(
            Vec2::ZERO, Some(Vec2::new(9.0, 0.0)), 10.0, 0.0, 2.69, 51.979, false
        ));
        assert!(waypoint_trigger(Vec2::ZERO, None, 0.0, 0.0, 2.69, 51.979, false));
        assert!(waypoint_trigger(
            Vec2::ZERO, Some(Vec2::new(9.0, 0.0)), 10.0, 0.0, 2.69, 51.979, true
        ));
    }

    #[test]
    fn line_follow_straight_at_goal() {
        let mut c = tracking(Policy::Pso, Vec2::new(9.0, 0.0), Vec2::ZERO);
        let cmd = c.step(&obs(Vec2::new(1.0, 0.0), CLEAR), &SwarmShared::default());
        assert_eq!(c.state.mode, Mode::LineFollowing);
        assert!((cmd - Vec2::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn line_follow_reduces_cross_track_error() {
        let mut g = Genome::manual();
        g.line_margin = 0.469;
        let mut c = tracking(Policy::Pso, Vec2::new(9.0, 0.0), Vec2::ZERO);
        c.genome = g;
        let pos = Vec2::new(3.0, 0.6);
        let cmd = c.step(&obs(pos, CLEAR), &SwarmShared::default());
        // Cross-track error is +0.6 in y; the command must push back down.
        assert!(cmd.y < 0.0, "command {cmd:?}");
        assert!((cmd.norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn blocked_forward_axis_switches_to_wall_following() {
        let mut c = tracking(Policy::Pso, Vec2::new(9.0, 0.0), Vec2::ZERO);
        let mut lasers = CLEAR;
        lasers[0] = 1.0; // below laser_safe = 1.5
        let cmd = c.step(&obs(Vec2::new(1.0, 0.0), lasers), &SwarmShared::default());
        assert_eq!(c.state.mode, Mode::WallFollowing);
        // Scan from the blocked desired axis finds +y next.
        assert!((cmd - Vec2::new(0.0, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn chainsaw_scan_goal_behind_blocked_laser() {
        // Goal almost straight behind laser 3 (−y), laser 3 blocked, laser 0
        // clear → move along laser 0 (+x).
        let g = Genome::manual();
        let lasers = [4.0, 4.0, 4.0, 1.0];
        let (cmd, stuck) =
            wall_follow_command(Vec2::ZERO, Vec2::new(0.3, -5.0), &lasers, &g, 0.5);
        assert!(!stuck);
        assert!((cmd - Vec2::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn boxed_in_holds_position() {
        let g = Genome::manual();
        let lasers = [1.0, 1.0, 1.0, 1.0];
        let (cmd, stuck) = wall_follow_command(Vec2::ZERO, Vec2::new(5.0, 0.0), &lasers, &g, 0.5);
        assert!(stuck);
        assert_eq!(cmd, Vec2::ZERO);
    }

    #[test]
    fn corridor_exit_and_closer_reentry_returns_to_line() {
        let mut c = tracking(Policy::Pso, Vec2::new(9.0, 0.0), Vec2::ZERO);
        c.state.mode = Mode::WallFollowing;
        c.state.corridor =
            CorridorTrack::begin(Vec2::new(0.0, 0.1), Vec2::new(9.0, 0.0), Vec2::ZERO, 0.2);
        // Leave the corridor…
        c.step(&obs(Vec2::new(0.5, 0.5), CLEAR), &SwarmShared::default());
        assert_eq!(c.state.mode, Mode::WallFollowing);
        // …wander outside…
        c.step(&obs(Vec2::new(2.0, 0.6), CLEAR), &SwarmShared::default());
        assert_eq!(c.state.mode, Mode::WallFollowing);
        // …re-enter closer to the goal: obstacle avoided, back on the line.
        c.step(&obs(Vec2::new(4.0, 0.1), CLEAR), &SwarmShared::default());
        assert_eq!(c.state.mode, Mode::LineFollowing);
    }

    #[test]
    fn reentry_farther_from_goal_keeps_wall_following() {
        let mut c = tracking(Policy::Pso, Vec2::new(9.0, 0.0), Vec2::ZERO);
        c.state.mode = Mode::WallFollowing;
        c.state.corridor =
            CorridorTrack::begin(Vec2::new(5.0, 0.1), Vec2::new(9.0, 0.0), Vec2::ZERO, 0.2);
        c.step(&obs(Vec2::new(4.0, 0.5), CLEAR), &SwarmShared::default());
        c.step(&obs(Vec2::new(1.0, 0.1), CLEAR), &SwarmShared::default());
        assert_eq!(c.state.mode, Mode::WallFollowing);
    }

    #[test]
    fn close_neighbor_forces_avoidance_then_releases() {
        let mut g = Genome::manual();
        g.swarm_radius = 0.782;
        let mut c = tracking(Policy::Pso, Vec2::new(9.0, 0.0), Vec2::ZERO);
        c.genome = g;
        let mut o = obs(Vec2::new(1.0, 0.0), CLEAR);
        o.neighbors = vec![Vec2::new(0.5, 0.0)];
        let cmd = c.step(&o, &SwarmShared::default());
        assert_eq!(c.state.mode, Mode::AttractionRepulsion);
        assert!((cmd.norm() - 0.5).abs() < 1e-12, "constant speed in avoidance");
        let cmd2 = c.step(&obs(Vec2::new(1.0, 0.0), CLEAR), &SwarmShared::default());
        assert_eq!(c.state.mode, Mode::LineFollowing);
        assert!((cmd2 - Vec2::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn avoidance_laser_term_hand_case() {
        let mut g = Genome::manual();
        g.laser_gain = 16.167;
        g.laser_avoid = 0.594;
        g.swarm_radius = 0.782;
        let lasers = [0.3, 4.0, 4.0, 4.0];
        // Goal at the agent: attraction term vanishes, leaving the pure
        // laser repulsion 16.167·(0.594−0.3) along (−1, 0).
        let a = avoidance_vector(&[], lasers, Vec2::ZERO, &g, 0.5);
        assert!((a.x - (-16.167 * 0.294)).abs() < 1e-9, "{a:?}");
        assert!(a.y.abs() < 1e-12);
    }

    #[test]
    fn avoidance_without_stimuli_is_goal_attraction() {
        let g = Genome::manual();
        let cmd = attraction_repulsion_command(&[], CLEAR, Vec2::new(3.0, 4.0), &g, 0.5);
        assert!((cmd - Vec2::new(0.3, 0.4)).norm() < 1e-12);
    }

    #[test]
    fn neighbor_at_exactly_swarm_radius_contributes_nothing() {
        let mut g = Genome::manual();
        g.swarm_radius = 0.782;
        let a = avoidance_vector(&[Vec2::new(0.782, 0.0)], CLEAR, Vec2::ZERO, &g, 0.5);
        assert_eq!(a, Vec2::ZERO);
    }

    #[test]
    fn zero_field_falls_back_to_goal_attraction() {
        let mut g = Genome::manual();
        g.swarm_gain = 0.0;
        g.laser_gain = 0.0;
        // No stimuli and goal at the agent → zero field → zero fallback.
        let cmd = attraction_repulsion_command(&[Vec2::new(0.1, 0.0)], CLEAR, Vec2::ZERO, &g, 0.5);
        assert_eq!(cmd, Vec2::ZERO);
        // Opposing stimuli cancel; goal attraction decides.
        let cmd2 = attraction_repulsion_command(&[], CLEAR, Vec2::new(0.0, 2.0), &g, 0.5);
        assert!((cmd2 - Vec2::new(0.0, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn personal_best_updates_strictly_above_threshold() {
        let mut c = AgentController::new(0, Genome::manual(), Policy::Pso, cfg(), 1);
        c.observe_gas(Vec2::new(1.0, 1.0), 0.04); // below threshold
        assert!(c.state.personal_best.is_none());
        c.observe_gas(Vec2::new(2.0, 2.0), 0.10);
        assert_eq!(c.state.personal_best.unwrap().0, Vec2::new(2.0, 2.0));
        c.observe_gas(Vec2::new(3.0, 3.0), 0.10); // not strictly better
        assert_eq!(c.state.personal_best.unwrap().0, Vec2::new(2.0, 2.0));
        c.observe_gas(Vec2::new(4.0, 4.0), 0.11);
        assert_eq!(c.state.personal_best.unwrap().0, Vec2::new(4.0, 4.0));
    }

    #[test]
    fn swarm_event_regenerates_waypoint_for_pso_only() {
        let shared = SwarmShared { best: Some((Vec2::new(5.0, 5.0), 0.2)), event: true };
        let mut pso = tracking(Policy::Pso, Vec2::new(9.0, 0.0), Vec2::ZERO);
        let before = pso.state.iteration;
        pso.step(&obs(Vec2::new(1.0, 0.0), CLEAR), &shared);
        assert_eq!(pso.state.iteration, before + 1);

        let mut anemo = tracking(Policy::Anemotaxis, Vec2::new(9.0, 0.0), Vec2::ZERO);
        let before = anemo.state.iteration;
        anemo.step(&obs(Vec2::new(1.0, 0.0), CLEAR), &shared);
        assert_eq!(anemo.state.iteration, before);
    }

    #[test]
    fn replayed_observations_reproduce_mode_sequence() {
        use rand::Rng;
        let mut rng = crate::seeds::from_seed(99);
        let mut stream = Vec::new();
        for i in 0..400 {
            let pos = Vec2::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
            let lasers = [
                rng.gen_range(0.2..4.0),
                rng.gen_range(0.2..4.0),
                rng.gen_range(0.2..4.0),
                rng.gen_range(0.2..4.0),
            ];
            let mut o = obs(pos, lasers);
            o.t = i as f64 * 0.05;
            o.reading = rng.gen_range(0.0..0.2);
            if rng.gen_bool(0.3) {
                o.neighbors = vec![Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))];
            }
            stream.push(o);
        }
        let run = |stream: &[Observation]| -> Vec<Mode> {
            let mut c = AgentController::new(0, Genome::evolved(), Policy::Pso, cfg(), 7);
            let shared = SwarmShared::default();
            stream
                .iter()
                .map(|o| {
                    c.observe_gas(o.pos, o.reading);
                    c.step(o, &shared);
                    c.state.mode
                })
                .collect()
        };
        assert_eq!(run(&stream), run(&stream));
    }
}
