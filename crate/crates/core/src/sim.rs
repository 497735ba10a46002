//! Episode engine: point-mass agents with P-controlled velocity fly a
//! recorded environment bundle. Each control step feeds the agents their
//! laser, gas, neighbor, and wind observations, integrates the commanded
//! velocities, and applies the crash rules. Episodes are deterministic in
//! (bundle, genome, seed) and independent of each other, so evaluation
//! fans out across a thread pool and merges results in input order.

use crate::controller::{AgentController, ControllerConfig, Observation, Policy, SwarmShared};
use crate::env::bundle::EnvBundle;
use crate::genome::Genome;
use crate::geometry::{raycast, Ray, Vec2};
use crate::{seeds, Error, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    /// Control step (seconds).
    pub dt: f64,
    /// Episode duration (seconds).
    pub episode_len: f64,
    pub n_agents: usize,
    /// Commanded speed (m/s).
    pub v_desired: f64,
    /// Velocity P-controller gain (1/s).
    pub k_p: f64,
    /// A laser reading below this crashes the agent (meters).
    pub crash_laser: f64,
    /// Two agents closer than this both crash (meters).
    pub crash_agent: f64,
    /// Zero-mean Gaussian noise on neighbor relative positions (meters);
    /// zero disables the draw entirely.
    pub position_noise: f64,
    /// Gas readings above this count as a detection.
    pub detection_threshold: f64,
    /// Laser ranger saturation range (meters).
    pub laser_range: f64,
    /// A run succeeds when any agent gets this close to the source (m).
    pub success_radius: f64,
    /// Minimum pairwise distance between spawn positions (meters).
    pub spawn_separation: f64,
    /// Side of the square in which fresh exploration goals are drawn (m).
    pub r_rand: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            episode_len: 100.0,
            n_agents: 3,
            v_desired: 0.5,
            k_p: 3.0,
            crash_laser: 0.1,
            crash_agent: 0.5,
            position_noise: 0.0,
            detection_threshold: 0.05,
            laser_range: 4.0,
            success_radius: 1.5,
            spawn_separation: 1.0,
            r_rand: 10.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.episode_len > 0.0) {
            return Err(Error::Config("dt and episode length must be positive".into()));
        }
        if self.n_agents == 0 {
            return Err(Error::Config("need at least one agent".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrashCause {
    Wall,
    Agent,
}

impl std::fmt::Display for CrashCause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CrashCause::Wall => write!(f, "wall"),
            CrashCause::Agent => write!(f, "agent"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunMetrics {
    pub env_id: String,
    pub policy: Policy,
    pub seed: u64,
    /// Per agent: time-averaged distance to source plus 1.0 if crashed.
    pub costs: Vec<f64>,
    pub crashed: Vec<Option<CrashCause>>,
    /// Per agent: closest approach to the source over the whole episode.
    pub min_dist: Vec<f64>,
    /// First time any agent was within the success radius; episode length
    /// when none was.
    pub time_to_source: f64,
    pub success: bool,
    /// Per agent: positions at every control step (episode steps + 1).
    pub trajectories: Vec<Vec<Vec2>>,
    /// Per agent: every waypoint the controller committed to.
    pub waypoints: Vec<Vec<Vec2>>,
}

impl RunMetrics {
    pub fn mean_cost(&self) -> f64 {
        self.costs.iter().sum::<f64>() / self.costs.len() as f64
    }

    /// Time-averaged distance to source, averaged over agents, without the
    /// crash penalty.
    pub fn mean_distance(&self) -> f64 {
        let n = self.costs.len() as f64;
        self.costs
            .iter()
            .zip(&self.crashed)
            .map(|(c, cr)| c - if cr.is_some() { 1.0 } else { 0.0 })
            .sum::<f64>()
            / n
    }

    /// Order-sensitive digest of all trajectories; replay verification
    /// compares this against a recorded value.
    pub fn trajectory_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for traj in &self.trajectories {
            for p in traj {
                eat(p.x.to_bits());
                eat(p.y.to_bits());
            }
        }
        h
    }
}

/// Wall-crash rule: an agent crashes when any laser reads strictly below
/// the threshold. A reading exactly at the threshold is safe.
pub fn wall_crash(lasers: &[f64; 4], threshold: f64) -> bool {
    lasers.iter().any(|&l| l < threshold)
}

/// Pair-crash rule: two agents crash (both of them) when their separation
/// is strictly below the threshold. Exactly at the threshold is safe.
pub fn agent_crash(separation: f64, threshold: f64) -> bool {
    separation < threshold
}

fn measure_lasers(pos: Vec2, walls: &[crate::geometry::Segment], range: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (k, axis) in crate::controller::LASER_AXES.iter().enumerate() {
        out[k] = raycast(&Ray::new(pos, *axis, range), walls);
    }
    out
}

/// Draw spawn positions uniformly in the spawn region, rejecting draws
/// closer than the separation to an already placed agent. If a draw cannot
/// be placed after many tries the best candidate seen is used, so the
/// procedure always terminates deterministically.
fn spawn_positions<R: Rng>(
    region: crate::geometry::Rect,
    n: usize,
    separation: f64,
    rng: &mut R,
) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best = Vec2::ZERO;
        let mut best_gap = f64::NEG_INFINITY;
        for _ in 0..1000 {
            let p = Vec2::new(
                rng.gen_range(region.min.x..=region.max.x),
                rng.gen_range(region.min.y..=region.max.y),
            );
            let gap = out
                .iter()
                .map(|q| q.dist(p))
                .fold(f64::INFINITY, f64::min);
            if gap >= separation {
                best = p;
                break;
            }
            if gap > best_gap {
                best = p;
                best_gap = gap;
            }
        }
        out.push(best);
    }
    out
}

struct AgentBody {
    pos: Vec2,
    vel: Vec2,
    lasers: [f64; 4],
    crashed: Option<CrashCause>,
    controller: AgentController,
}

/// Run one episode. Deterministic in (bundle, policy, genome, seed, config).
pub fn run_episode(
    bundle: &EnvBundle,
    policy: Policy,
    genome: &Genome,
    seed: u64,
    cfg: &SimConfig,
) -> RunMetrics {
    let env = &bundle.env;
    let ctrl_cfg = ControllerConfig {
        v_desired: cfg.v_desired,
        r_rand: cfg.r_rand,
        detection_threshold: cfg.detection_threshold,
        arena: env.arena(),
    };
    let mut spawn_rng = seeds::stream(seed, &[seeds::D_SPAWN]);
    let spawns = spawn_positions(
        env.spawn_region,
        cfg.n_agents,
        cfg.spawn_separation,
        &mut spawn_rng,
    );
    let mut noise_rng = seeds::stream(seed, &[seeds::D_NOISE]);
    let mut agents: Vec<AgentBody> = spawns
        .iter()
        .enumerate()
        .map(|(id, &pos)| AgentBody {
            pos,
            vel: Vec2::ZERO,
            lasers: measure_lasers(pos, &env.walls, cfg.laser_range),
            crashed: None,
            controller: AgentController::new(id, *genome, policy, ctrl_cfg, seed),
        })
        .collect();
    let mut shared = SwarmShared::default();

    let n_steps = (cfg.episode_len / cfg.dt).round() as usize;
    let n = cfg.n_agents;
    let mut trajectories: Vec<Vec<Vec2>> = (0..n)
        .map(|i| {
            let mut v = Vec::with_capacity(n_steps + 1);
            v.push(agents[i].pos);
            v
        })
        .collect();
    let mut waypoints: Vec<Vec<Vec2>> = vec![Vec::new(); n];
    let mut dist_sum = vec![0.0; n];
    let mut min_dist: Vec<f64> = agents
        .iter()
        .map(|a| a.pos.dist(env.source_pos))
        .collect();
    let mut success = false;
    let mut time_to_source = cfg.episode_len;
    // The initial state counts for success ("within 100 s" includes t = 0).
    for a in &agents {
        if a.pos.dist(env.source_pos) <= cfg.success_radius {
            success = true;
            time_to_source = 0.0;
        }
    }

    for step in 0..n_steps {
        let t = step as f64 * cfg.dt;
        // Observations for live agents (crashed agents are invisible).
        let mut observations: Vec<Option<Observation>> = Vec::with_capacity(n);
        for i in 0..n {
            if agents[i].crashed.is_some() {
                observations.push(None);
                continue;
            }
            let pos = agents[i].pos;
            let mut neighbors = Vec::new();
            for (j, other) in agents.iter().enumerate() {
                if j == i || other.crashed.is_some() {
                    continue;
                }
                let mut rel = other.pos - pos;
                if cfg.position_noise > 0.0 {
                    let (a, b) = gauss_pair(&mut noise_rng);
                    rel = rel + Vec2::new(a, b) * cfg.position_noise;
                }
                neighbors.push(rel);
            }
            observations.push(Some(Observation {
                t,
                pos,
                lasers: agents[i].lasers,
                reading: bundle.gas.sample(pos, t),
                neighbors,
                wind: bundle.flow.velocity_at(pos),
            }));
        }
        // Gas bookkeeping before anyone moves: personal bests, then the
        // swarm best (an improvement triggers waypoint regeneration).
        for i in 0..n {
            if let Some(obs) = &observations[i] {
                agents[i].controller.observe_gas(obs.pos, obs.reading);
            }
        }
        let prev_best = shared.best.map(|(_, v)| v);
        let mut best: Option<(Vec2, f64)> = None;
        for a in agents.iter() {
            if a.crashed.is_some() {
                continue;
            }
            if let Some((p, v)) = a.controller.state.personal_best {
                if best.map_or(true, |(_, bv)| v > bv) {
                    best = Some((p, v));
                }
            }
        }
        shared.event = match (best, prev_best) {
            (Some((_, v)), Some(pv)) => v > pv,
            (Some(_), None) => true,
            _ => false,
        };
        shared.best = best;

        // Control, then physics.
        let mut commands = vec![Vec2::ZERO; n];
        for i in 0..n {
            if let Some(obs) = &observations[i] {
                let before = agents[i].controller.state.iteration;
                commands[i] = agents[i].controller.step(obs, &shared);
                if agents[i].controller.state.iteration != before {
                    if let Some(goal) = agents[i].controller.state.goal {
                        waypoints[i].push(goal);
                    }
                }
            }
        }
        for i in 0..n {
            if agents[i].crashed.is_none() {
                let a = &mut agents[i];
                a.vel = a.vel + (commands[i] - a.vel) * (cfg.k_p * cfg.dt);
                a.pos = a.pos + a.vel * cfg.dt;
                a.lasers = measure_lasers(a.pos, &env.walls, cfg.laser_range);
            }
        }
        // Crash rules: lasers first, then pairwise proximity of live agents.
        for a in agents.iter_mut() {
            if a.crashed.is_none() && wall_crash(&a.lasers, cfg.crash_laser) {
                a.crashed = Some(CrashCause::Wall);
                a.vel = Vec2::ZERO;
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if agents[i].crashed.is_none()
                    && agents[j].crashed.is_none()
                    && agent_crash(agents[i].pos.dist(agents[j].pos), cfg.crash_agent)
                {
                    agents[i].crashed = Some(CrashCause::Agent);
                    agents[j].crashed = Some(CrashCause::Agent);
                    agents[i].vel = Vec2::ZERO;
                    agents[j].vel = Vec2::ZERO;
                }
            }
        }
        // Record the post-step state.
        let state_t = (step + 1) as f64 * cfg.dt;
        for i in 0..n {
            let d = agents[i].pos.dist(env.source_pos);
            dist_sum[i] += d;
            if d < min_dist[i] {
                min_dist[i] = d;
            }
            trajectories[i].push(agents[i].pos);
            if !success && step + 1 < n_steps && d <= cfg.success_radius {
                success = true;
                time_to_source = state_t;
            }
        }
    }

    let costs: Vec<f64> = (0..n)
        .map(|i| {
            dist_sum[i] / n_steps as f64
                + if agents[i].crashed.is_some() { 1.0 } else { 0.0 }
        })
        .collect();
    RunMetrics {
        env_id: env.id.clone(),
        policy,
        seed,
        costs,
        crashed: agents.iter().map(|a| a.crashed).collect(),
        min_dist,
        time_to_source,
        success,
        trajectories,
        waypoints,
    }
}

fn gauss_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let theta: f64 = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
    let r = (-2.0 * u1.ln()).sqrt();
    (r * theta.cos(), r * theta.sin())
}

/// Mean episode cost of a genome over every (bundle, seed) pair. Episodes
/// run in parallel; results are reduced in input order.
pub fn evaluate_genome(
    genome: &Genome,
    policy: Policy,
    bundles: &[&EnvBundle],
    seeds: &[u64],
    cfg: &SimConfig,
) -> f64 {
    assert!(!bundles.is_empty() && !seeds.is_empty());
    let jobs: Vec<(usize, u64)> = (0..bundles.len())
        .flat_map(|b| seeds.iter().map(move |&s| (b, s)))
        .collect();
    let total: f64 = jobs
        .par_iter()
        .map(|&(b, s)| run_episode(bundles[b], policy, genome, s, cfg).mean_cost())
        .sum();
    total / jobs.len() as f64
}

/// Aggregate over a set of runs: the three headline numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    pub runs: usize,
    pub success_rate: f64,
    pub mean_distance: f64,
    pub mean_time: f64,
}

pub fn summarize(metrics: &[RunMetrics]) -> EvalSummary {
    let runs = metrics.len();
    let succ = metrics.iter().filter(|m| m.success).count();
    let dist = metrics.iter().map(RunMetrics::mean_distance).sum::<f64>() / runs as f64;
    let time = metrics.iter().map(|m| m.time_to_source).sum::<f64>() / runs as f64;
    EvalSummary {
        runs,
        success_rate: succ as f64 / runs as f64,
        mean_distance: dist,
        mean_time: time,
    }
}

/// One CSV row per agent per episode.
pub fn metrics_csv(metrics: &[RunMetrics]) -> String {
    let mut out = String::from(
        "env_id,policy,seed,agent,cost,crashed,cause,min_dist,time_to_source,success\n",
    );
    for m in metrics {
        for i in 0..m.costs.len() {
            let cause = match m.crashed[i] {
                Some(c) => c.to_string(),
                None => String::from("none"),
            };
            out.push_str(&format!(
                "{},{},{},{},{:.6},{},{},{:.6},{:.6},{}\n",
                m.env_id,
                m.policy,
                m.seed,
                i,
                m.costs[i],
                u8::from(m.crashed[i].is_some()),
                cause,
                m.min_dist[i],
                m.time_to_source,
                u8::from(m.success),
            ));
        }
    }
    out
}

/// Percentile-bootstrap confidence interval for a sample mean.
/// Returns (mean, lo, hi) at the given confidence level.
pub fn bootstrap_mean_ci(
    samples: &[f64],
    resamples: usize,
    confidence: f64,
    seed: u64,
) -> (f64, f64, f64) {
    assert!(!samples.is_empty());
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    if samples.len() == 1 {
        return (mean, mean, mean);
    }
    let mut rng = seeds::from_seed(seed);
    let mut means: Vec<f64> = (0..resamples.max(1))
        .map(|_| {
            let mut acc = 0.0;
            for _ in 0..samples.len() {
                acc += samples[rng.gen_range(0..samples.len())];
            }
            acc / samples.len() as f64
        })
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - confidence) / 2.0;
    let at = |q: f64| {
        let idx = ((means.len() - 1) as f64 * q).round() as usize;
        means[idx]
    };
    (mean, at(alpha), at(1.0 - alpha))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::env::flow::FlowField;
    use crate::env::gas::GasFieldSequence;
    use crate::env::Environment;
    use crate::geometry::Rect;

    /// 10x10 empty arena, source at the center, still air, no gas.
    pub(crate) fn empty_bundle() -> EnvBundle {
        let size = Vec2::new(10.0, 10.0);
        let env = Environment::empty_arena(
            size,
            Vec2::new(5.0, 5.0),
            Rect::new(Vec2::new(1.0, 1.0), Vec2::new(3.0, 3.0)),
        );
        EnvBundle {
            env,
            flow: FlowField::still(20, 20, 0.5),
            gas: GasFieldSequence {
                cell: 0.5,
                nx: 20,
                ny: 20,
                frame_interval: 1.0,
                frames: vec![vec![0.0; 400]; 5],
            },
        }
    }

    #[test]
    fn identical_inputs_give_identical_metrics() {
        let b = empty_bundle();
        let g = Genome::manual();
        let m1 = run_episode(&b, Policy::Pso, &g, 9, &SimConfig::default());
        let m2 = run_episode(&b, Policy::Pso, &g, 9, &SimConfig::default());
        assert_eq!(m1.costs, m2.costs);
        assert_eq!(m1.trajectory_hash(), m2.trajectory_hash());
        let m3 = run_episode(&b, Policy::Pso, &g, 10, &SimConfig::default());
        assert_ne!(m1.trajectory_hash(), m3.trajectory_hash());
    }

    #[test]
    fn spawns_respect_region_and_separation() {
        let b = empty_bundle();
        let g = Genome::manual();
        for seed in 0..10 {
            let m = run_episode(&b, Policy::Pso, &g, seed, &SimConfig::default());
            let starts: Vec<Vec2> = m.trajectories.iter().map(|t| t[0]).collect();
            for p in &starts {
                assert!(b.env.spawn_region.contains(*p));
            }
            for i in 0..starts.len() {
                for j in i + 1..starts.len() {
                    assert!(starts[i].dist(starts[j]) >= 1.0 - 1e-9);
                }
            }
        }
    }

    #[test]
    fn degenerate_genome_stays_finite_and_bounded() {
        let b = empty_bundle();
        let zeros = Genome::from_array([0.0; 13]);
        let m = run_episode(&b, Policy::Pso, &zeros, 3, &SimConfig::default());
        let diag = (200.0f64).sqrt();
        for &c in &m.costs {
            assert!(c.is_finite());
            assert!(c <= diag + 1.0 + 1e-9, "cost {c}");
        }
        for traj in &m.trajectories {
            assert!(traj.iter().all(|p| p.x.is_finite() && p.y.is_finite()));
        }
    }

    #[test]
    fn spawning_on_source_succeeds_immediately() {
        let size = Vec2::new(10.0, 10.0);
        let env = Environment::empty_arena(
            size,
            Vec2::new(2.0, 2.0),
            Rect::new(Vec2::new(1.0, 1.0), Vec2::new(3.0, 3.0)),
        );
        let b = EnvBundle {
            env,
            ..empty_bundle()
        };
        let m = run_episode(&b, Policy::Pso, &Genome::manual(), 1, &SimConfig::default());
        assert!(m.success);
        assert_eq!(m.time_to_source, 0.0);
    }

    #[test]
    fn success_and_time_are_consistent() {
        let b = empty_bundle();
        let g = Genome::manual();
        for seed in 0..20 {
            let m = run_episode(&b, Policy::Pso, &g, seed, &SimConfig::default());
            if m.success {
                assert!(m.time_to_source < 100.0);
            } else {
                assert_eq!(m.time_to_source, 100.0);
            }
            for i in 0..m.costs.len() {
                assert!(m.min_dist[i] <= m.trajectories[i][0].dist(b.env.source_pos) + 1e-12);
            }
        }
    }

    #[test]
    fn cost_recomputes_from_trajectories() {
        let b = empty_bundle();
        let m = run_episode(&b, Policy::Pso, &Genome::manual(), 5, &SimConfig::default());
        for i in 0..m.costs.len() {
            let steps = m.trajectories[i].len() - 1;
            let sum: f64 = m.trajectories[i][1..]
                .iter()
                .map(|p| p.dist(b.env.source_pos))
                .sum();
            let expect = sum / steps as f64
                + if m.crashed[i].is_some() { 1.0 } else { 0.0 };
            assert!((m.costs[i] - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn wall_crash_below_threshold_exactly() {
        // An agent commanded straight at a wall crashes when a laser drops
        // below the threshold, and the crash freezes it.
        let b = empty_bundle();
        let mut cfg = SimConfig::default();
        cfg.n_agents = 1;
        // Zero genome => lasers never steer it away reliably; instead drive
        // the check directly on the recorded trajectory: find the crash and
        // confirm the frozen tail.
        let m = run_episode(&b, Policy::Pso, &Genome::from_array([0.0; 13]), 17, &cfg);
        if let Some(crash_cause) = m.crashed[0] {
            let traj = &m.trajectories[0];
            let frozen = traj.last().unwrap();
            let first_frozen = traj.iter().position(|p| p == frozen).unwrap();
            assert!(traj[first_frozen..].iter().all(|p| p == frozen));
            assert_eq!(crash_cause, CrashCause::Wall);
        }
    }

    #[test]
    fn proximity_crash_takes_both_agents() {
        // Two agents spawned close with a genome that drives them together:
        // zero swarm radius removes the avoidance behavior entirely.
        let size = Vec2::new(10.0, 10.0);
        let env = Environment::empty_arena(
            size,
            Vec2::new(9.0, 9.0),
            Rect::new(Vec2::new(1.0, 1.0), Vec2::new(2.2, 2.2)),
        );
        let b = EnvBundle {
            env,
            ..empty_bundle()
        };
        let mut g = Genome::manual();
        g.swarm_radius = 0.0; // never forced apart
        g.wp_radius = 0.0;
        let mut cfg = SimConfig::default();
        cfg.n_agents = 2;
        cfg.spawn_separation = 0.9;
        // Agents in a 1.2 m box with goals drawn in the same 10 m square
        // collide in most seeds; assert the rule on any run that crashed.
        let mut saw_agent_crash = false;
        for seed in 0..30 {
            let m = run_episode(&b, Policy::Pso, &g, seed, &cfg);
            let flags: Vec<bool> = m.crashed.iter().map(Option::is_some).collect();
            if m.crashed.iter().any(|c| *c == Some(CrashCause::Agent)) {
                assert_eq!(flags, vec![true, true], "agent crash must take both");
                saw_agent_crash = true;
                break;
            }
        }
        assert!(saw_agent_crash, "no proximity crash in 30 seeds");
    }

    #[test]
    fn evaluate_genome_matches_single_run() {
        let b = empty_bundle();
        let g = Genome::manual();
        let cfg = SimConfig::default();
        let single = run_episode(&b, Policy::Pso, &g, 4, &cfg).mean_cost();
        let eval = evaluate_genome(&g, Policy::Pso, &[&b], &[4], &cfg);
        assert_eq!(single, eval);
        // Duplicated bundle list: same mean.
        let dup = evaluate_genome(&g, Policy::Pso, &[&b, &b], &[4], &cfg);
        assert!((dup - single).abs() < 1e-12);
    }

    #[test]
    fn summary_of_single_run_equals_run() {
        let b = empty_bundle();
        let m = run_episode(&b, Policy::Pso, &Genome::manual(), 2, &SimConfig::default());
        let s = summarize(std::slice::from_ref(&m));
        assert_eq!(s.runs, 1);
        assert_eq!(s.success_rate, if m.success { 1.0 } else { 0.0 });
        assert!((s.mean_distance - m.mean_distance()).abs() < 1e-12);
        assert_eq!(s.mean_time, m.time_to_source);
    }

    #[test]
    fn csv_has_one_row_per_agent() {
        let b = empty_bundle();
        let m = run_episode(&b, Policy::Pso, &Genome::manual(), 2, &SimConfig::default());
        let csv = metrics_csv(std::slice::from_ref(&m));
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 1 + 3);
        assert!(lines[0].starts_with("env_id,"));
        assert!(lines[1].starts_with("empty,pso,2,0,"));
    }

    #[test]
    fn bootstrap_ci_brackets_the_mean() {
        let samples: Vec<f64> = (0..100).map(|i| (i % 7) as f64).collect();
        let (mean, lo, hi) = bootstrap_mean_ci(&samples, 500, 0.95, 1);
        assert!(lo <= mean && mean <= hi);
        let (m2, l2, h2) = bootstrap_mean_ci(&samples, 500, 0.95, 1);
        assert_eq!((mean, lo, hi), (m2, l2, h2));
        let tight = bootstrap_mean_ci(&[3.0], 100, 0.95, 1);
        assert_eq!(tight, (3.0, 3.0, 3.0));
    }

    #[test]
    fn manual_genome_finds_center_source_often() {
        // Desk analog of the headline success-rate row: empty arena, gas
        // plume centered on the source, manual gains, 50 seeds.
        let mut b = empty_bundle();
        // Radial concentration peak at the source so seeking has signal.
        let (nx, ny, cell) = (b.gas.nx, b.gas.ny, b.gas.cell);
        let mut frame = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let p = Vec2::new((i as f64 + 0.5) * cell, (j as f64 + 0.5) * cell);
                let d = p.dist(b.env.source_pos);
                frame[j * nx + i] = 2.0 / (1.0 + d * d);
            }
        }
        b.gas.frames = vec![frame; 5];
        let g = Genome::manual();
        let cfg = SimConfig::default();
        let mut hits = 0;
        for seed in 0..50 {
            if run_episode(&b, Policy::Pso, &g, seed, &cfg).success {
                hits += 1;
            }
        }
        assert!(hits >= 45, "manual genome: {hits}/50 on the empty arena");
    }
}
