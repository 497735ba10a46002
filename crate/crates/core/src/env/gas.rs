//! Filament-based gas dispersion.
//!
//! The source releases discrete filaments that ride the airflow with a
//! random-walk perturbation, widen as they age, and vanish when they reach
//! an outlet. Concentration frames are Gaussian splats of the live
//! filaments on a uniform grid, averaged over a fixed recording window and
//! replayed with zero-order hold in time and bilinear interpolation in
//! space.

use super::flow::{bilerp, FlowField};
use super::Environment;
use crate::geometry::{segments_intersect, Segment, Vec2};
use crate::{seeds, Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Filament {
    pub center: Vec2,
    pub age: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GasConfig {
    /// Filament width at birth (meters).
    pub sigma0: f64,
    /// Width growth time constant: sigma(age) = sigma0 * sqrt(1 + age/tau).
    pub tau: f64,
    /// Source strength range (filaments per second); the actual rate is
    /// drawn uniformly once per simulation.
    pub release_rate: (f64, f64),
    /// Mass per filament (arbitrary units).
    pub mass: f64,
    /// Advection time step (seconds).
    pub step: f64,
    /// Random-walk intensity (meters per sqrt second).
    pub noise: f64,
    /// Concentration grid cell size (meters).
    pub cell: f64,
    /// Time between recorded frames (seconds).
    pub frame_interval: f64,
    /// Total simulated time (seconds).
    pub duration: f64,
}

impl Default for GasConfig {
    fn default() -> Self {
        Self {
            sigma0: 0.1,
            tau: 20.0,
            release_rate: (5.0, 20.0),
            mass: 1.0,
            step: 0.1,
            // Strong enough lateral spread that the plume widens to room
            // scale within an episode instead of staying a thin ribbon.
            noise: 0.3,
            cell: 0.1,
            // Three-second recording windows smooth filament transients so
            // a sensed maximum reflects the local envelope, which a swarm
            // climbing toward the source can keep improving on.
            frame_interval: 3.0,
            duration: 100.0,
        }
    }
}

impl GasConfig {
    pub fn sigma(&self, age: f64) -> f64 {
        self.sigma0 * (1.0 + age / self.tau).sqrt()
    }
}

/// Stepwise filament simulation. `simulate_filaments` drives this to
/// produce a frame sequence; tests can drive it directly to watch mass
/// accounting at every step.
pub struct FilamentSim<'a> {
    env: &'a Environment,
    flow: &'a FlowField,
    pub cfg: GasConfig,
    rng: ChaCha8Rng,
    pub filaments: Vec<Filament>,
    /// Total mass released so far.
    pub released: f64,
    /// Total mass removed through outlets so far.
    pub removed: f64,
    /// Source strength drawn for this run (filaments per second).
    pub rate: f64,
    acc: f64,
    pub t: f64,
    nx: usize,
    ny: usize,
    /// Wall bounding boxes for fast movement checks.
    wall_bb: Vec<(Vec2, Vec2)>,
}

impl<'a> FilamentSim<'a> {
    pub fn new(
        env: &'a Environment,
        flow: &'a FlowField,
        cfg: GasConfig,
        seed: u64,
    ) -> Result<Self> {
        let (lo, hi) = cfg.release_rate;
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo {
            return Err(Error::Config(format!(
                "bad release rate range ({lo}, {hi})"
            )));
        }
        if !(cfg.step > 0.0) || !(cfg.cell > 0.0) || !(cfg.frame_interval > 0.0) {
            return Err(Error::Config("gas step sizes must be positive".to_string()));
        }
        let arena = env.arena();
        if !arena.contains(env.source_pos) || env.wall_distance(env.source_pos) < 1e-9 {
            return Err(Error::EnvGen(
                "gas source is not in free space".to_string(),
            ));
        }
        let mut rng = seeds::stream(seed, &[seeds::D_GAS]);
        let rate = rng.gen_range(lo..=hi);
        let nx = (env.size.x / cfg.cell).round() as usize;
        let ny = (env.size.y / cfg.cell).round() as usize;
        if nx == 0
            || ny == 0
            || (nx as f64 * cfg.cell - env.size.x).abs() > 1e-6
            || (ny as f64 * cfg.cell - env.size.y).abs() > 1e-6
        {
            return Err(Error::Config(format!(
                "gas cell {} does not tile a {}x{} arena",
                cfg.cell, env.size.x, env.size.y
            )));
        }
        let wall_bb = env
            .walls
            .iter()
            .map(|w| {
                (
                    Vec2::new(w.a.x.min(w.b.x), w.a.y.min(w.b.y)),
                    Vec2::new(w.a.x.max(w.b.x), w.a.y.max(w.b.y)),
                )
            })
            .collect();
        Ok(Self {
            env,
            flow,
            cfg,
            rng,
            filaments: Vec::new(),
            released: 0.0,
            removed: 0.0,
            rate,
            acc: 0.0,
            t: 0.0,
            nx,
            ny,
            wall_bb,
        })
    }

    pub fn live_mass(&self) -> f64 {
        self.filaments.iter().map(|f| f.mass).sum()
    }

    fn movement_blocked(&self, from: Vec2, to: Vec2) -> bool {
        let lo = Vec2::new(from.x.min(to.x), from.y.min(to.y));
        let hi = Vec2::new(from.x.max(to.x), from.y.max(to.y));
        let mv = Segment::new(from, to);
        self.env
            .walls
            .iter()
            .zip(&self.wall_bb)
            .any(|(w, bb)| {
                bb.0.x <= hi.x
                    && bb.1.x >= lo.x
                    && bb.0.y <= hi.y
                    && bb.1.y >= lo.y
                    && segments_intersect(&mv, w)
            })
    }

    /// Move as far toward `to` as walls allow: full move, else axis-aligned
    /// slide, else stay put.
    fn slide(&self, from: Vec2, to: Vec2) -> Vec2 {
        if !self.movement_blocked(from, to) {
            return to;
        }
        let x_only = Vec2::new(to.x, from.y);
        if (x_only - from).norm() > 1e-12 && !self.movement_blocked(from, x_only) {
            return x_only;
        }
        let y_only = Vec2::new(from.x, to.y);
        if (y_only - from).norm() > 1e-12 && !self.movement_blocked(from, y_only) {
            return y_only;
        }
        from
    }

    /// Advance one time step: release, advect with noise, age, and remove
    /// filaments that reached an outlet.
    pub fn step(&mut self) {
        let dt = self.cfg.step;
        self.acc += self.rate * dt;
        while self.acc >= 1.0 {
            self.filaments.push(Filament {
                center: self.env.source_pos,
                age: 0.0,
                mass: self.cfg.mass,
            });
            self.released += self.cfg.mass;
            self.acc -= 1.0;
        }
        let amp = self.cfg.noise * dt.sqrt();
        for k in 0..self.filaments.len() {
            let f = self.filaments[k];
            let vel = self.flow.velocity_at(f.center);
            // One polar draw yields an isotropic 2D unit-variance pair.
            let u1: f64 = 1.0 - self.rng.gen::<f64>();
            let theta: f64 = self.rng.gen::<f64>() * 2.0 * PI;
            let r = (-2.0 * u1.ln()).sqrt();
            let noise = Vec2::new(r * theta.cos(), r * theta.sin()) * amp;
            let target = f.center + vel * dt + noise;
            self.filaments[k].center = self.slide(f.center, target);
            self.filaments[k].age += dt;
        }
        let reach = self.cfg.cell;
        let outlets = &self.env.outlets;
        let mut removed = 0.0;
        self.filaments.retain(|f| {
            if outlets
                .iter()
                .any(|o| o.seg.distance_to_point(f.center) <= reach)
            {
                removed += f.mass;
                false
            } else {
                true
            }
        });
        self.removed += removed;
        self.t += dt;
    }

    /// Concentration grid of the current state: every live filament adds a
    /// Gaussian splat truncated at three widths.
    pub fn snapshot_grid(&self) -> Vec<f64> {
        let mut g = vec![0.0; self.nx * self.ny];
        self.splat_into(&mut g);
        g
    }

    /// Add the current state's splat field onto an existing grid.
    fn splat_into(&self, g: &mut [f64]) {
        let h = self.cfg.cell;
        let (nx, ny) = (self.nx, self.ny);
        for f in &self.filaments {
            let sigma = self.cfg.sigma(f.age);
            let r3 = 3.0 * sigma;
            let peak = f.mass / (2.0 * PI * sigma * sigma);
            let inv2s2 = 1.0 / (2.0 * sigma * sigma);
            let i_lo = (((f.center.x - r3) / h - 0.5).ceil().max(0.0)) as usize;
            let i_hi = ((f.center.x + r3) / h - 0.5).floor().min((nx - 1) as f64);
            let j_lo = (((f.center.y - r3) / h - 0.5).ceil().max(0.0)) as usize;
            let j_hi = ((f.center.y + r3) / h - 0.5).floor().min((ny - 1) as f64);
            if i_hi < 0.0 || j_hi < 0.0 {
                continue;
            }
            let (i_hi, j_hi) = (i_hi as usize, j_hi as usize);
            let r3sq = r3 * r3;
            for j in j_lo..=j_hi {
                let cy = (j as f64 + 0.5) * h;
                for i in i_lo..=i_hi {
                    let cx = (i as f64 + 0.5) * h;
                    let d2 = (cx - f.center.x).powi(2) + (cy - f.center.y).powi(2);
                    if d2 <= r3sq {
                        g[j * nx + i] += peak * (-d2 * inv2s2).exp();
                    }
                }
            }
        }
    }
}

/// Time series of concentration grids.
#[derive(Debug, Clone, PartialEq)]
pub struct GasFieldSequence {
    pub cell: f64,
    pub nx: usize,
    pub ny: usize,
    pub frame_interval: f64,
    pub frames: Vec<Vec<f64>>,
}

impl GasFieldSequence {
    /// Concentration at a point and time: zero-order hold across frames,
    /// bilinear between cell centers (clamped at the grid edge, so a corner
    /// query returns the corner cell's stored value).
    pub fn sample(&self, pos: Vec2, t: f64) -> f64 {
        if self.frames.is_empty() {
            return 0.0;
        }
        let k = if t <= 0.0 {
            0
        } else {
            ((t / self.frame_interval).floor() as usize).min(self.frames.len() - 1)
        };
        let h = self.cell;
        bilerp(
            &self.frames[k],
            self.nx,
            self.ny,
            pos.x / h - 0.5,
            pos.y / h - 0.5,
        )
    }
}

/// Concentration at `pos` and time `t` for a recorded sequence.
pub fn sample_concentration(seq: &GasFieldSequence, pos: Vec2, t: f64) -> f64 {
    seq.sample(pos, t)
}

/// Run the filament simulation for `cfg.duration`, recording one frame per
/// `cfg.frame_interval` (floor(duration / interval) frames total).
///
/// Frame k holds the *time-averaged* field over its interval, accumulated
/// from the state at every advection step inside the window. A gas sensor
/// integrates over its response time rather than reporting instants, and
/// the averaging keeps a briefly passing filament core from printing a
/// spike far above the local envelope into the record.
pub fn simulate_filaments(
    env: &Environment,
    flow: &FlowField,
    cfg: &GasConfig,
    seed: u64,
) -> Result<GasFieldSequence> {
    let mut sim = FilamentSim::new(env, flow, cfg.clone(), seed)?;
    let count = (cfg.duration / cfg.frame_interval).floor() as usize;
    let total_steps = (cfg.duration / cfg.step).round() as usize;
    let steps_per_frame = (cfg.frame_interval / cfg.step).round().max(1.0) as usize;
    let mut frames = Vec::with_capacity(count);
    let mut acc = vec![0.0; sim.nx * sim.ny];
    let mut acc_n = 0usize;
    for _ in 0..total_steps {
        sim.splat_into(&mut acc);
        acc_n += 1;
        if acc_n == steps_per_frame && frames.len() < count {
            let scale = 1.0 / acc_n as f64;
            frames.push(acc.iter().map(|&v| v * scale).collect());
            acc.fill(0.0);
            acc_n = 0;
        }
        sim.step();
    }
    // A short tail (duration not a whole number of windows, or a window
    // wider than the whole run) averages whatever states it saw.
    while frames.len() < count {
        if acc_n == 0 {
            sim.splat_into(&mut acc);
            acc_n = 1;
        }
        let scale = 1.0 / acc_n as f64;
        frames.push(acc.iter().map(|&v| v * scale).collect());
        acc.fill(0.0);
        acc_n = 0;
    }
    Ok(GasFieldSequence {
        cell: cfg.cell,
        nx: sim.nx,
        ny: sim.ny,
        frame_interval: cfg.frame_interval,
        frames,
    })
}
