//! Test environments: procedurally generated floor plans (or imported
//! occupancy rasters) with a gas source, an agent spawn region, and inlet /
//! outlet vents on the outer boundary that drive the airflow solve.

pub mod bundle;
pub mod floorplan;
pub mod flow;
pub mod gas;
pub mod occupancy;

use crate::geometry::{Rect, Segment, Vec2};
use crate::{seeds, Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Ventilation opening on the outer boundary: a span of wall through which
/// air enters (inlet) or leaves (outlet) at `speed` m/s along the inward
/// unit `normal` (inlets blow along `normal`, outlets suck against it).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpan {
    pub seg: Segment,
    pub normal: Vec2,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub id: String,
    /// Arena extent in meters; the arena occupies [0,size.x] x [0,size.y].
    pub size: Vec2,
    /// Every wall segment, outer boundary included. Lasers and filament
    /// motion treat vent spans as solid wall; only the flow solve opens them.
    pub walls: Vec<Segment>,
    pub inlets: Vec<BoundarySpan>,
    pub outlets: Vec<BoundarySpan>,
    pub source_pos: Vec2,
    pub spawn_region: Rect,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvConfig {
    pub width: f64,
    pub height: f64,
    pub room_count: usize,
    pub door_width: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            width: 10.0,
            height: 10.0,
            room_count: 4,
            door_width: 1.0,
        }
    }
}

/// Vent spans are at least this long (meters).
const VENT_MIN_LEN: f64 = 1.0;
/// ... and at most this long.
const VENT_MAX_LEN: f64 = 2.5;
/// Clearance between a vent span and wall corners / junctions.
const VENT_MARGIN: f64 = 0.3;
/// Inlet air speed (m/s): a gentle indoor draft. Outlet speed is rebalanced
/// by the flow solve. Stronger drafts sweep filaments out in a thin ribbon
/// that agents rarely cross; at this speed the plume fills a usable fraction
/// of the arena while still giving anemotaxis a direction to follow.
pub const INLET_SPEED: f64 = 0.3;
/// Gas source keeps at least this distance from any wall.
const SOURCE_CLEARANCE: f64 = 0.4;
/// Spawn region: room rectangle inset by this margin.
const SPAWN_INSET: f64 = 0.5;
/// Spawn regions are capped at this side length; a larger room contributes
/// a randomly placed window instead, so the swarm always starts clustered
/// and the source constraint stays satisfiable even in a one-room arena.
const SPAWN_MAX_SIDE: f64 = 4.0;
/// Minimum distance between the source and the spawn region, so episodes
/// never start already at the source.
const SOURCE_SPAWN_GAP: f64 = 2.0;
/// Grid cell size for the reachability check.
const PATH_CELL: f64 = 0.1;
/// Walls are inflated by this much in the reachability check, approximating
/// the space an agent body needs.
const PATH_CLEARANCE: f64 = 0.2;

impl Environment {
    pub fn arena(&self) -> Rect {
        Rect::new(Vec2::ZERO, self.size)
    }

    /// Rectangular arena with only the four boundary walls, the source at
    /// `source`, and the spawn region at `spawn`. No vents.
    pub fn empty_arena(size: Vec2, source: Vec2, spawn: Rect) -> Self {
        Self {
            id: "empty".to_string(),
            size,
            walls: boundary_walls(size),
            inlets: Vec::new(),
            outlets: Vec::new(),
            source_pos: source,
            spawn_region: spawn,
            seed: 0,
        }
    }

    /// Distance from `p` to the nearest wall segment.
    pub fn wall_distance(&self, p: Vec2) -> f64 {
        self.walls
            .iter()
            .map(|w| w.distance_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn boundary_walls(size: Vec2) -> Vec<Segment> {
    let (w, h) = (size.x, size.y);
    vec![
        Segment::new(Vec2::ZERO, Vec2::new(w, 0.0)),
        Segment::new(Vec2::new(w, 0.0), Vec2::new(w, h)),
        Segment::new(Vec2::new(w, h), Vec2::new(0.0, h)),
        Segment::new(Vec2::new(0.0, h), Vec2::ZERO),
    ]
}

/// Generate a complete environment from a seed: floor plan, vents, source,
/// and spawn region, validated so that a clearance-respecting path exists
/// from the spawn region to the source. Deterministic in `(seed, config)`.
pub fn generate_environment(seed: u64, config: &EnvConfig) -> Result<Environment> {
    if config.width < 4.0 || config.height < 4.0 {
        return Err(Error::EnvGen(format!(
            "arena must be at least 4 m per side, got {}x{}",
            config.width, config.height
        )));
    }
    if !(config.width.is_finite() && config.height.is_finite()) {
        return Err(Error::EnvGen("arena size must be finite".to_string()));
    }
    let mut last_err = String::new();
    // Bounded deterministic retries: each attempt draws from its own derived
    // stream, so success on attempt k is reproducible regardless of how many
    // attempts earlier seeds needed.
    for attempt in 0..50u64 {
        let mut rng = seeds::stream(seed, &[seeds::D_ENV, attempt]);
        match try_generate(seed, config, &mut rng) {
            Ok(env) => return Ok(env),
            Err(e) => last_err = e.to_string(),
        }
    }
    Err(Error::EnvGen(format!(
        "no valid layout for seed {seed} after 50 attempts: {last_err}"
    )))
}

fn try_generate<R: Rng>(seed: u64, config: &EnvConfig, rng: &mut R) -> Result<Environment> {
    let size = Vec2::new(config.width, config.height);
    let arena = Rect::new(Vec2::ZERO, size);
    let plan = floorplan::build(arena, config.room_count, config.door_width, rng)
        .map_err(Error::EnvGen)?;
    let mut walls = boundary_walls(size);
    walls.extend(plan.walls.iter().copied());

    let (inlets, outlets) = place_vents(size, &walls, rng)?;

    // Spawn region: a random room, inset for wall clearance, with each side
    // capped so the swarm starts clustered (a window placed uniformly inside
    // rooms larger than the cap).
    let room = plan.rooms[rng.gen_range(0..plan.rooms.len())];
    let mut spawn_region = room.inset(SPAWN_INSET);
    if spawn_region.is_empty() || spawn_region.width() < 1.2 || spawn_region.height() < 1.2 {
        return Err(Error::EnvGen("spawn room too small".to_string()));
    }
    if spawn_region.width() > SPAWN_MAX_SIDE {
        let x0 = spawn_region.min.x
            + rng.gen_range(0.0..=spawn_region.width() - SPAWN_MAX_SIDE);
        spawn_region.min.x = x0;
        spawn_region.max.x = x0 + SPAWN_MAX_SIDE;
    }
    if spawn_region.height() > SPAWN_MAX_SIDE {
        let y0 = spawn_region.min.y
            + rng.gen_range(0.0..=spawn_region.height() - SPAWN_MAX_SIDE);
        spawn_region.min.y = y0;
        spawn_region.max.y = y0 + SPAWN_MAX_SIDE;
    }

    // Source: uniform free position with wall clearance, away from the spawn
    // region so runs never begin on top of the source.
    let mut source_pos = None;
    for _ in 0..200 {
        let p = Vec2::new(
            rng.gen_range(SOURCE_CLEARANCE..size.x - SOURCE_CLEARANCE),
            rng.gen_range(SOURCE_CLEARANCE..size.y - SOURCE_CLEARANCE),
        );
        let clear = walls
            .iter()
            .map(|w| w.distance_to_point(p))
            .fold(f64::INFINITY, f64::min);
        if clear >= SOURCE_CLEARANCE && spawn_region.clamp_point(p).dist(p) >= SOURCE_SPAWN_GAP {
            source_pos = Some(p);
            break;
        }
    }
    let source_pos =
        source_pos.ok_or_else(|| Error::EnvGen("no clear source position".to_string()))?;

    let env = Environment {
        id: format!("env-{seed:016x}"),
        size,
        walls,
        inlets,
        outlets,
        source_pos,
        spawn_region,
        seed,
    };
    validate_reachability(&env)?;
    Ok(env)
}

/// Sides of the arena, indexed 0..4: bottom, right, top, left.
fn side_geometry(size: Vec2, side: usize) -> (Vec2, Vec2, Vec2) {
    // (start corner, along-direction, inward normal)
    match side {
        0 => (Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)),
        1 => (Vec2::new(size.x, 0.0), Vec2::new(0.0, 1.0), Vec2::new(-1.0, 0.0)),
        2 => (Vec2::new(0.0, size.y), Vec2::new(1.0, 0.0), Vec2::new(0.0, -1.0)),
        _ => (Vec2::ZERO, Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0)),
    }
}

fn side_length(size: Vec2, side: usize) -> f64 {
    if side % 2 == 0 {
        size.x
    } else {
        size.y
    }
}

/// Place one inlet and one outlet span on two distinct boundary sides,
/// keeping clear of corners and of interior walls that meet the boundary.
fn place_vents<R: Rng>(
    size: Vec2,
    walls: &[Segment],
    rng: &mut R,
) -> Result<(Vec<BoundarySpan>, Vec<BoundarySpan>)> {
    let inlet_side = rng.gen_range(0..4usize);
    let mut outlet_side = rng.gen_range(0..3usize);
    if outlet_side >= inlet_side {
        outlet_side += 1;
    }
    let inlet = place_span(size, walls, inlet_side, INLET_SPEED, rng)?;
    let outlet = place_span(size, walls, outlet_side, INLET_SPEED, rng)?;
    Ok((vec![inlet], vec![outlet]))
}

fn place_span<R: Rng>(
    size: Vec2,
    walls: &[Segment],
    side: usize,
    speed: f64,
    rng: &mut R,
) -> Result<BoundarySpan> {
    let (corner, along, normal) = side_geometry(size, side);
    let len = side_length(size, side);
    if len - 2.0 * VENT_MARGIN < VENT_MIN_LEN {
        return Err(Error::EnvGen(format!(
            "side {side} of length {len} is too short for a vent span"
        )));
    }
    // Positions along the side where interior walls meet the boundary; the
    // span must keep VENT_MARGIN from these junctions and from the corners.
    let mut junctions = Vec::new();
    for w in walls {
        for p in [w.a, w.b] {
            let rel = p - corner;
            let off = rel.dot(along);
            if rel.dot(normal).abs() < 1e-9 && off > 1e-9 && off < len - 1e-9 {
                junctions.push(off);
            }
        }
    }
    for _ in 0..40 {
        let span_len = rng.gen_range(VENT_MIN_LEN..=VENT_MAX_LEN.min(len - 2.0 * VENT_MARGIN));
        let start = rng.gen_range(VENT_MARGIN..=len - VENT_MARGIN - span_len);
        let end = start + span_len;
        let blocked = junctions
            .iter()
            .any(|&j| j > start - VENT_MARGIN && j < end + VENT_MARGIN);
        if !blocked {
            return Ok(BoundarySpan {
                seg: Segment::new(corner + along * start, corner + along * end),
                normal,
                speed,
            });
        }
    }
    Err(Error::EnvGen(format!(
        "no clear vent span on side {side}"
    )))
}

/// Occupancy raster for path checks: `true` marks cells whose center is
/// within `clearance` of a wall (or outside the arena).
pub fn rasterize_occupancy(
    walls: &[Segment],
    size: Vec2,
    cell: f64,
    clearance: f64,
) -> (usize, usize, Vec<bool>) {
    let nx = (size.x / cell).round() as usize;
    let ny = (size.y / cell).round() as usize;
    let mut occ = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let c = Vec2::new((i as f64 + 0.5) * cell, (j as f64 + 0.5) * cell);
            let d = walls
                .iter()
                .map(|w| w.distance_to_point(c))
                .fold(f64::INFINITY, f64::min);
            if d < clearance {
                occ[j * nx + i] = true;
            }
        }
    }
    (nx, ny, occ)
}

/// Check that a grid path with agent clearance exists from every corner of
/// the spawn region (and its center) to the gas source.
pub fn validate_reachability(env: &Environment) -> Result<()> {
    let (nx, ny, occ) = rasterize_occupancy(&env.walls, env.size, PATH_CELL, PATH_CLEARANCE);
    let cell_of = |p: Vec2| -> Result<usize> {
        let i = (p.x / PATH_CELL) as usize;
        let j = (p.y / PATH_CELL) as usize;
        let (i, j) = (i.min(nx - 1), j.min(ny - 1));
        let idx = j * nx + i;
        if occ[idx] {
            return Err(Error::EnvGen(format!(
                "position ({:.2},{:.2}) has no agent clearance",
                p.x, p.y
            )));
        }
        Ok(idx)
    };
    let goal = cell_of(env.source_pos)?;
    // BFS over free cells from the source, then check spawn coverage.
    let mut seen = vec![false; nx * ny];
    let mut queue = std::collections::VecDeque::new();
    seen[goal] = true;
    queue.push_back(goal);
    while let Some(c) = queue.pop_front() {
        let (i, j) = (c % nx, c / nx);
        let mut push = |ii: usize, jj: usize| {
            let idx = jj * nx + ii;
            if !seen[idx] && !occ[idx] {
                seen[idx] = true;
                queue.push_back(idx);
            }
        };
        if i > 0 {
            push(i - 1, j);
        }
        if i + 1 < nx {
            push(i + 1, j);
        }
        if j > 0 {
            push(i, j - 1);
        }
        if j + 1 < ny {
            push(i, j + 1);
        }
    }
    let r = env.spawn_region;
    let probes = [
        r.center(),
        r.min,
        r.max,
        Vec2::new(r.min.x, r.max.y),
        Vec2::new(r.max.x, r.min.y),
    ];
    for p in probes {
        let idx = cell_of(p)?;
        if !seen[idx] {
            return Err(Error::EnvGen(format!(
                "no path from spawn point ({:.2},{:.2}) to source",
                p.x, p.y
            )));
        }
    }
    Ok(())
}

/// Add one inlet and one outlet to an environment that lacks them (e.g. one
/// imported from an occupancy raster). Spans are placed on the outer arena
/// boundary exactly as procedural generation does.
pub fn assign_vents(env: &mut Environment, seed: u64) -> Result<()> {
    let mut rng = seeds::stream(seed, &[seeds::D_VENT]);
    let (inlets, outlets) = place_vents(env.size, &env.walls, &mut rng)?;
    env.inlets = inlets;
    env.outlets = outlets;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let cfg = EnvConfig::default();
        let a = generate_environment(42, &cfg).unwrap();
        let b = generate_environment(42, &cfg).unwrap();
        assert_eq!(a, b);
        let c = generate_environment(43, &cfg).unwrap();
        assert_ne!(a.walls, c.walls);
    }

    #[test]
    fn id_embeds_seed() {
        let env = generate_environment(0xabcd, &EnvConfig::default()).unwrap();
        assert_eq!(env.id, "env-000000000000abcd");
    }

    #[test]
    fn vents_on_distinct_sides_with_corner_margin() {
        for seed in 0..15 {
            let env = generate_environment(seed, &EnvConfig::default()).unwrap();
            assert_eq!(env.inlets.len(), 1);
            assert_eq!(env.outlets.len(), 1);
            let side_of = |s: &BoundarySpan| -> usize {
                for side in 0..4 {
                    let (corner, _, normal) = side_geometry(env.size, side);
                    if (s.seg.a - corner).dot(normal).abs() < 1e-9 && s.normal == normal {
                        return side;
                    }
                }
                panic!("span not on any side");
            };
            let si = side_of(&env.inlets[0]);
            let so = side_of(&env.outlets[0]);
            assert_ne!(si, so);
            for s in [&env.inlets[0], &env.outlets[0]] {
                let l = s.seg.len();
                assert!((VENT_MIN_LEN..=VENT_MAX_LEN).contains(&l));
            }
            assert!((env.inlets[0].speed - INLET_SPEED).abs() < 1e-12);
        }
    }

    #[test]
    fn source_is_clear_of_walls_and_spawn() {
        for seed in 0..15 {
            let env = generate_environment(seed, &EnvConfig::default()).unwrap();
            assert!(env.wall_distance(env.source_pos) >= SOURCE_CLEARANCE - 1e-9);
            let gap = env.spawn_region.clamp_point(env.source_pos).dist(env.source_pos);
            assert!(gap >= SOURCE_SPAWN_GAP - 1e-9);
        }
    }

    #[test]
    fn tiny_arena_is_rejected() {
        let cfg = EnvConfig {
            width: 3.0,
            height: 3.0,
            ..EnvConfig::default()
        };
        assert!(generate_environment(1, &cfg).is_err());
    }

    #[test]
    fn impossible_room_count_is_rejected() {
        let cfg = EnvConfig {
            room_count: 50,
            ..EnvConfig::default()
        };
        let err = generate_environment(1, &cfg).unwrap_err();
        assert!(err.to_string().contains("rooms"));
    }

    #[test]
    fn reachability_rejects_walled_off_source() {
        // A wall straight across with no door separates source from spawn.
        let size = Vec2::new(10.0, 10.0);
        let mut walls = boundary_walls(size);
        walls.push(Segment::new(Vec2::new(5.0, 0.0), Vec2::new(5.0, 10.0)));
        let env = Environment {
            id: "t".into(),
            size,
            walls,
            inlets: vec![],
            outlets: vec![],
            source_pos: Vec2::new(8.0, 5.0),
            spawn_region: Rect::new(Vec2::new(1.0, 1.0), Vec2::new(3.0, 3.0)),
            seed: 0,
        };
        assert!(validate_reachability(&env).is_err());
        // With a door the path exists.
        let mut env2 = env.clone();
        env2.walls = boundary_walls(size);
        env2.walls.push(Segment::new(Vec2::new(5.0, 0.0), Vec2::new(5.0, 4.0)));
        env2.walls.push(Segment::new(Vec2::new(5.0, 5.2), Vec2::new(5.0, 10.0)));
        assert!(validate_reachability(&env2).is_ok());
    }
}
