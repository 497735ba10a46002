//! The controller's tunable parameter vector ("genome"), its legal ranges,
//! the two reference presets, and the key=value preset-file format.

use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// All 13 controller parameters. Gains are dimensionless, distances metres,
/// the timeout seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    /// Inertia on the previous waypoint vector while seeking.
    pub seek_inertia: f64,
    /// Attraction toward the agent's own best-reading position.
    pub personal_gain: f64,
    /// Attraction toward the swarm's best-reading position.
    pub social_gain: f64,
    /// Inertia on the previous waypoint vector while exploring.
    pub explore_inertia: f64,
    /// Scale on the random-point attraction used while exploring.
    pub random_gain: f64,
    /// Seconds after which a waypoint is abandoned.
    pub wp_timeout: f64,
    /// Arrival radius that completes a waypoint.
    pub wp_radius: f64,
    /// Range reading below which the forward axis counts as blocked.
    pub laser_safe: f64,
    /// Neighbour distance that triggers inter-agent avoidance.
    pub swarm_radius: f64,
    /// Half-width of the corridor tracked while line-following.
    pub line_margin: f64,
    /// Gain on obstacle repulsion in the avoidance blend.
    pub laser_gain: f64,
    /// Gain on neighbour repulsion in the avoidance blend.
    pub swarm_gain: f64,
    /// Range reading below which a laser contributes repulsion.
    pub laser_avoid: f64,
}

pub const GENOME_LEN: usize = 13;

/// Preset-file keys, in canonical order.
pub const GENOME_KEYS: [&str; GENOME_LEN] = [
    "omega",
    "phi_p",
    "phi_g",
    "omega_prime",
    "r_r",
    "t_wp",
    "d_wp",
    "d_laser",
    "d_swarm",
    "d_line",
    "k_laser",
    "k_swarm",
    "d_laser_prime",
];

/// Legal (min, max) per parameter, same order as [`GENOME_KEYS`].
pub const GENOME_RANGES: [(f64, f64); GENOME_LEN] = [
    (-5.0, 5.0),  // omega
    (-5.0, 5.0),  // phi_p
    (-5.0, 5.0),  // phi_g
    (-5.0, 5.0),  // omega_prime
    (0.0, 5.0),   // r_r
    (0.0, 100.0), // t_wp
    (0.0, 5.0),   // d_wp
    (0.0, 5.0),   // d_laser
    (0.0, 5.0),   // d_swarm
    (0.0, 1.0),   // d_line
    (0.0, 20.0),  // k_laser
    (0.0, 20.0),  // k_swarm
    (0.0, 5.0),   // d_laser_prime
];

impl Genome {
    /// Hand-tuned baseline parameters.
    pub fn manual() -> Genome {
        Genome::from_array([
            0.5, 0.8, 2.0, 0.3, 0.7, 10.0, 0.5, 1.5, 1.5, 0.2, 5.0, 15.0, 1.5,
        ])
    }

    /// Reference evolved parameters (frozen; see README for provenance).
    pub fn evolved() -> Genome {
        Genome::from_array([
            0.271, -0.333, 1.856, 1.571, 2.034, 51.979, 2.690, 1.407, 0.782, 0.469, 16.167,
            10.032, 0.594,
        ])
    }

    pub fn to_array(&self) -> [f64; GENOME_LEN] {
        [
            self.seek_inertia,
            self.personal_gain,
            self.social_gain,
            self.explore_inertia,
            self.random_gain,
            self.wp_timeout,
            self.wp_radius,
            self.laser_safe,
            self.swarm_radius,
            self.line_margin,
            self.laser_gain,
            self.swarm_gain,
            self.laser_avoid,
        ]
    }

    pub fn from_array(a: [f64; GENOME_LEN]) -> Genome {
        Genome {
            seek_inertia: a[0],
            personal_gain: a[1],
            social_gain: a[2],
            explore_inertia: a[3],
            random_gain: a[4],
            wp_timeout: a[5],
            wp_radius: a[6],
            laser_safe: a[7],
            swarm_radius: a[8],
            line_margin: a[9],
            laser_gain: a[10],
            swarm_gain: a[11],
            laser_avoid: a[12],
        }
    }

    /// Uniform sample from the legal ranges.
    pub fn random<R: Rng>(rng: &mut R) -> Genome {
        let mut a = [0.0; GENOME_LEN];
        for (v, (lo, hi)) in a.iter_mut().zip(GENOME_RANGES) {
            *v = rng.gen_range(lo..=hi);
        }
        Genome::from_array(a)
    }

    /// Clamp every parameter into its legal range.
    pub fn clamped(&self) -> Genome {
        let mut a = self.to_array();
        for (v, (lo, hi)) in a.iter_mut().zip(GENOME_RANGES) {
            *v = v.clamp(lo, hi);
        }
        Genome::from_array(a)
    }

    pub fn in_range(&self) -> bool {
        self.to_array()
            .iter()
            .zip(GENOME_RANGES)
            .all(|(v, (lo, hi))| v.is_finite() && *v >= lo && *v <= hi)
    }

    /// Serialize as `key=value` lines in canonical order.
    pub fn to_preset_string(&self) -> String {
        let mut s = String::new();
        for (k, v) in GENOME_KEYS.iter().zip(self.to_array()) {
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    }

    /// Parse a preset: one `key=value` per line, `#` comments, all 13 keys
    /// required exactly once, values finite and within range.
    pub fn parse_preset(text: &str) -> Result<Genome> {
        let mut vals: [Option<f64>; GENOME_LEN] = [None; GENOME_LEN];
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, val) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("preset line {}: expected key=value, got {raw:?}", ln + 1)))?;
            let key = key.trim();
            let idx = GENOME_KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::Parse(format!("preset line {}: unknown key {key:?}", ln + 1)))?;
            if vals[idx].is_some() {
                return Err(Error::Parse(format!("preset line {}: duplicate key {key:?}", ln + 1)));
            }
            let v: f64 = val
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("preset line {}: bad number for {key:?}", ln + 1)))?;
            let (lo, hi) = GENOME_RANGES[idx];
            if !v.is_finite() || v < lo || v > hi {
                return Err(Error::Parse(format!(
                    "preset key {key:?}: value {v} outside legal range [{lo}, {hi}]"
                )));
            }
            vals[idx] = Some(v);
        }
        let mut a = [0.0; GENOME_LEN];
        for i in 0..GENOME_LEN {
            a[i] = vals[i]
                .ok_or_else(|| Error::Parse(format!("preset missing key {:?}", GENOME_KEYS[i])))?;
        }
        Ok(Genome::from_array(a))
    }

    pub fn save_preset(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_preset_string())?;
        Ok(())
    }

    pub fn load_preset(path: &std::path::Path) -> Result<Genome> {
        let text = std::fs::read_to_string(path)?;
        Genome::parse_preset(&text)
    }
}
