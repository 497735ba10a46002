//! Difficulty-weighted environment scheduling.
//!
//! During evolution each generation trains on a subset of the available
//! environments. The scheduler can bias that subset toward environments the
//! population currently finds hard ("doping"): each environment's difficulty
//! is the mean of the last few recorded median costs on it, and environments
//! are drawn with probability proportional to difficulty. With doping off the
//! draw is uniform.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// How many recent median costs contribute to an environment's difficulty.
pub const DIFFICULTY_WINDOW: usize = 3;

/// Rolling per-environment record of recent median population costs.
///
/// Environments are addressed by their index in the fixed training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyLedger {
    histories: Vec<Vec<f64>>,
}

impl DifficultyLedger {
    /// An empty ledger for `n_envs` environments.
    pub fn new(n_envs: usize) -> Self {
        DifficultyLedger {
            histories: vec![Vec::new(); n_envs],
        }
    }

    /// Number of environments tracked.
    pub fn n_envs(&self) -> usize {
        self.histories.len()
    }

    /// Record the median population cost observed on environment `env`,
    /// keeping only the most recent [`DIFFICULTY_WINDOW`] entries.
    pub fn record(&mut self, env: usize, median_cost: f64) {
        let h = &mut self.histories[env];
        h.push(median_cost);
        if h.len() > DIFFICULTY_WINDOW {
            h.remove(0);
        }
    }

    /// The stored median costs for `env`, oldest first.
    pub fn history(&self, env: usize) -> &[f64] {
        &self.histories[env]
    }

    /// Current difficulty of every environment.
    ///
    /// An environment with history scores the mean of its stored medians.
    /// One without history scores the mean difficulty of the environments
    /// that do have history, so unseen environments are neither favoured
    /// nor starved. If nothing has been recorded anywhere, all difficulties
    /// are equal (1.0), which normalizes to a uniform draw.
    pub fn difficulties(&self) -> Vec<f64> {
        let known: Vec<(usize, f64)> = self
            .histories
            .iter()
            .enumerate()
            .filter(|(_, h)| !h.is_empty())
            .map(|(i, h)| (i, h.iter().sum::<f64>() / h.len() as f64))
            .collect();
        if known.is_empty() {
            return vec![1.0; self.histories.len()];
        }
        let fallback = known.iter().map(|&(_, d)| d).sum::<f64>() / known.len() as f64;
        let mut out = vec![fallback; self.histories.len()];
        for &(i, d) in &known {
            out[i] = d;
        }
        out
    }
}

/// Median of a non-empty slice; an even count averages the two middle values.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN in median input"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Per-environment selection probabilities.
///
/// With `doping` the distribution is difficulty-proportional:
/// `P(i) = D(i) / sum_k D(k)`. Without it (or when every difficulty is
/// zero, where the ratio is undefined) the distribution is uniform.
pub fn doping_probabilities(ledger: &DifficultyLedger, doping: bool) -> Vec<f64> {
    let m = ledger.n_envs();
    assert!(m > 0, "no environments to schedule");
    let uniform = vec![1.0 / m as f64; m];
    if !doping {
        return uniform;
    }
    let d = ledger.difficulties();
    let total: f64 = d.iter().sum();
    if total <= 0.0 {
        return uniform;
    }
    d.into_iter().map(|x| x / total).collect()
}

/// Draw `count` distinct environment indices.
///
/// Picks are sequential without replacement: each pick is proportional to
/// the remaining (unchosen) probability mass. If the remaining mass is zero
/// the pick is uniform over the unchosen indices.
pub fn select_environments<R: Rng>(probs: &[f64], count: usize, rng: &mut R) -> Vec<usize> {
    assert!(
        count <= probs.len(),
        "cannot select {count} of {} environments",
        probs.len()
    );
    let mut chosen = vec![false; probs.len()];
    let mut picks = Vec::with_capacity(count);
    for _ in 0..count {
        let remaining: Vec<usize> = (0..probs.len()).filter(|&i| !chosen[i]).collect();
        let total: f64 = remaining.iter().map(|&i| probs[i]).sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut cum = 0.0;
            let mut hit = *remaining.last().expect("remaining is non-empty");
            for &i in &remaining {
                cum += probs[i];
                if target < cum {
                    hit = i;
                    break;
                }
            }
            hit
        } else {
            remaining[rng.gen_range(0..remaining.len())]
        };
        chosen[pick] = true;
        picks.push(pick);
    }
    picks
}
