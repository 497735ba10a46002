//! Variation operators for the genetic search: tournament selection,
//! exponential crossover, and bounded polynomial mutation.

use crate::genome::{Genome, GENOME_LEN, GENOME_RANGES};
use rand::Rng;

/// Pick the lowest-cost member of a tournament of `size` distinct
/// individuals drawn uniformly without replacement. Ties go to the
/// earlier-drawn entrant, so an all-equal cost vector selects uniformly,
/// while a size at or above the population is exact global-best selection.
pub fn tournament_select<R: Rng>(costs: &[f64], size: usize, rng: &mut R) -> usize {
    let n = costs.len();
    assert!(n > 0 && size >= 2, "tournament needs >= 2 entrants");
    let size = size.min(n);
    // Partial Fisher-Yates: the first `size` slots become the tournament.
    let mut pool: Vec<usize> = (0..n).collect();
    let mut winner = usize::MAX;
    for k in 0..size {
        let pick = rng.gen_range(k..n);
        pool.swap(k, pick);
        let cand = pool[k];
        if winner == usize::MAX || costs[cand] < costs[winner] {
            winner = cand;
        }
    }
    winner
}

/// Exponential crossover: starting at a random gene, copy genes from the
/// donor while successive uniform draws stay below `cr`, wrapping around;
/// the first gene always copies. Remaining genes keep the target's values,
/// so the donated genes form one contiguous (wrapped) block.
pub fn exponential_crossover<R: Rng>(
    target: &Genome,
    donor: &Genome,
    cr: f64,
    rng: &mut R,
) -> Genome {
    let mut child = target.to_array();
    let d = donor.to_array();
    let start = rng.gen_range(0..GENOME_LEN);
    let mut k = start;
    loop {
        child[k] = d[k];
        k = (k + 1) % GENOME_LEN;
        if k == start || !(rng.gen::<f64>() < cr) {
            break;
        }
    }
    Genome::from_array(child)
}

/// Bounded polynomial mutation (distribution index `eta`): each gene
/// independently mutates with probability `prob`; perturbations respect the
/// per-gene evolution ranges.
pub fn polynomial_mutation<R: Rng>(g: &Genome, prob: f64, eta: f64, rng: &mut R) -> Genome {
    let mut a = g.to_array();
    for (k, &(lo, hi)) in GENOME_RANGES.iter().enumerate() {
        if rng.gen::<f64>() < prob {
            a[k] = mutate_gene(a[k], lo, hi, eta, rng);
        }
    }
    Genome::from_array(a)
}

fn mutate_gene<R: Rng>(x: f64, lo: f64, hi: f64, eta: f64, rng: &mut R) -> f64 {
    let span = hi - lo;
    if span <= 0.0 {
        return x;
    }
    let x = x.clamp(lo, hi);
    let u: f64 = rng.gen();
    let d1 = (x - lo) / span;
    let d2 = (hi - x) / span;
    let pow = 1.0 / (eta + 1.0);
    let dq = if u < 0.5 {
        let b = 1.0 - d1;
        let val = 2.0 * u + (1.0 - 2.0 * u) * b.powf(eta + 1.0);
        val.powf(pow) - 1.0
    } else {
        let b = 1.0 - d2;
        let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * b.powf(eta + 1.0);
        1.0 - val.powf(pow)
    };
    (x + dq * span).clamp(lo, hi)
}
