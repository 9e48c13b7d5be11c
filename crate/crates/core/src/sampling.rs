//! Candidate generation for acquisition optimization.
//!
//! Two generators run side by side each iteration: a zone bandit that splits
//! the feasible interval into equal zones and samples each zone as many times
//! as its current reward, and a bounded random search whose interval can
//! contract when the bandit side wins. Rewards move between zones one unit at
//! a time, so their total is conserved.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dimension::Bounds;
use crate::error::{Error, Result};

/// Where a candidate came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateOrigin {
    /// Sampled from the given zone; all coordinates lie in that zone's
    /// interval.
    Bandit { zone: usize },
    /// Sampled from the random-search interval.
    Random,
}

/// A candidate point together with its acquisition score once computed.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub point: Vec<f64>,
    pub acq_value: Option<f64>,
    pub origin: CandidateOrigin,
}

/// Equal partition of the feasible interval with per-zone reward counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneState {
    edges: Vec<f64>,
    rewards: Vec<u32>,
}

impl ZoneState {
    /// `n_zones` equal zones over the bounds, each starting with
    /// `points_per_zone` rewards.
    pub fn new(n_zones: usize, points_per_zone: u32, bounds: Bounds) -> Result<Self> {
        if n_zones == 0 {
            return Err(Error::invalid("need at least one zone"));
        }
        let width = bounds.width() / n_zones as f64;
        let mut edges: Vec<f64> = (0..=n_zones)
            .map(|i| bounds.lower + i as f64 * width)
            .collect();
        edges[n_zones] = bounds.upper;
        Ok(ZoneState {
            edges,
            rewards: vec![points_per_zone; n_zones],
        })
    }

    pub fn n_zones(&self) -> usize {
        self.rewards.len()
    }

    pub fn rewards(&self) -> &[u32] {
        &self.rewards
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn total_reward(&self) -> u32 {
        self.rewards.iter().sum()
    }

    /// Moves one reward from `worst_zone` to `best_zone`. No change when the
    /// zones coincide or the losing zone is already at zero, which keeps the
    /// total conserved.
    pub fn update_rewards(&mut self, best_zone: usize, worst_zone: usize) {
        assert!(best_zone < self.rewards.len() && worst_zone < self.rewards.len());
        if best_zone == worst_zone || self.rewards[worst_zone] == 0 {
            return;
        }
        self.rewards[worst_zone] -= 1;
        self.rewards[best_zone] += 1;
    }
}

/// Contractible interval for the random-search generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSearchState {
    bounds: Bounds,
    lower: f64,
    upper: f64,
    shrink_lower: f64,
    shrink_upper: f64,
    n_random: usize,
}

impl RandomSearchState {
    pub fn new(
        bounds: Bounds,
        shrink_lower: f64,
        shrink_upper: f64,
        n_random: usize,
    ) -> Result<Self> {
        if !(shrink_lower >= 0.0 && shrink_upper >= 0.0) {
            return Err(Error::invalid("shrink amounts must be nonnegative"));
        }
        Ok(RandomSearchState {
            bounds,
            lower: bounds.lower,
            upper: bounds.upper,
            shrink_lower,
            shrink_upper,
            n_random,
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn n_random(&self) -> usize {
        self.n_random
    }

    /// Contracts the interval by the configured amounts when the bandit side
    /// won, provided the contracted interval stays valid. Returns whether a
    /// contraction was applied.
    pub fn shrink(&mut self, bandit_won: bool) -> bool {
        self.apply_shrink(bandit_won, self.shrink_lower, self.shrink_upper)
    }

    /// Like [`RandomSearchState::shrink`] but contracts only the side farther
    /// from the winning bandit point, so the interval keeps covering the
    /// region the bandit currently favors.
    pub fn shrink_adaptive(&mut self, bandit_won: bool, winner: &[f64]) -> bool {
        if winner.is_empty() {
            return self.shrink(bandit_won);
        }
        let mean = winner.iter().sum::<f64>() / winner.len() as f64;
        let mid = 0.5 * (self.lower + self.upper);
        let (lo, hi) = if mean <= mid {
            (0.0, self.shrink_upper)
        } else {
            (self.shrink_lower, 0.0)
        };
        self.apply_shrink(bandit_won, lo, hi)
    }

    fn apply_shrink(&mut self, bandit_won: bool, lo: f64, hi: f64) -> bool {
        if !bandit_won {
            return false;
        }
        let new_lower = self.lower + lo;
        let new_upper = self.upper - hi;
        if self.bounds.lower <= new_lower && new_lower < new_upper && new_upper <= self.bounds.upper
        {
            self.lower = new_lower;
            self.upper = new_upper;
            true
        } else {
            false
        }
    }
}

/// Samples each zone as many times as its reward; every coordinate of a
/// zone's points is drawn uniformly from that zone's interval.
pub fn sample_bandit<R: Rng>(zones: &ZoneState, d: usize, rng: &mut R) -> Vec<Candidate> {
    assert!(d >= 1, "points need at least one dimension");
    let mut out = Vec::with_capacity(zones.total_reward() as usize);
    for (zone, &reward) in zones.rewards().iter().enumerate() {
        let lo = zones.edges()[zone];
        let hi = zones.edges()[zone + 1];
        for _ in 0..reward {
            let point: Vec<f64> = (0..d).map(|_| rng.random_range(lo..hi)).collect();
            out.push(Candidate {
                point,
                acq_value: None,
                origin: CandidateOrigin::Bandit { zone },
            });
        }
    }
    out
}

/// Samples `n_random` points with every coordinate uniform on the current
/// random-search interval.
pub fn sample_random<R: Rng>(state: &RandomSearchState, d: usize, rng: &mut R) -> Vec<Candidate> {
    assert!(d >= 1, "points need at least one dimension");
    (0..state.n_random)
        .map(|_| Candidate {
            point: (0..d)
                .map(|_| rng.random_range(state.lower..state.upper))
                .collect(),
            acq_value: None,
            origin: CandidateOrigin::Random,
        })
        .collect()
}

/// Picks between the best bandit point and the best random point: the bandit
/// wins only on a strictly smaller score. Returns the point and whether the
/// bandit side won.
pub fn select_winner(
    best_bandit: (&[f64], f64),
    best_random: (&[f64], f64),
) -> (Vec<f64>, bool) {
    if best_bandit.1 < best_random.1 {
        (best_bandit.0.to_vec(), true)
    } else {
        (best_random.0.to_vec(), false)
    }
}
