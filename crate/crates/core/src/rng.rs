//! Seeded randomness threaded explicitly through every transition.
//!
//! Each tick hands the agent, the world's percept, the world transition and
//! the run-level meta operators their own stream derived from
//! `(seed, tick, party)`. Draws of one party never shift another's, so the
//! order in which a step evaluates its parts cannot change the result.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Consumer of a per-tick randomness stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    Agent,
    Percept,
    World,
    Meta,
}

impl Party {
    fn tag(self) -> u64 {
        match self {
            Party::Agent => 1,
            Party::Percept => 2,
            Party::World => 3,
            Party::Meta => 4,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct RandomnessSource {
    seed: u64,
    draws: u64,
    rng: ChaCha8Rng,
}

impl PartialEq for RandomnessSource {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed && self.draws == other.draws
    }
}

impl RandomnessSource {
    pub fn new(seed: u64) -> Self {
        RandomnessSource {
            seed,
            draws: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for one party at one tick of a run seeded with `seed`.
    pub fn derive(seed: u64, tick: i64, party: Party) -> Self {
        let mixed = splitmix64(seed ^ splitmix64(tick as u64 ^ splitmix64(party.tag())));
        RandomnessSource::new(mixed)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn fork(&self, tick: i64, party: Party) -> Self {
        RandomnessSource::derive(self.seed, tick, party)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        self.rng.gen::<f64>()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform index in `0..n`; `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index over empty range");
        self.draws += 1;
        self.rng.gen_range(0..n)
    }

    /// Index drawn proportionally to `weights`, by inverse CDF over one
    /// uniform draw. Returns `None` when the total weight is not positive.
    pub fn weighted(&mut self, weights: &[f64]) -> Option<usize> {
        let u = self.uniform();
        pick_weighted(weights, u)
    }
}

/// Inverse-CDF selection for a given uniform draw `u ∈ [0,1)`.
pub fn pick_weighted(weights: &[f64], u: f64) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let target = u * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return Some(i);
        }
    }
    weights.iter().rposition(|w| *w > 0.0)
}
