//! Cued-recall associative store.
//!
//! Each cue maps to a single target with a strength count. Once a cue has
//! been followed by its target often enough, presenting the cue alone can
//! recall the target, with a fixed reliability. Capacity is bounded and the
//! least recently used pair is evicted first.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomnessSource;

pub const DEFAULT_ACTIVATION: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Association {
    pub target: String,
    pub strength: u32,
    pub last_used: i64,
    /// Monotone use stamp; orders touches that share a tick.
    pub stamp: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryParams {
    pub capacity: usize,
    pub reliability: f64,
    pub activation: u32,
}

impl Default for MemoryParams {
    fn default() -> Self {
        MemoryParams {
            capacity: 64,
            reliability: 1.0,
            activation: DEFAULT_ACTIVATION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AssocMemory {
    pairs: BTreeMap<String, Association>,
    capacity: usize,
    /// Stored as bits so the store stays hashable.
    reliability_bits: u64,
    activation: u32,
    clock: u64,
}

impl Default for AssocMemory {
    fn default() -> Self {
        AssocMemory::new(MemoryParams::default()).expect("default params are valid")
    }
}

impl AssocMemory {
    pub fn new(params: MemoryParams) -> Result<Self> {
        if params.capacity == 0 {
            return Err(Error::InvalidParameter(
                "memory capacity must be ≥ 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&params.reliability) {
            return Err(Error::InvalidParameter(format!(
                "reliability {} not in [0,1]",
                params.reliability
            )));
        }
        if params.activation == 0 {
            return Err(Error::InvalidParameter(
                "activation threshold must be ≥ 1".into(),
            ));
        }
        Ok(AssocMemory {
            pairs: BTreeMap::new(),
            capacity: params.capacity,
            reliability_bits: params.reliability.to_bits(),
            activation: params.activation,
            clock: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn reliability(&self) -> f64 {
        f64::from_bits(self.reliability_bits)
    }

    pub fn activation(&self) -> u32 {
        self.activation
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, cue: &str) -> Option<&Association> {
        self.pairs.get(cue)
    }

    pub fn strength(&self, cue: &str, target: &str) -> u32 {
        self.pairs
            .get(cue)
            .filter(|a| a.target == target)
            .map_or(0, |a| a.strength)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &Association)> {
        self.pairs.iter().map(|(k, v)| (k.as_str(), v))
    }

    fn touch(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// Records that `cue` was followed by `target`. A cue followed by a new
    /// target starts over at strength 1.
    pub fn observe_pair(&mut self, cue: &str, target: &str, tick: i64) {
        if cue == target {
            return;
        }
        let stamp = self.touch();
        if let Some(a) = self.pairs.get_mut(cue) {
            if a.target == target {
                a.strength = a.strength.saturating_add(1);
            } else {
                a.target = target.to_string();
                a.strength = 1;
            }
            a.last_used = tick;
            a.stamp = stamp;
            return;
        }
        if self.pairs.len() >= self.capacity {
            self.evict_lru();
        }
        self.pairs.insert(
            cue.to_string(),
            Association {
                target: target.to_string(),
                strength: 1,
                last_used: tick,
                stamp,
            },
        );
    }

    fn evict_lru(&mut self) {
        if let Some(victim) = self
            .pairs
            .iter()
            .min_by_key(|(_, a)| a.stamp)
            .map(|(k, _)| k.clone())
        {
            self.pairs.remove(&victim);
        }
    }

    /// Presents `cue`. Only an activated pair consults the rng; a miss leaves
    /// the store untouched.
    pub fn recall(&mut self, cue: &str, rng: &mut RandomnessSource, tick: i64) -> Option<String> {
        let activation = self.activation;
        let reliability = self.reliability();
        let eligible = self
            .pairs
            .get(cue)
            .is_some_and(|a| a.strength >= activation);
        if !eligible || !rng.bernoulli(reliability) {
            return None;
        }
        let stamp = self.touch();
        let a = self.pairs.get_mut(cue).expect("checked above");
        a.last_used = tick;
        a.stamp = stamp;
        Some(a.target.clone())
    }
}
