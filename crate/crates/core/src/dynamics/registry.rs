//! Name-indexed registries of agent rules and worlds.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};

use super::agents::{ConstantRule, EchoRule, ObserverRule, ReactiveRule, ScriptRule, TableRule};
use super::worlds::{BanditWorld, GridWorld, GRID, REWARD_BANDIT};
use super::{AgentRule, Params, WorldSpec};

pub type AgentBuilder = fn(&Params, &BTreeSet<String>) -> Result<Arc<dyn AgentRule>>;
pub type WorldBuilder = fn(&Params) -> Result<WorldSpec>;

/// Accepted parameter keys; an entry ending in `*` matches any suffix.
fn accepts(keys: &[&str], key: &str) -> bool {
    keys.iter().any(|k| match k.strip_suffix('*') {
        Some(prefix) => key.starts_with(prefix) && key.len() > prefix.len(),
        None => *k == key,
    })
}

#[derive(Clone, Copy)]
pub struct AgentEntry {
    pub name: &'static str,
    pub keys: &'static [&'static str],
    pub build: AgentBuilder,
}

impl AgentEntry {
    pub fn accepts(&self, key: &str) -> bool {
        accepts(self.keys, key)
    }
}

#[derive(Clone, Copy)]
pub struct WorldEntry {
    pub name: &'static str,
    pub keys: &'static [&'static str],
    pub build: WorldBuilder,
}

impl WorldEntry {
    pub fn accepts(&self, key: &str) -> bool {
        accepts(self.keys, key)
    }
}

#[derive(Clone, Default)]
pub struct AgentRegistry {
    entries: BTreeMap<&'static str, AgentEntry>,
}

impl AgentRegistry {
    pub fn builtin() -> Self {
        let mut r = AgentRegistry::default();
        r.register(AgentEntry {
            name: ConstantRule::NAME,
            keys: &[],
            build: |_, _| Ok(Arc::new(ConstantRule)),
        });
        r.register(AgentEntry {
            name: ObserverRule::NAME,
            keys: &[],
            build: |_, _| Ok(Arc::new(ObserverRule)),
        });
        r.register(AgentEntry {
            name: EchoRule::NAME,
            keys: EchoRule::KEYS,
            build: |p, _| Ok(Arc::new(EchoRule::from_params(p)?)),
        });
        r.register(AgentEntry {
            name: ScriptRule::NAME,
            keys: ScriptRule::KEYS,
            build: |p, _| Ok(Arc::new(ScriptRule::from_params(p)?)),
        });
        r.register(AgentEntry {
            name: ReactiveRule::NAME,
            keys: ReactiveRule::KEYS,
            build: |p, actions| Ok(Arc::new(ReactiveRule::from_params(p, actions)?)),
        });
        r.register(AgentEntry {
            name: TableRule::NAME,
            keys: TableRule::KEYS,
            build: |p, _| Ok(Arc::new(TableRule::from_params(p)?)),
        });
        r
    }

    pub fn register(&mut self, entry: AgentEntry) {
        self.entries.insert(entry.name, entry);
    }

    pub fn get(&self, name: &str) -> Result<&AgentEntry> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::UnknownAgentRule(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().copied()
    }

    pub fn build(
        &self,
        name: &str,
        params: &Params,
        actions: &BTreeSet<String>,
    ) -> Result<Arc<dyn AgentRule>> {
        let entry = self.get(name)?;
        if let Some(k) = params.keys().find(|k| !entry.accepts(k)) {
            return Err(Error::InvalidParameter(format!(
                "rule `{name}` takes no `{k}`"
            )));
        }
        (entry.build)(params, actions)
    }
}

#[derive(Clone, Default)]
pub struct WorldRegistry {
    entries: BTreeMap<&'static str, WorldEntry>,
}

impl WorldRegistry {
    pub fn builtin() -> Self {
        let mut r = WorldRegistry::default();
        r.register(WorldEntry {
            name: GRID,
            keys: GridWorld::KEYS,
            build: |p| {
                let (rule, initial) = GridWorld::from_params(p)?;
                Ok(WorldSpec {
                    rule: Arc::new(rule),
                    initial,
                })
            },
        });
        r.register(WorldEntry {
            name: REWARD_BANDIT,
            keys: &["arm.*"],
            build: |p| {
                let (rule, initial) = BanditWorld::from_params(p)?;
                Ok(WorldSpec {
                    rule: Arc::new(rule),
                    initial,
                })
            },
        });
        r
    }

    pub fn register(&mut self, entry: WorldEntry) {
        self.entries.insert(entry.name, entry);
    }

    pub fn get(&self, kind: &str) -> Result<&WorldEntry> {
        self.entries
            .get(kind)
            .ok_or_else(|| Error::UnknownWorldKind(kind.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().copied()
    }

    pub fn build(&self, kind: &str, params: &Params) -> Result<WorldSpec> {
        let entry = self.get(kind)?;
        if let Some(k) = params.keys().find(|k| !entry.accepts(k)) {
            return Err(Error::InvalidParameter(format!(
                "world `{kind}` takes no `{k}`"
            )));
        }
        (entry.build)(params)
    }
}

/// One of the built-in worlds by kind name.
pub fn builtin_world(kind: &str, params: &Params) -> Result<WorldSpec> {
    WorldRegistry::builtin().build(kind, params)
}
