//! Simulation engine for coupled agent/world mind-moment streams.
//!
//! An agent's configuration at each discrete tick is a [`model::Ceta`]: body
//! input, mental input, feeling tone, mental factors and action. Agents and
//! worlds are pluggable rules ([`dynamics::AgentRule`], [`dynamics::WorldRule`])
//! looked up by name, stepped together with explicit seeded randomness so
//! every run can be replayed bit for bit.

pub mod composition;
pub mod contemplative;
pub mod dynamics;
pub mod error;
pub mod memory;
pub mod metrics;
pub mod mindfulness;
pub mod model;
pub mod rng;
pub mod runner;
pub mod scenario;
pub mod session;
pub mod trace_csv;

pub use error::{Error, Result};
