//! Deterministic social NPC simulation.
//!
//! Characters with traits, statuses and private value/goal/belief networks
//! pick social exchanges by volition scoring. A session runs one exchange at
//! a time through its stages, applies effects and trigger rules, and records
//! everything in a replayable event log.

pub mod dsl;
pub mod event;
pub mod exchange;
pub mod model;
pub mod projection;
pub mod replay;
pub mod scenarios;
pub mod session;
pub mod volition;
