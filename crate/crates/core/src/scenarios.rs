//! Scenarios shipped with the engine.

/// The Sabjorn and Ysolda house scene.
pub const HOUSE: &str = include_str!("../scenarios/house.social");
/// A player script for [`HOUSE`]: answers to the prompts it raises.
pub const HOUSE_SCRIPT: &str = include_str!("../scenarios/house.script");
/// An open sandbox over two locations.
pub const SANDBOX: &str = include_str!("../scenarios/sandbox.social");

/// Every built-in scenario as `(id, text)`.
pub const ALL: [(&str, &str); 2] = [("house", HOUSE), ("sandbox", SANDBOX)];

/// A built-in scenario by id.
pub fn builtin(id: &str) -> Option<&'static str> {
    ALL.iter().find(|(k, _)| *k == id).map(|(_, text)| *text)
}
