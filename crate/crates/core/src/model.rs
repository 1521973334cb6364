//! Social state store: characters, private network triples, public
//! relationships, statuses and the exchange history log.
//!
//! Every score mutation saturates at the network's declared range and is
//! journaled as a [`StateChange`] so the session can turn it into an event.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::ScenarioDoc;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CharacterId(String);

impl CharacterId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CharacterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CharacterId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

/// Which genders a character can be romantically interested in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Straight,
    Gay,
    Bisexual,
    Asexual,
}

impl Orientation {
    pub const SYMBOLS: &'static [&'static str] = &["straight", "gay", "bisexual", "asexual"];

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "straight" => Some(Self::Straight),
            "gay" => Some(Self::Gay),
            "bisexual" => Some(Self::Bisexual),
            "asexual" => Some(Self::Asexual),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Straight => "straight",
            Self::Gay => "gay",
            Self::Bisexual => "bisexual",
            Self::Asexual => "asexual",
        }
    }

    pub fn admits(self, own_gender: &str, other_gender: &str) -> bool {
        match self {
            Self::Straight => own_gender != other_gender,
            Self::Gay => own_gender == other_gender,
            Self::Bisexual => true,
            Self::Asexual => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Character {
    pub id: CharacterId,
    pub name: String,
    pub gender: String,
    pub race: String,
    pub orientation: Orientation,
    pub traits: BTreeSet<String>,
    pub likes: BTreeSet<String>,
    pub dislikes: BTreeSet<String>,
    pub location: String,
    pub player: bool,
}

/// Declared bounds and default of a network's scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScoreRange {
    pub min: i64,
    pub max: i64,
    pub default: i64,
}

impl ScoreRange {
    pub const STANDARD: ScoreRange = ScoreRange { min: 0, max: 100, default: 0 };

    pub fn clamp(&self, v: i64) -> i64 {
        v.clamp(self.min, self.max)
    }

    pub fn contains(&self, v: i64) -> bool {
        (self.min..=self.max).contains(&v)
    }
}

/// The three per-network maps every owner keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Value,
    Goal,
    Belief,
}

impl MapKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MapKind::Value => "value",
            MapKind::Goal => "goal",
            MapKind::Belief => "belief",
        }
    }
}

/// Value/Goal/Belief maps of one owner for one network.
///
/// `belief[y]` is the owner's estimate of `y`'s value toward the owner.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NetworkTriple {
    pub owner: CharacterId,
    pub network: String,
    pub value: BTreeMap<CharacterId, i64>,
    pub goal: BTreeMap<CharacterId, i64>,
    pub belief: BTreeMap<CharacterId, i64>,
}

impl NetworkTriple {
    fn map(&self, kind: MapKind) -> &BTreeMap<CharacterId, i64> {
        match kind {
            MapKind::Value => &self.value,
            MapKind::Goal => &self.goal,
            MapKind::Belief => &self.belief,
        }
    }

    fn map_mut(&mut self, kind: MapKind) -> &mut BTreeMap<CharacterId, i64> {
        match kind {
            MapKind::Value => &mut self.value,
            MapKind::Goal => &mut self.goal,
            MapKind::Belief => &mut self.belief,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StatusKind {
    pub symbol: String,
    pub targeted: bool,
    /// Ticks until expiry; 0 means permanent until removed.
    pub default_duration: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Remaining {
    Permanent,
    Ticks(u32),
}

impl Remaining {
    pub fn from_duration(d: u32) -> Self {
        if d == 0 {
            Remaining::Permanent
        } else {
            Remaining::Ticks(d)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StatusInstance {
    pub kind: String,
    pub target: Option<CharacterId>,
    pub remaining: Remaining,
}

/// A public, symmetric relationship between two characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Relationship {
    pub kind: String,
    pub pair: (CharacterId, CharacterId),
    pub active: bool,
}

/// How a responder (or the player) answered an exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Response {
    Accept,
    Neutral,
    Reject,
}

impl Response {
    pub const ALL: [Response; 3] = [Response::Accept, Response::Neutral, Response::Reject];

    pub fn as_str(self) -> &'static str {
        match self {
            Response::Accept => "Accept",
            Response::Neutral => "Neutral",
            Response::Reject => "Reject",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "Accept" => Some(Response::Accept),
            "Neutral" => Some(Response::Neutral),
            "Reject" => Some(Response::Reject),
            _ => None,
        }
    }
}

impl fmt::Display for Response {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome as recorded in the exchange history; `Error` marks aborted quests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Accept,
    Neutral,
    Reject,
    Error,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [Outcome::Accept, Outcome::Neutral, Outcome::Reject, Outcome::Error];

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Accept => "Accept",
            Outcome::Neutral => "Neutral",
            Outcome::Reject => "Reject",
            Outcome::Error => "Error",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Outcome::ALL.into_iter().find(|o| o.as_str() == s)
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl From<Response> for Outcome {
    fn from(r: Response) -> Self {
        match r {
            Response::Accept => Outcome::Accept,
            Response::Neutral => Outcome::Neutral,
            Response::Reject => Outcome::Reject,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A set of outcomes, written `any` or `Neutral|Reject` in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutcomeFilter(u8);

impl OutcomeFilter {
    pub const ANY: OutcomeFilter = OutcomeFilter(0b1111);

    pub fn empty() -> Self {
        OutcomeFilter(0)
    }

    pub fn of(outcomes: &[Outcome]) -> Self {
        OutcomeFilter(outcomes.iter().fold(0, |acc, o| acc | o.bit()))
    }

    pub fn insert(&mut self, o: Outcome) {
        self.0 |= o.bit();
    }

    pub fn contains(self, o: Outcome) -> bool {
        self.0 & o.bit() != 0
    }

    pub fn is_any(self) -> bool {
        self == Self::ANY
    }

    pub fn outcomes(self) -> impl Iterator<Item = Outcome> {
        Outcome::ALL.into_iter().filter(move |o| self.contains(*o))
    }
}

impl fmt::Display for OutcomeFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_any() {
            return f.write_str("any");
        }
        let names: Vec<&str> = self.outcomes().map(Outcome::as_str).collect();
        f.write_str(&names.join("|"))
    }
}

/// Minimal social-facts log entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExchangeHistoryRecord {
    pub tick: u64,
    pub exchange: String,
    pub initiator: CharacterId,
    pub target: CharacterId,
    pub outcome: Outcome,
}

/// One effective mutation of the social state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "on", rename_all = "snake_case")]
pub enum StateChange {
    Score {
        map: MapKind,
        network: String,
        owner: CharacterId,
        other: CharacterId,
        old: i64,
        new: i64,
    },
    StatusAdded {
        who: CharacterId,
        status: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<CharacterId>,
    },
    StatusRemoved {
        who: CharacterId,
        status: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<CharacterId>,
    },
    Relationship {
        kind: String,
        a: CharacterId,
        b: CharacterId,
        active: bool,
    },
}

impl StateChange {
    /// Network score changes are private to their owner.
    pub fn is_private(&self) -> bool {
        matches!(self, StateChange::Score { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("self-directed network value for {0}")]
    SelfDirected(CharacterId),
    #[error("unknown character {0}")]
    UnknownCharacter(String),
    #[error("unknown network {0}")]
    UnknownNetwork(String),
    #[error("unknown trait {0}")]
    UnknownTrait(String),
    #[error("unknown status {0}")]
    UnknownStatus(String),
    #[error("unknown relationship kind {0}")]
    UnknownRelationship(String),
    #[error("unknown location {0}")]
    UnknownLocation(String),
    #[error("status {0} requires a target")]
    MissingStatusTarget(String),
    #[error("status {0} does not take a target")]
    UnexpectedStatusTarget(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// The mutable social world of one session.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SocialState {
    networks: BTreeMap<String, ScoreRange>,
    trait_vocab: BTreeSet<String>,
    status_kinds: BTreeMap<String, StatusKind>,
    relationship_kinds: BTreeSet<String>,
    locations: BTreeSet<String>,
    exchange_ids: BTreeSet<String>,
    characters: BTreeMap<CharacterId, Character>,
    triples: BTreeMap<(CharacterId, String), NetworkTriple>,
    relationships: BTreeMap<(String, CharacterId, CharacterId), bool>,
    statuses: BTreeMap<CharacterId, Vec<StatusInstance>>,
    history: Vec<ExchangeHistoryRecord>,
    known: BTreeMap<CharacterId, Vec<usize>>,
    journal: Vec<StateChange>,
}

fn ordered_pair(a: &CharacterId, b: &CharacterId) -> (CharacterId, CharacterId) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

impl SocialState {
    /// Builds the initial state from a validated scenario.
    pub fn from_scenario(doc: &ScenarioDoc) -> Result<Self, ModelError> {
        let mut state = SocialState {
            networks: doc.networks.iter().map(|(k, n)| (k.clone(), n.range)).collect(),
            trait_vocab: doc.traits.keys().cloned().collect(),
            status_kinds: doc
                .statuses
                .iter()
                .map(|(k, s)| {
                    (
                        k.clone(),
                        StatusKind {
                            symbol: k.clone(),
                            targeted: s.targeted,
                            default_duration: s.duration,
                        },
                    )
                })
                .collect(),
            relationship_kinds: doc.relationships.keys().cloned().collect(),
            locations: doc.locations.keys().cloned().collect(),
            exchange_ids: doc.exchanges.keys().cloned().collect(),
            characters: BTreeMap::new(),
            triples: BTreeMap::new(),
            relationships: BTreeMap::new(),
            statuses: BTreeMap::new(),
            history: Vec::new(),
            known: BTreeMap::new(),
            journal: Vec::new(),
        };

        for (id, decl) in &doc.characters {
            let orientation = Orientation::from_symbol(&decl.orientation)
                .ok_or_else(|| ModelError::InvalidScenario(format!("orientation {}", decl.orientation)))?;
            if !state.locations.contains(&decl.location) {
                return Err(ModelError::UnknownLocation(decl.location.clone()));
            }
            for t in decl.traits.keys().chain(decl.likes.keys()).chain(decl.dislikes.keys()) {
                if !state.trait_vocab.contains(t) {
                    return Err(ModelError::UnknownTrait(t.clone()));
                }
            }
            let id = CharacterId::new(id.clone());
            state.characters.insert(
                id.clone(),
                Character {
                    id: id.clone(),
                    name: decl.name.clone().unwrap_or_else(|| id.to_string()),
                    gender: decl.gender.clone(),
                    race: decl.race.clone(),
                    orientation,
                    traits: decl.traits.keys().cloned().collect(),
                    likes: decl.likes.keys().cloned().collect(),
                    dislikes: decl.dislikes.keys().cloned().collect(),
                    location: decl.location.clone(),
                    player: decl.player,
                },
            );
        }

        for owner in state.characters.keys() {
            for (net, range) in &state.networks {
                let others: BTreeMap<CharacterId, i64> = state
                    .characters
                    .keys()
                    .filter(|c| *c != owner)
                    .map(|c| (c.clone(), range.default))
                    .collect();
                state.triples.insert(
                    (owner.clone(), net.clone()),
                    NetworkTriple {
                        owner: owner.clone(),
                        network: net.clone(),
                        value: others.clone(),
                        goal: others.clone(),
                        belief: others,
                    },
                );
            }
        }

        for (id, decl) in &doc.characters {
            let owner = CharacterId::new(id.clone());
            for ((map, net, other), (v, _)) in &decl.scores {
                state.check_pair(net, &owner, other)?;
                let range = state.networks[net];
                let triple = state.triples.get_mut(&(owner.clone(), net.clone())).expect("triple exists");
                triple.map_mut(*map).insert(other.clone(), range.clamp(*v));
            }
            for (kind, target) in decl.statuses.keys() {
                state.add_status(&owner, kind, target.as_ref(), None)?;
            }
            for (kind, other) in decl.relationships.keys() {
                state.set_relationship(kind, &owner, other, true)?;
            }
        }
        state.journal.clear();
        Ok(state)
    }

    fn check_character(&self, id: &CharacterId) -> Result<&Character, ModelError> {
        self.characters
            .get(id)
            .ok_or_else(|| ModelError::UnknownCharacter(id.to_string()))
    }

    fn check_pair(&self, network: &str, from: &CharacterId, to: &CharacterId) -> Result<ScoreRange, ModelError> {
        let range = *self
            .networks
            .get(network)
            .ok_or_else(|| ModelError::UnknownNetwork(network.to_string()))?;
        self.check_character(from)?;
        self.check_character(to)?;
        if from == to {
            return Err(ModelError::SelfDirected(from.clone()));
        }
        Ok(range)
    }

    // --- vocabulary -------------------------------------------------------

    pub fn network_range(&self, network: &str) -> Option<ScoreRange> {
        self.networks.get(network).copied()
    }

    pub fn networks(&self) -> impl Iterator<Item = &str> {
        self.networks.keys().map(String::as_str)
    }

    pub fn has_trait_symbol(&self, t: &str) -> bool {
        self.trait_vocab.contains(t)
    }

    pub fn status_kind(&self, s: &str) -> Option<&StatusKind> {
        self.status_kinds.get(s)
    }

    pub fn has_relationship_kind(&self, k: &str) -> bool {
        self.relationship_kinds.contains(k)
    }

    pub fn has_exchange(&self, e: &str) -> bool {
        self.exchange_ids.contains(e)
    }

    pub fn has_location(&self, l: &str) -> bool {
        self.locations.contains(l)
    }

    // --- public parts -----------------------------------------------------

    pub fn character(&self, id: &CharacterId) -> Option<&Character> {
        self.characters.get(id)
    }

    /// The cast in stable (identifier) order.
    pub fn characters(&self) -> impl Iterator<Item = &Character> {
        self.characters.values()
    }

    pub fn characters_at<'a>(&'a self, location: &'a str) -> impl Iterator<Item = &'a Character> + 'a {
        self.characters.values().filter(move |c| c.location == location)
    }

    pub fn player(&self) -> Option<&Character> {
        self.characters.values().find(|c| c.player)
    }

    pub fn move_character(&mut self, id: &CharacterId, location: &str) -> Result<(), ModelError> {
        if !self.locations.contains(location) {
            return Err(ModelError::UnknownLocation(location.to_string()));
        }
        let c = self
            .characters
            .get_mut(id)
            .ok_or_else(|| ModelError::UnknownCharacter(id.to_string()))?;
        c.location = location.to_string();
        Ok(())
    }

    // --- networks ---------------------------------------------------------

    /// Reads one entry of `from`'s map about `to`.
    pub fn score(&self, map: MapKind, network: &str, from: &CharacterId, to: &CharacterId) -> Result<i64, ModelError> {
        let range = self.check_pair(network, from, to)?;
        Ok(self
            .triples
            .get(&(from.clone(), network.to_string()))
            .and_then(|t| t.map(map).get(to).copied())
            .unwrap_or(range.default))
    }

    pub fn get_value(&self, network: &str, from: &CharacterId, to: &CharacterId) -> Result<i64, ModelError> {
        self.score(MapKind::Value, network, from, to)
    }

    pub fn triple(&self, owner: &CharacterId, network: &str) -> Option<&NetworkTriple> {
        self.triples.get(&(owner.clone(), network.to_string()))
    }

    pub fn triples(&self) -> impl Iterator<Item = &NetworkTriple> {
        self.triples.values()
    }

    /// Adds `delta` to one map entry, saturating at the network range.
    /// Returns the effective delta.
    pub fn apply_score_delta(
        &mut self,
        map: MapKind,
        network: &str,
        from: &CharacterId,
        to: &CharacterId,
        delta: i64,
    ) -> Result<i64, ModelError> {
        let old = self.score(map, network, from, to)?;
        let range = self.networks[network];
        let new = range.clamp(old.saturating_add(delta));
        self.write_score(map, network, from, to, new);
        if new != old {
            self.journal.push(StateChange::Score {
                map,
                network: network.to_string(),
                owner: from.clone(),
                other: to.clone(),
                old,
                new,
            });
        }
        Ok(new - old)
    }

    fn write_score(&mut self, map: MapKind, network: &str, from: &CharacterId, to: &CharacterId, v: i64) {
        let range = self.networks[network];
        let triple = self
            .triples
            .entry((from.clone(), network.to_string()))
            .or_insert_with(|| NetworkTriple {
                owner: from.clone(),
                network: network.to_string(),
                value: BTreeMap::new(),
                goal: BTreeMap::new(),
                belief: BTreeMap::new(),
            });
        triple.map_mut(map).insert(to.clone(), range.clamp(v));
    }

    pub fn apply_delta(&mut self, network: &str, from: &CharacterId, to: &CharacterId, delta: i64) -> Result<i64, ModelError> {
        self.apply_score_delta(MapKind::Value, network, from, to, delta)
    }

    pub fn update_belief(&mut self, owner: &CharacterId, network: &str, other: &CharacterId, delta: i64) -> Result<i64, ModelError> {
        self.apply_score_delta(MapKind::Belief, network, owner, other, delta)
    }

    /// Overwrites a goal entry (clamped). Goal formation is reported by the
    /// session as `GoalsFormed`, so this is not journaled.
    pub fn set_goal(&mut self, network: &str, owner: &CharacterId, other: &CharacterId, goal: i64) -> Result<i64, ModelError> {
        let range = self.check_pair(network, owner, other)?;
        let v = range.clamp(goal);
        self.write_score(MapKind::Goal, network, owner, other, v);
        Ok(v)
    }

    // --- relationships ----------------------------------------------------

    pub fn set_relationship(&mut self, kind: &str, a: &CharacterId, b: &CharacterId, active: bool) -> Result<(), ModelError> {
        if !self.relationship_kinds.contains(kind) {
            return Err(ModelError::UnknownRelationship(kind.to_string()));
        }
        self.check_character(a)?;
        self.check_character(b)?;
        if a == b {
            return Err(ModelError::SelfDirected(a.clone()));
        }
        let (lo, hi) = ordered_pair(a, b);
        let key = (kind.to_string(), lo.clone(), hi.clone());
        let previous = self.relationships.insert(key, active);
        if previous.unwrap_or(false) != active {
            self.journal.push(StateChange::Relationship {
                kind: kind.to_string(),
                a: lo,
                b: hi,
                active,
            });
        }
        Ok(())
    }

    pub fn relationship(&self, kind: &str, a: &CharacterId, b: &CharacterId) -> bool {
        let (lo, hi) = ordered_pair(a, b);
        self.relationships
            .get(&(kind.to_string(), lo, hi))
            .copied()
            .unwrap_or(false)
    }

    /// Every relationship record, active or not.
    pub fn relationships(&self) -> impl Iterator<Item = Relationship> + '_ {
        self.relationships.iter().map(|((kind, a, b), active)| Relationship {
            kind: kind.clone(),
            pair: (a.clone(), b.clone()),
            active: *active,
        })
    }

    // --- statuses ---------------------------------------------------------

    /// Adds (or refreshes) a status. `duration` overrides the kind's default.
    pub fn add_status(
        &mut self,
        who: &CharacterId,
        kind: &str,
        target: Option<&CharacterId>,
        duration: Option<u32>,
    ) -> Result<(), ModelError> {
        self.check_character(who)?;
        let sk = self
            .status_kinds
            .get(kind)
            .ok_or_else(|| ModelError::UnknownStatus(kind.to_string()))?;
        match (sk.targeted, target) {
            (true, None) => return Err(ModelError::MissingStatusTarget(kind.to_string())),
            (false, Some(_)) => return Err(ModelError::UnexpectedStatusTarget(kind.to_string())),
            _ => {}
        }
        if let Some(t) = target {
            self.check_character(t)?;
        }
        let remaining = Remaining::from_duration(duration.unwrap_or(sk.default_duration));
        let list = self.statuses.entry(who.clone()).or_default();
        let instance = StatusInstance {
            kind: kind.to_string(),
            target: target.cloned(),
            remaining,
        };
        if let Some(existing) = list
            .iter_mut()
            .find(|s| s.kind == kind && s.target.as_ref() == target)
        {
            existing.remaining = remaining;
        } else {
            list.push(instance);
            self.journal.push(StateChange::StatusAdded {
                who: who.clone(),
                status: kind.to_string(),
                target: target.cloned(),
            });
        }
        Ok(())
    }

    /// Removes every instance of `kind` on `who`.
    pub fn remove_status(&mut self, who: &CharacterId, kind: &str) -> Result<(), ModelError> {
        self.check_character(who)?;
        if !self.status_kinds.contains_key(kind) {
            return Err(ModelError::UnknownStatus(kind.to_string()));
        }
        if let Some(list) = self.statuses.get_mut(who) {
            let mut removed = Vec::new();
            list.retain(|s| {
                if s.kind == kind {
                    removed.push(s.target.clone());
                    false
                } else {
                    true
                }
            });
            for target in removed {
                self.journal.push(StateChange::StatusRemoved {
                    who: who.clone(),
                    status: kind.to_string(),
                    target,
                });
            }
        }
        Ok(())
    }

    /// With `target = None` any instance of the kind matches.
    pub fn has_status(&self, who: &CharacterId, kind: &str, target: Option<&CharacterId>) -> bool {
        self.statuses.get(who).is_some_and(|list| {
            list.iter()
                .any(|s| s.kind == kind && (target.is_none() || s.target.as_ref() == target))
        })
    }

    pub fn statuses_of(&self, who: &CharacterId) -> &[StatusInstance] {
        self.statuses.get(who).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Counts every finite status down by one tick and removes the ones that
    /// reach zero.
    pub fn expire_statuses(&mut self) -> Vec<(CharacterId, StatusInstance)> {
        self.expire_statuses_where(|_| true)
    }

    /// Like [`expire_statuses`](Self::expire_statuses) but only for the
    /// characters selected by `scope`.
    pub fn expire_statuses_where(&mut self, scope: impl Fn(&CharacterId) -> bool) -> Vec<(CharacterId, StatusInstance)> {
        let mut expired = Vec::new();
        for (who, list) in self.statuses.iter_mut() {
            if !scope(who) {
                continue;
            }
            for s in list.iter_mut() {
                if let Remaining::Ticks(n) = &mut s.remaining {
                    *n = n.saturating_sub(1);
                }
            }
            list.retain(|s| {
                if s.remaining == Remaining::Ticks(0) {
                    expired.push((who.clone(), s.clone()));
                    false
                } else {
                    true
                }
            });
        }
        expired
    }

    // --- history ----------------------------------------------------------

    pub fn record_exchange(&mut self, record: ExchangeHistoryRecord) -> usize {
        self.history.push(record);
        self.history.len() - 1
    }

    pub fn history(&self) -> &[ExchangeHistoryRecord] {
        &self.history
    }

    pub fn history_count(
        &self,
        exchange: &str,
        initiator: &CharacterId,
        target: &CharacterId,
        filter: OutcomeFilter,
    ) -> usize {
        self.history
            .iter()
            .filter(|r| {
                r.exchange == exchange && &r.initiator == initiator && &r.target == target && filter.contains(r.outcome)
            })
            .count()
    }

    /// Adds a history record to what `who` knows about.
    pub fn witness(&mut self, who: &CharacterId, record: usize) {
        let known = self.known.entry(who.clone()).or_default();
        if !known.contains(&record) {
            known.push(record);
        }
    }

    pub fn known_history(&self, who: &CharacterId) -> impl Iterator<Item = &ExchangeHistoryRecord> {
        self.known
            .get(who)
            .into_iter()
            .flatten()
            .filter_map(|i| self.history.get(*i))
    }

    // --- journal ----------------------------------------------------------

    /// Drains the pending change journal.
    pub fn take_changes(&mut self) -> Vec<StateChange> {
        std::mem::take(&mut self.journal)
    }

    /// A digest of the whole state, for purity checks.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }
}
