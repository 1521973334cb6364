//! What clients may see of a session.
//!
//! [`ObservableProjection`] holds only public facts: who is where, traits,
//! statuses, relationships, the pending prompt and recent scene text. Scores,
//! likes and dislikes never appear in it. [`DebugState`] adds the private
//! parts and the volition breakdowns behind every possible desire.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dsl;
use crate::event::{EventBody, ScenePhase};
use crate::exchange::QuestInstance;
use crate::model::{Character, CharacterId, ExchangeHistoryRecord, NetworkTriple, Remaining};
use crate::session::Session;
use crate::volition::{self, Bindings, DesireEntry, VolitionBreakdown};

/// Scene lines kept in a projection.
pub const RECENT_SCENE_LINES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PublicStatus {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<CharacterId>,
    /// Ticks left, absent for permanent statuses.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub remaining: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CastMember {
    pub id: CharacterId,
    pub name: String,
    pub gender: String,
    pub race: String,
    pub traits: Vec<String>,
    pub statuses: Vec<PublicStatus>,
    pub location: String,
    pub player: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationshipView {
    pub kind: String,
    pub a: CharacterId,
    pub b: CharacterId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptView {
    pub quest: u64,
    pub exchange: String,
    pub exchange_name: String,
    pub initiator: CharacterId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subject: Option<CharacterId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SceneLineView {
    pub seq: u64,
    pub tick: u64,
    pub quest: u64,
    /// `goto`, `performance` or `response`.
    pub phase: String,
    pub speaker: CharacterId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub listener: Option<CharacterId>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExchangeView {
    pub id: String,
    pub name: String,
    pub takes_subject: bool,
}

/// An exchange the player could start, and why not if it is blocked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActionView {
    pub exchange: String,
    pub target: CharacterId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subject: Option<CharacterId>,
    pub available: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObservableProjection {
    pub tick: u64,
    pub last_seq: u64,
    pub player: CharacterId,
    pub location: String,
    pub locations: Vec<String>,
    pub cast: Vec<CastMember>,
    pub relationships: Vec<RelationshipView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompt: Option<PromptView>,
    pub scene: Vec<SceneLineView>,
    pub queue_length: usize,
    pub exchanges: Vec<ExchangeView>,
    pub actions: Vec<ActionView>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BreakdownView {
    pub npc: CharacterId,
    pub exchange: String,
    pub target: CharacterId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subject: Option<CharacterId>,
    /// `None` when the preconditions do not hold.
    pub breakdown: Option<VolitionBreakdown>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DebugState {
    #[serde(flatten)]
    pub public: ObservableProjection,
    pub characters: Vec<Character>,
    pub triples: Vec<NetworkTriple>,
    pub history: Vec<ExchangeHistoryRecord>,
    pub desires: BTreeMap<CharacterId, Vec<DesireEntry>>,
    pub breakdowns: Vec<BreakdownView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pending: Option<QuestInstance>,
}

impl Session {
    pub fn projection(&self) -> ObservableProjection {
        let state = self.state();
        let cast = state
            .characters()
            .map(|c| CastMember {
                id: c.id.clone(),
                name: c.name.clone(),
                gender: c.gender.clone(),
                race: c.race.clone(),
                traits: c.traits.iter().cloned().collect(),
                statuses: state
                    .statuses_of(&c.id)
                    .iter()
                    .map(|s| PublicStatus {
                        kind: s.kind.clone(),
                        target: s.target.clone(),
                        remaining: match s.remaining {
                            Remaining::Permanent => None,
                            Remaining::Ticks(n) => Some(n),
                        },
                    })
                    .collect(),
                location: c.location.clone(),
                player: c.player,
            })
            .collect();
        let relationships = state
            .relationships()
            .filter(|r| r.active)
            .map(|r| RelationshipView { kind: r.kind, a: r.pair.0, b: r.pair.1 })
            .collect();
        let prompt = self.pending_prompt().map(|q| PromptView {
            quest: q.id,
            exchange: q.exchange.clone(),
            exchange_name: self.doc().exchanges.get(&q.exchange).map_or(q.exchange.clone(), |e| e.display_name().to_string()),
            initiator: q.initiator.clone().unwrap_or_else(|| CharacterId::new("")),
            subject: q.subject.clone(),
        });
        ObservableProjection {
            tick: self.current_tick(),
            last_seq: self.last_seq(),
            player: self.player().clone(),
            location: self.player_location().to_string(),
            locations: self.doc().locations.keys().cloned().collect(),
            cast,
            relationships,
            prompt,
            scene: self.recent_scene(),
            queue_length: self.queue().count(),
            exchanges: self
                .doc()
                .exchanges
                .values()
                .map(|e| ExchangeView { id: e.id.clone(), name: e.display_name().to_string(), takes_subject: e.subject })
                .collect(),
            actions: self.player_actions(),
        }
    }

    fn recent_scene(&self) -> Vec<SceneLineView> {
        let mut lines: Vec<SceneLineView> = self
            .events()
            .iter()
            .rev()
            .filter_map(|e| match &e.body {
                EventBody::SceneGoTo { quest, initiator, target, text } => Some(SceneLineView {
                    seq: e.seq,
                    tick: e.tick,
                    quest: *quest,
                    phase: "goto".into(),
                    speaker: initiator.clone(),
                    listener: Some(target.clone()),
                    text: text.clone(),
                }),
                EventBody::SceneLine { quest, phase, speaker, text } => Some(SceneLineView {
                    seq: e.seq,
                    tick: e.tick,
                    quest: *quest,
                    phase: match phase {
                        ScenePhase::Performance => "performance",
                        ScenePhase::Response => "response",
                    }
                    .into(),
                    speaker: speaker.clone(),
                    listener: None,
                    text: text.clone(),
                }),
                _ => None,
            })
            .take(RECENT_SCENE_LINES)
            .collect();
        lines.reverse();
        lines
    }

    /// Every exchange the player could start with the characters present.
    fn player_actions(&self) -> Vec<ActionView> {
        let me = self.player().clone();
        let others = self.npcs_here();
        let mut out = Vec::new();
        for (id, ex) in &self.doc().exchanges {
            for target in &others {
                let subjects: Vec<Option<&CharacterId>> = if ex.subject {
                    others.iter().filter(|s| *s != target).map(Some).collect()
                } else {
                    vec![None]
                };
                for subject in subjects {
                    let b = Bindings::pair(&me, target).with_subject(subject);
                    let reason = match volition::first_failing(&ex.preconditions, self.state(), &b) {
                        Ok(None) => None,
                        Ok(Some(lit)) => Some(dsl::literal_text(lit)),
                        Err(e) => Some(e.to_string()),
                    };
                    out.push(ActionView {
                        exchange: id.clone(),
                        target: target.clone(),
                        subject: subject.cloned(),
                        available: reason.is_none(),
                        reason,
                    });
                }
            }
        }
        out
    }

    /// Everything, including private scores and every NPC's volitions.
    pub fn debug_state(&self) -> DebugState {
        let state = self.state();
        let here = self.here();
        let mut breakdowns = Vec::new();
        for npc in self.npcs_here() {
            for (id, ex) in &self.doc().exchanges {
                for target in here.iter().filter(|t| **t != npc) {
                    let subjects: Vec<Option<&CharacterId>> = if ex.subject {
                        here.iter().filter(|s| **s != npc && *s != target).map(Some).collect()
                    } else {
                        vec![None]
                    };
                    for subject in subjects {
                        let b = Bindings::pair(&npc, target).with_subject(subject);
                        breakdowns.push(BreakdownView {
                            npc: npc.clone(),
                            exchange: id.clone(),
                            target: target.clone(),
                            subject: subject.cloned(),
                            breakdown: volition::initiator_volition(ex, state, &b).ok().flatten(),
                        });
                    }
                }
            }
        }
        DebugState {
            public: self.projection(),
            characters: state.characters().cloned().collect(),
            triples: state.triples().cloned().collect(),
            history: state.history().to_vec(),
            desires: self.desires.clone(),
            breakdowns,
            pending: self.pending_prompt().cloned(),
        }
    }
}
