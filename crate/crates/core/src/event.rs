//! The append-only event log.
//!
//! Each event serializes to one line of compact JSON with keys in declared
//! order: `seq`, `tick`, `kind`, then the payload. That line format is what
//! replay compares byte for byte.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::model::{CharacterId, Outcome, Response, StateChange};
use crate::volition::DesireEntry;

/// A player action, as recorded in `PlayerChoice` events and replayed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum PlayerInput {
    Respond {
        quest: u64,
        choice: Response,
    },
    Initiate {
        exchange: String,
        target: CharacterId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subject: Option<CharacterId>,
    },
    Move {
        location: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenePhase {
    Performance,
    Response,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EventBody {
    SessionCreated {
        seed: u64,
        scenario: String,
        player: CharacterId,
        location: String,
    },
    GoalsFormed {
        location: String,
        owner: CharacterId,
        network: String,
        other: CharacterId,
        goal: i64,
    },
    DesireComputed {
        npc: CharacterId,
        desires: Vec<DesireEntry>,
    },
    ExchangeQueued {
        exchange: String,
        initiator: CharacterId,
        target: CharacterId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subject: Option<CharacterId>,
        position: usize,
        player: bool,
    },
    ExchangeStarted {
        quest: u64,
        stage: i8,
        exchange: String,
        initiator: CharacterId,
        target: CharacterId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subject: Option<CharacterId>,
    },
    ResultComputed {
        quest: u64,
        stage: i8,
        total: i64,
        outcome: Response,
    },
    PlayerPrompt {
        quest: u64,
        stage: i8,
        exchange: String,
        initiator: CharacterId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subject: Option<CharacterId>,
    },
    PlayerChoice {
        input: PlayerInput,
    },
    SceneGoTo {
        quest: u64,
        initiator: CharacterId,
        target: CharacterId,
        text: String,
    },
    SceneLine {
        quest: u64,
        phase: ScenePhase,
        speaker: CharacterId,
        text: String,
    },
    ExchangeCompleted {
        quest: u64,
        stage: i8,
        exchange: String,
        initiator: CharacterId,
        target: CharacterId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        subject: Option<CharacterId>,
        outcome: Outcome,
    },
    TriggerFired {
        rule: String,
        initiator: CharacterId,
        target: CharacterId,
        pass: u32,
    },
    StateDelta {
        change: StateChange,
    },
    StatusExpired {
        who: CharacterId,
        status: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<CharacterId>,
    },
    Notified {
        npc: CharacterId,
        quest: u64,
    },
    Error {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quest: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stage: Option<i8>,
        code: String,
        message: String,
    },
}

impl EventBody {
    pub fn kind(&self) -> &'static str {
        match self {
            EventBody::SessionCreated { .. } => "SessionCreated",
            EventBody::GoalsFormed { .. } => "GoalsFormed",
            EventBody::DesireComputed { .. } => "DesireComputed",
            EventBody::ExchangeQueued { .. } => "ExchangeQueued",
            EventBody::ExchangeStarted { .. } => "ExchangeStarted",
            EventBody::ResultComputed { .. } => "ResultComputed",
            EventBody::PlayerPrompt { .. } => "PlayerPrompt",
            EventBody::PlayerChoice { .. } => "PlayerChoice",
            EventBody::SceneGoTo { .. } => "SceneGoTo",
            EventBody::SceneLine { .. } => "SceneLine",
            EventBody::ExchangeCompleted { .. } => "ExchangeCompleted",
            EventBody::TriggerFired { .. } => "TriggerFired",
            EventBody::StateDelta { .. } => "StateDelta",
            EventBody::StatusExpired { .. } => "StatusExpired",
            EventBody::Notified { .. } => "Notified",
            EventBody::Error { .. } => "Error",
        }
    }

    /// The quest this event belongs to, if any.
    pub fn quest(&self) -> Option<u64> {
        match self {
            EventBody::ExchangeStarted { quest, .. }
            | EventBody::ResultComputed { quest, .. }
            | EventBody::PlayerPrompt { quest, .. }
            | EventBody::SceneGoTo { quest, .. }
            | EventBody::SceneLine { quest, .. }
            | EventBody::ExchangeCompleted { quest, .. }
            | EventBody::Notified { quest, .. } => Some(*quest),
            EventBody::Error { quest, .. } => *quest,
            _ => None,
        }
    }

    pub fn is_scene(&self) -> bool {
        matches!(self, EventBody::SceneGoTo { .. } | EventBody::SceneLine { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub tick: u64,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("log is empty")]
    Empty,
}

impl Event {
    /// The canonical log line (without the newline).
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("events always serialize")
    }

    pub fn from_line(line: &str) -> Result<Event, serde_json::Error> {
        serde_json::from_str(line)
    }

    /// The event as seen by a non-debug client. Private payloads are
    /// replaced by a `redacted` marker rather than dropped, so sequence
    /// numbers stay gapless.
    pub fn public_view(&self) -> Value {
        let redacted = |extra: Option<(&str, Value)>| {
            let mut m = Map::new();
            m.insert("seq".into(), json!(self.seq));
            m.insert("tick".into(), json!(self.tick));
            m.insert("kind".into(), json!(self.body.kind()));
            if let Some((k, v)) = extra {
                m.insert(k.into(), v);
            }
            m.insert("redacted".into(), json!(true));
            Value::Object(m)
        };
        match &self.body {
            EventBody::GoalsFormed { owner, .. } => redacted(Some(("owner", json!(owner)))),
            EventBody::DesireComputed { npc, .. } => redacted(Some(("npc", json!(npc)))),
            EventBody::ResultComputed { quest, .. } => redacted(Some(("quest", json!(quest)))),
            EventBody::StateDelta { change } if change.is_private() => redacted(None),
            _ => serde_json::to_value(self).expect("events always serialize"),
        }
    }
}

/// Renders a whole log, one event per line, newline-terminated.
pub fn render_log(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_line());
        out.push('\n');
    }
    out
}

/// Parses a log file. Every line must be a complete event and the file must
/// end with a newline.
pub fn parse_log(text: &str) -> Result<Vec<Event>, LogError> {
    if text.is_empty() {
        return Err(LogError::Empty);
    }
    let body = text.strip_suffix('\n').ok_or_else(|| LogError::Malformed {
        line: text.lines().count(),
        message: "last line is incomplete".into(),
    })?;
    body.split('\n')
        .enumerate()
        .map(|(i, line)| {
            Event::from_line(line).map_err(|e| LogError::Malformed { line: i + 1, message: e.to_string() })
        })
        .collect()
}
