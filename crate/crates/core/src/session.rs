//! The game manager: owns one session's social state, the exchange queue,
//! the tick loop and the event log.
//!
//! A tick does, in order: count down statuses of the characters at the
//! player's location; let every idle NPC there pick its best desire and
//! queue it; pop one queue entry and run that exchange to completion or to a
//! player prompt. Player actions happen between ticks and are logged as
//! `PlayerChoice` events, which is all replay needs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dsl::{self, Diagnostic, ScenarioDoc};
use crate::event::{Event, EventBody, PlayerInput};
use crate::exchange::QuestInstance;
use crate::model::{CharacterId, ModelError, Response, SocialState};
use crate::volition::{self, Bindings, Dice, DesireEntry};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("scenario has {} error(s)", .0.iter().filter(|d| d.is_error()).count())]
    InvalidScenario(Vec<Diagnostic>),
    #[error("quest {0} is waiting for the player's response")]
    AwaitingPlayer(u64),
    #[error("no response is pending")]
    NoPendingPrompt,
    #[error("quest {got} is not the pending quest {pending}")]
    WrongQuest { pending: u64, got: u64 },
    #[error("unknown exchange {0}")]
    UnknownExchange(String),
    #[error("unknown character {0}")]
    UnknownCharacter(String),
    #[error("unknown location {0}")]
    UnknownLocation(String),
    #[error("same area rule: {who} is not at the player's location {location}")]
    NotCoLocated { who: CharacterId, location: String },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("{0}")]
    InvalidRoles(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A requested exchange waiting for its turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueueEntry {
    pub exchange: String,
    pub initiator: CharacterId,
    pub target: CharacterId,
    pub subject: Option<CharacterId>,
    pub player: bool,
}

impl QueueEntry {
    fn same_request(&self, other: &QueueEntry) -> bool {
        self.exchange == other.exchange
            && self.initiator == other.initiator
            && self.target == other.target
            && self.subject == other.subject
    }

    pub fn bindings(&self) -> Bindings {
        Bindings::pair(&self.initiator, &self.target).with_subject(self.subject.as_ref())
    }
}

pub(crate) struct RngDice(ChaCha8Rng);

impl Dice for RngDice {
    fn percent(&mut self) -> Option<u32> {
        Some(self.0.random_range(0..100))
    }
}

/// First 16 hex digits of the SHA-256 of the canonical scenario text.
pub fn scenario_digest(doc: &ScenarioDoc) -> String {
    let hash = Sha256::digest(dsl::serialize(doc).as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub struct Session {
    pub(crate) doc: Arc<ScenarioDoc>,
    pub(crate) digest: String,
    pub(crate) seed: u64,
    pub(crate) tick: u64,
    pub(crate) player: CharacterId,
    pub(crate) state: SocialState,
    pub(crate) queue: VecDeque<QueueEntry>,
    pub(crate) pending: Option<QuestInstance>,
    pub(crate) dice: RngDice,
    pub(crate) events: Vec<Event>,
    pub(crate) desires: BTreeMap<CharacterId, Vec<DesireEntry>>,
    pub(crate) next_quest: u64,
    pub(crate) finished: Vec<QuestInstance>,
}

impl Session {
    /// Starts a session: builds the state, logs `SessionCreated` and forms
    /// goals at the player's location.
    pub fn new(doc: ScenarioDoc, seed: u64) -> Result<Session, SessionError> {
        let diags = dsl::validate(&doc);
        if diags.iter().any(Diagnostic::is_error) {
            return Err(SessionError::InvalidScenario(diags));
        }
        let state = SocialState::from_scenario(&doc)?;
        let player = doc
            .player_id()
            .ok_or_else(|| ModelError::InvalidScenario("no player character".into()))?;
        let location = state.character(&player).map(|c| c.location.clone()).unwrap_or_default();
        let mut s = Session {
            digest: scenario_digest(&doc),
            doc: Arc::new(doc),
            seed,
            tick: 0,
            player: player.clone(),
            state,
            queue: VecDeque::new(),
            pending: None,
            dice: RngDice(ChaCha8Rng::seed_from_u64(seed)),
            events: Vec::new(),
            desires: BTreeMap::new(),
            next_quest: 1,
            finished: Vec::new(),
        };
        let scenario = s.digest.clone();
        s.emit(EventBody::SessionCreated { seed, scenario, player, location });
        s.form_goals_here();
        Ok(s)
    }

    /// Parses `text` and starts a session on it.
    pub fn from_text(text: &str, seed: u64) -> Result<Session, SessionError> {
        let doc = dsl::parse(text).map_err(SessionError::InvalidScenario)?;
        Session::new(doc, seed)
    }

    // --- read access ------------------------------------------------------

    pub fn doc(&self) -> &ScenarioDoc {
        &self.doc
    }

    pub fn state(&self) -> &SocialState {
        &self.state
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn current_tick(&self) -> u64 {
        self.tick
    }

    pub fn player(&self) -> &CharacterId {
        &self.player
    }

    pub fn player_location(&self) -> &str {
        self.state.character(&self.player).map(|c| c.location.as_str()).unwrap_or("")
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Events with `seq > since`.
    pub fn events_since(&self, since: u64) -> &[Event] {
        let start = usize::try_from(since).unwrap_or(usize::MAX).min(self.events.len());
        &self.events[start..]
    }

    pub fn last_seq(&self) -> u64 {
        self.events.len() as u64
    }

    pub fn log_text(&self) -> String {
        crate::event::render_log(&self.events)
    }

    /// The quest waiting for the player's answer, if any.
    pub fn pending_prompt(&self) -> Option<&QuestInstance> {
        self.pending.as_ref()
    }

    pub fn queue(&self) -> impl Iterator<Item = &QueueEntry> {
        self.queue.iter()
    }

    /// Every quest that has finished, successfully or not, in order.
    pub fn finished_quests(&self) -> &[QuestInstance] {
        &self.finished
    }

    /// Cached prospective memory of an NPC, if computed and still valid.
    pub fn cached_desires(&self, npc: &CharacterId) -> Option<&[DesireEntry]> {
        self.desires.get(npc).map(Vec::as_slice)
    }

    /// The player actions recorded so far, with the tick they followed.
    pub fn inputs(&self) -> Vec<(u64, PlayerInput)> {
        recorded_inputs(&self.events)
    }

    // --- internals --------------------------------------------------------

    pub(crate) fn emit(&mut self, body: EventBody) {
        let seq = self.events.len() as u64 + 1;
        self.events.push(Event { seq, tick: self.tick, body });
    }

    pub(crate) fn error_event(&mut self, quest: Option<u64>, stage: Option<i8>, code: &str, message: impl Into<String>) {
        self.emit(EventBody::Error { quest, stage, code: code.to_string(), message: message.into() });
    }

    /// Characters at the player's location, in cast order.
    pub(crate) fn here(&self) -> Vec<CharacterId> {
        let loc = self.player_location().to_string();
        self.state.characters_at(&loc).map(|c| c.id.clone()).collect()
    }

    pub(crate) fn npcs_here(&self) -> Vec<CharacterId> {
        self.here().into_iter().filter(|c| c != &self.player).collect()
    }

    pub(crate) fn is_here(&self, who: &CharacterId) -> bool {
        self.state.character(who).is_some_and(|c| c.location == self.player_location())
    }

    pub(crate) fn display_name(&self, id: &CharacterId) -> String {
        self.state.character(id).map(|c| c.name.clone()).unwrap_or_else(|| id.to_string())
    }

    fn since(&self, start: usize) -> Vec<Event> {
        self.events[start..].to_vec()
    }

    fn form_goals_here(&mut self) {
        let loc = self.player_location().to_string();
        match volition::form_goals(&self.doc, &self.state, &loc) {
            Ok(updates) => {
                for u in updates {
                    match self.state.set_goal(&u.network, &u.owner, &u.other, u.goal) {
                        Ok(goal) => self.emit(EventBody::GoalsFormed {
                            location: loc.clone(),
                            owner: u.owner,
                            network: u.network,
                            other: u.other,
                            goal,
                        }),
                        Err(e) => self.error_event(None, None, "goal_error", e.to_string()),
                    }
                }
            }
            Err(e) => self.error_event(None, None, "goal_error", e.to_string()),
        }
        self.desires.clear();
    }

    fn check_here(&self, who: &CharacterId) -> Result<(), SessionError> {
        if self.state.character(who).is_none() {
            return Err(SessionError::UnknownCharacter(who.to_string()));
        }
        if !self.is_here(who) {
            return Err(SessionError::NotCoLocated { who: who.clone(), location: self.player_location().to_string() });
        }
        Ok(())
    }

    fn check_entry(&self, entry: &QueueEntry) -> Result<(), SessionError> {
        let ex = self
            .doc
            .exchanges
            .get(&entry.exchange)
            .ok_or_else(|| SessionError::UnknownExchange(entry.exchange.clone()))?;
        for who in [Some(&entry.initiator), Some(&entry.target), entry.subject.as_ref()].into_iter().flatten() {
            self.check_here(who)?;
        }
        if !volition::roles_fit(ex, &entry.bindings()) {
            return Err(SessionError::InvalidRoles(if ex.subject {
                format!("{} needs three different characters", entry.exchange)
            } else {
                format!("{} needs two different characters and no subject", entry.exchange)
            }));
        }
        Ok(())
    }

    fn push_entry(&mut self, entry: QueueEntry, front: bool) -> usize {
        if let Some(pos) = self.queue.iter().position(|e| e.same_request(&entry)) {
            if !front {
                return pos;
            }
            self.queue.remove(pos);
        }
        let position = if front {
            self.queue.push_front(entry.clone());
            0
        } else {
            self.queue.push_back(entry.clone());
            self.queue.len() - 1
        };
        self.emit(EventBody::ExchangeQueued {
            exchange: entry.exchange,
            initiator: entry.initiator,
            target: entry.target,
            subject: entry.subject,
            position,
            player: entry.player,
        });
        position
    }

    /// Appends an exchange request to the queue. A request identical to one
    /// already queued is coalesced and keeps its position.
    ///
    /// This is not a player action, so it is not replayed; sessions that
    /// must replay should only use the player commands.
    pub fn enqueue_exchange(
        &mut self,
        exchange: &str,
        initiator: &CharacterId,
        target: &CharacterId,
        subject: Option<&CharacterId>,
    ) -> Result<usize, SessionError> {
        let entry = QueueEntry {
            exchange: exchange.to_string(),
            initiator: initiator.clone(),
            target: target.clone(),
            subject: subject.cloned(),
            player: false,
        };
        self.check_entry(&entry)?;
        Ok(self.push_entry(entry, false))
    }

    // --- the tick loop ----------------------------------------------------

    /// Advances one tick and returns the events it produced.
    pub fn tick(&mut self) -> Result<Vec<Event>, SessionError> {
        if let Some(q) = &self.pending {
            return Err(SessionError::AwaitingPlayer(q.id));
        }
        let start = self.events.len();
        self.tick += 1;

        let here: BTreeSet<CharacterId> = self.here().into_iter().collect();
        let expired = self.state.expire_statuses_where(|c| here.contains(c));
        if !expired.is_empty() {
            self.desires.clear();
        }
        for (who, s) in expired {
            self.emit(EventBody::StatusExpired { who, status: s.kind, target: s.target });
        }

        let busy: BTreeSet<CharacterId> = self.queue.iter().map(|e| e.initiator.clone()).collect();
        for npc in self.npcs_here() {
            if busy.contains(&npc) {
                continue;
            }
            let desires = match self.desires.get(&npc) {
                Some(d) => d.clone(),
                None => {
                    let d = match volition::build_prospective_memory(&self.doc, &self.state, &npc) {
                        Ok(d) => {
                            self.emit(EventBody::DesireComputed { npc: npc.clone(), desires: d.clone() });
                            d
                        }
                        Err(e) => {
                            self.error_event(None, None, "volition_error", format!("{npc}: {e}"));
                            Vec::new()
                        }
                    };
                    self.desires.insert(npc.clone(), d.clone());
                    d
                }
            };
            if let Some(head) = desires.first() {
                let entry = QueueEntry {
                    exchange: head.exchange.clone(),
                    initiator: npc.clone(),
                    target: head.target.clone(),
                    subject: head.subject.clone(),
                    player: false,
                };
                self.push_entry(entry, false);
            }
        }

        if let Some(entry) = self.queue.pop_front() {
            self.run_quest(entry);
        }
        Ok(self.since(start))
    }

    /// Runs up to `n` ticks, stopping early at a player prompt.
    pub fn run_ticks(&mut self, n: u64) -> Result<Vec<Event>, SessionError> {
        let start = self.events.len();
        for _ in 0..n {
            if self.pending.is_some() {
                break;
            }
            self.tick()?;
        }
        Ok(self.since(start))
    }

    // --- player commands --------------------------------------------------

    /// The player asks to perform an exchange; it jumps to the front of the
    /// queue and runs on the next tick.
    pub fn player_initiate(
        &mut self,
        exchange: &str,
        target: &CharacterId,
        subject: Option<&CharacterId>,
    ) -> Result<usize, SessionError> {
        if let Some(q) = &self.pending {
            return Err(SessionError::AwaitingPlayer(q.id));
        }
        let entry = QueueEntry {
            exchange: exchange.to_string(),
            initiator: self.player.clone(),
            target: target.clone(),
            subject: subject.cloned(),
            player: true,
        };
        self.check_entry(&entry)?;
        let ex = &self.doc.exchanges[exchange];
        let failing = volition::first_failing(&ex.preconditions, &self.state, &entry.bindings())
            .map_err(|e| SessionError::PreconditionFailed(e.to_string()))?;
        if let Some(lit) = failing {
            return Err(SessionError::PreconditionFailed(dsl::literal_text(lit)));
        }
        self.emit(EventBody::PlayerChoice {
            input: PlayerInput::Initiate {
                exchange: exchange.to_string(),
                target: target.clone(),
                subject: subject.cloned(),
            },
        });
        Ok(self.push_entry(entry, true))
    }

    /// Answers the pending prompt; the scene and completion follow at once.
    pub fn player_respond(&mut self, quest: u64, choice: Response) -> Result<Vec<Event>, SessionError> {
        let pending = self.pending.as_ref().ok_or(SessionError::NoPendingPrompt)?;
        if pending.id != quest {
            return Err(SessionError::WrongQuest { pending: pending.id, got: quest });
        }
        let mut q = self.pending.take().expect("checked above");
        let start = self.events.len();
        self.emit(EventBody::PlayerChoice { input: PlayerInput::Respond { quest, choice } });
        q.result = Some(choice);
        q.awaiting_player = false;
        self.finish_quest(q);
        Ok(self.since(start))
    }

    /// Moves the player; NPCs at the new location form goals, queued
    /// requests involving absent characters are dropped.
    pub fn player_move(&mut self, location: &str) -> Result<Vec<Event>, SessionError> {
        if let Some(q) = &self.pending {
            return Err(SessionError::AwaitingPlayer(q.id));
        }
        if !self.state.has_location(location) {
            return Err(SessionError::UnknownLocation(location.to_string()));
        }
        let start = self.events.len();
        self.emit(EventBody::PlayerChoice { input: PlayerInput::Move { location: location.to_string() } });
        let player = self.player.clone();
        self.state.move_character(&player, location)?;
        let state = &self.state;
        let at = |c: &CharacterId| state.character(c).is_some_and(|c| c.location == location);
        self.queue
            .retain(|e| at(&e.initiator) && at(&e.target) && e.subject.as_ref().is_none_or(at));
        self.form_goals_here();
        Ok(self.since(start))
    }

    pub fn apply_input(&mut self, input: &PlayerInput) -> Result<Vec<Event>, SessionError> {
        match input {
            PlayerInput::Respond { quest, choice } => self.player_respond(*quest, *choice),
            PlayerInput::Initiate { exchange, target, subject } => {
                let start = self.events.len();
                self.player_initiate(exchange, target, subject.as_ref())?;
                Ok(self.since(start))
            }
            PlayerInput::Move { location } => self.player_move(location),
        }
    }
}

/// Player inputs recorded in a log, with the tick each one followed.
pub fn recorded_inputs(events: &[Event]) -> Vec<(u64, PlayerInput)> {
    events
        .iter()
        .filter_map(|e| match &e.body {
            EventBody::PlayerChoice { input } => Some((e.tick, input.clone())),
            _ => None,
        })
        .collect()
}
