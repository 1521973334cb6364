//! Social exchanges: definitions, effects, scenes, trigger rules and the
//! quest instance that carries one exchange through its stages.
//!
//! Stages: 0 waiting, 1 aliases bound, 2 result known, 3 accepted,
//! 4 neutral or rejected, -1 failed (always reset to 0 afterwards).

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dsl::{self, Span};
use crate::event::{EventBody, ScenePhase};
use crate::model::{CharacterId, ExchangeHistoryRecord, MapKind, Outcome, Response, SocialState, StateChange};
use crate::session::{QueueEntry, Session};
use crate::volition::{self, Bindings, Condition, EvalError, InfluenceRule, Role};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeDef {
    pub id: String,
    pub name: Option<String>,
    /// The network this exchange is about.
    pub intent: String,
    /// Takes a third character the exchange is about.
    pub subject: bool,
    pub accept_above: Option<i64>,
    pub preconditions: Condition,
    pub initiator_rules: Vec<InfluenceRule>,
    pub responder_rules: Vec<InfluenceRule>,
    pub effects: BTreeMap<Response, Vec<Effect>>,
    pub scenes: BTreeMap<Response, SceneTemplate>,
    pub span: Span,
}

impl ExchangeDef {
    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EffectOp {
    Score {
        map: MapKind,
        network: String,
        from: Role,
        to: Role,
        delta: i64,
    },
    StatusAdd {
        who: Role,
        kind: String,
        at: Option<Role>,
        duration: Option<u32>,
    },
    StatusRemove {
        who: Role,
        kind: String,
    },
    Relationship {
        kind: String,
        a: Role,
        b: Role,
        active: bool,
    },
}

impl EffectOp {
    pub fn roles(&self) -> Vec<Role> {
        match self {
            EffectOp::Score { from, to, .. } => vec![*from, *to],
            EffectOp::StatusAdd { who, at, .. } => std::iter::once(*who).chain(*at).collect(),
            EffectOp::StatusRemove { who, .. } => vec![*who],
            EffectOp::Relationship { a, b, .. } => vec![*a, *b],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Effect {
    pub op: EffectOp,
    pub span: Span,
}

/// Lines for the three scene phases; `{initiator}`, `{target}` and
/// `{subject}` are replaced by display names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneTemplate {
    pub goto: Option<String>,
    pub perform: String,
    pub respond: String,
    pub span: Span,
}

pub const PLACEHOLDERS: [&str; 3] = ["initiator", "target", "subject"];

/// Every `{name}` placeholder in a template line.
pub fn placeholders(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = line;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                out.push(&after[..close]);
                rest = &after[close + 1..];
            }
            None => break,
        }
    }
    out
}

pub fn render_line(line: &str, initiator: &str, target: &str, subject: Option<&str>) -> String {
    let mut s = line.replace("{initiator}", initiator).replace("{target}", target);
    if let Some(subject) = subject {
        s = s.replace("{subject}", subject);
    }
    s
}

/// Checked only when an exchange ends. `initiator` and `target` are bound to
/// every ordered pair of characters at the player's location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerRule {
    pub id: String,
    pub when: Condition,
    pub effects: Vec<Effect>,
    pub span: Span,
}

/// Trigger evaluation stops with an error after this many passes.
pub const MAX_TRIGGER_PASSES: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Stage {
    Waiting,
    Bound,
    Resolved,
    Succeeded,
    Failed,
    Errored,
}

impl Stage {
    pub fn code(self) -> i8 {
        match self {
            Stage::Waiting => 0,
            Stage::Bound => 1,
            Stage::Resolved => 2,
            Stage::Succeeded => 3,
            Stage::Failed => 4,
            Stage::Errored => -1,
        }
    }

    pub fn from_code(code: i8) -> Option<Self> {
        Some(match code {
            0 => Stage::Waiting,
            1 => Stage::Bound,
            2 => Stage::Resolved,
            3 => Stage::Succeeded,
            4 => Stage::Failed,
            -1 => Stage::Errored,
            _ => return None,
        })
    }

    /// The lifecycle's transition relation.
    pub fn can_move_to(self, next: Stage) -> bool {
        matches!(
            (self, next),
            (Stage::Waiting, Stage::Bound)
                | (Stage::Bound, Stage::Resolved)
                | (Stage::Resolved, Stage::Succeeded)
                | (Stage::Resolved, Stage::Failed)
                | (Stage::Errored, Stage::Waiting)
        ) || (next == Stage::Errored && self != Stage::Errored)
    }

    pub fn for_response(r: Response) -> Stage {
        match r {
            Response::Accept => Stage::Succeeded,
            Response::Neutral | Response::Reject => Stage::Failed,
        }
    }
}

impl From<Stage> for i8 {
    fn from(s: Stage) -> i8 {
        s.code()
    }
}

impl TryFrom<i8> for Stage {
    type Error = String;

    fn try_from(code: i8) -> Result<Self, Self::Error> {
        Stage::from_code(code).ok_or_else(|| format!("no stage {code}"))
    }
}

/// One running exchange.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestInstance {
    pub id: u64,
    pub exchange: String,
    pub initiator: Option<CharacterId>,
    pub target: Option<CharacterId>,
    pub subject: Option<CharacterId>,
    pub stage: Stage,
    pub result: Option<Response>,
    pub awaiting_player: bool,
    /// Every stage the quest has been in, in order.
    pub trail: Vec<Stage>,
}

impl QuestInstance {
    pub fn new(id: u64, exchange: &str) -> Self {
        QuestInstance {
            id,
            exchange: exchange.to_string(),
            initiator: None,
            target: None,
            subject: None,
            stage: Stage::Waiting,
            result: None,
            awaiting_player: false,
            trail: vec![Stage::Waiting],
        }
    }

    /// Moves to `next`, refusing transitions outside the lifecycle.
    pub fn advance(&mut self, next: Stage) -> Result<(), (Stage, Stage)> {
        if !self.stage.can_move_to(next) {
            return Err((self.stage, next));
        }
        self.stage = next;
        self.trail.push(next);
        Ok(())
    }

    pub fn bind(&mut self, initiator: &CharacterId, target: &CharacterId, subject: Option<&CharacterId>) -> Result<(), (Stage, Stage)> {
        self.advance(Stage::Bound)?;
        self.initiator = Some(initiator.clone());
        self.target = Some(target.clone());
        self.subject = subject.cloned();
        Ok(())
    }

    /// Fails the quest and resets it so the same instance can run again.
    pub fn abort(&mut self) {
        if self.stage != Stage::Errored {
            self.stage = Stage::Errored;
            self.trail.push(Stage::Errored);
        }
        self.stage = Stage::Waiting;
        self.trail.push(Stage::Waiting);
        self.initiator = None;
        self.target = None;
        self.subject = None;
        self.result = None;
        self.awaiting_player = false;
    }
}

// --- running quests --------------------------------------------------------

impl Session {
    fn new_quest(&mut self, exchange: &str) -> QuestInstance {
        let q = QuestInstance::new(self.next_quest, exchange);
        self.next_quest += 1;
        q
    }

    /// Runs one queue entry: start, resolve, and unless the player must
    /// answer, the scene and completion.
    pub(crate) fn run_quest(&mut self, entry: QueueEntry) {
        let mut q = self.new_quest(&entry.exchange);
        if let Err((code, msg)) = self.start_quest(&mut q, &entry) {
            self.abort_quest(q, Some((&entry.initiator, &entry.target)), code, msg);
            return;
        }
        self.advance_to_performance(q);
    }

    /// Stage 0 to 1: checks the request and binds the aliases.
    fn start_quest(&mut self, q: &mut QuestInstance, entry: &QueueEntry) -> Result<(), (&'static str, String)> {
        let doc = Arc::clone(&self.doc);
        let ex = doc
            .exchanges
            .get(&entry.exchange)
            .ok_or(("unknown_exchange", format!("unknown exchange {}", entry.exchange)))?;
        if entry.initiator == entry.target {
            return Err(("self_target", format!("{} cannot target itself", entry.initiator)));
        }
        for who in [Some(&entry.initiator), Some(&entry.target), entry.subject.as_ref()].into_iter().flatten() {
            if !self.is_here(who) {
                return Err(("not_co_located", format!("{who} is not at the player's location")));
            }
        }
        let b = entry.bindings();
        if !volition::roles_fit(ex, &b) {
            return Err(("invalid_roles", format!("roles do not fit {}", ex.id)));
        }
        match volition::first_failing(&ex.preconditions, &self.state, &b) {
            Ok(None) => {}
            Ok(Some(lit)) => return Err(("precondition_failed", dsl::literal_text(lit))),
            Err(e) => return Err(("eval_error", e.to_string())),
        }
        q.bind(&entry.initiator, &entry.target, entry.subject.as_ref())
            .map_err(|(a, b)| ("illegal_transition", format!("{} -> {}", a.code(), b.code())))?;
        self.emit(EventBody::ExchangeStarted {
            quest: q.id,
            stage: q.stage.code(),
            exchange: q.exchange.clone(),
            initiator: entry.initiator.clone(),
            target: entry.target.clone(),
            subject: entry.subject.clone(),
        });
        Ok(())
    }

    /// Stage 1 to 2: the result is fixed before any scene line. A player
    /// target gets a prompt instead and the quest waits.
    fn advance_to_performance(&mut self, mut q: QuestInstance) {
        if q.advance(Stage::Resolved).is_err() {
            self.abort_bound(q, "illegal_transition", "quest is not bound".into());
            return;
        }
        let (initiator, target, subject) = aliases(&q);
        if target == self.player {
            q.awaiting_player = true;
            self.emit(EventBody::PlayerPrompt {
                quest: q.id,
                stage: q.stage.code(),
                exchange: q.exchange.clone(),
                initiator,
                subject,
            });
            self.pending = Some(q);
            return;
        }
        let doc = Arc::clone(&self.doc);
        let ex = &doc.exchanges[&q.exchange];
        let b = Bindings::pair(&initiator, &target).with_subject(subject.as_ref());
        match volition::responder_response(ex, &self.state, &b, &mut self.dice) {
            Ok(res) => {
                q.result = Some(res.response);
                self.emit(EventBody::ResultComputed {
                    quest: q.id,
                    stage: q.stage.code(),
                    total: res.breakdown.total,
                    outcome: res.response,
                });
                self.finish_quest(q);
            }
            Err(e) => self.abort_bound(q, "eval_error", e.to_string()),
        }
    }

    /// Scene, then completion, for a quest whose result is known.
    pub(crate) fn finish_quest(&mut self, q: QuestInstance) {
        match self.run_scene(&q) {
            Ok(()) => self.complete_quest(q),
            Err(msg) => self.abort_bound(q, "missing_scene", msg),
        }
    }

    /// Go-to, performance and response lines. Presentation only.
    fn run_scene(&mut self, q: &QuestInstance) -> Result<(), String> {
        let result = q.result.ok_or("quest has no result")?;
        let doc = Arc::clone(&self.doc);
        let scene = doc.exchanges[&q.exchange]
            .scenes
            .get(&result)
            .ok_or_else(|| format!("{} has no {result} scene", q.exchange))?;
        let (initiator, target, subject) = aliases(q);
        let names = (
            self.display_name(&initiator),
            self.display_name(&target),
            subject.as_ref().map(|s| self.display_name(s)),
        );
        let render = |line: &str| render_line(line, &names.0, &names.1, names.2.as_deref());
        let goto = scene.goto.as_deref().unwrap_or(DEFAULT_GOTO);
        self.emit(EventBody::SceneGoTo {
            quest: q.id,
            initiator: initiator.clone(),
            target: target.clone(),
            text: render(goto),
        });
        self.emit(EventBody::SceneLine {
            quest: q.id,
            phase: ScenePhase::Performance,
            speaker: initiator,
            text: render(&scene.perform),
        });
        self.emit(EventBody::SceneLine {
            quest: q.id,
            phase: ScenePhase::Response,
            speaker: target,
            text: render(&scene.respond),
        });
        Ok(())
    }

    /// Stage 2 to 3 or 4: effects, history, trigger rules, notification.
    fn complete_quest(&mut self, mut q: QuestInstance) {
        let Some(result) = q.result else {
            self.abort_bound(q, "no_result", "quest completed without a result".into());
            return;
        };
        let doc = Arc::clone(&self.doc);
        let effects = doc.exchanges[&q.exchange].effects.get(&result).map(Vec::as_slice).unwrap_or(&[]);
        let (initiator, target, subject) = aliases(&q);
        let b = Bindings::pair(&initiator, &target).with_subject(subject.as_ref());
        let changes = match self.apply_effects(effects, &b) {
            Ok(changes) => changes,
            Err(msg) => {
                self.abort_bound(q, "effect_failed", msg);
                return;
            }
        };
        if q.advance(Stage::for_response(result)).is_err() {
            self.abort_bound(q, "illegal_transition", "quest is not resolved".into());
            return;
        }
        self.emit(EventBody::ExchangeCompleted {
            quest: q.id,
            stage: q.stage.code(),
            exchange: q.exchange.clone(),
            initiator: initiator.clone(),
            target: target.clone(),
            subject,
            outcome: result.into(),
        });
        let record = self.state.record_exchange(ExchangeHistoryRecord {
            tick: self.tick,
            exchange: q.exchange.clone(),
            initiator,
            target,
            outcome: result.into(),
        });
        for change in changes {
            self.emit(EventBody::StateDelta { change });
        }
        self.run_trigger_rules();
        self.notify_completion(q.id, record);
        self.finished.push(q);
    }

    /// Applies every effect or none of them.
    fn apply_effects(&mut self, effects: &[Effect], b: &Bindings) -> Result<Vec<StateChange>, String> {
        let mut scratch = self.state.clone();
        scratch.take_changes();
        for e in effects {
            apply_effect(&mut scratch, &e.op, b).map_err(|e| e.to_string())?;
        }
        let changes = scratch.take_changes();
        self.state = scratch;
        Ok(changes)
    }

    /// Evaluates trigger rules in passes over every ordered pair of
    /// characters at the player's location until a pass fires nothing.
    /// Each (rule, pair) fires at most once per call.
    pub(crate) fn run_trigger_rules(&mut self) -> Vec<(String, CharacterId, CharacterId)> {
        let doc = Arc::clone(&self.doc);
        let here = self.here();
        let mut done: BTreeSet<(usize, CharacterId, CharacterId)> = BTreeSet::new();
        let mut fired = Vec::new();
        for pass in 1..=MAX_TRIGGER_PASSES + 1 {
            let mut any = false;
            for (i, rule) in doc.triggers.iter().enumerate() {
                for a in &here {
                    for t in &here {
                        if a == t || done.contains(&(i, a.clone(), t.clone())) {
                            continue;
                        }
                        let b = Bindings::pair(a, t);
                        match volition::eval_condition(&rule.when, &self.state, &b) {
                            Ok(true) => {}
                            Ok(false) => continue,
                            Err(e) => {
                                done.insert((i, a.clone(), t.clone()));
                                self.error_event(None, None, "trigger_error", format!("{}: {e}", rule.id));
                                continue;
                            }
                        }
                        if pass > MAX_TRIGGER_PASSES {
                            self.error_event(
                                None,
                                None,
                                "trigger_cascade",
                                format!("trigger rules still firing after {MAX_TRIGGER_PASSES} passes"),
                            );
                            return fired;
                        }
                        done.insert((i, a.clone(), t.clone()));
                        any = true;
                        match self.apply_effects(&rule.effects, &b) {
                            Ok(changes) => {
                                self.emit(EventBody::TriggerFired {
                                    rule: rule.id.clone(),
                                    initiator: a.clone(),
                                    target: t.clone(),
                                    pass,
                                });
                                for change in changes {
                                    self.emit(EventBody::StateDelta { change });
                                }
                                fired.push((rule.id.clone(), a.clone(), t.clone()));
                            }
                            Err(msg) => self.error_event(None, None, "effect_failed", format!("{}: {msg}", rule.id)),
                        }
                    }
                }
            }
            if !any {
                break;
            }
        }
        fired
    }

    /// Tells every NPC at the player's location what happened.
    fn notify_completion(&mut self, quest: u64, record: usize) {
        for npc in self.npcs_here() {
            self.state.witness(&npc, record);
            self.emit(EventBody::Notified { npc: npc.clone(), quest });
            self.desires.remove(&npc);
        }
    }

    fn abort_bound(&mut self, q: QuestInstance, code: &str, message: String) {
        let (i, t, _) = aliases(&q);
        self.abort_quest(q, Some((&i, &t)), code, message);
    }

    /// Stage -1 then reset to 0. No effects are applied; an `Error`
    /// history record is kept and trigger rules still run.
    pub(crate) fn abort_quest(
        &mut self,
        mut q: QuestInstance,
        participants: Option<(&CharacterId, &CharacterId)>,
        code: &str,
        message: String,
    ) {
        let stage = q.stage.code();
        q.abort();
        self.error_event(Some(q.id), Some(stage), code, message);
        if let Some((initiator, target)) = participants {
            self.state.record_exchange(ExchangeHistoryRecord {
                tick: self.tick,
                exchange: q.exchange.clone(),
                initiator: initiator.clone(),
                target: target.clone(),
                outcome: Outcome::Error,
            });
        }
        self.run_trigger_rules();
        self.desires.clear();
        self.finished.push(q);
    }
}

const DEFAULT_GOTO: &str = "{initiator} walks over to {target}.";

fn aliases(q: &QuestInstance) -> (CharacterId, CharacterId, Option<CharacterId>) {
    let unbound = || CharacterId::new("");
    (
        q.initiator.clone().unwrap_or_else(unbound),
        q.target.clone().unwrap_or_else(unbound),
        q.subject.clone(),
    )
}

/// Applies one effect to `state` with roles resolved through `b`.
pub fn apply_effect(state: &mut SocialState, op: &EffectOp, b: &Bindings) -> Result<(), EvalError> {
    match op {
        EffectOp::Score { map, network, from, to, delta } => {
            state.apply_score_delta(*map, network, b.get(*from)?, b.get(*to)?, *delta)?;
        }
        EffectOp::StatusAdd { who, kind, at, duration } => {
            let at = at.map(|r| b.get(r)).transpose()?;
            state.add_status(b.get(*who)?, kind, at, *duration)?;
        }
        EffectOp::StatusRemove { who, kind } => state.remove_status(b.get(*who)?, kind)?,
        EffectOp::Relationship { kind, a, b: other, active } => {
            state.set_relationship(kind, b.get(*a)?, b.get(*other)?, *active)?;
        }
    }
    Ok(())
}
