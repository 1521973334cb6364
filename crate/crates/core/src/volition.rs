//! Volition scoring: ordered influence rules, goal formation, prospective
//! memory and action choice.
//!
//! Rules are evaluated strictly in declaration order. A rule may test the
//! running total (`volition > 0`), which is what lets an ordered rule list
//! express "add 2 if the score so far is positive". Without such a rule the
//! result is a plain sum of fired weights and order does not matter.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{ScenarioDoc, Span};
use crate::exchange::ExchangeDef;
use crate::model::{CharacterId, MapKind, ModelError, OutcomeFilter, Response, SocialState};

/// Acceptance threshold used when an exchange does not declare one.
pub const DEFAULT_ACCEPT_ABOVE: i64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Initiator,
    Target,
    Subject,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Initiator => "initiator",
            Role::Target => "target",
            Role::Subject => "subject",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        match s {
            "initiator" => Some(Role::Initiator),
            "target" => Some(Role::Target),
            "subject" => Some(Role::Subject),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

/// A trait named directly, or the trait bound by a `per trait` rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TraitRef {
    Named(String),
    Each,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Attr {
    Race,
    Gender,
}

impl Attr {
    pub fn as_str(self) -> &'static str {
        match self {
            Attr::Race => "race",
            Attr::Gender => "gender",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    True,
    HasTrait(Role, TraitRef),
    Likes(Role, TraitRef),
    Dislikes(Role, TraitRef),
    /// Shorthand for `has_trait(target, ..)`.
    OtherHas(TraitRef),
    HasStatus {
        who: Role,
        kind: String,
        at: Option<Role>,
    },
    Score {
        map: MapKind,
        network: String,
        from: Role,
        to: Role,
        op: CmpOp,
        threshold: i64,
    },
    Relationship {
        kind: String,
        a: Role,
        b: Role,
    },
    Same(Attr),
    Different(Attr),
    OrientationCompatible(Role, Role),
    History {
        exchange: String,
        outcomes: OutcomeFilter,
        initiator: Role,
        target: Role,
        op: CmpOp,
        count: i64,
    },
    /// Records known to `observer` in which `about` was the initiator.
    Witnessed {
        observer: Role,
        exchange: String,
        outcomes: OutcomeFilter,
        about: Role,
        op: CmpOp,
        count: i64,
    },
    /// The running total of the rule list being evaluated.
    Volition { op: CmpOp, threshold: i64 },
    /// True with the given percent chance; responder rules only.
    Chance(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub negated: bool,
    pub atom: Atom,
    pub span: Span,
}

impl Literal {
    pub fn positive(atom: Atom) -> Self {
        Literal { negated: false, atom, span: Span::default() }
    }

    pub fn negative(atom: Atom) -> Self {
        Literal { negated: true, atom, span: Span::default() }
    }
}

/// A conjunction of literals; empty means `true`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Condition {
    pub literals: Vec<Literal>,
}

impl Condition {
    pub fn always() -> Self {
        Condition::default()
    }

    pub fn all(literals: Vec<Literal>) -> Self {
        Condition { literals }
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.literals.iter().map(|l| &l.atom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum WeightTerm {
    Constant(i64),
    Score {
        map: MapKind,
        network: String,
        from: Role,
        to: Role,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InfluenceRule {
    pub id: String,
    pub weight: WeightTerm,
    /// Fire once per trait the target has.
    pub per_trait: bool,
    pub when: Condition,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contribution {
    pub rule: String,
    pub fired: bool,
    pub amount: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub traits: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VolitionBreakdown {
    pub total: i64,
    pub contributions: Vec<Contribution>,
}

impl fmt::Display for VolitionBreakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.contributions {
            let mark = if c.fired { '+' } else { ' ' };
            write!(f, "{mark} {:<24} {:>6}", c.rule, c.amount)?;
            if !c.traits.is_empty() {
                write!(f, "  [{}]", c.traits.join(", "))?;
            }
            writeln!(f)?;
        }
        write!(f, "  {:<24} {:>6}", "total", self.total)
    }
}

/// Concrete characters bound to the roles of a rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bindings {
    pub initiator: CharacterId,
    pub target: CharacterId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<CharacterId>,
}

impl Bindings {
    pub fn pair(initiator: &CharacterId, target: &CharacterId) -> Self {
        Bindings { initiator: initiator.clone(), target: target.clone(), subject: None }
    }

    pub fn with_subject(mut self, subject: Option<&CharacterId>) -> Self {
        self.subject = subject.cloned();
        self
    }

    pub fn get(&self, role: Role) -> Result<&CharacterId, EvalError> {
        match role {
            Role::Initiator => Ok(&self.initiator),
            Role::Target => Ok(&self.target),
            Role::Subject => self.subject.as_ref().ok_or(EvalError::UnboundRole(Role::Subject)),
        }
    }
}

/// A ranked desire in an NPC's prospective memory.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DesireEntry {
    pub exchange: String,
    pub target: CharacterId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<CharacterId>,
    pub volition: i64,
}

impl DesireEntry {
    /// Highest volition first; ties by exchange, then target, then subject.
    pub fn rank(a: &DesireEntry, b: &DesireEntry) -> Ordering {
        b.volition
            .cmp(&a.volition)
            .then_with(|| a.exchange.cmp(&b.exchange))
            .then_with(|| a.target.cmp(&b.target))
            .then_with(|| a.subject.cmp(&b.subject))
    }
}

/// Source of percent rolls for `chance(..)` conditions.
pub trait Dice {
    /// A uniform draw in `0..100`, or `None` when randomness is unavailable.
    fn percent(&mut self) -> Option<u32>;
}

/// Used for pure evaluation; any `chance` condition is an error.
pub struct NoDice;

impl Dice for NoDice {
    fn percent(&mut self) -> Option<u32> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("role {} is not bound", .0.as_str())]
    UnboundRole(Role),
    #[error("`trait` used outside a per-trait rule")]
    UnboundTrait,
    #[error("running volition is only available inside rule lists")]
    NoRunningTotal,
    #[error("chance() needs a random source")]
    NoRandomness,
    #[error("unknown exchange {0}")]
    UnknownExchange(String),
}

struct Scope<'a> {
    bound_trait: Option<&'a str>,
    running: Option<i64>,
}

fn resolve_trait<'a>(state: &SocialState, tref: &'a TraitRef, scope: &Scope<'a>) -> Result<&'a str, EvalError> {
    let t = match tref {
        TraitRef::Named(t) => t.as_str(),
        TraitRef::Each => scope.bound_trait.ok_or(EvalError::UnboundTrait)?,
    };
    if !state.has_trait_symbol(t) {
        return Err(ModelError::UnknownTrait(t.to_string()).into());
    }
    Ok(t)
}

fn character<'s>(state: &'s SocialState, id: &CharacterId) -> Result<&'s crate::model::Character, EvalError> {
    state
        .character(id)
        .ok_or_else(|| ModelError::UnknownCharacter(id.to_string()).into())
}

fn eval_atom<'a>(
    atom: &'a Atom,
    state: &SocialState,
    b: &Bindings,
    scope: &Scope<'a>,
    dice: &mut dyn Dice,
) -> Result<bool, EvalError> {
    Ok(match atom {
        Atom::True => true,
        Atom::HasTrait(role, t) => {
            let t = resolve_trait(state, t, scope)?;
            character(state, b.get(*role)?)?.traits.contains(t)
        }
        Atom::OtherHas(t) => {
            let t = resolve_trait(state, t, scope)?;
            character(state, &b.target)?.traits.contains(t)
        }
        Atom::Likes(role, t) => {
            let t = resolve_trait(state, t, scope)?;
            character(state, b.get(*role)?)?.likes.contains(t)
        }
        Atom::Dislikes(role, t) => {
            let t = resolve_trait(state, t, scope)?;
            character(state, b.get(*role)?)?.dislikes.contains(t)
        }
        Atom::HasStatus { who, kind, at } => {
            if state.status_kind(kind).is_none() {
                return Err(ModelError::UnknownStatus(kind.clone()).into());
            }
            let at = at.map(|r| b.get(r)).transpose()?;
            state.has_status(b.get(*who)?, kind, at)
        }
        Atom::Score { map, network, from, to, op, threshold } => {
            let v = state.score(*map, network, b.get(*from)?, b.get(*to)?)?;
            op.holds(v, *threshold)
        }
        Atom::Relationship { kind, a, b: other } => {
            if !state.has_relationship_kind(kind) {
                return Err(ModelError::UnknownRelationship(kind.clone()).into());
            }
            state.relationship(kind, b.get(*a)?, b.get(*other)?)
        }
        Atom::Same(attr) | Atom::Different(attr) => {
            let x = character(state, &b.initiator)?;
            let y = character(state, &b.target)?;
            let same = match attr {
                Attr::Race => x.race == y.race,
                Attr::Gender => x.gender == y.gender,
            };
            if matches!(atom, Atom::Same(_)) {
                same
            } else {
                !same
            }
        }
        Atom::OrientationCompatible(from, to) => {
            let x = character(state, b.get(*from)?)?;
            let y = character(state, b.get(*to)?)?;
            x.orientation.admits(&x.gender, &y.gender)
        }
        Atom::History { exchange, outcomes, initiator, target, op, count } => {
            if !state.has_exchange(exchange) {
                return Err(EvalError::UnknownExchange(exchange.clone()));
            }
            let n = state.history_count(exchange, b.get(*initiator)?, b.get(*target)?, *outcomes);
            op.holds(n as i64, *count)
        }
        Atom::Witnessed { observer, exchange, outcomes, about, op, count } => {
            if !state.has_exchange(exchange) {
                return Err(EvalError::UnknownExchange(exchange.clone()));
            }
            let about = b.get(*about)?;
            let n = state
                .known_history(b.get(*observer)?)
                .filter(|r| &r.exchange == exchange && &r.initiator == about && outcomes.contains(r.outcome))
                .count();
            op.holds(n as i64, *count)
        }
        Atom::Volition { op, threshold } => op.holds(scope.running.ok_or(EvalError::NoRunningTotal)?, *threshold),
        Atom::Chance(p) => dice.percent().ok_or(EvalError::NoRandomness)? < *p,
    })
}

fn eval_in_scope<'a>(
    cond: &'a Condition,
    state: &SocialState,
    b: &Bindings,
    scope: &Scope<'a>,
    dice: &mut dyn Dice,
) -> Result<bool, EvalError> {
    for lit in &cond.literals {
        if eval_atom(&lit.atom, state, b, scope, dice)? == lit.negated {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Evaluates a condition outside any rule list. Never mutates state.
pub fn eval_condition(cond: &Condition, state: &SocialState, b: &Bindings) -> Result<bool, EvalError> {
    eval_in_scope(cond, state, b, &Scope { bound_trait: None, running: None }, &mut NoDice)
}

/// The first literal of `cond` that does not hold, if any.
pub fn first_failing<'c>(cond: &'c Condition, state: &SocialState, b: &Bindings) -> Result<Option<&'c Literal>, EvalError> {
    let scope = Scope { bound_trait: None, running: None };
    for lit in &cond.literals {
        if eval_atom(&lit.atom, state, b, &scope, &mut NoDice)? == lit.negated {
            return Ok(Some(lit));
        }
    }
    Ok(None)
}

fn eval_weight(w: &WeightTerm, state: &SocialState, b: &Bindings) -> Result<i64, EvalError> {
    match w {
        WeightTerm::Constant(c) => Ok(*c),
        WeightTerm::Score { map, network, from, to } => Ok(state.score(*map, network, b.get(*from)?, b.get(*to)?)?),
    }
}

/// Evaluates an ordered rule list without randomness.
pub fn eval_rule_set(rules: &[InfluenceRule], state: &SocialState, b: &Bindings) -> Result<VolitionBreakdown, EvalError> {
    eval_rule_set_with(rules, state, b, &mut NoDice)
}

pub fn eval_rule_set_with(
    rules: &[InfluenceRule],
    state: &SocialState,
    b: &Bindings,
    dice: &mut dyn Dice,
) -> Result<VolitionBreakdown, EvalError> {
    let mut total: i64 = 0;
    let mut contributions = Vec::with_capacity(rules.len());
    for rule in rules {
        let mut amount: i64 = 0;
        let mut fired = false;
        let mut traits = Vec::new();
        if rule.per_trait {
            let target = character(state, &b.target)?;
            for t in &target.traits {
                let scope = Scope { bound_trait: Some(t.as_str()), running: Some(total) };
                if eval_in_scope(&rule.when, state, b, &scope, dice)? {
                    let w = eval_weight(&rule.weight, state, b)?;
                    amount = amount.saturating_add(w);
                    total = total.saturating_add(w);
                    fired = true;
                    traits.push(t.clone());
                }
            }
        } else {
            let scope = Scope { bound_trait: None, running: Some(total) };
            if eval_in_scope(&rule.when, state, b, &scope, dice)? {
                amount = eval_weight(&rule.weight, state, b)?;
                total = total.saturating_add(amount);
                fired = true;
            }
        }
        contributions.push(Contribution { rule: rule.id.clone(), fired, amount, traits });
    }
    Ok(VolitionBreakdown { total, contributions })
}

/// Checks the structural requirements (distinct participants, subject iff
/// the exchange needs one) and the exchange preconditions.
pub fn exchange_available(ex: &ExchangeDef, state: &SocialState, b: &Bindings) -> Result<bool, EvalError> {
    if !roles_fit(ex, b) {
        return Ok(false);
    }
    eval_condition(&ex.preconditions, state, b)
}

pub(crate) fn roles_fit(ex: &ExchangeDef, b: &Bindings) -> bool {
    if b.initiator == b.target {
        return false;
    }
    match (&b.subject, ex.subject) {
        (Some(s), true) => s != &b.initiator && s != &b.target,
        (None, false) => true,
        _ => false,
    }
}

/// The initiator's volition, or `None` when the exchange is unavailable.
pub fn initiator_volition(ex: &ExchangeDef, state: &SocialState, b: &Bindings) -> Result<Option<VolitionBreakdown>, EvalError> {
    if !exchange_available(ex, state, b)? {
        return Ok(None);
    }
    eval_rule_set(&ex.initiator_rules, state, b).map(Some)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub response: Response,
    pub breakdown: VolitionBreakdown,
}

/// Maps a responder total onto the three response flavors.
pub fn classify_response(total: i64, accept_above: i64) -> Response {
    if total > accept_above {
        Response::Accept
    } else if total >= 0 {
        Response::Neutral
    } else {
        Response::Reject
    }
}

/// How the target answers, from the responder rules.
pub fn responder_response(ex: &ExchangeDef, state: &SocialState, b: &Bindings, dice: &mut dyn Dice) -> Result<Resolution, EvalError> {
    let breakdown = eval_rule_set_with(&ex.responder_rules, state, b, dice)?;
    let response = classify_response(breakdown.total, ex.accept_above.unwrap_or(DEFAULT_ACCEPT_ABOVE));
    Ok(Resolution { response, breakdown })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalUpdate {
    pub owner: CharacterId,
    pub network: String,
    pub other: CharacterId,
    pub goal: i64,
}

/// Computes goal maps for every NPC at `location` toward every other
/// character there. Pure: the caller applies the updates.
pub fn form_goals(doc: &ScenarioDoc, state: &SocialState, location: &str) -> Result<Vec<GoalUpdate>, EvalError> {
    let present: Vec<&CharacterId> = state.characters_at(location).map(|c| &c.id).collect();
    let mut updates = Vec::new();
    for owner in state.characters_at(location).filter(|c| !c.player) {
        for other in present.iter().filter(|o| **o != &owner.id) {
            for (network, block) in &doc.goal_blocks {
                let range = state
                    .network_range(network)
                    .ok_or_else(|| ModelError::UnknownNetwork(network.clone()))?;
                let b = Bindings::pair(&owner.id, other);
                let total = eval_rule_set(&block.rules, state, &b)?.total;
                updates.push(GoalUpdate {
                    owner: owner.id.clone(),
                    network: network.clone(),
                    other: (*other).clone(),
                    goal: range.clamp(range.default.saturating_add(total)),
                });
            }
        }
    }
    Ok(updates)
}

/// Every positive-volition (exchange, target[, subject]) for `npc` among the
/// characters sharing its location, best first.
pub fn build_prospective_memory(doc: &ScenarioDoc, state: &SocialState, npc: &CharacterId) -> Result<Vec<DesireEntry>, EvalError> {
    let me = character(state, npc)?;
    let others: Vec<&CharacterId> = state
        .characters_at(&me.location)
        .map(|c| &c.id)
        .filter(|c| *c != npc)
        .collect();
    let mut entries = Vec::new();
    for (id, ex) in &doc.exchanges {
        for target in &others {
            let subjects: Vec<Option<&CharacterId>> = if ex.subject {
                others.iter().filter(|s| *s != target).map(|s| Some(*s)).collect()
            } else {
                vec![None]
            };
            for subject in subjects {
                let b = Bindings::pair(npc, target).with_subject(subject);
                if let Some(v) = initiator_volition(ex, state, &b)? {
                    if v.total > 0 {
                        entries.push(DesireEntry {
                            exchange: id.clone(),
                            target: (*target).clone(),
                            subject: subject.cloned(),
                            volition: v.total,
                        });
                    }
                }
            }
        }
    }
    entries.sort_by(DesireEntry::rank);
    Ok(entries)
}

/// The NPC's most wanted exchange, if it wants anything at all.
pub fn choose_action(doc: &ScenarioDoc, state: &SocialState, npc: &CharacterId) -> Result<Option<DesireEntry>, EvalError> {
    Ok(build_prospective_memory(doc, state, npc)?.into_iter().next())
}
