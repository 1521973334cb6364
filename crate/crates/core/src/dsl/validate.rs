//! Semantic checks: symbol closure, per-character invariants, exchange
//! completeness, role and context rules, and static contradictions.

use std::collections::BTreeSet;

use super::diagnostic::{Diagnostic, DiagnosticCode as Code, Span};
use super::ScenarioDoc;
use crate::exchange::{placeholders, Effect, EffectOp, PLACEHOLDERS};
use crate::model::{Orientation, Response};
use crate::volition::{Atom, Condition, InfluenceRule, Role, TraitRef, WeightTerm};

/// What a condition or effect may refer to where it appears.
#[derive(Clone, Copy)]
struct Ctx {
    subject: bool,
    volition: bool,
    chance: bool,
    each_trait: bool,
}

const PRECONDITION: Ctx = Ctx { subject: false, volition: false, chance: false, each_trait: false };

struct Checker<'d> {
    doc: &'d ScenarioDoc,
    out: Vec<Diagnostic>,
}

pub(crate) fn validate(doc: &ScenarioDoc) -> Vec<Diagnostic> {
    let mut c = Checker { doc, out: Vec::new() };
    c.networks();
    c.characters();
    c.exchanges();
    c.goal_blocks();
    c.triggers();
    c.out
}

impl Checker<'_> {
    fn push(&mut self, code: Code, span: Span, msg: impl Into<String>) {
        self.out.push(Diagnostic::new(code, span, msg));
    }

    fn networks(&mut self) {
        for (name, n) in &self.doc.networks {
            let r = n.range;
            if r.min > r.max {
                self.push(Code::ValueOutOfRange, n.span, format!("network {name} has range {} > {}", r.min, r.max));
            } else if !r.contains(r.default) {
                self.push(Code::ValueOutOfRange, n.span, format!("default {} of network {name} is outside its range", r.default));
            }
        }
    }

    fn characters(&mut self) {
        let doc = self.doc;
        let players: Vec<&String> = doc.characters.iter().filter(|(_, c)| c.player).map(|(id, _)| id).collect();
        if players.len() != 1 {
            let span = players
                .get(1)
                .and_then(|id| doc.characters.get(*id))
                .map(|c| c.span)
                .unwrap_or(Span::new(1, 1));
            self.push(Code::PlayerCount, span, format!("exactly one character must be the player, found {}", players.len()));
        }

        for (id, c) in &doc.characters {
            if Orientation::from_symbol(&c.orientation).is_none() {
                self.push(
                    Code::UnknownOrientation,
                    c.span,
                    format!("orientation {} of {id} is not one of {}", c.orientation, Orientation::SYMBOLS.join(", ")),
                );
            }
            if c.location.is_empty() {
                self.push(Code::UndeclaredLocation, c.span, format!("character {id} has no location"));
            } else if !doc.locations.contains_key(&c.location) {
                self.push(Code::UndeclaredLocation, c.span, format!("undeclared location {}", c.location));
            }
            for (t, span) in c.traits.iter().chain(&c.likes).chain(&c.dislikes) {
                if !doc.traits.contains_key(t) {
                    self.push(Code::UndeclaredTrait, *span, format!("undeclared trait {t}"));
                }
            }
            for (t, span) in &c.likes {
                if c.dislikes.contains_key(t) {
                    self.push(Code::LikesDislikesOverlap, *span, format!("{id} both likes and dislikes {t}"));
                }
            }
            for ((map, net, other), (v, span)) in &c.scores {
                match doc.networks.get(net) {
                    None => self.push(Code::UndeclaredNetwork, *span, format!("undeclared network {net}")),
                    Some(n) if !n.range.contains(*v) => self.push(
                        Code::ValueOutOfRange,
                        *span,
                        format!("{} {net} {v} is outside [{}, {}]", map.as_str(), n.range.min, n.range.max),
                    ),
                    _ => {}
                }
                self.other_character(id, other.as_str(), *span);
            }
            for ((kind, target), span) in &c.statuses {
                match doc.statuses.get(kind) {
                    None => self.push(Code::UndeclaredStatus, *span, format!("undeclared status {kind}")),
                    Some(s) if s.targeted != target.is_some() => self.push(Code::StatusTarget, *span, status_target_msg(kind, s.targeted)),
                    _ => {}
                }
                if let Some(t) = target {
                    self.other_character(id, t.as_str(), *span);
                }
            }
            for ((kind, other), span) in &c.relationships {
                if !doc.relationships.contains_key(kind) {
                    self.push(Code::UndeclaredRelationship, *span, format!("undeclared relationship {kind}"));
                }
                self.other_character(id, other.as_str(), *span);
            }
        }
    }

    fn other_character(&mut self, owner: &str, other: &str, span: Span) {
        if !self.doc.characters.contains_key(other) {
            self.push(Code::UndeclaredCharacter, span, format!("undeclared character {other}"));
        } else if owner == other {
            self.push(Code::SelfReference, span, format!("{owner} cannot refer to itself here"));
        }
    }

    fn exchanges(&mut self) {
        let doc = self.doc;
        for (id, ex) in &doc.exchanges {
            if ex.intent.is_empty() {
                self.push(Code::UndeclaredNetwork, ex.span, format!("exchange {id} has no intent network"));
            } else if !doc.networks.contains_key(&ex.intent) {
                self.push(Code::UndeclaredNetwork, ex.span, format!("undeclared network {}", ex.intent));
            }
            let base = Ctx { subject: ex.subject, ..PRECONDITION };
            self.condition(&ex.preconditions, base);
            self.rules(&ex.initiator_rules, Ctx { volition: true, ..base });
            self.rules(&ex.responder_rules, Ctx { volition: true, chance: true, ..base });
            for r in Response::ALL {
                match ex.effects.get(&r) {
                    None => self.push(Code::MissingEffects, ex.span, format!("exchange {id} has no `on {r}` block")),
                    Some(effects) => self.effects(effects, base),
                }
                match ex.scenes.get(&r) {
                    None => self.push(Code::MissingScene, ex.span, format!("exchange {id} has no `scene {r}` block")),
                    Some(scene) => {
                        let lines = scene.goto.iter().chain([&scene.perform, &scene.respond]);
                        for line in lines {
                            for p in placeholders(line) {
                                let known = PLACEHOLDERS.contains(&p) && (p != "subject" || ex.subject);
                                if !known {
                                    self.push(Code::UnknownPlaceholder, scene.span, format!("unknown placeholder {{{p}}}"));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    fn goal_blocks(&mut self) {
        for (net, block) in &self.doc.goal_blocks {
            if !self.doc.networks.contains_key(net) {
                self.push(Code::UndeclaredNetwork, block.span, format!("undeclared network {net}"));
            }
            self.rules(&block.rules, Ctx { volition: true, ..PRECONDITION });
        }
    }

    fn triggers(&mut self) {
        for t in &self.doc.triggers {
            self.condition(&t.when, PRECONDITION);
            self.effects(&t.effects, PRECONDITION);
        }
    }

    fn rules(&mut self, rules: &[InfluenceRule], ctx: Ctx) {
        let mut seen = BTreeSet::new();
        for r in rules {
            if !seen.insert(r.id.as_str()) {
                self.push(Code::DuplicateSymbol, r.span, format!("rule {} is declared twice in this list", r.id));
            }
            if let WeightTerm::Score { network, from, to, .. } = &r.weight {
                self.network(network, r.span);
                self.roles(&[*from, *to], ctx, r.span);
                if from == to {
                    self.push(Code::SelfReference, r.span, "a score weight needs two different roles");
                }
            }
            self.condition(&r.when, Ctx { each_trait: r.per_trait, ..ctx });
        }
    }

    fn network(&mut self, net: &str, span: Span) {
        if !self.doc.networks.contains_key(net) {
            self.push(Code::UndeclaredNetwork, span, format!("undeclared network {net}"));
        }
    }

    fn roles(&mut self, roles: &[Role], ctx: Ctx, span: Span) {
        if roles.contains(&Role::Subject) && !ctx.subject {
            self.push(Code::RoleUnavailable, span, "`subject` is only bound in exchanges declared with `subject`");
        }
    }

    fn trait_ref(&mut self, t: &TraitRef, ctx: Ctx, span: Span) {
        match t {
            TraitRef::Each if !ctx.each_trait => {
                self.push(Code::RoleUnavailable, span, "`trait` is only bound in per-trait rules");
            }
            TraitRef::Named(name) if !self.doc.traits.contains_key(name) => {
                self.push(Code::UndeclaredTrait, span, format!("undeclared trait {name}"));
            }
            _ => {}
        }
    }

    fn exchange_ref(&mut self, ex: &str, span: Span) {
        if !self.doc.exchanges.contains_key(ex) {
            self.push(Code::UndeclaredExchange, span, format!("undeclared exchange {ex}"));
        }
    }

    fn condition(&mut self, cond: &Condition, ctx: Ctx) {
        for (i, lit) in cond.literals.iter().enumerate() {
            let span = lit.span;
            match &lit.atom {
                Atom::True | Atom::Same(_) | Atom::Different(_) => {}
                Atom::HasTrait(role, t) | Atom::Likes(role, t) | Atom::Dislikes(role, t) => {
                    self.roles(&[*role], ctx, span);
                    self.trait_ref(t, ctx, span);
                }
                Atom::OtherHas(t) => self.trait_ref(t, ctx, span),
                Atom::HasStatus { who, kind, at } => {
                    self.roles(&[*who], ctx, span);
                    match self.doc.statuses.get(kind) {
                        None => self.push(Code::UndeclaredStatus, span, format!("undeclared status {kind}")),
                        Some(s) if at.is_some() && !s.targeted => {
                            self.push(Code::StatusTarget, span, status_target_msg(kind, false))
                        }
                        _ => {}
                    }
                    if let Some(at) = at {
                        self.roles(&[*at], ctx, span);
                        if at == who {
                            self.push(Code::SelfReference, span, "a status cannot target its holder");
                        }
                    }
                }
                Atom::Score { network, from, to, .. } => {
                    self.network(network, span);
                    self.roles(&[*from, *to], ctx, span);
                    if from == to {
                        self.push(Code::SelfReference, span, "a score needs two different roles");
                    }
                }
                Atom::Relationship { kind, a, b } => {
                    if !self.doc.relationships.contains_key(kind) {
                        self.push(Code::UndeclaredRelationship, span, format!("undeclared relationship {kind}"));
                    }
                    self.roles(&[*a, *b], ctx, span);
                    if a == b {
                        self.push(Code::SelfReference, span, "a relationship needs two different roles");
                    }
                }
                Atom::OrientationCompatible(a, b) => {
                    self.roles(&[*a, *b], ctx, span);
                    if a == b {
                        self.push(Code::SelfReference, span, "orientation_compatible needs two different roles");
                    }
                }
                Atom::History { exchange, initiator, target, .. } => {
                    self.exchange_ref(exchange, span);
                    self.roles(&[*initiator, *target], ctx, span);
                    if initiator == target {
                        self.push(Code::SelfReference, span, "history needs two different roles");
                    }
                }
                Atom::Witnessed { observer, exchange, about, .. } => {
                    self.exchange_ref(exchange, span);
                    self.roles(&[*observer, *about], ctx, span);
                }
                Atom::Volition { .. } => {
                    if !ctx.volition {
                        self.push(Code::MisplacedVolition, span, "`volition` is only available inside rule lists");
                    }
                }
                Atom::Chance(_) => {
                    if !ctx.chance {
                        self.push(Code::MisplacedChance, span, "`chance` is only allowed in responder rules");
                    }
                }
            }
            if lit.negated && lit.atom == Atom::True {
                self.push(Code::UnsatisfiableCondition, span, "`not true` can never hold");
            }
            let contradicted = cond.literals[..i]
                .iter()
                .any(|prev| prev.atom == lit.atom && prev.negated != lit.negated);
            if contradicted {
                self.push(Code::UnsatisfiableCondition, span, "condition contradicts an earlier literal and can never hold");
            }
        }
    }

    fn effects(&mut self, effects: &[Effect], ctx: Ctx) {
        for e in effects {
            let span = e.span;
            self.roles(&e.op.roles(), ctx, span);
            match &e.op {
                EffectOp::Score { network, from, to, .. } => {
                    self.network(network, span);
                    if from == to {
                        self.push(Code::SelfReference, span, "a score effect needs two different roles");
                    }
                }
                EffectOp::StatusAdd { who, kind, at, .. } => match self.doc.statuses.get(kind) {
                    None => self.push(Code::UndeclaredStatus, span, format!("undeclared status {kind}")),
                    Some(s) => {
                        if s.targeted != at.is_some() {
                            self.push(Code::StatusTarget, span, status_target_msg(kind, s.targeted));
                        }
                        if at.as_ref() == Some(who) {
                            self.push(Code::SelfReference, span, "a status cannot target its holder");
                        }
                    }
                },
                EffectOp::StatusRemove { kind, .. } => {
                    if !self.doc.statuses.contains_key(kind) {
                        self.push(Code::UndeclaredStatus, span, format!("undeclared status {kind}"));
                    }
                }
                EffectOp::Relationship { kind, a, b, .. } => {
                    if !self.doc.relationships.contains_key(kind) {
                        self.push(Code::UndeclaredRelationship, span, format!("undeclared relationship {kind}"));
                    }
                    if a == b {
                        self.push(Code::SelfReference, span, "a relationship needs two different roles");
                    }
                }
            }
        }
    }
}

fn status_target_msg(kind: &str, targeted: bool) -> String {
    if targeted {
        format!("status {kind} needs a target")
    } else {
        format!("status {kind} does not take a target")
    }
}
