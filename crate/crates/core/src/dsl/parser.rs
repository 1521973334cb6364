//! Recursive-descent parser. On a syntax error the current declaration is
//! dropped and parsing resumes at the next top-level keyword.

use std::collections::BTreeMap;

use super::diagnostic::{Diagnostic, DiagnosticCode, Span};
use super::lexer::{Tok, Token};
use super::{CharacterDecl, GoalBlock, NetworkDecl, ScenarioDoc, StatusDecl, RESERVED};
use crate::exchange::{Effect, EffectOp, ExchangeDef, SceneTemplate, TriggerRule};
use crate::model::{CharacterId, MapKind, Outcome, OutcomeFilter, Response, ScoreRange};
use crate::volition::{Atom, Attr, CmpOp, Condition, InfluenceRule, Literal, Role, TraitRef, WeightTerm};

const TOP_LEVEL: &[&str] = &[
    "network",
    "trait",
    "status",
    "relationship",
    "location",
    "character",
    "exchange",
    "goals",
    "trigger",
];

type PResult<T> = Result<T, ()>;

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    depth: Vec<u32>,
    diags: Vec<Diagnostic>,
}

pub(crate) fn parse_tokens(tokens: &[Token]) -> (ScenarioDoc, Vec<Diagnostic>) {
    let mut depth = Vec::with_capacity(tokens.len());
    let mut d: u32 = 0;
    for t in tokens {
        match t.tok {
            Tok::LBrace => {
                depth.push(d);
                d = d.saturating_add(1);
            }
            Tok::RBrace => {
                d = d.saturating_sub(1);
                depth.push(d);
            }
            _ => depth.push(d),
        }
    }
    let mut p = Parser { toks: tokens, pos: 0, depth, diags: Vec::new() };
    let mut doc = ScenarioDoc::default();
    while p.pos < p.toks.len() {
        let start = p.pos;
        if p.declaration(&mut doc).is_err() {
            p.recover(start);
        }
    }
    (doc, p.diags)
}

impl<'t> Parser<'t> {
    // --- token helpers ----------------------------------------------------

    fn peek(&self) -> Option<&'t Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        match self.toks.get(self.pos) {
            Some(t) => t.span,
            None => self.toks.last().map(|t| t.span).unwrap_or(Span::new(1, 1)),
        }
    }

    fn bump(&mut self) {
        self.pos += 1;
    }

    fn recover(&mut self, start: usize) {
        self.pos = self.pos.max(start + 1);
        while let Some(t) = self.toks.get(self.pos) {
            if self.depth[self.pos] == 0 {
                if let Tok::Ident(s) = &t.tok {
                    if TOP_LEVEL.contains(&s.as_str()) {
                        return;
                    }
                }
            }
            self.pos += 1;
        }
    }

    fn report(&mut self, code: DiagnosticCode, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(code, span, msg));
    }

    fn unexpected<T>(&mut self, what: &str) -> PResult<T> {
        let span = self.span();
        match self.peek() {
            None => self.report(DiagnosticCode::UnexpectedEof, span, format!("expected {what}, found end of file")),
            Some(t) => self.report(DiagnosticCode::UnexpectedToken, span, format!("expected {what}, found {}", t.describe())),
        }
        Err(())
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.peek() == Some(&tok) {
            let s = self.span();
            self.bump();
            Ok(s)
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<Span> {
        if self.at_kw(kw) {
            let s = self.span();
            self.bump();
            Ok(s)
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let span = self.span();
                self.bump();
                Ok((s.clone(), span))
            }
            _ => self.unexpected(what),
        }
    }

    fn int(&mut self, what: &str) -> PResult<(i64, Span)> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let span = self.span();
                self.bump();
                Ok((*n, span))
            }
            _ => self.unexpected(what),
        }
    }

    fn string(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Some(Tok::Str(s)) => {
                self.bump();
                Ok(s.clone())
            }
            _ => self.unexpected(what),
        }
    }

    /// A freshly declared symbol name.
    fn symbol(&mut self, what: &str) -> PResult<(String, Span)> {
        let (name, span) = self.ident(what)?;
        if RESERVED.contains(&name.as_str()) {
            self.report(DiagnosticCode::ReservedWord, span, format!("`{name}` is a reserved word"));
        }
        Ok((name, span))
    }

    fn duplicate(&mut self, kind: &str, name: &str, span: Span) {
        self.report(DiagnosticCode::DuplicateSymbol, span, format!("{kind} {name} is declared twice"));
    }

    fn u32_value(&mut self, what: &str) -> PResult<u32> {
        let (n, span) = self.int(what)?;
        match u32::try_from(n) {
            Ok(v) => Ok(v),
            Err(_) => {
                self.report(DiagnosticCode::ValueOutOfRange, span, format!("{what} {n} is out of range"));
                Ok(0)
            }
        }
    }

    // --- declarations -----------------------------------------------------

    fn declaration(&mut self, doc: &mut ScenarioDoc) -> PResult<()> {
        let kw = match self.peek() {
            Some(Tok::Ident(s)) => s.as_str(),
            _ => return self.unexpected("a declaration"),
        };
        let span = self.span();
        match kw {
            "network" => {
                self.bump();
                let (name, nspan) = self.symbol("a network name")?;
                let mut range = ScoreRange::STANDARD;
                if self.eat_kw("range") {
                    range.min = self.int("a range minimum")?.0;
                    range.max = self.int("a range maximum")?.0;
                    range.default = 0.clamp(range.min, range.max.max(range.min));
                }
                if self.eat_kw("default") {
                    range.default = self.int("a default value")?.0;
                }
                if doc.networks.insert(name.clone(), NetworkDecl { range, span }).is_some() {
                    self.duplicate("network", &name, nspan);
                }
            }
            "trait" | "relationship" | "location" => {
                self.bump();
                let (name, nspan) = self.symbol(&format!("a {kw} name"))?;
                let map = match kw {
                    "trait" => &mut doc.traits,
                    "relationship" => &mut doc.relationships,
                    _ => &mut doc.locations,
                };
                if map.insert(name.clone(), span).is_some() {
                    self.duplicate(kw, &name, nspan);
                }
            }
            "status" => {
                self.bump();
                let (name, nspan) = self.symbol("a status name")?;
                let targeted = self.eat_kw("targeted");
                let duration = if self.eat_kw("duration") { self.u32_value("duration")? } else { 0 };
                if doc.statuses.insert(name.clone(), StatusDecl { targeted, duration, span }).is_some() {
                    self.duplicate("status", &name, nspan);
                }
            }
            "character" => {
                self.bump();
                let (name, nspan) = self.symbol("a character id")?;
                let decl = self.character_body(span)?;
                if doc.characters.insert(name.clone(), decl).is_some() {
                    self.duplicate("character", &name, nspan);
                }
            }
            "exchange" => {
                self.bump();
                let (name, nspan) = self.symbol("an exchange id")?;
                let ex = self.exchange_body(name.clone(), span)?;
                if doc.exchanges.insert(name.clone(), ex).is_some() {
                    self.duplicate("exchange", &name, nspan);
                }
            }
            "goals" => {
                self.bump();
                let (net, nspan) = self.ident("a network name")?;
                self.expect(Tok::LBrace)?;
                let mut rules = Vec::new();
                while !self.eat(&Tok::RBrace) {
                    if self.at_kw("rule") {
                        rules.push(self.rule()?);
                    } else {
                        return self.unexpected("`rule` or `}`");
                    }
                }
                if doc.goal_blocks.insert(net.clone(), GoalBlock { rules, span }).is_some() {
                    self.duplicate("goals block for", &net, nspan);
                }
            }
            "trigger" => {
                self.bump();
                let (id, nspan) = self.symbol("a trigger id")?;
                self.keyword("when")?;
                let when = self.condition()?;
                self.keyword("then")?;
                let effects = self.effect_block()?;
                if doc.triggers.iter().any(|t| t.id == id) {
                    self.duplicate("trigger", &id, nspan);
                }
                doc.triggers.push(TriggerRule { id, when, effects, span });
            }
            _ => return self.unexpected("a declaration"),
        }
        Ok(())
    }

    fn list(&mut self, into: &mut BTreeMap<String, Span>, what: &str) -> PResult<()> {
        loop {
            let (t, span) = self.ident(what)?;
            into.insert(t, span);
            if !self.eat(&Tok::Comma) {
                return Ok(());
            }
        }
    }

    fn character_body(&mut self, span: Span) -> PResult<CharacterDecl> {
        let mut c = CharacterDecl::new(span);
        self.expect(Tok::LBrace)?;
        loop {
            let attr_span = self.span();
            let attr = match self.peek() {
                Some(Tok::RBrace) => {
                    self.bump();
                    return Ok(c);
                }
                Some(Tok::Ident(s)) => s.as_str(),
                _ => return self.unexpected("a character attribute or `}`"),
            };
            self.bump();
            match attr {
                "name" => c.name = Some(self.string("a name string")?),
                "gender" => c.gender = self.ident("a gender")?.0,
                "race" => c.race = self.ident("a race")?.0,
                "orientation" => c.orientation = self.ident("an orientation")?.0,
                "location" => c.location = self.ident("a location")?.0,
                "player" => c.player = true,
                "traits" => self.list(&mut c.traits, "a trait")?,
                "likes" => self.list(&mut c.likes, "a trait")?,
                "dislikes" => self.list(&mut c.dislikes, "a trait")?,
                "value" | "goal" | "belief" => {
                    let map = map_kind(attr);
                    let (net, _) = self.ident("a network")?;
                    self.expect(Tok::Arrow)?;
                    let (other, _) = self.ident("a character id")?;
                    self.expect(Tok::Eq)?;
                    let (v, _) = self.int("a score")?;
                    let key = (map, net.clone(), CharacterId::new(other.clone()));
                    if c.scores.insert(key, (v, attr_span)).is_some() {
                        self.duplicate(&format!("{attr} {net} ->"), &other, attr_span);
                    }
                }
                "status" => {
                    let (kind, _) = self.ident("a status")?;
                    let target = if self.eat(&Tok::Arrow) {
                        Some(CharacterId::new(self.ident("a character id")?.0))
                    } else {
                        None
                    };
                    if c.statuses.insert((kind.clone(), target), attr_span).is_some() {
                        self.duplicate("status", &kind, attr_span);
                    }
                }
                "relationship" => {
                    let (kind, _) = self.ident("a relationship kind")?;
                    let (other, _) = self.ident("a character id")?;
                    if c.relationships.insert((kind.clone(), CharacterId::new(other)), attr_span).is_some() {
                        self.duplicate("relationship", &kind, attr_span);
                    }
                }
                _ => {
                    self.pos -= 1;
                    return self.unexpected("a character attribute or `}`");
                }
            }
        }
    }

    fn response(&mut self) -> PResult<(Response, Span)> {
        let span = self.span();
        if let Some(Tok::Ident(s)) = self.peek() {
            if let Some(r) = Response::from_symbol(s) {
                self.bump();
                return Ok((r, span));
            }
        }
        self.unexpected("`Accept`, `Neutral` or `Reject`")
    }

    fn exchange_body(&mut self, id: String, span: Span) -> PResult<ExchangeDef> {
        let mut ex = ExchangeDef {
            id,
            name: None,
            intent: String::new(),
            subject: false,
            accept_above: None,
            preconditions: Condition::always(),
            initiator_rules: Vec::new(),
            responder_rules: Vec::new(),
            effects: BTreeMap::new(),
            scenes: BTreeMap::new(),
            span,
        };
        self.expect(Tok::LBrace)?;
        loop {
            let item = match self.peek() {
                Some(Tok::RBrace) => {
                    self.bump();
                    return Ok(ex);
                }
                Some(Tok::Ident(s)) => s.as_str(),
                _ => return self.unexpected("an exchange item or `}`"),
            };
            match item {
                "name" => {
                    self.bump();
                    ex.name = Some(self.string("a name string")?);
                }
                "intent" => {
                    self.bump();
                    ex.intent = self.ident("a network")?.0;
                }
                "subject" => {
                    self.bump();
                    ex.subject = true;
                }
                "accept_above" => {
                    self.bump();
                    ex.accept_above = Some(self.int("a threshold")?.0);
                }
                "pre" => {
                    self.bump();
                    let c = self.condition()?;
                    ex.preconditions.literals.extend(c.literals);
                }
                "initiator" | "responder" => {
                    self.bump();
                    let rule = self.rule()?;
                    if item == "initiator" {
                        ex.initiator_rules.push(rule);
                    } else {
                        ex.responder_rules.push(rule);
                    }
                }
                "on" => {
                    self.bump();
                    let (r, rspan) = self.response()?;
                    let effects = self.effect_block()?;
                    if ex.effects.insert(r, effects).is_some() {
                        self.duplicate("effect block", r.as_str(), rspan);
                    }
                }
                "scene" => {
                    let sspan = self.span();
                    self.bump();
                    let (r, rspan) = self.response()?;
                    self.expect(Tok::LBrace)?;
                    let goto = if self.eat_kw("goto") { Some(self.string("a go-to line")?) } else { None };
                    self.keyword("perform")?;
                    let perform = self.string("a performance line")?;
                    self.keyword("respond")?;
                    let respond = self.string("a response line")?;
                    self.expect(Tok::RBrace)?;
                    let scene = SceneTemplate { goto, perform, respond, span: sspan };
                    if ex.scenes.insert(r, scene).is_some() {
                        self.duplicate("scene", r.as_str(), rspan);
                    }
                }
                _ => return self.unexpected("an exchange item or `}`"),
            }
        }
    }

    fn rule(&mut self) -> PResult<InfluenceRule> {
        let span = self.keyword("rule")?;
        let (id, _) = self.ident("a rule id")?;
        self.keyword("weight")?;
        let weight = self.weight()?;
        let per_trait = if self.eat_kw("per") {
            self.keyword("trait")?;
            true
        } else {
            false
        };
        self.keyword("when")?;
        let when = self.condition()?;
        Ok(InfluenceRule { id, weight, per_trait, when, span })
    }

    fn weight(&mut self) -> PResult<WeightTerm> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.bump();
                Ok(WeightTerm::Constant(n))
            }
            Some(Tok::Ident(s)) if matches!(s.as_str(), "value" | "goal" | "belief") => {
                let map = map_kind(s);
                self.bump();
                let (network, from, to) = self.score_args()?;
                Ok(WeightTerm::Score { map, network, from, to })
            }
            _ => self.unexpected("a number or a score reference"),
        }
    }

    // --- conditions -------------------------------------------------------

    fn condition(&mut self) -> PResult<Condition> {
        let mut literals = Vec::new();
        loop {
            let span = self.span();
            let mut negated = false;
            while self.eat_kw("not") {
                negated = !negated;
            }
            let atom = self.atom()?;
            if negated || atom != Atom::True {
                literals.push(Literal { negated, atom, span });
            }
            if !self.eat_kw("and") {
                return Ok(Condition { literals });
            }
        }
    }

    fn role(&mut self) -> PResult<Role> {
        if let Some(Tok::Ident(s)) = self.peek() {
            if let Some(r) = Role::from_symbol(s) {
                self.bump();
                return Ok(r);
            }
        }
        self.unexpected("`initiator`, `target` or `subject`")
    }

    fn trait_ref(&mut self) -> PResult<TraitRef> {
        let (t, _) = self.ident("a trait")?;
        Ok(if t == "trait" { TraitRef::Each } else { TraitRef::Named(t) })
    }

    fn cmp(&mut self) -> PResult<(CmpOp, i64)> {
        let op = match self.peek() {
            Some(Tok::Lt) => CmpOp::Lt,
            Some(Tok::Le) => CmpOp::Le,
            Some(Tok::Eq) => CmpOp::Eq,
            Some(Tok::Ge) => CmpOp::Ge,
            Some(Tok::Gt) => CmpOp::Gt,
            _ => return self.unexpected("a comparison"),
        };
        self.bump();
        let (n, _) = self.int("a number")?;
        Ok((op, n))
    }

    fn score_args(&mut self) -> PResult<(String, Role, Role)> {
        self.expect(Tok::LParen)?;
        let (net, _) = self.ident("a network")?;
        self.expect(Tok::Comma)?;
        let from = self.role()?;
        self.expect(Tok::Comma)?;
        let to = self.role()?;
        self.expect(Tok::RParen)?;
        Ok((net, from, to))
    }

    fn filter(&mut self) -> PResult<OutcomeFilter> {
        if self.eat_kw("any") {
            return Ok(OutcomeFilter::ANY);
        }
        let mut f = OutcomeFilter::empty();
        loop {
            match self.peek() {
                Some(Tok::Ident(s)) if Outcome::from_symbol(s).is_some() => {
                    f.insert(Outcome::from_symbol(s).expect("checked"));
                    self.bump();
                }
                _ => return self.unexpected("an outcome or `any`"),
            }
            if !self.eat(&Tok::Pipe) {
                return Ok(f);
            }
        }
    }

    fn optional_pair(&mut self) -> PResult<(Role, Role)> {
        if self.eat(&Tok::Comma) {
            let a = self.role()?;
            self.expect(Tok::Comma)?;
            let b = self.role()?;
            Ok((a, b))
        } else {
            Ok((Role::Initiator, Role::Target))
        }
    }

    fn atom(&mut self) -> PResult<Atom> {
        let name = match self.peek() {
            Some(Tok::Ident(s)) => s.as_str(),
            _ => return self.unexpected("a condition"),
        };
        self.bump();
        Ok(match name {
            "true" => Atom::True,
            "has_trait" | "likes" | "dislikes" => {
                self.expect(Tok::LParen)?;
                let role = self.role()?;
                self.expect(Tok::Comma)?;
                let t = self.trait_ref()?;
                self.expect(Tok::RParen)?;
                match name {
                    "has_trait" => Atom::HasTrait(role, t),
                    "likes" => Atom::Likes(role, t),
                    _ => Atom::Dislikes(role, t),
                }
            }
            "other_has" => {
                self.expect(Tok::LParen)?;
                let t = self.trait_ref()?;
                self.expect(Tok::RParen)?;
                Atom::OtherHas(t)
            }
            "has_status" => {
                self.expect(Tok::LParen)?;
                let who = self.role()?;
                self.expect(Tok::Comma)?;
                let (kind, _) = self.ident("a status")?;
                let at = if self.eat(&Tok::Comma) { Some(self.role()?) } else { None };
                self.expect(Tok::RParen)?;
                Atom::HasStatus { who, kind, at }
            }
            "value" | "goal" | "belief" => {
                let map = map_kind(name);
                let (network, from, to) = self.score_args()?;
                let (op, threshold) = self.cmp()?;
                Atom::Score { map, network, from, to, op, threshold }
            }
            "relationship" => {
                self.expect(Tok::LParen)?;
                let (kind, _) = self.ident("a relationship kind")?;
                let (a, b) = self.optional_pair()?;
                self.expect(Tok::RParen)?;
                Atom::Relationship { kind, a, b }
            }
            "same" | "different" => {
                self.expect(Tok::LParen)?;
                let attr = match self.peek() {
                    Some(Tok::Ident(s)) if s == "race" => Attr::Race,
                    Some(Tok::Ident(s)) if s == "gender" => Attr::Gender,
                    _ => return self.unexpected("`race` or `gender`"),
                };
                self.bump();
                self.expect(Tok::RParen)?;
                if name == "same" {
                    Atom::Same(attr)
                } else {
                    Atom::Different(attr)
                }
            }
            "orientation_compatible" => {
                if self.eat(&Tok::LParen) {
                    let a = self.role()?;
                    self.expect(Tok::Comma)?;
                    let b = self.role()?;
                    self.expect(Tok::RParen)?;
                    Atom::OrientationCompatible(a, b)
                } else {
                    Atom::OrientationCompatible(Role::Initiator, Role::Target)
                }
            }
            "history" => {
                self.expect(Tok::LParen)?;
                let (exchange, _) = self.ident("an exchange")?;
                self.expect(Tok::Comma)?;
                let outcomes = self.filter()?;
                let (initiator, target) = self.optional_pair()?;
                self.expect(Tok::RParen)?;
                let (op, count) = self.cmp()?;
                Atom::History { exchange, outcomes, initiator, target, op, count }
            }
            "witnessed" => {
                self.expect(Tok::LParen)?;
                let observer = self.role()?;
                self.expect(Tok::Comma)?;
                let (exchange, _) = self.ident("an exchange")?;
                self.expect(Tok::Comma)?;
                let outcomes = self.filter()?;
                self.expect(Tok::Comma)?;
                let about = self.role()?;
                self.expect(Tok::RParen)?;
                let (op, count) = self.cmp()?;
                Atom::Witnessed { observer, exchange, outcomes, about, op, count }
            }
            "volition" => {
                let (op, threshold) = self.cmp()?;
                Atom::Volition { op, threshold }
            }
            "chance" => {
                self.expect(Tok::LParen)?;
                let (n, nspan) = self.int("a percentage")?;
                self.expect(Tok::RParen)?;
                match u32::try_from(n) {
                    Ok(p) if p <= 100 => Atom::Chance(p),
                    _ => {
                        self.report(DiagnosticCode::ValueOutOfRange, nspan, format!("chance {n} is not a percentage"));
                        Atom::Chance(0)
                    }
                }
            }
            _ => {
                self.pos -= 1;
                return self.unexpected("a condition");
            }
        })
    }

    // --- effects ----------------------------------------------------------

    fn effect_block(&mut self) -> PResult<Vec<Effect>> {
        self.expect(Tok::LBrace)?;
        let mut effects = Vec::new();
        while !self.eat(&Tok::RBrace) {
            effects.push(self.effect()?);
        }
        Ok(effects)
    }

    fn effect(&mut self) -> PResult<Effect> {
        let span = self.span();
        let head = match self.peek() {
            Some(Tok::Ident(s)) => s.as_str(),
            _ => return self.unexpected("an effect or `}`"),
        };
        let op = match head {
            "value" | "goal" | "belief" => {
                self.bump();
                let map = map_kind(head);
                let (network, _) = self.ident("a network")?;
                let from = self.role()?;
                self.expect(Tok::Arrow)?;
                let to = self.role()?;
                let negate = match self.peek() {
                    Some(Tok::PlusEq) => false,
                    Some(Tok::MinusEq) => true,
                    _ => return self.unexpected("`+=` or `-=`"),
                };
                self.bump();
                let (n, nspan) = self.int("an amount")?;
                let delta = if negate {
                    match n.checked_neg() {
                        Some(d) => d,
                        None => {
                            self.report(DiagnosticCode::IntOverflow, nspan, "amount cannot be negated");
                            return Err(());
                        }
                    }
                } else {
                    n
                };
                EffectOp::Score { map, network, from, to, delta }
            }
            "status" => {
                self.bump();
                if self.eat_kw("add") {
                    let who = self.role()?;
                    let (kind, _) = self.ident("a status")?;
                    let at = if self.eat(&Tok::Arrow) { Some(self.role()?) } else { None };
                    let duration = if self.eat_kw("for") { Some(self.u32_value("duration")?) } else { None };
                    EffectOp::StatusAdd { who, kind, at, duration }
                } else if self.eat_kw("remove") {
                    let who = self.role()?;
                    let (kind, _) = self.ident("a status")?;
                    EffectOp::StatusRemove { who, kind }
                } else {
                    return self.unexpected("`add` or `remove`");
                }
            }
            "relationship" => {
                self.bump();
                let (kind, _) = self.ident("a relationship kind")?;
                let a = self.role()?;
                let b = self.role()?;
                let active = if self.eat_kw("true") {
                    true
                } else if self.eat_kw("false") {
                    false
                } else {
                    return self.unexpected("`true` or `false`");
                };
                EffectOp::Relationship { kind, a, b, active }
            }
            _ => return self.unexpected("an effect or `}`"),
        };
        Ok(Effect { op, span })
    }
}

fn map_kind(s: &str) -> MapKind {
    match s {
        "goal" => MapKind::Goal,
        "belief" => MapKind::Belief,
        _ => MapKind::Value,
    }
}
