//! Shared test helpers: an independent rule evaluator used as an oracle, a
//! random scenario generator, and a random player driver.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use socialsim_core::dsl::ScenarioDoc;
use socialsim_core::exchange::ExchangeDef;
use socialsim_core::model::{CharacterId, MapKind, Outcome, Response, SocialState, StatusInstance};
use socialsim_core::session::Session;
use socialsim_core::volition::{Atom, Attr, Bindings, CmpOp, InfluenceRule, Role, TraitRef, WeightTerm};

// --- oracle ---------------------------------------------------------------

/// Straight transcription of the Flirt listing:
///
/// ```text
/// v = attracted_to(x, y)
/// for each trait of y: if x likes it, v += 1
/// for each trait of y: if x dislikes it, v -= 2
/// if v > 0 and x has Extrovert: v += 2
/// ```
pub fn flirt_listing(attraction: i64, liked: i64, disliked: i64, extrovert: bool) -> i64 {
    let mut v = attraction;
    for _ in 0..liked {
        v += 1;
    }
    for _ in 0..disliked {
        v -= 2;
    }
    if v > 0 && extrovert {
        v += 2;
    }
    v
}

fn role(b: &Bindings, r: Role) -> &CharacterId {
    match r {
        Role::Initiator => &b.initiator,
        Role::Target => &b.target,
        Role::Subject => b.subject.as_ref().expect("subject bound"),
    }
}

fn cmp(op: CmpOp, a: i64, b: i64) -> bool {
    match op {
        CmpOp::Lt => a < b,
        CmpOp::Le => a <= b,
        CmpOp::Eq => a == b,
        CmpOp::Ge => a >= b,
        CmpOp::Gt => a > b,
    }
}

fn score(state: &SocialState, map: MapKind, net: &str, from: &CharacterId, to: &CharacterId) -> i64 {
    let default = state.network_range(net).expect("network").default;
    let Some(t) = state.triple(from, net) else { return default };
    let m = match map {
        MapKind::Value => &t.value,
        MapKind::Goal => &t.goal,
        MapKind::Belief => &t.belief,
    };
    m.get(to).copied().unwrap_or(default)
}

fn orientation_ok(orientation: &str, own: &str, other: &str) -> bool {
    match orientation {
        "straight" => own != other,
        "gay" => own == other,
        "bisexual" => true,
        _ => false,
    }
}

/// Oracle truth of one atom. `chance` atoms draw from `dice`.
pub fn atom_holds(
    atom: &Atom,
    state: &SocialState,
    b: &Bindings,
    each: Option<&str>,
    running: i64,
    dice: &mut dyn FnMut() -> u32,
) -> bool {
    let ch = |id: &CharacterId| state.character(id).expect("character exists").clone();
    let tname = |t: &TraitRef| match t {
        TraitRef::Named(n) => n.clone(),
        TraitRef::Each => each.expect("trait bound").to_string(),
    };
    match atom {
        Atom::True => true,
        Atom::HasTrait(r, t) => ch(role(b, *r)).traits.contains(&tname(t)),
        Atom::OtherHas(t) => ch(&b.target).traits.contains(&tname(t)),
        Atom::Likes(r, t) => ch(role(b, *r)).likes.contains(&tname(t)),
        Atom::Dislikes(r, t) => ch(role(b, *r)).dislikes.contains(&tname(t)),
        Atom::HasStatus { who, kind, at } => {
            let who = role(b, *who);
            let at = at.map(|r| role(b, r).clone());
            state
                .statuses_of(who)
                .iter()
                .any(|s: &StatusInstance| &s.kind == kind && (at.is_none() || s.target == at))
        }
        Atom::Score { map, network, from, to, op, threshold } => {
            cmp(*op, score(state, *map, network, role(b, *from), role(b, *to)), *threshold)
        }
        Atom::Relationship { kind, a, b: other } => {
            let (x, y) = (role(b, *a), role(b, *other));
            state
                .relationships()
                .any(|r| r.kind == *kind && r.active && ((&r.pair.0 == x && &r.pair.1 == y) || (&r.pair.0 == y && &r.pair.1 == x)))
        }
        Atom::Same(attr) | Atom::Different(attr) => {
            let (x, y) = (ch(&b.initiator), ch(&b.target));
            let same = match attr {
                Attr::Race => x.race == y.race,
                Attr::Gender => x.gender == y.gender,
            };
            same == matches!(atom, Atom::Same(_))
        }
        Atom::OrientationCompatible(from, to) => {
            let (x, y) = (ch(role(b, *from)), ch(role(b, *to)));
            orientation_ok(x.orientation.as_str(), &x.gender, &y.gender)
        }
        Atom::History { exchange, outcomes, initiator, target, op, count } => {
            let (i, t) = (role(b, *initiator), role(b, *target));
            let n = state
                .history()
                .iter()
                .filter(|r| &r.exchange == exchange && &r.initiator == i && &r.target == t && outcomes.contains(r.outcome))
                .count();
            cmp(*op, n as i64, *count)
        }
        Atom::Witnessed { observer, exchange, outcomes, about, op, count } => {
            let about = role(b, *about);
            let n = state
                .known_history(role(b, *observer))
                .filter(|r| &r.exchange == exchange && &r.initiator == about && outcomes.contains(r.outcome))
                .count();
            cmp(*op, n as i64, *count)
        }
        Atom::Volition { op, threshold } => cmp(*op, running, *threshold),
        Atom::Chance(p) => dice() < *p,
    }
}

fn cond_holds(
    lits: &[socialsim_core::volition::Literal],
    state: &SocialState,
    b: &Bindings,
    each: Option<&str>,
    running: i64,
    dice: &mut dyn FnMut() -> u32,
) -> bool {
    // short-circuit like an author would read it: stop at the first false
    for l in lits {
        if atom_holds(&l.atom, state, b, each, running, dice) == l.negated {
            return false;
        }
    }
    true
}

fn weight(w: &WeightTerm, state: &SocialState, b: &Bindings) -> i64 {
    match w {
        WeightTerm::Constant(c) => *c,
        WeightTerm::Score { map, network, from, to } => score(state, *map, network, role(b, *from), role(b, *to)),
    }
}

/// Oracle evaluation of an ordered rule list: `(total, per-rule amounts)`.
pub fn rules_total_with(
    rules: &[InfluenceRule],
    state: &SocialState,
    b: &Bindings,
    dice: &mut dyn FnMut() -> u32,
) -> (i64, Vec<(String, bool, i64)>) {
    let mut v = 0i64;
    let mut parts = Vec::new();
    for r in rules {
        let mut amount = 0;
        let mut fired = false;
        if r.per_trait {
            let traits = state.character(&b.target).unwrap().traits.clone();
            for t in &traits {
                if cond_holds(&r.when.literals, state, b, Some(t), v, dice) {
                    let w = weight(&r.weight, state, b);
                    v += w;
                    amount += w;
                    fired = true;
                }
            }
        } else if cond_holds(&r.when.literals, state, b, None, v, dice) {
            amount = weight(&r.weight, state, b);
            v += amount;
            fired = true;
        }
        parts.push((r.id.clone(), fired, amount));
    }
    (v, parts)
}

pub fn rules_total(rules: &[InfluenceRule], state: &SocialState, b: &Bindings) -> i64 {
    rules_total_with(rules, state, b, &mut || panic!("no chance atoms expected")).0
}

/// Oracle availability: distinct roles, subject iff wanted, preconditions.
pub fn available(ex: &ExchangeDef, state: &SocialState, b: &Bindings) -> bool {
    if b.initiator == b.target {
        return false;
    }
    match (&b.subject, ex.subject) {
        (Some(s), true) if s != &b.initiator && s != &b.target => {}
        (None, false) => {}
        _ => return false,
    }
    cond_holds(&ex.preconditions.literals, state, b, None, 0, &mut || panic!("no chance in preconditions"))
}

/// A desire as `(exchange, target, subject, volition)`.
pub type Desire = (String, CharacterId, Option<CharacterId>, i64);

/// Every positive desire of `npc` by exhaustive scan, unsorted.
pub fn all_desires(doc: &ScenarioDoc, state: &SocialState, npc: &CharacterId) -> Vec<Desire> {
    let loc = state.character(npc).unwrap().location.clone();
    let others: Vec<CharacterId> = state.characters().filter(|c| c.location == loc && &c.id != npc).map(|c| c.id.clone()).collect();
    let mut out = Vec::new();
    for (id, ex) in &doc.exchanges {
        for t in &others {
            let subjects: Vec<Option<CharacterId>> =
                if ex.subject { others.iter().filter(|s| *s != t).cloned().map(Some).collect() } else { vec![None] };
            for s in subjects {
                let b = Bindings { initiator: npc.clone(), target: t.clone(), subject: s.clone() };
                if available(ex, state, &b) {
                    let v = rules_total(&ex.initiator_rules, state, &b);
                    if v > 0 {
                        out.push((id.clone(), t.clone(), s, v));
                    }
                }
            }
        }
    }
    out
}

/// Brute-force best desire: highest volition, then smallest exchange, target,
/// subject.
pub fn brute_force_choice(doc: &ScenarioDoc, state: &SocialState, npc: &CharacterId) -> Option<Desire> {
    let mut best: Option<Desire> = None;
    for d in all_desires(doc, state, npc) {
        let better = match &best {
            None => true,
            Some(b) => d.3 > b.3 || (d.3 == b.3 && (&d.0, &d.1, &d.2) < (&b.0, &b.1, &b.2)),
        };
        if better {
            best = Some(d);
        }
    }
    best
}

// --- scenario generator ---------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct GenOpts {
    pub max_npcs: usize,
    pub max_traits: usize,
    pub max_exchanges: usize,
    pub max_rules: usize,
    /// Allow `chance(..)` in responder rules.
    pub chance: bool,
    /// Allow `volition` tests in rules.
    pub volition: bool,
    pub triggers: bool,
    pub two_locations: bool,
}

impl GenOpts {
    pub const SMALL: GenOpts = GenOpts {
        max_npcs: 6,
        max_traits: 6,
        max_exchanges: 12,
        max_rules: 8,
        chance: true,
        volition: true,
        triggers: true,
        two_locations: true,
    };
}

struct Gen {
    rng: ChaCha8Rng,
    traits: Vec<String>,
    nets: Vec<(String, i64, i64)>,
    exchanges: Vec<String>,
    opts: GenOpts,
}

#[derive(Clone, Copy)]
struct Ctx {
    subject: bool,
    volition: bool,
    chance: bool,
    each: bool,
}

const STATUSES: [&str; 3] = ["s0", "s1", "s2"];
const OPS: [&str; 5] = ["<", "<=", "=", ">=", ">"];
const ORIENTATIONS: [&str; 4] = ["straight", "gay", "bisexual", "asexual"];

impl Gen {
    fn pick<'a>(&mut self, xs: &'a [&'a str]) -> &'a str {
        xs.choose(&mut self.rng).unwrap()
    }

    fn roles(&mut self, ctx: Ctx) -> (String, String) {
        let mut all = vec!["initiator", "target"];
        if ctx.subject {
            all.push("subject");
        }
        let a = *all.choose(&mut self.rng).unwrap();
        let rest: Vec<&str> = all.iter().copied().filter(|r| *r != a).collect();
        let b = *rest.choose(&mut self.rng).unwrap();
        (a.to_string(), b.to_string())
    }

    fn role(&mut self, ctx: Ctx) -> String {
        self.roles(ctx).0
    }

    fn trait_ref(&mut self, ctx: Ctx) -> String {
        if ctx.each && self.rng.random_bool(0.6) {
            "trait".into()
        } else {
            self.traits.choose(&mut self.rng).unwrap().clone()
        }
    }

    fn net(&mut self) -> (String, i64, i64) {
        self.nets.choose(&mut self.rng).unwrap().clone()
    }

    fn filter(&mut self) -> String {
        let mut fs: Vec<&str> = ["Accept", "Neutral", "Reject", "Error"].into_iter().filter(|_| self.rng.random_bool(0.5)).collect();
        if fs.is_empty() || self.rng.random_bool(0.2) {
            fs = vec!["any"];
        }
        fs.join("|")
    }

    fn atom(&mut self, ctx: Ctx) -> String {
        loop {
            let k = self.rng.random_range(0..16);
            let s = match k {
                0 => "true".to_string(),
                1 | 2 => {
                    let r = self.role(ctx);
                    let t = self.trait_ref(ctx);
                    format!("has_trait({r}, {t})")
                }
                3 => {
                    let r = self.role(ctx);
                    let t = self.trait_ref(ctx);
                    let f = self.pick(&["likes", "dislikes"]);
                    format!("{f}({r}, {t})")
                }
                4 => format!("other_has({})", self.trait_ref(ctx)),
                5 => {
                    let (a, b) = self.roles(ctx);
                    match self.rng.random_range(0..3) {
                        0 => format!("has_status({a}, s0, {b})"),
                        1 => format!("has_status({a}, s0)"),
                        _ => format!("has_status({a}, {})", self.pick(&["s1", "s2"])),
                    }
                }
                6..=8 => {
                    let (a, b) = self.roles(ctx);
                    let (n, lo, hi) = self.net();
                    let m = self.pick(&["value", "goal", "belief"]);
                    let op = self.pick(&OPS);
                    let th = self.rng.random_range(lo..=hi);
                    format!("{m}({n}, {a}, {b}) {op} {th}")
                }
                9 => {
                    let k = self.pick(&["r0", "r1"]);
                    if self.rng.random_bool(0.5) {
                        format!("relationship({k})")
                    } else {
                        let (a, b) = self.roles(ctx);
                        format!("relationship({k}, {a}, {b})")
                    }
                }
                10 => format!("{}({})", self.pick(&["same", "different"]), self.pick(&["race", "gender"])),
                11 => {
                    if self.rng.random_bool(0.5) {
                        "orientation_compatible".into()
                    } else {
                        let (a, b) = self.roles(ctx);
                        format!("orientation_compatible({a}, {b})")
                    }
                }
                12 => {
                    let ex = self.exchanges.choose(&mut self.rng).unwrap().clone();
                    let f = self.filter();
                    let op = self.pick(&OPS);
                    let n = self.rng.random_range(0..3);
                    if self.rng.random_bool(0.5) {
                        format!("history({ex}, {f}) {op} {n}")
                    } else {
                        let (a, b) = self.roles(ctx);
                        format!("history({ex}, {f}, {a}, {b}) {op} {n}")
                    }
                }
                13 => {
                    let ex = self.exchanges.choose(&mut self.rng).unwrap().clone();
                    let f = self.filter();
                    let (a, b) = self.roles(ctx);
                    let op = self.pick(&OPS);
                    let n = self.rng.random_range(0..3);
                    format!("witnessed({a}, {ex}, {f}, {b}) {op} {n}")
                }
                14 if ctx.volition => {
                    let op = self.pick(&OPS);
                    let n = self.rng.random_range(-5..=10);
                    format!("volition {op} {n}")
                }
                15 if ctx.chance => format!("chance({})", self.rng.random_range(0..=100)),
                _ => continue,
            };
            return s;
        }
    }

    fn condition(&mut self, ctx: Ctx) -> String {
        let n = self.rng.random_range(1..=3);
        let lits: Vec<String> = (0..n)
            .map(|_| {
                let a = self.atom(ctx);
                if self.rng.random_bool(0.25) {
                    format!("not {a}")
                } else {
                    a
                }
            })
            .collect();
        lits.join(" and ")
    }

    fn weight(&mut self, ctx: Ctx) -> String {
        if self.rng.random_bool(0.25) {
            let (a, b) = self.roles(ctx);
            let (n, _, _) = self.net();
            let m = self.pick(&["value", "goal", "belief"]);
            format!("{m}({n}, {a}, {b})")
        } else {
            self.rng.random_range(-10..=10).to_string()
        }
    }

    fn rules(&mut self, prefix: &str, ctx: Ctx) -> Vec<String> {
        let n = self.rng.random_range(0..=self.opts.max_rules);
        (0..n)
            .map(|i| {
                let per = self.rng.random_bool(0.2);
                let c = Ctx { each: per, ..ctx };
                let w = self.weight(c);
                let cond = self.condition(c);
                let per = if per { " per trait" } else { "" };
                format!("{prefix}rule q{i} weight {w}{per} when {cond}")
            })
            .collect()
    }

    fn effect(&mut self, ctx: Ctx) -> String {
        let (a, b) = self.roles(ctx);
        match self.rng.random_range(0..6) {
            0..=2 => {
                let (n, _, _) = self.net();
                let m = self.pick(&["value", "goal", "belief"]);
                let d: i64 = self.rng.random_range(-30..=30);
                let op = if d < 0 { "-=" } else { "+=" };
                format!("{m} {n} {a} -> {b} {op} {}", d.abs())
            }
            3 => {
                if self.rng.random_bool(0.5) {
                    format!("status add {a} s0 -> {b}")
                } else {
                    let k = self.pick(&["s1", "s2"]);
                    let dur = self.rng.random_range(0..4);
                    format!("status add {a} {k} for {dur}")
                }
            }
            4 => format!("status remove {a} {}", self.pick(&STATUSES)),
            _ => {
                let k = self.pick(&["r0", "r1"]);
                let on = self.pick(&["true", "false"]);
                format!("relationship {k} {a} {b} {on}")
            }
        }
    }

    fn effects(&mut self, ctx: Ctx, max: usize) -> String {
        let n = self.rng.random_range(0..=max);
        let es: Vec<String> = (0..n).map(|_| self.effect(ctx)).collect();
        if es.is_empty() {
            "{ }".into()
        } else {
            format!("{{ {} }}", es.join(" "))
        }
    }
}

/// A random valid scenario. Same seed, same text.
pub fn scenario(seed: u64, opts: GenOpts) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_traits = rng.random_range(2..=opts.max_traits.max(2));
    let n_nets = rng.random_range(1..=3);
    let n_ex = rng.random_range(1..=opts.max_exchanges.max(1));
    let nets: Vec<(String, i64, i64)> = (0..n_nets)
        .map(|i| {
            let lo = *[0i64, -50].choose(&mut rng).unwrap();
            let hi = *[50i64, 100].choose(&mut rng).unwrap();
            (format!("n{i}"), lo, hi)
        })
        .collect();
    let mut g = Gen {
        rng,
        traits: (0..n_traits).map(|i| format!("t{i}")).collect(),
        nets,
        exchanges: (0..n_ex).map(|i| format!("e{i}")).collect(),
        opts,
    };
    let mut out = String::new();
    for (n, lo, hi) in g.nets.clone() {
        let d = g.rng.random_range(lo..=hi.min(lo + 20));
        out.push_str(&format!("network {n} range {lo} {hi} default {d}\n"));
    }
    for t in &g.traits {
        out.push_str(&format!("trait {t}\n"));
    }
    let d0 = g.rng.random_range(1..5);
    let d1 = g.rng.random_range(0..4);
    out.push_str(&format!("status s0 targeted duration {d0}\nstatus s1 duration {d1}\nstatus s2\n"));
    out.push_str("relationship r0\nrelationship r1\nlocation L0\n");
    if opts.two_locations {
        out.push_str("location L1\n");
    }

    let n_npcs = g.rng.random_range(1..=opts.max_npcs.max(1));
    let mut ids: Vec<String> = vec!["P".into()];
    ids.extend((0..n_npcs).map(|i| format!("c{i}")));
    for id in &ids {
        let player = id == "P";
        let loc = if !player && opts.two_locations && g.rng.random_bool(0.25) { "L1" } else { "L0" };
        let gender = g.pick(&["m", "f"]).to_string();
        let race = g.pick(&["x", "y"]).to_string();
        let orientation = g.pick(&ORIENTATIONS).to_string();
        let mut attrs = vec![format!("gender {gender}"), format!("race {race}"), format!("orientation {orientation}"), format!("location {loc}")];
        if player {
            attrs.push("player".into());
        }
        let traits: Vec<String> = g.traits.iter().filter(|_| g.rng.random_bool(0.4)).cloned().collect();
        let likes: Vec<String> = g.traits.iter().filter(|_| g.rng.random_bool(0.3)).cloned().collect();
        let dislikes: Vec<String> = g.traits.iter().filter(|t| !likes.contains(t) && g.rng.random_bool(0.3)).cloned().collect();
        for (k, v) in [("traits", traits), ("likes", likes), ("dislikes", dislikes)] {
            if !v.is_empty() {
                attrs.push(format!("{k} {}", v.join(", ")));
            }
        }
        let others: Vec<String> = ids.iter().filter(|o| *o != id).cloned().collect();
        for o in &others {
            if g.rng.random_bool(0.4) {
                let (n, lo, hi) = g.net();
                let m = g.pick(&["value", "goal", "belief"]);
                let v = g.rng.random_range(lo..=hi);
                attrs.push(format!("{m} {n} -> {o} = {v}"));
            }
        }
        if g.rng.random_bool(0.3) {
            attrs.push(format!("status {}", g.pick(&["s1", "s2"])));
        }
        if g.rng.random_bool(0.3) {
            let o = others.choose(&mut g.rng).unwrap();
            attrs.push(format!("status s0 -> {o}"));
        }
        if g.rng.random_bool(0.2) {
            let o = others.choose(&mut g.rng).unwrap();
            attrs.push(format!("relationship {} {o}", g.pick(&["r0", "r1"])));
        }
        out.push_str(&format!("character {id} {{\n  {}\n}}\n", attrs.join("\n  ")));
    }

    for ex in g.exchanges.clone() {
        let subject = g.rng.random_bool(0.2);
        let base = Ctx { subject, volition: false, chance: false, each: false };
        let (intent, _, _) = g.net();
        let mut lines = vec![format!("intent {intent}")];
        if subject {
            lines.push("subject".into());
        }
        if g.rng.random_bool(0.2) {
            lines.push(format!("accept_above {}", g.rng.random_range(-2..8)));
        }
        if g.rng.random_bool(0.4) {
            lines.push(format!("pre {}", g.condition(base)));
        }
        let vol = opts.volition;
        lines.extend(g.rules("initiator ", Ctx { volition: vol, ..base }));
        lines.extend(g.rules("responder ", Ctx { volition: vol, chance: opts.chance, ..base }));
        for r in ["Accept", "Neutral", "Reject"] {
            let e = g.effects(base, 3);
            lines.push(format!("on {r} {e}"));
        }
        for r in ["Accept", "Neutral", "Reject"] {
            let extra = if subject { " about {subject}" } else { "" };
            let goto = if g.rng.random_bool(0.5) { "goto \"{initiator} approaches.\" " } else { "" };
            lines.push(format!("scene {r} {{ {goto}perform \"{r} line{extra}\" respond \"{{target}} answers\" }}"));
        }
        out.push_str(&format!("exchange {ex} {{\n  {}\n}}\n", lines.join("\n  ")));
    }

    let ctx = Ctx { subject: false, volition: opts.volition, chance: false, each: false };
    for (n, _, _) in g.nets.clone() {
        if g.rng.random_bool(0.5) {
            let rules = g.rules("", ctx);
            out.push_str(&format!("goals {n} {{\n  {}\n}}\n", rules.join("\n  ")));
        }
    }
    if opts.triggers {
        let plain = Ctx { volition: false, ..ctx };
        for i in 0..g.rng.random_range(0..=3) {
            let cond = g.condition(plain);
            let e = g.effects(plain, 2);
            out.push_str(&format!("trigger tr{i} when {cond} then {e}\n"));
        }
    }
    out
}

/// Characters X (possibly extrovert, with `liked`/`disliked` preferences) and
/// Y (carrying those traits plus `neutral` others) for the Flirt grid.
pub fn flirt_grid_scenario(liked: usize, disliked: usize, neutral: usize, extrovert: bool) -> String {
    let mut out = String::from("network attraction\nnetwork friendship\ntrait extrovert\nlocation here\n");
    let l: Vec<String> = (0..liked).map(|i| format!("l{i}")).collect();
    let d: Vec<String> = (0..disliked).map(|i| format!("d{i}")).collect();
    let n: Vec<String> = (0..neutral).map(|i| format!("n{i}")).collect();
    for t in l.iter().chain(&d).chain(&n) {
        out.push_str(&format!("trait {t}\n"));
    }
    let mut x = String::from("character X { location here");
    if extrovert {
        x.push_str(" traits extrovert");
    }
    if !l.is_empty() {
        x.push_str(&format!(" likes {}", l.join(", ")));
    }
    if !d.is_empty() {
        x.push_str(&format!(" dislikes {}", d.join(", ")));
    }
    out.push_str(&x);
    out.push_str(" }\n");
    let y: Vec<String> = l.iter().chain(&d).chain(&n).cloned().collect();
    out.push_str("character Y { location here");
    if !y.is_empty() {
        out.push_str(&format!(" traits {}", y.join(", ")));
    }
    out.push_str(" }\ncharacter P { location here player }\n");
    out
}

// --- random player --------------------------------------------------------

/// Drives `session` for `steps` steps with a seeded random player: answers
/// prompts, sometimes starts exchanges or moves, otherwise ticks.
pub fn drive_randomly(session: &mut Session, seed: u64, steps: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let locations: Vec<String> = session.doc().locations.keys().cloned().collect();
    let exchanges: Vec<String> = session.doc().exchanges.keys().cloned().collect();
    for _ in 0..steps {
        if let Some(q) = session.pending_prompt() {
            let id = q.id;
            let choice = *Response::ALL.choose(&mut rng).unwrap();
            session.player_respond(id, choice).expect("pending prompt accepts a response");
            continue;
        }
        let roll = rng.random_range(0..100);
        if roll < 15 {
            let here: Vec<CharacterId> = session
                .state()
                .characters()
                .filter(|c| !c.player && c.location == session.player_location())
                .map(|c| c.id.clone())
                .collect();
            if let (Some(ex), Some(t)) = (exchanges.choose(&mut rng), here.choose(&mut rng)) {
                let subject = here.iter().find(|s| *s != t).cloned();
                let takes = session.doc().exchanges[ex].subject;
                let _ = session.player_initiate(ex, t, if takes { subject.as_ref() } else { None });
            }
        } else if roll < 20 {
            let loc = locations.choose(&mut rng).unwrap().clone();
            let _ = session.player_move(&loc);
        } else {
            session.tick().expect("no prompt is pending");
        }
    }
}

/// A random session: generated scenario, random player, `steps` steps.
pub fn random_session(seed: u64, steps: usize) -> Session {
    let text = scenario(seed, GenOpts::SMALL);
    let mut s = Session::from_text(&text, seed).unwrap_or_else(|e| panic!("generated scenario {seed} is invalid: {e:?}\n{text}"));
    drive_randomly(&mut s, seed, steps);
    s
}

// --- log checks -----------------------------------------------------------

/// Violations found in one session, by property.
#[derive(Debug, Default, Clone)]
pub struct Violations {
    pub stage: Vec<String>,
    pub result_before_scene: Vec<String>,
    pub trigger_timing: Vec<String>,
    pub interleaving: Vec<String>,
    pub location: Vec<String>,
    pub fifo: Vec<String>,
    pub liveness: Vec<String>,
    /// Quests started in the log.
    pub quests: usize,
}

impl Violations {
    pub fn total(&self) -> usize {
        self.stage.len()
            + self.result_before_scene.len()
            + self.trigger_timing.len()
            + self.interleaving.len()
            + self.location.len()
            + self.fifo.len()
            + self.liveness.len()
    }
}

type Request = (String, CharacterId, CharacterId, Option<CharacterId>);

/// Checks a session's quest trails and event log against the lifecycle and
/// scheduling rules, without looking at engine internals.
pub fn check_session(session: &Session) -> Violations {
    use socialsim_core::exchange::Stage;

    let mut v = Violations::default();
    let doc = session.doc();
    let player = session.player().clone();

    // quest trails: 0 -> 1 -> 2 -> 3|4, any live stage -> -1 -> 0
    for q in session.finished_quests().iter().chain(session.pending_prompt()) {
        let codes: Vec<i8> = q.trail.iter().map(|s| s.code()).collect();
        let legal = q.trail.windows(2).all(|w| {
            matches!(
                (w[0], w[1]),
                (Stage::Waiting, Stage::Bound)
                    | (Stage::Bound, Stage::Resolved)
                    | (Stage::Resolved, Stage::Succeeded)
                    | (Stage::Resolved, Stage::Failed)
                    | (Stage::Errored, Stage::Waiting)
            ) || (w[1] == Stage::Errored && matches!(w[0], Stage::Waiting | Stage::Bound | Stage::Resolved))
        });
        let shape = matches!(codes.as_slice(), [0, 1, 2, 3] | [0, 1, 2, 4] | [0, 1] | [0, 1, 2])
            || matches!(codes.as_slice(), [.., -1, 0]);
        if !legal || !shape || codes.first() != Some(&0) {
            v.stage.push(format!("quest {} trail {codes:?}", q.id));
        }
    }

    check_log(doc, &player, session.events(), session.pending_prompt().is_some(), &mut v);
    v
}

/// Log-only half of [`check_session`]. `pending` tells whether the log ends
/// at an unanswered prompt.
pub fn check_log(doc: &socialsim_core::dsl::ScenarioDoc, player: &CharacterId, events: &[socialsim_core::event::Event], pending: bool, v: &mut Violations) {
    use socialsim_core::event::{EventBody, PlayerInput};
    let player = player.clone();
    let home = |c: &CharacterId| doc.characters.get(c.as_str()).map(|d| d.location.clone()).unwrap_or_default();
    let mut player_loc = String::new();
    let mut open: Option<(u64, CharacterId)> = None; // quest, target
    let mut resolved: BTreeSet<u64> = BTreeSet::new();
    let mut answered: BTreeSet<u64> = BTreeSet::new();
    let mut prompted: BTreeSet<u64> = BTreeSet::new();
    let mut scene_seen: BTreeSet<u64> = BTreeSet::new();
    let mut stage_of: BTreeMap<u64, i8> = BTreeMap::new();
    let mut started: BTreeSet<u64> = BTreeSet::new();
    let mut queue: VecDeque<Request> = VecDeque::new();
    let mut group_tick = 0u64;
    let mut group_must_start = false;
    let mut group_started = false;
    let mut group_seen_start = false;

    let close_group = |v: &mut Violations, tick: u64, must: bool, did: bool| {
        if tick > 0 && must && !did {
            v.liveness.push(format!("tick {tick}: queue was not served"));
        }
    };

    for e in events {
        let loc_ok = |c: &CharacterId, loc: &str| home(c) == loc || (c == &player);
        if e.tick != group_tick {
            close_group(v, group_tick, group_must_start, group_started);
            group_tick = e.tick;
            group_must_start = !queue.is_empty();
            group_started = false;
            group_seen_start = false;
        }
        if let Some((q, _)) = &open {
            let other = e.body.quest().is_some_and(|x| x != *q) && !matches!(e.body, EventBody::Notified { .. });
            if other || matches!(e.body, EventBody::ExchangeStarted { .. }) {
                v.interleaving.push(format!("seq {}: {} inside quest {q}", e.seq, e.body.kind()));
            }
            if matches!(e.body, EventBody::TriggerFired { .. }) {
                v.trigger_timing.push(format!("seq {}: trigger inside quest {q}", e.seq));
            }
        }
        match &e.body {
            EventBody::SessionCreated { location, .. } => player_loc = location.clone(),
            EventBody::PlayerChoice { input } => match input {
                PlayerInput::Move { location } => {
                    player_loc = location.clone();
                    queue.retain(|(_, i, t, s)| {
                        let at = |c: &CharacterId| c == &player || home(c) == *location;
                        at(i) && at(t) && s.as_ref().is_none_or(at)
                    });
                }
                PlayerInput::Respond { quest, .. } => {
                    answered.insert(*quest);
                }
                PlayerInput::Initiate { .. } => {}
            },
            EventBody::ExchangeQueued { exchange, initiator, target, subject, position, player: by_player } => {
                let req = (exchange.clone(), initiator.clone(), target.clone(), subject.clone());
                if !by_player && !group_seen_start {
                    group_must_start = true;
                }
                if *by_player {
                    queue.retain(|r| r != &req);
                    queue.push_front(req);
                    if *position != 0 {
                        v.fifo.push(format!("seq {}: player request at {position}", e.seq));
                    }
                } else {
                    if queue.contains(&req) {
                        v.fifo.push(format!("seq {}: duplicate request queued", e.seq));
                    }
                    queue.push_back(req);
                    if *position != queue.len() - 1 {
                        v.fifo.push(format!("seq {}: appended at {position}, expected {}", e.seq, queue.len() - 1));
                    }
                }
            }
            EventBody::ExchangeStarted { quest, stage, exchange, initiator, target, subject } => {
                v.quests += 1;
                group_started = true;
                group_seen_start = true;
                started.insert(*quest);
                let req = (exchange.clone(), initiator.clone(), target.clone(), subject.clone());
                match queue.pop_front() {
                    Some(front) if front == req => {}
                    other => v.fifo.push(format!("seq {}: started {req:?}, queue front {other:?}", e.seq)),
                }
                for c in [Some(initiator), Some(target), subject.as_ref()].into_iter().flatten() {
                    if !loc_ok(c, &player_loc) {
                        v.location.push(format!("seq {}: {c} is not at {player_loc}", e.seq));
                    }
                }
                if *stage != 1 {
                    v.stage.push(format!("seq {}: started at stage {stage}", e.seq));
                }
                stage_of.insert(*quest, 1);
                open = Some((*quest, target.clone()));
            }
            EventBody::ResultComputed { quest, stage, .. } | EventBody::PlayerPrompt { quest, stage, .. } => {
                if stage_of.get(quest) != Some(&1) || *stage != 2 {
                    v.stage.push(format!("seq {}: result at stage {stage} after {:?}", e.seq, stage_of.get(quest)));
                }
                stage_of.insert(*quest, 2);
                if matches!(e.body, EventBody::ResultComputed { .. }) {
                    resolved.insert(*quest);
                    if open.as_ref().is_some_and(|(_, t)| t == &player) {
                        v.result_before_scene.push(format!("seq {}: player target got a computed result", e.seq));
                    }
                } else {
                    prompted.insert(*quest);
                }
            }
            EventBody::SceneGoTo { quest, .. } | EventBody::SceneLine { quest, .. } => {
                if scene_seen.insert(*quest) {
                    let to_player = open.as_ref().is_some_and(|(q, t)| q == quest && t == &player);
                    let ok = if to_player {
                        prompted.contains(quest) && answered.contains(quest)
                    } else {
                        resolved.contains(quest)
                    };
                    if !ok {
                        v.result_before_scene.push(format!("seq {}: scene of quest {quest} before its result", e.seq));
                    }
                }
            }
            EventBody::ExchangeCompleted { quest, stage, outcome, .. } => {
                let want = if *outcome == Outcome::Accept { 3 } else { 4 };
                if stage_of.get(quest) != Some(&2) || *stage != want {
                    v.stage.push(format!("seq {}: completed at stage {stage} after {:?}", e.seq, stage_of.get(quest)));
                }
                stage_of.insert(*quest, *stage);
                open = None;
            }
            EventBody::Error { quest: Some(q), stage, .. } => {
                if !started.contains(q) {
                    // failed before binding: the request was still consumed
                    group_started = true;
                    group_seen_start = true;
                    if queue.pop_front().is_none() {
                        v.fifo.push(format!("seq {}: quest {q} failed with an empty queue", e.seq));
                    }
                }
                let at = stage_of.get(q).copied().unwrap_or(0);
                if *stage != Some(at) {
                    v.stage.push(format!("seq {}: error reports stage {stage:?}, quest was at {at}", e.seq));
                }
                stage_of.insert(*q, 0);
                open = None;
            }
            EventBody::GoalsFormed { location, owner, .. } => {
                if *location != player_loc || !loc_ok(owner, &player_loc) {
                    v.location.push(format!("seq {}: goals formed away from the player", e.seq));
                }
            }
            EventBody::DesireComputed { npc, .. } => {
                if !loc_ok(npc, &player_loc) {
                    v.location.push(format!("seq {}: {npc} decided away from the player", e.seq));
                }
            }
            EventBody::StatusExpired { who, .. } => {
                if !loc_ok(who, &player_loc) {
                    v.location.push(format!("seq {}: status of absent {who} expired", e.seq));
                }
            }
            EventBody::TriggerFired { initiator, target, .. }
                if !loc_ok(initiator, &player_loc) || !loc_ok(target, &player_loc) =>
            {
                v.location.push(format!("seq {}: trigger on absent characters", e.seq));
            }
            _ => {}
        }
    }
    // the last tick may still be waiting on a prompt
    if !pending {
        close_group(v, group_tick, group_must_start, group_started);
    }
}
