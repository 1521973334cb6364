//! Canonical printer.

use std::fmt::Write;

use super::ScenarioDoc;
use crate::exchange::{Effect, EffectOp};
use crate::volition::{Atom, Condition, InfluenceRule, Literal, TraitRef, WeightTerm};

pub(crate) fn serialize(doc: &ScenarioDoc) -> String {
    let mut out = String::new();
    let section = |out: &mut String, body: String| {
        if body.is_empty() {
            return;
        }
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&body);
    };

    let mut s = String::new();
    for (name, n) in &doc.networks {
        let r = n.range;
        let _ = writeln!(s, "network {name} range {} {} default {}", r.min, r.max, r.default);
    }
    section(&mut out, s);

    let mut s = String::new();
    for name in doc.traits.keys() {
        let _ = writeln!(s, "trait {name}");
    }
    section(&mut out, s);

    let mut s = String::new();
    for (name, st) in &doc.statuses {
        s.push_str("status ");
        s.push_str(name);
        if st.targeted {
            s.push_str(" targeted");
        }
        if st.duration > 0 {
            let _ = write!(s, " duration {}", st.duration);
        }
        s.push('\n');
    }
    section(&mut out, s);

    let mut s = String::new();
    for name in doc.relationships.keys() {
        let _ = writeln!(s, "relationship {name}");
    }
    section(&mut out, s);

    let mut s = String::new();
    for name in doc.locations.keys() {
        let _ = writeln!(s, "location {name}");
    }
    section(&mut out, s);

    for (id, c) in &doc.characters {
        let mut s = format!("character {id} {{\n");
        if let Some(name) = &c.name {
            let _ = writeln!(s, "  name {}", quote(name));
        }
        let _ = writeln!(s, "  gender {}", c.gender);
        let _ = writeln!(s, "  race {}", c.race);
        let _ = writeln!(s, "  orientation {}", c.orientation);
        if !c.location.is_empty() {
            let _ = writeln!(s, "  location {}", c.location);
        }
        if c.player {
            s.push_str("  player\n");
        }
        for (label, set) in [("traits", &c.traits), ("likes", &c.likes), ("dislikes", &c.dislikes)] {
            if !set.is_empty() {
                let names: Vec<&str> = set.keys().map(String::as_str).collect();
                let _ = writeln!(s, "  {label} {}", names.join(", "));
            }
        }
        for ((map, net, other), (v, _)) in &c.scores {
            let _ = writeln!(s, "  {} {net} -> {other} = {v}", map.as_str());
        }
        for (kind, target) in c.statuses.keys() {
            match target {
                Some(t) => {
                    let _ = writeln!(s, "  status {kind} -> {t}");
                }
                None => {
                    let _ = writeln!(s, "  status {kind}");
                }
            }
        }
        for (kind, other) in c.relationships.keys() {
            let _ = writeln!(s, "  relationship {kind} {other}");
        }
        s.push_str("}\n");
        section(&mut out, s);
    }

    for (id, ex) in &doc.exchanges {
        let mut s = format!("exchange {id} {{\n");
        if let Some(name) = &ex.name {
            let _ = writeln!(s, "  name {}", quote(name));
        }
        let _ = writeln!(s, "  intent {}", ex.intent);
        if ex.subject {
            s.push_str("  subject\n");
        }
        if let Some(t) = ex.accept_above {
            let _ = writeln!(s, "  accept_above {t}");
        }
        if !ex.preconditions.literals.is_empty() {
            let _ = writeln!(s, "  pre {}", condition(&ex.preconditions));
        }
        for r in &ex.initiator_rules {
            let _ = writeln!(s, "  initiator {}", rule(r));
        }
        for r in &ex.responder_rules {
            let _ = writeln!(s, "  responder {}", rule(r));
        }
        for (resp, effects) in &ex.effects {
            let _ = write!(s, "  on {resp} ");
            effect_block(&mut s, effects, "  ");
        }
        for (resp, scene) in &ex.scenes {
            let _ = writeln!(s, "  scene {resp} {{");
            if let Some(g) = &scene.goto {
                let _ = writeln!(s, "    goto {}", quote(g));
            }
            let _ = writeln!(s, "    perform {}", quote(&scene.perform));
            let _ = writeln!(s, "    respond {}", quote(&scene.respond));
            s.push_str("  }\n");
        }
        s.push_str("}\n");
        section(&mut out, s);
    }

    for (net, block) in &doc.goal_blocks {
        let mut s = format!("goals {net} {{\n");
        for r in &block.rules {
            let _ = writeln!(s, "  {}", rule(r));
        }
        s.push_str("}\n");
        section(&mut out, s);
    }

    for t in &doc.triggers {
        let mut s = format!("trigger {} when {} then ", t.id, condition(&t.when));
        effect_block(&mut s, &t.effects, "");
        section(&mut out, s);
    }
    out
}

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\t' => q.push_str("\\t"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

fn effect_block(s: &mut String, effects: &[Effect], indent: &str) {
    if effects.is_empty() {
        s.push_str("{ }\n");
        return;
    }
    s.push_str("{\n");
    for e in effects {
        let _ = writeln!(s, "{indent}  {}", effect(e));
    }
    let _ = writeln!(s, "{indent}}}");
}

fn effect(e: &Effect) -> String {
    match &e.op {
        EffectOp::Score { map, network, from, to, delta } => {
            let (op, n) = if *delta < 0 && *delta != i64::MIN { ("-=", -delta) } else { ("+=", *delta) };
            format!("{} {network} {} -> {} {op} {n}", map.as_str(), from.as_str(), to.as_str())
        }
        EffectOp::StatusAdd { who, kind, at, duration } => {
            let mut s = format!("status add {} {kind}", who.as_str());
            if let Some(at) = at {
                let _ = write!(s, " -> {}", at.as_str());
            }
            if let Some(d) = duration {
                let _ = write!(s, " for {d}");
            }
            s
        }
        EffectOp::StatusRemove { who, kind } => format!("status remove {} {kind}", who.as_str()),
        EffectOp::Relationship { kind, a, b, active } => {
            format!("relationship {kind} {} {} {active}", a.as_str(), b.as_str())
        }
    }
}

fn rule(r: &InfluenceRule) -> String {
    let weight = match &r.weight {
        WeightTerm::Constant(c) => c.to_string(),
        WeightTerm::Score { map, network, from, to } => {
            format!("{}({network}, {}, {})", map.as_str(), from.as_str(), to.as_str())
        }
    };
    let per = if r.per_trait { " per trait" } else { "" };
    format!("rule {} weight {weight}{per} when {}", r.id, condition(&r.when))
}

pub(crate) fn condition(c: &Condition) -> String {
    if c.literals.is_empty() {
        return "true".to_string();
    }
    let parts: Vec<String> = c.literals.iter().map(literal).collect();
    parts.join(" and ")
}

pub(crate) fn literal(l: &Literal) -> String {
    let a = atom(&l.atom);
    if l.negated {
        format!("not {a}")
    } else {
        a
    }
}

fn tref(t: &TraitRef) -> &str {
    match t {
        TraitRef::Named(n) => n,
        TraitRef::Each => "trait",
    }
}

fn atom(a: &Atom) -> String {
    match a {
        Atom::True => "true".to_string(),
        Atom::HasTrait(r, t) => format!("has_trait({}, {})", r.as_str(), tref(t)),
        Atom::Likes(r, t) => format!("likes({}, {})", r.as_str(), tref(t)),
        Atom::Dislikes(r, t) => format!("dislikes({}, {})", r.as_str(), tref(t)),
        Atom::OtherHas(t) => format!("other_has({})", tref(t)),
        Atom::HasStatus { who, kind, at } => match at {
            Some(at) => format!("has_status({}, {kind}, {})", who.as_str(), at.as_str()),
            None => format!("has_status({}, {kind})", who.as_str()),
        },
        Atom::Score { map, network, from, to, op, threshold } => format!(
            "{}({network}, {}, {}) {} {threshold}",
            map.as_str(),
            from.as_str(),
            to.as_str(),
            op.as_str()
        ),
        Atom::Relationship { kind, a, b } => format!("relationship({kind}, {}, {})", a.as_str(), b.as_str()),
        Atom::Same(attr) => format!("same({})", attr.as_str()),
        Atom::Different(attr) => format!("different({})", attr.as_str()),
        Atom::OrientationCompatible(a, b) => format!("orientation_compatible({}, {})", a.as_str(), b.as_str()),
        Atom::History { exchange, outcomes, initiator, target, op, count } => format!(
            "history({exchange}, {outcomes}, {}, {}) {} {count}",
            initiator.as_str(),
            target.as_str(),
            op.as_str()
        ),
        Atom::Witnessed { observer, exchange, outcomes, about, op, count } => format!(
            "witnessed({}, {exchange}, {outcomes}, {}) {} {count}",
            observer.as_str(),
            about.as_str(),
            op.as_str()
        ),
        Atom::Volition { op, threshold } => format!("volition {} {threshold}", op.as_str()),
        Atom::Chance(p) => format!("chance({p})"),
    }
}
