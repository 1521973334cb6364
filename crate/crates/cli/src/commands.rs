//! The four subcommands. Each returns the process exit code.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use socialsim_core::dsl::{self, Diagnostic, ScenarioDoc, Severity};
use socialsim_core::event::{parse_log, Event, EventBody, PlayerInput, ScenePhase};
use socialsim_core::model::{CharacterId, MapKind, Response};
use socialsim_core::replay::{self, ReplayError, ReplayOutcome, ScriptError};
use socialsim_core::session::{recorded_inputs, Session};
use socialsim_core::volition::{self, Bindings};

use crate::style::Style;

pub const OK: u8 = 0;
pub const FAILED: u8 = 1;
pub const USAGE: u8 = 2;
pub const EXHAUSTED: u8 = 3;

pub const INSPECT_USAGE: &str = "\
Queries:
  network <network> <from> <to>                     value, goal and belief of <from> toward <to>
  history <exchange>                                every recorded outcome, oldest first
  volition <exchange> <initiator> <target> [subject] per-rule breakdown of the initiator's volition";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: PathBuf,
    pub seed: u64,
    pub ticks: u64,
    pub player_script: Option<PathBuf>,
    pub interactive: bool,
    pub out: Option<PathBuf>,
    pub debug: bool,
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    String::from_utf8(read(path)?).with_context(|| format!("{} is not valid UTF-8", path.display()))
}

fn fail(code: u8, err: impl std::fmt::Display) -> u8 {
    let style = Style::stderr();
    eprintln!("{} {err:#}", style.error("error:"));
    code
}

fn diagnostic_line(path: &Path, d: &Diagnostic, style: Style) -> String {
    let code = match d.severity {
        Severity::Error => style.error(d.code.as_str()),
        Severity::Warning => style.warning(d.code.as_str()),
    };
    format!("{}:{}:{} {code} {}", path.display(), d.line, d.column, d.message)
}

/// Reads and validates a scenario, printing diagnostics to stderr on failure.
fn load_scenario(path: &Path, bad_scenario: u8) -> Result<ScenarioDoc, u8> {
    let bytes = read(path).map_err(|e| fail(USAGE, e))?;
    let (doc, diags) = dsl::parse_bytes(&bytes);
    match doc {
        Some(doc) if !diags.iter().any(Diagnostic::is_error) => Ok(doc),
        _ => {
            let style = Style::stderr();
            for d in &diags {
                eprintln!("{}", diagnostic_line(path, d, style));
            }
            Err(bad_scenario)
        }
    }
}

pub fn validate(path: &Path) -> u8 {
    let bytes = match read(path) {
        Ok(b) => b,
        Err(e) => return fail(USAGE, e),
    };
    let (doc, diags) = dsl::parse_bytes(&bytes);
    let style = Style::stdout();
    for d in &diags {
        println!("{}", diagnostic_line(path, d, style));
    }
    if doc.is_some() && !diags.iter().any(Diagnostic::is_error) {
        OK
    } else {
        FAILED
    }
}

pub fn run(cfg: &RunConfig) -> u8 {
    let doc = match load_scenario(&cfg.scenario, FAILED) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let choices = match &cfg.player_script {
        Some(p) => match read_text(p).map_err(|e| e.to_string()).and_then(|t| replay::parse_script(&t).map_err(|e| format!("{}: {e}", p.display()))) {
            Ok(c) => c,
            Err(e) => return fail(USAGE, e),
        },
        None => Vec::new(),
    };
    let mut session = match Session::new(doc, cfg.seed) {
        Ok(s) => s,
        Err(e) => return fail(FAILED, e),
    };

    let outcome = if cfg.interactive {
        run_interactive(&mut session, cfg.ticks)
    } else {
        replay::run_scripted(&mut session, cfg.ticks, &choices)
    };

    if cfg.debug {
        let style = Style::stderr();
        for e in session.events() {
            eprintln!("{}", describe(&session, e, style));
        }
    }
    let log = session.log_text();
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &log).with_context(|| format!("cannot write {}", path.display())),
        None => std::io::stdout().write_all(log.as_bytes()).context("cannot write the log"),
    };
    if let Err(e) = written {
        return fail(USAGE, e);
    }
    match outcome {
        Ok(()) => OK,
        Err(e @ ScriptError::Exhausted { .. }) => fail(EXHAUSTED, e),
        Err(e) => fail(USAGE, e),
    }
}

/// Like a scripted run, but prompts are answered on the terminal and the
/// scene is narrated on stderr as it happens.
fn run_interactive(session: &mut Session, ticks: u64) -> Result<(), ScriptError> {
    let style = Style::stderr();
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    let mut shown = 0;
    let mut done = 0;
    loop {
        for e in &session.events()[shown..] {
            if let Some(text) = narrate(session, e, style) {
                eprintln!("{text}");
            }
        }
        shown = session.events().len();
        if let Some(q) = session.pending_prompt() {
            let (quest, seq) = (q.id, session.last_seq());
            let ex = session.doc().exchanges.get(&q.exchange).map_or(q.exchange.clone(), |e| e.display_name().to_string());
            let who = q.initiator.as_ref().map_or_else(String::new, |i| name(session, i));
            let about = q.subject.as_ref().map(|s| format!(" about {}", name(session, s))).unwrap_or_default();
            loop {
                eprint!("{} {who} tries {ex}{about} on you. [a]ccept, [n]eutral or [r]eject? ", style.bold(">"));
                let _ = std::io::stderr().flush();
                let Some(Ok(line)) = lines.next() else {
                    eprintln!();
                    return if done < ticks { Err(ScriptError::Exhausted { seq }) } else { Ok(()) };
                };
                let choice = match line.trim().to_ascii_lowercase().as_str() {
                    "a" | "accept" => Response::Accept,
                    "n" | "neutral" => Response::Neutral,
                    "r" | "reject" => Response::Reject,
                    _ => continue,
                };
                session.player_respond(quest, choice)?;
                break;
            }
            continue;
        }
        if done == ticks {
            return Ok(());
        }
        session.tick()?;
        done += 1;
    }
}

fn name(session: &Session, id: &CharacterId) -> String {
    session.state().character(id).map_or_else(|| id.to_string(), |c| c.name.clone())
}

/// Scene text and outcomes only, for interactive play.
fn narrate(session: &Session, e: &Event, style: Style) -> Option<String> {
    match &e.body {
        EventBody::SceneGoTo { text, .. } => Some(style.dim(text)),
        EventBody::SceneLine { speaker, text, .. } => Some(format!("{}: \"{text}\"", style.bold(&name(session, speaker)))),
        EventBody::ExchangeCompleted { exchange, outcome, .. } => Some(style.dim(&format!("({exchange}: {outcome})"))),
        EventBody::TriggerFired { rule, initiator, target, .. } => {
            Some(style.dim(&format!("({rule}: {} and {})", name(session, initiator), name(session, target))))
        }
        _ => None,
    }
}

/// One readable line per event for `--debug`.
fn describe(session: &Session, e: &Event, style: Style) -> String {
    let head = style.dim(&format!("[t{} #{}]", e.tick, e.seq));
    let n = |id: &CharacterId| name(session, id);
    let body = match &e.body {
        EventBody::SessionCreated { seed, scenario, player, location } => {
            format!("session {scenario} seed {seed}, {} at {location}", n(player))
        }
        EventBody::GoalsFormed { owner, network, other, goal, .. } => {
            format!("{} sets a {network} goal of {goal} toward {}", n(owner), n(other))
        }
        EventBody::DesireComputed { npc, desires } => {
            let mut s = format!("{} wants:", n(npc));
            if desires.is_empty() {
                s.push_str(" nothing");
            }
            for d in desires {
                let about = d.subject.as_ref().map(|x| format!(" about {}", n(x))).unwrap_or_default();
                let _ = write!(s, " {}→{}{about} ({})", d.exchange, n(&d.target), d.volition);
            }
            s
        }
        EventBody::ExchangeQueued { exchange, initiator, target, position, .. } => {
            format!("queued {exchange} {}→{} at {position}", n(initiator), n(target))
        }
        EventBody::ExchangeStarted { quest, exchange, initiator, target, .. } => {
            format!("quest {quest}: {} starts {exchange} with {}", n(initiator), n(target))
        }
        EventBody::ResultComputed { quest, total, outcome, .. } => format!("quest {quest}: responder total {total}, {outcome:?}"),
        EventBody::PlayerPrompt { quest, exchange, .. } => format!("quest {quest}: player asked to answer {exchange}"),
        EventBody::PlayerChoice { input } => match input {
            PlayerInput::Respond { quest, choice } => format!("player answers quest {quest}: {choice:?}"),
            PlayerInput::Initiate { exchange, target, .. } => format!("player starts {exchange} with {}", n(target)),
            PlayerInput::Move { location } => format!("player moves to {location}"),
        },
        EventBody::SceneGoTo { text, .. } => text.clone(),
        EventBody::SceneLine { phase, speaker, text, .. } => {
            let verb = if *phase == ScenePhase::Performance { "says" } else { "answers" };
            format!("{} {verb} \"{text}\"", n(speaker))
        }
        EventBody::ExchangeCompleted { quest, exchange, outcome, .. } => format!("quest {quest}: {exchange} ends {outcome}"),
        EventBody::TriggerFired { rule, initiator, target, pass } => {
            format!("trigger {rule} for {} and {} (pass {pass})", n(initiator), n(target))
        }
        EventBody::StateDelta { change } => describe_change(change),
        EventBody::StatusExpired { who, status, .. } => format!("{} is no longer {status}", n(who)),
        EventBody::Notified { npc, quest } => format!("{} hears of quest {quest}", n(npc)),
        EventBody::Error { code, message, .. } => style.error(&format!("{code}: {message}")),
    };
    format!("{head} {body}")
}

fn describe_change(change: &socialsim_core::model::StateChange) -> String {
    use socialsim_core::model::StateChange;
    match change {
        StateChange::Score { map, network, owner, other, old, new } => {
            format!("{} {network} {owner} -> {other}: {old} -> {new}", map.as_str())
        }
        StateChange::StatusAdded { who, status, target } => match target {
            Some(t) => format!("{who} is now {status} at {t}"),
            None => format!("{who} is now {status}"),
        },
        StateChange::StatusRemoved { who, status, .. } => format!("{who} is no longer {status}"),
        StateChange::Relationship { kind, a, b, active } => {
            format!("{kind} {a} and {b}: {}", if *active { "on" } else { "off" })
        }
    }
}

fn replay_failure(e: ReplayError) -> u8 {
    match e {
        ReplayError::ScenarioMismatch { .. } => {
            println!("diverged at seq 1");
            fail(FAILED, e)
        }
        e => fail(USAGE, format!("malformed log: {e}")),
    }
}

pub fn replay(file: &Path, log: &Path) -> u8 {
    let doc = match load_scenario(file, USAGE) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let text = match read_text(log) {
        Ok(t) => t,
        Err(e) => return fail(USAGE, e),
    };
    let style = Style::stdout();
    match replay::replay_log(&doc, &text) {
        Ok(ReplayOutcome::Identical) => {
            println!("{} ({} events)", style.ok("identical"), text.lines().count());
            OK
        }
        Ok(ReplayOutcome::Diverged(seq)) => {
            println!("{} at seq {seq}", style.error("diverged"));
            FAILED
        }
        Ok(ReplayOutcome::Truncated) => fail(USAGE, "truncated log: it stops before the recorded run ends"),
        Err(e) => replay_failure(e),
    }
}

/// Rebuilds the session a log describes, refusing logs that do not replay.
fn rebuild(doc: &ScenarioDoc, text: &str) -> Result<Session, u8> {
    match replay::replay_log(doc, text) {
        Ok(ReplayOutcome::Identical) => {}
        Ok(ReplayOutcome::Diverged(seq)) => return Err(fail(FAILED, format!("log does not replay: diverged at seq {seq}"))),
        Ok(ReplayOutcome::Truncated) => return Err(fail(USAGE, "truncated log")),
        Err(e) => return Err(replay_failure(e)),
    }
    let events = parse_log(text).map_err(|e| fail(USAGE, e))?;
    let Some(EventBody::SessionCreated { seed, .. }) = events.first().map(|e| &e.body) else {
        return Err(fail(USAGE, "log does not start with SessionCreated"));
    };
    let until = events.last().map_or(0, |e| e.tick);
    replay::replay(doc.clone(), *seed, &recorded_inputs(&events), until).map_err(|e| fail(FAILED, e))
}

fn usage(msg: &str) -> u8 {
    eprintln!("{} {msg}\n\n{INSPECT_USAGE}", Style::stderr().error("error:"));
    USAGE
}

pub fn inspect(file: &Path, log: &Path, query: &[String]) -> u8 {
    let doc = match load_scenario(file, USAGE) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let text = match read_text(log) {
        Ok(t) => t,
        Err(e) => return fail(USAGE, e),
    };
    let q: Vec<&str> = query.iter().map(String::as_str).collect();
    // check the query before the (possibly slow) replay
    let shape_ok = matches!(q.as_slice(), ["network", _, _, _] | ["history", _] | ["volition", _, _, _] | ["volition", _, _, _, _]);
    if !shape_ok {
        return usage(&format!("unknown query: {}", query.join(" ")));
    }
    let session = match rebuild(&doc, &text) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let state = session.state();
    let character = |id: &str| {
        let id = CharacterId::new(id);
        if state.character(&id).is_some() {
            Ok(id)
        } else {
            Err(usage(&format!("unknown character {id}")))
        }
    };
    match q.as_slice() {
        ["network", net, from, to] => {
            let (from, to) = match (character(from), character(to)) {
                (Ok(f), Ok(t)) => (f, t),
                (Err(c), _) | (_, Err(c)) => return c,
            };
            if state.network_range(net).is_none() {
                return usage(&format!("unknown network {net}"));
            }
            println!("{net} {from} -> {to}");
            for map in [MapKind::Value, MapKind::Goal, MapKind::Belief] {
                match state.score(map, net, &from, &to) {
                    Ok(v) => println!("  {:<7}{v}", map.as_str()),
                    Err(e) => return fail(USAGE, e),
                }
            }
            OK
        }
        ["history", exchange] => {
            if !doc.exchanges.contains_key(*exchange) {
                return usage(&format!("unknown exchange {exchange}"));
            }
            let records: Vec<_> = state.history().iter().filter(|r| r.exchange == *exchange).collect();
            if records.is_empty() {
                println!("no {exchange} exchanges recorded");
            }
            for r in records {
                println!("tick {:<4} {} -> {}  {}", r.tick, r.initiator, r.target, r.outcome);
            }
            OK
        }
        ["volition", exchange, rest @ ..] => {
            let Some(ex) = doc.exchanges.get(*exchange) else {
                return usage(&format!("unknown exchange {exchange}"));
            };
            let mut ids = Vec::new();
            for id in rest {
                match character(id) {
                    Ok(c) => ids.push(c),
                    Err(code) => return code,
                }
            }
            let b = Bindings::pair(&ids[0], &ids[1]).with_subject(ids.get(2));
            let about = b.subject.as_ref().map(|s| format!(" about {s}")).unwrap_or_default();
            println!("{exchange}: {} -> {}{about}", b.initiator, b.target);
            match volition::first_failing(&ex.preconditions, state, &b) {
                Ok(None) => println!("preconditions hold"),
                Ok(Some(lit)) => println!("precondition fails: {}", dsl::literal_text(lit)),
                Err(e) => return fail(USAGE, e),
            }
            match volition::eval_rule_set(&ex.initiator_rules, state, &b) {
                Ok(breakdown) => {
                    println!("{breakdown}");
                    OK
                }
                Err(e) => fail(USAGE, e),
            }
        }
        _ => usage(&format!("unknown query: {}", query.join(" "))),
    }
}
