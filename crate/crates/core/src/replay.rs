//! Deterministic replay and scripted runs.
//!
//! A log is fully determined by the scenario, the seed and the player's
//! inputs. Replay rebuilds a session from those, ticking up to the tick each
//! input was recorded at, and compares the regenerated log with the recorded
//! one line by line.

use thiserror::Error;

use crate::dsl::ScenarioDoc;
use crate::event::{parse_log, Event, EventBody, LogError, PlayerInput};
use crate::model::Response;
use crate::session::{recorded_inputs, Session, SessionError};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("log does not start with SessionCreated")]
    MissingHeader,
    #[error("log was recorded against scenario {recorded}, not {actual}")]
    ScenarioMismatch { recorded: String, actual: String },
    #[error(transparent)]
    Session(#[from] SessionError),
}

/// Result of comparing a regenerated log with a recorded one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayOutcome {
    Identical,
    /// The first event (by seq) that differs.
    Diverged(u64),
    /// The recorded log is a proper prefix of the regenerated one.
    Truncated,
}

/// Runs a session from `inputs` and returns it. Each input is applied once
/// the session reaches the tick it was recorded at; afterwards the session
/// ticks on until `until_tick`.
///
/// An input the session refuses is an error; the caller treats it as a
/// divergence.
pub fn replay(doc: ScenarioDoc, seed: u64, inputs: &[(u64, PlayerInput)], until_tick: u64) -> Result<Session, SessionError> {
    let mut s = Session::new(doc, seed)?;
    drive(&mut s, inputs, until_tick)?;
    Ok(s)
}

fn drive(s: &mut Session, inputs: &[(u64, PlayerInput)], until_tick: u64) -> Result<(), SessionError> {
    for (tick, input) in inputs {
        while s.current_tick() < *tick {
            s.tick()?;
        }
        s.apply_input(input)?;
    }
    while s.current_tick() < until_tick {
        s.tick()?;
    }
    Ok(())
}

/// First differing line of two logs, as a seq number.
pub fn compare_logs(recorded: &str, regenerated: &str) -> ReplayOutcome {
    let a: Vec<&str> = recorded.lines().collect();
    let b: Vec<&str> = regenerated.lines().collect();
    match a.iter().zip(&b).position(|(x, y)| x != y) {
        Some(i) => ReplayOutcome::Diverged(i as u64 + 1),
        None if a.len() == b.len() => ReplayOutcome::Identical,
        None if a.len() < b.len() => ReplayOutcome::Truncated,
        None => ReplayOutcome::Diverged(b.len() as u64 + 1),
    }
}

/// Replays a recorded log against `doc`: seed from `SessionCreated`, inputs
/// from `PlayerChoice` events, run length from the last event's tick.
pub fn replay_log(doc: &ScenarioDoc, log_text: &str) -> Result<ReplayOutcome, ReplayError> {
    let events = parse_log(log_text)?;
    let (seed, recorded_digest) = match events.first().map(|e| &e.body) {
        Some(EventBody::SessionCreated { seed, scenario, .. }) => (*seed, scenario.clone()),
        _ => return Err(ReplayError::MissingHeader),
    };
    let actual = crate::session::scenario_digest(doc);
    if recorded_digest != actual {
        return Err(ReplayError::ScenarioMismatch { recorded: recorded_digest, actual });
    }
    let inputs = recorded_inputs(&events);
    let until = events.last().map_or(0, |e| e.tick);
    Ok(regenerate_and_compare(doc, seed, &inputs, until, log_text))
}

/// Regenerates from the given inputs and compares with `log_text`. A refused
/// input or a tick blocked by a prompt diverges at the next event the
/// partial session would have written.
pub fn regenerate_and_compare(
    doc: &ScenarioDoc,
    seed: u64,
    inputs: &[(u64, PlayerInput)],
    until_tick: u64,
    log_text: &str,
) -> ReplayOutcome {
    let Ok(mut s) = Session::new(doc.clone(), seed) else {
        return ReplayOutcome::Diverged(1);
    };
    let refused = drive(&mut s, inputs, until_tick).is_err();
    let regenerated = s.log_text();
    match compare_logs(log_text, &regenerated) {
        ReplayOutcome::Identical | ReplayOutcome::Truncated if refused => {
            ReplayOutcome::Diverged(regenerated.lines().count() as u64 + 1)
        }
        outcome => outcome,
    }
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("line {line}: expected Accept, Neutral or Reject, found {found:?}")]
    BadChoice { line: usize, found: String },
    #[error("player script ran out of choices at prompt seq {seq}")]
    Exhausted { seq: u64 },
    #[error(transparent)]
    Session(#[from] SessionError),
}

/// Parses a player script: one response per line, `#` comments and blank
/// lines ignored.
pub fn parse_script(text: &str) -> Result<Vec<Response>, ScriptError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let choice = Response::from_symbol(line).ok_or_else(|| ScriptError::BadChoice { line: i + 1, found: line.to_string() })?;
        out.push(choice);
    }
    Ok(out)
}

/// Runs `ticks` ticks, answering player prompts from `choices` in order. A
/// prompt that blocks a remaining tick with no choice left is an error; a
/// prompt raised by the last tick is answered if a choice remains and left
/// pending otherwise.
pub fn run_scripted(session: &mut Session, ticks: u64, choices: &[Response]) -> Result<(), ScriptError> {
    let mut next = choices.iter();
    let mut done = 0;
    loop {
        if let Some(q) = session.pending_prompt() {
            let (quest, seq) = (q.id, prompt_seq(session.events(), q.id));
            match next.next() {
                Some(choice) => {
                    session.player_respond(quest, *choice)?;
                }
                None if done < ticks => return Err(ScriptError::Exhausted { seq }),
                None => return Ok(()),
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

fn prompt_seq(events: &[Event], quest: u64) -> u64 {
    events
        .iter()
        .rev()
        .find(|e| matches!(e.body, EventBody::PlayerPrompt { quest: q, .. } if q == quest))
        .map_or(0, |e| e.seq)
}
