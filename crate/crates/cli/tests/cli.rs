//! End-to-end tests of the `socialsim` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use std::io::Write;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

const HOUSE: &str = "crates/core/scenarios/house.social";
const SCRIPT: &str = "crates/core/scenarios/house.script";
const GOLDEN_LOG: &str = "crates/core/tests/golden/house_seed42.log";

fn socialsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_socialsim"))
        .args(args)
        .current_dir(root())
        .env("SOCIALSIM_NO_COLOR", "1")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

// --- validate -------------------------------------------------------------

#[test]
fn validate_accepts_the_house_scenario_silently() {
    let o = socialsim(&["validate", HOUSE]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");
}

#[test]
fn validate_lists_diagnostics_with_positions() {
    let o = socialsim(&["validate", "crates/core/tests/fixtures/diagnostics/missing_scene.social"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), golden("validate_missing_scene.txt"));
    for line in stdout(&o).lines() {
        let (pos, rest) = line.split_once(' ').unwrap();
        let parts: Vec<&str> = pos.rsplitn(3, ':').collect();
        assert!(parts[0].parse::<u32>().is_ok() && parts[1].parse::<u32>().is_ok(), "{line}");
        assert!(rest.starts_with("missing_scene "));
    }
}

#[test]
fn validate_reports_every_fixture() {
    let dir = root().join("crates/core/tests/fixtures/diagnostics");
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_stem().unwrap().to_str().unwrap().to_string();
        let o = socialsim(&["validate", path_str(&path)]);
        let expect = match name.as_str() {
            "valid" | "unsatisfiable_condition" => 0,
            _ => 1,
        };
        assert_eq!(o.status.code(), Some(expect), "{name}: {}", stdout(&o));
        if name != "valid" {
            assert!(stdout(&o).contains(&format!(" {name} ")), "{name}: {}", stdout(&o));
        }
    }
}

#[test]
fn validate_missing_file_is_a_usage_error() {
    let o = socialsim(&["validate", "no/such/file.social"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read"));
}

// --- run ------------------------------------------------------------------

#[test]
fn run_reproduces_the_golden_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.log");
    let o = socialsim(&["run", HOUSE, "--seed", "42", "--ticks", "12", "--player-script", SCRIPT, "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), std::fs::read_to_string(root().join(GOLDEN_LOG)).unwrap());
}

#[test]
fn ten_ticks_show_neutral_flirts_then_a_reject() {
    let o = socialsim(&["run", HOUSE, "--seed", "42", "--ticks", "10", "--player-script", SCRIPT]);
    assert_eq!(o.status.code(), Some(0));
    let flirts: Vec<String> = stdout(&o)
        .lines()
        .filter(|l| l.contains("\"kind\":\"ExchangeCompleted\"") && l.contains("\"exchange\":\"Flirt\""))
        .map(|l| l.rsplit("\"outcome\":\"").next().unwrap().trim_end_matches("\"}").to_string())
        .collect();
    assert_eq!(flirts[0], "Neutral");
    let first_reject = flirts.iter().position(|o| o == "Reject").unwrap();
    assert!(flirts[..first_reject].iter().all(|o| o == "Neutral"));
}

#[test]
fn zero_ticks_only_set_the_scene() {
    let o = socialsim(&["run", HOUSE, "--seed", "1", "--ticks", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().next().unwrap().contains("\"kind\":\"SessionCreated\""));
    assert!(out.lines().skip(1).all(|l| l.contains("\"kind\":\"GoalsFormed\"")));
}

#[test]
fn same_config_same_log_file() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.log"), dir.path().join("b.log"));
    for out in [&a, &b] {
        let o = socialsim(&["run", "crates/core/scenarios/sandbox.social", "--seed", "9", "--ticks", "15", "--player-script", SCRIPT, "--out", path_str(out)]);
        assert!(matches!(o.status.code(), Some(0) | Some(3)));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn running_out_of_answers_exits_3_with_the_prompt_seq() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("partial.log");
    let o = socialsim(&["run", HOUSE, "--seed", "42", "--ticks", "12", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(3));
    let log = std::fs::read_to_string(&out).unwrap();
    let last = log.lines().last().unwrap();
    assert!(last.contains("\"kind\":\"PlayerPrompt\""));
    let seq = last.trim_start_matches("{\"seq\":").split(',').next().unwrap();
    assert!(stderr(&o).contains(&format!("seq {seq}")), "{}", stderr(&o));
}

#[test]
fn run_refuses_a_broken_scenario() {
    let o = socialsim(&["run", "crates/core/tests/fixtures/diagnostics/player_count.social", "--ticks", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("player_count"));
    assert_eq!(stdout(&o), "");
}

#[test]
fn debug_run_prints_a_trace() {
    let o = socialsim(&["run", HOUSE, "--seed", "42", "--ticks", "2", "--debug"]);
    assert_eq!(o.status.code(), Some(0));
    let err = stderr(&o);
    assert!(err.contains("Sabjorn wants: Flirt→Ysolda"), "{err}");
    assert!(err.contains("Ysolda answers \"You are too kind\""));
    assert!(!err.contains('\x1b'));
}

#[test]
fn interactive_answers_match_a_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("i.log");
    let mut child = Command::new(env!("CARGO_BIN_EXE_socialsim"))
        .args(["run", HOUSE, "--seed", "42", "--ticks", "12", "--interactive", "--out", path_str(&out)])
        .current_dir(root())
        .env("SOCIALSIM_NO_COLOR", "1")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"a\nmaybe\nn\nreject\nA\na\na\na\na\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), std::fs::read_to_string(root().join(GOLDEN_LOG)).unwrap());
    assert!(stderr(&o).contains("Sabjorn tries Compliment on you"));
}

// --- replay ---------------------------------------------------------------

#[test]
fn replay_of_an_unmodified_log_is_identical() {
    let o = socialsim(&["replay", HOUSE, GOLDEN_LOG]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("identical"));
}

#[test]
fn replay_names_the_edited_delta() {
    let text = std::fs::read_to_string(root().join(GOLDEN_LOG)).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let i = lines.iter().position(|l| l.contains("\"kind\":\"StateDelta\"")).unwrap();
    lines[i] = lines[i].replacen("\"new\":", "\"new\":1", 1);
    let dir = tempfile::tempdir().unwrap();
    let edited = dir.path().join("edited.log");
    std::fs::write(&edited, lines.join("\n") + "\n").unwrap();
    let o = socialsim(&["replay", HOUSE, path_str(&edited)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), format!("diverged at seq {}\n", i + 1));
}

#[test]
fn replay_rejects_truncated_and_malformed_logs() {
    let text = std::fs::read_to_string(root().join(GOLDEN_LOG)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    // cut inside a tick
    let cut = dir.path().join("cut.log");
    std::fs::write(&cut, text.lines().take(16).collect::<Vec<_>>().join("\n") + "\n").unwrap();
    assert_eq!(socialsim(&["replay", HOUSE, path_str(&cut)]).status.code(), Some(2));
    // cut inside a line
    let torn = dir.path().join("torn.log");
    std::fs::write(&torn, &text[..text.len() / 2]).unwrap();
    assert_eq!(socialsim(&["replay", HOUSE, path_str(&torn)]).status.code(), Some(2));
    let junk = dir.path().join("junk.log");
    std::fs::write(&junk, "not a log\n").unwrap();
    assert_eq!(socialsim(&["replay", HOUSE, path_str(&junk)]).status.code(), Some(2));
    assert_eq!(socialsim(&["replay", HOUSE, "missing.log"]).status.code(), Some(2));
}

#[test]
fn replay_against_another_scenario_diverges_at_the_header() {
    let o = socialsim(&["replay", "crates/core/scenarios/sandbox.social", GOLDEN_LOG]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "diverged at seq 1\n");
}

// --- inspect --------------------------------------------------------------

#[test]
fn inspect_volition_prints_the_breakdown() {
    let o = socialsim(&["inspect", HOUSE, GOLDEN_LOG, "volition", "Flirt", "Sabjorn", "Ysolda"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out, golden("volition_flirt.txt"));
    for rule in ["base", "liked_trait", "disliked_trait", "confident", "total"] {
        assert!(out.contains(rule), "{rule}");
    }
}

#[test]
fn inspect_volition_agrees_with_the_listing() {
    // final attraction value, then the listing by hand: one liked trait
    // (attractive), none disliked, Sabjorn is an extrovert
    let net = stdout(&socialsim(&["inspect", HOUSE, GOLDEN_LOG, "network", "attraction", "Sabjorn", "Ysolda"]));
    let value: i64 = net.lines().find(|l| l.trim_start().starts_with("value")).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    let mut v = value + 1;
    if v > 0 {
        v += 2;
    }
    let out = stdout(&socialsim(&["inspect", HOUSE, GOLDEN_LOG, "volition", "Flirt", "Sabjorn", "Ysolda"]));
    let total: i64 = out.lines().last().unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert_eq!(total, v);
}

#[test]
fn inspect_network_and_history() {
    let o = socialsim(&["inspect", HOUSE, GOLDEN_LOG, "network", "attraction", "Sabjorn", "Ysolda"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("network_attraction.txt"));
    let o = socialsim(&["inspect", HOUSE, GOLDEN_LOG, "history", "Flirt"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("history_flirt.txt"));
    let ticks: Vec<u64> = stdout(&o).lines().map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap()).collect();
    assert!(ticks.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn inspect_shows_an_accepted_exchange_raising_the_value() {
    let before = stdout(&socialsim(&["inspect", HOUSE, GOLDEN_LOG, "network", "friendship", "Sabjorn", "Ysolda"]));
    let value: i64 = before.lines().find(|l| l.trim_start().starts_with("value")).unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    // two accepted compliments at +10 each from a start of 0
    assert!(value >= 10, "{before}");
}

#[test]
fn inspect_rejects_unknown_queries() {
    let o = socialsim(&["inspect", HOUSE, GOLDEN_LOG, "gossip", "Sabjorn"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Queries:"));
    let o = socialsim(&["inspect", HOUSE, GOLDEN_LOG, "network", "attraction", "Sabjorn", "Nobody"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_documents_exit_codes() {
    let o = socialsim(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Exit codes:"));
    assert!(stdout(&o).contains("SOCIALSIM_NO_COLOR"));
}
