//! Match execution, trace files and trace verification.
//!
//! A trace is line-delimited JSON. The first line is a header describing the
//! match; every following line records one turn:
//!
//! ```text
//! {"a":1,"b":1,"rounds":1,"seed":0,"alice_strategy":"skipper","bob_strategy":"skipper","format_version":1}
//! {"turn":1,"side":"alice","appends":[],"live":{"alice":[],"bob":[]},"verdict":"AliceWinWitnessed"}
//! {"turn":2,"side":"bob","appends":[[0,5]],"live":{"alice":[],"bob":[0]},"verdict":"BobLeading"}
//! ```
//!
//! `live` holds the full live sets after the turn. Appends are written as
//! `[label, value]`; the reader also accepts `[label, value, index]`, where
//! `index` is the position the value claims to occupy. Writers never emit the
//! third element, but hand-edited traces can, and the verifier checks it.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{GameConfig, GameError, GameState, Referee, Side, Verdict, Witness, VALUE_MAX};
use crate::strategies::{Strategy, StrategyError};

pub const FORMAT_VERSION: u32 = 1;

/// Owner turns a live sequence may go without an append.
pub const FAIRNESS_WINDOW: usize = 4;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("malformed trace at record {record}: {reason}")]
    Malformed { record: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn malformed(record: usize, reason: impl Into<String>) -> TraceError {
    TraceError::Malformed {
        record,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub a: usize,
    pub b: usize,
    pub rounds: usize,
    pub seed: u64,
    pub alice_strategy: String,
    pub bob_strategy: String,
    pub format_version: u32,
}

impl TraceHeader {
    pub fn config(&self) -> Result<GameConfig, GameError> {
        GameConfig::new(self.a, self.b, self.rounds, self.seed)
    }
}

/// One append as recorded in a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct TracedAppend {
    pub label: usize,
    pub value: u64,
    /// Claimed position of the value, if the trace states one.
    pub index: Option<usize>,
}

impl TryFrom<Vec<u64>> for TracedAppend {
    type Error = String;

    fn try_from(v: Vec<u64>) -> Result<Self, Self::Error> {
        match v[..] {
            [label, value] => Ok(TracedAppend {
                label: label as usize,
                value,
                index: None,
            }),
            [label, value, index] => Ok(TracedAppend {
                label: label as usize,
                value,
                index: Some(index as usize),
            }),
            _ => Err(format!("append must have 2 or 3 elements, got {}", v.len())),
        }
    }
}

impl From<TracedAppend> for Vec<u64> {
    fn from(a: TracedAppend) -> Self {
        let mut v = vec![a.label as u64, a.value];
        if let Some(i) = a.index {
            v.push(i as u64);
        }
        v
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiveSets {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

impl LiveSets {
    pub fn of(state: &GameState) -> Self {
        LiveSets {
            alice: state.live_labels(Side::Alice),
            bob: state.live_labels(Side::Bob),
        }
    }

    pub fn get(&self, side: Side) -> &[usize] {
        match side {
            Side::Alice => &self.alice,
            Side::Bob => &self.bob,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn: usize,
    pub side: Side,
    pub appends: Vec<TracedAppend>,
    pub live: LiveSets,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TurnRecord>,
}

impl Trace {
    pub fn config(&self) -> Result<GameConfig, GameError> {
        self.header.config()
    }

    pub fn final_verdict(&self) -> Option<Verdict> {
        self.records.last().map(|r| r.verdict)
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer(&mut out, &self.header)?;
        out.write_all(b"\n")?;
        for record in &self.records {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Trace, TraceError> {
        let mut lines = input.lines().enumerate().filter(|(_, l)| {
            l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true)
        });
        let (_, first) = lines.next().ok_or_else(|| malformed(0, "empty trace"))?;
        let header: TraceHeader =
            serde_json::from_str(&first?).map_err(|e| malformed(0, format!("header: {e}")))?;
        let mut records = Vec::new();
        for (n, line) in lines {
            let record: TurnRecord =
                serde_json::from_str(&line?).map_err(|e| malformed(n, e.to_string()))?;
            records.push(record);
        }
        Ok(Trace { header, records })
    }

    pub fn from_jsonl(text: &str) -> Result<Trace, TraceError> {
        Trace::read_jsonl(text.as_bytes())
    }

    /// Replays the recorded appends and declarations from the empty
    /// position. Records are applied as written, without any checks.
    pub fn replay(&self) -> Result<GameState, TraceError> {
        let config = self.config().map_err(|e| malformed(0, e.to_string()))?;
        let mut state = GameState::new(config).map_err(|e| malformed(0, e.to_string()))?;
        for (n, record) in self.records.iter().enumerate() {
            let batch = crate::game::MoveBatch::new(
                record.side,
                record.appends.iter().map(|a| (a.label, a.value)),
            );
            state
                .apply_batch(&batch)
                .map_err(|e| malformed(n + 1, e.to_string()))?;
            for side in [Side::Alice, Side::Bob] {
                for &label in record.live.get(side) {
                    state
                        .declare_live(side, label)
                        .map_err(|e| malformed(n + 1, e.to_string()))?;
                }
            }
        }
        Ok(state)
    }
}

/// A running match between two strategies. Alice moves first in every round.
pub struct Match<'s> {
    state: GameState,
    alice: &'s mut dyn Strategy,
    bob: &'s mut dyn Strategy,
    referee: Referee,
    header: TraceHeader,
    records: Vec<TurnRecord>,
}

impl<'s> Match<'s> {
    pub fn new(
        config: GameConfig,
        rounds: usize,
        alice: &'s mut dyn Strategy,
        bob: &'s mut dyn Strategy,
    ) -> Result<Self, StrategyError> {
        config.validate()?;
        for (strategy, side) in [(&*alice, Side::Alice), (&*bob, Side::Bob)] {
            if strategy.side() != side {
                return Err(GameError::WrongSide {
                    expected: side,
                    actual: strategy.side(),
                }
                .into());
            }
        }
        alice.prepare(&config)?;
        bob.prepare(&config)?;
        let header = TraceHeader {
            a: config.a,
            b: config.b,
            rounds,
            seed: config.seed,
            alice_strategy: alice.name(),
            bob_strategy: bob.name(),
            format_version: FORMAT_VERSION,
        };
        Ok(Match {
            state: GameState::new(config)?,
            alice,
            bob,
            referee: Referee::new(&config),
            header,
            records: Vec::new(),
        })
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn referee(&self) -> &Referee {
        &self.referee
    }

    pub fn records(&self) -> &[TurnRecord] {
        &self.records
    }

    /// Side whose turn comes next.
    pub fn to_move(&self) -> Side {
        if self.state.turn().is_multiple_of(2) {
            Side::Alice
        } else {
            Side::Bob
        }
    }

    pub fn play_turn(&mut self) -> Result<&TurnRecord, StrategyError> {
        let side = self.to_move();
        let strategy: &mut dyn Strategy = match side {
            Side::Alice => &mut *self.alice,
            Side::Bob => &mut *self.bob,
        };
        let mv = strategy.next_move(&self.state)?;
        self.state.apply_batch_for(side, &mv.batch)?;
        for &label in &mv.declare_live {
            self.state.declare_live(side, label)?;
        }
        let verdict = self.referee.observe(&self.state);
        self.records.push(TurnRecord {
            turn: self.state.turn(),
            side,
            appends: mv
                .batch
                .appends
                .iter()
                .map(|a| TracedAppend {
                    label: a.label,
                    value: a.value,
                    index: None,
                })
                .collect(),
            live: LiveSets::of(&self.state),
            verdict,
        });
        Ok(self.records.last().expect("just pushed"))
    }

    /// Plays one Alice turn and one Bob turn.
    pub fn play_round(&mut self) -> Result<(), StrategyError> {
        self.play_turn()?;
        self.play_turn()?;
        Ok(())
    }

    pub fn into_trace(self) -> Trace {
        Trace {
            header: self.header,
            records: self.records,
        }
    }

    pub fn into_parts(self) -> (GameState, Trace) {
        (
            self.state,
            Trace {
                header: self.header,
                records: self.records,
            },
        )
    }
}

/// Plays `rounds` full rounds (Alice, then Bob) and returns the trace.
pub fn run_match(
    config: GameConfig,
    alice: &mut dyn Strategy,
    bob: &mut dyn Strategy,
    rounds: usize,
) -> Result<Trace, StrategyError> {
    let mut game = Match::new(config, rounds, alice, bob)?;
    for _ in 0..rounds {
        game.play_round()?;
    }
    Ok(game.into_trace())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    AppendOnly,
    UnknownLabel,
    ValueOverflow,
    LivenessNotMonotone,
    OutOfTurnLiveness,
    VerdictMismatch,
    WitnessRevoked,
    VerdictRegressed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub turn: usize,
    pub kind: ViolationKind,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let what = match self.kind {
            ViolationKind::AppendOnly => "append-only broken",
            ViolationKind::UnknownLabel => "unknown label",
            ViolationKind::ValueOverflow => "value overflow",
            ViolationKind::LivenessNotMonotone => "liveness not monotone",
            ViolationKind::OutOfTurnLiveness => "liveness changed out of turn",
            ViolationKind::VerdictMismatch => "verdict mismatch",
            ViolationKind::WitnessRevoked => "witness revoked",
            ViolationKind::VerdictRegressed => "verdict regressed",
        };
        write!(f, "{what} at turn {}: {}", self.turn, self.detail)
    }
}

/// A live sequence that went [`FAIRNESS_WINDOW`] of its owner's turns
/// without an append.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FairnessLapse {
    pub turn: usize,
    pub side: Side,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub turns: usize,
    pub final_verdict: Option<Verdict>,
    pub violations: Vec<Violation>,
    pub fairness_lapses: Vec<FairnessLapse>,
}

impl Report {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn lapses_for(&self, side: Side) -> usize {
        self.fairness_lapses.iter().filter(|l| l.side == side).count()
    }
}

/// Replays `trace` from the empty position and checks the referee's rules:
/// append-only terms, monotone liveness declared only by the owner, recorded
/// verdicts, witness permanence and verdict monotonicity while Bob's live set
/// is unchanged. Fairness lapses are collected separately.
pub fn verify_trace(trace: &Trace) -> Result<Report, TraceError> {
    if trace.header.format_version != FORMAT_VERSION {
        return Err(malformed(
            0,
            format!("unsupported format_version {}", trace.header.format_version),
        ));
    }
    let config = trace.config().map_err(|e| malformed(0, e.to_string()))?;
    let mut state = GameState::new(config).map_err(|e| malformed(0, e.to_string()))?;
    let mut referee = Referee::new(&config);
    let mut violations = Vec::new();
    let mut lapses = Vec::new();

    let mut own_turns = [0usize; 2];
    // Owner turn of the last append (or of the declaration) per live label.
    let mut last_active: [Vec<Option<usize>>; 2] = [vec![None; config.a], vec![None; config.b]];
    let mut held: Vec<Option<Witness>> = vec![None; config.b];
    let mut prev: Option<(Verdict, Vec<usize>)> = None;

    for (n, record) in trace.records.iter().enumerate() {
        let turn = n + 1;
        if record.turn != turn {
            return Err(malformed(
                turn,
                format!("expected turn {turn}, found {}", record.turn),
            ));
        }
        let side = record.side;
        let mut report = |kind, detail: String| violations.push(Violation { turn, kind, detail });

        let mut touched = BTreeSet::new();
        // Rewrites and withdrawals invalidate the referee's incremental cache.
        let mut stale = false;
        for append in &record.appends {
            let count = config.count(side);
            if append.label >= count {
                report(
                    ViolationKind::UnknownLabel,
                    format!("{side} label {} (has {count})", append.label),
                );
                continue;
            }
            if append.value > VALUE_MAX {
                report(
                    ViolationKind::ValueOverflow,
                    format!("{side}#{} value {}", append.label, append.value),
                );
            }
            let seq = match side {
                Side::Alice => &mut state.alice[append.label],
                Side::Bob => &mut state.bob[append.label],
            };
            let end = seq.terms.len();
            match append.index {
                Some(i) if i < end => {
                    report(
                        ViolationKind::AppendOnly,
                        format!(
                            "{side}#{}[{i}] rewritten from {} to {}",
                            append.label, seq.terms[i], append.value
                        ),
                    );
                    seq.terms[i] = append.value;
                    stale = true;
                }
                Some(i) if i > end => {
                    report(
                        ViolationKind::AppendOnly,
                        format!("{side}#{} skips from length {end} to index {i}", append.label),
                    );
                }
                _ => seq.terms.push(append.value),
            }
            touched.insert(append.label);
        }
        state.turn += 1;

        for owner in [Side::Alice, Side::Bob] {
            let recorded = record.live.get(owner);
            let count = config.count(owner);
            let before = state.live_labels(owner);
            let removed: Vec<usize> = before
                .iter()
                .copied()
                .filter(|l| !recorded.contains(l))
                .collect();
            if !removed.is_empty() {
                report(
                    ViolationKind::LivenessNotMonotone,
                    format!("{owner} labels {removed:?} went from live to not live"),
                );
            }
            let added: Vec<usize> = recorded
                .iter()
                .copied()
                .filter(|l| !before.contains(l))
                .collect();
            if owner != side && !added.is_empty() {
                report(
                    ViolationKind::OutOfTurnLiveness,
                    format!("{owner} labels {added:?} declared on {side}'s turn"),
                );
            }
            let seqs = match owner {
                Side::Alice => &mut state.alice,
                Side::Bob => &mut state.bob,
            };
            for &l in &removed {
                seqs[l].live = false;
                stale = true;
            }
            for &l in &added {
                if l >= count {
                    report(
                        ViolationKind::UnknownLabel,
                        format!("{owner} live label {l} (has {count})"),
                    );
                } else {
                    seqs[l].live = true;
                }
            }
        }

        if stale {
            referee = Referee::new(&config);
        }
        let verdict = referee.observe(&state);
        if verdict != record.verdict {
            report(
                ViolationKind::VerdictMismatch,
                format!("recorded {}, replay gives {verdict}", record.verdict),
            );
        }

        for (j, slot) in held.iter_mut().enumerate() {
            if let Some(w) = slot {
                if !state.witness_holds(w) {
                    report(
                        ViolationKind::WitnessRevoked,
                        format!(
                            "Bob#{j} witness (alice {}, index {}) no longer holds",
                            w.alice_label, w.index
                        ),
                    );
                    *slot = None;
                }
            }
            if slot.is_none() {
                *slot = referee.witnesses()[j];
            }
        }

        let bob_live = state.live_labels(Side::Bob);
        if let Some((Verdict::AliceWinWitnessed, prev_live)) = &prev {
            if *prev_live == bob_live && verdict == Verdict::BobLeading {
                report(
                    ViolationKind::VerdictRegressed,
                    "AliceWinWitnessed lost while Bob's live set was unchanged".into(),
                );
            }
        }
        prev = Some((verdict, bob_live));

        let s = side as usize;
        own_turns[s] += 1;
        let now = own_turns[s];
        for label in state.live_labels(side) {
            let slot = &mut last_active[s][label];
            if touched.contains(&label) || slot.is_none() {
                *slot = Some(now);
            } else if let Some(last) = *slot {
                if now - last == FAIRNESS_WINDOW {
                    lapses.push(FairnessLapse { turn, side, label });
                    *slot = Some(now);
                }
            }
        }
    }

    Ok(Report {
        turns: trace.records.len(),
        final_verdict: trace.final_verdict(),
        violations,
        fairness_lapses: lapses,
    })
}

/// Checks that once the verdict is `AliceWinWitnessed` after Bob's live set
/// last changed, it stays so until the end. Returns the turn from which the
/// verdict is stable, or `None` if the final verdict is not Alice's.
pub fn stable_alice_from(trace: &Trace) -> Option<usize> {
    let last_change = trace
        .records
        .windows(2)
        .filter(|w| w[0].live.bob != w[1].live.bob)
        .map(|w| w[1].turn)
        .next_back()
        .unwrap_or_else(|| trace.records.first().map(|r| r.turn).unwrap_or(0));
    let first = trace
        .records
        .iter()
        .find(|r| r.turn >= last_change && r.verdict == Verdict::AliceWinWitnessed)?;
    trace.records[first.turn - 1..]
        .iter()
        .all(|r| r.verdict == Verdict::AliceWinWitnessed)
        .then_some(first.turn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::{make_adversary, AdversaryKind, AdversaryParams, AliceInductive};

    fn skip_trace() -> Trace {
        let config = GameConfig::new(1, 1, 3, 0).unwrap();
        let mut a = make_adversary(AdversaryKind::Skipper, Side::Alice, Default::default()).unwrap();
        let mut b = make_adversary(AdversaryKind::Skipper, Side::Bob, Default::default()).unwrap();
        run_match(config, a.as_mut(), b.as_mut(), 3).unwrap()
    }

    fn copy_trace(seed: u64) -> Trace {
        let config = GameConfig::new(1, 1, 10, seed).unwrap();
        let mut alice = make_adversary(AdversaryKind::Copycat, Side::Alice, Default::default()).unwrap();
        let mut bob = make_adversary(
            AdversaryKind::RandomGrower,
            Side::Bob,
            AdversaryParams {
                seed,
                ..Default::default()
            },
        )
        .unwrap();
        run_match(config, alice.as_mut(), bob.as_mut(), 10).unwrap()
    }

    #[test]
    fn skip_match() {
        let trace = skip_trace();
        assert_eq!(trace.records.len(), 6);
        assert!(trace.records.iter().all(|r| r.appends.is_empty()));
        assert_eq!(trace.final_verdict(), Some(Verdict::AliceWinWitnessed));
    }

    #[test]
    fn copy_match_is_witnessed_at_zero() {
        let trace = copy_trace(5);
        assert_eq!(trace.final_verdict(), Some(Verdict::AliceWinWitnessed));
        let state = trace.replay().unwrap();
        assert_eq!(state.find_witness(0).unwrap().unwrap().index, 0);
        assert_eq!(trace, copy_trace(5));
    }

    #[test]
    fn jsonl_round_trip() {
        let trace = copy_trace(1);
        let text = trace.to_jsonl();
        assert!(text.starts_with("{\"a\":1,\"b\":1,\"rounds\":10,\"seed\":1,"));
        assert_eq!(Trace::from_jsonl(&text).unwrap(), trace);
    }

    #[test]
    fn verify_clean_traces() {
        let report = verify_trace(&skip_trace()).unwrap();
        assert!(report.is_valid());
        let report = verify_trace(&copy_trace(2)).unwrap();
        assert!(report.is_valid(), "{:?}", report.violations);
        assert!(report.fairness_lapses.is_empty());
    }

    #[test]
    fn verify_detects_rewrite() {
        let mut trace = copy_trace(3);
        let rec = trace
            .records
            .iter_mut()
            .filter(|r| r.side == Side::Bob && !r.appends.is_empty())
            .nth(2)
            .unwrap();
        rec.appends[0].index = Some(0);
        let turn = rec.turn;
        let report = verify_trace(&trace).unwrap();
        let first = &report.violations[0];
        assert_eq!(first.kind, ViolationKind::AppendOnly);
        assert!(first.to_string().starts_with(&format!("append-only broken at turn {turn}")));
    }

    #[test]
    fn verify_detects_liveness_withdrawal() {
        let mut trace = copy_trace(4);
        let last = trace.records.last_mut().unwrap();
        last.live.bob.clear();
        let report = verify_trace(&trace).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::LivenessNotMonotone
                && v.to_string().starts_with("liveness not monotone")));
    }

    #[test]
    fn verify_detects_wrong_verdict_and_bad_turns() {
        let mut trace = copy_trace(6);
        trace.records[5].verdict = Verdict::BobLeading;
        let report = verify_trace(&trace).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::VerdictMismatch));

        let mut trace = copy_trace(6);
        trace.records[2].turn = 9;
        assert!(matches!(
            verify_trace(&trace),
            Err(TraceError::Malformed { record: 3, .. })
        ));
        assert!(matches!(
            Trace::from_jsonl("{\"a\":1}\n"),
            Err(TraceError::Malformed { record: 0, .. })
        ));
    }

    #[test]
    fn inductive_match_verifies() {
        let config = GameConfig::new(2, 3, 300, 7).unwrap();
        let mut alice = AliceInductive::new(2).unwrap();
        let mut bob = make_adversary(
            AdversaryKind::RandomGrower,
            Side::Bob,
            AdversaryParams {
                seed: 7,
                ..Default::default()
            },
        )
        .unwrap();
        let trace = run_match(config, &mut alice, bob.as_mut(), 300).unwrap();
        let report = verify_trace(&trace).unwrap();
        assert!(report.is_valid(), "{:?}", report.violations);
        assert_eq!(report.lapses_for(Side::Bob), 0);
        assert_eq!(trace.final_verdict(), Some(Verdict::AliceWinWitnessed));
        assert!(stable_alice_from(&trace).is_some());
        let state = trace.replay().unwrap();
        assert!(state.unwitnessed_live_bob().is_empty());
    }
}
