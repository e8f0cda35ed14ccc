//! The sequence-exceedance game: positions, moves, witnesses and verdicts.
//!
//! Alice owns `a` sequences and Bob owns `b`. Both only ever append. Bob
//! wins the infinite game when one of his infinite sequences strictly
//! exceeds every infinite sequence of Alice. At a finite horizon the engine
//! uses public liveness declarations as the stand-in for "infinite", and
//! certifies Alice's side with [`Witness`]es: a live Alice sequence and an
//! index where Alice's term is at least Bob's. Terms never change and
//! liveness is never withdrawn, so a witness stays valid forever.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest term value the engine accepts (2^63 - 1).
pub const VALUE_MAX: u64 = i64::MAX as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Alice,
    Bob,
}

impl Side {
    pub fn opponent(self) -> Side {
        match self {
            Side::Alice => Side::Bob,
            Side::Bob => Side::Alice,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Alice => "alice",
            Side::Bob => "bob",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("degenerate config: a={a}, b={b}, max_rounds={max_rounds} (all must be >= 1)")]
    DegenerateConfig { a: usize, b: usize, max_rounds: usize },
    #[error("unknown {side} label {label}")]
    UnknownLabel { side: Side, label: usize },
    #[error("{actual} batch submitted where a {expected} batch was expected")]
    WrongSide { expected: Side, actual: Side },
    #[error("value {value} exceeds the engine cap 2^63-1")]
    ValueOverflow { value: u128 },
}

/// Parameters of one match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    pub a: usize,
    pub b: usize,
    pub max_rounds: usize,
    pub seed: u64,
}

impl GameConfig {
    pub fn new(a: usize, b: usize, max_rounds: usize, seed: u64) -> Result<Self, GameError> {
        let config = GameConfig {
            a,
            b,
            max_rounds,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), GameError> {
        if self.a == 0 || self.b == 0 || self.max_rounds == 0 {
            return Err(GameError::DegenerateConfig {
                a: self.a,
                b: self.b,
                max_rounds: self.max_rounds,
            });
        }
        Ok(())
    }

    /// Number of sequences owned by `side`.
    pub fn count(&self, side: Side) -> usize {
        match side {
            Side::Alice => self.a,
            Side::Bob => self.b,
        }
    }
}

/// An append-only sequence of naturals with a monotone liveness flag.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sequence {
    pub(crate) terms: Vec<u64>,
    pub(crate) live: bool,
}

impl Sequence {
    pub fn terms(&self) -> &[u64] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_live(&self) -> bool {
        self.live
    }

    pub fn get(&self, index: usize) -> Option<u64> {
        self.terms.get(index).copied()
    }
}

/// One appended term inside a [`MoveBatch`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Append {
    pub label: usize,
    pub value: u64,
}

/// A finite set of appends made by one player in a single turn. An empty
/// batch is a skip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveBatch {
    pub side: Side,
    pub appends: Vec<Append>,
}

impl MoveBatch {
    pub fn skip(side: Side) -> Self {
        MoveBatch {
            side,
            appends: Vec::new(),
        }
    }

    pub fn new(side: Side, appends: impl IntoIterator<Item = (usize, u64)>) -> Self {
        MoveBatch {
            side,
            appends: appends
                .into_iter()
                .map(|(label, value)| Append { label, value })
                .collect(),
        }
    }

    pub fn push(&mut self, label: usize, value: u64) {
        self.appends.push(Append { label, value });
    }

    pub fn is_skip(&self) -> bool {
        self.appends.is_empty()
    }
}

/// Certificate that Bob's sequence `bob_label` never exceeds Alice's live
/// sequence `alice_label`: `alice[index] >= bob[index]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Witness {
    pub bob_label: usize,
    pub alice_label: usize,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    /// Every live Bob sequence carries a witness.
    AliceWinWitnessed,
    /// Some live Bob sequence strictly exceeds every live Alice sequence on
    /// all common indices.
    BobLeading,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::AliceWinWitnessed => "AliceWinWitnessed",
            Verdict::BobLeading => "BobLeading",
        })
    }
}

/// A position of the game together with the batches that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    pub(crate) config: GameConfig,
    pub(crate) turn: usize,
    pub(crate) alice: Vec<Sequence>,
    pub(crate) bob: Vec<Sequence>,
    pub(crate) history: Vec<MoveBatch>,
}

impl GameState {
    /// The initial position: every sequence empty and not live.
    pub fn new(config: GameConfig) -> Result<Self, GameError> {
        config.validate()?;
        Ok(GameState {
            config,
            turn: 0,
            alice: vec![Sequence::default(); config.a],
            bob: vec![Sequence::default(); config.b],
            history: Vec::new(),
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    /// Number of batches applied so far.
    pub fn turn(&self) -> usize {
        self.turn
    }

    pub fn history(&self) -> &[MoveBatch] {
        &self.history
    }

    pub fn alice(&self) -> &[Sequence] {
        &self.alice
    }

    pub fn bob(&self) -> &[Sequence] {
        &self.bob
    }

    pub fn sequences(&self, side: Side) -> &[Sequence] {
        match side {
            Side::Alice => &self.alice,
            Side::Bob => &self.bob,
        }
    }

    pub fn sequence(&self, side: Side, label: usize) -> Result<&Sequence, GameError> {
        self.sequences(side)
            .get(label)
            .ok_or(GameError::UnknownLabel { side, label })
    }

    fn sequences_mut(&mut self, side: Side) -> &mut Vec<Sequence> {
        match side {
            Side::Alice => &mut self.alice,
            Side::Bob => &mut self.bob,
        }
    }

    /// Labels of `side` currently declared live, in increasing order.
    pub fn live_labels(&self, side: Side) -> Vec<usize> {
        self.sequences(side)
            .iter()
            .enumerate()
            .filter(|(_, s)| s.live)
            .map(|(i, _)| i)
            .collect()
    }

    /// Applies every append of `batch` in order. The batch is validated as a
    /// whole first, so a rejected batch leaves the state untouched.
    pub fn apply_batch(&mut self, batch: &MoveBatch) -> Result<(), GameError> {
        let count = self.config.count(batch.side);
        for append in &batch.appends {
            if append.label >= count {
                return Err(GameError::UnknownLabel {
                    side: batch.side,
                    label: append.label,
                });
            }
            if append.value > VALUE_MAX {
                return Err(GameError::ValueOverflow {
                    value: append.value as u128,
                });
            }
        }
        let seqs = self.sequences_mut(batch.side);
        for append in &batch.appends {
            seqs[append.label].terms.push(append.value);
        }
        self.turn += 1;
        self.history.push(batch.clone());
        Ok(())
    }

    /// Like [`apply_batch`](Self::apply_batch) but insists that the batch
    /// belongs to `mover`.
    pub fn apply_batch_for(&mut self, mover: Side, batch: &MoveBatch) -> Result<(), GameError> {
        if batch.side != mover {
            return Err(GameError::WrongSide {
                expected: mover,
                actual: batch.side,
            });
        }
        self.apply_batch(batch)
    }

    /// Marks a sequence live. Idempotent.
    pub fn declare_live(&mut self, side: Side, label: usize) -> Result<(), GameError> {
        let seq = self
            .sequences_mut(side)
            .get_mut(label)
            .ok_or(GameError::UnknownLabel { side, label })?;
        seq.live = true;
        Ok(())
    }

    /// Canonical witness for Bob's `bob_label`: smallest index first, then
    /// smallest Alice label.
    pub fn find_witness(&self, bob_label: usize) -> Result<Option<Witness>, GameError> {
        let bob = self.sequence(Side::Bob, bob_label)?;
        let horizon = self
            .alice
            .iter()
            .filter(|s| s.live)
            .map(|s| s.len().min(bob.len()))
            .max()
            .unwrap_or(0);
        for index in 0..horizon {
            for (alice_label, alice) in self.alice.iter().enumerate() {
                if !alice.live || index >= alice.len() {
                    continue;
                }
                if alice.terms[index] >= bob.terms[index] {
                    return Ok(Some(Witness {
                        bob_label,
                        alice_label,
                        index,
                    }));
                }
            }
        }
        Ok(None)
    }

    /// Whether `witness` certifies non-exceedance in this position.
    pub fn witness_holds(&self, witness: &Witness) -> bool {
        let (Some(alice), Some(bob)) = (
            self.alice.get(witness.alice_label),
            self.bob.get(witness.bob_label),
        ) else {
            return false;
        };
        match (alice.get(witness.index), bob.get(witness.index)) {
            (Some(x), Some(y)) => alice.live && x >= y,
            _ => false,
        }
    }

    pub fn verdict(&self) -> Verdict {
        for (label, seq) in self.bob.iter().enumerate() {
            if seq.live && self.find_witness(label).expect("label in range").is_none() {
                return Verdict::BobLeading;
            }
        }
        Verdict::AliceWinWitnessed
    }

    /// Live Bob labels that currently lack a witness.
    pub fn unwitnessed_live_bob(&self) -> Vec<usize> {
        (0..self.bob.len())
            .filter(|&j| self.bob[j].live)
            .filter(|&j| self.find_witness(j).expect("label in range").is_none())
            .collect()
    }
}

/// Incremental verdict tracker used by the match runner and the trace
/// verifier.
///
/// Each Bob label remembers, per Alice label, how far it has already been
/// compared; terms are immutable and liveness monotone, so comparisons never
/// need to be repeated. The cached witness is *a* witness, not necessarily the
/// canonical one returned by [`GameState::find_witness`].
#[derive(Debug, Clone)]
pub struct Referee {
    witnesses: Vec<Option<Witness>>,
    scanned: Vec<Vec<usize>>,
}

impl Referee {
    pub fn new(config: &GameConfig) -> Self {
        Referee {
            witnesses: vec![None; config.b],
            scanned: vec![vec![0; config.a]; config.b],
        }
    }

    pub fn witnesses(&self) -> &[Option<Witness>] {
        &self.witnesses
    }

    /// Brings the cache up to date with `state` and returns the verdict.
    pub fn observe(&mut self, state: &GameState) -> Verdict {
        let mut verdict = Verdict::AliceWinWitnessed;
        for (j, bob) in state.bob.iter().enumerate() {
            if !bob.live {
                continue;
            }
            if self.witnesses[j].is_none() {
                self.witnesses[j] = self.scan(state, j);
            }
            if self.witnesses[j].is_none() {
                verdict = Verdict::BobLeading;
            }
        }
        verdict
    }

    fn scan(&mut self, state: &GameState, j: usize) -> Option<Witness> {
        let bob = &state.bob[j];
        for (i, alice) in state.alice.iter().enumerate() {
            if !alice.live {
                continue;
            }
            let end = alice.len().min(bob.len());
            let from = self.scanned[j][i];
            for t in from..end {
                if alice.terms[t] >= bob.terms[t] {
                    return Some(Witness {
                        bob_label: j,
                        alice_label: i,
                        index: t,
                    });
                }
            }
            self.scanned[j][i] = end.max(from);
        }
        None
    }
}
