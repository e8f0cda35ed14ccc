//! Players for the exceedance game.
//!
//! [`BobPowerset`] and [`AliceInductive`] are the two constructive winning
//! strategies. The adversaries in [`adversary`] exist to put pressure on them
//! in property tests and tournaments.

use thiserror::Error;

use crate::game::{GameConfig, GameError, GameState, MoveBatch, Side};

pub mod adversary;
pub mod inductive;
pub mod powerset;

pub use adversary::{make_adversary, AdversaryKind, AdversaryParams};
pub use inductive::{AliceInductive, FramePhase, StrategyFrame};
pub use powerset::{powerset_invariant, subset_for_label, BobPowerset, SubsetAllocation, SubsetMask};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("{strategy} needs {requirement}, but the game has {actual}")]
    CapacityMismatch {
        strategy: String,
        requirement: String,
        actual: usize,
    },
    #[error("label {label} is out of range for a={a}")]
    LabelOutOfRange { label: usize, a: usize },
    #[error("unknown strategy kind `{0}`")]
    UnknownKind(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{0}")]
    Machine(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// What a strategy does on one of its turns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub batch: MoveBatch,
    /// Own labels to declare live after the batch is applied.
    pub declare_live: Vec<usize>,
}

impl Move {
    pub fn skip(side: Side) -> Self {
        Move {
            batch: MoveBatch::skip(side),
            declare_live: Vec::new(),
        }
    }
}

/// A player. Implementations are deterministic state machines: given the same
/// construction parameters and the same sequence of positions they produce
/// the same moves.
pub trait Strategy: Send {
    fn side(&self) -> Side;

    /// Self-describing name written into trace headers, e.g.
    /// `alice_inductive(a=3)`.
    fn name(&self) -> String;

    /// Called once before the first move. Resets internal state and checks
    /// that the game has the sequence counts this strategy needs.
    fn prepare(&mut self, config: &GameConfig) -> Result<(), StrategyError>;

    fn next_move(&mut self, state: &GameState) -> Result<Move, StrategyError>;
}

impl<S: Strategy + ?Sized> Strategy for Box<S> {
    fn side(&self) -> Side {
        (**self).side()
    }

    fn name(&self) -> String {
        (**self).name()
    }

    fn prepare(&mut self, config: &GameConfig) -> Result<(), StrategyError> {
        (**self).prepare(config)
    }

    fn next_move(&mut self, state: &GameState) -> Result<Move, StrategyError> {
        (**self).next_move(state)
    }
}

/// Helper for strategies that plan several appends per turn and need to see
/// the lengths their own sequences will have once the batch lands.
#[derive(Debug, Clone)]
pub(crate) struct Planner {
    side: Side,
    lens: Vec<usize>,
    batch: MoveBatch,
    declare: Vec<usize>,
}

impl Planner {
    pub(crate) fn new(state: &GameState, side: Side) -> Self {
        Planner {
            side,
            lens: state.sequences(side).iter().map(|s| s.len()).collect(),
            batch: MoveBatch::skip(side),
            declare: Vec::new(),
        }
    }

    pub(crate) fn len(&self, label: usize) -> usize {
        self.lens[label]
    }

    pub(crate) fn push(&mut self, label: usize, value: u64) {
        self.lens[label] += 1;
        self.batch.push(label, value);
    }

    pub(crate) fn declare(&mut self, label: usize) {
        if !self.declare.contains(&label) {
            self.declare.push(label);
        }
    }

    pub(crate) fn finish(self) -> Move {
        debug_assert_eq!(self.batch.side, self.side);
        Move {
            batch: self.batch,
            declare_live: self.declare,
        }
    }
}
