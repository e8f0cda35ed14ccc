//! Bob's winning strategy when he has at least `2^a` sequences.
//!
//! Bob dedicates one sequence to every subset `X` of Alice's labels. Term
//! `t` of Bob's sequence for `X` is one more than the largest term `t` among
//! Alice's sequences in `X`, and the sequence is exactly as long as the
//! shortest of them. Whichever set of Alice sequences turns out infinite,
//! Bob's sequence for that set is infinite and beats each of them everywhere.

use std::fmt;

use crate::game::{GameConfig, GameState, Side, VALUE_MAX};
use crate::strategies::{Move, Planner, Strategy, StrategyError};

/// A subset of Alice's labels, bit `i` standing for label `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask(pub u64);

impl SubsetMask {
    pub fn contains(self, label: usize) -> bool {
        label < 64 && self.0 >> label & 1 == 1
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.0 >> i & 1 == 1)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let members: Vec<String> = self.members().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", members.join(","))
    }
}

/// Bijection between Bob labels `0..2^a` and subsets of `{0..a}`: the label
/// is the mask value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsetAllocation {
    a: usize,
}

impl SubsetAllocation {
    pub fn new(a: usize) -> Result<Self, StrategyError> {
        if a == 0 || a > 20 {
            return Err(StrategyError::InvalidParams(format!(
                "powerset allocation needs 1 <= a <= 20, got {a}"
            )));
        }
        Ok(SubsetAllocation { a })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn labels(&self) -> usize {
        1 << self.a
    }

    pub fn subset(&self, label: usize) -> Result<SubsetMask, StrategyError> {
        subset_for_label(label, self.a)
    }

    pub fn label(&self, subset: SubsetMask) -> usize {
        subset.0 as usize
    }
}

pub fn subset_for_label(label: usize, a: usize) -> Result<SubsetMask, StrategyError> {
    if a >= 64 || label >= 1usize << a {
        return Err(StrategyError::LabelOutOfRange { label, a });
    }
    Ok(SubsetMask(label as u64))
}

#[derive(Debug, Clone)]
pub struct BobPowerset {
    allocation: SubsetAllocation,
    turns: usize,
}

impl BobPowerset {
    pub fn new(a: usize) -> Result<Self, StrategyError> {
        Ok(BobPowerset {
            allocation: SubsetAllocation::new(a)?,
            turns: 0,
        })
    }

    pub fn allocation(&self) -> SubsetAllocation {
        self.allocation
    }

    /// Bob turns played so far.
    pub fn turns(&self) -> usize {
        self.turns
    }
}

impl Strategy for BobPowerset {
    fn side(&self) -> Side {
        Side::Bob
    }

    fn name(&self) -> String {
        format!("bob_powerset(a={})", self.allocation.a())
    }

    fn prepare(&mut self, config: &GameConfig) -> Result<(), StrategyError> {
        let need = self.allocation.labels();
        if config.b < need || config.a != self.allocation.a() {
            return Err(StrategyError::CapacityMismatch {
                strategy: self.name(),
                requirement: format!("a={} and b >= {need}", self.allocation.a()),
                actual: config.b,
            });
        }
        self.turns = 0;
        Ok(())
    }

    fn next_move(&mut self, state: &GameState) -> Result<Move, StrategyError> {
        self.turns += 1;
        let alice = state.alice();
        let bob = state.bob();
        let mut plan = Planner::new(state, Side::Bob);
        for label in 0..self.allocation.labels() {
            let subset = self.allocation.subset(label)?;
            let current = plan.len(label);
            let target = if subset.is_empty() {
                current + 1
            } else {
                subset.members().map(|i| alice[i].len()).min().unwrap_or(0)
            };
            for t in current..target {
                let top = subset.members().map(|i| alice[i].terms()[t]).max().unwrap_or(0);
                if top >= VALUE_MAX {
                    return Err(crate::game::GameError::ValueOverflow {
                        value: top as u128 + 1,
                    }
                    .into());
                }
                plan.push(label, top + 1);
            }
            if !bob[label].is_live() && subset.members().all(|i| alice[i].is_live()) {
                plan.declare(label);
            }
        }
        Ok(plan.finish())
    }
}

/// Checks the powerset invariant after Bob's `bob_turns`-th turn: every
/// subset sequence has the prescribed length and strictly beats each of its
/// Alice members term by term.
pub fn powerset_invariant(state: &GameState, a: usize, bob_turns: usize) -> Result<(), String> {
    let alloc = SubsetAllocation::new(a).map_err(|e| e.to_string())?;
    for label in 0..alloc.labels() {
        let subset = alloc.subset(label).map_err(|e| e.to_string())?;
        let seq = &state.bob()[label];
        let expected = if subset.is_empty() {
            bob_turns
        } else {
            subset.members().map(|i| state.alice()[i].len()).min().unwrap_or(0)
        };
        if seq.len() != expected {
            return Err(format!(
                "Bob#{subset} has length {} but should have {expected}",
                seq.len()
            ));
        }
        for (t, &value) in seq.terms().iter().enumerate() {
            for i in subset.members() {
                let other = state.alice()[i].terms()[t];
                if value <= other {
                    return Err(format!(
                        "Bob#{subset}[{t}] = {value} does not exceed Alice#{i}[{t}] = {other}"
                    ));
                }
            }
        }
    }
    for label in alloc.labels()..state.bob().len() {
        let seq = &state.bob()[label];
        if !seq.is_empty() || seq.is_live() {
            return Err(format!("spare Bob label {label} was touched"));
        }
    }
    Ok(())
}
