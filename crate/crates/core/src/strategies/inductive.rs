//! Alice's winning strategy against fewer than `2^a` Bob sequences.
//!
//! The strategy is a chain of recursion frames. A frame at level `k >= 2`
//! keeps one reserved label untouched and hands its other `k - 1` labels to a
//! level `k - 1` child that plays against the Bob sequences that are
//! non-empty past the frame's offset. Once `2^(k-1)` such Bob sequences
//! exist the frame triggers: it writes one more than their largest term at
//! the offset into the reserved label, commits that label to grow forever,
//! pads the other labels to a common length `N` and restarts a fresh child at
//! offset `N` against the Bob sequences that remain. A level 1 frame copies
//! the single Bob sequence assigned to it.
//!
//! Offsets play the role of "forgetting the first `N` terms": nothing is
//! erased, the child simply compares from index `N` on.

use crate::game::{GameConfig, GameError, GameState, Sequence, Side, VALUE_MAX};
use crate::strategies::{Move, Planner, Strategy, StrategyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FramePhase {
    PreTrigger,
    PostTrigger,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyFrame {
    level: usize,
    offset: usize,
    reserved: Option<usize>,
    working: Vec<usize>,
    assigned: Vec<usize>,
    killed: Vec<usize>,
    phase: FramePhase,
    child: Option<Box<StrategyFrame>>,
}

impl StrategyFrame {
    fn new(level: usize, offset: usize, labels: &[usize]) -> Self {
        debug_assert_eq!(labels.len(), level);
        let (reserved, working) = if level == 1 {
            (None, labels.to_vec())
        } else {
            (Some(labels[0]), labels[1..].to_vec())
        };
        let child = (level >= 2).then(|| Box::new(StrategyFrame::new(level - 1, offset, &working)));
        StrategyFrame {
            level,
            offset,
            reserved,
            working,
            assigned: Vec::new(),
            killed: Vec::new(),
            phase: FramePhase::PreTrigger,
            child,
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Absolute index at which this frame's restarted game begins.
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn reserved_label(&self) -> Option<usize> {
        self.reserved
    }

    /// The `k - 1` labels handed to the child, or the copy label at level 1.
    pub fn working_labels(&self) -> &[usize] {
        &self.working
    }

    /// Bob labels this frame has taken on, in order of first crossing.
    pub fn assigned_bob(&self) -> &[usize] {
        &self.assigned
    }

    pub fn killed_bob(&self) -> &[usize] {
        &self.killed
    }

    pub fn phase(&self) -> FramePhase {
        self.phase
    }

    pub fn child(&self) -> Option<&StrategyFrame> {
        self.child.as_deref()
    }

    /// Most Bob labels this frame will ever take on.
    pub fn capacity(&self) -> usize {
        (1 << self.level) - 1
    }

    /// This frame followed by its descendants.
    pub fn chain(&self) -> impl Iterator<Item = &StrategyFrame> {
        std::iter::successors(Some(self), |f| f.child())
    }

    /// Structural invariants of the frame chain.
    pub fn check(&self) -> Result<(), String> {
        for frame in self.chain() {
            if frame.assigned.len() > frame.capacity() {
                return Err(format!(
                    "level {} frame holds {} labels",
                    frame.level,
                    frame.assigned.len()
                ));
            }
            let Some(child) = frame.child() else {
                continue;
            };
            if child.offset < frame.offset {
                return Err(format!(
                    "child offset {} below parent offset {}",
                    child.offset, frame.offset
                ));
            }
            if child.assigned.iter().any(|j| frame.killed.contains(j)) {
                return Err(format!("level {} child took a killed label", child.level));
            }
            if child.assigned.len() >= 1 << (frame.level - 1) {
                return Err(format!(
                    "level {} frame delegated {} labels",
                    frame.level,
                    child.assigned.len()
                ));
            }
            if (frame.phase == FramePhase::PostTrigger) == frame.killed.is_empty() {
                return Err(format!("level {} frame phase/killed mismatch", frame.level));
            }
        }
        Ok(())
    }

    fn absorb(&mut self, bob: &[Sequence], eligible: &[usize]) {
        let mut fresh: Vec<usize> = eligible
            .iter()
            .copied()
            .filter(|j| !self.assigned.contains(j) && bob[*j].len() > self.offset)
            .collect();
        fresh.sort_unstable();
        for j in fresh {
            if self.assigned.len() == self.capacity() {
                break;
            }
            self.assigned.push(j);
        }
    }

    fn remaining(&self) -> Vec<usize> {
        self.assigned
            .iter()
            .copied()
            .filter(|j| !self.killed.contains(j))
            .collect()
    }

    fn step(
        &mut self,
        state: &GameState,
        eligible: &[usize],
        plan: &mut Planner,
    ) -> Result<(), StrategyError> {
        self.absorb(state.bob(), eligible);
        if self.level == 1 {
            self.copy(state, plan);
            return Ok(());
        }
        let reserved = self.reserved.expect("levels >= 2 reserve a label");
        match self.phase {
            FramePhase::PreTrigger if self.assigned.len() >= 1 << (self.level - 1) => {
                self.trigger(state, plan)?;
            }
            FramePhase::PreTrigger => {}
            FramePhase::PostTrigger => plan.push(reserved, 0),
        }
        let pool = self.remaining();
        self.child
            .as_mut()
            .expect("levels >= 2 have a child")
            .step(state, &pool, plan)
    }

    fn trigger(&mut self, state: &GameState, plan: &mut Planner) -> Result<(), StrategyError> {
        let bob = state.bob();
        let reserved = self.reserved.expect("levels >= 2 reserve a label");
        let top = self
            .assigned
            .iter()
            .map(|&j| bob[j].terms()[self.offset])
            .max()
            .expect("trigger needs assigned labels");
        if top >= VALUE_MAX {
            return Err(GameError::ValueOverflow {
                value: top as u128 + 1,
            }
            .into());
        }
        assert_eq!(
            plan.len(reserved),
            self.offset,
            "reserved label must be untouched past the offset"
        );
        plan.push(reserved, top + 1);
        plan.declare(reserved);
        self.killed = self.assigned.clone();

        let restart = self
            .working
            .iter()
            .map(|&w| plan.len(w))
            .max()
            .unwrap_or(self.offset)
            .max(self.offset);
        for &w in &self.working {
            while plan.len(w) < restart {
                plan.push(w, 0);
            }
        }
        self.child = Some(Box::new(StrategyFrame::new(
            self.level - 1,
            restart,
            &self.working,
        )));
        self.phase = FramePhase::PostTrigger;
        Ok(())
    }

    fn copy(&mut self, state: &GameState, plan: &mut Planner) {
        let Some(&j) = self.assigned.first() else {
            return;
        };
        let label = self.working[0];
        let source = &state.bob()[j];
        debug_assert!(plan.len(label) >= self.offset);
        while plan.len(label) < source.len() {
            let t = plan.len(label);
            plan.push(label, source.terms()[t]);
        }
        if source.is_live() && !state.alice()[label].is_live() {
            plan.declare(label);
        }
    }
}

#[derive(Debug, Clone)]
pub struct AliceInductive {
    a: usize,
    overload: bool,
    root: Option<StrategyFrame>,
}

impl AliceInductive {
    pub fn new(a: usize) -> Result<Self, StrategyError> {
        if a == 0 || a > 20 {
            return Err(StrategyError::InvalidParams(format!(
                "alice_inductive needs 1 <= a <= 20, got {a}"
            )));
        }
        Ok(AliceInductive {
            a,
            overload: false,
            root: None,
        })
    }

    /// Accept games with `b >= 2^a`. Bob labels beyond a frame's capacity are
    /// never taken on; the strategy is then no longer winning, which is what
    /// the Bob-side threshold tests need.
    pub fn allow_overload(mut self) -> Self {
        self.overload = true;
        self
    }

    pub fn root_frame(&self) -> Option<&StrategyFrame> {
        self.root.as_ref()
    }
}

impl Strategy for AliceInductive {
    fn side(&self) -> Side {
        Side::Alice
    }

    fn name(&self) -> String {
        if self.overload {
            format!("alice_inductive(a={},overload)", self.a)
        } else {
            format!("alice_inductive(a={})", self.a)
        }
    }

    fn prepare(&mut self, config: &GameConfig) -> Result<(), StrategyError> {
        let limit = (1usize << self.a) - 1;
        if config.a != self.a || (!self.overload && config.b > limit) {
            return Err(StrategyError::CapacityMismatch {
                strategy: self.name(),
                requirement: format!("a={} and b <= {limit}", self.a),
                actual: config.b,
            });
        }
        let labels: Vec<usize> = (0..self.a).collect();
        self.root = Some(StrategyFrame::new(self.a, 0, &labels));
        Ok(())
    }

    fn next_move(&mut self, state: &GameState) -> Result<Move, StrategyError> {
        let root = self
            .root
            .as_mut()
            .ok_or_else(|| StrategyError::InvalidParams("prepare() was not called".into()))?;
        let mut plan = Planner::new(state, Side::Alice);
        let everyone: Vec<usize> = (0..state.bob().len()).collect();
        root.step(state, &everyone, &mut plan)?;
        Ok(plan.finish())
    }
}
