//! Opponents used to stress the winning strategies.
//!
//! All of them are deterministic given their seed, and all of them keep their
//! live sequences growing at least once every four of their own turns.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{GameConfig, GameState, Side};
use crate::strategies::{Move, Planner, Strategy, StrategyError};

/// Values drawn by randomized adversaries lie in `0..VALUE_SPAN`.
pub const VALUE_SPAN: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdversaryKind {
    RandomGrower,
    Burst,
    TriggerBaiter,
    Copycat,
    Skipper,
}

impl AdversaryKind {
    pub const ALL: [AdversaryKind; 5] = [
        AdversaryKind::RandomGrower,
        AdversaryKind::Burst,
        AdversaryKind::TriggerBaiter,
        AdversaryKind::Copycat,
        AdversaryKind::Skipper,
    ];
}

impl fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdversaryKind::RandomGrower => "random_grower",
            AdversaryKind::Burst => "burst",
            AdversaryKind::TriggerBaiter => "trigger_baiter",
            AdversaryKind::Copycat => "copycat",
            AdversaryKind::Skipper => "skipper",
        })
    }
}

impl FromStr for AdversaryKind {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "random" | "random_grower" => Ok(AdversaryKind::RandomGrower),
            "burst" => Ok(AdversaryKind::Burst),
            "trigger_baiter" | "baiter" => Ok(AdversaryKind::TriggerBaiter),
            "copycat" => Ok(AdversaryKind::Copycat),
            "skipper" | "skip" => Ok(AdversaryKind::Skipper),
            _ => Err(StrategyError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryParams {
    pub seed: u64,
    /// Labels declared live on the first turn (RandomGrower). `None` means
    /// every label.
    pub live: Option<Vec<usize>>,
    /// Silent turns before a Burst.
    pub delay: usize,
    /// Labels opened by a Burst.
    pub width: usize,
    /// Turns between late openings of a TriggerBaiter.
    pub gap: usize,
    /// Level whose trigger a TriggerBaiter aims at; defaults to `a`.
    pub level: Option<usize>,
}

impl Default for AdversaryParams {
    fn default() -> Self {
        AdversaryParams {
            seed: 0,
            live: None,
            delay: 10,
            width: 4,
            gap: 25,
            level: None,
        }
    }
}

pub fn make_adversary(
    kind: AdversaryKind,
    side: Side,
    params: AdversaryParams,
) -> Result<Box<dyn Strategy>, StrategyError> {
    Ok(match kind {
        AdversaryKind::RandomGrower => Box::new(RandomGrower::new(side, params.seed, params.live)),
        AdversaryKind::Burst => {
            if params.width == 0 {
                return Err(StrategyError::InvalidParams("burst width must be >= 1".into()));
            }
            Box::new(Burst::new(side, params.seed, params.delay, params.width))
        }
        AdversaryKind::TriggerBaiter => {
            if side != Side::Bob {
                return Err(StrategyError::InvalidParams(
                    "trigger_baiter plays Bob's side".into(),
                ));
            }
            if params.gap == 0 || params.level == Some(0) {
                return Err(StrategyError::InvalidParams(
                    "trigger_baiter needs gap >= 1 and level >= 1".into(),
                ));
            }
            Box::new(TriggerBaiter::new(params.seed, params.level, params.gap))
        }
        AdversaryKind::Copycat => {
            if side != Side::Alice {
                return Err(StrategyError::InvalidParams("copycat plays Alice's side".into()));
            }
            Box::new(Copycat)
        }
        AdversaryKind::Skipper => Box::new(Skipper { side }),
    })
}

fn format_set(labels: &[usize]) -> String {
    let parts: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Declares a fixed live set on its first turn, grows live labels at random
/// (never idling four turns in a row) and gives every other label a small
/// random number of terms.
#[derive(Debug, Clone)]
pub struct RandomGrower {
    side: Side,
    seed: u64,
    requested: Option<Vec<usize>>,
    live: Vec<usize>,
    rng: ChaCha8Rng,
    idle: Vec<usize>,
    budget: Vec<usize>,
    turns: usize,
}

impl RandomGrower {
    pub fn new(side: Side, seed: u64, live: Option<Vec<usize>>) -> Self {
        RandomGrower {
            side,
            seed,
            requested: live,
            live: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            idle: Vec::new(),
            budget: Vec::new(),
            turns: 0,
        }
    }
}

impl Strategy for RandomGrower {
    fn side(&self) -> Side {
        self.side
    }

    fn name(&self) -> String {
        match &self.requested {
            Some(live) => format!("random_grower(seed={},live={})", self.seed, format_set(live)),
            None => format!("random_grower(seed={},live=all)", self.seed),
        }
    }

    fn prepare(&mut self, config: &GameConfig) -> Result<(), StrategyError> {
        let n = config.count(self.side);
        let mut live = self.requested.clone().unwrap_or_else(|| (0..n).collect());
        live.sort_unstable();
        live.dedup();
        if let Some(&bad) = live.iter().find(|&&l| l >= n) {
            return Err(StrategyError::InvalidParams(format!(
                "live label {bad} out of range for {n} sequences"
            )));
        }
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.budget = (0..n)
            .map(|l| {
                if live.contains(&l) {
                    0
                } else {
                    self.rng.random_range(0..=8)
                }
            })
            .collect();
        self.idle = vec![0; n];
        self.live = live;
        self.turns = 0;
        Ok(())
    }

    fn next_move(&mut self, state: &GameState) -> Result<Move, StrategyError> {
        self.turns += 1;
        let mut plan = Planner::new(state, self.side);
        if self.turns == 1 {
            for &l in &self.live {
                plan.declare(l);
            }
        }
        for label in 0..self.idle.len() {
            if self.live.binary_search(&label).is_ok() {
                if self.idle[label] >= 3 || self.rng.random_bool(0.5) {
                    plan.push(label, self.rng.random_range(0..VALUE_SPAN));
                    self.idle[label] = 0;
                } else {
                    self.idle[label] += 1;
                }
            } else if self.budget[label] > 0 && self.rng.random_bool(0.25) {
                self.budget[label] -= 1;
                plan.push(label, self.rng.random_range(0..VALUE_SPAN));
            }
        }
        Ok(plan.finish())
    }
}

/// Silent for `delay` turns, then opens `width` labels in one batch and grows
/// them every turn.
#[derive(Debug, Clone)]
pub struct Burst {
    side: Side,
    seed: u64,
    delay: usize,
    width: usize,
    opened: usize,
    rng: ChaCha8Rng,
    turns: usize,
}

impl Burst {
    pub fn new(side: Side, seed: u64, delay: usize, width: usize) -> Self {
        Burst {
            side,
            seed,
            delay,
            width,
            opened: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            turns: 0,
        }
    }
}

impl Strategy for Burst {
    fn side(&self) -> Side {
        self.side
    }

    fn name(&self) -> String {
        format!("burst(delay={},m={},seed={})", self.delay, self.width, self.seed)
    }

    fn prepare(&mut self, config: &GameConfig) -> Result<(), StrategyError> {
        self.opened = self.width.min(config.count(self.side));
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.turns = 0;
        Ok(())
    }

    fn next_move(&mut self, state: &GameState) -> Result<Move, StrategyError> {
        self.turns += 1;
        let mut plan = Planner::new(state, self.side);
        if self.turns <= self.delay {
            return Ok(plan.finish());
        }
        for label in 0..self.opened {
            plan.push(label, self.rng.random_range(0..VALUE_SPAN));
            if self.turns == self.delay + 1 {
                plan.declare(label);
            }
        }
        Ok(plan.finish())
    }
}

/// Bob adversary aimed at Alice's trigger: opens exactly `2^(k-1)` labels on
/// its first turn, then the remaining labels one at a time every `gap` turns,
/// in a seeded order.
#[derive(Debug, Clone)]
pub struct TriggerBaiter {
    seed: u64,
    level: Option<usize>,
    gap: usize,
    order: Vec<usize>,
    first: usize,
    opened: usize,
    rng: ChaCha8Rng,
    turns: usize,
}

impl TriggerBaiter {
    pub fn new(seed: u64, level: Option<usize>, gap: usize) -> Self {
        TriggerBaiter {
            seed,
            level,
            gap,
            order: Vec::new(),
            first: 0,
            opened: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            turns: 0,
        }
    }
}

impl Strategy for TriggerBaiter {
    fn side(&self) -> Side {
        Side::Bob
    }

    fn name(&self) -> String {
        match self.level {
            Some(k) => format!("trigger_baiter(k={k},gap={},seed={})", self.gap, self.seed),
            None => format!("trigger_baiter(gap={},seed={})", self.gap, self.seed),
        }
    }

    fn prepare(&mut self, config: &GameConfig) -> Result<(), StrategyError> {
        let k = self.level.unwrap_or(config.a).min(62);
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut order: Vec<usize> = (0..config.b).collect();
        // Fisher-Yates with the strategy's own generator keeps the order
        // reproducible across rand versions.
        for i in (1..order.len()).rev() {
            let j = self.rng.random_range(0..=i);
            order.swap(i, j);
        }
        self.order = order;
        self.first = (1usize << (k - 1)).min(config.b);
        self.opened = 0;
        self.turns = 0;
        Ok(())
    }

    fn next_move(&mut self, state: &GameState) -> Result<Move, StrategyError> {
        self.turns += 1;
        let mut plan = Planner::new(state, Side::Bob);
        let target = if self.turns == 1 {
            self.first
        } else if (self.turns - 1).is_multiple_of(self.gap) {
            (self.opened + 1).min(self.order.len())
        } else {
            self.opened
        };
        for &label in &self.order[self.opened..target] {
            plan.declare(label);
        }
        self.opened = self.opened.max(target);
        for &label in &self.order[..self.opened] {
            plan.push(label, self.rng.random_range(0..VALUE_SPAN));
        }
        Ok(plan.finish())
    }
}

/// Alice adversary that mirrors Bob's label 0 into her label 0.
#[derive(Debug, Clone, Copy)]
pub struct Copycat;

impl Strategy for Copycat {
    fn side(&self) -> Side {
        Side::Alice
    }

    fn name(&self) -> String {
        "copycat".into()
    }

    fn prepare(&mut self, _config: &GameConfig) -> Result<(), StrategyError> {
        Ok(())
    }

    fn next_move(&mut self, state: &GameState) -> Result<Move, StrategyError> {
        let mut plan = Planner::new(state, Side::Alice);
        let source = &state.bob()[0];
        while plan.len(0) < source.len() {
            let t = plan.len(0);
            plan.push(0, source.terms()[t]);
        }
        if source.is_live() && !state.alice()[0].is_live() {
            plan.declare(0);
        }
        Ok(plan.finish())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Skipper {
    side: Side,
}

impl Strategy for Skipper {
    fn side(&self) -> Side {
        self.side
    }

    fn name(&self) -> String {
        "skipper".into()
    }

    fn prepare(&mut self, _config: &GameConfig) -> Result<(), StrategyError> {
        Ok(())
    }

    fn next_move(&mut self, _state: &GameState) -> Result<Move, StrategyError> {
        Ok(Move::skip(self.side))
    }
}
