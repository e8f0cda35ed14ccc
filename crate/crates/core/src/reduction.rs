//! From the game to the lower bound.
//!
//! Blind Bob feeds each of his `b = 2^a − 1` sequences from one short
//! program, evaluated on `0, 1, 2, …` with dovetailed budgets, and never
//! looks at Alice. The inductive Alice still wins, so every total program
//! among Bob's fails to exceed some live Alice sequence. Each Alice sequence
//! is pinned down by the fixed match plus its label, i.e. `n` bits when
//! `a = 2^n`.

use serde::Serialize;
use thiserror::Error;

use crate::game::{GameConfig, GameState, Side, Verdict};
use crate::machine::{
    budgeted_totality, enumerate_programs, program_count, ExecResult, Execution, MachineError,
    MachineParams, Program,
};
use crate::strategies::{AliceInductive, Move, Strategy, StrategyError};
use crate::trace::{Match, Trace};

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("blind Bob needs {needed} programs but only {available} have at most {max_bits} bits")]
    InsufficientPrograms {
        needed: u64,
        available: u64,
        max_bits: usize,
    },
    #[error("demo ended with {} and unwitnessed Bob labels {:?}", .0.verdict, .0.unwitnessed)]
    DemoInconclusive(Box<DemoReport>),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

impl From<ReductionError> for StrategyError {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Strategy(e) => e,
            other => StrategyError::Machine(other.to_string()),
        }
    }
}

/// `2^a − 1`, if it fits.
fn blind_label_count(a: usize) -> Option<u64> {
    1u64.checked_shl(a as u32)
        .filter(|_| a < 64)
        .map(|x| x - 1)
}

#[derive(Debug, Clone)]
struct Lane {
    next_input: u64,
    exec: Option<Execution>,
    grant: u64,
    stalled: bool,
}

impl Lane {
    fn new() -> Self {
        Lane {
            next_input: 0,
            exec: None,
            grant: 1,
            stalled: false,
        }
    }
}

/// Bob label `j` replays the `j`-th program in length-lex order.
#[derive(Debug, Clone)]
pub struct BlindBob {
    a: usize,
    params: MachineParams,
    programs: Vec<Program>,
    total: Vec<bool>,
    lanes: Vec<Lane>,
    turns: usize,
}

pub fn blind_bob_strategy(a: usize, params: MachineParams) -> Result<BlindBob, ReductionError> {
    BlindBob::new(a, params)
}

impl BlindBob {
    pub fn new(a: usize, params: MachineParams) -> Result<Self, ReductionError> {
        params.validate()?;
        if a == 0 {
            return Err(StrategyError::InvalidParams("blind Bob needs a >= 1".into()).into());
        }
        let available = program_count(params.l);
        let needed = blind_label_count(a).unwrap_or(u64::MAX);
        if needed > available {
            return Err(ReductionError::InsufficientPrograms {
                needed,
                available,
                max_bits: params.l,
            });
        }
        let programs: Vec<Program> = enumerate_programs(params.l).take(needed as usize).collect();
        let total = programs.iter().map(|p| budgeted_totality(p, &params)).collect();
        Ok(BlindBob {
            a,
            params,
            lanes: vec![Lane::new(); programs.len()],
            programs,
            total,
            turns: 0,
        })
    }

    pub fn labels(&self) -> usize {
        self.programs.len()
    }

    pub fn programs(&self) -> &[Program] {
        &self.programs
    }

    pub fn is_total(&self, label: usize) -> bool {
        self.total[label]
    }

    fn step_lane(&mut self, label: usize) -> Option<u64> {
        let program = &self.programs[label];
        let lane = &mut self.lanes[label];
        if lane.stalled {
            return None;
        }
        let exec = lane.exec.get_or_insert_with(|| Execution::new(lane.next_input));
        let target = lane.grant.min(self.params.s);
        match exec.advance(program, target.saturating_sub(exec.steps())) {
            ExecResult::Halted(v) => {
                lane.next_input += 1;
                lane.exec = None;
                lane.grant = 1;
                Some(v)
            }
            ExecResult::StackFault => {
                lane.stalled = true;
                None
            }
            ExecResult::OutOfBudget => {
                if target >= self.params.s {
                    lane.stalled = true;
                } else {
                    lane.grant = lane.grant.saturating_mul(2);
                }
                None
            }
        }
    }
}

impl Strategy for BlindBob {
    fn side(&self) -> Side {
        Side::Bob
    }

    fn name(&self) -> String {
        format!(
            "blind_bob(a={},K={},S={},L={})",
            self.a, self.params.k, self.params.s, self.params.l
        )
    }

    fn prepare(&mut self, config: &GameConfig) -> Result<(), StrategyError> {
        if config.b < self.labels() {
            return Err(StrategyError::CapacityMismatch {
                strategy: self.name(),
                requirement: format!("b >= {}", self.labels()),
                actual: config.b,
            });
        }
        self.lanes = vec![Lane::new(); self.programs.len()];
        self.turns = 0;
        Ok(())
    }

    /// Never reads `_state`: the moves depend only on the programs.
    fn next_move(&mut self, _state: &GameState) -> Result<Move, StrategyError> {
        self.turns += 1;
        let mut mv = Move::skip(Side::Bob);
        for label in 0..self.programs.len() {
            if let Some(v) = self.step_lane(label) {
                mv.batch.push(label, v);
            }
        }
        if self.turns == 1 {
            mv.declare_live = (0..self.programs.len()).filter(|&j| self.total[j]).collect();
        }
        Ok(mv)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub alice_label: usize,
    pub index: usize,
    pub alice_value: u64,
    pub bob_value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BobLabelReport {
    pub label: usize,
    pub program: String,
    pub program_bits: String,
    pub total: bool,
    pub live: bool,
    pub length: usize,
    /// The sequence so far equals the program's values on `0, 1, …`.
    pub agrees_with_program: bool,
    pub witness: Option<WitnessReport>,
}

/// What it takes to reproduce one Alice sequence: the shared match context
/// plus the label, written with `index_bits` bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AliceDescription {
    pub label: usize,
    pub index_bits: usize,
    pub index_code: String,
    pub context: String,
    pub live: bool,
    pub length: usize,
}

/// How far the first `b` programs reach into the enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LengthCut {
    pub programs_used: u64,
    /// Longest program used, in bits.
    pub max_bit_length: usize,
    /// Programs with at most `max_bit_length` bits.
    pub programs_within_cut: u64,
    /// Whether the programs used are exactly those within a bit-length cut.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DemoReport {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    pub rounds: usize,
    pub params: MachineParams,
    pub verdict: Verdict,
    pub length_cut: LengthCut,
    /// Bob uses the first `b` programs rather than all programs below a
    /// length bound.
    pub first_b_programs: bool,
    pub unwitnessed: Vec<usize>,
    pub bob: Vec<BobLabelReport>,
    pub alice: Vec<AliceDescription>,
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum DemoRecord<'r> {
    Summary {
        n: usize,
        a: usize,
        b: usize,
        rounds: usize,
        params: &'r MachineParams,
        verdict: Verdict,
        length_cut: &'r LengthCut,
        first_b_programs: bool,
        unwitnessed: &'r [usize],
    },
    Bob(&'r BobLabelReport),
    Alice(&'r AliceDescription),
}

impl DemoReport {
    pub fn is_success(&self) -> bool {
        self.verdict == Verdict::AliceWinWitnessed && self.unwitnessed.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        let mut records = vec![DemoRecord::Summary {
            n: self.n,
            a: self.a,
            b: self.b,
            rounds: self.rounds,
            params: &self.params,
            verdict: self.verdict,
            length_cut: &self.length_cut,
            first_b_programs: self.first_b_programs,
            unwitnessed: &self.unwitnessed,
        }];
        records.extend(self.bob.iter().map(DemoRecord::Bob));
        records.extend(self.alice.iter().map(DemoRecord::Alice));
        records
            .iter()
            .map(|r| serde_json::to_string(r).expect("report serializes") + "\n")
            .collect()
    }
}

/// Plays `alice_inductive(2^n)` against `blind_bob(2^n)` and returns the
/// report together with the trace.
pub fn run_demo(
    n: usize,
    rounds: usize,
    params: MachineParams,
) -> Result<(DemoReport, Trace), ReductionError> {
    let a = 1usize
        .checked_shl(n as u32)
        .filter(|&a| a < 64)
        .ok_or(ReductionError::InsufficientPrograms {
            needed: u64::MAX,
            available: program_count(params.l),
            max_bits: params.l,
        })?;
    let mut bob = BlindBob::new(a, params)?;
    let b = bob.labels();
    let mut alice = AliceInductive::new(a)?;
    let config = GameConfig::new(a, b, rounds, 0).map_err(StrategyError::from)?;
    let programs = bob.programs().to_vec();
    let totals: Vec<bool> = (0..b).map(|j| bob.is_total(j)).collect();
    let bob_name = bob.name();

    let mut game = Match::new(config, rounds, &mut alice, &mut bob)?;
    for _ in 0..rounds {
        game.play_round()?;
    }
    let (state, trace) = game.into_parts();
    let verdict = trace.final_verdict().unwrap_or(Verdict::AliceWinWitnessed);

    let bob_reports = (0..b)
        .map(|j| {
            let seq = &state.bob()[j];
            let witness = state
                .find_witness(j)
                .expect("label in range")
                .filter(|_| seq.is_live())
                .map(|w| WitnessReport {
                    alice_label: w.alice_label,
                    index: w.index,
                    alice_value: state.alice()[w.alice_label].terms()[w.index],
                    bob_value: seq.terms()[w.index],
                });
            let agrees = seq
                .terms()
                .iter()
                .enumerate()
                .all(|(x, &v)| programs[j].run(x as u64, params.s) == ExecResult::Halted(v));
            BobLabelReport {
                label: j,
                program: programs[j].to_string(),
                program_bits: programs[j].bit_string(),
                total: totals[j],
                live: seq.is_live(),
                length: seq.len(),
                agrees_with_program: agrees,
                witness,
            }
        })
        .collect();

    let context = format!("{} vs {bob_name}, {rounds} rounds", trace.header.alice_strategy);
    let alice_reports = (0..a)
        .map(|i| AliceDescription {
            label: i,
            index_bits: n,
            index_code: (0..n).rev().map(|bit| if i >> bit & 1 == 1 { '1' } else { '0' }).collect(),
            context: context.clone(),
            live: state.alice()[i].is_live(),
            length: state.alice()[i].len(),
        })
        .collect();

    let max_bit_length = programs.iter().map(|p| p.bit_length()).max().unwrap_or(0);
    let within = program_count(max_bit_length);
    let report = DemoReport {
        n,
        a,
        b,
        rounds,
        params,
        verdict,
        length_cut: LengthCut {
            programs_used: b as u64,
            max_bit_length,
            programs_within_cut: within,
            exact: within == b as u64,
        },
        first_b_programs: true,
        unwitnessed: state.unwitnessed_live_bob(),
        bob: bob_reports,
        alice: alice_reports,
    };
    Ok((report, trace))
}

/// Runs the demo and fails with [`ReductionError::DemoInconclusive`] unless
/// Alice ends with every live Bob label witnessed.
pub fn lower_bound_demo(
    n: usize,
    rounds: usize,
    params: MachineParams,
) -> Result<DemoReport, ReductionError> {
    let (report, _) = run_demo(n, rounds, params)?;
    if report.is_success() {
        Ok(report)
    } else {
        Err(ReductionError::DemoInconclusive(Box::new(report)))
    }
}
