//! Exceedance games, short-program dominators and the reduction between them.
//!
//! * [`game`] — positions, moves, witnesses and the incremental referee.
//! * [`strategies`] — the powerset Bob, the inductive Alice and adversaries.
//! * [`trace`] — running matches, JSON Lines traces and trace verification.
//! * [`machine`] — a tiny stack machine with program enumeration and
//!   budgeted totality.
//! * [`dominators`] — the weak (count advice) and strong (bit-vector advice)
//!   dominators and exceedance reports.
//! * [`reduction`] — blind Bob and the lower-bound demonstration.

pub mod dominators;
pub mod game;
pub mod machine;
pub mod reduction;
pub mod strategies;
pub mod trace;

pub use dominators::{
    exceedance_of_tables, exceedance_report, strong_dominator_eval, weak_dominator_eval,
    DominatorError, DominatorFunction, ExceedanceReport,
};
pub use game::{
    GameConfig, GameError, GameState, MoveBatch, Referee, Sequence, Side, Verdict, Witness,
    VALUE_MAX,
};
pub use machine::{
    advice_bitvector, advice_count, budgeted_totality, enumerate_programs, program_count,
    run_program, BitvectorAdvice, CountAdvice, ExecResult, Instr, MachineError, MachineParams,
    Program,
};
pub use reduction::{blind_bob_strategy, lower_bound_demo, BlindBob, DemoReport, ReductionError};
pub use strategies::{
    make_adversary, AdversaryKind, AdversaryParams, AliceInductive, BobPowerset, Move, Strategy,
    StrategyError,
};
pub use trace::{run_match, verify_trace, Match, Report, Trace, TraceError, TurnRecord, Violation};
