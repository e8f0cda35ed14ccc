//! Functions that outgrow every short total program.
//!
//! The weak dominator needs only the *number* of total programs of length at
//! most `n`: it dovetails all such programs on inputs `0..=k` and, once that
//! many have halted everywhere, answers one more than their largest value at
//! `k`. Early on, non-total programs that happen to halt on small inputs can
//! crowd out a total one, so the dominator may lose at small `k`; it cannot
//! lose at `k = K`.
//!
//! The strong dominator is handed the totality flag of every program and
//! simply takes one more than the maximum over the flagged ones. It wins
//! everywhere, at the price of an advice string exponentially longer.

use serde::Serialize;
use thiserror::Error;

use crate::machine::{
    enumerate_programs, BitvectorAdvice, CountAdvice, ExecResult, Execution, MachineError,
    MachineParams, Program,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DominatorError {
    #[error("advice demands {needed} programs halting on 0..={k}, only {found} do within {budget} steps")]
    AdviceUnsatisfiable {
        needed: u64,
        found: u64,
        k: u64,
        budget: u64,
    },
    #[error("program #{index} ({program}) is flagged total but does not halt on {k} within {budget} steps")]
    AdviceInconsistent {
        index: usize,
        program: String,
        k: u64,
        budget: u64,
    },
    #[error("advice was computed for K={advice_k}, S={advice_s}, but params have K={k}, S={s}")]
    ParamsMismatch {
        advice_k: u64,
        advice_s: u64,
        k: u64,
        s: u64,
    },
    #[error("input {k} is beyond K={max}")]
    InputOutOfRange { k: u64, max: u64 },
    #[error(transparent)]
    Machine(#[from] MachineError),
}

fn check_input(k: u64, params: &MachineParams) -> Result<(), DominatorError> {
    if k > params.k {
        return Err(DominatorError::InputOutOfRange { k, max: params.k });
    }
    Ok(())
}

fn check_params(advice_k: u64, advice_s: u64, params: &MachineParams) -> Result<(), DominatorError> {
    if (advice_k, advice_s) != (params.k, params.s) {
        return Err(DominatorError::ParamsMismatch {
            advice_k,
            advice_s,
            k: params.k,
            s: params.s,
        });
    }
    Ok(())
}

/// Budgets the dovetailer tries: 1, 2, 4, … and finally `s` itself.
pub fn budget_schedule(s: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut b = 1u64;
    while b < s {
        out.push(b);
        b = b.saturating_mul(2);
    }
    out.push(s.max(1));
    out
}

/// Dovetailing state for one program on inputs `0..=k`. Runs are resumed
/// across budget stages rather than restarted.
struct Candidate {
    program: Program,
    runs: Vec<Execution>,
    values: Vec<u64>,
    dead: bool,
}

impl Candidate {
    fn new(program: Program) -> Self {
        Candidate {
            program,
            runs: Vec::new(),
            values: Vec::new(),
            dead: false,
        }
    }

    /// Tries to finish all runs on `0..=k` within `budget` steps each.
    /// Returns true once every input has halted.
    fn qualifies(&mut self, k: u64, budget: u64) -> bool {
        while !self.dead && (self.values.len() as u64) <= k {
            let x = self.values.len() as u64;
            if self.runs.is_empty() {
                self.runs.push(Execution::new(x));
            }
            let run = &mut self.runs[0];
            let grant = budget.saturating_sub(run.steps());
            match run.advance(&self.program, grant) {
                ExecResult::Halted(v) => {
                    self.values.push(v);
                    self.runs.clear();
                }
                ExecResult::StackFault => self.dead = true,
                ExecResult::OutOfBudget => return false,
            }
        }
        !self.dead
    }
}

/// Dominator built from the number of budgeted-total programs.
pub fn weak_dominator_eval(
    advice: &CountAdvice,
    k: u64,
    params: &MachineParams,
) -> Result<u64, DominatorError> {
    check_input(k, params)?;
    check_params(advice.k, advice.s, params)?;
    if advice.count == 0 {
        return Ok(0);
    }
    let mut candidates: Vec<Candidate> = enumerate_programs(advice.n).map(Candidate::new).collect();
    let mut qualified = vec![false; candidates.len()];
    let mut found = 0u64;
    let mut best = 0u64;
    for budget in budget_schedule(params.s) {
        for (index, cand) in candidates.iter_mut().enumerate() {
            if qualified[index] || cand.dead {
                continue;
            }
            if cand.qualifies(k, budget) {
                qualified[index] = true;
                found += 1;
                best = best.max(cand.values[k as usize]);
                if found == advice.count {
                    return Ok(best + 1);
                }
            }
        }
    }
    Err(DominatorError::AdviceUnsatisfiable {
        needed: advice.count,
        found,
        k,
        budget: params.s,
    })
}

/// Dominator built from the per-program totality flags.
pub fn strong_dominator_eval(
    advice: &BitvectorAdvice,
    k: u64,
    params: &MachineParams,
) -> Result<u64, DominatorError> {
    check_input(k, params)?;
    check_params(advice.k, advice.s, params)?;
    let mut best: Option<u64> = None;
    for (index, (program, _)) in enumerate_programs(advice.n)
        .zip(&advice.bits)
        .enumerate()
        .filter(|(_, (_, &flag))| flag)
    {
        match program.run(k, params.s) {
            ExecResult::Halted(v) => best = Some(best.map_or(v, |b| b.max(v))),
            _ => {
                return Err(DominatorError::AdviceInconsistent {
                    index,
                    program: program.to_string(),
                    k,
                    budget: params.s,
                })
            }
        }
    }
    Ok(best.map_or(0, |b| b + 1))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "advice")]
pub enum Advice {
    WeakFromCount(CountAdvice),
    StrongFromBitvector(BitvectorAdvice),
}

/// A dominator together with the advice and parameters it evaluates under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominatorFunction {
    pub advice: Advice,
    pub params: MachineParams,
}

impl DominatorFunction {
    pub fn weak(advice: CountAdvice, params: MachineParams) -> Self {
        DominatorFunction {
            advice: Advice::WeakFromCount(advice),
            params,
        }
    }

    pub fn strong(advice: BitvectorAdvice, params: MachineParams) -> Self {
        DominatorFunction {
            advice: Advice::StrongFromBitvector(advice),
            params,
        }
    }

    pub fn eval(&self, k: u64) -> Result<u64, DominatorError> {
        match &self.advice {
            Advice::WeakFromCount(a) => weak_dominator_eval(a, k, &self.params),
            Advice::StrongFromBitvector(a) => strong_dominator_eval(a, k, &self.params),
        }
    }

    /// Values on `0..=K`.
    pub fn table(&self) -> Result<Vec<u64>, DominatorError> {
        (0..=self.params.k).map(|k| self.eval(k)).collect()
    }

    pub fn advice_bits(&self) -> u64 {
        match &self.advice {
            Advice::WeakFromCount(a) => a.bit_size() as u64,
            Advice::StrongFromBitvector(a) => a.bit_size(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExceedanceReport {
    pub everywhere: bool,
    pub weakly_from: Option<u64>,
    /// Inclusive range of inputs compared.
    pub checked_range: (u64, u64),
}

/// Compares `f` against `g` on `0..=k_max`.
pub fn exceedance_report(
    f: impl Fn(u64) -> u64,
    g: impl Fn(u64) -> u64,
    k_max: u64,
) -> ExceedanceReport {
    let mut weakly_from = None;
    for k in (0..=k_max).rev() {
        if f(k) > g(k) {
            weakly_from = Some(k);
        } else {
            break;
        }
    }
    ExceedanceReport {
        everywhere: weakly_from == Some(0),
        weakly_from,
        checked_range: (0, k_max),
    }
}

/// [`exceedance_report`] over two value tables of equal length.
pub fn exceedance_of_tables(f: &[u64], g: &[u64]) -> ExceedanceReport {
    assert_eq!(f.len(), g.len(), "tables must cover the same inputs");
    assert!(!f.is_empty(), "tables must not be empty");
    exceedance_report(|k| f[k as usize], |k| g[k as usize], f.len() as u64 - 1)
}
