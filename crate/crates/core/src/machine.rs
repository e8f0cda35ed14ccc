//! A tiny step-budgeted stack machine.
//!
//! Every instruction is a 3-bit opcode; `JNZ` carries an extra 3-bit signed
//! offset. Program length is measured in bits of this encoding, and programs
//! are enumerated in length-lex order: by bit length, then by the encoding
//! read as a binary number (first instruction in the most significant bits).
//!
//! | opcode | mnemonic | effect |
//! |--------|----------|--------|
//! | 0 | `PUSH0` | push 0 |
//! | 1 | `INPUT` | push the input |
//! | 2 | `INC`   | top += 1 |
//! | 3 | `DUP`   | push a copy of top |
//! | 4 | `ADD`   | pop x, pop y, push x + y |
//! | 5 | `DEC`   | top -= 1, stopping at 0 |
//! | 6 | `POP`   | pop |
//! | 7 | `JNZ(r)`| pop x; if x ≠ 0 jump to pc + r |
//!
//! Arithmetic saturates at [`VALUE_MAX`]. A program halts when control
//! reaches the end, or when a jump leaves the program; its value is the top
//! of the stack (0 if empty).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::VALUE_MAX;

pub const OPCODE_BITS: usize = 3;
pub const OFFSET_BITS: usize = 3;

/// Longest program bit length the enumeration supports.
pub const MAX_SUPPORTED_BITS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Instr {
    Push0,
    Input,
    Inc,
    Dup,
    Add,
    Dec,
    Pop,
    /// Relative jump, `-4..=3`.
    Jnz(i8),
}

impl Instr {
    pub fn opcode(self) -> u64 {
        match self {
            Instr::Push0 => 0,
            Instr::Input => 1,
            Instr::Inc => 2,
            Instr::Dup => 3,
            Instr::Add => 4,
            Instr::Dec => 5,
            Instr::Pop => 6,
            Instr::Jnz(_) => 7,
        }
    }

    pub fn bit_length(self) -> usize {
        match self {
            Instr::Jnz(_) => OPCODE_BITS + OFFSET_BITS,
            _ => OPCODE_BITS,
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Push0 => f.write_str("PUSH0"),
            Instr::Input => f.write_str("INPUT"),
            Instr::Inc => f.write_str("INC"),
            Instr::Dup => f.write_str("DUP"),
            Instr::Add => f.write_str("ADD"),
            Instr::Dec => f.write_str("DEC"),
            Instr::Pop => f.write_str("POP"),
            Instr::Jnz(r) => write!(f, "JNZ({r})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error("unknown instruction `{0}`")]
    UnknownInstr(String),
    #[error("jump offset {0} is outside -4..=3")]
    OffsetOutOfRange(i64),
    #[error("bit string of length {bits} does not decode to a program")]
    Undecodable { bits: usize },
    #[error("program length {bits} exceeds the supported maximum {max}")]
    TooLong { bits: usize, max: usize },
    #[error("invalid machine parameters: {0}")]
    InvalidParams(String),
}

impl FromStr for Instr {
    type Err = MachineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        let instr = match upper.as_str() {
            "PUSH0" => Instr::Push0,
            "INPUT" => Instr::Input,
            "INC" => Instr::Inc,
            "DUP" => Instr::Dup,
            "ADD" => Instr::Add,
            "DEC" => Instr::Dec,
            "POP" => Instr::Pop,
            _ => {
                let inner = upper
                    .strip_prefix("JNZ(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| MachineError::UnknownInstr(s.trim().to_string()))?;
                let rel: i64 = inner
                    .trim()
                    .parse()
                    .map_err(|_| MachineError::UnknownInstr(s.trim().to_string()))?;
                if !(-4..=3).contains(&rel) {
                    return Err(MachineError::OffsetOutOfRange(rel));
                }
                Instr::Jnz(rel as i8)
            }
        };
        Ok(instr)
    }
}

/// A well-formed program with its cached encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    instrs: Vec<Instr>,
    bits: usize,
    code: u64,
}

impl Program {
    pub fn new(instrs: Vec<Instr>) -> Result<Self, MachineError> {
        let bits: usize = instrs.iter().map(|i| i.bit_length()).sum();
        if bits > MAX_SUPPORTED_BITS {
            return Err(MachineError::TooLong {
                bits,
                max: MAX_SUPPORTED_BITS,
            });
        }
        let mut code = 0u64;
        for instr in &instrs {
            code = code << OPCODE_BITS | instr.opcode();
            if let Instr::Jnz(r) = instr {
                code = code << OFFSET_BITS | (*r as u64 & 0b111);
            }
        }
        Ok(Program { instrs, bits, code })
    }

    /// Decodes the `bits`-bit string whose binary value is `code`.
    pub fn decode(bits: usize, code: u64) -> Result<Self, MachineError> {
        if bits > MAX_SUPPORTED_BITS {
            return Err(MachineError::TooLong {
                bits,
                max: MAX_SUPPORTED_BITS,
            });
        }
        let undecodable = MachineError::Undecodable { bits };
        if !bits.is_multiple_of(OPCODE_BITS) || (bits < 64 && code >> bits != 0) {
            return Err(undecodable);
        }
        let mut instrs = Vec::new();
        let mut left = bits;
        let take = |left: &mut usize| {
            *left -= 3;
            (code >> *left & 0b111) as u8
        };
        while left > 0 {
            let op = take(&mut left);
            let instr = match op {
                0 => Instr::Push0,
                1 => Instr::Input,
                2 => Instr::Inc,
                3 => Instr::Dup,
                4 => Instr::Add,
                5 => Instr::Dec,
                6 => Instr::Pop,
                _ => {
                    if left == 0 {
                        return Err(undecodable);
                    }
                    let raw = take(&mut left);
                    // Sign-extend the 3-bit field.
                    Instr::Jnz(((raw << 5) as i8) >> 5)
                }
            };
            instrs.push(instr);
        }
        Ok(Program { instrs, bits, code })
    }

    pub fn instrs(&self) -> &[Instr] {
        &self.instrs
    }

    pub fn bit_length(&self) -> usize {
        self.bits
    }

    pub fn code(&self) -> u64 {
        self.code
    }

    /// The encoding as a string of `0`/`1`, most significant bit first.
    pub fn bit_string(&self) -> String {
        (0..self.bits)
            .rev()
            .map(|i| if self.code >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn run(&self, input: u64, budget: u64) -> ExecResult {
        let mut exec = Execution::new(input);
        exec.advance(self, budget)
    }
}

impl PartialOrd for Program {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Program {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.bits, self.code).cmp(&(other.bits, other.code))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, instr) in self.instrs.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{instr}")?;
        }
        Ok(())
    }
}

impl FromStr for Program {
    type Err = MachineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let instrs = s
            .split_whitespace()
            .map(Instr::from_str)
            .collect::<Result<Vec<_>, _>>()?;
        Program::new(instrs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExecResult {
    Halted(u64),
    OutOfBudget,
    StackFault,
}

impl ExecResult {
    pub fn value(self) -> Option<u64> {
        match self {
            ExecResult::Halted(v) => Some(v),
            _ => None,
        }
    }
}

/// A paused run of some program on one input. Call [`Execution::advance`]
/// with the same program to grant more steps; results are identical to a
/// single [`Program::run`] with the summed budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    input: u64,
    pc: usize,
    stack: Vec<u64>,
    steps: u64,
    done: Option<ExecResult>,
}

impl Execution {
    pub fn new(input: u64) -> Self {
        Execution {
            input,
            pc: 0,
            stack: Vec::new(),
            steps: 0,
            done: None,
        }
    }

    /// Steps executed so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Final result, if the run halted or faulted.
    pub fn finished(&self) -> Option<ExecResult> {
        self.done
    }

    /// Runs up to `budget` further steps. Returns the final result, or
    /// `OutOfBudget` if the run is still going.
    pub fn advance(&mut self, program: &Program, budget: u64) -> ExecResult {
        if let Some(done) = self.done {
            return done;
        }
        let code = &program.instrs;
        let mut left = budget;
        loop {
            if self.pc >= code.len() {
                let value = self.stack.last().copied().unwrap_or(0);
                return self.finish(ExecResult::Halted(value));
            }
            if left == 0 {
                return ExecResult::OutOfBudget;
            }
            left -= 1;
            self.steps += 1;
            let mut next = self.pc + 1;
            let stack = &mut self.stack;
            let ok = match code[self.pc] {
                Instr::Push0 => {
                    stack.push(0);
                    true
                }
                Instr::Input => {
                    stack.push(self.input.min(VALUE_MAX));
                    true
                }
                Instr::Inc => stack.last_mut().map(|x| *x = (*x + 1).min(VALUE_MAX)).is_some(),
                Instr::Dec => stack.last_mut().map(|x| *x = x.saturating_sub(1)).is_some(),
                Instr::Dup => match stack.last() {
                    Some(&x) => {
                        stack.push(x);
                        true
                    }
                    None => false,
                },
                Instr::Add => match (stack.pop(), stack.pop()) {
                    (Some(x), Some(y)) => {
                        stack.push(x.saturating_add(y).min(VALUE_MAX));
                        true
                    }
                    _ => false,
                },
                Instr::Pop => stack.pop().is_some(),
                Instr::Jnz(rel) => match stack.pop() {
                    Some(0) => true,
                    Some(_) => {
                        let target = self.pc as i64 + rel as i64;
                        // Jumping outside the program ends it.
                        next = if (0..code.len() as i64).contains(&target) {
                            target as usize
                        } else {
                            code.len()
                        };
                        true
                    }
                    None => false,
                },
            };
            if !ok {
                return self.finish(ExecResult::StackFault);
            }
            self.pc = next;
        }
    }

    fn finish(&mut self, result: ExecResult) -> ExecResult {
        self.done = Some(result);
        result
    }
}

pub fn run_program(program: &Program, input: u64, budget: u64) -> ExecResult {
    program.run(input, budget)
}

/// Totality probe parameters: inputs `0..=k`, `s` steps per run, programs up
/// to `l` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineParams {
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(rename = "S")]
    pub s: u64,
    #[serde(rename = "L")]
    pub l: usize,
}

impl Default for MachineParams {
    fn default() -> Self {
        MachineParams { k: 8, s: 256, l: 12 }
    }
}

impl MachineParams {
    pub fn new(k: u64, s: u64, l: usize) -> Result<Self, MachineError> {
        let params = MachineParams { k, s, l };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), MachineError> {
        if self.k < 1 || self.s < 1 || self.l < 3 {
            return Err(MachineError::InvalidParams(format!(
                "need K >= 1, S >= 1, L >= 3 (got K={}, S={}, L={})",
                self.k, self.s, self.l
            )));
        }
        if self.l > MAX_SUPPORTED_BITS {
            return Err(MachineError::TooLong {
                bits: self.l,
                max: MAX_SUPPORTED_BITS,
            });
        }
        Ok(())
    }
}

/// Every program with bit length at most `max_bits`, in length-lex order.
/// Bit lengths that are not a multiple of 3 contribute nothing.
pub fn enumerate_programs(max_bits: usize) -> impl Iterator<Item = Program> {
    let max_bits = max_bits.min(MAX_SUPPORTED_BITS);
    (1..=max_bits / OPCODE_BITS).flat_map(|groups| {
        let bits = groups * OPCODE_BITS;
        (0..1u64 << bits).filter_map(move |code| Program::decode(bits, code).ok())
    })
}

/// `P_n`: the number of programs with bit length at most `n`.
pub fn program_count(n: usize) -> u64 {
    // c(g) counts programs of exactly g 3-bit groups: a group is one of seven
    // plain opcodes, or a JNZ consuming two groups with eight offsets.
    let groups = n.min(MAX_SUPPORTED_BITS) / OPCODE_BITS;
    let mut c = vec![1u64, 7];
    for g in 2..=groups {
        c.push(7 * c[g - 1] + 8 * c[g - 2]);
    }
    c[1..=groups].iter().sum()
}

pub fn budgeted_totality(program: &Program, params: &MachineParams) -> bool {
    (0..=params.k).all(|x| matches!(program.run(x, params.s), ExecResult::Halted(_)))
}

/// Number of budgeted-total programs of length at most `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountAdvice {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(rename = "S")]
    pub s: u64,
    pub count: u64,
}

impl CountAdvice {
    pub fn bit_size(&self) -> u32 {
        ceil_log2(program_count(self.n) + 1)
    }
}

/// One totality flag per program of length at most `n`, in length-lex order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BitvectorWire", into = "BitvectorWire")]
pub struct BitvectorAdvice {
    pub n: usize,
    pub k: u64,
    pub s: u64,
    pub bits: Vec<bool>,
}

impl BitvectorAdvice {
    pub fn bit_size(&self) -> u64 {
        program_count(self.n)
    }

    pub fn popcount(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    /// Flags packed most significant bit first, as lowercase hex. The final
    /// digit is padded with zero bits.
    pub fn bits_hex(&self) -> String {
        self.bits
            .chunks(4)
            .map(|nibble| {
                let v = nibble
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (i, &b)| acc | (b as u32) << (3 - i));
                char::from_digit(v, 16).expect("nibble")
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct BitvectorWire {
    n: usize,
    #[serde(rename = "K")]
    k: u64,
    #[serde(rename = "S")]
    s: u64,
    bits: String,
}

impl From<BitvectorAdvice> for BitvectorWire {
    fn from(adv: BitvectorAdvice) -> Self {
        BitvectorWire {
            bits: adv.bits_hex(),
            n: adv.n,
            k: adv.k,
            s: adv.s,
        }
    }
}

impl TryFrom<BitvectorWire> for BitvectorAdvice {
    type Error = String;

    fn try_from(w: BitvectorWire) -> Result<Self, Self::Error> {
        let len = program_count(w.n) as usize;
        if w.bits.len() != len.div_ceil(4) {
            return Err(format!(
                "bit vector for n={} needs {} hex digits, got {}",
                w.n,
                len.div_ceil(4),
                w.bits.len()
            ));
        }
        let mut bits = Vec::with_capacity(len);
        for c in w.bits.chars() {
            let v = c.to_digit(16).ok_or_else(|| format!("bad hex digit `{c}`"))?;
            bits.extend((0..4).rev().map(|i| v >> i & 1 == 1));
        }
        if bits[len..].iter().any(|&b| b) {
            return Err("padding bits must be zero".into());
        }
        bits.truncate(len);
        Ok(BitvectorAdvice {
            n: w.n,
            k: w.k,
            s: w.s,
            bits,
        })
    }
}

fn check_length(n: usize, params: &MachineParams) -> Result<(), MachineError> {
    if n > params.l {
        return Err(MachineError::TooLong {
            bits: n,
            max: params.l,
        });
    }
    Ok(())
}

pub fn advice_count(n: usize, params: &MachineParams) -> Result<CountAdvice, MachineError> {
    let bv = advice_bitvector(n, params)?;
    Ok(CountAdvice {
        n,
        k: params.k,
        s: params.s,
        count: bv.popcount(),
    })
}

pub fn advice_bitvector(n: usize, params: &MachineParams) -> Result<BitvectorAdvice, MachineError> {
    check_length(n, params)?;
    Ok(BitvectorAdvice {
        n,
        k: params.k,
        s: params.s,
        bits: enumerate_programs(n)
            .map(|p| budgeted_totality(&p, params))
            .collect(),
    })
}

/// `⌈log2 x⌉` for `x ≥ 1`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        u64::BITS - (x - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Program {
        s.parse().unwrap()
    }

    #[test]
    fn run_examples() {
        assert_eq!(p("INPUT INC").run(4, 10), ExecResult::Halted(5));
        assert_eq!(p("PUSH0 INC JNZ(-2)").run(3, 100), ExecResult::OutOfBudget);
        assert_eq!(p("POP").run(0, 5), ExecResult::StackFault);
        assert_eq!(p("").run(0, 1), ExecResult::Halted(0));
        // JNZ pops its test value.
        assert_eq!(p("INPUT JNZ(1)").run(0, 10), ExecResult::Halted(0));
        assert_eq!(p("INPUT JNZ(0)").run(1, 10), ExecResult::StackFault);
        // Jumping out of the program halts it.
        assert_eq!(p("PUSH0 INC DUP JNZ(-4)").run(0, 10), ExecResult::Halted(1));
    }

    #[test]
    fn out_of_budget_after_exactly_budget_steps() {
        let prog = p("INPUT INC INC");
        assert_eq!(prog.run(0, 2), ExecResult::OutOfBudget);
        assert_eq!(prog.run(0, 3), ExecResult::Halted(2));
    }

    #[test]
    fn loop_counts_down() {
        // x, then loop: DEC; DUP; JNZ back to DEC.
        let prog = p("INPUT INC DEC DUP JNZ(-2)");
        assert_eq!(prog.run(3, 1000), ExecResult::Halted(0));
    }

    #[test]
    fn literal_round_trip() {
        let prog = p("INPUT jnz(-2) ADD");
        assert_eq!(prog.to_string(), "INPUT JNZ(-2) ADD");
        assert_eq!(prog.bit_length(), 12);
        assert_eq!(prog.bit_string(), "001111110100");
        assert!(matches!("JNZ(4)".parse::<Instr>(), Err(MachineError::OffsetOutOfRange(4))));
        assert!("MUL".parse::<Program>().is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_programs(0).count(), 0);
        let three: Vec<String> = enumerate_programs(3).map(|p| p.to_string()).collect();
        assert_eq!(three, ["PUSH0", "INPUT", "INC", "DUP", "ADD", "DEC", "POP"]);
        for n in 0..=12 {
            assert_eq!(enumerate_programs(n).count() as u64, program_count(n), "n={n}");
        }
        assert_eq!(program_count(12), 4160);
    }

    #[test]
    fn enumeration_is_strictly_increasing() {
        let all: Vec<Program> = enumerate_programs(9).collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        for prog in &all {
            assert_eq!(&Program::decode(prog.bit_length(), prog.code()).unwrap(), prog);
            assert_eq!(&Program::new(prog.instrs().to_vec()).unwrap(), prog);
        }
    }

    #[test]
    fn undecodable_strings() {
        assert!(Program::decode(3, 0b111).is_err());
        assert!(Program::decode(4, 0).is_err());
        assert!(Program::decode(3, 0b1000).is_err());
    }

    #[test]
    fn totality_examples() {
        let params = MachineParams::new(8, 64, 12).unwrap();
        assert!(budgeted_totality(&p("INPUT INC"), &params));
        assert!(!budgeted_totality(&p("PUSH0 INC JNZ(-2)"), &params));
        assert!(!budgeted_totality(&p("POP"), &params));
        assert!(MachineParams::new(0, 1, 3).is_err());
    }

    #[test]
    fn advice_objects() {
        let params = MachineParams::new(4, 64, 12).unwrap();
        assert_eq!(advice_count(0, &params).unwrap().count, 0);
        assert!(advice_bitvector(0, &params).unwrap().bits.is_empty());
        let mut last = 0;
        for n in 0..=9 {
            let c = advice_count(n, &params).unwrap();
            let bv = advice_bitvector(n, &params).unwrap();
            assert_eq!(bv.popcount(), c.count);
            assert!(c.count >= last);
            last = c.count;
        }
        assert!(advice_count(13, &params).is_err());
    }

    #[test]
    fn advice_serialization() {
        let params = MachineParams::new(4, 64, 12).unwrap();
        let c = advice_count(3, &params).unwrap();
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            r#"{"n":3,"K":4,"S":64,"count":2}"#
        );
        let bv = advice_bitvector(3, &params).unwrap();
        // PUSH0 and INPUT are the only total one-instruction programs.
        assert_eq!(
            serde_json::to_string(&bv).unwrap(),
            r#"{"n":3,"K":4,"S":64,"bits":"c0"}"#
        );
        let bv6 = advice_bitvector(6, &params).unwrap();
        let text = serde_json::to_string(&bv6).unwrap();
        assert_eq!(serde_json::from_str::<BitvectorAdvice>(&text).unwrap(), bv6);
    }

    #[test]
    fn log_sizes() {
        assert_eq!(
            [1, 2, 3, 4, 5, 8, 9].map(ceil_log2),
            [0, 1, 2, 2, 3, 3, 4]
        );
        let c = CountAdvice { n: 3, k: 8, s: 256, count: 0 };
        assert_eq!(c.bit_size(), 3);
    }

    #[test]
    fn resumed_execution_matches_single_run() {
        let prog = p("INPUT INC DEC DUP JNZ(-2)");
        let mut exec = Execution::new(5);
        let mut result = ExecResult::OutOfBudget;
        for grant in [1, 1, 2, 4, 8, 16] {
            result = exec.advance(&prog, grant);
        }
        assert_eq!(result, prog.run(5, 32));
        assert_eq!(exec.finished(), Some(result));
    }
}
