//! Cross-checks enumeration, advice and dominator values against a second,
//! deliberately naive implementation that works on bit strings directly.

use exceed_core::machine::{
    advice_bitvector, advice_count, enumerate_programs, program_count, ExecResult, MachineParams,
};
use exceed_core::{strong_dominator_eval, weak_dominator_eval};

/// Naive decoder: a `Vec` of (opcode, offset) pairs, or `None`.
fn oracle_decode(bits: &[u8]) -> Option<Vec<(u8, i64)>> {
    let mut out = Vec::new();
    let mut i = 0;
    let group = |i: usize| bits[i] * 4 + bits[i + 1] * 2 + bits[i + 2];
    while i < bits.len() {
        if i + 3 > bits.len() {
            return None;
        }
        let op = group(i);
        i += 3;
        if op == 7 {
            if i + 3 > bits.len() {
                return None;
            }
            let raw = group(i) as i64;
            i += 3;
            out.push((7, if raw >= 4 { raw - 8 } else { raw }));
        } else {
            out.push((op, 0));
        }
    }
    Some(out)
}

/// Naive interpreter. `None` means fault or budget exhaustion.
fn oracle_run(prog: &[(u8, i64)], input: u64, budget: u64) -> Option<u64> {
    let mut stack: Vec<u64> = Vec::new();
    let mut pc: i64 = 0;
    let mut steps = 0;
    while (pc as usize) < prog.len() {
        if steps == budget {
            return None;
        }
        steps += 1;
        let (op, rel) = prog[pc as usize];
        pc += 1;
        match op {
            0 => stack.push(0),
            1 => stack.push(input),
            2 => {
                let x = stack.pop()?;
                stack.push(x + 1);
            }
            3 => {
                let x = *stack.last()?;
                stack.push(x);
            }
            4 => {
                let x = stack.pop()?;
                let y = stack.pop()?;
                stack.push(x + y);
            }
            5 => {
                let x = stack.pop()?;
                stack.push(if x == 0 { 0 } else { x - 1 });
            }
            6 => {
                stack.pop()?;
            }
            _ => {
                if stack.pop()? != 0 {
                    let target = pc - 1 + rel;
                    pc = if target < 0 || target as usize >= prog.len() {
                        prog.len() as i64
                    } else {
                        target
                    };
                }
            }
        }
    }
    Some(stack.last().copied().unwrap_or(0))
}

/// All bit strings up to `n` bits that decode, shortest first, then by value.
fn oracle_programs(n: usize) -> Vec<(Vec<u8>, Vec<(u8, i64)>)> {
    let mut out = Vec::new();
    for len in 1..=n {
        for v in 0..(1u64 << len) {
            let bits: Vec<u8> = (0..len).rev().map(|i| (v >> i & 1) as u8).collect();
            if let Some(p) = oracle_decode(&bits) {
                out.push((bits, p));
            }
        }
    }
    out
}

fn oracle_total(p: &[(u8, i64)], k: u64, s: u64) -> bool {
    (0..=k).all(|x| oracle_run(p, x, s).is_some())
}

fn small() -> MachineParams {
    MachineParams::new(4, 64, 12).unwrap()
}

#[test]
fn enumeration_matches_oracle() {
    for n in 0..=9 {
        let oracle = oracle_programs(n);
        let lib: Vec<String> = enumerate_programs(n).map(|p| p.bit_string()).collect();
        let expect: Vec<String> = oracle
            .iter()
            .map(|(b, _)| b.iter().map(|d| d.to_string()).collect())
            .collect();
        assert_eq!(lib, expect, "n={n}");
        assert_eq!(program_count(n), oracle.len() as u64);
    }
}

#[test]
fn program_counts_per_length() {
    let counts: Vec<u64> = [3, 6, 9, 12]
        .iter()
        .map(|&n| oracle_programs(n).len() as u64)
        .collect();
    assert_eq!(counts, [7, 64, 519, 4160]);
}

#[test]
fn runs_match_oracle() {
    for prog in enumerate_programs(9) {
        let bits = prog.bit_string().bytes().map(|c| c - b'0').collect::<Vec<_>>();
        let naive = oracle_decode(&bits).unwrap();
        for input in 0..4 {
            for budget in [1, 3, 17, 64] {
                let want = oracle_run(&naive, input, budget);
                let got = prog.run(input, budget);
                match want {
                    Some(v) => assert_eq!(got, ExecResult::Halted(v), "{prog} on {input}"),
                    None => assert!(got.value().is_none(), "{prog} on {input}"),
                }
            }
        }
    }
}

#[test]
fn advice_at_six_bits() {
    let params = small();
    let oracle: Vec<bool> = oracle_programs(6)
        .iter()
        .map(|(_, p)| oracle_total(p, 4, 64))
        .collect();
    let count = oracle.iter().filter(|&&t| t).count() as u64;

    let bv = advice_bitvector(6, &params).unwrap();
    assert_eq!(bv.bits, oracle);
    assert_eq!(advice_count(6, &params).unwrap().count, count);
    // Frozen from the oracle above so that a change in either shows up.
    assert_eq!(count, 14);
    assert_eq!(bv.bits_hex(), "c1efd80000000000");
}

#[test]
fn strong_table_at_six_bits() {
    let params = small();
    let programs = oracle_programs(6);
    let oracle: Vec<u64> = (0..=4)
        .map(|k| {
            programs
                .iter()
                .filter(|(_, p)| oracle_total(p, 4, 64))
                .map(|(_, p)| oracle_run(p, k, 64).unwrap() + 1)
                .max()
                .unwrap_or(0)
        })
        .collect();
    let bv = advice_bitvector(6, &params).unwrap();
    let table: Vec<u64> = (0..=4)
        .map(|k| strong_dominator_eval(&bv, k, &params).unwrap())
        .collect();
    assert_eq!(table, oracle);
    assert_eq!(table, [2, 3, 4, 5, 6]);
}

#[test]
fn weak_dominator_matches_oracle_at_k_max() {
    let params = small();
    for n in [3, 6, 9] {
        let best = oracle_programs(n)
            .iter()
            .filter(|(_, p)| oracle_total(p, 4, 64))
            .map(|(_, p)| oracle_run(p, 4, 64).unwrap() + 1)
            .max()
            .unwrap_or(0);
        let advice = advice_count(n, &params).unwrap();
        assert_eq!(weak_dominator_eval(&advice, 4, &params).unwrap(), best, "n={n}");
    }
}
