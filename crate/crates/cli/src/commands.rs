//! Command bodies. Each returns `Ok(true)` on success, `Ok(false)` when the
//! checked property fails, and an error for usage or module failures.

use std::fmt;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use exceed_core::dominators::exceedance_of_tables;
use exceed_core::machine::program_count;
use exceed_core::reduction::run_demo;
use exceed_core::{
    advice_bitvector, advice_count, enumerate_programs, run_match, strong_dominator_eval,
    verify_trace, weak_dominator_eval, ExceedanceReport, GameConfig, MachineParams, Side, Strategy,
    Trace, Verdict,
};

use crate::roster::{self, Setup};
use crate::{BlindBobArgs, DominateArgs, EnumerateArgs, PlayArgs, TournamentArgs, VerifyArgs};

/// A bad flag value; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn stdout() -> BufWriter<io::StdoutLock<'static>> {
    BufWriter::new(io::stdout().lock())
}

fn json_line<T: Serialize>(out: &mut impl Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn strategy(name: &str, side: Side, setup: &Setup) -> Result<Box<dyn Strategy>> {
    let (flag, names) = match side {
        Side::Alice => ("--alice", roster::ALICE_NAMES),
        Side::Bob => ("--bob", roster::BOB_NAMES),
    };
    match roster::build(name, side, setup) {
        None => Err(usage(format!("{flag}: unknown strategy `{name}` (expected one of: {names})"))),
        Some(made) => Ok(made?),
    }
}

#[derive(Serialize)]
struct PlaySummary<'t> {
    alice: &'t str,
    bob: &'t str,
    turns: usize,
    final_verdict: Option<Verdict>,
}

pub fn play(args: &PlayArgs, pretty: bool) -> Result<bool> {
    let machine = args.machine.params()?;
    let b = args.b.unwrap_or_else(|| roster::default_b(&args.bob, args.a));
    let setup = Setup {
        a: args.a,
        seed: args.seed,
        live: args.live.clone(),
        machine,
    };
    let mut alice = strategy(&args.alice, Side::Alice, &setup)?;
    let mut bob = strategy(&args.bob, Side::Bob, &setup)?;
    let config = GameConfig::new(args.a, b, args.rounds, args.seed)?;
    let trace = run_match(config, alice.as_mut(), bob.as_mut(), args.rounds)?;

    let summary = PlaySummary {
        alice: &trace.header.alice_strategy,
        bob: &trace.header.bob_strategy,
        turns: trace.records.len(),
        final_verdict: trace.final_verdict(),
    };
    let mut out = stdout();
    match &args.trace {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            trace.write_jsonl(&mut w)?;
            w.flush()?;
            if pretty {
                print_summary(&mut out, &summary)?;
            } else {
                json_line(&mut out, &summary)?;
            }
        }
        None if pretty => {
            print_trace(&mut out, &trace)?;
            print_summary(&mut out, &summary)?;
        }
        None => trace.write_jsonl(&mut out)?,
    }
    out.flush()?;
    Ok(true)
}

fn print_summary(out: &mut impl Write, s: &PlaySummary) -> Result<()> {
    let verdict = s.final_verdict.map_or("none".to_string(), |v| v.to_string());
    writeln!(out, "{} vs {}: {verdict} after {} turns", s.alice, s.bob, s.turns)?;
    Ok(())
}

fn print_trace(out: &mut impl Write, trace: &Trace) -> Result<()> {
    let h = &trace.header;
    writeln!(
        out,
        "a={} b={} rounds={} seed={}  {} vs {}",
        h.a, h.b, h.rounds, h.seed, h.alice_strategy, h.bob_strategy
    )?;
    for r in &trace.records {
        let appends: Vec<String> = r.appends.iter().map(|a| format!("{}:{}", a.label, a.value)).collect();
        writeln!(
            out,
            "{:>5} {:<5} [{}] live A{:?} B{:?} {}",
            r.turn,
            r.side,
            appends.join(" "),
            r.live.alice,
            r.live.bob,
            r.verdict
        )?;
    }
    Ok(())
}

pub fn verify(args: &VerifyArgs, pretty: bool) -> Result<bool> {
    let trace = if args.trace.as_os_str() == "-" {
        Trace::read_jsonl(io::stdin().lock())
    } else {
        let file = File::open(&args.trace).with_context(|| format!("opening {}", args.trace.display()))?;
        Trace::read_jsonl(BufReader::new(file))
    }?;
    let report = verify_trace(&trace)?;
    let mut out = stdout();
    for v in &report.violations {
        if pretty {
            writeln!(out, "{v}")?;
        } else {
            json_line(&mut out, v)?;
        }
    }
    writeln!(
        out,
        "{} violations, {} fairness lapses (alice {}, bob {}), final verdict {}",
        report.violations.len(),
        report.fairness_lapses.len(),
        report.lapses_for(Side::Alice),
        report.lapses_for(Side::Bob),
        report.final_verdict.map_or("none".to_string(), |v| v.to_string()),
    )?;
    out.flush()?;
    Ok(report.is_valid())
}

#[derive(Serialize)]
struct MatchRecord {
    alice: String,
    bob: String,
    seed: u64,
    verdict: Option<Verdict>,
    expected: Option<Verdict>,
    violations: usize,
    fairness_lapses: usize,
    ok: bool,
}

pub fn tournament(args: &TournamentArgs, pretty: bool) -> Result<bool> {
    let machine = args.machine.params()?;
    let (side, name) = match (&args.alice, &args.bob) {
        (Some(a), None) => (Side::Alice, a.clone()),
        (None, Some(b)) => (Side::Bob, b.clone()),
        _ => return Err(usage("give exactly one of --alice and --bob")),
    };
    if args.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    let b = args.b.unwrap_or_else(|| match side {
        Side::Bob => roster::default_b(&name, args.a),
        Side::Alice => roster::default_b("random", args.a),
    });
    let config = GameConfig::new(args.a, b, args.rounds, args.seed)?;
    // Reject an unknown protagonist before fanning out.
    strategy(&name, side, &Setup { a: args.a, seed: args.seed, live: None, machine })?;

    let expected = match (side, roster::canonical(&name).as_str()) {
        (Side::Alice, "inductive") if b < 1 << args.a.min(20) => Some(Verdict::AliceWinWitnessed),
        (Side::Bob, "powerset") => Some(Verdict::BobLeading),
        _ => None,
    };
    let opponent_side = side.opponent();
    let mut jobs: Vec<(&str, u64)> = Vec::new();
    for (opponent, seeded) in roster::suite(opponent_side) {
        if opponent == "blind" && (1u64 << args.a.min(63)) - 1 > program_count(machine.l) {
            continue;
        }
        if seeded {
            jobs.extend((0..args.seeds).map(|i| (opponent, args.seed + i)));
        } else {
            jobs.push((opponent, args.seed));
        }
    }
    jobs.sort();

    let records: Vec<MatchRecord> = jobs
        .par_iter()
        .map(|&(opponent, seed)| -> Result<MatchRecord> {
            let setup = Setup {
                a: args.a,
                seed,
                live: None,
                machine,
            };
            let mut me = strategy(&name, side, &setup)?;
            let mut them = strategy(opponent, opponent_side, &setup)?;
            let config = GameConfig { seed, ..config };
            let trace = match side {
                Side::Alice => run_match(config, me.as_mut(), them.as_mut(), args.rounds)?,
                Side::Bob => run_match(config, them.as_mut(), me.as_mut(), args.rounds)?,
            };
            let report = verify_trace(&trace)?;
            let verdict = trace.final_verdict();
            Ok(MatchRecord {
                ok: report.is_valid() && expected.is_none_or(|e| Some(e) == verdict),
                alice: trace.header.alice_strategy,
                bob: trace.header.bob_strategy,
                seed,
                verdict,
                expected,
                violations: report.violations.len(),
                fairness_lapses: report.fairness_lapses.len(),
            })
        })
        .collect::<Result<_>>()?;

    let mut out = stdout();
    for r in &records {
        if pretty {
            writeln!(
                out,
                "{:<4} seed {:>4}  {:<34} vs {:<34} {:<18} violations {}",
                if r.ok { "ok" } else { "FAIL" },
                r.seed,
                r.alice,
                r.bob,
                r.verdict.map_or("-".into(), |v| v.to_string()),
                r.violations
            )?;
        } else {
            json_line(&mut out, r)?;
        }
    }
    let failures = records.iter().filter(|r| !r.ok).count();
    writeln!(out, "{} matches, {failures} failures", records.len())?;
    out.flush()?;
    Ok(failures == 0)
}

#[derive(Serialize)]
struct ProgramRecord {
    index: usize,
    bits: String,
    program: String,
    total: bool,
    values: Vec<Option<u64>>,
}

fn program_table(max_bits: usize, params: &MachineParams) -> Vec<ProgramRecord> {
    enumerate_programs(max_bits)
        .enumerate()
        .map(|(index, p)| {
            let values: Vec<Option<u64>> = (0..=params.k).map(|x| p.run(x, params.s).value()).collect();
            ProgramRecord {
                index,
                bits: p.bit_string(),
                program: p.to_string(),
                total: values.iter().all(|v| v.is_some()),
                values,
            }
        })
        .collect()
}

pub fn machine_enumerate(args: &EnumerateArgs, pretty: bool) -> Result<bool> {
    let params = args.machine.params()?;
    if args.max_bits > params.l {
        return Err(usage(format!("--max-bits {} exceeds --L {}", args.max_bits, params.l)));
    }
    let mut out = stdout();
    for r in program_table(args.max_bits, &params) {
        if pretty {
            let values: Vec<String> = r
                .values
                .iter()
                .map(|v| v.map_or("-".into(), |v| v.to_string()))
                .collect();
            writeln!(
                out,
                "{:>5}  {:<12} {:<24} {:<5} {}",
                r.index,
                r.bits,
                r.program,
                if r.total { "total" } else { "" },
                values.join(" ")
            )?;
        } else {
            json_line(&mut out, &r)?;
        }
    }
    out.flush()?;
    Ok(true)
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum DominateRecord<'r> {
    Advice {
        count: &'r exceed_core::CountAdvice,
        count_bits: u32,
        bitvector: &'r exceed_core::BitvectorAdvice,
        bitvector_bits: u64,
    },
    Value {
        k: u64,
        weak: u64,
        strong: u64,
        programs: Vec<u64>,
    },
    Program {
        index: usize,
        program: &'r str,
        values: Vec<u64>,
        weak: ExceedanceReport,
        strong: ExceedanceReport,
    },
}

pub fn dominate(args: &DominateArgs, pretty: bool) -> Result<bool> {
    let params = args.machine.params()?;
    if args.n > params.l {
        return Err(usage(format!("--n {} exceeds --L {}", args.n, params.l)));
    }
    let count = advice_count(args.n, &params)?;
    let bits = advice_bitvector(args.n, &params)?;
    let total: Vec<ProgramRecord> = program_table(args.n, &params)
        .into_iter()
        .filter(|r| r.total)
        .collect();
    let values = |r: &ProgramRecord| -> Vec<u64> { r.values.iter().map(|v| v.expect("total")).collect() };

    let ks: Vec<u64> = (0..=params.k).collect();
    let weak: Vec<u64> = ks
        .par_iter()
        .map(|&k| weak_dominator_eval(&count, k, &params))
        .collect::<Result<_, _>>()?;
    let strong: Vec<u64> = ks
        .iter()
        .map(|&k| strong_dominator_eval(&bits, k, &params))
        .collect::<Result<_, _>>()?;

    let mut records = vec![DominateRecord::Advice {
        count: &count,
        count_bits: count.bit_size(),
        bitvector: &bits,
        bitvector_bits: bits.bit_size(),
    }];
    for &k in &ks {
        records.push(DominateRecord::Value {
            k,
            weak: weak[k as usize],
            strong: strong[k as usize],
            programs: total.iter().map(|r| values(r)[k as usize]).collect(),
        });
    }
    let mut ok = true;
    for r in &total {
        let v = values(r);
        let w = exceedance_of_tables(&weak, &v);
        let s = exceedance_of_tables(&strong, &v);
        ok &= s.everywhere && w.weakly_from.is_some();
        records.push(DominateRecord::Program {
            index: r.index,
            program: &r.program,
            values: v,
            weak: w,
            strong: s,
        });
    }

    let mut out = stdout();
    if pretty {
        writeln!(out, "{:>3} {:>8} {:>8}", "k", "weak", "strong")?;
        for &k in &ks {
            writeln!(out, "{k:>3} {:>8} {:>8}", weak[k as usize], strong[k as usize])?;
        }
        writeln!(out, "{} budgeted-total programs of at most {} bits", total.len(), args.n)?;
        for rec in &records {
            if let DominateRecord::Program { index, program, weak, .. } = rec {
                if weak.weakly_from != Some(0) {
                    writeln!(
                        out,
                        "  #{index} {program}: weak dominator exceeds it from k={}",
                        weak.weakly_from.map_or("never".into(), |k| k.to_string())
                    )?;
                }
            }
        }
    } else {
        for rec in &records {
            json_line(&mut out, rec)?;
        }
    }
    writeln!(
        out,
        "count advice: {} bits, bitvector advice: {} bits",
        count.bit_size(),
        bits.bit_size()
    )?;
    out.flush()?;
    Ok(ok)
}

pub fn blind_bob(args: &BlindBobArgs, pretty: bool) -> Result<bool> {
    let params = args.machine.params()?;
    if args.rounds == 0 {
        return Err(usage("--rounds must be at least 1"));
    }
    let (report, trace) = run_demo(args.n, args.rounds, params)?;
    if let Some(path) = &args.trace {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        trace.write_jsonl(&mut w)?;
        w.flush()?;
    }
    let mut out = stdout();
    if pretty {
        writeln!(
            out,
            "n={} a={} b={} rounds={}  verdict {}",
            report.n, report.a, report.b, report.rounds, report.verdict
        )?;
        let cut = &report.length_cut;
        writeln!(
            out,
            "Bob runs the first {} programs (up to {} bits; {} programs have at most {} bits)",
            cut.programs_used, cut.max_bit_length, cut.programs_within_cut, cut.max_bit_length
        )?;
        writeln!(out, "{:>5}  {:<16} {:<6} {:<5} witness", "label", "program", "total", "live")?;
        for bob in &report.bob {
            let witness = bob.witness.as_ref().map_or("-".to_string(), |w| {
                format!(
                    "Alice#{} index {}: {} >= {}",
                    w.alice_label, w.index, w.alice_value, w.bob_value
                )
            });
            writeln!(
                out,
                "{:>5}  {:<16} {:<6} {:<5} {witness}",
                bob.label, bob.program, bob.total, bob.live
            )?;
        }
        for alice in &report.alice {
            writeln!(
                out,
                "Alice#{}: {} index bits `{}` + shared context ({})",
                alice.label, alice.index_bits, alice.index_code, alice.context
            )?;
        }
    } else {
        out.write_all(report.to_jsonl().as_bytes())?;
    }
    out.flush()?;
    if !report.is_success() {
        eprintln!("demo inconclusive: unwitnessed Bob labels {:?}", report.unwitnessed);
    }
    Ok(report.is_success())
}
