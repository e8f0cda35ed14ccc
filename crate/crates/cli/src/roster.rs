//! Strategy lookup by command-line name.

use exceed_core::{
    blind_bob_strategy, make_adversary, AdversaryKind, AdversaryParams, AliceInductive,
    BobPowerset, MachineParams, Side, Strategy, StrategyError,
};

/// Everything a strategy constructor may need.
#[derive(Debug, Clone)]
pub struct Setup {
    pub a: usize,
    pub seed: u64,
    pub live: Option<Vec<usize>>,
    pub machine: MachineParams,
}

pub const ALICE_NAMES: &str = "inductive, inductive_overload, random, burst, copycat, skipper";
pub const BOB_NAMES: &str = "powerset, blind, random, burst, trigger_baiter, skipper";

/// Normalized name, e.g. `alice_inductive` → `inductive`.
pub fn canonical(name: &str) -> String {
    let name = name.trim().to_ascii_lowercase().replace('-', "_");
    match name.as_str() {
        "alice_inductive" => "inductive".into(),
        "alice_inductive_overload" => "inductive_overload".into(),
        "bob_powerset" => "powerset".into(),
        "blind_bob" => "blind".into(),
        _ => name,
    }
}

/// Builds the strategy called `name` for `side`, or `None` if the name is
/// unknown for that side.
pub fn build(name: &str, side: Side, setup: &Setup) -> Option<Result<Box<dyn Strategy>, StrategyError>> {
    let name = canonical(name);
    let made: Result<Box<dyn Strategy>, StrategyError> = match (side, name.as_str()) {
        (Side::Alice, "inductive") => AliceInductive::new(setup.a).map(|s| Box::new(s) as _),
        (Side::Alice, "inductive_overload") => {
            AliceInductive::new(setup.a).map(|s| Box::new(s.allow_overload()) as _)
        }
        (Side::Bob, "powerset") => BobPowerset::new(setup.a).map(|s| Box::new(s) as _),
        (Side::Bob, "blind") => blind_bob_strategy(setup.a, setup.machine)
            .map(|s| Box::new(s) as _)
            .map_err(StrategyError::from),
        (_, other) => {
            let kind: AdversaryKind = other.parse().ok()?;
            if matches!(
                (side, kind),
                (Side::Alice, AdversaryKind::TriggerBaiter) | (Side::Bob, AdversaryKind::Copycat)
            ) {
                return None;
            }
            make_adversary(
                kind,
                side,
                AdversaryParams {
                    seed: setup.seed,
                    live: setup.live.clone(),
                    ..Default::default()
                },
            )
        }
    };
    Some(made)
}

/// Bob count used when `--b` is not given: `2^a` for the powerset Bob,
/// which needs it, and `2^a − 1` otherwise, the most Alice can handle.
pub fn default_b(bob: &str, a: usize) -> usize {
    let full = 1usize << a.min(20);
    if canonical(bob) == "powerset" {
        full
    } else {
        full - 1
    }
}

/// Opponents on `side` that a protagonist faces in a tournament. Seeded
/// opponents are played once per seed; the others once.
pub fn suite(side: Side) -> Vec<(&'static str, bool)> {
    match side {
        Side::Alice => vec![
            ("random", true),
            ("burst", false),
            ("copycat", false),
            ("skipper", false),
            ("inductive_overload", false),
        ],
        Side::Bob => vec![
            ("random", true),
            ("burst", false),
            ("trigger_baiter", false),
            ("skipper", false),
            ("blind", false),
        ],
    }
}
