use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use exceed_core::MachineParams;

mod commands;
mod roster;

#[derive(Parser, Debug)]
#[command(name = "exceed", version, about = "Sequence-exceedance games, dominators and the blind-Bob reduction")]
struct Cli {
    /// Render human-readable output instead of JSON lines.
    #[arg(long, global = true)]
    pretty: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Play one match and write its trace.
    Play(PlayArgs),
    /// Replay a trace and report rule violations.
    Verify(VerifyArgs),
    /// Play one strategy against the adversary suite over several seeds.
    Tournament(TournamentArgs),
    /// List programs with their totality flags and values.
    MachineEnumerate(EnumerateArgs),
    /// Print weak and strong dominator tables and advice sizes.
    Dominate(DominateArgs),
    /// Run the lower-bound demonstration against blind Bob.
    BlindBob(BlindBobArgs),
}

/// Toy machine parameters.
#[derive(Args, Debug, Clone, Copy)]
pub struct MachineArgs {
    /// Totality is probed on inputs 0..=K.
    #[arg(long = "K", default_value_t = 8)]
    pub k: u64,
    /// Step budget per run.
    #[arg(long = "S", default_value_t = 256)]
    pub s: u64,
    /// Longest program enumerated, in bits.
    #[arg(long = "L", default_value_t = 12)]
    pub l: usize,
}

impl MachineArgs {
    pub fn params(&self) -> Result<MachineParams, commands::UsageError> {
        MachineParams::new(self.k, self.s, self.l)
            .map_err(|e| commands::UsageError(format!("--K/--S/--L: {e}")))
    }
}

#[derive(Args, Debug)]
pub struct PlayArgs {
    /// Number of Alice sequences.
    #[arg(long)]
    pub a: usize,
    /// Number of Bob sequences [default: 2^a for powerset, else 2^a - 1].
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long, default_value = "inductive", help = format!("Alice strategy: {}", roster::ALICE_NAMES))]
    pub alice: String,
    #[arg(long, default_value = "random", help = format!("Bob strategy: {}", roster::BOB_NAMES))]
    pub bob: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub rounds: usize,
    /// Write the trace here instead of standard output.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Labels a random strategy declares live (comma separated) [default: all].
    #[arg(long, value_delimiter = ',')]
    pub live: Option<Vec<usize>>,
    #[command(flatten)]
    pub machine: MachineArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Trace file, or `-` for standard input.
    #[arg(long)]
    pub trace: PathBuf,
}

#[derive(Args, Debug)]
pub struct TournamentArgs {
    #[arg(long)]
    pub a: usize,
    #[arg(long)]
    pub b: Option<usize>,
    /// Alice protagonist (give exactly one of --alice and --bob).
    #[arg(long)]
    pub alice: Option<String>,
    /// Bob protagonist.
    #[arg(long)]
    pub bob: Option<String>,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of seeds for seeded opponents.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    #[arg(long, default_value_t = 1000)]
    pub rounds: usize,
    #[command(flatten)]
    pub machine: MachineArgs,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[arg(long = "max-bits", default_value_t = 6)]
    pub max_bits: usize,
    #[command(flatten)]
    pub machine: MachineArgs,
}

#[derive(Args, Debug)]
pub struct DominateArgs {
    /// Program length bound in bits.
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub machine: MachineArgs,
}

#[derive(Args, Debug)]
pub struct BlindBobArgs {
    /// Alice gets a = 2^n sequences.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2000)]
    pub rounds: usize,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub machine: MachineArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Play(args) => commands::play(args, cli.pretty),
        Command::Verify(args) => commands::verify(args, cli.pretty),
        Command::Tournament(args) => commands::tournament(args, cli.pretty),
        Command::MachineEnumerate(args) => commands::machine_enumerate(args, cli.pretty),
        Command::Dominate(args) => commands::dominate(args, cli.pretty),
        Command::BlindBob(args) => commands::blind_bob(args, cli.pretty),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            if let Some(usage) = err.downcast_ref::<commands::UsageError>() {
                eprintln!("error: {usage}");
                ExitCode::from(2)
            } else {
                eprintln!("error: {err:#}");
                ExitCode::from(1)
            }
        }
    }
}
