use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use multiaccess::harness::{bench_trg, compute_stats, read_trace, report_breakdown, run_scenario, RunError};
use multiaccess::simenv::load_scenario;

#[derive(Parser)]
#[command(name = "multiaccess", version, about = "Multi-radio access selection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trace.txt, stats.json and breakdown.json.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Per-handover latency breakdown of a trace.
    Report { trace: PathBuf },
    /// Aggregate statistics of a trace.
    Stats { trace: PathBuf },
    /// Measure trigger bus dispatch cost.
    BenchTrg {
        #[arg(long, default_value_t = 100)]
        subscribers: usize,
        #[arg(long, default_value_t = 10000)]
        events: usize,
    },
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn run(scenario: PathBuf, seed: Option<u64>, out: PathBuf) -> ExitCode {
    let mut sc = match load_scenario(&scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = seed {
        sc.seed = seed;
    }
    let output = match run_scenario(sc) {
        Ok(o) => o,
        Err(RunError::Setup(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(RunError::Invariant(e)) => {
            eprintln!("invariant violated: {e}");
            return ExitCode::from(3);
        }
    };
    let written = std::fs::create_dir_all(&out)
        .and_then(|_| std::fs::write(out.join("trace.txt"), output.trace.render()))
        .and_then(|_| std::fs::write(out.join("stats.json"), json(&output.stats)))
        .and_then(|_| std::fs::write(out.join("breakdown.json"), json(&output.breakdown)));
    if let Err(e) = written {
        eprintln!("error: cannot write to {}: {e}", out.display());
        return ExitCode::from(1);
    }
    print!("{}", json(&output.stats));
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { scenario, seed, out } => run(scenario, seed, out),
        Command::Report { trace } => match read_trace(&trace) {
            Ok(records) => {
                print!("{}", json(&report_breakdown(&records)));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Stats { trace } => match read_trace(&trace) {
            Ok(records) => {
                print!("{}", json(&compute_stats(&records)));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::BenchTrg { subscribers, events } => {
            print!("{}", json(&bench_trg(subscribers, events)));
            ExitCode::SUCCESS
        }
    }
}
