use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cubicate::Rational;
use cubicate_cli::{parse_rational, run, Command, Format, RunConfig};

/// Small cancellation, wallspace and Rips-construction checks.
#[derive(Parser, Debug)]
#[command(name = "cubicate", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Input file.
    input: PathBuf,
    #[arg(long, default_value = "16", value_parser = parse_rational)]
    alpha: Rational,
    /// Longest β word in the malnormal pair search.
    #[arg(long, default_value_t = 12)]
    budget_beta: usize,
    /// Word length for isolation and conjugator searches.
    #[arg(long, default_value_t = 8)]
    budget_words: usize,
    /// Vertex cap for dual complexes.
    #[arg(long, default_value_t = 1 << 16)]
    max_vertices: usize,
    /// Threshold for the C(p) check.
    #[arg(long, default_value_t = 6)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("CUBICATE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    let config = RunConfig {
        command: cli.command,
        input: cli.input,
        alpha: cli.alpha,
        budget_beta: cli.budget_beta,
        budget_words: cli.budget_words,
        max_vertices: cli.max_vertices,
        p: cli.p,
        seed: cli.seed,
        format: cli.format,
        out: cli.out.clone(),
    };
    let outcome = run(&config);
    let written = match (&cli.out, outcome.code) {
        (Some(path), 0 | 1) => std::fs::write(path, &outcome.output)
            .map_err(|e| eprintln!("error: cannot write {}: {e}", path.display())),
        (_, 2) => {
            eprint!("{}", outcome.output);
            Ok(())
        }
        _ => {
            print!("{}", outcome.output);
            Ok(())
        }
    };
    match written {
        Ok(()) => ExitCode::from(outcome.code as u8),
        Err(()) => ExitCode::from(2),
    }
}
