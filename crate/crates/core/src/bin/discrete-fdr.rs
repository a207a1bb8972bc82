use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use discrete_fdr::cli::{self, AnalyzeConfig, Command, CountInput, SimulateConfig, TuneConfig};
use discrete_fdr::{TestKind, TwoSided};

/// Multiple testing with discrete p-values.
#[derive(Parser)]
#[command(name = "discrete-fdr", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Test every feature of a count table, estimate pi0 and threshold.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        /// Target FDR level; repeat for several.
        #[arg(long = "alpha", default_values_t = [0.05])]
        alphas: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a simulation scenario from a TOML file.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Choose (lambda, epsilon) by bootstrap.
    Tune {
        #[command(flatten)]
        input: InputArgs,
        /// Lambda grid: numbers and start:stop:step ranges, comma separated.
        #[arg(long, default_value = "0:0.95:0.05")]
        lambda: String,
        #[arg(long, default_value = "0:1:0.25")]
        epsilon: String,
        #[arg(long, default_value_t = 100)]
        bootstrap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rerun the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Count table (csv or tsv) with a header row.
    input: PathBuf,
    #[arg(long, value_parser = ["bin", "fet", "ent"])]
    test: String,
    /// Negative binomial size per sample (ent).
    #[arg(long)]
    size: Option<f64>,
    /// min-likelihood or doubling.
    #[arg(long, default_value = "min-likelihood")]
    convention: String,
    #[arg(long)]
    min_total: Option<u64>,
    #[arg(long)]
    max_total: Option<u64>,
}

impl InputArgs {
    fn into_input(self) -> discrete_fdr::Result<CountInput> {
        Ok(CountInput {
            path: self.input,
            test: self.test.parse::<TestKind>()?,
            size: self.size,
            convention: self.convention.parse::<TwoSided>()?,
            min_total: self.min_total,
            max_total: self.max_total,
        })
    }
}

fn dispatch(cmd: Cmd) -> discrete_fdr::Result<String> {
    match cmd {
        Cmd::Analyze { input, lambda, epsilon, alphas, out } => {
            let cfg = AnalyzeConfig { input: input.into_input()?, lambda, epsilon, alphas };
            cli::run(&Command::Analyze(cfg), out.as_deref())
        }
        Cmd::Simulate { scenario, out, seed, reps } => {
            let cfg = SimulateConfig { seed, reps, ..SimulateConfig::new(scenario) };
            cli::run(&Command::Simulate(cfg), Some(&out))
        }
        Cmd::Tune { input, lambda, epsilon, bootstrap, seed, out } => {
            let cfg = TuneConfig { input: input.into_input()?, lambdas: lambda, epsilons: epsilon, bootstrap, seed };
            cli::run(&Command::Tune(cfg), out.as_deref())
        }
        Cmd::Replay { manifest, out } => cli::replay(&manifest, &out),
    }
}

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(args) => args,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            return ExitCode::from(2);
        }
    };
    match dispatch(args.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {}", e.category(), e.to_string().replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
