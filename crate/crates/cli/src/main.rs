use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use distnet::experiment::{self, ConvergenceSpec, ExperimentSpec, RunOptions, Status, VerifyOptions};
use distnet::trainer::Preset;

#[global_allocator]
static ALLOC: mimalloc::MiMalloc = mimalloc::MiMalloc;

#[derive(Parser)]
#[command(name = "distnet", version, about = "Train and compare networks on functions of probability distributions")]
struct Cli {
    /// Scale preset applied before the spec file's own settings.
    #[arg(long, global = true)]
    preset: Option<Preset>,
    /// Master seed; replaces every seed in the spec.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: the spec's `out`, else `results`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every scheme of one or more spec files and write CSV, model and manifest files.
    Run {
        #[arg(required = true)]
        specs: Vec<PathBuf>,
    },
    /// Run the invariant suite and print a pass/fail table.
    Verify {
        /// Smaller sample counts.
        #[arg(long)]
        quick: bool,
        /// Corrupt analytic gradients so the gradient check must fail.
        #[arg(long, hide = true)]
        corrupt_gradient: bool,
    },
    /// W1 error of quantile reconstructions as K grows.
    ConvergenceStudy { spec: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        preset: cli.preset,
        seed: cli.seed,
        out: cli.out,
    };
    match cli.command {
        Command::Run { specs } => run(&specs, &opts),
        Command::Verify { quick, corrupt_gradient } => {
            let outcomes = experiment::verify(&VerifyOptions {
                quick,
                corrupt_gradient,
                seed: opts.seed.unwrap_or(0),
            });
            print!("{}", experiment::format_table(&outcomes));
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed == 0 {
                println!("all {} checks passed", outcomes.len());
                ExitCode::SUCCESS
            } else {
                println!("{failed} of {} checks failed", outcomes.len());
                ExitCode::FAILURE
            }
        }
        Command::ConvergenceStudy { spec } => {
            let result = ConvergenceSpec::load(&spec).and_then(|s| experiment::run_convergence(&s, &opts));
            match result {
                Ok((rows, path)) => {
                    for r in &rows {
                        println!("K={:<5} max W1 {:.6}  mean W1 {:.6}  W2 bound {:.6}", r.k, r.max_w1, r.mean_w1, r.w2_bound);
                    }
                    println!("wrote {}", path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}

fn run(paths: &[PathBuf], opts: &RunOptions) -> ExitCode {
    let specs: Result<Vec<ExperimentSpec>, _> = paths.iter().map(|p| ExperimentSpec::load(p)).collect();
    let specs = match specs {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match experiment::run_batch(&specs, opts, &mut |line| println!("{line}")) {
        Ok(reports) => {
            let mut diverged = false;
            for r in &reports {
                println!("wrote {}", r.manifest.display());
                if let Some(svg) = &r.svg {
                    println!("wrote {}", svg.display());
                }
                diverged |= r.outcomes.iter().any(|o| o.status != Status::Completed);
            }
            if diverged {
                eprintln!("error: at least one scheme diverged; see the manifest");
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
