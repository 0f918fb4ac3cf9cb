use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use synthcs::ensembles::{sample_matrix, EnsembleSpec, EntryLaw};
use synthcs::harness::{
    report, run_experiment, with_threads, ExperimentConfig, ExperimentKind, HarnessError,
};
use synthcs::matcore::Mat;
use synthcs::nsp::{certify_nsp, DEFAULT_NSP_TOL};
use synthcs::solver::{solve_qcbp, SolverConfig};

#[derive(Parser)]
#[command(name = "synthcs", version, about = "Sparse recovery experiments under heavy-tailed measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Results root; files go to `<out>/<name>/`.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Lemma51,
    Khintchine,
    Width,
    Lowerbound,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random matrix and write it as text.
    GenMatrix {
        /// gaussian, rademacher, laplace, student_t or cauchy.
        #[arg(long)]
        law: String,
        /// Degrees of freedom for student_t.
        #[arg(long)]
        dof: Option<u32>,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        /// Entry scale; defaults to 1/sqrt(rows).
        #[arg(long)]
        normalization: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve min ||x||_1 subject to ||Ax - y||_2 <= eps.
    Solve {
        #[arg(long)]
        matrix: PathBuf,
        /// Whitespace-separated measurement vector.
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Solver config (JSON).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phase-transition grid.
    Phase(RunArgs),
    /// Noise and tail sweep.
    Noise(RunArgs),
    /// Certify the null space property of one matrix, or run a corpus config.
    NspCert {
        #[arg(long, conflicts_with = "matrix")]
        config: Option<PathBuf>,
        #[arg(long, requires = "order")]
        matrix: Option<PathBuf>,
        #[arg(long = "s")]
        order: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_NSP_TOL)]
        tol: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Monte Carlo verification suites.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Summarize every result directory under a root.
    Report {
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

fn config_error(msg: String) -> HarnessError {
    HarnessError::Config(msg)
}

fn read_vector(path: &Path) -> Result<Vec<f64>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    text.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| config_error(format!("{}: bad number {t:?}: {e}", path.display()))))
        .collect()
}

fn run_config(args: &RunArgs, expected: &[ExperimentKind]) -> Result<(), HarnessError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if !expected.contains(&cfg.kind) {
        return Err(config_error(format!("config kind {:?} does not match the subcommand", cfg.kind)));
    }
    let out = with_threads(args.threads, || run_experiment(&cfg))??;
    let dir = out.write(&args.out)?;
    println!("{}", dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::GenMatrix { law, dof, rows, cols, normalization, seed, out } => {
            let law: EntryLaw = serde_json::from_value(serde_json::json!({ "kind": law, "dof": dof }))
                .map_err(|e| config_error(e.to_string()))?;
            let c = normalization.unwrap_or(1.0 / (rows.max(1) as f64).sqrt());
            let m = sample_matrix(&EnsembleSpec::new(law, rows, cols, c), seed)?;
            m.save(&out).map_err(|e| config_error(e.to_string()))?;
        }
        Command::Solve { matrix, y, eps, config, out } => {
            let a = Mat::load(&matrix).map_err(|e| config_error(e.to_string()))?;
            let y = read_vector(&y)?;
            let cfg: SolverConfig = match config {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| config_error(e.to_string()))?;
                    serde_json::from_str(&text).map_err(|e| config_error(e.to_string()))?
                }
                None => SolverConfig::default(),
            };
            let rep = solve_qcbp(&a, &y, eps, &cfg)?;
            let text = serde_json::to_string_pretty(&rep)?;
            match out {
                Some(p) => std::fs::write(p, text + "\n")?,
                None => println!("{text}"),
            }
        }
        Command::Phase(args) => run_config(&args, &[ExperimentKind::Phase])?,
        Command::Noise(args) => run_config(&args, &[ExperimentKind::Noise])?,
        Command::NspCert { config, matrix, order, tol, seed, out, threads } => match (config, matrix) {
            (Some(config), None) => {
                run_config(&RunArgs { config, seed, out, threads }, &[ExperimentKind::NspCorpus])?
            }
            (None, Some(matrix)) => {
                let a = Mat::load(&matrix).map_err(|e| config_error(e.to_string()))?;
                let s = order.expect("clap enforces --s");
                let rep = certify_nsp(&a, s, tol)?;
                println!("{}", rep.to_json());
            }
            _ => return Err(config_error("nsp-cert needs --config or --matrix".into())),
        },
        Command::Verify { suite, run } => {
            let kind = match suite {
                Suite::Lemma51 => ExperimentKind::Lemma51,
                Suite::Khintchine => ExperimentKind::Khintchine,
                Suite::Width => ExperimentKind::Width,
                Suite::Lowerbound => ExperimentKind::Lowerbound,
            };
            run_config(&run, &[kind])?
        }
        Command::Report { out } => print!("{}", report(&out)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
