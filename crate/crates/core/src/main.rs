use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pasg::domain::DomainKind;
use pasg::harness::{
    default_configs, load_model, model_files, model_name, run_check, run_suite, write_csv,
    CheckConfig, RunStatus, SolverKind,
};
use pasg::pasg::WaitlistPolicy;
use pasg::solver::Heuristic;

#[derive(Parser)]
#[command(name = "pasg", version, about = "Maximal reachability for symbolic MDPs by lazy abstraction")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one model and print a JSON statistics record.
    Check {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "lazy-bvi",
              value_parser = ["oracle", "bvi", "brtdp", "lazy-bvi", "lazy-brtdp"])]
        solver: String,
        #[command(flatten)]
        opts: Opts,
        /// Write the record here instead of stdout.
        #[arg(long)]
        stats_out: Option<PathBuf>,
    },
    /// Run both domains with both lazy solvers on every .gmc file in a
    /// directory and print a CSV table.
    Suite {
        dir: PathBuf,
        #[command(flatten)]
        opts: Opts,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Opts {
    #[arg(long, default_value = "expl", value_parser = ["expl", "pred"])]
    domain: String,
    #[arg(long, default_value = "random", value_parser = ["random", "diff-based"])]
    heuristic: String,
    /// Absolute bound on the width of the result interval.
    #[arg(long, default_value_t = 1e-6)]
    threshold: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "lifo", value_parser = ["lifo", "fifo"])]
    waitlist: String,
    /// Graph node budget (concrete state budget for explicit solvers).
    #[arg(long, default_value_t = 5_000_000)]
    max_nodes: usize,
    #[arg(long, default_value_t = 1_000_000)]
    max_traces: u64,
    /// SMT-LIB solver command for the predicate domain, e.g. "z3 -in".
    #[arg(long)]
    smt_cmd: Option<String>,
}

impl Opts {
    fn config(&self, solver: SolverKind) -> CheckConfig {
        CheckConfig {
            solver,
            domain: self.domain.parse::<DomainKind>().expect("validated by clap"),
            heuristic: self.heuristic.parse::<Heuristic>().expect("validated by clap"),
            threshold: self.threshold,
            seed: self.seed,
            waitlist: self.waitlist.parse::<WaitlistPolicy>().expect("validated by clap"),
            max_nodes: self.max_nodes,
            max_traces: self.max_traces,
            smt_cmd: self.smt_cmd.clone(),
            ..Default::default()
        }
    }
}

fn output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Cmd::Check {
            model,
            solver,
            opts,
            stats_out,
        } => {
            if !(opts.threshold > 0.0) {
                eprintln!("error: --threshold must be positive");
                return ExitCode::from(1);
            }
            let config = opts.config(solver.parse().expect("validated by clap"));
            let record = load_model(&model)
                .and_then(|(m, q)| run_check(&model_name(&model), &m, &q, &config));
            let record = match record {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code() as u8);
                }
            };
            eprintln!("{}", record.summary());
            let json = serde_json::to_string_pretty(&record).expect("record serialises");
            if let Err(e) = output(&stats_out).and_then(|mut w| writeln!(w, "{json}")) {
                eprintln!("error: cannot write statistics: {e}");
                return ExitCode::from(1);
            }
            match record.status {
                RunStatus::Ok => ExitCode::SUCCESS,
                RunStatus::BudgetExceeded => ExitCode::from(2),
            }
        }
        Cmd::Suite { dir, opts, out } => {
            let files = match model_files(&dir) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let rows = run_suite(&files, &default_configs(), &opts.config(SolverKind::LazyBvi));
            for r in &rows {
                eprintln!("{:<28} {:<16} {}", r.model, r.config, r.status);
            }
            let written = output(&out).map_err(csv::Error::from).and_then(|w| write_csv(&rows, w));
            if let Err(e) = written {
                eprintln!("error: cannot write CSV: {e}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
    }
}
