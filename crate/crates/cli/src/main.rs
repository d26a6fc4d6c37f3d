use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use streamnet::confirm::{pr_drop, ConfirmationParams};
use streamnet::experiment::{run_experiment, verify_suite, ExperimentConfig, Outcome, VerifyOptions};
use streamnet::sim::Topology;
use streamnet::TieBreak;

const EXIT_ASSERTION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "streamnet", version, about = "DAG ledger simulator and verification harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment and print its report.
    Run {
        config: PathBuf,
        /// Write the order, UTXO snapshot and trace here, named by config hash.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle-equivalence and invariant suites.
    Verify {
        #[arg(long, value_enum, default_value_t = Tie::Smaller)]
        tie_break: Tie,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 60)]
        dags: usize,
    },
    /// Probability bound that a pivot block is overtaken by its sibling.
    Prdrop {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        lambda_h: f64,
        #[arg(long)]
        t: f64,
    },
    /// Built-in topologies.
    Topo {
        #[command(subcommand)]
        cmd: TopoCmd,
    },
    /// Run an experiment and print node 0's total order.
    DumpOrder { config: PathBuf },
    /// Run an experiment and print node 0's final UTXO set.
    DumpUtxo { config: PathBuf },
}

#[derive(Subcommand)]
enum TopoCmd {
    List,
    /// Print a built-in topology in file format.
    Show { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Tie {
    Smaller,
    Larger,
}

enum Failure {
    Assertion(String),
    Config(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(e)
    }
}

fn load_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = ExperimentConfig::parse(&text).with_context(|| path.display().to_string())?;
    // Topology files are resolved relative to the config file.
    if let (Some(file), Some(dir)) = (&cfg.topology_file, path.parent()) {
        if file.is_relative() {
            cfg.topology_file = Some(dir.join(file));
        }
    }
    Ok(cfg)
}

fn execute(path: &Path) -> Result<Outcome, Failure> {
    let cfg = load_config(path)?;
    Ok(run_experiment(&cfg).with_context(|| path.display().to_string())?)
}

fn write_artifacts(dir: &Path, out: &Outcome) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let hash = &out.report.config_hash;
    let mut files = vec![("order", out.order_export.clone()), ("utxo", out.utxo_export.clone())];
    if !out.trace.is_empty() {
        files.push(("trace", out.trace.join("\n") + "\n"));
    }
    for (ext, body) in files {
        let p = dir.join(format!("{hash}.{ext}"));
        std::fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Run { config, out } => {
            let outcome = execute(&config)?;
            print!("{}", outcome.report.render());
            if let Some(dir) = out {
                write_artifacts(&dir, &outcome)?;
            }
            let failed = outcome.report.failures();
            if !failed.is_empty() {
                return Err(Failure::Assertion(format!("run assertions failed: {}", failed.join(", "))));
            }
        }
        Cmd::Verify { tie_break, seeds, dags } => {
            let opts = VerifyOptions {
                tie_break: match tie_break {
                    Tie::Smaller => TieBreak::SmallerId,
                    Tie::Larger => TieBreak::LargerId,
                },
                seeds,
                dags,
            };
            let summary = verify_suite(&opts);
            print!("{}", summary.render());
            if !summary.passed() {
                return Err(Failure::Assertion(format!("failed suites: {}", summary.failed().join(", "))));
            }
        }
        Cmd::Prdrop { n, m, q, lambda_h, t } => {
            let p = ConfirmationParams { n, m, q, lambda_h, t };
            let v = pr_drop(&p).map_err(|e| Failure::Config(e.into()))?;
            println!("{v:.12e}");
        }
        Cmd::Topo { cmd: TopoCmd::List } => {
            println!("name\tnodes\tlinks\tdiameter\tcycle");
            for t in Topology::builtins() {
                println!("{}\t{}\t{}\t{}\t{}", t.name, t.n, t.link_count(), t.diameter(), t.has_cycle());
            }
        }
        Cmd::Topo { cmd: TopoCmd::Show { name } } => {
            let t = Topology::builtin(&name).map_err(|e| Failure::Config(e.into()))?;
            print!("{}", t.to_text());
        }
        Cmd::DumpOrder { config } => print!("{}", execute(&config)?.order_export),
        Cmd::DumpUtxo { config } => print!("{}", execute(&config)?.utxo_export),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ASSERTION)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
