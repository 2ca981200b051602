use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use consensus_cli::{CommonArgs, CorrelateInputs};

#[derive(Parser)]
#[command(
    name = "consensus",
    version,
    about = "Consensus games on multiplex social networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (a directory for gen-net).
    #[arg(long)]
    out: PathBuf,
    /// Master seed; overrides the configuration file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long)]
    workers: Option<usize>,
    /// Use 3000 runs per cell.
    #[arg(long)]
    full_scale: bool,
    /// Record per-cycle time series (run subcommand).
    #[arg(long)]
    series: bool,
}

impl From<Common> for CommonArgs {
    fn from(c: Common) -> Self {
        CommonArgs {
            config: c.config,
            out: c.out,
            seed: c.seed,
            workers: c.workers,
            full_scale: c.full_scale,
            series: c.series,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate network instances as edge lists.
    GenNet(Common),
    /// Measure clustering and path length of network ensembles or files.
    NetProps {
        #[command(flatten)]
        common: Common,
        /// Edge-list files to measure instead of generating ensembles.
        #[arg(long = "graph")]
        graphs: Vec<PathBuf>,
    },
    /// Run simulations and write one record per run.
    Run(Common),
    /// Run a sweep and write per-cell statistics.
    Sweep(Common),
    /// Correlate convergence ratio with network structure.
    Correlate {
        #[command(flatten)]
        common: Common,
        /// Existing sweep CSV (requires --props).
        #[arg(long)]
        sweep: Option<PathBuf>,
        /// Existing property CSV (requires --sweep).
        #[arg(long)]
        props: Option<PathBuf>,
        /// Family label for the output rows.
        #[arg(long)]
        family: Option<String>,
    },
    /// Re-execute a recorded run and write its time series.
    Replay {
        #[command(flatten)]
        common: Common,
        /// Run-record CSV written by `run`.
        #[arg(long)]
        record: PathBuf,
        /// Row to replay, counting from 1.
        #[arg(long, default_value_t = 1)]
        row: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::GenNet(c) => consensus_cli::gen_net(&c.into()),
        Command::NetProps { common, graphs } => consensus_cli::net_props(&common.into(), &graphs),
        Command::Run(c) => consensus_cli::run(&c.into()),
        Command::Sweep(c) => consensus_cli::sweep(&c.into()),
        Command::Correlate {
            common,
            sweep,
            props,
            family,
        } => consensus_cli::correlate(
            &common.into(),
            &CorrelateInputs {
                sweep,
                props,
                family,
            },
        ),
        Command::Replay {
            common,
            record,
            row,
        } => consensus_cli::replay_command(&common.into(), &record, row),
    };
    match outcome {
        Ok(done) => ExitCode::from(done.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
