use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thermoscan::{commands, service, CliError, Store};
use thermoscan_core::analysis::AnalysisConfig;
use tracing_subscriber::EnvFilter;

/// Segment PV modules in thermograms and flag hot spots.
#[derive(Debug, Parser)]
#[command(name = "thermoscan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a synthetic thermogram and its ground truth from a JSON spec.
    Synth {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Segment modules; writes labels.png, boundaries.png and regions.json.
    Segment {
        input: PathBuf,
        /// Pipeline config JSON; omitted keys take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Segment and analyze; adds report.json, overlay.png and histograms.json.
    Analyze {
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = thermoscan_core::analysis::DEFAULT_BINS)]
        bins: usize,
        /// Smallest blob (pixels) that makes a module suspect.
        #[arg(long, default_value_t = 1)]
        min_blob_size: usize,
        /// Flag pixels above mean + this many degrees instead of mean + std.
        #[arg(long)]
        fixed_delta: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        #[arg(long, env = "THERMOSCAN_STORE", default_value = "thermoscan-store")]
        store: PathBuf,
    },
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Synth { spec, out } => commands::synth(&spec, &out).map(drop),
        Command::Segment { input, config, out } => commands::segment(&input, config.as_deref(), &out).map(drop),
        Command::Analyze {
            input,
            config,
            bins,
            min_blob_size,
            fixed_delta,
            out,
        } => {
            let analysis = AnalysisConfig {
                bins,
                min_blob_size,
                fixed_delta_c: fixed_delta,
            };
            commands::analyze(&input, config.as_deref(), &analysis, &out).map(drop)
        }
        Command::Serve { bind, store } => {
            let store = Store::open(store)?;
            let rt = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| CliError::io("tokio runtime", e))?;
            rt.block_on(service::serve(bind, store))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("thermoscan: error[{}]: {e}", e.kind());
            ExitCode::from(e.exit_code())
        }
    }
}
