mod bench;
mod diet;
mod solve;

use std::path::PathBuf;
use std::time::Duration;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use invlearn_core::solvers::SearchMode;

#[derive(Parser)]
#[command(name = "invlearn", version, about = "Inverse learning of linear programs from observed decisions")]
struct Cli {
    /// More log output on stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    BestFirst,
}

impl From<Mode> for SearchMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exhaustive => SearchMode::Exhaustive,
            Mode::BestFirst => SearchMode::BestFirst,
        }
    }
}

#[derive(clap::Args)]
struct Io {
    /// Problem document (JSON, v1); `-` reads stdin.
    problem: PathBuf,
    /// Where to write the solution JSON; stdout by default.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "best-first")]
    mode: Mode,
}

#[derive(Subcommand)]
enum Command {
    /// Closest rationalizable point.
    Il {
        #[command(flatten)]
        io: Io,
    },
    /// Goal-integrated solve with exactly `r` relevant rows active.
    Gil {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Also write the big-M model in LP file format.
        #[arg(long, value_name = "PATH")]
        export_lp: Option<PathBuf>,
        #[arg(long, default_value_t = 1e4)]
        big_m: f64,
    },
    /// Sequential tradeoff trace starting from the IL solution.
    Mgil {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        lmax: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Classical recover-then-optimize baseline.
    Baseline {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 8)]
        vertex_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Validation findings and identifiability report.
    Diagnose {
        #[command(flatten)]
        io: Io,
    },
    /// Run a synthetic benchmark grid.
    Bench {
        /// Grid configuration (TOML or JSON).
        #[arg(long)]
        config: PathBuf,
        /// Directory for metrics.csv and summary.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Diet recommendation tools.
    Diet {
        #[command(subcommand)]
        command: diet::DietCommand,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "INVLEARN_BIND", default_value = invlearn_server::DEFAULT_BIND)]
        bind: String,
        /// Idle seconds before a session is dropped.
        #[arg(long, env = "INVLEARN_TTL", default_value_t = 3600)]
        ttl: u64,
    },
}

/// Writes to stdout; a reader that hung up early is not an error.
pub fn print_out(text: &str) -> std::io::Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => tracing_subscriber::filter::LevelFilter::WARN,
        1 => tracing_subscriber::filter::LevelFilter::INFO,
        _ => tracing_subscriber::filter::LevelFilter::DEBUG,
    };
    let level = if matches!(cli.command, Command::Serve { .. }) { level.max(tracing_subscriber::filter::LevelFilter::INFO) } else { level };
    tracing_subscriber::fmt().with_max_level(level).with_writer(std::io::stderr).init();

    match cli.command {
        Command::Il { io } => solve::il(&io),
        Command::Gil { io, r, omega, epsilon, export_lp, big_m } => solve::gil(&io, r, omega, epsilon, export_lp.as_deref(), big_m),
        Command::Mgil { io, lmax, tau, omega, epsilon } => solve::mgil(&io, lmax, tau, omega, epsilon),
        Command::Baseline { io, vertex_samples, seed } => solve::baseline(&io, vertex_samples, seed),
        Command::Diagnose { io } => solve::diagnose(&io),
        Command::Bench { config, out } => bench::run(&config, &out),
        Command::Diet { command } => diet::run(command),
        Command::Serve { bind, ttl } => {
            let config = invlearn_server::ServerConfig { ttl: Duration::from_secs(ttl), ..Default::default() };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(&bind).await.with_context(|| format!("binding {bind}"))?;
                invlearn_server::serve(listener, config).await?;
                Ok(())
            })
        }
    }
}
