use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use icflow_cli::commands::{self, EXIT_CONFIG};
use icflow_cli::{ConfigError, Mode, Outcome, RunConfig};

#[derive(Parser)]
#[command(name = "icflow", version, about = "Curvature identities, inequalities and inverse curvature flows of star-shaped hypersurfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepCommand {
    Verify,
    Flow,
}

#[derive(Subcommand)]
enum Command {
    /// Identity and inequality suites on the configured shape.
    Verify(Common),
    /// Run the configured flow and write its Q_k series.
    Flow(Common),
    /// Repeat verify or flow over the values of one config key.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `section.key=v1,v2,...`
        #[arg(long)]
        axis: String,
        #[arg(long, value_enum, default_value = "verify")]
        command: SweepCommand,
    },
}

fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::parse(&text)
}

fn write_bundle(dir: &Path, out: &Outcome) -> anyhow::Result<()> {
    for (name, body) in &out.files {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn init_threads() {
    if let Some(n) = std::env::var("ICFLOW_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let (common, run): (&Common, Box<dyn Fn(&RunConfig) -> Result<Outcome, ConfigError>>) = match &cli.command {
        Command::Verify(c) => (c, Box::new(commands::verify)),
        Command::Flow(c) => (c, Box::new(commands::flow)),
        Command::Sweep { common, axis, command } => {
            let mode = match command {
                SweepCommand::Verify => Mode::Verify,
                SweepCommand::Flow => Mode::Flow,
            };
            let axis = axis.clone();
            (common, Box::new(move |c: &RunConfig| commands::sweep(c, &axis, mode)))
        }
    };
    let outcome = match load(&common.config).and_then(|cfg| run(&cfg).map(|o| (cfg, o))) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("icflow: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let (cfg, outcome) = outcome;
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    if let Err(e) = write_bundle(&dir, &outcome) {
        eprintln!("icflow: {e:#}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    if !common.quiet {
        print!("{}", outcome.summary());
        println!("report: {}", dir.display());
    }
    ExitCode::from(outcome.exit_code as u8)
}
