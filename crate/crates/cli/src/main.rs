use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rotcool_cli::{commands, config, CliError, ConfigSources};

#[derive(Debug, Parser)]
#[command(
    name = "rotcool",
    version,
    about = "Sympathetic rotational cooling of molecular ions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Named preset merged underneath the configuration file.
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Override a configuration key, e.g. --set cooling.gamma_mhz=0.05
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rotational level and transition tables.
    Levels,
    /// Ion-chain equilibrium and normal modes.
    Modes,
    /// Coupling prefactor grid and resonances over mass and radial frequency.
    Scan,
    /// Sideband-cooling trajectories per M block.
    Cool,
    /// Populations after the configured microwave pulses.
    Drive,
    /// Cooling/pulse protocol error curves.
    Protocol,
    /// List the bundled presets.
    Presets,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }
    if let Command::Presets = cli.command {
        for name in config::PRESET_NAMES {
            println!("{name}");
        }
        return Ok(());
    }
    let sources = ConfigSources {
        preset: cli.preset.as_deref(),
        path: cli.config.as_deref(),
        overrides: &cli.overrides,
    };
    let mut cfg = config::load(&sources)?;
    if let Some(out) = cli.out {
        cfg.output.dir = out;
    }
    let out = cfg.output.dir.clone();
    match cli.command {
        Command::Levels => commands::levels(&cfg, &out),
        Command::Modes => commands::modes(&cfg, &out),
        Command::Scan => commands::scan(&cfg, &out),
        Command::Cool => commands::cool(&cfg, &out),
        Command::Drive => commands::drive(&cfg, &out),
        Command::Protocol => commands::protocol(&cfg, &out),
        Command::Presets => Ok(()),
    }?;
    log::info!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
