use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, RunOptions, UnitsRequest};
use crate::error::{CliError, CliResult};
use crate::presets::Preset;

#[derive(Debug, Parser)]
#[command(name = "kickrotor", version, about = "Mean-field kicked-rotor simulations")]
struct Cli {
    /// Named parameter set applied on top of the config.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `output.directory`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Overrides `n_kicks`.
    #[arg(long)]
    kicks: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single trajectory from one plane wave.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Initial momentum index; defaults to the first ensemble member.
        #[arg(long, allow_hyphen_values = true)]
        n0: Option<i64>,
    },
    /// Ensemble-averaged kinetic energy.
    Ensemble(RunArgs),
    /// Exponent fits over a (g, K, method) grid.
    Sweep(RunArgs),
    /// Power-law fit of a stored series.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Fit window `t_min t_max` in kicks (e.g. `1e4 1e5`).
        #[arg(long, num_args = 2, value_names = ["T_MIN", "T_MAX"])]
        window: Vec<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Phase statistics and functional fidelity of evolved states.
    Diagnose(RunArgs),
    /// Self-convergence of <p^2> in the time step.
    Convergence(RunArgs),
    /// Laboratory parameters to dimensionless hbar_eff and g.
    ConvertUnits {
        /// TOML document with the physical parameters.
        #[arg(long, conflicts_with_all = ["transverse_size", "transverse_frequency_hz", "atom_number"])]
        config: Option<PathBuf>,
        /// Transverse size L_perp in metres (potassium example).
        #[arg(long, conflicts_with = "transverse_frequency_hz")]
        transverse_size: Option<f64>,
        /// Transverse trap frequency omega_perp / 2 pi in Hz (potassium example).
        #[arg(long)]
        transverse_frequency_hz: Option<f64>,
        #[arg(long)]
        atom_number: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

impl RunArgs {
    fn options(self, preset: Option<Preset>) -> RunOptions {
        RunOptions { config: self.config, out_dir: self.out_dir, kicks: self.kicks, preset }
    }
}

fn parse_kick(text: &str) -> CliResult<u64> {
    let v: f64 = text.parse().map_err(|_| CliError::Validation(format!("invalid window bound `{text}`")))?;
    if !(v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64) {
        return Err(CliError::Validation(format!("window bound `{text}` is not a kick index")));
    }
    Ok(v as u64)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let preset = cli.preset;
    match cli.command {
        Command::Simulate { run, n0 } => commands::simulate(&run.options(preset), n0),
        Command::Ensemble(run) => commands::ensemble(&run.options(preset)),
        Command::Sweep(run) => commands::sweep(&run.options(preset)),
        Command::Diagnose(run) => commands::diagnose(&run.options(preset)),
        Command::Convergence(run) => commands::convergence(&run.options(preset)),
        Command::Fit { input, window, output } => {
            let window = (parse_kick(&window[0])?, parse_kick(&window[1])?);
            commands::fit(&input, window, output.as_deref())
        }
        Command::ConvertUnits { config, transverse_size, transverse_frequency_hz, atom_number, output } => {
            let request = UnitsRequest { config, transverse_size, transverse_frequency_hz, atom_number };
            commands::convert_units(&request, output.as_deref())
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
