use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stefan_cli::commands::{self, Overrides, Session, SweepParam};
use stefan_cli::config::{self, Format};
use stefan_cli::CliError;

/// Exact similarity solutions of the two-phase Stefan problem with
/// evaporation, and their verification against a PDE solver.
#[derive(Parser)]
#[command(name = "stefan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Newton tolerance on the scaled residuals (overrides `solver.tol`).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Tabular output format (overrides `output.format`).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the front constants; writes fronts.json and profiles.
    Solve,
    /// Reconstruct the temperature field; writes field.csv.
    Field {
        /// Comma-separated times (s); empty for a header-only file.
        #[arg(long, default_value = "1")]
        times: String,
        /// Comma-separated positions (m); default spans [0, 5 S2(t)].
        #[arg(long)]
        x: Option<String>,
    },
    /// Run the PDE oracle from the similarity solution; writes verify.json.
    Verify {
        /// Relative error put on w2 before the run (negative control).
        #[arg(long, allow_hyphen_values = true)]
        perturb_omega2: Option<f64>,
    },
    /// Solve across a range of one material parameter; writes sweep.csv.
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        /// `lo,hi`
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        #[arg(long, default_value_t = 16)]
        n: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("`--config <path>` is required".into()))?;
    let loaded = config::load(&path)?;
    let ov = Overrides {
        out: cli.out,
        tol: cli.tol,
        format: cli.format,
    };
    let session = Session::new(loaded, &ov)?;
    match cli.command {
        Command::Solve => {
            let res = commands::cmd_solve(&session)?;
            println!(
                "{}: omega1 = {:.6e}, omega2 = {:.6e} ({} iterations, residual {:.2e})",
                res.case, res.omega1, res.omega2, res.iterations, res.residual_norm
            );
        }
        Command::Field { times, x } => {
            let times = commands::parse_list("--times", &times)?;
            let xs = x.map(|x| commands::parse_list("--x", &x)).transpose()?;
            let path = commands::cmd_field(&session, &times, xs.as_deref())?;
            println!("wrote {}", path.display());
        }
        Command::Verify { perturb_omega2 } => {
            let rep = commands::cmd_verify(&session, perturb_omega2)?;
            println!(
                "verification passed: front error {:.3e}, field error {:.3e}",
                rep.max_front_rel, rep.max_field_rel
            );
        }
        Command::Sweep { param, range, n } => {
            let ends = commands::parse_list("--range", &range)?;
            let [lo, hi] = ends[..] else {
                return Err(CliError::Config(format!("`--range` needs `lo,hi`, got `{range}`")));
            };
            let path = commands::cmd_sweep(&session, param, lo, hi, n)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
