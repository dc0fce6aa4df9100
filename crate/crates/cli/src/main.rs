use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thevenin_id::scenario::{reproduce, simulate_to_dir, sweep, Figure, ScenarioFile, SimConfig};
use thevenin_id::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_OTHER: u8 = 1;

#[derive(Parser)]
#[command(
    name = "thevenin-id",
    version,
    about = "Online Thevenin-equivalent identification from PCC measurements"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regenerate a figure preset.
    Reproduce {
        #[arg(value_parser = ["fig2a", "fig2b", "fig3", "fig4"])]
        figure: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scenario over an alpha x gamma_P grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        alpha: Vec<f64>,
        #[arg(long = "gamma-p", value_delimiter = ',', num_args = 1.., required = true)]
        gamma_p: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_numeric() { EXIT_NUMERIC } else { EXIT_OTHER })
}

fn config_fail(e: &Error) -> ExitCode {
    eprintln!("config error: {e}");
    ExitCode::from(EXIT_CONFIG)
}

fn load_file(path: &PathBuf) -> Result<ScenarioFile, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    ScenarioFile::parse(&text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Simulate { config, out } => {
            let cfg = match SimConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return config_fail(&e),
            };
            match simulate_to_dir(&cfg, &out) {
                Ok(res) => {
                    println!(
                        "{}: {} samples written to {}",
                        res.name,
                        res.series.len(),
                        out.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Cmd::Reproduce { figure, out } => {
            let fig: Figure = match figure.parse() {
                Ok(f) => f,
                Err(e) => return config_fail(&e),
            };
            match reproduce(fig, &out) {
                Ok(runs) => {
                    println!("{}: {} runs written to {}", fig.name(), runs.len(), out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Cmd::Sweep {
            config,
            alpha,
            gamma_p,
            out,
        } => {
            let base = match load_file(&config).and_then(|f| SimConfig::from_file(&f).map(|_| f)) {
                Ok(f) => f,
                Err(e) => return config_fail(&e),
            };
            let points = match sweep(&base, &alpha, &gamma_p, &out) {
                Ok(p) => p,
                Err(e @ Error::InvalidScenario(_)) => return config_fail(&e),
                Err(e) => return fail(&e),
            };
            let mut code = ExitCode::SUCCESS;
            for p in &points {
                match &p.outcome {
                    Ok(s) => println!(
                        "alpha={} gamma_p={}: final errors R {:.3e} L {:.3e} E {:.3e}",
                        p.alpha, p.gamma_p, s.final_error[0], s.final_error[1], s.final_error[2]
                    ),
                    Err(e) => {
                        eprintln!("alpha={} gamma_p={}: {e}", p.alpha, p.gamma_p);
                        code = ExitCode::from(if e.is_numeric() { EXIT_NUMERIC } else { EXIT_OTHER });
                    }
                }
            }
            code
        }
    }
}
