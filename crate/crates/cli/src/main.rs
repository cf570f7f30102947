use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qcf_cli::commands::{self, EXIT_CONFIG};
use qcf_cli::config::{RegionSpec, RunConfig};
use qcf_cli::output::{to_json, write_file};
use qcf_core::analysis::Theorem;
use qcf_core::batch::Execution;
use qcf_core::solvers::Method;

#[derive(Parser, Debug)]
#[command(
    name = "qcf",
    version,
    about = "Force-based quasicontinuum solvers for a 1D atomic chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Number of representative intervals on each side
    #[arg(long = "N", global = true)]
    n: Option<usize>,
    /// Atomistic region half-width
    #[arg(long = "K", global = true)]
    k: Option<usize>,
    /// End tension T
    #[arg(long, global = true, allow_hyphen_values = true)]
    tension: Option<f64>,
    /// Target contraction constant
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Upper lattice-spacing bound r_U
    #[arg(long = "rU", global = true)]
    r_upper: Option<f64>,
    #[arg(long, global = true)]
    out_json: Option<PathBuf>,
    #[arg(long, global = true)]
    out_csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical radii of the Lennard-Jones potential
    PotentialInfo,
    /// Forces of the coupled models at uniform spacing
    GhostTable {
        /// Lattice spacing (defaults to the zero-load spacing a₀)
        #[arg(long)]
        a: Option<f64>,
    },
    /// Solve the force-based equilibrium equations
    Solve {
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Run the ghost-force iteration
    Iterate,
    /// Certified region for one r_U
    Region {
        #[arg(long, value_enum, default_value = "existence")]
        theorem: TheoremArg,
    },
    /// Certified regions over a range of r_U
    Sweep {
        #[arg(long, value_enum, default_value = "existence")]
        theorem: TheoremArg,
        #[arg(long, default_value_t = 0.98)]
        from: f64,
        #[arg(long, default_value_t = 1.105)]
        to: f64,
        #[arg(long, default_value_t = 26)]
        steps: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    Newton,
    Homotopy,
    Gfi,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TheoremArg {
    Existence,
    Contraction,
}

impl From<TheoremArg> for Theorem {
    fn from(t: TheoremArg) -> Theorem {
        match t {
            TheoremArg::Existence => Theorem::Existence,
            TheoremArg::Contraction => Theorem::Contraction,
        }
    }
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Newton => Method::Newton,
            MethodArg::Homotopy => Method::Homotopy,
            MethodArg::Gfi => Method::GhostForceIteration,
        }
    }
}

/// Failure with a fixed exit code.
#[derive(Debug)]
struct Exit(u8, anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Exit {
    fn from(e: E) -> Self {
        Exit(EXIT_CONFIG as u8, e.into())
    }
}

impl Cli {
    fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(t) = self.tension {
            cfg.tension = Some(t);
            cfg.f_tilde = None;
            cfg.phi = None;
        }
        if self.gamma.is_some() || self.r_upper.is_some() {
            let region = cfg.region.get_or_insert(RegionSpec {
                theorem: if self.gamma.is_some() {
                    Theorem::Contraction
                } else {
                    Theorem::Existence
                },
                gamma: None,
                r_upper: None,
            });
            if self.gamma.is_some() {
                region.gamma = self.gamma;
            }
            if self.r_upper.is_some() {
                region.r_upper = self.r_upper;
            }
        }
        if self.out_json.is_some() {
            cfg.out_json = self.out_json.clone();
        }
        if self.out_csv.is_some() {
            cfg.out_csv = self.out_csv.clone();
        }
        Ok(cfg)
    }

    fn out_json(&self) -> Result<Option<PathBuf>> {
        Ok(match &self.out_json {
            Some(p) => Some(p.clone()),
            None if self.config.is_some() => self.run_config()?.out_json,
            None => None,
        })
    }

    fn out_csv(&self) -> Result<Option<PathBuf>> {
        Ok(match &self.out_csv {
            Some(p) => Some(p.clone()),
            None if self.config.is_some() => self.run_config()?.out_csv,
            None => None,
        })
    }
}

/// Writes JSON to `path`, or to stdout when no path is given.
fn emit_json(path: Option<PathBuf>, json: &str) -> Result<()> {
    match path {
        Some(p) => write_file(&p, json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn solve(cli: &Cli, method: Option<Method>) -> Result<u8, Exit> {
    let cfg = cli.run_config()?;
    let problem = cfg.build()?;
    let method = method.unwrap_or(problem.method);
    let report = match commands::run(&problem, method) {
        Ok(r) => r,
        Err(e) => {
            let code = commands::exit_code_for_error(&e);
            return Err(Exit(
                code as u8,
                anyhow::Error::new(e).context("solve failed"),
            ));
        }
    };
    emit_json(cfg.out_json.clone(), &to_json(&report)?)?;
    if let Some(p) = &cfg.out_csv {
        write_file(p, &commands::history_csv(&report))?;
    }
    eprintln!(
        "{:?}: {:?} after {} iterations, residual {:e}",
        report.method,
        report.status,
        report.iterations,
        report.final_residual()
    );
    Ok(commands::exit_code_for_status(report.status) as u8)
}

fn run(cli: &Cli) -> Result<u8, Exit> {
    match &cli.command {
        Command::PotentialInfo => {
            let info = commands::potential_info();
            print!("{}", info.table());
            if let Some(p) = cli.out_json()? {
                write_file(&p, &to_json(&info)?)?;
            }
            Ok(0)
        }
        Command::GhostTable { a } => {
            let cfg = cli.run_config()?;
            let g = cfg.geometry()?;
            let a = a.unwrap_or_else(|| commands::potential_info().a0);
            let table = commands::ghost_table(&g, a).context("ghost table")?;
            let csv = table.csv();
            match cli.out_csv()? {
                Some(p) => write_file(&p, &csv)?,
                None => print!("{csv}"),
            }
            if let Some(p) = cli.out_json()? {
                write_file(&p, &to_json(&table)?)?;
            }
            Ok(0)
        }
        Command::Solve { method } => solve(cli, method.map(Method::from)),
        Command::Iterate => solve(cli, Some(Method::GhostForceIteration)),
        Command::Region { theorem } => {
            let report = commands::region((*theorem).into(), cli.gamma, cli.r_upper)?;
            emit_json(cli.out_json()?, &to_json(&report)?)?;
            Ok(0)
        }
        Command::Sweep {
            theorem,
            from,
            to,
            steps,
        } => {
            let gamma = cli.gamma.unwrap_or(0.5);
            let rows = commands::sweep(
                (*theorem).into(),
                gamma,
                *from,
                *to,
                *steps,
                Execution::default(),
            );
            let csv = commands::sweep_csv(&rows);
            match cli.out_csv()? {
                Some(p) => write_file(&p, &csv)?,
                None => print!("{csv}"),
            }
            if let Some(p) = cli.out_json()? {
                write_file(&p, &to_json(&rows)?)?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
