//! The `liensync` command line.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::limit_cycle::Branch;
use crate::system::SystemSpec;

pub use config::{Drive, Grid, Objective, RunConfig};

pub const SCHEMA_VERSION: &str = "1";
pub const JOBS_ENV: &str = "LIENSYNC_JOBS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "liensync",
    version,
    about = "Work-optimal driving of Lienard oscillators onto their limit cycle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the limit-cycle conditions for a system.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = crate::system::DEFAULT_GRID_MAX)]
        grid_max: f64,
        #[arg(long, default_value_t = crate::system::DEFAULT_GRID_POINTS)]
        grid_points: usize,
    },
    /// Integrate the oscillator, free or along an optimal protocol.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        time: TimeArgs,
        #[arg(long, value_enum)]
        drive: Option<Drive>,
        /// Also run the undriven system from the start for this long.
        #[arg(long)]
        free_horizon: Option<f64>,
    },
    /// Locate and sample the limit cycle.
    LimitCycle {
        #[command(flatten)]
        common: Common,
    },
    /// Protocol minimising the non-conservative work.
    PlanNc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        time: TimeArgs,
        /// Force the final abscissa on the cycle.
        #[arg(long, allow_negative_numbers = true)]
        x1f: Option<f64>,
        #[arg(long, value_enum)]
        branch: Option<BranchArg>,
        /// Integrate the synthesised force and report how close it lands.
        #[arg(long)]
        replay: bool,
    },
    /// Protocol minimising the total work, with its landscape over the cycle.
    PlanTotal {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        time: TimeArgs,
        #[arg(long)]
        replay: bool,
    },
    /// Optimal endpoint and minimal work over a grid of connection times.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: PointArgs,
        /// Scaled times as lo:hi:n.
        #[arg(long)]
        sf_grid: Option<Grid>,
        /// Initial positions as lo:hi:n (x20 = 0); adds an x10 column.
        #[arg(long)]
        x10_grid: Option<Grid>,
        #[arg(long)]
        log_grid: bool,
        #[arg(long)]
        find_critical: bool,
        #[arg(long, value_enum)]
        objective: Option<Objective>,
        /// Worker threads; defaults to $LIENSYNC_JOBS, then to all cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run the verification suite; non-zero exit on any failed check.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for CSV and JSON artifacts.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    #[arg(long)]
    mu: Option<f64>,
    /// Coefficients of h, lowest order first (e.g. -1,0,1).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "dv")]
    h: Option<Vec<f64>>,
    /// Coefficients of V', lowest order first (e.g. 0,1).
    #[arg(
        long = "dV",
        id = "dv",
        visible_alias = "dv",
        value_delimiter = ',',
        allow_hyphen_values = true,
        requires = "h"
    )]
    dv: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct PointArgs {
    #[arg(long, allow_negative_numbers = true)]
    x10: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x20: Option<f64>,
}

#[derive(Args, Debug)]
struct TimeArgs {
    /// Scaled connection time t_f / mu.
    #[arg(long, conflicts_with = "tf")]
    sf: Option<f64>,
    /// Connection time.
    #[arg(long)]
    tf: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetArg {
    #[value(name = "van_der_pol", alias = "van-der-pol")]
    VanDerPol,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BranchArg {
    Upper,
    Lower,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Upper => Branch::Upper,
            BranchArg::Lower => Branch::Lower,
        }
    }
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => Some(RunConfig::load(path)?),
            None => None,
        };
        let system = match (&self.h, &self.dv, self.preset) {
            (Some(_), Some(_), Some(_)) => {
                return Err(Error::Usage("--preset cannot be combined with --h/--dV".into()))
            }
            (Some(h), Some(dv), None) => Some(SystemSpec::Explicit {
                mu: self.mu_or(cfg.as_ref())?,
                h: h.clone(),
                dv: dv.clone(),
            }),
            (_, _, Some(PresetArg::VanDerPol)) => Some(SystemSpec::van_der_pol(self.mu_or(cfg.as_ref())?)),
            _ => match (&mut cfg, self.mu) {
                (Some(c), Some(mu)) => {
                    set_mu(&mut c.system, mu);
                    None
                }
                (Some(_), None) => None,
                (None, Some(mu)) => Some(SystemSpec::van_der_pol(mu)),
                (None, None) => return Err(Error::Usage("--mu (or --config) is required".into())),
            },
        };
        let mut cfg = match (cfg, system) {
            (Some(mut c), Some(s)) => {
                c.system = s;
                c
            }
            (Some(c), None) => c,
            (None, Some(s)) => RunConfig::new(s),
            (None, None) => unreachable!(),
        };
        if self.out_dir.is_some() {
            cfg.out_dir = self.out_dir.clone();
        }
        Ok(cfg)
    }

    fn mu_or(&self, cfg: Option<&RunConfig>) -> Result<f64> {
        self.mu
            .or(cfg.map(|c| c.system.mu()))
            .ok_or_else(|| Error::Usage("--mu is required".into()))
    }
}

fn set_mu(spec: &mut SystemSpec, value: f64) {
    match spec {
        SystemSpec::Preset { mu, .. } | SystemSpec::Explicit { mu, .. } => *mu = value,
    }
}

fn apply_point(cfg: &mut RunConfig, p: &PointArgs) {
    cfg.x10 = p.x10.or(cfg.x10);
    cfg.x20 = p.x20.or(cfg.x20);
}

fn apply_time(cfg: &mut RunConfig, t: &TimeArgs) {
    if t.sf.is_some() || t.tf.is_some() {
        cfg.sf = t.sf;
        cfg.tf = t.tf;
    }
}

fn into_config(command: Command) -> Result<(&'static str, RunConfig)> {
    Ok(match command {
        Command::Validate { .. } => unreachable!("handled separately"),
        Command::Simulate {
            common,
            point,
            time,
            drive,
            free_horizon,
        } => {
            let mut cfg = common.config()?;
            apply_point(&mut cfg, &point);
            apply_time(&mut cfg, &time);
            cfg.drive = drive.unwrap_or(cfg.drive);
            cfg.free_horizon = free_horizon.or(cfg.free_horizon);
            ("simulate", cfg)
        }
        Command::LimitCycle { common } => ("limit-cycle", common.config()?),
        Command::PlanNc {
            common,
            point,
            time,
            x1f,
            branch,
            replay,
        } => {
            let mut cfg = common.config()?;
            apply_point(&mut cfg, &point);
            apply_time(&mut cfg, &time);
            cfg.x1f = x1f.or(cfg.x1f);
            cfg.branch = branch.map(Branch::from).or(cfg.branch);
            cfg.replay |= replay;
            ("plan-nc", cfg)
        }
        Command::PlanTotal {
            common,
            point,
            time,
            replay,
        } => {
            let mut cfg = common.config()?;
            apply_point(&mut cfg, &point);
            apply_time(&mut cfg, &time);
            cfg.replay |= replay;
            ("plan-total", cfg)
        }
        Command::Sweep {
            common,
            point,
            sf_grid,
            x10_grid,
            log_grid,
            find_critical,
            objective,
            jobs,
        } => {
            let mut cfg = common.config()?;
            apply_point(&mut cfg, &point);
            cfg.sf_grid = sf_grid.or(cfg.sf_grid);
            cfg.x10_grid = x10_grid.or(cfg.x10_grid);
            cfg.log_grid |= log_grid;
            cfg.find_critical |= find_critical;
            cfg.objective = objective.unwrap_or(cfg.objective);
            cfg.jobs = match jobs.or(cfg.jobs) {
                Some(j) => Some(j),
                None => jobs_from_env()?,
            };
            ("sweep", cfg)
        }
        Command::Verify { common } => ("verify", common.config()?),
    })
}

fn jobs_from_env() -> Result<Option<usize>> {
    match std::env::var(JOBS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Usage(format!("{JOBS_ENV} must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        e if e.is_numerical() => EXIT_NUMERICAL,
        Error::Usage(_) | Error::Json(_) => EXIT_USAGE,
        _ => EXIT_DOMAIN,
    }
}

/// Parses `argv` (program name first), runs the command, prints a one-line
/// JSON summary on success and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Validate {
            common,
            grid_max,
            grid_points,
        } => common
            .config()
            .and_then(|cfg| commands::validate(&cfg, grid_max, grid_points)),
        other => into_config(other).and_then(|(name, cfg)| commands::dispatch(name, &cfg)),
    };
    match outcome {
        Ok(out) => {
            println!("{}", out.summary);
            out.code
        }
        Err(e) => {
            eprintln!("liensync: {e}");
            exit_code(&e)
        }
    }
}
