use std::fs;
use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand};

use noma_outage::cli::config::load_config;
use noma_outage::cli::figures::emit_figure;
use noma_outage::cli::sweep::{run_sweep, OutputSet, SweepAxis, SweepSpec};
use noma_outage::cli::validate::{run_validate, ValidateOptions};
use noma_outage::cli::CliError;

/// Outage probability of a two-hop amplify-and-forward NOMA downlink with
/// transmit beamforming and receive antenna selection: closed form,
/// quadrature, bounds, floors, asymptotes and Monte Carlo, as CSV.
#[derive(Parser)]
#[command(name = "noma-outage", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON scenario file; omitted means the built-in three-user default.
    #[arg(long)]
    config: Option<PathBuf>,
    /// SNR grid in dB, "start:step:stop" or a comma-separated list.
    #[arg(long, default_value = "0:5:40")]
    snr_db: String,
    /// Emit rows for one user (1-based) or for "all".
    #[arg(long, default_value = "all")]
    user: String,
    /// Directory for the CSV; without it the table goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    /// Monte Carlo trials per point (0 disables simulation columns).
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Independent RNG lanes; the trial split is deterministic per lane.
    #[arg(long, default_value_t = 8)]
    lanes: u32,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analytic outputs (closed form, quadrature, bounds, floors, asymptote,
    /// orthogonal-access baseline) over an SNR grid.
    Analytic {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo outage estimates over an SNR grid.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Every output along a chosen axis (snr_db, d1 or epsilon).
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, default_value = "snr_db")]
        axis: String,
        /// Axis grid for d1/epsilon sweeps, "start:step:stop" or a list;
        /// with a non-SNR axis, --snr-db must then be a single fixed value.
        #[arg(long)]
        points: Option<String>,
    },
    /// Cross-check closed form vs quadrature vs simulation on a fixed grid;
    /// exits 2 if any check fails.
    Validate {
        /// Monte Carlo trials per grid point (0 skips the simulation check).
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        lanes: u32,
        #[arg(long, hide = true, default_value_t = 1.0)]
        perturb_closed: f64,
    },
    /// Reproduce a canned figure; writes <id>.csv and <id>.svg.
    Figure {
        /// One of fig2..fig7.
        id: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: &str| CliError::Config(format!("bad grid {s:?}: {msg}"));
    let pts: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("want start:step:stop"));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(&e.to_string()))?;
        let (start, step, stop) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || stop < start {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| start + step * i as f64).collect()
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(&e.to_string()))?
    };
    if pts.is_empty() || pts.iter().any(|p| !p.is_finite()) {
        return Err(bad("grid must be non-empty and finite"));
    }
    Ok(pts)
}

fn parse_user(s: &str) -> Result<Option<usize>, CliError> {
    if s == "all" {
        return Ok(None);
    }
    s.parse::<usize>()
        .map(Some)
        .map_err(|_| CliError::Config(format!("--user wants a 1-based index or \"all\", got {s:?}")))
}

fn deliver(csv: &str, out: &Option<PathBuf>, name: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{csv}");
            Ok(())
        }
        Some(dir) => {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
            let path = dir.join(format!("{name}.csv"));
            fs::write(&path, csv)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.cmd {
        Cmd::Analytic { common } => {
            let sc = load_config(common.config.as_deref())?;
            let spec = SweepSpec {
                axis: SweepAxis::SnrDb,
                points: parse_grid(&common.snr_db)?,
                snr_db: 10.0,
                trials: 0,
                seed: 0,
                lanes: 1,
                outputs: OutputSet::analytic(),
                user: parse_user(&common.user)?,
            };
            deliver(&run_sweep(&sc, &spec)?, &common.out, "analytic")?;
            Ok(0)
        }
        Cmd::Simulate { common, mc } => {
            let sc = load_config(common.config.as_deref())?;
            let spec = SweepSpec {
                axis: SweepAxis::SnrDb,
                points: parse_grid(&common.snr_db)?,
                snr_db: 10.0,
                trials: mc.trials,
                seed: mc.seed,
                lanes: mc.lanes,
                outputs: OutputSet::monte_carlo(),
                user: parse_user(&common.user)?,
            };
            deliver(&run_sweep(&sc, &spec)?, &common.out, "simulate")?;
            Ok(0)
        }
        Cmd::Sweep {
            common,
            mc,
            axis,
            points,
        } => {
            let sc = load_config(common.config.as_deref())?;
            let axis = SweepAxis::parse(&axis)?;
            let snr_grid = parse_grid(&common.snr_db)?;
            let (pts, fixed_snr) = match axis {
                SweepAxis::SnrDb => {
                    if points.is_some() {
                        return Err(CliError::Config(
                            "--points only applies to d1/epsilon sweeps; use --snr-db".into(),
                        ));
                    }
                    (snr_grid, 10.0)
                }
                _ => {
                    let p = points.ok_or_else(|| {
                        CliError::Config(format!("--points is required for a {} sweep", axis.name()))
                    })?;
                    if snr_grid.len() != 1 {
                        return Err(CliError::Config(
                            "give a single --snr-db value when sweeping d1/epsilon".into(),
                        ));
                    }
                    (parse_grid(&p)?, snr_grid[0])
                }
            };
            let spec = SweepSpec {
                axis,
                points: pts,
                snr_db: fixed_snr,
                trials: mc.trials,
                seed: mc.seed,
                lanes: mc.lanes,
                outputs: OutputSet::everything(),
                user: parse_user(&common.user)?,
            };
            deliver(&run_sweep(&sc, &spec)?, &common.out, "sweep")?;
            Ok(0)
        }
        Cmd::Validate {
            trials,
            seed,
            lanes,
            perturb_closed,
        } => {
            let rep = run_validate(&ValidateOptions {
                trials,
                seed,
                lanes,
                perturb_closed,
            })?;
            print!("{}", rep.text);
            Ok(if rep.passed { 0 } else { 2 })
        }
        Cmd::Figure { id, out } => {
            let (csv, svg) = emit_figure(&id, &out)?;
            println!("wrote {}", csv.display());
            println!("wrote {}", svg.display());
            Ok(0)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version are successes; anything else is a usage error.
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            process::exit(1);
        }
    }
}
