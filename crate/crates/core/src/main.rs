//! Command-line front end: offline collection, rank certification,
//! closed-loop simulation, controller comparison, and trajectory-level
//! interconnection.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ibc::config::read_config;
use ibc::error::Error;
use ibc::hankel::{build_controller_matrix, build_forward, build_inverse, RankReport};
use ibc::interconnect::{feedback, series, unified_controller_trajectory};
use ibc::sim::{collect_offline, compare_controllers, run_closed_loop, ControllerChoice};
use ibc::trajectory::Trajectory;
use ibc::{make_imc_filter, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "ibc",
    about = "Data-driven internal behavior control toolkit",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Collect offline plant data and write it as a trajectory CSV.
    Collect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Certify the data matrices of the configured (or a given) trajectory
    /// and print their singular values.
    Rank {
        #[arg(long)]
        config: PathBuf,
        /// Trajectory CSV to certify instead of freshly collected data.
        #[arg(long)]
        traj: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one controller in closed loop and write the log CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// cbc, unified, or imc; defaults to the first configured controller.
        #[arg(long)]
        controller: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every configured controller on identical schedules and report
    /// pairwise deviations.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Also write the report to a file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compose two recorded trajectories into a series or feedback
    /// interconnection trajectory.
    Interconnect {
        /// series or feedback
        #[arg(long)]
        kind: String,
        #[arg(long)]
        w1: PathBuf,
        #[arg(long)]
        w2: PathBuf,
        /// Window depth T_p (at least the order of the second system).
        #[arg(long)]
        tp: usize,
        /// Order of the second system.
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = ibc::DEFAULT_RANK_TOL)]
        rank_tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn apply_seed(cfg: &mut ExperimentConfig, seed: Option<u64>) {
    if let Some(s) = seed {
        cfg.seed = s;
    }
}

fn print_report(label: &str, report: &RankReport) {
    let sv = report
        .singular_values
        .iter()
        .map(|s| format!("{s:.6e}"))
        .collect::<Vec<_>>()
        .join(", ");
    println!(
        "{label}: rank {} (expected {}) -> {}  [sv: {sv}]",
        report.rank,
        report.expected,
        if report.passed { "pass" } else { "FAIL" }
    );
}

fn rank_command(cfg: &ExperimentConfig, traj: Option<PathBuf>) -> Result<(), Error> {
    let data = match traj {
        Some(path) => Trajectory::read_csv(&path)?,
        None => collect_offline(&cfg.discrete_plant()?, cfg.td, cfg.delay, cfg.seed),
    };
    let mut failed = false;

    let forward_len = data.input_len();
    let mut fwd = build_forward(&data.prefix(forward_len)?, cfg.tp)?;
    match fwd.certify(cfg.order, cfg.rank_tol) {
        Ok(report) => print_report("forward data matrix", report),
        Err(_) => {
            print_report("forward data matrix", fwd.certificate().unwrap());
            failed = true;
        }
    }

    if cfg.delay == 0 {
        println!("inverse data matrix: identical to the forward matrix when l_delay = 0");
    } else if data.output_surplus() == cfg.delay {
        let mut inv = build_inverse(&data, cfg.tp, cfg.delay)?;
        match inv.certify(cfg.order, cfg.rank_tol) {
            Ok(report) => print_report("inverse data matrix", report),
            Err(_) => {
                print_report("inverse data matrix", inv.certificate().unwrap());
                failed = true;
            }
        }
    } else {
        println!(
            "inverse data matrix: skipped (output must run exactly l_delay = {} samples past the input)",
            cfg.delay
        );
    }

    // the unified controller consumes the equal-length prefix of td - L samples
    if let Some(len) = forward_len.checked_sub(cfg.delay) {
        if len > cfg.tp {
            let slice = data.prefix(len)?;
            let f = make_imc_filter(cfg.tau, cfg.ts, cfg.delay.max(1))?;
            let wc = unified_controller_trajectory(&slice.u, &slice.y, &f)?;
            let mut cm = build_controller_matrix(&wc.u, &wc.y, cfg.tp)?;
            match cm.certify(cfg.order, cfg.rank_tol) {
                Ok(report) => print_report("controller data matrix", report),
                Err(_) => {
                    print_report("controller data matrix", cm.certificate().unwrap());
                    failed = true;
                }
            }
        }
    }

    if failed {
        Err(Error::Config("rank certification failed".into()))
    } else {
        Ok(())
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Collect { config, out, seed } => {
            let mut cfg = read_config(&config)?;
            apply_seed(&mut cfg, seed);
            let data = collect_offline(&cfg.discrete_plant()?, cfg.td, cfg.delay, cfg.seed);
            data.write_csv(&out)?;
            println!(
                "wrote {} input and {} output samples to {}",
                data.u.len(),
                data.y.len(),
                out.display()
            );
            Ok(())
        }
        Command::Rank { config, traj, seed } => {
            let mut cfg = read_config(&config)?;
            apply_seed(&mut cfg, seed);
            rank_command(&cfg, traj)
        }
        Command::Simulate {
            config,
            controller,
            out,
            seed,
        } => {
            let mut cfg = read_config(&config)?;
            apply_seed(&mut cfg, seed);
            let choice = match controller {
                Some(name) => ControllerChoice::parse(&name)?,
                None => cfg.controllers[0],
            };
            let log = run_closed_loop(&cfg, choice)?;
            log.write_csv(&out)?;
            println!(
                "simulated {} samples with the {} controller -> {}",
                log.records.len(),
                choice.name(),
                out.display()
            );
            Ok(())
        }
        Command::Compare { config, out, seed } => {
            let mut cfg = read_config(&config)?;
            apply_seed(&mut cfg, seed);
            let report = compare_controllers(&cfg)?;
            let text = report.render();
            print!("{text}");
            if let Some(path) = out {
                std::fs::write(&path, &text)?;
            }
            Ok(())
        }
        Command::Interconnect {
            kind,
            w1,
            w2,
            tp,
            order,
            rank_tol,
            out,
        } => {
            let t1 = Trajectory::read_csv(&w1)?;
            let t2 = Trajectory::read_csv(&w2)?;
            let result = match kind.as_str() {
                "series" => series(&t1, &t2, tp, order, rank_tol)?,
                "feedback" => feedback(&t1, &t2, tp, order, rank_tol)?,
                other => {
                    return Err(Error::Config(format!(
                        "unknown interconnection kind {other:?} (expected series or feedback)"
                    )))
                }
            };
            result.to_trajectory(t1.ts)?.write_csv(&out)?;
            println!(
                "wrote a {}-sample {kind} interconnection trajectory to {}",
                result.u.len(),
                out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage problems exit 1; clap renders its own message
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::NonFinite { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
