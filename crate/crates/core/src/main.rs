use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use berger_flow::config::parse_config;
use berger_flow::initial::{construct_initial, validate_class};
use berger_flow::io::write_profile;
use berger_flow::mesh::build_grid;
use berger_flow::oracles::{bryant_profile, cylinder_profile};
use berger_flow::runner::{analyze, run};

/// Evolution and diagnostics of U(2)-invariant warped Berger metrics on
/// R^4 under Ricci flow.
#[derive(Parser)]
#[command(name = "berger-flow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a configuration and emit snapshots, time series and the
    /// result summary into its output directory.
    Run { config: PathBuf },
    /// Recompute the singularity estimate and profile distances from a
    /// persisted run directory.
    Analyze { run_dir: PathBuf },
    /// Report the initial-data class of a configuration without evolving.
    Validate { config: PathBuf },
    /// Emit a reference profile table.
    Oracle {
        /// bryant or cylinder
        kind: String,
        #[arg(long, default_value_t = 20.0)]
        sigma_max: f64,
        /// Cylinder radius (ignored for bryant; sqrt(6) is the
        /// unit-scalar-curvature normalization)
        #[arg(long, default_value_t = 2.449489742783178)]
        radius: f64,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[arg(long, default_value = "profile.dat")]
        out: PathBuf,
    },
}

/// Exit codes: 0 success, 2 monitor hard-failure, 3 numerical breakdown,
/// 4 configuration error.
fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

fn exit_for(e: &berger_flow::FlowError) -> u8 {
    use berger_flow::FlowError::*;
    match e {
        Config { .. } | InvalidParameter { .. } => 4,
        Breakdown { .. } | PositivityLost { .. } | ResolutionExhausted { .. } => 3,
        MonitorHardFailure { .. } => 2,
        _ => 1,
    }
}

fn dispatch(cli: Cli) -> berger_flow::Result<ExitCode> {
    match cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = parse_config(&text)?;
            let result = run(&cfg)?;
            println!("termination: {}", result.termination);
            println!("class: {}", result.class.verdict);
            if result.estimate.singular {
                println!(
                    "singular: T_est = {} +/- {} ({}), type {}",
                    result.estimate.t_est,
                    result.estimate.uncertainty,
                    result.estimate.method,
                    result.estimate.type_verdict
                );
            } else {
                println!("singular: no");
            }
            println!(
                "steps: {}, rescales: {}, final t: {}",
                result.steps, result.rescales, result.final_t
            );
            println!("timeseries: {}", result.timeseries_path.display());
            println!("result: {}", result.result_path.display());
            Ok(ExitCode::from(result.exit_code() as u8))
        }
        Command::Analyze { run_dir } => {
            let analysis = analyze(&run_dir)?;
            if analysis.estimate.singular {
                println!(
                    "singular: T_est = {} +/- {} ({}), type {}",
                    analysis.estimate.t_est,
                    analysis.estimate.uncertainty,
                    analysis.estimate.method,
                    analysis.estimate.type_verdict
                );
            } else {
                println!("singular: no");
            }
            for (i, f) in analysis.frames.iter().enumerate() {
                println!(
                    "frame {i}: t = {}, d_bryant = {:.4}, d_cylinder = {:.4}, symmetry defect = {:.2e}",
                    f.t_frame, f.d_bryant, f.d_cylinder, f.symmetry_defect
                );
            }
            println!("analysis: {}", analysis.analysis_path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = parse_config(&text)?;
            let grid = build_grid(cfg.n_nodes, cfg.x_max, cfg.cluster_factor)?;
            let state = construct_initial(cfg.family, grid)?;
            let v = validate_class(&state)?;
            println!("family: {}", cfg.family.name());
            println!("verdict: {}", v.verdict);
            println!(
                "smooth_at_origin: {} (residual {:.3e})",
                v.smooth_at_origin, v.origin_slope_residual
            );
            println!("min_bs: {:.6e}", v.min_bs);
            println!("min_h: {:.6e}", v.min_h);
            println!("sup_b: {:.6e} (finite: {})", v.sup_b, v.sup_b_finite);
            println!("ratio_floor: {:.6e}", v.ratio_floor);
            println!("curvature_decay_ok: {}", v.curvature_decay_ok);
            println!("fiber_floor: {:.6e}", v.fiber_floor);
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { kind, sigma_max, radius, tolerance, out } => {
            let profile = match kind.as_str() {
                "bryant" => bryant_profile(sigma_max, tolerance)?,
                "cylinder" => cylinder_profile(radius, sigma_max)?,
                other => {
                    return Err(berger_flow::FlowError::invalid(
                        "kind",
                        format!("expected bryant or cylinder, got '{other}'"),
                    ))
                }
            };
            write_profile(&profile, &out)?;
            println!("wrote {} ({} nodes)", out.display(), profile.sigma.len());
            Ok(ExitCode::SUCCESS)
        }
    }
}
