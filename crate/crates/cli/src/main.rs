use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cfp_core::algorithms::{validate_schedule, Role, StepSchedule, Theorem, Validity};
use cfp_core::config::{Tolerances, TOLERANCE_ENV};
use cfp_core::graph::{DeltaGraphParams, Digraph, Topology};
use cfp_core::harness::{
    diagnose, paper_scenario, run, write_json, write_trajectory_csv, RunReport, Scenario,
};
use cfp_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Simulate centralized and distributed solvers for convex feasibility problems.
#[derive(Parser)]
#[command(name = "cfp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print connectivity, balance, spectrum and gain bounds of a topology.
    CheckGraph {
        /// Scenario whose topology (and consensus gain) to inspect.
        #[arg(long, conflicts_with = "graph", required_unless_present = "graph")]
        scenario: Option<PathBuf>,
        /// JSON file holding a topology or a bare graph.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Consensus gain to compare with the bound.
        #[arg(long)]
        h: Option<f64>,
        /// Window length for the delta-graph of a switching schedule.
        #[arg(long, requires = "delta")]
        window: Option<f64>,
        /// Integral threshold for the delta-graph.
        #[arg(long, requires = "window")]
        delta: Option<f64>,
    },
    /// Run one of the built-in five-agent scenarios.
    PaperCase {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        case: u8,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        overrides: Overrides,
        /// Also write the scenario as JSON.
        #[arg(long)]
        write_scenario: Option<PathBuf>,
    },
    /// Check a step-size schedule against a convergence theorem's hypotheses.
    ValidateSchedule {
        /// Schedule as inline JSON or a path to a JSON file.
        #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
        schedule: Option<String>,
        /// Check the alpha and beta schedules of a scenario instead.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum)]
        theorem: Option<TheoremArg>,
        #[arg(long, value_enum, default_value = "alpha")]
        role: RoleArg,
        /// Number of terms in the reported partial sums.
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
    },
}

#[derive(Args)]
struct OutputArgs {
    /// Trajectory CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run report JSON; printed to stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    record_every: Option<usize>,
    /// Skip the consensus-gain precondition of the discrete algorithm.
    #[arg(long)]
    allow_unstable_gain: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoremArg {
    CentralizedContinuous,
    CentralizedDiscrete,
    DistributedDiscrete,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    Alpha,
    Beta,
}

enum Failure {
    /// Malformed or inconsistent input: exit 2.
    Input(String),
    /// The run itself failed or did not converge: exit 1.
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Diverged { .. }
            | Error::NonFinite { .. }
            | Error::AssertionFailure { .. }
            | Error::NumericalFailure(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Run {
            scenario,
            output,
            overrides,
        } => {
            let s = load_scenario(&scenario)?;
            run_scenario(s, &output, &overrides)
        }
        Command::PaperCase {
            case,
            output,
            overrides,
            write_scenario,
        } => {
            let mut s = paper_scenario(case)?;
            s.config.tolerances = env_tolerances(s.config.tolerances)?;
            if let Some(path) = write_scenario {
                write_json(&s, path)?;
            }
            run_scenario(s, &output, &overrides)
        }
        Command::CheckGraph {
            scenario,
            graph,
            h,
            window,
            delta,
        } => {
            let (topology, tol, h) = match (scenario, graph) {
                (Some(path), _) => {
                    let s = load_scenario(&path)?;
                    let h = h.or((s.algorithm == cfp_core::algorithms::Algorithm::DistributedDiscrete)
                        .then_some(s.config.h));
                    (s.topology, s.config.tolerances, h)
                }
                (None, Some(path)) => (load_topology(&path)?, env_tolerances(Tolerances::default())?, h),
                (None, None) => return Err(Failure::Input("pass --scenario or --graph".into())),
            };
            let params = match (window, delta) {
                (Some(w), Some(d)) => Some(DeltaGraphParams::new(w, d)?),
                _ => None,
            };
            let report = diagnose(&topology, &tol, h, params)?;
            for (k, g) in report.graphs.iter().enumerate() {
                eprintln!(
                    "graph {k}: n = {}, strongly connected = {}, spanning tree = {}, balanced = {}",
                    g.n,
                    g.strongly_connected,
                    g.spanning_tree_root.is_some(),
                    g.balanced
                );
                match g.step_size_bound {
                    Some(b) => eprintln!("graph {k}: step size bound = {b}"),
                    None => eprintln!("graph {k}: no step size bound (no spanning tree)"),
                }
            }
            if let Some(d) = &report.delta_graph {
                eprintln!(
                    "delta-graph (T = {}, delta = {}): strongly connected = {}, rate = {:?}",
                    d.window, d.delta, d.graph.strongly_connected, d.contraction_rate
                );
            }
            if let (Some(h), Some(ok)) = (report.h, report.h_within_bound) {
                let bound = report.graphs[0].step_size_bound.unwrap_or(f64::NAN);
                let relation = if ok { "<" } else { "is not below" };
                eprintln!("h = {h} {relation} bound {bound}");
            }
            print_json(&report)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ValidateSchedule {
            schedule,
            scenario,
            theorem,
            role,
            horizon,
        } => {
            let theorem = theorem.map(|t| match t {
                TheoremArg::CentralizedContinuous => Theorem::CentralizedContinuous,
                TheoremArg::CentralizedDiscrete => Theorem::CentralizedDiscrete,
                TheoremArg::DistributedDiscrete => Theorem::DistributedDiscrete,
            });
            let reports = match (schedule, scenario) {
                (Some(raw), _) => {
                    let theorem = theorem.ok_or_else(|| Failure::Input("--schedule needs --theorem".into()))?;
                    let role = match role {
                        RoleArg::Alpha => Role::Alpha,
                        RoleArg::Beta => Role::Beta,
                    };
                    vec![validate_schedule(&parse_schedule(&raw)?, theorem, role, horizon)]
                }
                (None, Some(path)) => {
                    let s = load_scenario(&path)?;
                    use cfp_core::algorithms::Algorithm::*;
                    let theorem = theorem.unwrap_or(match s.algorithm {
                        CentralizedDiscrete => Theorem::CentralizedDiscrete,
                        DistributedDiscrete => Theorem::DistributedDiscrete,
                        _ => Theorem::CentralizedContinuous,
                    });
                    vec![
                        validate_schedule(&s.config.alpha, theorem, Role::Alpha, horizon),
                        validate_schedule(&s.config.beta, theorem, Role::Beta, horizon),
                    ]
                }
                (None, None) => return Err(Failure::Input("pass --schedule or --scenario".into())),
            };
            for r in &reports {
                eprintln!("{:?}: {}", r.validity, r.reasons.join("; "));
            }
            print_json(&reports)?;
            let all_valid = reports.iter().all(|r| r.validity == Validity::Valid);
            Ok(if all_valid { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn run_scenario(mut s: Scenario, output: &OutputArgs, o: &Overrides) -> Result<ExitCode, Failure> {
    let cfg = &mut s.config;
    if let Some(v) = o.tau {
        cfg.tau = v;
    }
    if let Some(v) = o.h {
        cfg.h = v;
    }
    if let Some(v) = o.dt {
        cfg.dt = v;
    }
    if let Some(v) = o.horizon {
        cfg.horizon = v;
    }
    if let Some(v) = o.record_every {
        cfg.record_every = v;
    }
    cfg.allow_unstable_gain |= o.allow_unstable_gain;
    s.validate()?;

    let (traj, report) = run(&s)?;
    if let Some(path) = &output.out {
        write_trajectory_csv(&traj, s.problem.dim(), path)?;
    }
    match &output.report {
        Some(path) => write_json(&report, path)?,
        None => print_json(&report)?,
    }
    summarize(&report);
    Ok(if report.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn summarize(r: &RunReport) {
    let name = r.name.as_deref().unwrap_or("scenario");
    let status = if r.converged { "converged" } else { "did not converge" };
    eprintln!(
        "{name}: {status} after {} steps (t = {}), final point {:?}",
        r.steps, r.simulated_time, r.final_point
    );
    if let Some(m) = r.final_metrics {
        eprintln!(
            "consensus error {:e}, set residual {:e}, inequality residual {:e}",
            m.consensus_error, m.max_set_residual, m.max_inequality_residual
        );
    }
    if !r.violations.is_empty() {
        eprintln!("{} assertion violations", r.violations.len());
    }
}

fn env_tolerances(base: Tolerances) -> Result<Tolerances, Failure> {
    match std::env::var(TOLERANCE_ENV) {
        Ok(raw) => base.with_override(&raw).map_err(Failure::Input),
        Err(_) => Ok(base),
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let mut s = Scenario::load(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    s.config.tolerances = env_tolerances(s.config.tolerances)?;
    Ok(s)
}

fn load_topology(path: &Path) -> Result<Topology, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if let Ok(t) = serde_json::from_str::<Topology>(&text) {
        return Ok(t);
    }
    serde_json::from_str::<Digraph>(&text)
        .map(|graph| Topology::Fixed { graph })
        .map_err(|e| Failure::Input(format!("{}: not a topology or graph: {e}", path.display())))
}

fn parse_schedule(raw: &str) -> Result<StepSchedule, Failure> {
    let text = if raw.trim_start().starts_with('{') {
        raw.to_string()
    } else {
        std::fs::read_to_string(raw).map_err(|e| Failure::Input(format!("{raw}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("schedule: {e}")))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    println!("{text}");
    Ok(())
}
