use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use roadlab::assignment::total_system_travel_time;
use roadlab::io::{load_network, parse_network, parse_trips};
use roadlab::service::{self, AppState, ServiceConfig};
use roadlab::{datasets, solve_sue, AssignmentParams, DemandTable, Projection, RoadNetwork};
use roadlab::{CostParams, NodeId, RoadId, StateTree};

/// Road network what-if analysis.
///
/// Every flag can also be set through an environment variable named
/// `ROADLAB_<FLAG>` (for example `ROADLAB_PORT`). Flags take precedence.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Start the HTTP service, optionally with a session preloaded from files
    /// or a bundled dataset.
    Serve(ServeArgs),
    /// Solve one equilibrium and write road statuses and the total travel
    /// time as JSON.
    Assign(AssignArgs),
    /// Parse and check input files. Exits 1 on the first problem.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// TNTP network file.
    #[arg(long, env = "ROADLAB_NETWORK", conflicts_with = "dataset", requires = "trips")]
    network: Option<PathBuf>,
    /// TNTP trip table.
    #[arg(long, env = "ROADLAB_TRIPS", requires = "network")]
    trips: Option<PathBuf>,
    /// Node coordinate file.
    #[arg(long, env = "ROADLAB_COORDS")]
    coords: Option<PathBuf>,
    /// How coordinates are interpreted: `planar` (km) or `lonlat` (degrees).
    #[arg(long, env = "ROADLAB_PROJECTION", default_value = "planar")]
    projection: Projection,
    /// Bundled dataset instead of files: braess or sioux-falls.
    #[arg(long, env = "ROADLAB_DATASET")]
    dataset: Option<String>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Logit dispersion parameter.
    #[arg(long, env = "ROADLAB_THETA", default_value_t = 0.3)]
    theta: f64,
    /// Paths per OD pair on networks too large for exhaustive enumeration.
    #[arg(long, env = "ROADLAB_K_PATHS", default_value_t = 8)]
    k_paths: usize,
    #[arg(long, env = "ROADLAB_MAX_ITERS", default_value_t = 1000)]
    max_iters: usize,
    /// Convergence threshold on the relative flow gap.
    #[arg(long, env = "ROADLAB_REL_GAP", default_value_t = 1e-4)]
    rel_gap: f64,
}

impl SolverArgs {
    fn params(&self) -> AssignmentParams {
        AssignmentParams {
            theta: self.theta,
            k_paths: self.k_paths,
            max_iters: self.max_iters,
            rel_gap_tol: self.rel_gap,
            ..AssignmentParams::default()
        }
    }
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Port to listen on; 0 picks a free one.
    #[arg(long, env = "ROADLAB_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "ROADLAB_HOST", default_value = "127.0.0.1")]
    host: String,
}

#[derive(Debug, Args)]
struct AssignArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output file; `-` writes to stdout.
    #[arg(long, env = "ROADLAB_OUT")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, env = "ROADLAB_NETWORK")]
    network: PathBuf,
    #[arg(long, env = "ROADLAB_TRIPS")]
    trips: Option<PathBuf>,
    #[arg(long, env = "ROADLAB_COORDS")]
    coords: Option<PathBuf>,
    #[arg(long, env = "ROADLAB_PROJECTION", default_value = "planar")]
    projection: Projection,
}

#[derive(Debug)]
struct CliError(String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn with_file<T>(path: &Path, r: roadlab::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError(format!("{}: {e}", path.display())))
}

impl InputArgs {
    fn is_empty(&self) -> bool {
        self.network.is_none() && self.dataset.is_none()
    }

    fn load(&self) -> Result<(RoadNetwork, DemandTable), CliError> {
        if let Some(name) = &self.dataset {
            let ds = datasets::by_name(name).ok_or_else(|| {
                CliError(format!(
                    "unknown dataset {name:?}; available: {}",
                    datasets::NAMES.join(", ")
                ))
            })?;
            return Ok((ds.network, ds.demands));
        }
        let (Some(net_path), Some(trips_path)) = (&self.network, &self.trips) else {
            return Err(CliError("give --network and --trips, or --dataset".into()));
        };
        let coords = self.coords.as_deref().map(read).transpose()?;
        let network = with_file(
            net_path,
            load_network(&read(net_path)?, coords.as_deref(), self.projection),
        )?;
        let trips = with_file(trips_path, parse_trips(&read(trips_path)?))?;
        for w in &trips.warnings {
            log::warn!("{}: {w}", trips_path.display());
        }
        Ok((network, trips.demands))
    }
}

#[derive(Serialize)]
struct RoadOut {
    road: RoadId,
    from: NodeId,
    to: NodeId,
    capacity_veh_per_hr: f64,
    fftt_min: f64,
    volume_veh_per_hr: f64,
    time_min: f64,
}

#[derive(Serialize)]
struct AssignOut {
    metric_veh_min: f64,
    converged: bool,
    iterations: usize,
    final_rel_gap: f64,
    statuses: Vec<RoadOut>,
}

fn assign(args: AssignArgs) -> Result<(), CliError> {
    let (network, demands) = args.input.load()?;
    let params = args.solver.params();
    params.validate()?;
    let result = solve_sue(&network, &demands, &params)?;
    if !result.converged {
        log::warn!(
            "stopped after {} iterations with relative gap {:.3e}",
            result.iterations,
            result.final_rel_gap
        );
    }
    let out = AssignOut {
        metric_veh_min: total_system_travel_time(&result),
        converged: result.converged,
        iterations: result.iterations,
        final_rel_gap: result.final_rel_gap,
        statuses: network
            .roads()
            .map(|r| {
                let s = result.statuses[&r.id];
                RoadOut {
                    road: r.id,
                    from: r.from,
                    to: r.to,
                    capacity_veh_per_hr: r.capacity,
                    fftt_min: r.fftt,
                    volume_veh_per_hr: s.actual_volume,
                    time_min: s.actual_time,
                }
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&out)?;
    text.push('\n');
    if args.out.as_os_str() == "-" {
        std::io::stdout().write_all(text.as_bytes())?;
    } else {
        std::fs::write(&args.out, text)
            .map_err(|e| CliError(format!("{}: {e}", args.out.display())))?;
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<(), CliError> {
    let text = read(&args.network)?;
    let file = with_file(&args.network, parse_network(&text))?;
    for w in &file.warnings {
        println!("warning: {}: {w}", args.network.display());
    }
    if let Some(path) = &args.coords {
        with_file(path, load_network(&text, Some(&read(path)?), args.projection))?;
    }
    println!(
        "{}: {} nodes, {} roads",
        args.network.display(),
        file.network.node_count(),
        file.network.road_count()
    );
    if let Some(path) = &args.trips {
        let trips = with_file(path, parse_trips(&read(path)?))?;
        for w in &trips.warnings {
            println!("warning: {}: {w}", path.display());
        }
        for (od, _) in trips.demands.iter() {
            for n in [od.origin, od.destination] {
                if file.network.node(n).is_none() {
                    return Err(CliError(format!(
                        "{}: OD pair {od} references node {n} missing from the network",
                        path.display()
                    )));
                }
            }
        }
        println!(
            "{}: {} OD entries, {} positive, total {}",
            path.display(),
            trips.od_entries,
            trips.demands.len(),
            trips.demands.total()
        );
    }
    Ok(())
}

async fn serve(args: ServeArgs) -> Result<(), CliError> {
    let params = args.solver.params();
    params.validate()?;
    let config = ServiceConfig {
        assignment_params: params,
        ..ServiceConfig::default()
    };
    let state = AppState::new(config);
    if !args.input.is_empty() {
        let (network, demands) = args.input.load()?;
        let tree = tokio::task::spawn_blocking(move || StateTree::create(network, demands, params))
            .await??;
        let id = state.add_session(tree, CostParams::default());
        println!("session {id} loaded");
    }
    let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port)).await?;
    let addr = listener.local_addr()?;
    println!("listening on http://{addr}");
    std::io::stdout().flush()?;
    service::serve(listener, state).await?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve(args) => tokio::runtime::Builder::new_multi_thread()
            .enable_all()
            .build()
            .map_err(CliError::from)
            .and_then(|rt| rt.block_on(serve(args))),
        Command::Assign(args) => assign(args),
        Command::Validate(args) => validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
