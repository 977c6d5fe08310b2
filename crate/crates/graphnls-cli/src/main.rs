use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use graphnls::gn::{estimate_c_over, random_family, theta_min, Mode};
use graphnls::io;
use graphnls::rearrange::{decreasing_rearrangement, two_sided_rearrangement};
use graphnls::scan::mass_scan;
use graphnls::solve::{blowup_probe, bound_states, constant_state, ground_state, SolveConfig};
use graphnls::{Mesh, MetricGraph};

const PROBE_LAMBDAS: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];
const GN_FAMILY_SIZE: usize = 100;

/// Stationary NLS states on compact metric graphs.
#[derive(Parser)]
#[command(name = "graphnls", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Graph document (JSON with vertices and edges)
    #[arg(long)]
    graph: PathBuf,
    /// Directory the result files are written into
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SolverOpts {
    /// Nonlinearity exponent, in (2, 6]
    #[arg(long, default_value_t = 4.0)]
    p: f64,
    /// Mass constraint
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    /// Mesh spacing; 0 selects min edge length / 16 (/ 64 for p = 6 scans)
    #[arg(long, default_value_t = 0.0)]
    h: f64,
    /// Stationarity tolerance
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iters: usize,
    /// Number of bound states requested
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Seed for randomized starting data
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

impl SolverOpts {
    fn config(&self) -> SolveConfig {
        let mut cfg = SolveConfig::new(self.p, self.mass);
        cfg.h = self.h;
        cfg.tol = self.tol;
        cfg.max_iters = self.max_iters;
        cfg.k = self.k;
        cfg.seed = self.seed;
        cfg
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Topology summary and the critical mass the topology dictates
    Report {
        #[command(flatten)]
        common: Common,
    },
    /// Mass-constrained ground state by normalized gradient flow
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opts: SolverOpts,
    },
    /// Distinct stationary states by deflated Newton
    Bound {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opts: SolverOpts,
    },
    /// Sweep the mass grid; at p = 6 bisect the existence threshold
    Scan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        opts: SolverOpts,
        /// Mass grid as start:end:count
        #[arg(long, default_value = "0.5:3.5:4")]
        mass_grid: String,
        /// Width the threshold bracket is bisected down to
        #[arg(long, default_value_t = 0.05)]
        resolution: f64,
    },
    /// Estimate the modified Gagliardo-Nirenberg constant on a sampled family
    Gn {
        #[command(flatten)]
        common: Common,
        /// Upper end of the sampled mass range (lower end is half of it)
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        /// Mesh spacing; 0 selects min edge length / 16
        #[arg(long, default_value_t = 0.0)]
        h: f64,
        /// Seed for the sampled family
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Monotone rearrangement of a stored state
    Rearrange {
        #[command(flatten)]
        common: Common,
        /// Function CSV to rearrange (edge,x,value, as written by solve)
        #[arg(long)]
        state: PathBuf,
    },
    /// Energies of the scaling family transplanted onto one edge
    Probe {
        #[command(flatten)]
        common: Common,
        /// Mass of the transplanted profile
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        /// Edge to transplant onto; default prefers a terminal edge
        #[arg(long)]
        edge: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("GRAPHNLS_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                // ignore the error when a pool already exists; the cap is
                // best-effort and only affects scan parallelism
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => {
                eprintln!("graphnls: GRAPHNLS_THREADS must be a positive integer");
                return ExitCode::FAILURE;
            }
        }
    }
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("graphnls: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Report { common } => {
            let graph = load_graph(&common.graph)?;
            let report = graph.topology_report();
            emit(
                &common.out,
                "report.json",
                &io::topology_report_json(&report),
            )?;
            println!(
                "{} mode, critical mass {:.10}",
                io::mode_str(Mode::for_graph(&graph)),
                report.critical_mass
            );
        }
        Cmd::Solve { common, opts } => {
            let graph = load_graph(&common.graph)?;
            let cfg = opts.config();
            let out = ground_state(&graph, &cfg)?;
            emit(&common.out, "outcome.json", &io::outcome_json(&out, &cfg))?;
            emit(&common.out, "state.csv", &io::function_csv(&out.state))?;
            emit(&common.out, "history.csv", &io::history_csv(&out.history))?;
            println!(
                "{} after {} iterations, E = {:.12e}",
                io::status_str(out.status),
                out.iterations,
                out.report.energy
            );
        }
        Cmd::Bound { common, opts } => {
            let graph = load_graph(&common.graph)?;
            let cfg = opts.config();
            let set = bound_states(&graph, &cfg)?;
            emit(
                &common.out,
                "bound_states.json",
                &io::bound_states_json(&set, &cfg),
            )?;
            for (i, state) in set.states.iter().enumerate() {
                emit(
                    &common.out,
                    &format!("state_{i}.csv"),
                    &io::function_csv(&state.state),
                )?;
            }
            println!("{} distinct states", set.states.len());
        }
        Cmd::Scan {
            common,
            opts,
            mass_grid,
            resolution,
        } => {
            let graph = load_graph(&common.graph)?;
            let grid = parse_grid(&mass_grid)?;
            let cfg = opts.config();
            let result = mass_scan(&graph, opts.p, &grid, resolution, &cfg)?;
            emit(&common.out, "scan.csv", &io::scan_csv(&result))?;
            emit(&common.out, "scan_plot.csv", &io::scan_plot_csv(&result))?;
            emit(
                &common.out,
                "scan_summary.json",
                &io::scan_summary_json(&result, resolution, &cfg),
            )?;
            match &result.threshold {
                Some(t) => println!("threshold bracket [{:.6}, {:.6}]", t.lo, t.hi),
                None => println!("{} points, no threshold in the grid", result.points.len()),
            }
        }
        Cmd::Gn {
            common,
            mass,
            h,
            seed,
        } => {
            let graph = load_graph(&common.graph)?;
            let spacing = if h > 0.0 {
                h
            } else {
                Mesh::default_spacing(&graph)
            };
            let mesh = Mesh::build(graph.clone(), spacing)?;
            let mode = Mode::for_graph(&graph);
            let (lo, hi) = (0.5 * mass, mass);
            let mut family = random_family(&mesh, seed, GN_FAMILY_SIZE, lo, hi)?;
            // the Fourier samples are oscillatory and satisfy the plain
            // inequality outright; the constant is the direction that
            // actually needs the theta term, so it joins the family
            let (constant, _) = constant_state(&mesh, 6.0, hi)?;
            family.push(constant);
            let est = estimate_c_over(&family, mode)?;
            let theta = theta_min(&family[est.witness], est.c, mode)?;
            emit(
                &common.out,
                "c_estimate.json",
                &io::c_estimate_json(&est, seed, lo, hi),
            )?;
            emit(&common.out, "theta.json", &io::theta_json(&theta))?;
            println!(
                "C = {:.6e} (witness {} of {})",
                est.c, est.witness, est.family_size
            );
        }
        Cmd::Rearrange { common, state } => {
            let graph = load_graph(&common.graph)?;
            let text = std::fs::read_to_string(&state)
                .with_context(|| format!("reading state {}", state.display()))?;
            let u = io::read_function_csv(&graph, &text, &state.display().to_string())?;
            let rearranged = if graph.has_terminal_edge() {
                decreasing_rearrangement(&u.abs())?
            } else {
                two_sided_rearrangement(&u.abs())?
            };
            emit(
                &common.out,
                "rearranged.csv",
                &io::rearranged_csv(&rearranged),
            )?;
            emit(
                &common.out,
                "rearranged.json",
                &io::rearranged_sidecar_json(&rearranged),
            )?;
            println!("rearranged onto [0, {:.10}]", rearranged.total_length());
        }
        Cmd::Probe { common, mass, edge } => {
            let graph = load_graph(&common.graph)?;
            let probe = blowup_probe(&graph, mass, &PROBE_LAMBDAS, edge.as_deref())?;
            emit(&common.out, "probe.json", &io::probe_json(&probe))?;
            println!(
                "a = {:.6e}, R^2 = {:.6}",
                probe.coefficient, probe.r_squared
            );
        }
    }
    Ok(())
}

fn load_graph(path: &Path) -> Result<Arc<MetricGraph>> {
    if !path.is_file() {
        bail!("graph document not found: {}", path.display());
    }
    let graph =
        MetricGraph::load(path).with_context(|| format!("reading graph {}", path.display()))?;
    Ok(Arc::new(graph))
}

/// start:end:count, count evenly spaced masses with both ends included.
fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, end, count] = parts[..] else {
        bail!("mass grid must be start:end:count, got {text}");
    };
    let start: f64 = start.parse().context("mass grid start")?;
    let end: f64 = end.parse().context("mass grid end")?;
    let count: usize = count.parse().context("mass grid count")?;
    if count == 0 {
        bail!("mass grid count must be positive");
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (end - start) / (count - 1) as f64;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

fn emit(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}
