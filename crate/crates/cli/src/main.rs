//! `dimerflow`: exact counts, samplers, dynamics experiments and renders
//! from the command line.

mod commands;
mod config;
mod render;

use clap::{Args, Parser, Subcommand};
use config::{content_hash, parse_file, ConfigError, Settings};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "dimerflow", version, about = "Dimer-model dynamics and exact oracles")]
struct Cli {
    /// Settings file with `key = value` lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV, SVG and metadata outputs.
    #[arg(long, global = true, default_value = "dimerflow-out")]
    out: PathBuf,
    /// Worker threads for replica experiments.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct DomainArgs {
    /// square, hexagon or squarehexagon.
    #[arg(long)]
    lattice: Option<String>,
    /// square, disk or polygon:x,y;x,y;... in embedding numerators.
    #[arg(long)]
    region: Option<String>,
    #[arg(long = "L")]
    l: Option<u32>,
    /// Use the pyramid domain W_L with its maximal boundary.
    #[arg(long)]
    pyramid: bool,
    /// free, or flat:sx,sy for a boundary following a plane.
    #[arg(long)]
    boundary: Option<String>,
}

impl DomainArgs {
    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("lattice", self.lattice.clone()),
            ("region", self.region.clone()),
            ("L", self.l.map(|v| v.to_string())),
            ("pyramid", self.pyramid.then(|| "true".to_string())),
            ("boundary", self.boundary.clone()),
        ]
    }
}

fn opt<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(|x| x.to_string())
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Number of perfect matchings of a domain.
    Count {
        #[command(flatten)]
        domain: DomainArgs,
        /// kasteleyn, enumerate or both.
        #[arg(long)]
        method: Option<String>,
    },
    /// Exact uniform sample, or a dynamics run from an extremal state.
    Sample {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// exact, glauber, sync or async.
        #[arg(long)]
        dynamics: Option<String>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long = "floor-ceiling")]
        floor_ceiling: Option<u32>,
        /// max, min or boundary.
        #[arg(long)]
        start: Option<String>,
        /// Number of evenly spaced trajectory snapshots.
        #[arg(long)]
        checkpoints: Option<usize>,
        #[arg(long = "dump-beads")]
        dump_beads: bool,
    },
    /// Coalescence scaling, exact TV curves or coupled volume traces.
    Mixtime {
        #[command(flatten)]
        domain: DomainArgs,
        /// scaling, tv or trace.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        dynamics: Option<String>,
        #[arg(long = "floor-ceiling")]
        floor_ceiling: Option<u32>,
        #[arg(long = "Ls")]
        ls: Option<String>,
        /// Replicas per L.
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "max-events")]
        max_events: Option<u64>,
        /// Comma-separated times for the TV curve.
        #[arg(long)]
        times: Option<String>,
        /// Record the trace every this many events.
        #[arg(long)]
        every: Option<u64>,
    },
    /// Exact volume drift of single-rotation discrepancies.
    Drift {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        dynamics: Option<String>,
        #[arg(long = "floor-ceiling")]
        floor_ceiling: Option<u32>,
        /// Extra exact samples to test besides the boundary state.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Inverse Kasteleyn entries and edge probabilities on the plane.
    Kinv {
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long)]
        weights: Option<String>,
        /// Target slope; picks weights by Newton iteration.
        #[arg(long)]
        slope: Option<String>,
        #[arg(long)]
        b: Option<usize>,
        #[arg(long)]
        w: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<i64>,
        #[arg(long = "grid-n")]
        grid_n: Option<usize>,
        /// Edges as fd:dx:dy, comma-separated; prints their joint probability.
        #[arg(long, allow_hyphen_values = true)]
        edges: Option<String>,
    },
    /// Moments of height differences along a thread.
    Fluctuations {
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long)]
        weights: Option<String>,
        #[arg(long)]
        distance: Option<u32>,
        #[arg(long)]
        samples: Option<usize>,
        /// exact or mcmc.
        #[arg(long)]
        source: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "max-order")]
        max_order: Option<u32>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long = "grid-n")]
        grid_n: Option<usize>,
        #[arg(long)]
        window: Option<u32>,
        /// Distances for the variance-versus-log-distance profile.
        #[arg(long)]
        profile: Option<String>,
    },
    /// Volume eroded from the pyramid state by fast dynamics.
    Erosion {
        #[arg(long)]
        lattice: Option<String>,
        #[arg(long = "L")]
        l: Option<u32>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        checkpoints: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Fit the mean rate against these sizes instead.
        #[arg(long = "Ls")]
        ls: Option<String>,
        #[arg(long)]
        seeds: Option<usize>,
    },
    /// Exact cycle sums F_k(L) and the verification columns.
    Fksums {
        #[arg(long)]
        k: Option<u32>,
        #[arg(long = "Ls")]
        ls: Option<String>,
    },
    /// SVG drawing of a matching.
    Render {
        #[command(flatten)]
        domain: DomainArgs,
        /// Matching file written by `sample`; overrides the domain.
        #[arg(long)]
        input: Option<PathBuf>,
        /// exact, boundary, max or min.
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Shade tiles by height.
        #[arg(long)]
        heights: bool,
        #[arg(long)]
        scale: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Count { .. } => "count",
            Command::Sample { .. } => "sample",
            Command::Mixtime { .. } => "mixtime",
            Command::Drift { .. } => "drift",
            Command::Kinv { .. } => "kinv",
            Command::Fluctuations { .. } => "fluctuations",
            Command::Erosion { .. } => "erosion",
            Command::Fksums { .. } => "fksums",
            Command::Render { .. } => "render",
        }
    }

    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        match self {
            Command::Count { domain, method } => {
                let mut f = domain.flags();
                f.push(("method", method.clone()));
                f
            }
            Command::Sample {
                domain,
                seed,
                dynamics,
                horizon,
                floor_ceiling,
                start,
                checkpoints,
                dump_beads,
            } => {
                let mut f = domain.flags();
                f.extend([
                    ("seed", opt(seed)),
                    ("dynamics", dynamics.clone()),
                    ("horizon", opt(horizon)),
                    ("floor_ceiling", opt(floor_ceiling)),
                    ("start", start.clone()),
                    ("checkpoints", opt(checkpoints)),
                    ("dump_beads", dump_beads.then(|| "true".to_string())),
                ]);
                f
            }
            Command::Mixtime {
                domain,
                mode,
                dynamics,
                floor_ceiling,
                ls,
                seeds,
                seed,
                max_events,
                times,
                every,
            } => {
                let mut f = domain.flags();
                f.extend([
                    ("mode", mode.clone()),
                    ("dynamics", dynamics.clone()),
                    ("floor_ceiling", opt(floor_ceiling)),
                    ("Ls", ls.clone()),
                    ("seeds", opt(seeds)),
                    ("seed", opt(seed)),
                    ("max_events", opt(max_events)),
                    ("times", times.clone()),
                    ("every", opt(every)),
                ]);
                f
            }
            Command::Drift {
                domain,
                dynamics,
                floor_ceiling,
                samples,
                seed,
            } => {
                let mut f = domain.flags();
                f.extend([
                    ("dynamics", dynamics.clone()),
                    ("floor_ceiling", opt(floor_ceiling)),
                    ("samples", opt(samples)),
                    ("seed", opt(seed)),
                ]);
                f
            }
            Command::Kinv {
                lattice,
                weights,
                slope,
                b,
                w,
                x,
                y,
                grid_n,
                edges,
            } => vec![
                ("lattice", lattice.clone()),
                ("weights", weights.clone()),
                ("slope", slope.clone()),
                ("b", opt(b)),
                ("w", opt(w)),
                ("x", opt(x)),
                ("y", opt(y)),
                ("grid_n", opt(grid_n)),
                ("edges", edges.clone()),
            ],
            Command::Fluctuations {
                lattice,
                weights,
                distance,
                samples,
                source,
                seed,
                max_order,
                tol,
                grid_n,
                window,
                profile,
            } => vec![
                ("lattice", lattice.clone()),
                ("weights", weights.clone()),
                ("distance", opt(distance)),
                ("samples", opt(samples)),
                ("source", source.clone()),
                ("seed", opt(seed)),
                ("max_order", opt(max_order)),
                ("tol", opt(tol)),
                ("grid_n", opt(grid_n)),
                ("window", opt(window)),
                ("profile", profile.clone()),
            ],
            Command::Erosion {
                lattice,
                l,
                horizon,
                checkpoints,
                seed,
                ls,
                seeds,
            } => vec![
                ("lattice", lattice.clone()),
                ("L", opt(l)),
                ("horizon", opt(horizon)),
                ("checkpoints", opt(checkpoints)),
                ("seed", opt(seed)),
                ("Ls", ls.clone()),
                ("seeds", opt(seeds)),
            ],
            Command::Fksums { k, ls } => vec![("k", opt(k)), ("Ls", ls.clone())],
            Command::Render {
                domain,
                input,
                state,
                seed,
                heights,
                scale,
            } => {
                let mut f = domain.flags();
                f.extend([
                    ("input", input.as_ref().map(|p| p.display().to_string())),
                    ("state", state.clone()),
                    ("seed", opt(seed)),
                    ("heights", heights.then(|| "true".to_string())),
                    ("scale", opt(scale)),
                ]);
                f
            }
        }
    }
}

/// 2 for configuration errors, 3 for compute caps, 4 for numerical
/// failures, 1 for anything else.
fn exit_code(e: &anyhow::Error) -> u8 {
    use dimerflow::Error as E;
    if e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<E>() {
        Some(E::Parse(_) | E::UnsupportedLattice(_)) => 2,
        Some(E::CapExceeded(_) | E::ComputeBudgetExceeded(_) | E::HorizonExceeded { .. }) => 3,
        Some(
            E::NoTorusZero
            | E::DegenerateZero
            | E::SingularGrid
            | E::SlopeOutsidePolygon(..)
            | E::InsufficientSamples { .. },
        ) => 4,
        _ => 1,
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let file_text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| config::config_error("config", format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut settings = Settings::merge(parse_file(&file_text)?, cli.command.flags())?;
    std::fs::create_dir_all(&cli.out)?;
    let ctx = commands::Context {
        out: cli.out.clone(),
        jobs: cli.jobs.max(1),
    };
    let name = cli.command.name();
    let result = commands::dispatch(name, &mut settings, &ctx);
    let echo = settings.echo();
    let mut inputs = echo.clone().into_bytes();
    if let Some(p) = settings.raw("input") {
        inputs.extend(std::fs::read(p).unwrap_or_default());
    }
    // the echo already carries the seed whenever the command drew one
    let seed = if echo.lines().any(|l| l.starts_with("seed = ")) {
        ""
    } else {
        "seed = none\n"
    };
    let status = match &result {
        Ok(()) => "ok".to_string(),
        Err(e) => format!("error: {e}"),
    };
    let meta = format!(
        "command = {name}\n{echo}hash = {}\n{seed}status = {status}\nversion = {}\n",
        content_hash(&inputs),
        env!("CARGO_PKG_VERSION"),
    );
    std::fs::write(cli.out.join(format!("{name}.meta")), meta)?;
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
