use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use mengerflow_cli::commands::{cmd_diagnose, cmd_energy, cmd_flow, cmd_generate};
use mengerflow_cli::config::{apply_file, apply_setting, CurveSpec, Formats, RunConfig};

#[derive(Parser)]
#[command(
    name = "mengerflow",
    version,
    about = "Minimize generalized integral Menger curvature of closed polygonal curves\nby a projected Sobolev gradient flow preserving strain, barycenter and knot class"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an initial curve and write it as OBJ
    Generate {
        #[command(flatten)]
        opts: Opts,
    },
    /// Run the projected gradient flow; writes trace.csv and OBJ frames
    Flow {
        #[command(flatten)]
        opts: Opts,
    },
    /// Evaluate the energy of a curve
    Energy {
        #[command(flatten)]
        opts: Opts,
    },
    /// Print geometric and energetic diagnostics for a curve file
    Diagnose {
        /// OBJ file holding a closed polyline
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args)]
struct Opts {
    /// Energy exponent p in (7/3, 8/3)
    #[arg(long)]
    p: Option<f64>,
    /// Lift the admissible-range restriction on p
    #[arg(long)]
    allow_any_p: bool,
    /// Number of edges for generated curves
    #[arg(long)]
    n: Option<usize>,
    /// Initial curve: torus:a,b | square-knot | file:path
    #[arg(long)]
    curve: Option<String>,
    /// Uniform vertex noise amplitude
    #[arg(long)]
    noise: Option<f64>,
    /// Noise seed
    #[arg(long)]
    seed: Option<u64>,
    /// Major radius of generated torus knots
    #[arg(long)]
    radius_major: Option<f64>,
    /// Minor radius of generated torus knots
    #[arg(long)]
    radius_minor: Option<f64>,
    /// Armijo sufficient-decrease parameter
    #[arg(long)]
    sigma: Option<f64>,
    /// Backtracking shrink factor
    #[arg(long)]
    backtrack: Option<f64>,
    /// Step growth factor after accepted steps
    #[arg(long)]
    grow: Option<f64>,
    /// Initial trial step size
    #[arg(long)]
    tau_init: Option<f64>,
    /// Minimal step size before giving up
    #[arg(long)]
    tau_min: Option<f64>,
    /// Strain feasibility tolerance
    #[arg(long)]
    tol_feas: Option<f64>,
    /// Relative gradient-norm stopping tolerance
    #[arg(long)]
    tol_grad: Option<f64>,
    /// Modified Newton iteration budget per restoration
    #[arg(long)]
    max_newton: Option<usize>,
    /// Accepted-step budget
    #[arg(long)]
    max_iters: Option<usize>,
    /// Disable the knot-class certification gate
    #[arg(long)]
    no_isotopy_check: bool,
    /// Margin to π for the turning-angle check (radians)
    #[arg(long)]
    angle_margin: Option<f64>,
    /// Write an OBJ frame every this many accepted steps (0 = off)
    #[arg(long)]
    frame_every: Option<usize>,
    /// Output file (generate) or directory (flow)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Outputs to write: comma-separated subset of obj,csv
    #[arg(long)]
    formats: Option<String>,
    /// Worker threads for energy/collision loops (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// key=value configuration file; flags override file entries
    #[arg(long)]
    config: Option<PathBuf>,
}

fn resolve(opts: &Opts, default_out: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig {
        out: PathBuf::from(default_out),
        ..RunConfig::default()
    };
    if let Some(path) = &opts.config {
        apply_file(&mut cfg, path)?;
    }
    macro_rules! take {
        ($field:ident, $slot:expr) => {
            if let Some(v) = &opts.$field {
                $slot = v.clone();
            }
        };
    }
    take!(p, cfg.p);
    if opts.allow_any_p {
        cfg.allow_any_p = true;
    }
    take!(n, cfg.n_edges);
    if let Some(curve) = &opts.curve {
        cfg.curve = CurveSpec::parse(curve)?;
    }
    take!(noise, cfg.noise);
    take!(seed, cfg.seed);
    take!(radius_major, cfg.radius_major);
    take!(radius_minor, cfg.radius_minor);
    take!(sigma, cfg.flow.sigma_armijo);
    take!(backtrack, cfg.flow.backtrack_factor);
    take!(grow, cfg.flow.step_grow_factor);
    take!(tau_init, cfg.flow.tau_init);
    take!(tau_min, cfg.flow.tau_min);
    take!(tol_feas, cfg.flow.tol_feas);
    take!(tol_grad, cfg.flow.tol_grad);
    take!(max_newton, cfg.flow.max_newton);
    take!(max_iters, cfg.flow.max_iters);
    if opts.no_isotopy_check {
        cfg.flow.isotopy_check = false;
    }
    take!(angle_margin, cfg.flow.isotopy_policy.angle_margin);
    take!(frame_every, cfg.frame_every);
    take!(out, cfg.out);
    if let Some(f) = &opts.formats {
        cfg.formats = Formats::parse(f)?;
    }
    if opts.threads.is_some() {
        cfg.threads = opts.threads;
    }
    // keep apply_setting and flag handling in sync; the macro above mirrors
    // the config-file keys
    let _ = apply_setting;
    if let Some(k) = cfg.threads {
        // a second init (e.g. in tests) keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global();
    }
    Ok(cfg)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Generate { opts } => {
            let cfg = resolve(opts, "curve.obj")?;
            cmd_generate(&cfg)?;
        }
        Command::Flow { opts } => {
            let cfg = resolve(opts, "out")?;
            cmd_flow(&cfg)?;
        }
        Command::Energy { opts } => {
            let cfg = resolve(opts, "out")?;
            cmd_energy(&cfg)?;
        }
        Command::Diagnose { file, opts } => {
            let cfg = resolve(opts, "out")?;
            cmd_diagnose(file, &cfg)?;
        }
    }
    Ok(())
}
