//! `selberg`: length caches, zeta values, zero counts, resonance lists and
//! their statistics for two-generator Schottky surfaces.
//!
//! Every file written starts with a `# manifest` comment line holding the
//! parameters it was produced with.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod manifest;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use selberg_core::Error;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  unexpected failure
  2  bad command line
  3  invalid parameters
  4  not a Schottky group (overlapping disks, non-hyperbolic element)
  5  word set too large or ambiguous length classes
  6  point below the evaluation floor or outside the Euler product region
  7  zero-finding failure (zero on a boundary, Newton divergence, no sign change)
  8  incomplete or insufficient resonance data
  9  file or format error";

#[derive(Parser)]
#[command(name = "selberg", version, about = "Resonances of Schottky surfaces via the Selberg zeta function", after_help = EXIT_CODES)]
struct Cli {
    /// Worker threads (affects wall time only, never output)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Surface, e.g. `X:12,13,14` or `Y:12,13,pi/2`
    #[arg(long)]
    spec: Option<String>,
    /// Length cache written by `selberg cache`
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Highest word length used (truncates a cache, or depth of a fresh build)
    #[arg(long)]
    nmax: Option<usize>,
}

#[derive(Args, Clone)]
struct EvalOpts {
    /// Adaptive truncation tolerance on |d_N / Z_N|
    #[arg(long, default_value_t = selberg_core::zeta::DEFAULT_TOL)]
    tol: f64,
    /// Lowest accepted Re s
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    floor: f64,
    /// Evaluate below the floor anyway
    #[arg(long)]
    force: bool,
}

#[derive(Args, Clone)]
struct Sampling {
    /// Rectangle `re0,re1,im0,im1`
    #[arg(long, allow_hyphen_values = true)]
    rect: String,
    /// Largest spacing between argument samples on an edge
    #[arg(long, default_value_t = 0.01)]
    min_spacing: f64,
}

#[derive(Args, Clone)]
struct Output {
    /// Output file (standard output if absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Series {
    /// Resonance CSV written by `selberg locate`
    #[arg(long)]
    resonances: PathBuf,
    /// Largest t
    #[arg(long)]
    t_max: f64,
    /// Spacing of t values (default t_max/100)
    #[arg(long)]
    t_step: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the length cache of a surface
    Cache {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluate Z and Z' at a point
    Eval {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        eval: EvalOpts,
        /// Point as `re,im`, `re` or `re+imi`
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[command(flatten)]
        out: Output,
    },
    /// Count zeros per bin by the argument principle
    Count {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        eval: EvalOpts,
        #[command(flatten)]
        sampling: Sampling,
        /// Bins `nx,ny`
        #[arg(long, default_value = "1,1")]
        bins: String,
        #[command(flatten)]
        out: Output,
    },
    /// Locate and refine all zeros in a rectangle
    Locate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        eval: EvalOpts,
        #[command(flatten)]
        sampling: Sampling,
        /// Target bin size of the finest counting grid
        #[arg(long, default_value_t = 0.01)]
        pixel: f64,
        /// Newton stopping tolerance on |Z|
        #[arg(long, default_value_t = 1e-10)]
        refine_tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Statistics of δ and of resonance lists
    #[command(subcommand)]
    Census(Census),
    /// Line plot (SVG) of the first two columns of a series CSV
    Plot {
        /// Series CSV
        #[arg(long)]
        input: PathBuf,
        /// Logarithmic axes
        #[arg(long)]
        loglog: bool,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum Census {
    /// Exponent of convergence δ and escape rate 1 − δ
    Delta {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = selberg_core::zeta::DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Strip counting function N(a0, a1; t) and its power-law fit
    Weyl {
        #[command(flatten)]
        series: Series,
        /// Strip `a0,a1` (closed below, open above)
        #[arg(long, allow_hyphen_values = true)]
        strip: String,
        /// Smallest t used by the fit
        #[arg(long, default_value_t = 0.0)]
        fit_min: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Count of resonances with |Im − t| ≤ w
    Window {
        #[command(flatten)]
        series: Series,
        #[arg(long)]
        window: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Largest real part within |Im − t| ≤ w
    Envelope {
        #[command(flatten)]
        series: Series,
        #[arg(long)]
        window: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Histogram of real parts
    Hist {
        #[arg(long)]
        resonances: PathBuf,
        /// `lo,hi`
        #[arg(long, allow_hyphen_values = true)]
        re_range: String,
        /// `lo,hi`
        #[arg(long, allow_hyphen_values = true)]
        im_range: String,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        #[command(flatten)]
        out: Output,
    },
    /// 2D density of resonances as CSV or PGM
    Density {
        #[arg(long)]
        resonances: PathBuf,
        /// Rectangle `re0,re1,im0,im1`
        #[arg(long, allow_hyphen_values = true)]
        rect: String,
        /// Bins `nx,ny`
        #[arg(long)]
        bins: String,
        /// Write a plain PGM image instead of CSV
        #[arg(long)]
        pgm: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Distance between δ and the rest of the spectrum
    Gap {
        #[arg(long)]
        resonances: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        im_max: f64,
        #[command(flatten)]
        out: Output,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<Error>() {
        return match e {
            Error::InvalidParameters(_) | Error::IndexOutOfRange { .. } => 3,
            Error::NotSchottky { .. } | Error::NonHyperbolic { .. } | Error::CorruptGroup(_) => 4,
            Error::TooLarge { .. } | Error::AmbiguousClasses { .. } => 5,
            Error::BelowFloor { .. } | Error::OutsideConvergence { .. } => 6,
            Error::OnPathZero { .. }
            | Error::BoundaryZero { .. }
            | Error::NoConvergence { .. }
            | Error::NoSignChange => 7,
            Error::IncompleteData(_) | Error::InsufficientData(_) => 8,
            Error::Parse { .. } | Error::Io(_) => 9,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 9;
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
