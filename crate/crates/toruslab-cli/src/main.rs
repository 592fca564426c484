//! `toruslab`: reproducible experiment driver over the toruslab library.
//!
//! Global flags pick the output directory, config file, cache behavior, and
//! execution strategy; each subcommand resolves its remaining knobs from
//! flags, then the matching `[subcommand]` section of the config file, then
//! built-in defaults. Artifacts land under the output directory next to a
//! JSON manifest listing their content hashes, and expensive results are
//! memoized in a content-addressed cache under `<out>/cache`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 resource cap reached,
//! 4 numerical non-convergence.

mod cache;
mod config;
mod runners;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cache::Cache;
use config::Config;
use runners::{BuildingArgs, Ctx, EquidistArgs, ReportArgs};
use toruslab::exec::Strategy;
use toruslab::Result;

#[derive(Parser)]
#[command(
    name = "toruslab",
    version,
    about = "Packets of periodic torus orbits on spaces of lattices: \
             class-set enumeration, equidistribution statistics, and local \
             building reports"
)]
struct Cli {
    /// Config file: `key = value` lines under `[subcommand]` sections.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory (env TORUSLAB_OUT overrides; default ./toruslab-out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Recompute everything, bypassing the result cache.
    #[arg(long, global = true)]
    no_cache: bool,

    /// Force sequential execution (otherwise parallel when compiled in).
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Discriminant and signature of a monic integer polynomial.
    Disc {
        /// Polynomial, e.g. "x^3 - x - 1".
        #[arg(long)]
        poly: Option<String>,
    },
    /// List the ideal classes of Z[x]/(P) grouped into packets (CSV).
    Classes {
        #[arg(long)]
        poly: Option<String>,
    },
    /// Per-packet summary: class counts, regulators, torsion, volume (CSV).
    Packets {
        #[arg(long)]
        poly: Option<String>,
    },
    /// Weyl averages of a fixed test-function suite over a field family.
    Equidist {
        /// Family: "quadratic" (x^2 - k) or "cubic" (x^3 - kx - 1).
        #[arg(long)]
        family: Option<String>,
        /// Largest family parameter k.
        #[arg(long)]
        kmax: Option<u64>,
        /// Samples per packet orbit.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Deterministic grid sampling instead of Monte Carlo.
        #[arg(long)]
        grid: bool,
        /// Additionally dump one orbit's sample cloud as a binary64 stream.
        #[arg(long)]
        cloud: bool,
    },
    /// Unfolding check: orbit average of a Siegel transform against the
    /// unit-group-normalized integral, per coarse ideal class (JSON).
    Hecke {
        #[arg(long)]
        poly: Option<String>,
        /// How many coarse classes to check.
        #[arg(long)]
        count: Option<usize>,
        /// Gaussian width of the test function.
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Local report at p: discriminants, unit density, building distance,
    /// and orbital-integral values (CSV).
    Building {
        #[arg(long)]
        prime: Option<u64>,
        /// Analyze g C(P) g^{-1} for this P (single-datum mode).
        #[arg(long)]
        poly: Option<String>,
        /// Conjugator g as rational rows "a,b;c,d" (default: identity).
        #[arg(long)]
        conjugate: Option<String>,
        /// Random mode: number of split data to generate (ignored with --poly).
        #[arg(long)]
        count: Option<usize>,
        /// Random mode: matrix dimension (2 or 3).
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Largest radius r for the I(diag-valuation (r,0,..)) column.
        #[arg(long)]
        rmax: Option<i64>,
    },
    /// Class number formula check; optional partial zeta value and
    /// class-character sums (JSON).
    Zeta {
        #[arg(long)]
        poly: Option<String>,
        /// Ideal-norm cutoff for counting.
        #[arg(long)]
        bound: Option<u64>,
        /// Also evaluate the partial zeta sum at this real s > 1.
        #[arg(long)]
        s: Option<f64>,
        /// Also sum each nontrivial class character to delta*sqrt|disc|.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Census of integer matrices with a fixed characteristic polynomial
    /// whose radial projections land in a window (JSON; exit 3 if capped).
    CubeRoots {
        /// Defaults to "x^3 - 2".
        #[arg(long)]
        poly: Option<String>,
        /// Half-width of the per-entry projection window.
        #[arg(long)]
        window: Option<f64>,
        /// Census size cap.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Volume-discriminant trend over a family, or (with --charsum) the
    /// character-sum decay table over imaginary quadratic orders.
    Report {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        kmax: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Emit the character-sum decay table instead of the trend.
        #[arg(long)]
        charsum: bool,
        /// Character-sum cutoff multiplier (with --charsum).
        #[arg(long)]
        delta: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let out = std::env::var_os("TORUSLAB_OUT")
        .map(PathBuf::from)
        .or(cli.out)
        .or_else(|| cfg.get("", "out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("toruslab-out"));
    std::fs::create_dir_all(&out)?;
    let cache = Cache::new(&out, !cli.no_cache);
    let strategy = if cfg!(feature = "parallel") && !cli.sequential {
        Strategy::Parallel
    } else {
        Strategy::Sequential
    };
    let ctx = Ctx { out, cfg, cache, strategy };

    match cli.cmd {
        Cmd::Disc { poly } => runners::run_disc(&ctx, poly),
        Cmd::Classes { poly } => runners::run_classes(&ctx, poly),
        Cmd::Packets { poly } => runners::run_packets(&ctx, poly),
        Cmd::Equidist { family, kmax, samples, seed, grid, cloud } => {
            runners::run_equidist(&ctx, EquidistArgs { family, kmax, samples, seed, grid, cloud })
        }
        Cmd::Hecke { poly, count, sigma } => runners::run_hecke(&ctx, poly, count, sigma),
        Cmd::Building { prime, poly, conjugate, count, dim, seed, rmax } => runners::run_building(
            &ctx,
            BuildingArgs { prime, poly, conjugate, count, dim, seed, rmax },
        ),
        Cmd::Zeta { poly, bound, s, delta } => runners::run_zeta(&ctx, poly, bound, s, delta),
        Cmd::CubeRoots { poly, window, cap } => runners::run_cube_roots(&ctx, poly, window, cap),
        Cmd::Report { family, kmax, seed, charsum, delta } => {
            runners::run_report(&ctx, ReportArgs { family, kmax, seed, charsum, delta })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
