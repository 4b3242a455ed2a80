//! `roughkit` command-line front end.

mod commands;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use util::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "roughkit", version, about = "Rough path experiments: lifts, signatures, sewing, RDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON file with subcommand parameters; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for CSV artifacts and manifest.json.
    #[arg(long, global = true, default_value = "roughkit-out")]
    pub out: PathBuf,
}

macro_rules! params {
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$m])*
        #[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $name {
            $($(#[$fm])* #[arg(long, value_delimiter = ',')] pub $field: Option<$ty>,)*
        }
    };
}

params!(FbmParams {
    /// Hurst parameter in (0, 1).
    hurst: f64,
    /// Number of grid cells.
    grid_n: usize,
    horizon: f64,
    dim: usize,
    seed: u64,
});

params!(LiftParams {
    /// brownian, fbm or file.
    source: String,
    /// ito or strat (Brownian source).
    mode: String,
    grid_n: usize,
    refinement: usize,
    dim: usize,
    depth: usize,
    hurst: f64,
    alpha: f64,
    horizon: f64,
    /// Sample path CSV (file source).
    input: PathBuf,
    seed: u64,
});

params!(ExtendParams {
    /// Rough path CSV; without it a smooth planar arc is lifted.
    input: PathBuf,
    /// Target depth.
    depth: usize,
    /// Declared Hölder exponent of the input.
    alpha: f64,
    /// Bisection levels per output cell.
    levels: usize,
    /// Cells of the built-in arc.
    grid_n: usize,
});

params!(SignatureParams {
    /// Sample path CSV.
    input: PathBuf,
    depth: usize,
});

params!(ShuffleParams {
    u: String,
    v: String,
});

params!(YoungParams {
    /// Integrand sample path CSV (operator-valued, row-major).
    integrand: PathBuf,
    /// Integrator sample path CSV.
    integrator: PathBuf,
    /// Cells of the built-in cos d(sin) example.
    grid_n: usize,
});

params!(RoughIntParams {
    grid_n: usize,
    refinement: usize,
    /// ito or strat.
    mode: String,
    dim: usize,
    horizon: f64,
    alpha: f64,
    seed: u64,
});

params!(RdeParams {
    /// geometric, rotation or sine.
    field: String,
    /// brownian or smooth.
    driver: String,
    mode: String,
    /// davie or picard.
    scheme: String,
    grid_n: usize,
    refinement: usize,
    horizon: f64,
    /// Initial value, comma separated.
    y0: Vec<f64>,
    seed: u64,
});

/// Linear RDE parameters; `matrices` (row-major `m × m`, one per driver
/// coordinate) is config-only.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearRdeParams {
    /// Truncation depth of the series.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Cells of the smooth driver before extension.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Bisection levels of the extension.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Initial value, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub y0: Option<Vec<f64>>,
    /// Diagonals of A_1 then A_2, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub diag: Option<Vec<f64>>,
    #[arg(skip)]
    pub matrices: Option<Vec<Vec<f64>>>,
}

params!(WongZakaiParams {
    field: String,
    /// Number of seeds; seeds are seed, seed+1, ...
    seeds: usize,
    seed: u64,
    master_level: u32,
    min_level: u32,
    max_level: u32,
    refinement: usize,
    alpha: f64,
});

params!(RogersParams {
    hurst: f64,
    p: f64,
    levels: u32,
    seeds: usize,
    /// First seed (default 0).
    seed: u64,
});

params!(LyonsParams {
    n_max: usize,
    seed: u64,
});

params!(NeoParams {
    alpha: f64,
    n: usize,
    s: f64,
    t: f64,
    /// Random tuples to test instead of a single one.
    samples: usize,
    seed: u64,
});

params!(SewingParams {
    /// young or brownian.
    germ: String,
    grid_n: usize,
    refinement: usize,
    alpha: f64,
    seed: u64,
});

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample fractional Brownian motion by Cholesky factorisation.
    SimulateFbm(Cmd<FbmParams>),
    /// Build a rough path: Brownian (Itô/Stratonovich), canonical lift of fBm or of a CSV path.
    Lift(Cmd<LiftParams>),
    /// Lyons extension of a rough path to higher depth.
    Extend(Cmd<ExtendParams>),
    /// Signature of a piecewise-linear path over its whole grid.
    Signature(Cmd<SignatureParams>),
    /// Shuffle product of two words.
    Shuffle(Cmd<ShuffleParams>),
    /// Young integral by sewing.
    YoungInt(Cmd<YoungParams>),
    /// Rough integral of (B, I) against a Brownian rough path.
    RoughInt(Cmd<RoughIntParams>),
    /// Solve an RDE with the Davie or Picard scheme.
    SolveRde(Cmd<RdeParams>),
    /// Power series solution of a linear RDE driven by an extended smooth path.
    LinearRde(Cmd<LinearRdeParams>),
    /// Wong-Zakai convergence of piecewise-linear approximations.
    WongZakai(Cmd<WongZakaiParams>),
    /// Dyadic p-variation sums of fBm across levels.
    RogersScan(Cmd<RogersParams>),
    /// Partial sums of the divergent series from the non-existence argument.
    LyonsDemo(Cmd<LyonsParams>),
    /// Check the neo-classical inequality.
    NeoClassical(Cmd<NeoParams>),
    /// Check the maximal inequality of the sewing construction.
    SewingCheck(Cmd<SewingParams>),
}

#[derive(Args, Debug)]
struct Cmd<P: Args> {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    params: P,
}

fn init_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("ROUGHKIT_THREADS") {
        let n: usize = v.parse().map_err(|_| util::usage(format!("ROUGHKIT_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(util::usage("ROUGHKIT_THREADS must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    use commands as c;
    match cli.command {
        Command::SimulateFbm(a) => c::simulate_fbm(&a.common, &a.params),
        Command::Lift(a) => c::lift(&a.common, &a.params),
        Command::Extend(a) => c::extend(&a.common, &a.params),
        Command::Signature(a) => c::signature(&a.common, &a.params),
        Command::Shuffle(a) => c::shuffle(&a.common, &a.params),
        Command::YoungInt(a) => c::young_int(&a.common, &a.params),
        Command::RoughInt(a) => c::rough_int(&a.common, &a.params),
        Command::SolveRde(a) => c::solve_rde(&a.common, &a.params),
        Command::LinearRde(a) => c::linear_rde(&a.common, &a.params),
        Command::WongZakai(a) => c::wong_zakai(&a.common, &a.params),
        Command::RogersScan(a) => c::rogers_scan(&a.common, &a.params),
        Command::LyonsDemo(a) => c::lyons_demo(&a.common, &a.params),
        Command::NeoClassical(a) => c::neo_classical(&a.common, &a.params),
        Command::SewingCheck(a) => c::sewing_check(&a.common, &a.params),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
