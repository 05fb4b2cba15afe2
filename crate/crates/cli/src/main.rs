//! Batch front end: experiment configs in, CSV/JSON/SVG artifacts out.

mod plot;
mod runs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "lochs",
    version,
    about = "Dispersion-adapted local Sobolev norms, spectral solvers, and an estimate harness"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dispersion symbol's derivative bounds on a dyadic grid.
    ValidateSymbol {
        /// "schrodinger", "airy", or "poly:[c1,c2,...]".
        #[arg(long)]
        symbol: String,
        /// Highest derivative order checked.
        #[arg(long, default_value_t = 6)]
        k_max: u32,
        /// Grid is {+/- 2^j : 0 <= j <= grid_max_exp}.
        #[arg(long, default_value_t = 10)]
        grid_max_exp: u32,
    },
    /// Evaluate the adapted norm of a data file; prints value, per-block
    /// table and the certified sampling gap.
    Norm {
        /// Data JSON (see README for the schema).
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        s: f64,
        /// Symbol fixing the window exponent sigma.
        #[arg(long, default_value = "schrodinger")]
        symbol: String,
        #[arg(long, value_parser = runs::parse_sup_mode, default_value = "lattice")]
        mode: lochs::SupMode,
        /// Evaluate on the grid backend (data must carry grid parameters).
        #[arg(long)]
        grid: bool,
    },
    /// Evolve under the free flow and emit a time-series CSV.
    EvolveLinear {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "schrodinger")]
        symbol: String,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        /// Comma-separated times.
        #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")]
        times: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a nonlinear equation; emits trajectory JSON plus a diagnostics
    /// CSV (t, norm_s, norm_c1, spectrum_size, pruned_mass).
    Evolve {
        /// Full experiment config (equation/data/solve/norms/output).
        #[arg(long, conflicts_with_all = ["equation", "data"])]
        config: Option<PathBuf>,
        /// Equation JSON fragment.
        #[arg(long, requires = "data")]
        equation: Option<PathBuf>,
        /// Data JSON fragment.
        #[arg(long, requires = "equation")]
        data: Option<PathBuf>,
        /// Final time (overrides the config).
        #[arg(long)]
        t: Option<f64>,
        /// Time nodes including t = 0.
        #[arg(long)]
        nodes: Option<usize>,
        /// Regularization level; omitting it requires Q = 0.
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        backend: Option<String>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Solve across the configured regularization levels and tabulate the
    /// Cauchy differences.
    CauchyStudy {
        #[arg(long)]
        config: PathBuf,
    },
    /// Build the frequency envelope of a data file.
    Envelope {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value = "schrodinger")]
        symbol: String,
    },
    /// Solve on the exact backend and check spectrum containment.
    ApCheck {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the randomized estimate suite; exit code 0 iff all cases pass.
    Verify {
        /// Run a single named case instead of the whole registry.
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the full JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Render a diagnostics CSV to a static SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Column for the x axis.
        #[arg(long, default_value = "t")]
        x: String,
        /// Comma-separated y columns (default: every numeric column).
        #[arg(long)]
        y: Option<String>,
        /// Log-log axes with a fitted slope annotation.
        #[arg(long)]
        loglog: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            return ExitCode::from(1);
        }
    }
    match runs::dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            ExitCode::from(1)
        }
    }
}
