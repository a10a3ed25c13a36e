//! `hcycle`: exact and approximate `h`-cycle counting from the command line.

mod commands;
mod output;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hcycle::{Mode, ScaleMode};

const CSV_SCHEMA: &str = "\
Graph files: a header line `n mode` (mode is `directed` or `undirected`),
then one `u v` edge per line with 0-based ids. `#` starts a comment line.
Vertex-set files: whitespace-separated vertex ids.

CSV schemas (one header row, then data rows):
  exact        n,h,mode,total
  approx       n,h,eps,seed,scale_mode,estimate,stopping_i,fallback,inconclusive,
               scalar_mults,mm_calls,distinct_shapes,max_min_dim
  find-heavy   vertex,branch,lambda,tau             (one row per heavy vertex)
  count-heavy  n,h,set_size,a,b,eps,seed,estimate,scalar_mults,mm_calls
  gen          name,graph,truth,n,h,mode,total       (one row per file pair)
  bench        n,t,h,mode,eps,seeds,estimate,oracle,scalar_mults,mm_calls,
               distinct_shapes,max_min_dim,success_rate,success,fallbacks,status
In bench rows, estimate, scalar_mults and mm_calls are medians over the
paired seeds, success means the median estimate lies in oracle (1 +- eps),
and status is `ok`, `exact-fallback` (every seed fell back to enumeration)
or `infeasible: <reason>`. Cells are written in sweep order.

Exit codes: 0 success, 2 input error, 3 budget or overflow, 4 internal
invariant breach.";

#[derive(Parser, Debug)]
#[command(name = "hcycle", version, about = "Exact and approximate h-cycle counting", after_long_help = CSV_SCHEMA)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by the analysis commands.
#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Constant scheme: literal formulas (`paper`) or desk-scale defaults.
    #[arg(long, default_value = "tuned")]
    pub scale_mode: ScaleMode,
    /// Override one estimator constant; repeatable.
    #[arg(long = "cfg", value_name = "KEY=VALUE")]
    pub cfg: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate every h-cycle.
    Exact {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        h: usize,
        /// Include per-vertex counts (JSON only).
        #[arg(long)]
        per_vertex: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run the doubling estimator.
    Approx {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        h: usize,
        /// Relative accuracy target; defaults to 0.25.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Report the vertices on at least Λ cycles.
    FindHeavy {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        seed: u64,
        /// Keep the per-vector vote tallies in the JSON report.
        #[arg(long)]
        tallies: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the number of cycles meeting a vertex set.
    CountHeavy {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        h: usize,
        /// File with the vertex ids of S.
        #[arg(long)]
        set: PathBuf,
        /// Lower end of the per-vertex count band.
        #[arg(long)]
        a: f64,
        /// Upper end of the per-vertex count band.
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Generate instances with certified ground truth.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Sweep (n, t) cells of planted instances through the estimator.
    Bench {
        /// Vertex counts, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Planted cycle counts, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<u64>,
        #[arg(long, default_value_t = 3)]
        h: usize,
        #[arg(long, default_value = "undirected")]
        mode: Mode,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        /// First seed; cell c, run r uses seed + r for every c (paired).
        #[arg(long)]
        seed: u64,
        /// Runs per cell.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        #[arg(long, value_enum, default_value_t = sweep::Family::Cliques)]
        family: sweep::Family,
        /// Background edges of the clique family.
        #[arg(long, default_value_t = 200)]
        background: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// One planted instance; `spec` is a JSON object such as
    /// `{"kind":"disjoint","cycles":5}`.
    Planted {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        mode: Mode,
        #[arg(long)]
        spec: String,
        #[arg(long)]
        seed: u64,
        /// Output prefix: writes PREFIX.txt and PREFIX.truth.json.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// The ten-instance reference corpus, into a directory.
    Corpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Triangle blow-up of a random tripartite graph.
    Blowup {
        #[command(flatten)]
        tri: commands::TripartiteArgs,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Layered h-cycle gadget of a random tripartite graph.
    Layering {
        #[command(flatten)]
        tri: commands::TripartiteArgs,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        t: u64,
        #[arg(long)]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

fn run(cli: Cli) -> hcycle::Result<()> {
    match cli.command {
        Command::Exact { input, h, per_vertex, common } => commands::exact(&input, h, per_vertex, &common),
        Command::Approx { input, h, eps, seed, common } => commands::approx(&input, h, eps, seed, &common),
        Command::FindHeavy { input, h, lambda, seed, tallies, common } => {
            commands::find_heavy(&input, h, lambda, seed, tallies, &common)
        }
        Command::CountHeavy { input, h, set, a, b, eps, seed, common } => {
            commands::count_heavy(&input, h, &set, (a, b), eps, seed, &common)
        }
        Command::Gen { what } => match what {
            GenCommand::Planted { n, h, mode, spec, seed, out, format } => {
                commands::gen_planted(n, h, mode, &spec, seed, &out, format)
            }
            GenCommand::Corpus { out, format } => commands::gen_corpus(&out, format),
            GenCommand::Blowup { tri, t, out, format } => commands::gen_blowup(&tri, t, &out, format),
            GenCommand::Layering { tri, h, t, mode, out, format } => commands::gen_layering(&tri, h, t, mode, &out, format),
        },
        Command::Bench { n, t, h, mode, eps, seed, seeds, family, background, common } => {
            let grid = sweep::Grid { ns: n, ts: t, h, mode, eps, seed, seeds, family, background };
            sweep::run(&grid, &common)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
