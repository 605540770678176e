use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use divcar::corpus::{self, CorpusFormat, Ecosystem, GenParams, Query};
use divcar::error::Error;
use divcar::graph::{build_graph, ApiGraph, GraphSnapshot};
use divcar::pipeline::{
    self, EvaluateOptions, PipelineParams, RecommendOutcome, RecommendationOutput,
};
use divcar::ranker::ScoringMode;

#[derive(Parser)]
#[command(name = "divcar", version, about = "Diverse, compatible API set recommendation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Corpus file to read.
    #[arg(long)]
    input: PathBuf,
    /// Corpus format: app-api-csv or ecosystem-json.
    #[arg(long, default_value = "ecosystem-json")]
    format: String,
}

#[derive(Args)]
struct ParamArgs {
    /// Number of subgraph samples.
    #[arg(short = 'z', long = "samples", default_value_t = 100)]
    z: usize,
    /// Target vertex count per sample.
    #[arg(short = 'p', long = "sample-size", default_value_t = 100)]
    p: usize,
    /// Maximum recommendations returned.
    #[arg(short = 'K', long = "top-k", default_value_t = 10)]
    k: usize,
    /// Pairwise diversity threshold in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Include wall times in the output.
    #[arg(long, default_value_t = false)]
    timings: bool,
}

impl ParamArgs {
    fn pipeline(&self) -> PipelineParams {
        PipelineParams {
            z: self.z,
            p: self.p,
            k: self.k,
            theta: self.theta,
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a deterministic ecosystem and write it as JSON.
    Gen {
        #[arg(long, default_value_t = 100)]
        n_apis: usize,
        #[arg(long, default_value_t = 400)]
        n_apps: usize,
        #[arg(long, default_value_t = 30)]
        n_keywords: usize,
        /// Power-law exponent for API popularity.
        #[arg(long, default_value_t = 0.8)]
        popularity_skew: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the API correlation graph and write its snapshot as JSON.
    BuildGraph {
        #[command(flatten)]
        input: InputArgs,
        /// Keep only the largest connected component.
        #[arg(long, default_value_t = false)]
        max_component: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recommend up to K diverse API sets covering the query keywords.
    Recommend {
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated query keywords.
        #[arg(long)]
        query: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive full-graph baseline for the same query.
    Baseline {
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated query keywords.
        #[arg(long)]
        query: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the pipeline over queries derived from the corpus.
    Evaluate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Smallest derived-query length kept.
        #[arg(long)]
        r_min: Option<usize>,
        /// Largest derived-query length kept.
        #[arg(long)]
        r_max: Option<usize>,
        /// Remove each app's own co-usage before recommending to it.
        #[arg(long, default_value_t = false)]
        leave_one_out: bool,
        /// Cap on evaluated queries.
        #[arg(long)]
        max_queries: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate across a grid of sample counts.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Comma-separated z values; defaults to 10,20,...,100.
        #[arg(long)]
        z_grid: Option<String>,
        #[arg(long)]
        r_min: Option<usize>,
        #[arg(long)]
        r_max: Option<usize>,
        #[arg(long, default_value_t = false)]
        leave_one_out: bool,
        #[arg(long)]
        max_queries: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::UncoverableKeyword(_) => ExitCode::from(2),
                Error::Parse { .. } => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Gen { n_apis, n_apps, n_keywords, popularity_skew, seed, out } => {
            let params = GenParams {
                n_apis,
                n_apps,
                n_keywords,
                popularity_skew,
                seed,
                ..Default::default()
            };
            let eco = corpus::gen_synthetic(&params)?;
            emit(&eco.to_json()?, out.as_deref())
        }
        Command::BuildGraph { input, max_component, out } => {
            let eco = load(&input)?;
            let mut g = build_graph(&eco);
            if max_component {
                g = divcar::graph::max_component(&g)?;
            }
            let snapshot: GraphSnapshot = g.snapshot();
            emit(&serde_json::to_string_pretty(&snapshot)?, out.as_deref())
        }
        Command::Recommend { input, query, params, out } => {
            let (eco, g, q) = graph_and_query(&input, &query)?;
            let outcome =
                pipeline::recommend(&g, &q, &params.pipeline(), ScoringMode::Deployment, None)?;
            emit_recommendations(&q, &outcome, &eco, &params, out.as_deref())
        }
        Command::Baseline { input, query, params, out } => {
            let (eco, g, q) = graph_and_query(&input, &query)?;
            let outcome =
                pipeline::baseline(&g, &q, &params.pipeline(), ScoringMode::Deployment, None)?;
            emit_recommendations(&q, &outcome, &eco, &params, out.as_deref())
        }
        Command::Evaluate {
            input,
            params,
            r_min,
            r_max,
            leave_one_out,
            max_queries,
            out,
        } => {
            let eco = load(&input)?;
            let opts = EvaluateOptions {
                r_filter: r_bounds(r_min, r_max),
                leave_one_out,
                max_queries,
                with_timings: params.timings,
            };
            let report = pipeline::evaluate(&eco, &params.pipeline(), &opts)?;
            // JSON-lines: one instance per line, then one aggregate line
            let mut lines = Vec::with_capacity(report.instances.len() + 2);
            for inst in &report.instances {
                lines.push(serde_json::to_string(inst)?);
            }
            for skip in &report.skipped {
                lines.push(serde_json::to_string(skip)?);
            }
            lines.push(serde_json::to_string(&serde_json::json!({
                "aggregate": report.aggregate,
                "params": report.params,
                "leave_one_out": report.leave_one_out,
            }))?);
            emit(&lines.join("\n"), out.as_deref())
        }
        Command::Sweep {
            input,
            params,
            z_grid,
            r_min,
            r_max,
            leave_one_out,
            max_queries,
            out,
        } => {
            let eco = load(&input)?;
            let grid = match z_grid {
                Some(text) => parse_grid(&text)?,
                None => (1..=10).map(|i| i * 10).collect(),
            };
            let opts = EvaluateOptions {
                r_filter: r_bounds(r_min, r_max),
                leave_one_out,
                max_queries,
                with_timings: params.timings,
            };
            let cells = pipeline::sweep(&eco, &params.pipeline(), &opts, &grid)?;
            // JSON-lines: one aggregate line per grid cell
            let lines: Vec<String> = cells
                .iter()
                .map(serde_json::to_string)
                .collect::<Result<_, _>>()?;
            emit(&lines.join("\n"), out.as_deref())
        }
    }
}

fn load(input: &InputArgs) -> Result<Ecosystem, Error> {
    let format: CorpusFormat = input.format.parse()?;
    corpus::load_ecosystem(&input.input, format)
}

fn graph_and_query(input: &InputArgs, query: &str) -> Result<(Ecosystem, ApiGraph, Query), Error> {
    let eco = load(input)?;
    let q = Query::new(query.split(','))?;
    let g = build_graph(&eco);
    // fail fast, before sampling, if some keyword has no vertex at all
    divcar::graph::keyword_nodes(&g, &q)?;
    Ok((eco, g, q))
}

fn r_bounds(r_min: Option<usize>, r_max: Option<usize>) -> Option<(usize, usize)> {
    match (r_min, r_max) {
        (None, None) => None,
        (lo, hi) => Some((lo.unwrap_or(1), hi.unwrap_or(usize::MAX))),
    }
}

fn parse_grid(text: &str) -> Result<Vec<usize>, Error> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parameter(format!("bad z grid entry {s:?}")))
        })
        .collect()
}

fn emit_recommendations(
    q: &Query,
    outcome: &RecommendOutcome,
    eco: &Ecosystem,
    params: &ParamArgs,
    out: Option<&std::path::Path>,
) -> Result<(), Error> {
    let projected = RecommendationOutput::new(q, outcome, Some(eco), params.timings);
    emit(&serde_json::to_string_pretty(&projected)?, out)
}

fn emit(text: &str, out: Option<&std::path::Path>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}
