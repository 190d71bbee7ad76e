//! Command-line interface: ingest a corpus, build the spatial index, and
//! answer spatial event queries with a JSON report and optional GeoJSON.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/integrity error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vaguemap_core::config::{EngineConfig, FusionOp};
use vaguemap_core::corpus::CorpusStore;
use vaguemap_core::error::Error;
use vaguemap_core::extract::{read_mentions_jsonl, write_mentions_jsonl};
use vaguemap_core::gazetteer::Gazetteer;
use vaguemap_core::geojson::{emit_geojson, EmitOptions, MentionMarker};
use vaguemap_core::index::SpatialIndex;
use vaguemap_core::retrieval::{Engine, QueryPlan, RelevanceJudgment};

#[derive(Parser)]
#[command(
    name = "vaguemap",
    about = "Geographic retrieval over vague spatial language",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a corpus directory (*.txt) or JSONL file into a store.
    Ingest {
        /// Directory of .txt files (stem = doc id) or a .jsonl file with
        /// {"id", "text"} lines.
        #[arg(long)]
        corpus: PathBuf,
        /// Output store directory (docs.jsonl, stats.json).
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract mentions and build the two-level spatial index.
    Index {
        /// Corpus store directory produced by `ingest`.
        #[arg(long)]
        store: PathBuf,
        /// Gazetteer TSV file.
        #[arg(long)]
        gazetteer: PathBuf,
        /// Config directory (extraction.json, fuzzy.json, retrieval.json).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output index directory; self-contained for `query`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank documents for a spatial event query and resolve its location.
    Query(QueryArgs),
    /// Like `query`, but print per-document score breakdowns and rule
    /// traces as text.
    Explain {
        /// Index directory produced by `index`.
        #[arg(long)]
        index: PathBuf,
        /// The event query, e.g. "flood near Marina Beach".
        query: String,
        /// Override the number of returned documents.
        #[arg(long)]
        top: Option<usize>,
    },
}

#[derive(Args)]
struct QueryArgs {
    /// Index directory produced by `index`.
    #[arg(long)]
    index: PathBuf,
    /// The event query, e.g. "flood near Marina Beach".
    query: String,
    /// Override the number of returned documents.
    #[arg(long)]
    top: Option<usize>,
    /// Fusion operator for the location surfaces.
    #[arg(long, value_parser = parse_fusion)]
    fusion: Option<FusionOp>,
    /// Write a GeoJSON report to this path.
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Include the possibility raster in the emitted GeoJSON.
    #[arg(long, default_value_t = false)]
    raster: bool,
    /// Also print a per-document score breakdown to stderr.
    #[arg(long, default_value_t = false)]
    explain: bool,
}

fn parse_fusion(s: &str) -> Result<FusionOp, String> {
    match s {
        "min" => Ok(FusionOp::Min),
        "max" => Ok(FusionOp::Max),
        "avg" | "weighted_average" => Ok(FusionOp::WeightedAverage),
        other => Err(format!("unknown fusion mode {other:?} (expected min|max|avg)")),
    }
}

fn main() -> ExitCode {
    // Die quietly on closed pipes (e.g. `vaguemap explain ... | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems exit 1; --help/--version exit 0.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Bad query text is a usage problem; everything else that reaches here
/// is a data or integrity failure.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Query(_) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Ingest { corpus, out } => ingest(&corpus, &out),
        Command::Index {
            store,
            gazetteer,
            config,
            out,
        } => build_index(&store, &gazetteer, config.as_deref(), &out),
        Command::Query(args) => query(args),
        Command::Explain { index, query, top } => explain(&index, &query, top),
    }
}

fn ingest(corpus: &Path, out: &Path) -> Result<(), Error> {
    let mut store = CorpusStore::new();
    let count = if corpus.is_dir() {
        store.ingest_dir(corpus)?
    } else {
        store.ingest_jsonl(corpus)?
    };
    store.save(out)?;
    eprintln!("ingested {count} documents into {}", out.display());
    Ok(())
}

fn build_index(
    store_dir: &Path,
    gazetteer_path: &Path,
    config_dir: Option<&Path>,
    out: &Path,
) -> Result<(), Error> {
    let corpus = CorpusStore::load(store_dir)?;
    let gazetteer = Gazetteer::load(gazetteer_path)?;
    let config = match config_dir {
        Some(dir) => EngineConfig::load_dir(dir)?,
        None => EngineConfig::default(),
    };

    let engine = Engine::build(corpus, gazetteer, config)?;
    std::fs::create_dir_all(out)?;
    engine.index.save(out)?;
    let mut mentions_file = std::fs::File::create(out.join("mentions.jsonl"))?;
    write_mentions_jsonl(&mut mentions_file, &engine.mentions)?;

    // Make the index directory self-contained for `query`.
    engine.corpus.save(out)?;
    std::fs::copy(gazetteer_path, out.join("gazetteer.tsv"))?;
    engine.config.save_dir(&out.join("config"))?;

    eprintln!(
        "indexed {} documents ({} with mentions, {} spatial terms) into {}",
        engine.corpus.n_docs(),
        engine.mentions.len(),
        engine.index.level1.len(),
        out.display()
    );
    Ok(())
}

fn load_engine(index_dir: &Path) -> Result<Engine, Error> {
    if !index_dir.is_dir() {
        return Err(Error::Integrity(format!(
            "index directory {} does not exist",
            index_dir.display()
        )));
    }
    let corpus = CorpusStore::load(index_dir)?;
    let gazetteer = Gazetteer::load(&index_dir.join("gazetteer.tsv"))?;
    let config = EngineConfig::load_dir(&index_dir.join("config"))?;
    let mentions = read_mentions_jsonl(&index_dir.join("mentions.jsonl"))?;
    let index = SpatialIndex::load(index_dir)?;
    Ok(Engine::from_parts(corpus, gazetteer, mentions, index, config))
}

fn query(args: QueryArgs) -> Result<(), Error> {
    let engine = load_engine(&args.index)?;
    let mut plan = engine.parse_query(&args.query)?;
    if let Some(top) = args.top {
        plan.top_k = top.max(1);
    }
    if let Some(fusion) = args.fusion {
        plan.fusion = fusion;
    }

    let (judgments, trace) = engine.retrieve_traced(&plan)?;
    let resolution = match engine.resolve_event_location(&judgments, &plan) {
        Ok(res) => Some(res),
        Err(Error::NoLocation) => None,
        Err(e) => return Err(e),
    };

    let report = serde_json::json!({
        "plan": plan,
        "trace": trace,
        "judgments": judgments,
        "location": resolution.as_ref().map(|(loc, _)| loc),
        "location_error": if resolution.is_none() {
            Some("no spatial evidence among the ranked documents")
        } else {
            None
        },
    });
    println!("{}", serde_json::to_string_pretty(&report)?);

    if args.explain {
        for line in breakdown(&plan, &judgments) {
            eprintln!("{line}");
        }
    }

    if let Some(path) = &args.emit {
        let Some((location, grid)) = &resolution else {
            return Err(Error::NoLocation);
        };
        let markers: Vec<MentionMarker> = judgments
            .iter()
            .filter_map(|j| {
                engine.marker_point(&plan, j).map(|point| MentionMarker {
                    doc_id: j.doc_id.clone(),
                    score: j.final_score,
                    point,
                })
            })
            .collect();
        let geojson = emit_geojson(
            location,
            &markers,
            grid,
            &EmitOptions {
                raster: args.raster,
            },
        )?;
        std::fs::write(path, geojson)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn breakdown(plan: &QueryPlan, judgments: &[RelevanceJudgment]) -> Vec<String> {
    let mut lines = Vec::new();
    lines.push(format!("query: {}", plan.query_text));
    lines.push(format!(
        "event terms: [{}]  level: {}  top_k: {}",
        plan.event_terms.join(", "),
        plan.level,
        plan.top_k
    ));
    lines.push(match &plan.spatial_part {
        Some(part) => format!("spatial part: {}", part.term_key()),
        None => "spatial part: none".to_string(),
    });
    lines.push(String::new());
    for (rank, j) in judgments.iter().enumerate() {
        lines.push(format!(
            "#{:<2} {:<12} final={:.4} fuzzy={:.4} cosine={:.4}",
            rank + 1,
            j.doc_id,
            j.final_score,
            j.fuzzy_relevance,
            j.thematic_cosine
        ));
        lines.push(format!(
            "    swf_norm={:.4} gran_match={:.4} expr_overlap={:.4}",
            j.swf_norm, j.gran_match, j.expr_overlap
        ));
        for activation in &j.rule_trace {
            if activation.activation > 0.0 {
                lines.push(format!("    {:.3} <- {}", activation.activation, activation.rule));
            }
        }
    }
    lines
}

fn explain(index_dir: &Path, query_text: &str, top: Option<usize>) -> Result<(), Error> {
    let engine = load_engine(index_dir)?;
    let mut plan = engine.parse_query(query_text)?;
    if let Some(top) = top {
        plan.top_k = top.max(1);
    }
    let judgments = engine.retrieve(&plan)?;
    for line in breakdown(&plan, &judgments) {
        println!("{line}");
    }
    Ok(())
}
