//! Command-line interface: every pipeline stage as a deterministic,
//! scriptable subcommand. Reports go to stdout as JSON; corpora and CSVs go
//! to files, written atomically. Exit codes: 0 success, 1 domain error,
//! 2 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use queryseg::agreement::{
    adjudicate_majority, entity_agreement, qc_core_product, token_agreement, TokenCategory,
};
use queryseg::augment::{augment_corpus, AugmentSpec, Transform};
use queryseg::corpus::{
    ingest_offsets, parse_conll, parse_offset_records, parse_raw_queries, serialize_conll, Corpus,
};
use queryseg::eval::{aggregate_runs, rank_sum_test, repair_conlleval, score, validate_bio, RepairPolicy};
use queryseg::lexicon::{build_lexicon, MentionLexicon};
use queryseg::ontology::TagOntology;
use queryseg::relax::{generate_variants, Strategy};
use queryseg::retrieval::{
    compare_variants, delta_bins_csv, index_products, tokenize, ProductIndex, DEFAULT_TOP_N,
};
use queryseg::stats::{combine_stats, corpus_stats, emit_hist, HistKind};

#[derive(Parser)]
#[command(name = "queryseg", version, about = "Corpus engineering for BIO-tagged search queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RepairArg {
    Conlleval,
    None,
}

impl From<RepairArg> for RepairPolicy {
    fn from(arg: RepairArg) -> Self {
        match arg {
            RepairArg::Conlleval => RepairPolicy::Conlleval,
            RepairArg::None => RepairPolicy::None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformArg {
    Shuffled,
    Butterfinger,
    Numeric,
    Color,
    MentionReplacement,
    All,
}

impl From<TransformArg> for Transform {
    fn from(arg: TransformArg) -> Self {
        match arg {
            TransformArg::Shuffled => Transform::Shuffled,
            TransformArg::Butterfinger => Transform::Butterfinger,
            TransformArg::Numeric => Transform::Numeric,
            TransformArg::Color => Transform::Color,
            TransformArg::MentionReplacement => Transform::MentionReplacement,
            TransformArg::All => Transform::All,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    TokenDropK,
    EntityDropKeepCore,
}

#[derive(Clone, Copy, ValueEnum)]
enum GranularityArg {
    Token,
    Entity,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum CategoryArg {
    FullLabel,
    TypeOnly,
}

#[derive(Args)]
struct OntologyArg {
    /// Ontology file (one type per line); defaults to the built-in 17 types.
    #[arg(long, global = true)]
    ontology: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Report BIO violations in a corpus (a linter: exits 0 unless --strict).
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "gold")]
        layer: String,
        /// Exit 1 when violations are found.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        ontology: OntologyArg,
    },
    /// Rewrite every stray I-X to B-X and write the repaired corpus.
    Repair {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "gold")]
        layer: String,
        #[command(flatten)]
        ontology: OntologyArg,
    },
    /// Entity-level P/R/F1 of prediction files against a gold file.
    Score {
        /// Prediction corpus; repeat for multi-seed runs.
        #[arg(long, required = true)]
        pred: Vec<PathBuf>,
        #[arg(long)]
        gold: PathBuf,
        /// Baseline prediction runs for a rank-sum comparison.
        #[arg(long)]
        baseline: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "conlleval")]
        repair: RepairArg,
        #[command(flatten)]
        ontology: OntologyArg,
    },
    /// Inter-annotator agreement over two or more annotation files.
    Agree {
        /// One corpus file per annotator.
        #[arg(long = "in", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        granularity: GranularityArg,
        /// Token-level category: full BIO label or type only.
        #[arg(long, value_enum, default_value = "full-label")]
        category: CategoryArg,
        #[command(flatten)]
        ontology: OntologyArg,
    },
    /// Merge exactly three annotation files into a gold standard.
    Adjudicate {
        #[arg(long = "in", required = true)]
        inputs: Vec<PathBuf>,
        /// Output path for the adjudicated gold corpus.
        #[arg(long)]
        out: PathBuf,
        /// Optional CSV of disputed spans for human review.
        #[arg(long)]
        conflicts: Option<PathBuf>,
        #[command(flatten)]
        ontology: OntologyArg,
    },
    /// Flag queries with zero or multiple core product mentions.
    Qc {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "gold")]
        layer: String,
        #[command(flatten)]
        ontology: OntologyArg,
    },
    /// Corpus statistics: counts, type histogram, length distributions.
    Stats {
        /// Corpus file; repeat for per-split plus combined statistics.
        #[arg(long = "in", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "gold")]
        layer: String,
        #[arg(long, value_enum, default_value = "conlleval")]
        repair: RepairArg,
        /// Write the combined query-length histogram CSV here.
        #[arg(long)]
        query_hist: Option<PathBuf>,
        /// Write the combined entity-length histogram CSV here.
        #[arg(long)]
        entity_hist: Option<PathBuf>,
        #[command(flatten)]
        ontology: OntologyArg,
    },
    /// Build a mention lexicon (with co-occurrence index) from a corpus.
    Lexicon {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "gold")]
        layer: String,
        /// Color mentions longer than this are dropped as likely mislabels.
        #[arg(long, default_value_t = 2)]
        max_color_tokens: usize,
        #[command(flatten)]
        ontology: OntologyArg,
    },
    /// Apply an augmentation transform to every query of a corpus.
    Augment {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        transform: TransformArg,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "gold")]
        layer: String,
        /// Lexicon JSONL (required for color, mention-replacement, all).
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        typo_prob: f64,
        /// Emit originals followed by transformed copies (`+aug` ids).
        #[arg(long)]
        concat: bool,
        /// Sidecar JSONL audit log of anchors and replaced spans.
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        ontology: OntologyArg,
    },
    /// Generate relaxation variants (token drop / entity drop).
    Relax {
        #[arg(long = "in")]
        input: PathBuf,
        /// Output JSONL of variants.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["token-drop-k", "entity-drop-keep-core"])]
        strategies: Vec<StrategyArg>,
        /// Tokens to drop for token-drop-k.
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value = "gold")]
        layer: String,
        #[command(flatten)]
        ontology: OntologyArg,
    },
    /// Build an inverted product index from a titles TSV (id, title).
    Index {
        #[arg(long)]
        titles: PathBuf,
        /// Output JSONL index.
        #[arg(long)]
        out: PathBuf,
    },
    /// Search originals and variants, binning recall/relevance deltas.
    Simulate {
        /// Prebuilt index JSONL (or use --titles).
        #[arg(long, conflicts_with = "titles")]
        index: Option<PathBuf>,
        #[arg(long)]
        titles: Option<PathBuf>,
        /// Original queries as TSV (id, text).
        #[arg(long)]
        queries: PathBuf,
        /// Variants JSONL produced by `relax`.
        #[arg(long)]
        variants: PathBuf,
        /// Output CSV of delta histograms.
        #[arg(long)]
        out: PathBuf,
        /// Result-list depth for the relevance aggregate.
        #[arg(long, default_value_t = DEFAULT_TOP_N)]
        top_n: usize,
    },
    /// Materialize a corpus from token offsets and raw query strings.
    Ingest {
        /// Offset records: query_id, start, end, label (tab-separated).
        #[arg(long)]
        offsets: PathBuf,
        /// Raw queries as TSV (id, text) or JSONL ({"id","text"}).
        #[arg(long)]
        raw: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "gold")]
        layer: String,
        #[command(flatten)]
        ontology: OntologyArg,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn load_ontology(arg: &OntologyArg) -> Result<TagOntology> {
    match &arg.ontology {
        None => Ok(TagOntology::default()),
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading ontology {}", path.display()))?;
            TagOntology::from_lines(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
        }
    }
}

fn read_corpus(path: &Path, ontology: &TagOntology, layer: &str) -> Result<Corpus> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut corpus =
        parse_conll(&text, ontology, layer).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    corpus.split = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "other".to_owned());
    Ok(corpus)
}

/// Writes via a temporary file in the target directory plus rename, so
/// readers never observe partial output.
fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .with_context(|| format!("creating temp file next to {}", path.display()))?;
    tmp.write_all(content.as_bytes())?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn print_report(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// Layer name for an annotator file: its file stem.
fn stem_layer(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "layer".to_owned())
}

/// Merges single-layer corpora (one per annotator) into one multi-layer
/// corpus, matching queries by id and requiring identical tokens.
fn merge_annotators(files: &[PathBuf], ontology: &TagOntology) -> Result<(Corpus, Vec<String>)> {
    let mut layers = Vec::new();
    let mut merged: Option<Corpus> = None;
    for path in files {
        let layer = stem_layer(path);
        let corpus = read_corpus(path, ontology, &layer)?;
        merged = Some(match merged {
            None => corpus,
            Some(base) => {
                let queries = base
                    .queries()
                    .iter()
                    .map(|query| {
                        let other = corpus.get(query.id()).ok_or_else(|| {
                            anyhow!("{}: missing query {}", path.display(), query.id())
                        })?;
                        if other.tokens() != query.tokens() {
                            bail!("{}: tokens differ for query {}", path.display(), query.id());
                        }
                        let mut query = query.clone();
                        query
                            .add_layer(&layer, other.layer(&layer).expect("just parsed").to_vec())
                            .map_err(|e| anyhow!("query {}: {e}", other.id()))?;
                        Ok(query)
                    })
                    .collect::<Result<Vec<_>>>()?;
                if corpus.len() != queries.len() {
                    bail!("{}: extra queries not present in the first file", path.display());
                }
                Corpus::new(base.split.clone(), queries)?
            }
        });
        layers.push(layer);
    }
    let merged = merged.ok_or_else(|| anyhow!("no input files"))?;
    Ok((merged, layers))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Validate {
            input,
            layer,
            strict,
            ontology,
        } => {
            let ontology = load_ontology(&ontology)?;
            let corpus = read_corpus(&input, &ontology, &layer)?;
            let mut violations = Vec::new();
            for query in corpus.queries() {
                let labels = query
                    .layer(&layer)
                    .ok_or_else(|| anyhow!("query {} has no layer {layer}", query.id()))?;
                for v in validate_bio(labels) {
                    violations.push(json!({
                        "query_id": query.id(),
                        "position": v.position,
                        "description": v.description,
                    }));
                }
            }
            let count = violations.len();
            print_report(&json!({ "violations": violations, "count": count }))?;
            if strict && count > 0 {
                std::process::exit(1);
            }
        }
        Command::Repair {
            input,
            out,
            layer,
            ontology,
        } => {
            let ontology = load_ontology(&ontology)?;
            let corpus = read_corpus(&input, &ontology, &layer)?;
            let mut repaired_labels = 0usize;
            let queries = corpus
                .queries()
                .iter()
                .map(|query| {
                    let labels = query.layer(&layer).expect("parsed with this layer");
                    let repaired = repair_conlleval(labels);
                    repaired_labels += repaired
                        .iter()
                        .zip(labels)
                        .filter(|(a, b)| a != b)
                        .count();
                    queryseg::corpus::TaggedQuery::new(
                        query.id(),
                        query.tokens().to_vec(),
                        &layer,
                        repaired,
                    )
                    .map_err(Into::into)
                })
                .collect::<Result<Vec<_>>>()?;
            let repaired = Corpus::new(corpus.split.clone(), queries)?;
            write_atomic(&out, &serialize_conll(&repaired, &layer)?)?;
            print_report(&json!({
                "queries": repaired.len(),
                "repaired_labels": repaired_labels,
                "out": out.display().to_string(),
            }))?;
        }
        Command::Score {
            pred,
            gold,
            baseline,
            repair,
            ontology,
        } => {
            let ontology = load_ontology(&ontology)?;
            let gold_corpus = read_corpus(&gold, &ontology, "gold")?;
            let repair: RepairPolicy = repair.into();
            let score_files = |files: &[PathBuf]| -> Result<Vec<_>> {
                files
                    .iter()
                    .map(|path| {
                        let pred_corpus = read_corpus(path, &ontology, "pred")?;
                        score(&pred_corpus, "pred", &gold_corpus, "gold", repair)
                            .map_err(|e| anyhow!("{}: {e}", path.display()))
                    })
                    .collect()
            };
            let reports = score_files(&pred)?;
            let mut output = if reports.len() == 1 && baseline.is_empty() {
                serde_json::to_value(&reports[0])?
            } else {
                json!({
                    "runs": reports,
                    "aggregate": aggregate_runs(&reports)?,
                })
            };
            if !baseline.is_empty() {
                let baseline_reports = score_files(&baseline)?;
                let f1 = |rs: &[queryseg::eval::EvalReport]| {
                    rs.iter().map(|r| r.micro.f1).collect::<Vec<_>>()
                };
                let p_value = rank_sum_test(&f1(&reports), &f1(&baseline_reports))?;
                output["baseline_aggregate"] =
                    serde_json::to_value(aggregate_runs(&baseline_reports)?)?;
                output["rank_sum_p_value_f1"] = json!(p_value);
            }
            print_report(&output)?;
        }
        Command::Agree {
            inputs,
            granularity,
            category,
            ontology,
        } => {
            let ontology = load_ontology(&ontology)?;
            let (corpus, layers) = merge_annotators(&inputs, &ontology)?;
            let category = match category {
                CategoryArg::FullLabel => TokenCategory::FullLabel,
                CategoryArg::TypeOnly => TokenCategory::TypeOnly,
            };
            let mut output = serde_json::Map::new();
            if matches!(granularity, GranularityArg::Token | GranularityArg::Both) {
                let report = token_agreement(&corpus, &layers, category)?;
                output.insert("token".to_owned(), serde_json::to_value(&report)?);
            }
            if matches!(granularity, GranularityArg::Entity | GranularityArg::Both) {
                let report = entity_agreement(&corpus, &layers)?;
                output.insert("entity".to_owned(), serde_json::to_value(&report)?);
            }
            print_report(&serde_json::Value::Object(output))?;
        }
        Command::Adjudicate {
            inputs,
            out,
            conflicts,
            ontology,
        } => {
            let ontology = load_ontology(&ontology)?;
            let (corpus, layers) = merge_annotators(&inputs, &ontology)?;
            let result = adjudicate_majority(&corpus, &layers)?;
            write_atomic(&out, &serialize_conll(&result.gold, "gold")?)?;
            if let Some(path) = &conflicts {
                write_atomic(path, &result.conflicts_csv())?;
            }
            print_report(&json!({
                "queries": result.gold.len(),
                "conflicts": result.conflicts.len(),
                "qc_flags": result.qc_flags,
                "out": out.display().to_string(),
            }))?;
        }
        Command::Qc {
            input,
            layer,
            ontology,
        } => {
            let ontology = load_ontology(&ontology)?;
            let corpus = read_corpus(&input, &ontology, &layer)?;
            let flags = qc_core_product(&corpus, &layer)?;
            print_report(&json!({ "count": flags.len(), "flags": flags }))?;
        }
        Command::Stats {
            inputs,
            layer,
            repair,
            query_hist,
            entity_hist,
            ontology,
        } => {
            let ontology = load_ontology(&ontology)?;
            let repair: RepairPolicy = repair.into();
            let mut splits = serde_json::Map::new();
            let mut parts = Vec::new();
            for path in &inputs {
                let corpus = read_corpus(path, &ontology, &layer)?;
                let stats = corpus_stats(&corpus, &layer, repair)
                    .map_err(|e| anyhow!("{}: {e}", path.display()))?;
                splits.insert(corpus.split.clone(), serde_json::to_value(&stats)?);
                parts.push(stats);
            }
            let combined = combine_stats(parts.iter());
            if let Some(path) = &query_hist {
                write_atomic(path, &emit_hist(&combined, HistKind::QueryLen))?;
            }
            if let Some(path) = &entity_hist {
                write_atomic(path, &emit_hist(&combined, HistKind::EntityLen))?;
            }
            print_report(&json!({
                "splits": splits,
                "combined": combined,
            }))?;
        }
        Command::Lexicon {
            input,
            out,
            layer,
            max_color_tokens,
            ontology,
        } => {
            let ontology = load_ontology(&ontology)?;
            let corpus = read_corpus(&input, &ontology, &layer)?;
            let lexicon = build_lexicon(&corpus, &layer, max_color_tokens)?;
            let types = lexicon.types().count();
            let anchors = lexicon.anchors().count();
            write_atomic(&out, &lexicon.to_jsonl())?;
            print_report(&json!({
                "types": types,
                "anchors": anchors,
                "out": out.display().to_string(),
            }))?;
        }
        Command::Augment {
            input,
            out,
            transform,
            seed,
            layer,
            lexicon,
            typo_prob,
            concat,
            log,
            ontology,
        } => {
            let ontology = load_ontology(&ontology)?;
            let corpus = read_corpus(&input, &ontology, &layer)?;
            let mut spec = AugmentSpec::new(transform.into(), seed);
            spec.typo_prob = typo_prob;
            spec.layer = layer.clone();
            spec.concat = concat;
            if let Some(path) = &lexicon {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading lexicon {}", path.display()))?;
                spec.lexicon = Some(
                    MentionLexicon::from_jsonl(&text)
                        .map_err(|e| anyhow!("{}: {e}", path.display()))?,
                );
            }
            let (augmented, records) = augment_corpus(&corpus, &spec)?;
            write_atomic(&out, &serialize_conll(&augmented, &layer)?)?;
            if let Some(path) = &log {
                let mut lines = String::new();
                for record in &records {
                    lines.push_str(&serde_json::to_string(record)?);
                    lines.push('\n');
                }
                write_atomic(path, &lines)?;
            }
            print_report(&json!({
                "queries": augmented.len(),
                "transform": Transform::from(transform).as_str(),
                "out": out.display().to_string(),
            }))?;
        }
        Command::Relax {
            input,
            out,
            seed,
            strategies,
            k,
            layer,
            ontology,
        } => {
            let ontology = load_ontology(&ontology)?;
            let corpus = read_corpus(&input, &ontology, &layer)?;
            let strategies: Vec<Strategy> = strategies
                .iter()
                .map(|s| match s {
                    StrategyArg::TokenDropK => Strategy::TokenDrop { k },
                    StrategyArg::EntityDropKeepCore => Strategy::EntityDropKeepCore,
                })
                .collect();
            let (variants, skipped) = generate_variants(&corpus, &layer, &strategies, seed)?;
            let mut lines = String::new();
            for variant in &variants {
                lines.push_str(&serde_json::to_string(variant)?);
                lines.push('\n');
            }
            write_atomic(&out, &lines)?;
            print_report(&json!({
                "variants": variants.len(),
                "skipped": skipped,
                "out": out.display().to_string(),
            }))?;
        }
        Command::Index { titles, out } => {
            let index = load_titles(&titles)?;
            write_atomic(&out, &index.to_jsonl())?;
            print_report(&json!({
                "items": index.len(),
                "out": out.display().to_string(),
            }))?;
        }
        Command::Simulate {
            index,
            titles,
            queries,
            variants,
            out,
            top_n,
        } => {
            let index = match (&index, &titles) {
                (Some(path), _) => {
                    let text = fs::read_to_string(path)
                        .with_context(|| format!("reading index {}", path.display()))?;
                    ProductIndex::from_jsonl(&text)
                        .map_err(|e| anyhow!("{}: {e}", path.display()))?
                }
                (None, Some(path)) => load_titles(path)?,
                (None, None) => bail!("either --index or --titles is required"),
            };
            let raw = fs::read_to_string(&queries)
                .with_context(|| format!("reading queries {}", queries.display()))?;
            let originals: Vec<(String, Vec<String>)> = parse_raw_queries(&raw)
                .map_err(|e| anyhow!("{}: {e}", queries.display()))?
                .into_iter()
                .map(|(id, text)| (id, tokenize(&text)))
                .collect();

            #[derive(serde::Deserialize)]
            struct VariantLine {
                original_id: String,
                query_text: String,
            }
            let text = fs::read_to_string(&variants)
                .with_context(|| format!("reading variants {}", variants.display()))?;
            let variant_inputs: Vec<(String, Vec<String>)> = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|line| {
                    let parsed: VariantLine = serde_json::from_str(line)
                        .with_context(|| format!("bad variant line in {}", variants.display()))?;
                    Ok((parsed.original_id, tokenize(&parsed.query_text)))
                })
                .collect::<Result<_>>()?;

            let bins = compare_variants(&index, &originals, &variant_inputs, top_n)?;
            write_atomic(&out, &delta_bins_csv(&bins))?;
            print_report(&json!({
                "originals": originals.len(),
                "pairs": variant_inputs.len(),
                "out": out.display().to_string(),
            }))?;
        }
        Command::Ingest {
            offsets,
            raw,
            out,
            layer,
            ontology,
        } => {
            let ontology = load_ontology(&ontology)?;
            let offsets_text = fs::read_to_string(&offsets)
                .with_context(|| format!("reading offsets {}", offsets.display()))?;
            let records = parse_offset_records(&offsets_text)
                .map_err(|e| anyhow!("{}: {e}", offsets.display()))?;
            let raw_text = fs::read_to_string(&raw)
                .with_context(|| format!("reading raw queries {}", raw.display()))?;
            let raw_queries =
                parse_raw_queries(&raw_text).map_err(|e| anyhow!("{}: {e}", raw.display()))?;
            let corpus = ingest_offsets(records, &raw_queries, &ontology, &layer)
                .map_err(|e| anyhow!("{}: {e}", offsets.display()))?;
            write_atomic(&out, &serialize_conll(&corpus, &layer)?)?;
            print_report(&json!({
                "queries": corpus.len(),
                "out": out.display().to_string(),
            }))?;
        }
    }
    Ok(())
}

fn load_titles(path: &Path) -> Result<ProductIndex> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading titles {}", path.display()))?;
    let mut titles = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, title) = line
            .split_once('\t')
            .ok_or_else(|| anyhow!("{}:{}: expected id<TAB>title", path.display(), idx + 1))?;
        titles.push((id.to_owned(), title.to_owned()));
    }
    index_products(titles).map_err(|e| anyhow!("{}: {e}", path.display()))
}
