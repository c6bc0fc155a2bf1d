//! `groundkit` command-line tool.
//!
//! Exit codes: 0 success, 1 I/O error, 2 malformed input, 3 oracle cap
//! exceeded, 4 verification failure.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use groundkit::amr::{build_amr_digraph, AmrCorpus};
use groundkit::dictionary::{build_dictionary_digraph, RawDictionary, Stoplist};
use groundkit::io::{read_arc_list, write_annotations, write_arc_list, write_dot, FormatError, TaggedGraph};
use groundkit::kernel::{common_symbols, kernel, table, to_csv, MetricsReport};
use groundkit::oracle::{check_preservation_with, MfvsSolver, OracleError, DEFAULT_CAP, MAX_CAP};
use groundkit::reduce::Action;
use groundkit::penman::{parse_corpus, PenmanDocument};
use groundkit::verify::{self, SuiteConfig};
use groundkit::{ArcAnnotations, Digraph, Execution, ReductionTrace, Reducer, VertexId, VisitOrder};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Cap(OracleError),
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Format { .. } => 2,
            CliError::Cap(_) => 3,
            CliError::Verify(_) => 4,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.to_owned(), source }
    }

    fn format(path: &Path, message: impl ToString) -> Self {
        CliError::Format { path: path.to_owned(), message: message.to_string() }
    }

    fn from_format(path: &Path, e: FormatError) -> Self {
        match e {
            FormatError::Io(source) => Self::io(path, source),
            other => Self::format(path, other),
        }
    }

    fn from_oracle(e: OracleError) -> Self {
        match e {
            OracleError::CapExceeded { .. } => CliError::Cap(e),
            other => CliError::Verify(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "groundkit", version, about = "Definitional digraphs, MFVS-preserving reductions and kernel metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a definitional digraph from PENMAN corpora, a JSONL dictionary or arc lists.
    Build(BuildArgs),
    /// Trim to the kernel: drop vertices with no in-arc or no out-arc, repeatedly.
    Kernel(GraphArgs),
    /// Reduce a graph to irreducibility and write the trace.
    Reduce(ReduceArgs),
    /// Kernel and reduction metrics of one or more graphs.
    Stats(StatsArgs),
    /// Exact minimum feedback vertex set of a small graph.
    Mfvs(MfvsArgs),
    /// Vertex labels shared by all given graphs.
    Common(CommonArgs),
    /// Write a graph in DOT.
    ExportDot(GraphArgs),
    /// Run the seeded oracle suites.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputKind {
    Auto,
    Penman,
    Jsonl,
    ArcList,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Confluent,
    Nonconfluent,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Input format; `auto` probes the first non-blank line.
    #[arg(long, value_enum, default_value = "auto")]
    kind: InputKind,
    /// Words ignored in dictionary definitions, one per line.
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct GraphArgs {
    input: PathBuf,
    /// Output file or directory; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "confluent")]
    mode: Mode,
    /// Check `mfvs(G) = |U| + mfvs(G')` with the exact oracle.
    #[arg(long)]
    verify: bool,
    /// Oracle vertex cap for `--verify`.
    #[arg(long, default_value_t = DEFAULT_CAP, value_parser = parse_cap)]
    max_n: usize,
    /// Visit targets in a seeded random order instead of ascending order.
    #[arg(long)]
    seed: Option<u64>,
    /// Include the ordered application log in the trace.
    #[arg(long)]
    log: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MfvsArgs {
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CAP, value_parser = parse_cap)]
    max_n: usize,
}

#[derive(Args)]
struct CommonArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest random graph.
    #[arg(long, default_value_t = 8, value_parser = parse_cap)]
    max_n: usize,
    /// Instances per suite.
    #[arg(long, default_value_t = 100)]
    instances: usize,
}

fn parse_cap(s: &str) -> std::result::Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if (1..=MAX_CAP).contains(&n) {
        Ok(n)
    } else {
        Err(format!("must be in 1..={MAX_CAP}"))
    }
}

/// `GROUNDKIT_THREADS` caps the worker pool; 1, or a build without the
/// `parallel` feature, runs everything sequentially.
fn execution() -> Execution {
    let threads = std::env::var("GROUNDKIT_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok());
    if threads == Some(1) || !cfg!(feature = "parallel") {
        return Execution::Sequential;
    }
    #[cfg(feature = "parallel")]
    if let Some(n) = threads.filter(|&n| n > 0) {
        // fails only if a pool already exists, which keeps its own size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Execution::Parallel
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::InvalidData => CliError::format(path, "not valid UTF-8"),
        _ => CliError::io(path, e),
    })
}

fn read_graph(path: &Path) -> Result<TaggedGraph> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_arc_list(BufReader::new(file)).map_err(|e| CliError::from_format(path, e))
}

fn create(path: &Path) -> Result<io::BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::File::create(path).map(io::BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn write_graph_file(path: &Path, g: &Digraph, tags: &ArcAnnotations) -> Result<()> {
    let mut w = create(path)?;
    write_arc_list(&mut w, g, tags).map_err(|e| CliError::from_format(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

fn probe(text: &str) -> InputKind {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    if first.starts_with('{') {
        InputKind::Jsonl
    } else if first.starts_with('(') || first.starts_with("# ::") {
        InputKind::Penman
    } else {
        InputKind::ArcList
    }
}

fn cmd_build(args: BuildArgs, exec: Execution) -> Result<()> {
    let mut inputs = args.inputs.clone();
    inputs.sort();
    let texts: Vec<(PathBuf, String)> =
        inputs.iter().map(|p| read_text(p).map(|t| (p.clone(), t))).collect::<Result<_>>()?;
    let mut kind = args.kind;
    for (path, text) in &texts {
        let probed = probe(text);
        if kind == InputKind::Auto {
            kind = probed;
        }
        if probed != kind && !text.trim().is_empty() {
            return Err(CliError::format(path, "input kind does not match the other inputs or --kind"));
        }
    }
    let graph_path = args.out.join("graph.tsv");
    let metrics_path = args.out.join("metrics.json");
    match kind {
        InputKind::Penman | InputKind::Auto => {
            let parsed: Vec<Result<Vec<PenmanDocument>>> = groundkit::par::map(exec, &texts, |(path, text)| {
                parse_corpus(text).map_err(|e| CliError::format(path, e))
            });
            let mut docs = Vec::new();
            for p in parsed {
                docs.extend(p?);
            }
            let first = &texts[0].0;
            let corpus = AmrCorpus::from_documents(docs).map_err(|e| CliError::format(first, e))?;
            let build = build_amr_digraph(&corpus, exec).map_err(|e| CliError::format(first, e))?;
            write_graph_file(&graph_path, &build.graph, &build.tags)?;
            let sidecar = args.out.join("preserved.tsv");
            let mut w = create(&sidecar)?;
            write_annotations(&mut w, &build.preserved).map_err(|e| CliError::from_format(&sidecar, e))?;
            w.flush().map_err(|e| CliError::io(&sidecar, e))?;
            write_text(&metrics_path, &pretty(&serde_json::to_value(build.metrics).expect("plain struct")))?;
            write_text(&args.out.join("entries.json"), &pretty(&serde_json::to_value(&build.reports).expect("plain struct")))?;
            println!(
                "{} definitions -> {} kept; {} vertices, {} arcs",
                build.metrics.definition_quantity,
                build.metrics.final_quantity,
                build.graph.vertex_count(),
                build.graph.arc_count()
            );
        }
        InputKind::Jsonl => {
            let mut dict = RawDictionary::new();
            for (path, text) in &texts {
                let part = RawDictionary::from_jsonl(text.as_bytes()).map_err(|e| CliError::format(path, e))?;
                for (lexeme, defs) in part.entries {
                    dict.add(&lexeme, defs);
                }
            }
            let stop = match &args.stoplist {
                None => Stoplist::default(),
                Some(path) => {
                    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
                    Stoplist::from_reader(BufReader::new(file)).map_err(|e| CliError::format(path, e))?
                }
            };
            let g = build_dictionary_digraph(&dict, &stop);
            write_graph_file(&graph_path, &g, &ArcAnnotations::new())?;
            let metrics = json!({"lexemes": dict.len(), "vertices": g.vertex_count(), "arcs": g.arc_count()});
            write_text(&metrics_path, &pretty(&metrics))?;
            println!("{} lexemes; {} vertices, {} arcs", dict.len(), g.vertex_count(), g.arc_count());
        }
        InputKind::ArcList => {
            let mut merged = TaggedGraph::default();
            for (path, text) in &texts {
                let part = groundkit::io::parse_arc_list(text).map_err(|e| CliError::from_format(path, e))?;
                for v in part.graph.vertices() {
                    merged.graph.add_vertex(part.graph.label(v));
                }
                for (u, v) in part.graph.arcs() {
                    let (a, b) = (merged.graph.add_vertex(part.graph.label(u)), merged.graph.add_vertex(part.graph.label(v)));
                    merged.graph.add_arc(a, b);
                }
                merged.tags.extend(&part.tags);
            }
            write_graph_file(&graph_path, &merged.graph, &merged.tags)?;
            let metrics = json!({"vertices": merged.graph.vertex_count(), "arcs": merged.graph.arc_count()});
            write_text(&metrics_path, &pretty(&metrics))?;
            println!("{} vertices, {} arcs", merged.graph.vertex_count(), merged.graph.arc_count());
        }
    }
    Ok(())
}

fn cmd_kernel(args: GraphArgs) -> Result<()> {
    let input = read_graph(&args.input)?;
    let k = kernel(&input.graph);
    let mut tags = input.tags;
    tags.retain_arcs_of(&k.kernel);
    let out = args.out.unwrap_or_else(|| PathBuf::from("."));
    write_graph_file(&out.join("kernel.tsv"), &k.kernel, &tags)?;
    let summary = json!({
        "nb_vertices": input.graph.vertex_count(),
        "nb_undefined": k.nb_undefined,
        "nb_undefining": k.nb_undefining,
        "size_kernel": k.kernel.vertex_count(),
        "kernel_nb_arcs": k.kernel.arc_count(),
    });
    write_text(&out.join("kernel.json"), &pretty(&summary))?;
    print!("{}", pretty(&summary));
    Ok(())
}

fn labels(g: &Digraph, set: &BTreeSet<VertexId>) -> Vec<String> {
    let mut out: Vec<String> = set.iter().map(|&v| g.label(v).to_owned()).collect();
    out.sort();
    out
}

/// Log events with vertices named by their labels in the input graph.
fn log_json(g: &Digraph, trace: &ReductionTrace) -> serde_json::Value {
    let events: Vec<serde_json::Value> = trace
        .log
        .iter()
        .map(|e| match e.action {
            Action::Applied { kind, target } => {
                let names: Vec<&str> = target.vertices().into_iter().map(|v| g.label(v)).collect();
                json!({"sweep": e.sweep, "kind": kind.to_string(), "target": names})
            }
            Action::Isolated(v) => json!({"sweep": e.sweep, "kind": "isolated", "target": [g.label(v)]}),
        })
        .collect();
    serde_json::Value::Array(events)
}

/// The configured reduction: confluent, or confluent then non-confluent.
fn run_mode(mode: Mode, order: VisitOrder, g: Digraph) -> (Digraph, ReductionTrace) {
    let (reduced, mut trace) = Reducer::confluent().order(order).run(g);
    if mode == Mode::Confluent {
        return (reduced, trace);
    }
    let (reduced, later) = Reducer::nonconfluent().order(order).run(reduced);
    trace.merge(&later);
    (reduced, trace)
}

fn cmd_reduce(args: ReduceArgs) -> Result<()> {
    let input = read_graph(&args.input)?;
    let order = args.seed.map_or(VisitOrder::Ascending, VisitOrder::Shuffled);
    let original = input.graph;
    if args.verify {
        let check = check_preservation_with(&original, args.max_n, |h| {
            let (reduced, trace) = run_mode(args.mode, order, std::mem::take(h));
            *h = reduced;
            Ok(trace.included)
        })
        .map_err(CliError::from_oracle)?;
        if !check.holds() {
            return Err(CliError::Verify(format!(
                "mfvs {} != |U| {} + mfvs' {} (disjoint {}, witnesses lift {})",
                check.mfvs_before, check.included, check.mfvs_after, check.disjoint, check.lifted_ok
            )));
        }
        eprintln!("verified: mfvs {} = |U| {} + mfvs' {}", check.mfvs_before, check.included, check.mfvs_after);
    }
    let (reduced, trace) = run_mode(args.mode, order, original.clone());
    let mut tags = input.tags;
    tags.retain_arcs_of(&reduced);
    write_graph_file(&args.out.join("reduced.tsv"), &reduced, &tags)?;
    let summary = serde_json::to_value(trace.summary()).expect("plain struct");
    let mut report = json!({
        "mode": match args.mode { Mode::Confluent => "confluent", Mode::Nonconfluent => "nonconfluent" },
        "summary": summary,
        "remaining_arcs": trace.remaining_arcs,
        "included_labels": labels(&original, &trace.included),
        "excluded_labels": labels(&original, &trace.excluded),
        "verified": args.verify,
    });
    if args.log {
        report["log"] = log_json(&original, &trace);
    }
    write_text(&args.out.join("trace.json"), &pretty(&report))?;
    print!("{}", pretty(&summary));
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn cmd_stats(args: StatsArgs, exec: Execution) -> Result<()> {
    let mut inputs = args.inputs.clone();
    inputs.sort();
    let graphs: Vec<Result<(String, MetricsReport)>> = groundkit::par::map(exec, &inputs, |path| {
        read_graph(path).map(|t| (stem(path), MetricsReport::compute(&t.graph)))
    });
    let reports: Vec<(String, MetricsReport)> = graphs.into_iter().collect::<Result<_>>()?;
    let named: Vec<(&str, MetricsReport)> = reports.iter().map(|(n, r)| (n.as_str(), *r)).collect();
    let text = match args.format {
        Format::Table if named.len() == 1 => named[0].1.to_table(),
        Format::Table => table(&named),
        Format::Csv => to_csv(&named),
        Format::Json if named.len() == 1 => pretty(&serde_json::to_value(named[0].1).expect("plain struct")),
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> =
                named.iter().map(|(n, r)| (n.to_string(), serde_json::to_value(r).expect("plain struct"))).collect();
            pretty(&serde_json::Value::Object(map))
        }
    };
    emit(args.out.as_deref(), &text)
}

fn cmd_mfvs(args: MfvsArgs, exec: Execution) -> Result<()> {
    let input = read_graph(&args.input)?;
    let g = input.graph;
    let result = MfvsSolver::new().cap(args.max_n).first_only().execution(exec).solve(&g).map_err(CliError::from_oracle)?;
    let witness: Vec<&str> = result.first().iter().map(|&v| g.label(v)).collect();
    print!("{}", pretty(&json!({"size": result.size, "witness": witness})));
    Ok(())
}

fn cmd_common(args: CommonArgs) -> Result<()> {
    let graphs: Vec<Digraph> = args.inputs.iter().map(|p| read_graph(p).map(|t| t.graph)).collect::<Result<_>>()?;
    let mut text = String::new();
    for label in common_symbols(&graphs) {
        text.push_str(&label);
        text.push('\n');
    }
    emit(args.out.as_deref(), &text)
}

fn cmd_export_dot(args: GraphArgs) -> Result<()> {
    let input = read_graph(&args.input)?;
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            write_dot(&mut w, &input.graph, &input.tags).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
        }
        None => write_dot(io::stdout().lock(), &input.graph, &input.tags).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn cmd_selftest(args: SelftestArgs, exec: Execution) -> Result<()> {
    let cfg = SuiteConfig { instances: args.instances, max_n: args.max_n, seed: args.seed, exec, ..SuiteConfig::default() };
    let suites = [
        verify::preservation_suite(&cfg),
        verify::kernel_suite(&cfg),
        verify::penman_suite(&cfg),
        verify::negative_control(),
    ];
    let confluence = verify::confluence_suite(&cfg, 5);
    let mut failed = Vec::new();
    for s in &suites {
        println!("{} {}: {} checks, {} failures", if s.passed() { "PASS" } else { "FAIL" }, s.name, s.cases, s.failure_count);
        for f in &s.failures {
            println!("    {f}");
        }
        if !s.passed() {
            failed.push(s.name.clone());
        }
    }
    println!(
        "{} confluence (up to isomorphism invariants): {} graphs x {} orders, {} invariant mismatches; {} graphs differ in labels",
        if confluence.up_to_invariants() { "PASS" } else { "FAIL" },
        confluence.graphs,
        confluence.orders,
        confluence.invariant_mismatches,
        confluence.exact_mismatches
    );
    if !confluence.up_to_invariants() {
        failed.push("confluence".to_owned());
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verify(failed.join(", ")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = execution();
    let result = match cli.command {
        Command::Build(a) => cmd_build(a, exec),
        Command::Kernel(a) => cmd_kernel(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Stats(a) => cmd_stats(a, exec),
        Command::Mfvs(a) => cmd_mfvs(a, exec),
        Command::Common(a) => cmd_common(a),
        Command::ExportDot(a) => cmd_export_dot(a),
        Command::Selftest(a) => cmd_selftest(a, exec),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("groundkit: {e}");
            ExitCode::from(e.code())
        }
    }
}
