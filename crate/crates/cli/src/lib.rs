//! The `schemaforge` command line.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use schemaforge_core::cue::cue_report;
use schemaforge_core::embed::{evaluate_mean_rank, export_emb, prepare_triples, train, Hyperparams, TripleMode};
use schemaforge_core::fca::{build_context, export_cue_csv, export_fca_csv, export_triples_csv};
use schemaforge_core::intersections::{compute_regions, lotus_data, render_svg, upset_data, MAX_LOTUS_ETYPES};
use schemaforge_core::rdf::{parse_ntriples, parse_turtle, serialize, vocab, Graph, RdfFormat, Term};
use schemaforge_core::schema::{extract_schema, ExtractionConfig, PredicateFilter, SchemaContext};
use schemaforge_harvest::{
    search_local, sync, sync_if_due, FixtureTransport, HttpTransport, LicensePolicy, SourceConfig, Store, SyncOptions,
    Transport,
};

mod error;

pub use error::{Failure, Status};

#[derive(Debug, Parser)]
#[command(name = "schemaforge", version, about = "Knowledge graph schema analysis and vocabulary harvesting")]
struct Cli {
    /// Write the result here instead of standard output. Nothing is written on failure.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also report errors as a JSON object on standard error.
    #[arg(long, global = true)]
    json_errors: bool,
    /// More log output on standard error (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse an RDF document and re-serialize it.
    Parse {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "ntriples")]
        to: OutputFormat,
    },
    /// Cue validity metrics as CSV.
    Cues {
        input: PathBuf,
        #[command(flatten)]
        extract: ExtractArgs,
    },
    /// The formal context (etype x property incidence) as CSV.
    Fca {
        input: PathBuf,
        #[command(flatten)]
        extract: ExtractArgs,
        /// Keep only these predicates (IRIs or prefixed names, comma separated).
        #[arg(long, value_delimiter = ',', conflicts_with = "exclude")]
        include: Vec<String>,
        /// Drop these predicates.
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<String>,
    },
    /// Knowledge lotus data for up to 6 entity types.
    Lotus(VisArgs),
    /// UpSet data for up to 16 entity types.
    Upset(VisArgs),
    /// Train a translational embedding and write it in EMB format.
    Embed {
        input: PathBuf,
        #[command(flatten)]
        extract: ExtractArgs,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        /// Negative samples per positive triple.
        #[arg(long, default_value_t = 1)]
        neg: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// schema_incidence or raw_iri_triples.
        #[arg(long, default_value = "schema_incidence")]
        mode: TripleMode,
    },
    /// Sync a source catalog into a local store and print the sync report.
    Harvest {
        /// Source adapter config (JSON).
        #[arg(long)]
        source: PathBuf,
        #[arg(long, env = "SCHEMAFORGE_STORE")]
        store: PathBuf,
        /// Skip the sync if the source's interval has not elapsed.
        #[arg(long)]
        if_due: bool,
        /// Play back recorded responses from this manifest instead of using the network.
        #[arg(long, value_name = "MANIFEST")]
        fixtures: Option<PathBuf>,
        /// Accept this license id in addition to the default whitelist (repeatable).
        #[arg(long = "accept-license", value_name = "ID")]
        accept_license: Vec<String>,
        #[arg(long, default_value_t = 4)]
        parallelism: usize,
        #[arg(long, default_value_t = 500)]
        politeness_ms: u64,
    },
    /// Search dataset metadata in a local store.
    Search {
        #[arg(long, env = "SCHEMAFORGE_STORE")]
        store: PathBuf,
        #[arg(long = "q", value_name = "TEXT", allow_hyphen_values = true)]
        query: String,
        #[arg(long)]
        fuzzy: bool,
    },
    /// Triples matching a single pattern, as N-Triples.
    Match {
        input: PathBuf,
        #[arg(short, value_name = "TERM")]
        s: Option<String>,
        #[arg(short, value_name = "TERM")]
        p: Option<String>,
        #[arg(short, value_name = "TERM", allow_hyphen_values = true)]
        o: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Turtle,
    Ntriples,
    TriplesCsv,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Extraction config (JSON); the flags below override it.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    inherit_subclass: bool,
    #[arg(long)]
    use_range: bool,
    #[arg(long)]
    no_union_expansion: bool,
    /// Additional predicate read as "property has domain" (repeatable).
    #[arg(long, value_name = "IRI")]
    domain_predicate: Vec<String>,
}

#[derive(Debug, Args)]
struct VisArgs {
    input: PathBuf,
    /// Entity types: IRIs, prefixed names or unambiguous local names.
    #[arg(long, value_delimiter = ',', required = true)]
    etypes: Vec<String>,
    /// Render SVG instead of the JSON document.
    #[arg(long)]
    svg: bool,
    #[command(flatten)]
    extract: ExtractArgs,
}

/// Runs the command line and returns the exit status.
pub fn run<I, T>(args: I) -> Status
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Status::Success;
            }
            if args.iter().any(|a| a == "--json-errors") {
                eprintln!("{}", Failure::usage(e.kind().to_string()).to_json());
            }
            return Status::Usage;
        }
    };
    init_logging(cli.verbose);
    let json_errors = cli.json_errors;
    let result = execute(cli.command).and_then(|bytes| emit(cli.out.as_deref(), &bytes));
    match result {
        Ok(()) => Status::Success,
        Err(f) => {
            eprintln!("error: {f}");
            if json_errors {
                eprintln!("{}", f.to_json());
            }
            f.status
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => write_atomically(path, bytes),
        None => {
            let mut stdout = io::stdout().lock();
            match stdout.write_all(bytes).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::internal(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn write_atomically(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let name = path
        .file_name()
        .ok_or_else(|| Failure::usage(format!("--out {} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.partial-{}", name.to_string_lossy(), std::process::id()));
    let result = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Failure::input(format!("cannot write {}: {e}", path.display())));
    }
    Ok(())
}

fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| Failure::input(format!("standard input: {e}")))?;
        return Ok(buf);
    }
    fs::read(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

/// `.nt` files are N-Triples; everything else is read as Turtle.
fn load_graph(path: &Path) -> Result<Graph, Failure> {
    let bytes = read_input(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Failure::input(format!("{}: not UTF-8: {e}", path.display())))?;
    let is_nt = path
        .extension()
        .is_some_and(|x| x.eq_ignore_ascii_case("nt") || x.eq_ignore_ascii_case("ntriples"));
    let graph = if is_nt { parse_ntriples(&text) } else { parse_turtle(&text) };
    graph.map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn extraction_config(args: &ExtractArgs) -> Result<ExtractionConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let bytes = read_input(path)?;
            serde_json::from_slice(&bytes).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?
        }
        None => ExtractionConfig::default(),
    };
    if args.inherit_subclass {
        config.inherit_via_subclass = true;
    }
    if args.use_range {
        config.use_range_as_association = true;
    }
    if args.no_union_expansion {
        config.union_domain_expansion = false;
    }
    config.domain_predicates.extend(args.domain_predicate.iter().cloned());
    config.validate()?;
    Ok(config)
}

fn load_schema(input: &Path, extract: &ExtractArgs) -> Result<(Graph, SchemaContext), Failure> {
    let config = extraction_config(extract)?;
    let graph = load_graph(input)?;
    let schema = extract_schema(&graph, &config)?;
    Ok((graph, schema))
}

/// An IRI written as `<iri>`, a prefixed name known to the graph, `a`, or
/// an absolute IRI.
fn resolve_iri(graph: &Graph, token: &str) -> Result<String, Failure> {
    let token = token.trim();
    if let Some(inner) = token.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
        return Ok(inner.to_string());
    }
    if token == "a" {
        return Ok(vocab::RDF_TYPE.to_string());
    }
    if let Some(iri) = graph.expand_curie(token) {
        return Ok(iri);
    }
    if token.contains("://") || token.starts_with("urn:") {
        return Ok(token.to_string());
    }
    Err(Failure::usage(format!("cannot resolve {token:?} to an IRI")))
}

fn local_name(iri: &str) -> &str {
    iri.rsplit(['#', '/']).next().unwrap_or(iri)
}

fn resolve_etype(graph: &Graph, schema: &SchemaContext, token: &str) -> Result<String, Failure> {
    if let Ok(iri) = resolve_iri(graph, token) {
        if schema.has_etype(&iri) {
            return Ok(iri);
        }
    }
    let hits: Vec<&String> = schema.etypes().iter().filter(|e| local_name(e) == token).collect();
    match hits.as_slice() {
        [one] => Ok((*one).clone()),
        [] => Err(Failure::input(format!("unknown entity type {token:?}"))),
        many => Err(Failure::usage(format!(
            "entity type {token:?} is ambiguous: {}",
            many.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn parse_term(graph: &Graph, token: &str) -> Result<Term, Failure> {
    let token = token.trim();
    if let Some(label) = token.strip_prefix("_:") {
        return Ok(Term::blank(label));
    }
    if token.starts_with('"') {
        let line = format!("<urn:x:s> <urn:x:p> {token} .");
        let g = parse_ntriples(&line).map_err(|e| Failure::usage(format!("bad literal {token}: {e}")))?;
        let t = g.triples().next().expect("one triple parsed");
        return Ok(t.object.clone());
    }
    resolve_iri(graph, token).map(Term::iri)
}

fn execute(command: Command) -> Result<Vec<u8>, Failure> {
    match command {
        Command::Parse { input, to } => {
            let graph = load_graph(&input)?;
            Ok(match to {
                OutputFormat::Turtle => serialize(&graph, RdfFormat::Turtle).into_bytes(),
                OutputFormat::Ntriples => serialize(&graph, RdfFormat::NTriples).into_bytes(),
                OutputFormat::TriplesCsv => export_triples_csv(&graph),
            })
        }
        Command::Cues { input, extract } => {
            let (_, schema) = load_schema(&input, &extract)?;
            Ok(export_cue_csv(&cue_report(&schema)))
        }
        Command::Fca {
            input,
            extract,
            include,
            exclude,
        } => {
            let (graph, mut schema) = load_schema(&input, &extract)?;
            let resolve = |items: &[String]| -> Result<BTreeSet<String>, Failure> {
                items.iter().map(|t| resolve_iri(&graph, t)).collect()
            };
            let filter = if !include.is_empty() {
                Some(PredicateFilter::Include(resolve(&include)?))
            } else if !exclude.is_empty() {
                Some(PredicateFilter::Exclude(resolve(&exclude)?))
            } else {
                None
            };
            if let Some(filter) = filter {
                let outcome = schema.filter_predicates(&filter);
                for p in &outcome.unknown {
                    log::warn!("filter predicate <{p}> is not a property of the schema");
                }
                schema = outcome.schema;
            }
            Ok(export_fca_csv(&build_context(&schema)))
        }
        Command::Lotus(args) => visualise(args, true),
        Command::Upset(args) => visualise(args, false),
        Command::Embed {
            input,
            extract,
            dim,
            epochs,
            lr,
            margin,
            neg,
            seed,
            mode,
        } => {
            let hp = Hyperparams {
                dim,
                learning_rate: lr,
                margin,
                epochs,
                negatives: neg,
                seed,
            };
            hp.validate()?;
            let config = extraction_config(&extract)?;
            let graph = load_graph(&input)?;
            let index = prepare_triples(&graph, mode, &config)?;
            let model = train(&index, &hp)?;
            let summary = evaluate_mean_rank(&model, &index.triples);
            log::info!(
                "{} triples, training mean rank {:.4}, hits@3 {:.4}",
                summary.n,
                summary.mean_rank,
                summary.hits_at_3
            );
            Ok(export_emb(&model).into_bytes())
        }
        Command::Harvest {
            source,
            store,
            if_due,
            fixtures,
            accept_license,
            parallelism,
            politeness_ms,
        } => {
            let text = String::from_utf8(read_input(&source)?)
                .map_err(|e| Failure::input(format!("{}: {e}", source.display())))?;
            let source = SourceConfig::from_json(&text)?;
            let store = Store::open(&store)?;
            let transport: Box<dyn Transport> = match fixtures {
                Some(manifest) => Box::new(FixtureTransport::from_manifest(&manifest)?),
                None => Box::new(HttpTransport::default()),
            };
            let mut policy = LicensePolicy::default();
            policy.extend(&accept_license);
            let options = SyncOptions {
                policy,
                parallelism,
                politeness: Duration::from_millis(politeness_ms),
                ..SyncOptions::default()
            };
            let report = if if_due {
                sync_if_due(&source, transport.as_ref(), &store, &options, chrono::Utc::now())?
            } else {
                let report = sync(&source, transport.as_ref(), &store, &options)?;
                store.record_sync(&source.id, chrono::Utc::now())?;
                Some(report)
            };
            let json = match report {
                Some(r) => serde_json::to_string_pretty(&r),
                None => serde_json::to_string_pretty(&serde_json::json!({"source": source.id, "due": false})),
            }
            .map_err(|e| Failure::internal(e.to_string()))?;
            Ok((json + "\n").into_bytes())
        }
        Command::Search { store, query, fuzzy } => {
            if !store.is_dir() {
                return Err(Failure::input(format!("store {} does not exist", store.display())));
            }
            let store = Store::open(&store)?;
            let mut out = String::new();
            for id in search_local(&store, &query, fuzzy)? {
                out.push_str(&id);
                out.push('\n');
            }
            Ok(out.into_bytes())
        }
        Command::Match { input, s, p, o } => {
            let graph = load_graph(&input)?;
            let term = |t: &Option<String>| t.as_deref().map(|t| parse_term(&graph, t)).transpose();
            let (s, p, o) = (term(&s)?, term(&p)?, term(&o)?);
            let mut result = Graph::new();
            for t in graph.match_pattern(s.as_ref(), p.as_ref(), o.as_ref()) {
                result.insert(t);
            }
            Ok(serialize(&result, RdfFormat::NTriples).into_bytes())
        }
    }
}

fn visualise(args: VisArgs, lotus: bool) -> Result<Vec<u8>, Failure> {
    if lotus && args.etypes.len() > MAX_LOTUS_ETYPES {
        return Err(Failure::usage(format!(
            "a knowledge lotus shows at most {MAX_LOTUS_ETYPES} entity types, got {}; use upset instead",
            args.etypes.len()
        )));
    }
    let (graph, schema) = load_schema(&args.input, &args.extract)?;
    let selected = args
        .etypes
        .iter()
        .map(|t| resolve_etype(&graph, &schema, t))
        .collect::<Result<Vec<_>, _>>()?;
    let table = compute_regions(&build_context(&schema), &selected)?;
    let vis = if lotus { lotus_data(&table)? } else { upset_data(&table) };
    if args.svg {
        Ok(render_svg(&vis)?.into_bytes())
    } else {
        Ok(vis.to_json().into_bytes())
    }
}
