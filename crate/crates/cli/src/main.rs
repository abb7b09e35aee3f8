use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use emergence_cli::labels::{label_topics, write_labels};
use emergence_cli::pipeline::{self, load_corpus, write_file, PipelineConfig, PipelineError};
use emergence_cli::report;
use emergence_core::citegraph::ImpactScope;
use emergence_core::cluster::{self, ClusterParams, Partition};
use emergence_core::corpus::{parse_corpus, DocType, Year};
use emergence_core::detector::{EmergenceParams, EmergenceReport, TopicTable};
use emergence_core::metrics::write_attribute_table;
use emergence_core::synth::{self, Manifest, PlantedTopic, SynthSpec};
use emergence_core::CitationGraph;

#[derive(Parser, Debug)]
#[command(name = "emergence", version, about = "Detect emerging research topics in a citation corpus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse, validate and filter a corpus
    Ingest(IngestArgs),
    /// Cluster the citation graph into topics
    Cluster(ClusterArgs),
    /// Apply the emergence criteria to a clustered corpus
    Detect(DetectArgs),
    /// Label topics with frequent terms and most cited publications
    Label(LabelArgs),
    /// Generate a synthetic corpus with planted topics
    Synth(SynthArgs),
    /// Score a detection report against a synthetic manifest
    Score(ScoreArgs),
    /// Run the full pipeline
    Run(RunArgs),
}

#[derive(Args, Debug)]
struct CorpusArgs {
    /// Line-delimited JSON publication records
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value_t = 2003)]
    year_min: Year,
    #[arg(long, default_value_t = 2012)]
    year_max: Year,
    /// Document types to keep
    #[arg(long, value_delimiter = ',', default_value = "article,review")]
    doc_types: Vec<DocType>,
}

impl CorpusArgs {
    fn doc_types(&self) -> BTreeSet<DocType> {
        self.doc_types.iter().copied().collect()
    }

    fn load(&self) -> Result<emergence_core::Corpus, PipelineError> {
        if self.doc_types.is_empty() {
            return Err(config_error("doc_types", "at least one document type is required"));
        }
        load_corpus(&self.input, self.year_min, self.year_max, &self.doc_types())
    }
}

#[derive(Args, Debug)]
struct ClusterOpts {
    /// Clustering resolution; larger values give smaller topics
    #[arg(long, default_value_t = ClusterParams::default().resolution)]
    resolution: f64,
    /// Clustering random seed
    #[arg(long, default_value_t = ClusterParams::default().seed)]
    seed: u64,
    /// Independent clustering restarts; the best partition is kept
    #[arg(long, default_value_t = ClusterParams::default().max_iterations)]
    max_iterations: usize,
    /// Minimum quality gain for a move to count
    #[arg(long, default_value_t = 0.0)]
    min_improvement: f64,
}

impl ClusterOpts {
    fn params(&self) -> ClusterParams {
        ClusterParams {
            resolution: self.resolution,
            seed: self.seed,
            max_iterations: self.max_iterations,
            min_improvement: self.min_improvement,
        }
    }
}

#[derive(Args, Debug)]
struct EmergenceOpts {
    /// Named parameter preset (set1, set2); repeatable
    #[arg(long = "set")]
    sets: Vec<String>,
    /// Window length in years
    #[arg(long)]
    dt: Option<u32>,
    /// Minimum growth ratio
    #[arg(long)]
    r_min: Option<f64>,
    /// Maximum smoothed publication count at the start year
    #[arg(long)]
    p_max: Option<f64>,
    /// Minimum citations received within the window
    #[arg(long)]
    c_min: Option<u64>,
    /// Minimum within-topic citations per publication
    #[arg(long)]
    h_min: Option<f64>,
    /// Multiply c_min of every set by this factor
    #[arg(long)]
    scale_impact: Option<f64>,
    /// Which citing publications count toward impact
    #[arg(long, default_value = "corpus")]
    impact_scope: ImpactScope,
}

impl EmergenceOpts {
    fn has_overrides(&self) -> bool {
        self.dt.is_some() || self.r_min.is_some() || self.p_max.is_some() || self.c_min.is_some() || self.h_min.is_some()
    }

    /// Selected presets with any flag overrides applied. Overrides without
    /// a preset form a single `custom` set based on set1.
    fn param_sets(&self, default_sets: &[&str]) -> Result<Vec<(String, EmergenceParams)>, PipelineError> {
        let names: Vec<String> = if !self.sets.is_empty() {
            self.sets.clone()
        } else if self.has_overrides() {
            vec!["custom".into()]
        } else {
            default_sets.iter().map(|s| s.to_string()).collect()
        };
        names
            .into_iter()
            .map(|name| {
                let mut p = if name == "custom" {
                    EmergenceParams::set1()
                } else {
                    EmergenceParams::preset(&name).map_err(|e| config_error("set", &e.to_string()))?
                };
                if let Some(v) = self.dt {
                    p.dt = v;
                }
                if let Some(v) = self.r_min {
                    p.r_min = v;
                }
                if let Some(v) = self.p_max {
                    p.p_max = v;
                }
                if let Some(v) = self.c_min {
                    p.c_min = v;
                }
                if let Some(v) = self.h_min {
                    p.h_min = v;
                }
                if let Some(f) = self.scale_impact {
                    p = p.scale_impact(f);
                }
                Ok((name, p))
            })
            .collect()
    }
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Write the normalized, filtered corpus here
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write validation issues as JSON lines here
    #[arg(long)]
    issues: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    cluster: ClusterOpts,
    /// Partition file to write
    #[arg(long, short)]
    output: PathBuf,
    /// Also write the citation edge list
    #[arg(long)]
    edges: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    partition: PathBuf,
    #[command(flatten)]
    emergence: EmergenceOpts,
    /// Directory for all artifacts
    #[arg(long, short)]
    output_dir: PathBuf,
}

#[derive(Args, Debug)]
struct LabelArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    partition: PathBuf,
    /// Title terms per topic label
    #[arg(long, default_value_t = 10)]
    k_terms: usize,
    /// Most cited publications per topic label
    #[arg(long, default_value_t = 2)]
    k_pubs: usize,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// JSON generator spec; flags below override its fields
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    background_topics: Option<usize>,
    /// Planted topic as start:base:growth:internal_rate:external_rate; repeatable
    #[arg(long = "planted")]
    planted: Vec<String>,
    #[arg(long)]
    dangling: Option<usize>,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    partition: PathBuf,
    /// A `<set>.report.jsonl` file
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    /// Minimum Jaccard similarity for a detection to match a planted topic
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    cluster: ClusterOpts,
    #[command(flatten)]
    emergence: EmergenceOpts,
    /// Directory for all artifacts
    #[arg(long, short)]
    output_dir: PathBuf,
    /// Report formats to write
    #[arg(long, value_delimiter = ',', default_value = "text,jsonl")]
    formats: Vec<String>,
    /// Title terms per topic label
    #[arg(long, default_value_t = 10)]
    k_terms: usize,
    /// Most cited publications per topic label
    #[arg(long, default_value_t = 2)]
    k_pubs: usize,
    /// Synthetic manifest to score against
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Minimum Jaccard similarity for a detection to match a planted topic
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// List every start year at which a topic satisfies all criteria
    #[arg(long)]
    verbose: bool,
}

fn config_error(field: &str, reason: &str) -> PipelineError {
    PipelineError::Config {
        field: field.to_string(),
        reason: reason.to_string(),
    }
}

fn read_partition(path: &Path, graph: &CitationGraph) -> Result<Partition, PipelineError> {
    let file = File::open(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Partition::read_tsv(BufReader::new(file), graph.ids()).map_err(|e| PipelineError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn ingest(args: IngestArgs) -> Result<(), PipelineError> {
    let file = File::open(&args.corpus.input).map_err(|source| PipelineError::Io {
        path: args.corpus.input.clone(),
        source,
    })?;
    let raw = parse_corpus(BufReader::new(file), args.corpus.year_min, args.corpus.year_max).map_err(
        |source| PipelineError::Corpus {
            path: args.corpus.input.clone(),
            source,
        },
    )?;
    let corpus = raw.filter_doc_types(&args.corpus.doc_types());
    let issues = corpus.validate();
    println!("records: {}", raw.len());
    for t in DocType::ALL {
        println!("  {t}: {}", raw.doc_type_counts().get(&t).copied().unwrap_or(0));
    }
    println!("kept after filtering: {}", corpus.len());
    println!("issues: {}", issues.len());
    if let Some(path) = &args.output {
        write_file(path, |w| corpus.write_jsonl(w).map_err(std::io::Error::other))?;
    }
    if let Some(path) = &args.issues {
        write_file(path, |w| {
            for issue in &issues {
                serde_json::to_writer(&mut *w, issue)?;
                writeln!(w)?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn cluster_cmd(args: ClusterArgs) -> Result<(), PipelineError> {
    let corpus = args.corpus.load()?;
    let graph = CitationGraph::build(&corpus);
    let outcome = cluster::cluster_with_trace(&graph, &args.cluster.params())?;
    write_file(&args.output, |w| outcome.partition.write_tsv(graph.ids(), w))?;
    if let Some(path) = &args.edges {
        write_file(path, |w| graph.write_edge_list(w))?;
    }
    println!(
        "{} publications, {} citations, {} clusters, quality {:.2}",
        corpus.len(),
        graph.edge_count(),
        outcome.partition.cluster_count(),
        outcome.trace.last().copied().unwrap_or(0.0)
    );
    Ok(())
}

fn detect(args: DetectArgs) -> Result<(), PipelineError> {
    let sets = args.emergence.param_sets(&["set1", "set2"])?;
    let corpus = args.corpus.load()?;
    let graph = CitationGraph::build(&corpus);
    let partition = read_partition(&args.partition, &graph)?;
    let table = TopicTable::build(&corpus, &graph, &partition, args.emergence.impact_scope)?;
    let labels = label_topics(&corpus, &partition, &graph, 10, 2);
    std::fs::create_dir_all(&args.output_dir).map_err(|source| PipelineError::Io {
        path: args.output_dir.clone(),
        source,
    })?;
    let mut reports = Vec::new();
    for (name, params) in &sets {
        let r = table.detect(params)?;
        let dir = &args.output_dir;
        write_file(&dir.join(format!("{name}.attributes.tsv")), |w| {
            write_attribute_table(&report::emerging_rows(&r), w)
        })?;
        write_file(&dir.join(format!("{name}.statistics.tsv")), |w| report::write_statistics(name, &r, w))?;
        write_file(&dir.join(format!("{name}.report.jsonl")), |w| r.write_jsonl(w))?;
        write_file(&dir.join(format!("{name}.report.txt")), |w| {
            report::write_text_report(name, &r, &labels, w)
        })?;
        println!("{name}: {} emerging topics", r.emerging_count);
        reports.push((name.clone(), r));
    }
    let named: Vec<(String, &EmergenceReport)> = reports.iter().map(|(n, r)| (n.clone(), r)).collect();
    write_file(&args.output_dir.join("overlap.txt"), |w| report::write_overlap(&named, w))?;
    Ok(())
}

fn label(args: LabelArgs) -> Result<(), PipelineError> {
    let corpus = args.corpus.load()?;
    let graph = CitationGraph::build(&corpus);
    let partition = read_partition(&args.partition, &graph)?;
    let labels = label_topics(&corpus, &partition, &graph, args.k_terms, args.k_pubs);
    write_file(&args.output, |w| write_labels(&labels, w))
}

fn parse_planted(s: &str) -> Result<PlantedTopic, PipelineError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || config_error("planted", &format!("expected start:base:growth:internal:external, got {s:?}"));
    if parts.len() != 5 {
        return Err(bad());
    }
    Ok(PlantedTopic {
        start_year: parts[0].parse().map_err(|_| bad())?,
        base_count: parts[1].parse().map_err(|_| bad())?,
        growth_factor: parts[2].parse().map_err(|_| bad())?,
        internal_citation_rate: parts[3].parse().map_err(|_| bad())?,
        external_citation_rate: parts[4].parse().map_err(|_| bad())?,
    })
}

fn synth_cmd(args: SynthArgs) -> Result<(), PipelineError> {
    let mut spec = match &args.spec {
        Some(path) => {
            let file = File::open(path).map_err(|source| PipelineError::Io {
                path: path.clone(),
                source,
            })?;
            serde_json::from_reader(BufReader::new(file)).map_err(|e| PipelineError::Input {
                path: path.clone(),
                message: e.to_string(),
            })?
        }
        None => SynthSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(n) = args.background_topics {
        spec.n_background_topics = n;
    }
    if let Some(n) = args.dangling {
        spec.dangling_references = n;
    }
    for p in &args.planted {
        spec.planted.push(parse_planted(p)?);
    }
    let (corpus, manifest) = synth::generate(&spec)?;
    write_file(&args.corpus, |w| corpus.write_jsonl(w).map_err(std::io::Error::other))?;
    write_file(&args.manifest, |w| manifest.write_jsonl(w).map_err(std::io::Error::other))?;
    println!(
        "{} publications, {} topics, {} references",
        corpus.len(),
        manifest.topics.len(),
        manifest.internal_edges
    );
    Ok(())
}

fn score_cmd(args: ScoreArgs) -> Result<(), PipelineError> {
    let corpus = args.corpus.load()?;
    let graph = CitationGraph::build(&corpus);
    let partition = read_partition(&args.partition, &graph)?;
    let open = |path: &PathBuf| {
        File::open(path).map(BufReader::new).map_err(|source| PipelineError::Io {
            path: path.clone(),
            source,
        })
    };
    let report = EmergenceReport::read_jsonl(open(&args.report)?).map_err(|message| PipelineError::Input {
        path: args.report.clone(),
        message,
    })?;
    let manifest = Manifest::read_jsonl(open(&args.manifest)?)?;
    let score = synth::score(&report, &partition, graph.ids(), &manifest, args.threshold);
    println!("{}", serde_json::to_string_pretty(&score).expect("score serializes"));
    Ok(())
}

fn run(args: RunArgs) -> Result<(), PipelineError> {
    let mut config = PipelineConfig::new(&args.corpus.input, &args.output_dir);
    config.year_min = args.corpus.year_min;
    config.year_max = args.corpus.year_max;
    config.doc_types = args.corpus.doc_types();
    config.cluster = args.cluster.params();
    config.param_sets = args.emergence.param_sets(&["set1", "set2"])?;
    config.impact_scope = args.emergence.impact_scope;
    config.k_terms = args.k_terms;
    config.k_pubs = args.k_pubs;
    config.manifest = args.manifest.clone();
    config.matching_threshold = args.threshold;
    config.text_report = false;
    config.jsonl_report = false;
    for f in &args.formats {
        match f.as_str() {
            "text" => config.text_report = true,
            "jsonl" => config.jsonl_report = true,
            other => return Err(config_error("formats", &format!("unknown format {other:?}"))),
        }
    }

    let summary = pipeline::run_pipeline(&config)?;
    println!(
        "{} publications, {} citations, {} clusters, {} validation issues",
        summary.publications, summary.edges, summary.clusters, summary.issues
    );
    for (name, r) in &summary.reports {
        println!("{name}: {} emerging topics", r.emerging_count);
        if args.verbose {
            for v in r.emerging() {
                println!("  cluster {}: emergent at {:?}", v.cluster, v.emergent_periods);
            }
        }
    }
    if summary.reports.len() > 1 {
        println!("identified by all sets: {}", summary.overlap.len());
    }
    if let Some(score) = &summary.score {
        println!(
            "recall {} precision {}",
            score.recall.map_or("NA".into(), |r| format!("{r:.2}")),
            score.precision.map_or("NA".into(), |p| format!("{p:.2}"))
        );
    }
    println!("artifacts written to {}", config.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Cluster(a) => cluster_cmd(a),
        Command::Detect(a) => detect(a),
        Command::Label(a) => label(a),
        Command::Synth(a) => synth_cmd(a),
        Command::Score(a) => score_cmd(a),
        Command::Run(a) => run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
