//! End-to-end run: ingest, cluster, detect under each parameter set, and
//! write every artifact to the output directory.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use emergence_core::citegraph::ImpactScope;
use emergence_core::cluster::{self, ClusterError, ClusterParams, Partition};
use emergence_core::corpus::{parse_corpus, Corpus, CorpusError, DocType, Year};
use emergence_core::detector::{DetectorError, EmergenceParams, EmergenceReport, TopicTable};
use emergence_core::metrics::write_attribute_table;
use emergence_core::synth::{self, Manifest, Score, SynthError};
use emergence_core::CitationGraph;
use thiserror::Error;

use crate::labels::{label_topics, write_labels, TopicLabel};
use crate::report;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config field {field}: {reason}")]
    Config { field: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Corpus {
        path: PathBuf,
        #[source]
        source: CorpusError,
    },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

impl PipelineError {
    /// Process exit status for this error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config { .. } => 2,
            PipelineError::Corpus { .. } | PipelineError::Input { .. } | PipelineError::Synth(_) => 3,
            PipelineError::Io { .. } => 4,
            PipelineError::Cluster(_) | PipelineError::Detector(_) => 5,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            PipelineError::Config { .. } => "config error",
            PipelineError::Corpus { .. } | PipelineError::Input { .. } | PipelineError::Synth(_) => {
                "input error"
            }
            PipelineError::Io { .. } => "i/o error",
            PipelineError::Cluster(_) | PipelineError::Detector(_) => "analysis error",
        }
    }
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub year_min: Year,
    pub year_max: Year,
    pub doc_types: BTreeSet<DocType>,
    pub cluster: ClusterParams,
    /// Named parameter sets, evaluated in order.
    pub param_sets: Vec<(String, EmergenceParams)>,
    pub impact_scope: ImpactScope,
    pub output_dir: PathBuf,
    pub text_report: bool,
    pub jsonl_report: bool,
    pub k_terms: usize,
    pub k_pubs: usize,
    /// Ground truth to score against, when the input is synthetic.
    pub manifest: Option<PathBuf>,
    pub matching_threshold: f64,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            input: input.into(),
            year_min: 2003,
            year_max: 2012,
            doc_types: DocType::research(),
            cluster: ClusterParams::default(),
            param_sets: vec![
                ("set1".into(), EmergenceParams::set1()),
                ("set2".into(), EmergenceParams::set2()),
            ],
            impact_scope: ImpactScope::Corpus,
            output_dir: output_dir.into(),
            text_report: true,
            jsonl_report: true,
            k_terms: 10,
            k_pubs: 2,
            manifest: None,
            matching_threshold: 0.5,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let invalid = |field: &str, reason: &str| {
            Err(PipelineError::Config {
                field: field.to_string(),
                reason: reason.to_string(),
            })
        };
        if self.input.as_os_str().is_empty() {
            return invalid("input", "path is empty");
        }
        if self.output_dir.as_os_str().is_empty() {
            return invalid("output_dir", "path is empty");
        }
        if self.year_min > self.year_max {
            return invalid("year_min", "must not exceed year_max");
        }
        if self.doc_types.is_empty() {
            return invalid("doc_types", "at least one document type is required");
        }
        if self.param_sets.is_empty() {
            return invalid("param_sets", "at least one parameter set is required");
        }
        let mut names = BTreeSet::new();
        for (name, params) in &self.param_sets {
            if name.is_empty() || name.contains(['/', '\\']) {
                return invalid("param_sets", "set names must be nonempty file-name-safe strings");
            }
            if !names.insert(name) {
                return invalid("param_sets", &format!("duplicate set name {name:?}"));
            }
            if let Err(DetectorError::InvalidParams { field, reason }) = params.validate() {
                return invalid(&format!("{name}.{field}"), &reason);
            }
        }
        if let Err(ClusterError::InvalidParams { field, reason }) = self.cluster.validate() {
            return invalid(field, &reason);
        }
        if !(0.0..=1.0).contains(&self.matching_threshold) {
            return invalid("matching_threshold", "must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Reads, filters and returns the corpus named by the config.
pub fn load_corpus(
    path: &Path,
    year_min: Year,
    year_max: Year,
    doc_types: &BTreeSet<DocType>,
) -> Result<Corpus, PipelineError> {
    let file = File::open(path).map_err(io_err(path))?;
    let corpus = parse_corpus(BufReader::new(file), year_min, year_max).map_err(|source| {
        PipelineError::Corpus {
            path: path.to_path_buf(),
            source,
        }
    })?;
    Ok(corpus.filter_doc_types(doc_types))
}

pub fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), PipelineError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

/// What a run produced.
#[derive(Debug)]
pub struct PipelineSummary {
    pub publications: usize,
    pub edges: usize,
    pub clusters: usize,
    pub issues: usize,
    pub reports: Vec<(String, EmergenceReport)>,
    pub overlap: BTreeSet<emergence_core::ClusterId>,
    pub artifacts: Vec<PathBuf>,
    pub score: Option<Score>,
    pub partition: Partition,
    pub labels: Vec<TopicLabel>,
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineSummary, PipelineError> {
    config.validate()?;
    let corpus = load_corpus(&config.input, config.year_min, config.year_max, &config.doc_types)?;
    let issues = corpus.validate().len();
    let graph = CitationGraph::build(&corpus);
    let partition = cluster::cluster(&graph, &config.cluster)?;

    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut artifacts = Vec::new();
    let mut emit = |name: &str, f: &mut dyn FnMut(&mut BufWriter<File>) -> std::io::Result<()>| {
        let path = dir.join(name);
        write_file(&path, |w| f(w))?;
        artifacts.push(path);
        Ok::<(), PipelineError>(())
    };

    emit("partition.tsv", &mut |w| partition.write_tsv(graph.ids(), w))?;

    let labels = label_topics(&corpus, &partition, &graph, config.k_terms, config.k_pubs);
    emit("labels.tsv", &mut |w| write_labels(&labels, w))?;

    let table = TopicTable::build(&corpus, &graph, &partition, config.impact_scope)?;
    let mut reports = Vec::new();
    for (name, params) in &config.param_sets {
        let report = table.detect(params)?;
        emit(&format!("{name}.attributes.tsv"), &mut |w| {
            write_attribute_table(&report::emerging_rows(&report), w)
        })?;
        emit(&format!("{name}.statistics.tsv"), &mut |w| {
            report::write_statistics(name, &report, w)
        })?;
        if config.jsonl_report {
            emit(&format!("{name}.report.jsonl"), &mut |w| report.write_jsonl(w))?;
        }
        if config.text_report {
            emit(&format!("{name}.report.txt"), &mut |w| {
                report::write_text_report(name, &report, &labels, w)
            })?;
        }
        reports.push((name.clone(), report));
    }

    let named: Vec<(String, &EmergenceReport)> = reports.iter().map(|(n, r)| (n.clone(), r)).collect();
    emit("overlap.txt", &mut |w| report::write_overlap(&named, w))?;
    let overlap = emergence_core::detector::overlap(reports.iter().map(|(_, r)| r));

    let trending: BTreeSet<_> = reports.iter().flat_map(|(_, r)| r.emerging_clusters()).collect();
    emit("trends.tsv", &mut |w| {
        report::write_trend_data(trending.iter().map(|&c| &table.series[c as usize]), w)
    })?;

    let score = match &config.manifest {
        Some(path) => {
            let file = File::open(path).map_err(io_err(path))?;
            let manifest = Manifest::read_jsonl(BufReader::new(file))?;
            let mut scores = Vec::new();
            for (name, report) in &reports {
                let s = synth::score(report, &partition, graph.ids(), &manifest, config.matching_threshold);
                scores.push(serde_json::json!({ "set": name, "score": s }));
            }
            emit("score.json", &mut |w| {
                serde_json::to_writer_pretty(&mut *w, &scores)?;
                writeln!(w)
            })?;
            let first = &reports[0].1;
            Some(synth::score(first, &partition, graph.ids(), &manifest, config.matching_threshold))
        }
        None => None,
    };

    Ok(PipelineSummary {
        publications: corpus.len(),
        edges: graph.edge_count(),
        clusters: partition.cluster_count(),
        issues,
        reports,
        overlap,
        artifacts,
        score,
        partition,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_errors_name_the_field() {
        let mut c = PipelineConfig::new("in.jsonl", "out");
        c.param_sets.clear();
        match c.validate() {
            Err(PipelineError::Config { field, .. }) => assert_eq!(field, "param_sets"),
            other => panic!("unexpected {other:?}"),
        }

        let mut c = PipelineConfig::new("in.jsonl", "out");
        c.param_sets[1].1.r_min = -1.0;
        match c.validate() {
            Err(e @ PipelineError::Config { .. }) => {
                assert!(e.to_string().contains("set2.r_min"));
                assert_eq!(e.exit_code(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }

        let mut c = PipelineConfig::new("", "out");
        c.cluster.resolution = 1.0;
        assert!(matches!(c.validate(), Err(PipelineError::Config { field, .. }) if field == "input"));

        let mut c = PipelineConfig::new("in.jsonl", "out");
        c.cluster.resolution = -1.0;
        assert!(matches!(c.validate(), Err(PipelineError::Config { field, .. }) if field == "resolution"));
    }

    #[test]
    fn missing_input_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let c = PipelineConfig::new(dir.path().join("absent.jsonl"), dir.path().join("out"));
        let err = run_pipeline(&c).unwrap_err();
        assert!(matches!(err, PipelineError::Io { .. }));
        assert_eq!(err.exit_code(), 4);
    }
}
