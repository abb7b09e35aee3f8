//! Synthetic corpora with known topic structure.
//!
//! Background topics publish a stationary number of papers per year (drawn
//! from a power law, with ±10% yearly noise). Planted topics start at a
//! given year and grow geometrically. Every publication cites earlier
//! publications of its own topic and, less often, of other topics, so the
//! citation graph carries the topic structure. The manifest records the
//! true topic of every publication for scoring.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::Partition;
use crate::corpus::{Corpus, CorpusError, DocType, Publication, Year};
use crate::detector::EmergenceReport;

pub type TopicId = u32;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec field {field}: {reason}")]
    InvalidSpec { field: String, reason: String },
    #[error("infeasible spec: {0}")]
    Infeasible(String),
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Continuous power law on `[min, max]` with density ∝ x^-exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub exponent: f64,
    pub min: f64,
    pub max: f64,
}

impl PowerLaw {
    fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.random();
        let a = 1.0 - self.exponent;
        if a.abs() < 1e-12 {
            return self.min * (self.max / self.min).powf(u);
        }
        let lo = self.min.powf(a);
        let hi = self.max.powf(a);
        (lo + u * (hi - lo)).powf(1.0 / a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTopic {
    pub start_year: Year,
    pub base_count: u64,
    /// Yearly multiplicative growth of the publication count.
    pub growth_factor: f64,
    /// Expected references per publication to earlier publications of the
    /// same topic.
    pub internal_citation_rate: f64,
    /// Expected references per publication to other topics.
    pub external_citation_rate: f64,
}

impl PlantedTopic {
    /// Publications in `year`: `round(base * growth^(year - start))`, zero
    /// before the start year.
    pub fn count_in(&self, year: Year) -> u64 {
        if year < self.start_year {
            return 0;
        }
        (self.base_count as f64 * self.growth_factor.powi(year - self.start_year)).round() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub year_min: Year,
    pub year_max: Year,
    pub n_background_topics: usize,
    /// Mean publications per year of each background topic.
    pub background_size: PowerLaw,
    pub background_internal_rate: f64,
    pub background_external_rate: f64,
    pub planted: Vec<PlantedTopic>,
    pub review_fraction: f64,
    pub other_fraction: f64,
    /// References to ids outside the corpus, added on purpose.
    pub dangling_references: usize,
    pub terms_per_title: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            year_min: 2003,
            year_max: 2012,
            n_background_topics: 20,
            background_size: PowerLaw {
                exponent: 2.0,
                min: 10.0,
                max: 200.0,
            },
            background_internal_rate: 8.0,
            background_external_rate: 0.5,
            planted: Vec::new(),
            review_fraction: 0.1,
            other_fraction: 0.05,
            dangling_references: 0,
            terms_per_title: 5,
            seed: 1,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let invalid = |field: &str, reason: String| {
            Err(SynthError::InvalidSpec {
                field: field.to_string(),
                reason,
            })
        };
        if self.year_max - self.year_min + 1 < 5 {
            return invalid("year_max", "the year span must cover at least 5 years".into());
        }
        if self.n_background_topics < 1 {
            return invalid("n_background_topics", "at least one background topic is required".into());
        }
        let bs = &self.background_size;
        if !(bs.min >= 1.0 && bs.max >= bs.min && bs.max.is_finite()) {
            return invalid("background_size", "need 1 <= min <= max".into());
        }
        if !(bs.exponent > 0.0 && bs.exponent.is_finite()) {
            return invalid("background_size.exponent", "must be positive".into());
        }
        for (name, rate) in [
            ("background_internal_rate", self.background_internal_rate),
            ("background_external_rate", self.background_external_rate),
        ] {
            if !(rate >= 0.0 && rate.is_finite()) {
                return invalid(name, format!("must be nonnegative, got {rate}"));
            }
        }
        for (name, f) in [("review_fraction", self.review_fraction), ("other_fraction", self.other_fraction)] {
            if !(0.0..=1.0).contains(&f) {
                return invalid(name, format!("must lie in [0, 1], got {f}"));
            }
        }
        if self.review_fraction + self.other_fraction > 1.0 {
            return invalid("other_fraction", "review and other fractions exceed 1".into());
        }
        for (i, p) in self.planted.iter().enumerate() {
            let field = |f: &str| format!("planted[{i}].{f}");
            if p.base_count < 1 {
                return invalid(&field("base_count"), "must be at least 1".into());
            }
            if !(p.growth_factor > 0.0 && p.growth_factor.is_finite()) {
                return invalid(&field("growth_factor"), "must be positive".into());
            }
            if p.start_year < self.year_min || p.start_year > self.year_max {
                return invalid(&field("start_year"), "outside the year range".into());
            }
            for (f, rate) in [
                ("internal_citation_rate", p.internal_citation_rate),
                ("external_citation_rate", p.external_citation_rate),
            ] {
                if !(rate >= 0.0 && rate.is_finite()) {
                    return invalid(&field(f), format!("must be nonnegative, got {rate}"));
                }
            }
            let total: u64 = (self.year_min..=self.year_max).map(|y| p.count_in(y)).sum();
            if p.internal_citation_rate > total.saturating_sub(1) as f64 {
                return Err(SynthError::Infeasible(format!(
                    "planted topic {i} cites {} own publications on average but has only {total}",
                    p.internal_citation_rate
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopicKind {
    Background,
    Planted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRecord {
    pub topic: TopicId,
    pub kind: TopicKind,
    /// Generated publications per year from `year_min`.
    pub yearly_counts: Vec<u64>,
    pub planted: Option<PlantedTopic>,
}

impl TopicRecord {
    /// Planted topics that actually grow count as emergent ground truth.
    pub fn is_emergent(&self) -> bool {
        self.planted.as_ref().is_some_and(|p| p.growth_factor > 1.0)
    }

    /// Planted topics with flat counts: must never be detected.
    pub fn is_flat_control(&self) -> bool {
        self.planted.as_ref().is_some_and(|p| p.growth_factor == 1.0)
    }
}

/// Ground truth for a generated corpus.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub year_min: Year,
    pub topics: Vec<TopicRecord>,
    /// (publication id, true topic), in corpus order.
    pub assignments: Vec<(String, TopicId)>,
    /// Distinct references between generated publications.
    pub internal_edges: usize,
    pub doc_type_counts: BTreeMap<DocType, usize>,
    pub dangling_references: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum ManifestLine {
    Summary {
        year_min: Year,
        internal_edges: usize,
        doc_type_counts: BTreeMap<DocType, usize>,
        dangling_references: usize,
    },
    Topic(TopicRecord),
    Publication { id: String, topic: TopicId },
}

impl Manifest {
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), SynthError> {
        let mut line = |l: ManifestLine| -> Result<(), SynthError> {
            serde_json::to_writer(&mut out, &l).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
            Ok(())
        };
        line(ManifestLine::Summary {
            year_min: self.year_min,
            internal_edges: self.internal_edges,
            doc_type_counts: self.doc_type_counts.clone(),
            dangling_references: self.dangling_references,
        })?;
        for t in &self.topics {
            line(ManifestLine::Topic(t.clone()))?;
        }
        for (id, topic) in &self.assignments {
            line(ManifestLine::Publication {
                id: id.clone(),
                topic: *topic,
            })?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, SynthError> {
        let mut m = Manifest::default();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ManifestLine = serde_json::from_str(&line).map_err(|e| SynthError::Manifest {
                line: i + 1,
                message: e.to_string(),
            })?;
            match record {
                ManifestLine::Summary {
                    year_min,
                    internal_edges,
                    doc_type_counts,
                    dangling_references,
                } => {
                    m.year_min = year_min;
                    m.internal_edges = internal_edges;
                    m.doc_type_counts = doc_type_counts;
                    m.dangling_references = dangling_references;
                }
                ManifestLine::Topic(t) => m.topics.push(t),
                ManifestLine::Publication { id, topic } => m.assignments.push((id, topic)),
            }
        }
        Ok(m)
    }

    /// Publication ids of each topic.
    pub fn members(&self) -> HashMap<TopicId, HashSet<&str>> {
        let mut members: HashMap<TopicId, HashSet<&str>> = HashMap::new();
        for (id, topic) in &self.assignments {
            members.entry(*topic).or_default().insert(id.as_str());
        }
        members
    }
}

fn topic_terms(topic: TopicId) -> Vec<String> {
    (0..12).map(|k| format!("topic{topic}term{k}")).collect()
}

const COMMON_TERMS: [&str; 8] = [
    "analysis", "effect", "model", "study", "method", "system", "evidence", "approach",
];

/// Generates a corpus and its manifest. Deterministic for a given spec.
pub fn generate(spec: &SynthSpec) -> Result<(Corpus, Manifest), SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let years: Vec<Year> = (spec.year_min..=spec.year_max).collect();

    struct TopicPlan {
        counts: Vec<u64>,
        internal: f64,
        external: f64,
        terms: Vec<String>,
    }
    let mut plans = Vec::new();
    let mut topics = Vec::new();
    for t in 0..spec.n_background_topics {
        let mean = spec.background_size.sample(&mut rng);
        let counts: Vec<u64> = years
            .iter()
            .map(|_| (mean * rng.random_range(0.9..=1.1)).round().max(1.0) as u64)
            .collect();
        topics.push(TopicRecord {
            topic: t as TopicId,
            kind: TopicKind::Background,
            yearly_counts: counts.clone(),
            planted: None,
        });
        plans.push(TopicPlan {
            counts,
            internal: spec.background_internal_rate,
            external: spec.background_external_rate,
            terms: topic_terms(t as TopicId),
        });
    }
    for p in &spec.planted {
        let t = topics.len() as TopicId;
        let counts: Vec<u64> = years.iter().map(|&y| p.count_in(y)).collect();
        topics.push(TopicRecord {
            topic: t,
            kind: TopicKind::Planted,
            yearly_counts: counts.clone(),
            planted: Some(p.clone()),
        });
        plans.push(TopicPlan {
            counts,
            internal: p.internal_citation_rate,
            external: p.external_citation_rate,
            terms: topic_terms(t),
        });
    }

    let mut publications: Vec<Publication> = Vec::new();
    let mut assignments: Vec<(String, TopicId)> = Vec::new();
    // earlier publications (indices into `publications`) per topic
    let mut by_topic: Vec<Vec<usize>> = vec![Vec::new(); plans.len()];
    let mut internal_edges = 0usize;

    for (yi, &year) in years.iter().enumerate() {
        for (topic, plan) in plans.iter().enumerate() {
            for _ in 0..plan.counts[yi] {
                let index = publications.len();
                let id = format!("S{index:07}");
                let mut references = Vec::new();

                let own = &by_topic[topic];
                let wanted = poisson(plan.internal, &mut rng);
                if wanted >= own.len() {
                    references.extend(own.iter().map(|&i| publications[i].id.clone()));
                } else {
                    for &i in own.choose_multiple(&mut rng, wanted) {
                        references.push(publications[i].id.clone());
                    }
                }

                let wanted = poisson(plan.external, &mut rng);
                let foreign = index - own.len();
                let mut chosen = HashSet::new();
                let mut attempts = 0;
                while chosen.len() < wanted.min(foreign) && attempts < 100 * (wanted + 1) {
                    attempts += 1;
                    let i = rng.random_range(0..index);
                    if assignments[i].1 != topic as TopicId {
                        chosen.insert(i);
                    }
                }
                let mut chosen: Vec<usize> = chosen.into_iter().collect();
                chosen.sort_unstable();
                references.extend(chosen.iter().map(|&i| publications[i].id.clone()));
                internal_edges += references.len();

                let r: f64 = rng.random();
                let doc_type = if r < spec.other_fraction {
                    DocType::Other
                } else if r < spec.other_fraction + spec.review_fraction {
                    DocType::Review
                } else {
                    DocType::Article
                };

                let mut title_terms: Vec<String> = Vec::with_capacity(spec.terms_per_title + 1);
                for _ in 0..spec.terms_per_title {
                    // earlier vocabulary entries are more frequent
                    let k = (rng.random::<f64>().powi(2) * plan.terms.len() as f64) as usize;
                    let term = &plan.terms[k.min(plan.terms.len() - 1)];
                    if !title_terms.contains(term) {
                        title_terms.push(term.clone());
                    }
                }
                if spec.terms_per_title > 0 {
                    title_terms.push(COMMON_TERMS.choose(&mut rng).unwrap().to_string());
                }

                assignments.push((id.clone(), topic as TopicId));
                publications.push(Publication {
                    id,
                    year,
                    doc_type,
                    title_terms,
                    references,
                });
                by_topic[topic].push(index);
            }
        }
    }

    if spec.dangling_references > 0 && publications.is_empty() {
        return Err(SynthError::Infeasible("no publications to carry dangling references".into()));
    }
    for k in 0..spec.dangling_references {
        let i = rng.random_range(0..publications.len());
        publications[i].references.push(format!("MISSING{k:05}"));
    }

    let mut doc_type_counts = BTreeMap::new();
    for p in &publications {
        *doc_type_counts.entry(p.doc_type).or_insert(0) += 1;
    }
    let corpus = Corpus::from_publications(publications, spec.year_min, spec.year_max)?;
    Ok((
        corpus,
        Manifest {
            year_min: spec.year_min,
            topics,
            assignments,
            internal_edges,
            doc_type_counts,
            dangling_references: spec.dangling_references,
        },
    ))
}

fn poisson(rate: f64, rng: &mut impl Rng) -> usize {
    if rate <= 0.0 {
        return 0;
    }
    Poisson::new(rate).expect("positive finite rate").sample(rng) as usize
}

/// Jaccard similarity of two id sets.
pub fn jaccard(a: &HashSet<&str>, b: &HashSet<&str>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count();
    inter as f64 / (a.len() + b.len() - inter) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Score {
    /// Absent when the manifest has no emergent planted topic.
    pub recall: Option<f64>,
    /// Absent when nothing was detected.
    pub precision: Option<f64>,
    pub planted_emergent: usize,
    pub detections: usize,
    pub matched_planted: Vec<TopicId>,
    pub matched_detections: usize,
    /// Flat control topics matched by some detection.
    pub flagged_controls: Vec<TopicId>,
}

/// Matches the emerging clusters of `report` to planted topics by Jaccard
/// overlap of publication ids. `ids` names the partition's nodes; manifest
/// topics are restricted to those ids before matching.
pub fn score(
    report: &EmergenceReport,
    partition: &Partition,
    ids: &[String],
    manifest: &Manifest,
    matching_threshold: f64,
) -> Score {
    let universe: HashSet<&str> = ids.iter().map(String::as_str).collect();
    let members = partition.members();
    let detections: Vec<HashSet<&str>> = report
        .emerging()
        .map(|v| members[v.cluster as usize].iter().map(|&n| ids[n].as_str()).collect())
        .collect();
    let truth = manifest.members();
    let restricted = |topic: TopicId| -> HashSet<&str> {
        truth
            .get(&topic)
            .map(|s| s.iter().copied().filter(|id| universe.contains(id)).collect())
            .unwrap_or_default()
    };

    let matches = |topic: TopicId| -> Vec<usize> {
        let t = restricted(topic);
        detections
            .iter()
            .enumerate()
            .filter(|(_, d)| jaccard(d, &t) >= matching_threshold)
            .map(|(i, _)| i)
            .collect()
    };

    let mut matched_planted = Vec::new();
    let mut matched_detection = vec![false; detections.len()];
    let mut planted_emergent = 0;
    let mut flagged_controls = Vec::new();
    for t in &manifest.topics {
        if t.is_emergent() {
            planted_emergent += 1;
            let m = matches(t.topic);
            if !m.is_empty() {
                matched_planted.push(t.topic);
            }
            for i in m {
                matched_detection[i] = true;
            }
        } else if t.is_flat_control() && !matches(t.topic).is_empty() {
            flagged_controls.push(t.topic);
        }
    }
    let matched_detections = matched_detection.iter().filter(|&&b| b).count();
    Score {
        recall: (planted_emergent > 0).then(|| matched_planted.len() as f64 / planted_emergent as f64),
        precision: (!detections.is_empty()).then(|| matched_detections as f64 / detections.len() as f64),
        planted_emergent,
        detections: detections.len(),
        matched_planted,
        matched_detections,
        flagged_controls,
    }
}
