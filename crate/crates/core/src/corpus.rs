//! Publication records: ingest, normalization, document-type filtering and
//! validation.
//!
//! Records are read as JSON Lines, one publication per line:
//!
//! ```text
//! {"id":"P1","year":2005,"doc_type":"article","title_terms":["graphene"],"references":["P0"]}
//! ```
//!
//! `title_terms` and `references` may be omitted. Field order is free.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Calendar year.
pub type Year = i32;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate publication id {id:?} (line {line})")]
    DuplicateId { id: String, line: usize },
    #[error("publication {id:?} has year {year} outside [{year_min}, {year_max}]")]
    YearOutOfRange {
        id: String,
        year: Year,
        year_min: Year,
        year_max: Year,
    },
    #[error("empty publication id (line {line})")]
    EmptyId { line: usize },
    #[error("invalid year range [{year_min}, {year_max}]")]
    InvalidYearRange { year_min: Year, year_max: Year },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocType {
    Article,
    Review,
    Other,
}

impl DocType {
    pub const ALL: [DocType; 3] = [DocType::Article, DocType::Review, DocType::Other];

    /// Articles and reviews, the types retained by default.
    pub fn research() -> BTreeSet<DocType> {
        [DocType::Article, DocType::Review].into_iter().collect()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::Other => "other",
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DocType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "article" => Ok(DocType::Article),
            "review" => Ok(DocType::Review),
            "other" => Ok(DocType::Other),
            _ => Err(format!("unknown document type {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Publication {
    pub id: String,
    pub year: Year,
    pub doc_type: DocType,
    #[serde(default)]
    pub title_terms: Vec<String>,
    #[serde(default)]
    pub references: Vec<String>,
}

impl Publication {
    /// Removes duplicate references (first occurrence wins) and drops
    /// references to the publication itself. Returns true if a
    /// self-reference was removed.
    fn normalize(&mut self) -> bool {
        let mut seen = HashSet::with_capacity(self.references.len());
        let mut had_self = false;
        let id = &self.id;
        self.references.retain(|r| {
            if r == id {
                had_self = true;
                return false;
            }
            seen.insert(r.clone())
        });
        had_self
    }
}

/// A problem found by [`Corpus::validate`]. Issues are informational.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Issue {
    DanglingReference { citing: String, cited: String },
    SelfReferenceRemoved { id: String },
    EmptyTitleTerms { id: String },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::DanglingReference { citing, cited } => {
                write!(f, "{citing}: reference to {cited:?} not in corpus")
            }
            Issue::SelfReferenceRemoved { id } => write!(f, "{id}: self-reference removed"),
            Issue::EmptyTitleTerms { id } => write!(f, "{id}: no title terms"),
        }
    }
}

/// An immutable, id-indexed collection of publications.
///
/// Publications keep their ingest order; every index-based structure
/// downstream (graph nodes, partitions) uses that same order.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    publications: Vec<Publication>,
    index: HashMap<String, usize>,
    self_references: BTreeSet<String>,
    year_min: Year,
    year_max: Year,
}

impl Corpus {
    /// Builds a corpus from already-parsed records, normalizing reference
    /// lists.
    pub fn from_publications(
        publications: impl IntoIterator<Item = Publication>,
        year_min: Year,
        year_max: Year,
    ) -> Result<Self, CorpusError> {
        let mut builder = Builder::new(year_min, year_max)?;
        for (i, p) in publications.into_iter().enumerate() {
            builder.push(p, i + 1)?;
        }
        Ok(builder.finish())
    }

    pub fn len(&self) -> usize {
        self.publications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.publications.is_empty()
    }

    pub fn year_min(&self) -> Year {
        self.year_min
    }

    pub fn year_max(&self) -> Year {
        self.year_max
    }

    pub fn publications(&self) -> &[Publication] {
        &self.publications
    }

    pub fn get(&self, id: &str) -> Option<&Publication> {
        self.index.get(id).map(|&i| &self.publications[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Number of publications of each document type.
    pub fn doc_type_counts(&self) -> HashMap<DocType, usize> {
        let mut counts = HashMap::new();
        for p in &self.publications {
            *counts.entry(p.doc_type).or_insert(0) += 1;
        }
        counts
    }

    /// Keeps exactly the publications whose type is in `allowed`.
    /// Reference lists are left untouched.
    ///
    /// Panics if `allowed` is empty.
    pub fn filter_doc_types(&self, allowed: &BTreeSet<DocType>) -> Corpus {
        assert!(!allowed.is_empty(), "allowed document type set is empty");
        let publications: Vec<Publication> = self
            .publications
            .iter()
            .filter(|p| allowed.contains(&p.doc_type))
            .cloned()
            .collect();
        let index = publications
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.clone(), i))
            .collect::<HashMap<_, _>>();
        let self_references = self
            .self_references
            .iter()
            .filter(|id| index.contains_key(*id))
            .cloned()
            .collect();
        Corpus {
            publications,
            index,
            self_references,
            year_min: self.year_min,
            year_max: self.year_max,
        }
    }

    /// Reports dangling references, removed self-references and empty
    /// title-term lists, in corpus order.
    pub fn validate(&self) -> Vec<Issue> {
        let mut issues = Vec::new();
        for p in &self.publications {
            if self.self_references.contains(&p.id) {
                issues.push(Issue::SelfReferenceRemoved { id: p.id.clone() });
            }
            for r in &p.references {
                if !self.index.contains_key(r) {
                    issues.push(Issue::DanglingReference {
                        citing: p.id.clone(),
                        cited: r.clone(),
                    });
                }
            }
            if p.title_terms.is_empty() {
                issues.push(Issue::EmptyTitleTerms { id: p.id.clone() });
            }
        }
        issues
    }

    /// Writes one JSON record per line, in corpus order.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), CorpusError> {
        for p in &self.publications {
            serde_json::to_writer(&mut out, p).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Parses a JSON Lines record stream. Blank lines are skipped; every other
/// line must be a well-formed record with a year in `[year_min, year_max]`.
pub fn parse_corpus<R: BufRead>(
    input: R,
    year_min: Year,
    year_max: Year,
) -> Result<Corpus, CorpusError> {
    let mut builder = Builder::new(year_min, year_max)?;
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let publication: Publication =
            serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        builder.push(publication, line_no)?;
    }
    Ok(builder.finish())
}

struct Builder {
    publications: Vec<Publication>,
    index: HashMap<String, usize>,
    self_references: BTreeSet<String>,
    year_min: Year,
    year_max: Year,
}

impl Builder {
    fn new(year_min: Year, year_max: Year) -> Result<Self, CorpusError> {
        if year_min > year_max {
            return Err(CorpusError::InvalidYearRange { year_min, year_max });
        }
        Ok(Builder {
            publications: Vec::new(),
            index: HashMap::new(),
            self_references: BTreeSet::new(),
            year_min,
            year_max,
        })
    }

    fn push(&mut self, mut p: Publication, line: usize) -> Result<(), CorpusError> {
        if p.id.is_empty() {
            return Err(CorpusError::EmptyId { line });
        }
        if p.year < self.year_min || p.year > self.year_max {
            return Err(CorpusError::YearOutOfRange {
                id: p.id,
                year: p.year,
                year_min: self.year_min,
                year_max: self.year_max,
            });
        }
        if self.index.contains_key(&p.id) {
            return Err(CorpusError::DuplicateId { id: p.id, line });
        }
        if p.normalize() {
            self.self_references.insert(p.id.clone());
        }
        self.index.insert(p.id.clone(), self.publications.len());
        self.publications.push(p);
        Ok(())
    }

    fn finish(self) -> Corpus {
        Corpus {
            publications: self.publications,
            index: self.index,
            self_references: self.self_references,
            year_min: self.year_min,
            year_max: self.year_max,
        }
    }
}
