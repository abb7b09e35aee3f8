//! Joint evaluation of the four emergence criteria.
//!
//! A topic emerges at start year `t` when, for the same `t`:
//!
//! 1. growth `r(t, dt) >= r_min`
//! 2. novelty `ps(t) <= p_max`
//! 3. impact `c(t, dt) >= c_min`
//! 4. coherence `h >= h_min` (time independent)
//!
//! Start years are scanned in ascending order and the first hit is the
//! topic's emergent period.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::citegraph::{CitationGraph, CitationProfile, ImpactScope};
use crate::cluster::{ClusterId, Partition};
use crate::corpus::{Corpus, Year};
use crate::metrics::{
    self, attribute_statistics, attributes_at, max_growth_attributes, AttributeRow,
    AttributeStatistics, MetricsError, TopicSeries, WindowCitations,
};

#[derive(Debug, Error, PartialEq)]
pub enum DetectorError {
    #[error("invalid emergence parameter {field}: {reason}")]
    InvalidParams { field: &'static str, reason: String },
    #[error("unknown parameter preset {0:?} (expected set1 or set2)")]
    UnknownPreset(String),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Thresholds for one detection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmergenceParams {
    pub dt: u32,
    pub r_min: f64,
    pub p_max: f64,
    pub c_min: u64,
    pub h_min: f64,
}

impl EmergenceParams {
    /// Two-year window, growth at least 2, at least 1500 citations.
    pub fn set1() -> Self {
        EmergenceParams {
            dt: 2,
            r_min: 2.0,
            p_max: 100.0,
            c_min: 1500,
            h_min: 1.0,
        }
    }

    /// Five-year window, growth at least 5, at least 2500 citations.
    pub fn set2() -> Self {
        EmergenceParams {
            dt: 5,
            r_min: 5.0,
            p_max: 100.0,
            c_min: 2500,
            h_min: 1.0,
        }
    }

    pub fn preset(name: &str) -> Result<Self, DetectorError> {
        match name {
            "set1" => Ok(Self::set1()),
            "set2" => Ok(Self::set2()),
            _ => Err(DetectorError::UnknownPreset(name.to_string())),
        }
    }

    /// Scales the citation threshold, e.g. to a corpus smaller than the one
    /// the thresholds were tuned on. Rounds to the nearest count.
    pub fn scale_impact(mut self, factor: f64) -> Self {
        self.c_min = (self.c_min as f64 * factor).round() as u64;
        self
    }

    pub fn validate(&self) -> Result<(), DetectorError> {
        let invalid = |field, reason: String| Err(DetectorError::InvalidParams { field, reason });
        if self.dt < 1 {
            return invalid("dt", "must be at least 1".into());
        }
        if self.r_min.is_nan() || self.r_min <= 0.0 {
            return invalid("r_min", format!("must be positive, got {}", self.r_min));
        }
        if self.p_max.is_nan() || self.p_max <= 0.0 {
            return invalid("p_max", format!("must be positive, got {}", self.p_max));
        }
        if self.h_min.is_nan() || self.h_min < 0.0 {
            return invalid("h_min", format!("must be nonnegative, got {}", self.h_min));
        }
        Ok(())
    }
}

/// Which criteria held at one start year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriteriaOutcome {
    pub growth: bool,
    pub novelty: bool,
    pub impact: bool,
    pub coherence: bool,
}

impl CriteriaOutcome {
    pub fn all(&self) -> bool {
        self.growth && self.novelty && self.impact && self.coherence
    }

    pub fn passed(&self) -> usize {
        [self.growth, self.novelty, self.impact, self.coherence]
            .iter()
            .filter(|&&b| b)
            .count()
    }

    pub fn check(row: &AttributeRow, params: &EmergenceParams) -> Self {
        CriteriaOutcome {
            growth: row.growth.is_some_and(|r| r >= params.r_min),
            novelty: row.novelty <= params.p_max,
            impact: row.impact >= params.c_min,
            coherence: row.coherence >= params.h_min,
        }
    }
}

/// Closest miss of a non-emerging topic: the start year satisfying the
/// most criteria (earliest on ties).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub year: Year,
    pub criteria: CriteriaOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmergenceVerdict {
    pub cluster: ClusterId,
    pub emerging: bool,
    pub begin_year: Option<Year>,
    pub end_year: Option<Year>,
    /// Attributes over the emergent period when emerging, otherwise over
    /// the maximum-growth window.
    pub attributes: Option<AttributeRow>,
    /// Attributes over the maximum-growth window.
    pub max_growth: Option<AttributeRow>,
    pub best_candidate: Option<Candidate>,
    /// Every start year at which all criteria hold, ascending.
    pub emergent_periods: Vec<Year>,
    pub total_pubs: u64,
}

pub fn evaluate_topic(
    series: &TopicSeries,
    citations: &impl WindowCitations,
    params: &EmergenceParams,
) -> EmergenceVerdict {
    let mut first: Option<AttributeRow> = None;
    let mut periods = Vec::new();
    let mut best: Option<Candidate> = None;
    for t in series.window_starts(params.dt) {
        let row = attributes_at(series, citations, t, params.dt).expect("window start is in range");
        let criteria = CriteriaOutcome::check(&row, params);
        if criteria.all() {
            periods.push(t);
            if first.is_none() {
                first = Some(row);
            }
        } else if best.as_ref().is_none_or(|b| criteria.passed() > b.criteria.passed()) {
            best = Some(Candidate { year: t, criteria });
        }
    }
    let max_growth = max_growth_attributes(series, citations, params.dt).ok();
    match first {
        Some(row) => EmergenceVerdict {
            cluster: series.cluster,
            emerging: true,
            begin_year: Some(row.begin_year),
            end_year: Some(row.end_year),
            attributes: Some(row),
            max_growth,
            best_candidate: None,
            emergent_periods: periods,
            total_pubs: series.total_pubs,
        },
        None => EmergenceVerdict {
            cluster: series.cluster,
            emerging: false,
            begin_year: None,
            end_year: None,
            attributes: max_growth.clone(),
            max_growth,
            best_candidate: best,
            emergent_periods: periods,
            total_pubs: series.total_pubs,
        },
    }
}

/// Verdicts for every topic under one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmergenceReport {
    pub params: EmergenceParams,
    pub impact_scope: String,
    pub verdicts: Vec<EmergenceVerdict>,
    pub emerging_count: usize,
    /// Statistics over every topic's maximum-growth attributes.
    pub statistics: Option<AttributeStatistics>,
}

impl EmergenceReport {
    pub fn emerging(&self) -> impl Iterator<Item = &EmergenceVerdict> {
        self.verdicts.iter().filter(|v| v.emerging)
    }

    pub fn emerging_clusters(&self) -> BTreeSet<ClusterId> {
        self.emerging().map(|v| v.cluster).collect()
    }

    /// Line-delimited JSON: a `params` record, one `verdict` record per
    /// topic, then a `summary` record.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut line = |value: serde_json::Value| -> std::io::Result<()> {
            serde_json::to_writer(&mut out, &value)?;
            out.write_all(b"\n")
        };
        line(serde_json::json!({
            "record": "params",
            "params": self.params,
            "impact_scope": self.impact_scope,
        }))?;
        for v in &self.verdicts {
            line(serde_json::json!({ "record": "verdict", "verdict": v }))?;
        }
        line(serde_json::json!({
            "record": "summary",
            "topics": self.verdicts.len(),
            "emerging_count": self.emerging_count,
            "statistics": self.statistics,
        }))
    }

    /// Reads a report written by [`EmergenceReport::write_jsonl`].
    pub fn read_jsonl<R: std::io::BufRead>(input: R) -> Result<Self, String> {
        let mut params = None;
        let mut scope = String::new();
        let mut verdicts = Vec::new();
        let mut statistics = None;
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |e: serde_json::Error| format!("line {}: {e}", i + 1);
            let mut value: serde_json::Value = serde_json::from_str(&line).map_err(bad)?;
            match value["record"].as_str() {
                Some("params") => {
                    params = Some(serde_json::from_value(value["params"].take()).map_err(bad)?);
                    scope = value["impact_scope"].as_str().unwrap_or("corpus").to_string();
                }
                Some("verdict") => verdicts.push(serde_json::from_value(value["verdict"].take()).map_err(bad)?),
                Some("summary") => statistics = serde_json::from_value(value["statistics"].take()).map_err(bad)?,
                other => return Err(format!("line {}: unknown record type {other:?}", i + 1)),
            }
        }
        let params = params.ok_or("report has no params record")?;
        let emerging_count = verdicts.iter().filter(|v: &&EmergenceVerdict| v.emerging).count();
        Ok(EmergenceReport {
            params,
            impact_scope: scope,
            verdicts,
            emerging_count,
            statistics,
        })
    }
}

fn scope_name(scope: ImpactScope) -> &'static str {
    match scope {
        ImpactScope::Corpus => "corpus",
        ImpactScope::Cluster => "cluster",
    }
}

/// Precomputed per-topic series and citation profiles, reusable across
/// parameter sets.
#[derive(Debug, Clone)]
pub struct TopicTable {
    pub series: Vec<TopicSeries>,
    pub profiles: Vec<CitationProfile>,
    pub scope: ImpactScope,
}

impl TopicTable {
    pub fn build(
        corpus: &Corpus,
        graph: &CitationGraph,
        partition: &Partition,
        scope: ImpactScope,
    ) -> Result<Self, DetectorError> {
        let series = metrics::topic_series_all(corpus, graph, partition)?;
        let profiles = graph
            .citation_profiles(partition, scope)
            .map_err(MetricsError::from)?;
        Ok(TopicTable {
            series,
            profiles,
            scope,
        })
    }

    pub fn detect(&self, params: &EmergenceParams) -> Result<EmergenceReport, DetectorError> {
        params.validate()?;
        let verdicts: Vec<EmergenceVerdict> = self
            .series
            .iter()
            .zip(&self.profiles)
            .map(|(s, p)| evaluate_topic(s, p, params))
            .collect();
        let rows: Vec<AttributeRow> = verdicts.iter().filter_map(|v| v.max_growth.clone()).collect();
        let statistics = if rows.is_empty() {
            None
        } else {
            Some(attribute_statistics(&rows)?)
        };
        Ok(EmergenceReport {
            params: params.clone(),
            impact_scope: scope_name(self.scope).to_string(),
            emerging_count: verdicts.iter().filter(|v| v.emerging).count(),
            verdicts,
            statistics,
        })
    }
}

pub fn detect_all(
    corpus: &Corpus,
    partition: &Partition,
    graph: &CitationGraph,
    params: &EmergenceParams,
    scope: ImpactScope,
) -> Result<EmergenceReport, DetectorError> {
    TopicTable::build(corpus, graph, partition, scope)?.detect(params)
}

/// Topics emerging under every one of the given reports.
pub fn overlap<'a>(reports: impl IntoIterator<Item = &'a EmergenceReport>) -> BTreeSet<ClusterId> {
    let mut iter = reports.into_iter();
    let Some(first) = iter.next() else {
        return BTreeSet::new();
    };
    iter.fold(first.emerging_clusters(), |acc, r| {
        acc.intersection(&r.emerging_clusters()).copied().collect()
    })
}
