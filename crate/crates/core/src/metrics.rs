//! Per-topic time series and the four attributes of emergence.
//!
//! For topic `i` and year `t`, with `p(t)` the number of publications:
//!
//! - smoothed count `ps(t) = (p(t-2) + p(t-1) + p(t)) / 3`
//! - growth `r(t, dt) = ps(t + dt) / ps(t)`
//! - novelty: `ps(t)` at the start of a growth window
//! - impact `c(t, dt)`: citations received by the topic's publications from
//!   `[t, t + dt]`, counting only citing publications from the same window
//! - coherence `h`: within-topic citations divided by topic size

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::citegraph::{CitationGraph, CitationProfile, GraphError, ImpactScope};
use crate::cluster::{ClusterId, Partition};
use crate::corpus::{Corpus, Year};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("year {year} outside the smoothed range {range}")]
    OutsideSmoothedRange { year: Year, range: String },
    #[error("cluster {0} is empty")]
    EmptyCluster(ClusterId),
    #[error("no growth window of {dt} years fits the series")]
    NoValidWindow { dt: u32 },
    #[error("cannot summarize an empty set of rows")]
    EmptyRows,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Publication counts for every year of a contiguous range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearlyCounts {
    year_min: Year,
    counts: Vec<u64>,
}

impl YearlyCounts {
    pub fn new(year_min: Year, counts: Vec<u64>) -> Self {
        YearlyCounts { year_min, counts }
    }

    pub fn zeros(year_min: Year, year_max: Year) -> Self {
        YearlyCounts {
            year_min,
            counts: vec![0; (year_max - year_min + 1).max(0) as usize],
        }
    }

    pub fn year_min(&self) -> Year {
        self.year_min
    }

    pub fn year_max(&self) -> Year {
        self.year_min + self.counts.len() as Year - 1
    }

    pub fn get(&self, year: Year) -> Option<u64> {
        let offset = usize::try_from(year - self.year_min).ok()?;
        self.counts.get(offset).copied()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Year, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.year_min + i as Year, c))
    }

    fn increment(&mut self, year: Year) {
        let offset = (year - self.year_min) as usize;
        self.counts[offset] += 1;
    }
}

/// Trailing three-year means. Defined from the third year of the raw range
/// onward; earlier years are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedSeries {
    first_year: Year,
    values: Vec<f64>,
}

impl SmoothedSeries {
    pub fn get(&self, year: Year) -> Option<f64> {
        let offset = usize::try_from(year - self.first_year).ok()?;
        self.values.get(offset).copied()
    }

    /// First year with a defined value, if any.
    pub fn first_year(&self) -> Option<Year> {
        (!self.values.is_empty()).then_some(self.first_year)
    }

    pub fn last_year(&self) -> Option<Year> {
        (!self.values.is_empty()).then(|| self.first_year + self.values.len() as Year - 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Year, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.first_year + i as Year, v))
    }

    fn range_label(&self) -> String {
        match (self.first_year(), self.last_year()) {
            (Some(a), Some(b)) => format!("[{a}, {b}]"),
            _ => "(empty)".to_string(),
        }
    }
}

pub fn smooth(raw: &YearlyCounts) -> SmoothedSeries {
    let values = raw
        .counts
        .windows(3)
        .map(|w| (w[0] + w[1] + w[2]) as f64 / 3.0)
        .collect();
    SmoothedSeries {
        first_year: raw.year_min + 2,
        values,
    }
}

/// `ps(t + dt) / ps(t)`. `Ok(None)` when the baseline is zero.
pub fn growth_ratio(smoothed: &SmoothedSeries, t: Year, dt: u32) -> Result<Option<f64>, MetricsError> {
    let end = t + dt as Year;
    let lookup = |year: Year| {
        smoothed.get(year).ok_or_else(|| MetricsError::OutsideSmoothedRange {
            year,
            range: smoothed.range_label(),
        })
    };
    let base = lookup(t)?;
    let later = lookup(end)?;
    Ok((base > 0.0).then(|| later / base))
}

/// Yearly publication counts of one cluster over the corpus year range.
/// The partition is positional over the corpus.
pub fn yearly_counts(
    corpus: &Corpus,
    partition: &Partition,
    cluster: ClusterId,
) -> Result<YearlyCounts, MetricsError> {
    check_partition(corpus, partition)?;
    if cluster as usize >= partition.cluster_count() {
        return Err(GraphError::UnknownCluster(cluster).into());
    }
    let mut counts = YearlyCounts::zeros(corpus.year_min(), corpus.year_max());
    for (node, p) in corpus.publications().iter().enumerate() {
        if partition.cluster_of(node) == cluster {
            counts.increment(p.year);
        }
    }
    Ok(counts)
}

/// Yearly counts of every cluster in one pass.
pub fn yearly_counts_all(corpus: &Corpus, partition: &Partition) -> Result<Vec<YearlyCounts>, MetricsError> {
    check_partition(corpus, partition)?;
    let mut all = vec![YearlyCounts::zeros(corpus.year_min(), corpus.year_max()); partition.cluster_count()];
    for (node, p) in corpus.publications().iter().enumerate() {
        all[partition.cluster_of(node) as usize].increment(p.year);
    }
    Ok(all)
}

fn check_partition(corpus: &Corpus, partition: &Partition) -> Result<(), MetricsError> {
    if corpus.len() != partition.len() {
        return Err(GraphError::PartitionMismatch {
            partition: partition.len(),
            graph: corpus.len(),
        }
        .into());
    }
    Ok(())
}

/// Within-cluster citations per publication.
pub fn coherence(
    graph: &CitationGraph,
    partition: &Partition,
    cluster: ClusterId,
    total_pubs: u64,
) -> Result<f64, MetricsError> {
    let within = graph.within_cluster_citations(partition, cluster)?;
    coherence_ratio(within, total_pubs).ok_or(MetricsError::EmptyCluster(cluster))
}

fn coherence_ratio(within: u64, total_pubs: u64) -> Option<f64> {
    (total_pubs > 0).then(|| within as f64 / total_pubs as f64)
}

/// Windowed citation impact over `[t, t + dt]`.
pub fn impact(
    graph: &CitationGraph,
    partition: &Partition,
    cluster: ClusterId,
    t: Year,
    dt: u32,
    scope: ImpactScope,
) -> Result<u64, MetricsError> {
    Ok(graph.windowed_citations(partition, cluster, t, dt, scope)?)
}

/// Source of windowed citation counts for one topic: the number of
/// citations received by topic publications from `[start, end]` by
/// publications from the same window.
pub trait WindowCitations {
    fn citations(&self, start: Year, end: Year) -> u64;
}

impl WindowCitations for CitationProfile {
    fn citations(&self, start: Year, end: Year) -> u64 {
        self.windowed(start, end)
    }
}

impl<F: Fn(Year, Year) -> u64> WindowCitations for F {
    fn citations(&self, start: Year, end: Year) -> u64 {
        self(start, end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSeries {
    pub cluster: ClusterId,
    pub raw: YearlyCounts,
    pub smoothed: SmoothedSeries,
    pub total_pubs: u64,
    pub coherence: f64,
}

impl TopicSeries {
    pub fn new(cluster: ClusterId, raw: YearlyCounts, coherence: f64) -> Self {
        let smoothed = smooth(&raw);
        let total_pubs = raw.total();
        TopicSeries {
            cluster,
            raw,
            smoothed,
            total_pubs,
            coherence,
        }
    }

    /// Start years `t` for which both `t` and `t + dt` have smoothed values.
    pub fn window_starts(&self, dt: u32) -> impl Iterator<Item = Year> {
        match (self.smoothed.first_year(), self.smoothed.last_year()) {
            (Some(first), Some(last)) => first..=(last - dt as Year),
            #[allow(clippy::reversed_empty_ranges)]
            _ => 1..=0,
        }
    }
}

/// Series for every cluster of the partition, with coherence computed from
/// the graph.
pub fn topic_series_all(
    corpus: &Corpus,
    graph: &CitationGraph,
    partition: &Partition,
) -> Result<Vec<TopicSeries>, MetricsError> {
    let counts = yearly_counts_all(corpus, partition)?;
    let within = graph.within_cluster_citations_all(partition)?;
    counts
        .into_iter()
        .zip(within)
        .enumerate()
        .map(|(c, (raw, within))| {
            let cluster = c as ClusterId;
            let h = coherence_ratio(within, raw.total()).ok_or(MetricsError::EmptyCluster(cluster))?;
            Ok(TopicSeries::new(cluster, raw, h))
        })
        .collect()
}

/// Attributes of a topic over one window `[begin_year, end_year]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeRow {
    pub cluster: ClusterId,
    pub begin_year: Year,
    pub end_year: Year,
    pub novelty: f64,
    /// Absent when the smoothed count at `begin_year` is zero.
    pub growth: Option<f64>,
    pub impact: u64,
    pub coherence: f64,
}

/// Attributes for the window starting at `t`.
pub fn attributes_at(
    series: &TopicSeries,
    citations: &impl WindowCitations,
    t: Year,
    dt: u32,
) -> Result<AttributeRow, MetricsError> {
    let growth = growth_ratio(&series.smoothed, t, dt)?;
    let end = t + dt as Year;
    Ok(AttributeRow {
        cluster: series.cluster,
        begin_year: t,
        end_year: end,
        novelty: series.smoothed.get(t).expect("checked by growth_ratio"),
        growth,
        impact: citations.citations(t, end),
        coherence: series.coherence,
    })
}

/// Attributes at the start year of the topic's largest growth ratio. Ties
/// go to the earliest year; if no window has a defined ratio, the earliest
/// window is reported.
pub fn max_growth_attributes(
    series: &TopicSeries,
    citations: &impl WindowCitations,
    dt: u32,
) -> Result<AttributeRow, MetricsError> {
    let mut best: Option<(Year, Option<f64>)> = None;
    for t in series.window_starts(dt) {
        let r = growth_ratio(&series.smoothed, t, dt)?;
        let better = match (best, r) {
            (None, _) => true,
            (Some((_, None)), Some(_)) => true,
            (Some((_, Some(b))), Some(r)) => r > b,
            _ => false,
        };
        if better {
            best = Some((t, r));
        }
    }
    let (t, _) = best.ok_or(MetricsError::NoValidWindow { dt })?;
    attributes_at(series, citations, t, dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub avg: f64,
    pub max: f64,
    pub min: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl SummaryStats {
    pub fn of(values: &[f64]) -> Option<SummaryStats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let avg = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - avg).powi(2)).sum::<f64>() / n;
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Some(SummaryStats {
            avg,
            max,
            min,
            std: var.sqrt(),
        })
    }
}

/// Summary of attribute rows. Growth summarizes only rows where it is
/// defined and is absent if none are.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeStatistics {
    pub rows: usize,
    pub coherence: SummaryStats,
    pub growth: Option<SummaryStats>,
    pub novelty: SummaryStats,
    pub impact: SummaryStats,
}

impl AttributeStatistics {
    /// (name, stats) in reporting order.
    pub fn named(&self) -> [(&'static str, Option<SummaryStats>); 4] {
        [
            ("coherence", Some(self.coherence)),
            ("growth", self.growth),
            ("novelty", Some(self.novelty)),
            ("impact", Some(self.impact)),
        ]
    }
}

pub fn attribute_statistics(rows: &[AttributeRow]) -> Result<AttributeStatistics, MetricsError> {
    let collect = |f: fn(&AttributeRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let growth: Vec<f64> = rows.iter().filter_map(|r| r.growth).collect();
    Ok(AttributeStatistics {
        rows: rows.len(),
        coherence: SummaryStats::of(&collect(|r| r.coherence)).ok_or(MetricsError::EmptyRows)?,
        growth: SummaryStats::of(&growth),
        novelty: SummaryStats::of(&collect(|r| r.novelty)).ok_or(MetricsError::EmptyRows)?,
        impact: SummaryStats::of(&collect(|r| r.impact as f64)).ok_or(MetricsError::EmptyRows)?,
    })
}

pub const ATTRIBUTE_TABLE_HEADER: &str = "cluster\tbegin\tend\tnovelty\tgrowth\timpact\tcoherence";

/// Tab-separated attribute table at full precision. Undefined growth is
/// written as `NA`.
pub fn write_attribute_table<W: Write>(rows: &[AttributeRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{ATTRIBUTE_TABLE_HEADER}")?;
    for r in rows {
        let growth = r.growth.map_or_else(|| "NA".to_string(), |g| g.to_string());
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.cluster, r.begin_year, r.end_year, r.novelty, growth, r.impact, r.coherence
        )?;
    }
    Ok(())
}
