//! Text renderings of detection results.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use emergence_core::detector::EmergenceReport;
use emergence_core::metrics::{AttributeRow, TopicSeries};
use emergence_core::ClusterId;

use crate::labels::TopicLabel;

fn two(x: f64) -> String {
    format!("{x:.2}")
}

/// Human-readable report: the parameter block followed by one row per
/// emerging topic with attributes at two decimals.
pub fn write_text_report<W: Write>(
    name: &str,
    report: &EmergenceReport,
    labels: &[TopicLabel],
    mut out: W,
) -> std::io::Result<()> {
    let p = &report.params;
    writeln!(out, "parameter set: {name}")?;
    writeln!(out, "  dt     = {}", p.dt)?;
    writeln!(out, "  r_min  = {}", p.r_min)?;
    writeln!(out, "  p_max  = {}", p.p_max)?;
    writeln!(out, "  c_min  = {}", p.c_min)?;
    writeln!(out, "  h_min  = {}", p.h_min)?;
    writeln!(out, "  impact scope = {}", report.impact_scope)?;
    writeln!(
        out,
        "emerging topics: {} of {}",
        report.emerging_count,
        report.verdicts.len()
    )?;
    writeln!(out)?;
    writeln!(
        out,
        "{:>7}  {:<40}  {:>8}  {:>5}  {:>5}  {:>9}  {:>8}  {:>9}  {:>9}",
        "ID", "Label", "Pubs", "Begin", "End", "Novelty", "Growth", "Coherence", "Impact"
    )?;
    for v in report.emerging() {
        let Some(row) = &v.attributes else { continue };
        let label = labels
            .get(v.cluster as usize)
            .map(|l| l.short(3))
            .unwrap_or_default();
        writeln!(
            out,
            "{:>7}  {:<40}  {:>8}  {:>5}  {:>5}  {:>9}  {:>8}  {:>9}  {:>9}",
            v.cluster,
            label,
            v.total_pubs,
            row.begin_year,
            row.end_year,
            two(row.novelty),
            row.growth.map_or_else(|| "NA".into(), two),
            two(row.coherence),
            row.impact,
        )?;
    }
    Ok(())
}

/// Attribute statistics over all topics, one line per attribute, two
/// decimals.
pub fn write_statistics<W: Write>(name: &str, report: &EmergenceReport, mut out: W) -> std::io::Result<()> {
    writeln!(out, "set\tdt\tattribute\tavg\tmax\tmin\tstd")?;
    let Some(stats) = &report.statistics else {
        return Ok(());
    };
    for (attribute, s) in stats.named() {
        match s {
            Some(s) => writeln!(
                out,
                "{name}\t{}\t{attribute}\t{}\t{}\t{}\t{}",
                report.params.dt,
                two(s.avg),
                two(s.max),
                two(s.min),
                two(s.std)
            )?,
            None => writeln!(out, "{name}\t{}\t{attribute}\tNA\tNA\tNA\tNA", report.params.dt)?,
        }
    }
    Ok(())
}

/// Attribute rows of the emerging topics.
pub fn emerging_rows(report: &EmergenceReport) -> Vec<AttributeRow> {
    report.emerging().filter_map(|v| v.attributes.clone()).collect()
}

/// Long-format yearly counts, `cluster<TAB>year<TAB>count`, for plotting.
pub fn write_trend_data<'a, W: Write>(
    series: impl IntoIterator<Item = &'a TopicSeries>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "cluster\tyear\tcount")?;
    for s in series {
        for (year, count) in s.raw.iter() {
            writeln!(out, "{}\t{year}\t{count}", s.cluster)?;
        }
    }
    Ok(())
}

/// Which topics each set found and which all sets agree on.
pub fn write_overlap<W: Write>(sets: &[(String, &EmergenceReport)], mut out: W) -> std::io::Result<()> {
    let mut found: BTreeMap<ClusterId, Vec<&str>> = BTreeMap::new();
    for (name, report) in sets {
        writeln!(out, "{name}: {} emerging topics", report.emerging_count)?;
        for c in report.emerging_clusters() {
            found.entry(c).or_default().push(name);
        }
    }
    let common: BTreeSet<ClusterId> = emergence_core::detector::overlap(sets.iter().map(|(_, r)| *r));
    let union = found.len();
    writeln!(
        out,
        "{union} distinct topics identified, {} of which were identified by all {} sets",
        common.len(),
        sets.len()
    )?;
    writeln!(out)?;
    writeln!(out, "cluster\tsets")?;
    for (c, names) in found {
        writeln!(out, "{c}\t{}", names.join(","))?;
    }
    Ok(())
}
