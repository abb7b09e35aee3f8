//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run with `cargo test -p emergence-cli --test acceptance`.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use emergence_cli::pipeline::{run_pipeline, PipelineConfig};
use emergence_core::cluster::{brute_force_partition, cluster, quality};
use emergence_core::detector::{evaluate_topic, EmergenceParams, TopicTable};
use emergence_core::metrics::{coherence, growth_ratio, smooth, TopicSeries, YearlyCounts};
use emergence_core::synth::{generate, PlantedTopic, PowerLaw, SynthSpec};
use emergence_core::{CitationGraph, ClusterParams, Corpus, DocType, ImpactScope, Partition, Publication, Year};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRAPHENE_RAW: [u64; 10] = [32, 38, 46, 147, 415, 790, 1197, 1963, 2693, 3422];
/// Smoothed counts 2005..=2012.
const GRAPHENE_SMOOTHED: [f64; 8] = [38.67, 77.0, 202.67, 450.67, 800.67, 1316.67, 1951.0, 2692.67];
/// Printed smoothed counts 2005..=2012.
const GRAPHENE_SMOOTHED_PRINTED: [f64; 8] = [39.0, 77.0, 203.0, 451.0, 801.0, 1317.0, 1951.0, 2693.0];
/// Two-year growth for windows starting 2005..=2010.
const GRAPHENE_GROWTH_DT2: [f64; 6] = [5.24, 5.86, 3.95, 2.92, 2.44, 2.05];
/// Windowed citations by window end year 2007..=2012.
const GRAPHENE_IMPACT: [u64; 6] = [6513, 16560, 29743, 48716, 70623, 86470];
const GRAPHENE_WITHIN: u64 = 231_995;
const GRAPHENE_PUBS: u64 = 10_743;
const GRAPHENE_COHERENCE: f64 = 21.59;

const SMOOTHED_TOL: f64 = 0.5;
const GROWTH_TOL: f64 = 0.05;
const TABLE4_TOL: f64 = 0.01;
const COHERENCE_TOL: f64 = 0.01;
const TABLE1_BUDGET: Duration = Duration::from_secs(1);
const CLUSTER_BUDGET: Duration = Duration::from_secs(30);
const PIPELINE_BUDGET: Duration = Duration::from_secs(120);
const HEURISTIC_RATIO: f64 = 0.95;
const MIN_RECALL: f64 = 0.8;
/// Corpus size the citation thresholds were tuned for.
const REFERENCE_CORPUS_SIZE: f64 = 9.0e6;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn graphene_series() -> TopicSeries {
    TopicSeries::new(0, YearlyCounts::new(2003, GRAPHENE_RAW.to_vec()), GRAPHENE_COHERENCE)
}

/// Impact stub: the printed value for the window ending at `end`.
fn graphene_impact(_start: Year, end: Year) -> u64 {
    GRAPHENE_IMPACT[(end - 2007) as usize]
}

fn table1() -> Outcome {
    let start = Instant::now();
    let s = smooth(&YearlyCounts::new(2003, GRAPHENE_RAW.to_vec()));
    for (i, year) in (2005..=2012).enumerate() {
        let v = s.get(year).ok_or(format!("no smoothed value at {year}"))?;
        ensure((v - GRAPHENE_SMOOTHED_PRINTED[i]).abs() <= SMOOTHED_TOL, || {
            format!("smoothed {year} = {v:.2}, printed {}", GRAPHENE_SMOOTHED_PRINTED[i])
        })?;
        ensure((v - GRAPHENE_SMOOTHED[i]).abs() <= 0.005, || format!("smoothed {year} = {v:.4}"))?;
    }
    for (i, t) in (2005..=2010).enumerate() {
        let r = growth_ratio(&s, t, 2).map_err(|e| e.to_string())?.ok_or("undefined growth")?;
        ensure((r - GRAPHENE_GROWTH_DT2[i]).abs() <= GROWTH_TOL, || {
            format!("r({t}, 2) = {r:.3}, expected {}", GRAPHENE_GROWTH_DT2[i])
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < TABLE1_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("8 smoothed values, 6 growth ratios, {elapsed:?}"))
}

fn table4() -> Outcome {
    let series = graphene_series();
    let r5 = growth_ratio(&series.smoothed, 2005, 5).map_err(|e| e.to_string())?.ok_or("undefined growth")?;
    ensure((r5 - 34.05).abs() <= TABLE4_TOL, || format!("r(2005, 5) = {r5:.4}"))?;
    let novelty = series.smoothed.get(2005).ok_or("no smoothed value at 2005")?;
    ensure((novelty - 38.67).abs() <= TABLE4_TOL, || format!("novelty(2005) = {novelty:.4}"))?;
    Ok(format!("r(2005, 5) = {r5:.2}, novelty(2005) = {novelty:.2}"))
}

/// 10,743 publications in one topic carrying exactly 231,995 internal
/// citations, plus a second topic and cross-topic citations that must not
/// count.
fn coherence_graph() -> Outcome {
    let n = GRAPHENE_PUBS as usize;
    let others = 500usize;
    let mut refs: Vec<Vec<usize>> = vec![Vec::new(); n + others];
    let mut remaining = GRAPHENE_WITHIN as usize;
    for (i, r) in refs.iter_mut().enumerate().take(n) {
        let k = i.min(22).min(remaining);
        r.extend((i - k)..i);
        remaining -= k;
    }
    ensure(remaining == 0, || format!("{remaining} internal citations left unplaced"))?;
    for i in n..n + others {
        refs[i].push(i - n);
        refs[i].push(if i > n { i - 1 } else { n + 1 });
        refs[i - n].push(i);
    }
    let pubs = refs.iter().enumerate().map(|(i, r)| Publication {
        id: format!("g{i}"),
        year: 2003 + (i % 10) as Year,
        doc_type: DocType::Article,
        title_terms: vec![],
        references: r.iter().map(|j| format!("g{j}")).collect(),
    });
    let corpus = Corpus::from_publications(pubs, 2003, 2012).map_err(|e| e.to_string())?;
    let graph = CitationGraph::build(&corpus);
    let partition = Partition::from_assignment((0..n + others).map(|i| u32::from(i >= n)));
    let within = graph.within_cluster_citations(&partition, 0).map_err(|e| e.to_string())?;
    ensure(within == GRAPHENE_WITHIN, || format!("within-cluster citations {within}"))?;
    let h = coherence(&graph, &partition, 0, GRAPHENE_PUBS).map_err(|e| e.to_string())?;
    ensure((h - GRAPHENE_COHERENCE).abs() <= COHERENCE_TOL, || format!("coherence {h:.4}"))?;
    Ok(format!("{within} / {GRAPHENE_PUBS} = {h:.2} over {} edges", graph.edge_count()))
}

fn worked_example() -> Outcome {
    let series = graphene_series();
    let loose = EmergenceParams {
        dt: 2,
        r_min: 5.0,
        p_max: 100.0,
        c_min: 2500,
        h_min: 1.0,
    };
    let v = evaluate_topic(&series, &graphene_impact, &loose);
    ensure(v.emerging, || "not emerging under r_min = 5".into())?;
    let strict = EmergenceParams { r_min: 10.0, ..loose };
    let v = evaluate_topic(&series, &graphene_impact, &strict);
    ensure(!v.emerging, || format!("emerging under r_min = 10 at {:?}", v.begin_year))?;
    let v = evaluate_topic(&series, &graphene_impact, &EmergenceParams::set1());
    ensure(v.begin_year == Some(2005) && v.end_year == Some(2007), || {
        format!("set1 period {:?}..{:?}", v.begin_year, v.end_year)
    })?;
    Ok("emerging at r_min 5, not at r_min 10, set1 period 2005-2007".into())
}

fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> CitationGraph {
    let mut refs = vec![Vec::new(); n];
    for &(a, b) in edges {
        refs[a].push(format!("n{b}"));
    }
    let pubs = refs.into_iter().enumerate().map(|(i, references)| Publication {
        id: format!("n{i}"),
        year: 2005,
        doc_type: DocType::Article,
        title_terms: vec![],
        references,
    });
    CitationGraph::build(&Corpus::from_publications(pubs, 2003, 2012).unwrap())
}

fn clique_edges(nodes: std::ops::Range<usize>) -> Vec<(usize, usize)> {
    let v: Vec<usize> = nodes.collect();
    v.iter().flat_map(|&a| v.iter().filter(move |&&b| b < a).map(move |&b| (a, b))).collect()
}

fn clustering_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let n = rng.random_range(2..=8);
        let m = rng.random_range(0..=12);
        let edges: Vec<(usize, usize)> = (0..m)
            .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
            .filter(|(a, b)| a != b)
            .collect();
        let graph = graph_from_edges(n, &edges);
        let resolution = [0.05, 0.2, 0.5, 1.0][i % 4];
        let optimum = quality(&graph, &brute_force_partition(&graph, resolution).map_err(|e| e.to_string())?, resolution);
        let params = ClusterParams {
            resolution,
            seed: i as u64,
            ..ClusterParams::default()
        };
        let found = quality(&graph, &cluster(&graph, &params).map_err(|e| e.to_string())?, resolution);
        ensure(found + 1e-9 >= HEURISTIC_RATIO * optimum, || {
            format!("graph {i}: heuristic {found} vs optimum {optimum}")
        })?;
        if optimum > 0.0 {
            worst = worst.min(found / optimum);
        }
    }

    let params = ClusterParams {
        resolution: 0.5,
        ..ClusterParams::default()
    };
    let mut triangles = clique_edges(0..3);
    triangles.extend(clique_edges(3..6));
    let mut cliques = clique_edges(0..5);
    cliques.extend(clique_edges(5..10));
    cliques.push((5, 4));
    for (name, n, edges) in [("two triangles", 6, triangles), ("two bridged cliques", 10, cliques)] {
        let found = cluster(&graph_from_edges(n, &edges), &params).map_err(|e| e.to_string())?;
        let planted = Partition::from_assignment((0..n).map(|i| u32::from(i >= n / 2)));
        ensure(found == planted, || format!("{name}: recovered {:?}", found.assignment()))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < CLUSTER_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("worst ratio {worst:.3} over 100 graphs, planted graphs recovered, {elapsed:?}"))
}

fn planted(start_year: Year, base_count: u64, growth_factor: f64) -> PlantedTopic {
    PlantedTopic {
        start_year,
        base_count,
        growth_factor,
        internal_citation_rate: 8.0,
        external_citation_rate: 0.5,
    }
}

fn recall_spec() -> SynthSpec {
    let mut planted_topics: Vec<PlantedTopic> = [1.6, 1.7, 1.8, 2.0, 1.6]
        .iter()
        .enumerate()
        .map(|(i, &g)| planted(2003 + i as Year, 10 + 2 * i as u64, g))
        .collect();
    // flat controls start at the first year so smoothing sees no ramp-up
    planted_topics.push(planted(2003, 40, 1.0));
    planted_topics.push(planted(2003, 40, 1.0));
    SynthSpec {
        n_background_topics: 50,
        background_size: PowerLaw {
            exponent: 2.0,
            min: 80.0,
            max: 800.0,
        },
        planted: planted_topics,
        seed: 7,
        ..SynthSpec::default()
    }
}

fn write_synthetic(spec: &SynthSpec, dir: &Path) -> Result<(usize, std::path::PathBuf, std::path::PathBuf), String> {
    let (corpus, manifest) = generate(spec).map_err(|e| e.to_string())?;
    let research = corpus.filter_doc_types(&DocType::research()).len();
    let corpus_path = dir.join("corpus.jsonl");
    let manifest_path = dir.join("manifest.jsonl");
    let mut buf = Vec::new();
    corpus.write_jsonl(&mut buf).map_err(|e| e.to_string())?;
    fs::write(&corpus_path, buf).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    manifest.write_jsonl(&mut buf).map_err(|e| e.to_string())?;
    fs::write(&manifest_path, buf).map_err(|e| e.to_string())?;
    Ok((research, corpus_path, manifest_path))
}

fn planted_recall() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (research, corpus_path, manifest_path) = write_synthetic(&recall_spec(), dir.path())?;
    let scale = research as f64 / REFERENCE_CORPUS_SIZE;
    let mut config = PipelineConfig::new(&corpus_path, dir.path().join("out"));
    config.param_sets = vec![("set1".into(), EmergenceParams::set1().scale_impact(scale))];
    config.manifest = Some(manifest_path);
    let summary = run_pipeline(&config).map_err(|e| e.to_string())?;
    let score = summary.score.ok_or("no score computed")?;
    let recall = score.recall.ok_or("no planted emergent topics")?;
    let elapsed = start.elapsed();
    ensure(recall >= MIN_RECALL, || format!("recall {recall:.2}"))?;
    ensure(score.flagged_controls.is_empty(), || format!("flat controls flagged: {:?}", score.flagged_controls))?;
    ensure(elapsed < PIPELINE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} publications, recall {recall:.2}, precision {}, c_min {}, {elapsed:?}",
        summary.publications,
        score.precision.map_or("NA".into(), |p| format!("{p:.2}")),
        config.param_sets[0].1.c_min
    ))
}

fn monotonicity() -> Outcome {
    let base = EmergenceParams {
        dt: 2,
        r_min: 1.5,
        p_max: 100.0,
        c_min: 10,
        h_min: 1.0,
    };
    type Tweak = fn(&mut EmergenceParams, usize);
    let grids: [(&str, Tweak); 4] = [
        ("r_min", |p, i| p.r_min = [1.0, 1.5, 2.0, 3.0, 5.0][i]),
        ("c_min", |p, i| p.c_min = [0, 10, 50, 200, 1000][i]),
        ("h_min", |p, i| p.h_min = [0.0, 1.0, 2.0, 4.0, 8.0][i]),
        ("p_max", |p, i| p.p_max = [1000.0, 300.0, 100.0, 30.0, 10.0][i]),
    ];
    let mut checked = 0;
    for seed in 0..3u64 {
        let spec = SynthSpec {
            n_background_topics: 30,
            background_size: PowerLaw {
                exponent: 2.0,
                min: 20.0,
                max: 300.0,
            },
            planted: vec![planted(2004, 5, 1.8), planted(2005, 8, 1.5), planted(2003, 20, 1.0)],
            seed: 100 + seed,
            ..SynthSpec::default()
        };
        let (corpus, _) = generate(&spec).map_err(|e| e.to_string())?;
        let graph = CitationGraph::build(&corpus);
        let params = ClusterParams {
            resolution: 0.01,
            seed,
            ..ClusterParams::default()
        };
        let partition = cluster(&graph, &params).map_err(|e| e.to_string())?;
        let table = TopicTable::build(&corpus, &graph, &partition, ImpactScope::Corpus).map_err(|e| e.to_string())?;
        for (name, tweak) in grids {
            let mut previous: Option<BTreeSet<u32>> = None;
            for i in 0..5 {
                let mut p = base.clone();
                tweak(&mut p, i);
                let emerging = table.detect(&p).map_err(|e| e.to_string())?.emerging_clusters();
                if let Some(prev) = &previous {
                    ensure(emerging.is_subset(prev), || {
                        format!("seed {seed}, {name} step {i}: {emerging:?} not within {prev:?}")
                    })?;
                }
                previous = Some(emerging);
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} grid points over 3 corpora"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = SynthSpec {
        n_background_topics: 40,
        planted: vec![planted(2004, 10, 1.8)],
        seed: 99,
        ..SynthSpec::default()
    };
    let (_, corpus_path, _) = write_synthetic(&spec, dir.path())?;
    let run = |out: &str| -> Result<Vec<(String, Vec<u8>)>, String> {
        let mut config = PipelineConfig::new(&corpus_path, dir.path().join(out));
        config.param_sets = vec![
            ("set1".into(), EmergenceParams::set1().scale_impact(0.01)),
            ("set2".into(), EmergenceParams::set2().scale_impact(0.01)),
        ];
        let summary = run_pipeline(&config).map_err(|e| e.to_string())?;
        summary
            .artifacts
            .iter()
            .map(|p| {
                let name = p.file_name().unwrap().to_string_lossy().into_owned();
                fs::read(p).map(|b| (name, b)).map_err(|e| e.to_string())
            })
            .collect()
    };
    let a = run("a")?;
    let b = run("b")?;
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    for required in ["partition.tsv", "set1.report.jsonl", "set2.report.jsonl", "trends.tsv"] {
        ensure(names.contains(&required), || format!("{required} not written"))?;
    }
    ensure(a.len() == b.len(), || "artifact lists differ".into())?;
    for ((na, ba), (nb, bb)) in a.iter().zip(&b) {
        ensure(na == nb && ba == bb, || format!("{na} differs between runs"))?;
    }
    Ok(format!("{} artifacts byte-identical", a.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 smoothing and growth of the worked example", table1),
        ("2 five-year growth and novelty of the worked example", table4),
        ("3 coherence through the citation graph", coherence_graph),
        ("4 worked-example verdicts", worked_example),
        ("5 clustering against exhaustive search", clustering_oracle),
        ("6 planted-emergence recall on a synthetic corpus", planted_recall),
        ("7 threshold monotonicity", monotonicity),
        ("8 deterministic artifacts", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
