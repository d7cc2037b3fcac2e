//! CSV tables and the run manifest. Output carries no timestamps or host
//! details, so re-running a spec reproduces every file byte for byte.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::stats::Bin;
use super::{ExperimentResult, ExperimentSpec};
use crate::error::Result;
use crate::generate::stable_hash;

/// File names written by [`summarize_to_csv`], relative to the output directory.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OutputFiles {
    pub files: Vec<String>,
}

#[derive(Serialize)]
struct SurveyCsvRow<'a> {
    point: &'a str,
    generator: &'a str,
    num_variables: usize,
    num_clauses: usize,
    level: usize,
    n_instances: usize,
    n_samples: usize,
    n_unreached: usize,
    n_minima: usize,
    n_benches: usize,
    n_contours: usize,
    n_truncated: usize,
    proportion_minima: Option<f64>,
    median_minimum_size: Option<f64>,
    median_bench_size: Option<f64>,
    max_minimum_size: usize,
    mean_exit_ratio: Option<f64>,
}

#[derive(Serialize)]
struct HistogramRow<'a> {
    point: &'a str,
    level: usize,
    series: &'a str,
    bin_lo: f64,
    /// Empty for the open last bin.
    bin_hi: Option<f64>,
    count: usize,
}

#[derive(Serialize)]
struct EscapeCsvRow<'a> {
    point: &'a str,
    n_instances: usize,
    n_solved: usize,
    n_on_bench: usize,
    n_truncated: usize,
    n_minima_analyzed: usize,
    n_capped: usize,
    fraction_increase_one: Option<f64>,
}

#[derive(Serialize)]
struct DistributionRow<'a> {
    point: &'a str,
    method: &'a str,
    increase: usize,
    count: usize,
}

#[derive(Serialize)]
struct EscapeSampleRow<'a> {
    point: &'a str,
    slot: usize,
    terminal_level: usize,
    classification: String,
    plateau_size: usize,
    truncated: bool,
    barrier_increase: Option<usize>,
    level_ordered_increase: Option<usize>,
    capped: bool,
    escaped: bool,
}

#[derive(Serialize)]
struct ClusterCsvRow<'a> {
    point: &'a str,
    slot: usize,
    runs: usize,
    solutions_found: usize,
    unique_minima: usize,
    min_size: usize,
    max_size: usize,
    median_size: Option<f64>,
    size_ratio: Option<f64>,
    n_truncated: usize,
}

#[derive(Serialize)]
struct MinimumRow<'a> {
    point: &'a str,
    slot: usize,
    canonical_rep: Option<String>,
    size: usize,
    truncated: bool,
    hits: usize,
}

fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: impl IntoIterator<Item = T>, files: &mut OutputFiles) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join(name)).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    files.files.push(name.to_string());
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => crate::error::invalid(format!("csv: {other:?}")),
    }
}

fn snake(v: &impl Serialize) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|j| j.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn bins<'a>(point: &'a str, level: usize, series: &'a str, h: &'a [Bin]) -> impl Iterator<Item = HistogramRow<'a>> {
    h.iter().map(move |b| HistogramRow {
        point,
        level,
        series,
        bin_lo: b.lo,
        bin_hi: b.hi,
        count: b.count,
    })
}

/// Writes the result tables into `dir`, creating it if needed.
pub fn summarize_to_csv(result: &ExperimentResult, dir: &Path) -> Result<OutputFiles> {
    fs::create_dir_all(dir)?;
    let mut files = OutputFiles::default();
    match result {
        ExperimentResult::Survey(rows) => {
            write_csv(
                dir,
                "survey.csv",
                rows.iter().map(|r| SurveyCsvRow {
                    point: &r.point,
                    generator: &r.generator,
                    num_variables: r.num_variables,
                    num_clauses: r.num_clauses,
                    level: r.level,
                    n_instances: r.n_instances,
                    n_samples: r.n_samples,
                    n_unreached: r.n_unreached,
                    n_minima: r.n_minima,
                    n_benches: r.n_benches,
                    n_contours: r.n_contours,
                    n_truncated: r.n_truncated,
                    proportion_minima: r.proportion_minima,
                    median_minimum_size: r.median_minimum_size,
                    median_bench_size: r.median_bench_size,
                    max_minimum_size: r.max_minimum_size,
                    mean_exit_ratio: r.mean_exit_ratio,
                }),
                &mut files,
            )?;
            write_csv(
                dir,
                "size_histogram.csv",
                rows.iter().flat_map(|r| {
                    bins(&r.point, r.level, "minimum", &r.minimum_size_histogram)
                        .chain(bins(&r.point, r.level, "bench", &r.bench_size_histogram))
                }),
                &mut files,
            )?;
            write_csv(
                dir,
                "exit_ratio_histogram.csv",
                rows.iter().flat_map(|r| bins(&r.point, r.level, "exit_ratio", &r.exit_ratio_histogram)),
                &mut files,
            )?;
        }
        ExperimentResult::Escape(summaries) => {
            write_csv(
                dir,
                "escape.csv",
                summaries.iter().map(|s| EscapeCsvRow {
                    point: &s.point,
                    n_instances: s.n_instances,
                    n_solved: s.n_solved,
                    n_on_bench: s.n_on_bench,
                    n_truncated: s.n_truncated,
                    n_minima_analyzed: s.n_minima_analyzed,
                    n_capped: s.n_capped,
                    fraction_increase_one: s.fraction_increase_one,
                }),
                &mut files,
            )?;
            write_csv(
                dir,
                "escape_distribution.csv",
                summaries.iter().flat_map(|s| {
                    let minimax = s.increase_distribution.iter().map(|(&k, &v)| DistributionRow {
                        point: &s.point,
                        method: "minimax",
                        increase: k,
                        count: v,
                    });
                    let ordered = s.level_ordered_distribution.iter().map(|(&k, &v)| DistributionRow {
                        point: &s.point,
                        method: "level_ordered",
                        increase: k,
                        count: v,
                    });
                    minimax.chain(ordered)
                }),
                &mut files,
            )?;
            write_csv(
                dir,
                "escape_samples.csv",
                summaries.iter().flat_map(|s| {
                    s.samples.iter().map(|x| EscapeSampleRow {
                        point: &s.point,
                        slot: x.slot,
                        terminal_level: x.terminal_level,
                        classification: snake(&x.classification),
                        plateau_size: x.plateau_size,
                        truncated: x.truncated,
                        barrier_increase: x.barrier_increase,
                        level_ordered_increase: x.level_ordered_increase,
                        capped: x.capped,
                        escaped: x.escaped,
                    })
                }),
                &mut files,
            )?;
        }
        ExperimentResult::SolutionClusters(reports) => {
            write_csv(
                dir,
                "solution_clusters.csv",
                reports.iter().map(|r| ClusterCsvRow {
                    point: &r.point,
                    slot: r.slot,
                    runs: r.runs,
                    solutions_found: r.solutions_found,
                    unique_minima: r.unique_minima,
                    min_size: r.min_size,
                    max_size: r.max_size,
                    median_size: r.median_size,
                    size_ratio: r.size_ratio,
                    n_truncated: r.n_truncated,
                }),
                &mut files,
            )?;
            write_csv(
                dir,
                "solution_minima.csv",
                reports.iter().flat_map(|r| {
                    r.minima.iter().map(|m| MinimumRow {
                        point: &r.point,
                        slot: r.slot,
                        canonical_rep: m.canonical_rep.as_ref().map(|a| a.to_string()),
                        size: m.size,
                        truncated: m.truncated,
                        hits: m.hits,
                    })
                }),
                &mut files,
            )?;
        }
    }
    Ok(files)
}

/// Writes `manifest.json`: the spec, the library version and a content hash
/// of every output file.
pub fn write_manifest(spec: &ExperimentSpec, files: &OutputFiles, dir: &Path) -> Result<()> {
    let mut hashes = serde_json::Map::new();
    for name in &files.files {
        let bytes = fs::read(dir.join(name))?;
        hashes.insert(name.clone(), format!("{:016x}", stable_hash(&bytes)).into());
    }
    let manifest = serde_json::json!({
        "name": spec.name,
        "version": env!("CARGO_PKG_VERSION"),
        "spec": spec,
        "files": hashes,
    });
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}
