use serde::{Deserialize, Serialize};

use super::stats::{exit_ratio_histogram, mean, median, size_histogram, Bin};
use super::{describe_point, map_instances, ExperimentKind, ExperimentSpec, Instance};
use crate::error::{invalid, Result};
use crate::generate::{derive_seed, GeneratorParams};
use crate::plateau::{enumerate_plateau, PlateauKind, PlateauOptions};
use crate::search::find_state_at_level;
use crate::solver::SolveStatus;

/// One sampled plateau, or a level GSAT never hit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauSample {
    pub slot: usize,
    pub level: usize,
    pub reached: bool,
    pub classification: Option<PlateauKind>,
    pub size: usize,
    pub truncated: bool,
    pub exit_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub point: String,
    pub generator: String,
    pub num_variables: usize,
    pub num_clauses: usize,
    pub level: usize,
    pub n_instances: usize,
    pub n_samples: usize,
    pub n_unreached: usize,
    pub n_minima: usize,
    pub n_benches: usize,
    pub n_contours: usize,
    pub n_truncated: usize,
    /// Minima over sampled plateaus. Truncated plateaus with no exit in view
    /// count as minima.
    pub proportion_minima: Option<f64>,
    /// Medians over untruncated plateaus only.
    pub median_minimum_size: Option<f64>,
    pub median_bench_size: Option<f64>,
    pub max_minimum_size: usize,
    pub mean_exit_ratio: Option<f64>,
    pub minimum_size_histogram: Vec<Bin>,
    pub bench_size_histogram: Vec<Bin>,
    pub exit_ratio_histogram: Vec<Bin>,
}

pub(crate) fn sample_levels(spec: &ExperimentSpec, inst: &Instance, levels: &[usize]) -> Vec<PlateauSample> {
    let n = inst.formula.num_vars();
    let options = PlateauOptions {
        state_cap: spec.caps.state_cap,
        known_optimum: inst.known_optimum(),
    };
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        if level == 0 && inst.status == Some(SolveStatus::Unsat) {
            continue;
        }
        let cfg = spec.search.config(n, derive_seed(inst.work_seed, &[level as u64]));
        let found = find_state_at_level(&inst.formula, level, &cfg)
            .expect("validated search settings")
            .found;
        let sample = match found {
            None => PlateauSample {
                slot: inst.slot,
                level,
                reached: false,
                classification: None,
                size: 0,
                truncated: false,
                exit_ratio: 0.0,
            },
            Some(state) => {
                let p = enumerate_plateau(&inst.formula, &state, &options).expect("state fits formula");
                PlateauSample {
                    slot: inst.slot,
                    level,
                    reached: true,
                    classification: Some(p.report.classification),
                    size: p.report.size,
                    truncated: p.report.truncated,
                    exit_ratio: p.report.exit_ratio(),
                }
            }
        };
        out.push(sample);
    }
    out
}

pub(crate) fn aggregate(
    params: &GeneratorParams,
    level: usize,
    n_instances: usize,
    samples: &[&PlateauSample],
    exclude_contours: bool,
) -> AggregateRow {
    let reached: Vec<&PlateauSample> = samples.iter().copied().filter(|s| s.reached).collect();
    let kind = |s: &PlateauSample| s.classification.expect("reached");
    let minima: Vec<&PlateauSample> = reached.iter().copied().filter(|s| kind(s).is_minimum()).collect();
    let benches: Vec<&PlateauSample> = reached.iter().copied().filter(|s| kind(s).is_bench()).collect();
    let untruncated_sizes = |v: &[&PlateauSample]| -> Vec<u32> {
        v.iter().filter(|s| !s.truncated).map(|s| s.size as u32).collect()
    };
    let ratios: Vec<f64> = reached
        .iter()
        .filter(|s| !(exclude_contours && kind(s) == PlateauKind::Contour))
        .map(|s| s.exit_ratio)
        .collect();
    AggregateRow {
        point: describe_point(params),
        generator: params.name().to_string(),
        num_variables: params.total_variables(),
        num_clauses: params.total_clauses(),
        level,
        n_instances,
        n_samples: reached.len(),
        n_unreached: samples.len() - reached.len(),
        n_minima: minima.len(),
        n_benches: benches.len(),
        n_contours: reached.iter().filter(|s| kind(s) == PlateauKind::Contour).count(),
        n_truncated: reached.iter().filter(|s| s.truncated).count(),
        proportion_minima: if reached.is_empty() {
            None
        } else {
            Some(minima.len() as f64 / reached.len() as f64)
        },
        median_minimum_size: median(&untruncated_sizes(&minima)),
        median_bench_size: median(&untruncated_sizes(&benches)),
        max_minimum_size: minima.iter().map(|s| s.size).max().unwrap_or(0),
        mean_exit_ratio: mean(&ratios),
        minimum_size_histogram: size_histogram(&minima.iter().map(|s| s.size).collect::<Vec<_>>()),
        bench_size_histogram: size_histogram(&benches.iter().map(|s| s.size).collect::<Vec<_>>()),
        exit_ratio_histogram: exit_ratio_histogram(&ratios),
    }
}

/// Samples one plateau per instance per requested level and aggregates each
/// (grid point, level) pair into a row.
pub fn run_plateau_survey(spec: &ExperimentSpec) -> Result<Vec<AggregateRow>> {
    let ExperimentKind::Survey {
        levels,
        exclude_contours,
    } = &spec.kind
    else {
        return Err(invalid("not a survey experiment"));
    };
    spec.validate()?;
    let pool = spec.pool()?;
    let mut rows = Vec::new();
    for params in &spec.grid {
        let per_instance = map_instances(spec, &pool, params, |inst| sample_levels(spec, inst, levels))?;
        for &level in levels {
            let samples: Vec<&PlateauSample> =
                per_instance.iter().flatten().filter(|s| s.level == level).collect();
            rows.push(aggregate(params, level, spec.instances_per_point, &samples, *exclude_contours));
        }
    }
    Ok(rows)
}
