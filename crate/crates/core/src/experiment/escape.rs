use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{describe_point, map_instances, ExperimentKind, ExperimentSpec, Instance};
use crate::error::{invalid, Result};
use crate::plateau::{enumerate_plateau, escape_barrier, EscapeOptions, PlateauKind, PlateauOptions};
use crate::search::single_try;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscapeSample {
    pub slot: usize,
    pub terminal_level: usize,
    pub classification: PlateauKind,
    pub plateau_size: usize,
    pub truncated: bool,
    /// Present for untruncated minima above level 0.
    pub barrier_increase: Option<usize>,
    pub level_ordered_increase: Option<usize>,
    pub capped: bool,
    pub escaped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeSummary {
    pub point: String,
    pub n_instances: usize,
    pub n_solved: usize,
    pub n_on_bench: usize,
    pub n_truncated: usize,
    pub n_minima_analyzed: usize,
    pub n_capped: usize,
    /// Barrier increase → number of terminal minima.
    pub increase_distribution: BTreeMap<usize, usize>,
    pub level_ordered_distribution: BTreeMap<usize, usize>,
    /// Fraction of analyzed minima escapable with an increase of 1.
    pub fraction_increase_one: Option<f64>,
    pub samples: Vec<EscapeSample>,
}

fn analyze(spec: &ExperimentSpec, inst: &Instance, flips: u64, level_ordered: bool) -> EscapeSample {
    let t = single_try(&inst.formula, flips, inst.work_seed);
    let options = PlateauOptions {
        state_cap: spec.caps.state_cap,
        known_optimum: inst.known_optimum(),
    };
    let p = enumerate_plateau(&inst.formula, &t.final_state, &options).expect("state fits formula");
    let mut sample = EscapeSample {
        slot: inst.slot,
        terminal_level: t.final_level,
        classification: p.report.classification,
        plateau_size: p.report.size,
        truncated: p.report.truncated,
        barrier_increase: None,
        level_ordered_increase: None,
        capped: false,
        escaped: false,
    };
    if p.report.classification.is_minimum() && !p.report.truncated && t.final_level > 0 {
        let opts = EscapeOptions {
            expansion_cap: spec.caps.expansion_cap,
            level_ordered,
        };
        let e = escape_barrier(&inst.formula, &p, &opts).expect("untruncated plateau above 0");
        sample.barrier_increase = Some(e.barrier_increase);
        sample.level_ordered_increase = e.level_ordered_barrier.map(|b| b - e.plateau_level);
        sample.capped = e.capped;
        sample.escaped = e.escaped;
    }
    sample
}

fn summarize(point: String, n_instances: usize, samples: Vec<EscapeSample>) -> EscapeSummary {
    let mut dist = BTreeMap::new();
    let mut lo_dist = BTreeMap::new();
    let mut analyzed = 0;
    for s in &samples {
        // a minimum with no way down is a global minimum; it has no barrier
        if let (Some(inc), true) = (s.barrier_increase, s.escaped) {
            analyzed += 1;
            *dist.entry(inc).or_insert(0) += 1;
        }
        if let Some(inc) = s.level_ordered_increase {
            *lo_dist.entry(inc).or_insert(0) += 1;
        }
    }
    let ones = dist.get(&1).copied().unwrap_or(0);
    EscapeSummary {
        point,
        n_instances,
        n_solved: samples.iter().filter(|s| s.terminal_level == 0).count(),
        n_on_bench: samples.iter().filter(|s| s.classification.is_bench()).count(),
        n_truncated: samples.iter().filter(|s| s.truncated).count(),
        n_minima_analyzed: analyzed,
        n_capped: samples.iter().filter(|s| s.capped).count(),
        fraction_increase_one: (analyzed > 0).then(|| ones as f64 / analyzed as f64),
        increase_distribution: dist,
        level_ordered_distribution: lo_dist,
        samples,
    }
}

/// One GSAT try per instance; terminal minima get their escape barrier.
pub fn run_escape_experiment(spec: &ExperimentSpec) -> Result<Vec<EscapeSummary>> {
    let ExperimentKind::Escape { flips, level_ordered } = spec.kind else {
        return Err(invalid("not an escape experiment"));
    };
    spec.validate()?;
    let pool = spec.pool()?;
    let mut out = Vec::new();
    for params in &spec.grid {
        let samples = map_instances(spec, &pool, params, |inst| analyze(spec, inst, flips, level_ordered))?;
        out.push(summarize(describe_point(params), spec.instances_per_point, samples));
    }
    Ok(out)
}
