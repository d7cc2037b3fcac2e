use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::median;
use super::{describe_point, map_instances, ExperimentKind, ExperimentSpec, Instance};
use crate::cnf::Assignment;
use crate::error::{invalid, Result};
use crate::generate::derive_seed;
use crate::plateau::{enumerate_plateau, PlateauOptions};
use crate::search::gsat;

/// One distinct level-0 plateau.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionMinimum {
    /// Absent when truncated.
    pub canonical_rep: Option<Assignment>,
    pub size: usize,
    pub truncated: bool,
    /// GSAT runs that landed in this plateau.
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub point: String,
    pub slot: usize,
    pub runs: usize,
    pub solutions_found: usize,
    pub unique_minima: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub median_size: Option<f64>,
    /// Size of the largest over the smallest distinct plateau.
    pub size_ratio: Option<f64>,
    pub n_truncated: usize,
    /// In order of first discovery.
    pub minima: Vec<SolutionMinimum>,
}

/// Dedupes solutions into plateaus. A solution already inside a known
/// plateau is not re-enumerated.
pub fn cluster_solutions(
    formula: &crate::cnf::Formula,
    solutions: &[Assignment],
    state_cap: usize,
) -> Result<Vec<SolutionMinimum>> {
    let options = PlateauOptions::with_cap(state_cap).satisfiable();
    let mut owner: HashMap<Assignment, usize> = HashMap::new();
    let mut by_rep: HashMap<Assignment, usize> = HashMap::new();
    let mut minima: Vec<SolutionMinimum> = Vec::new();
    for s in solutions {
        if let Some(&i) = owner.get(s) {
            minima[i].hits += 1;
            continue;
        }
        let p = enumerate_plateau(formula, s, &options)?;
        if p.report.level != 0 {
            return Err(invalid("cluster_solutions expects satisfying assignments"));
        }
        // an untruncated plateau owns all of its members, so a repeated
        // canonical rep can only arise from truncated ones
        let idx = match p.report.canonical_rep.as_ref().and_then(|r| by_rep.get(r)) {
            Some(&i) => i,
            None => {
                minima.push(SolutionMinimum {
                    canonical_rep: p.report.canonical_rep.clone(),
                    size: p.report.size,
                    truncated: p.report.truncated,
                    hits: 0,
                });
                if let Some(r) = &p.report.canonical_rep {
                    by_rep.insert(r.clone(), minima.len() - 1);
                }
                minima.len() - 1
            }
        };
        minima[idx].hits += 1;
        for m in p.members {
            owner.entry(m).or_insert(idx);
        }
    }
    Ok(minima)
}

fn analyze(spec: &ExperimentSpec, inst: &Instance, runs: usize, point: &str) -> UniquenessReport {
    let n = inst.formula.num_vars();
    let solutions: Vec<Assignment> = (0..runs)
        .into_par_iter()
        .filter_map(|j| {
            let cfg = spec.search.config(n, derive_seed(inst.work_seed, &[j as u64]));
            gsat(&inst.formula, &cfg).expect("validated search settings").found
        })
        .collect();
    let minima = cluster_solutions(&inst.formula, &solutions, spec.caps.state_cap).expect("solutions are level 0");
    let sizes: Vec<u32> = minima.iter().map(|m| m.size as u32).collect();
    let min_size = sizes.iter().copied().min().unwrap_or(0) as usize;
    let max_size = sizes.iter().copied().max().unwrap_or(0) as usize;
    UniquenessReport {
        point: point.to_string(),
        slot: inst.slot,
        runs,
        solutions_found: solutions.len(),
        unique_minima: minima.len(),
        min_size,
        max_size,
        median_size: median(&sizes),
        size_ratio: (min_size > 0).then(|| max_size as f64 / min_size as f64),
        n_truncated: minima.iter().filter(|m| m.truncated).count(),
        minima,
    }
}

/// Runs GSAT repeatedly on each instance and counts distinct solution plateaus.
pub fn run_solution_cluster_experiment(spec: &ExperimentSpec) -> Result<Vec<UniquenessReport>> {
    let ExperimentKind::SolutionClusters { solutions } = spec.kind else {
        return Err(invalid("not a solution-cluster experiment"));
    };
    spec.validate()?;
    let pool = spec.pool()?;
    let mut out = Vec::new();
    for params in &spec.grid {
        let point = describe_point(params);
        out.extend(map_instances(spec, &pool, params, |inst| analyze(spec, inst, solutions, &point))?);
    }
    Ok(out)
}
