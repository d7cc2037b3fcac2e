//! Survey experiments over populations of generated instances.
//!
//! An [`ExperimentSpec`] names a generator grid, a population size, a
//! satisfiability filter and the caps used by the searches. Every random
//! choice descends from the master seed through [`derive_seed`]: a grid
//! point's substream is keyed by a hash of its parameters (not its position,
//! so grid points are independent of one another), each instance slot and
//! filter attempt below that, and each level sample or GSAT run below the
//! instance. Work is spread over a rayon pool and reduced in slot order, so
//! results do not depend on the worker count.

mod clusters;
mod escape;
mod output;
pub mod stats;
mod survey;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cnf::Formula;
use crate::error::{invalid, Error, Result};
use crate::generate::{derive_seed, stable_hash, GeneratorParams, GeneratorSpec};
use crate::plateau::{DEFAULT_EXPANSION_CAP, DEFAULT_STATE_CAP};
use crate::search::GsatConfig;
use crate::solver::{solve, SolveStatus};

pub use clusters::{cluster_solutions, run_solution_cluster_experiment, SolutionMinimum, UniquenessReport};
pub use escape::{run_escape_experiment, EscapeSample, EscapeSummary};
pub use output::{summarize_to_csv, write_manifest, OutputFiles};
pub use survey::{run_plateau_survey, AggregateRow, PlateauSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SatFilter {
    RequireSat,
    RequireUnsat,
    #[default]
    None,
}

impl SatFilter {
    fn name(self) -> &'static str {
        match self {
            SatFilter::RequireSat => "require_sat",
            SatFilter::RequireUnsat => "require_unsat",
            SatFilter::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    pub state_cap: usize,
    pub expansion_cap: usize,
    /// Decision budget per complete-solver call; `None` for unlimited.
    pub solver_budget: Option<u64>,
    /// Generation attempts allowed per instance slot before the filter is
    /// declared starved.
    pub filter_attempts: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            state_cap: DEFAULT_STATE_CAP,
            expansion_cap: DEFAULT_EXPANSION_CAP,
            solver_budget: Some(10_000_000),
            filter_attempts: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSettings {
    /// Flips per try; `None` means 10·N.
    pub max_flips: Option<u64>,
    pub max_tries: u64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings {
            max_flips: None,
            max_tries: 100,
        }
    }
}

impl SearchSettings {
    pub fn config(&self, num_vars: usize, seed: u64) -> GsatConfig {
        let mut cfg = GsatConfig::sampling_defaults(num_vars, seed);
        if let Some(f) = self.max_flips {
            cfg.max_flips = f;
        }
        cfg.max_tries = self.max_tries;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ExperimentKind {
    /// One plateau per instance per level; proportions, sizes, exit ratios.
    Survey {
        levels: Vec<usize>,
        /// Leave contours out of the mean exit ratio.
        #[serde(default)]
        exclude_contours: bool,
    },
    /// One GSAT try of `flips` flips per instance, then the escape barrier of
    /// the terminal plateau when it is a minimum.
    Escape {
        flips: u64,
        #[serde(default)]
        level_ordered: bool,
    },
    /// `solutions` GSAT runs per instance, solution plateaus deduplicated.
    SolutionClusters { solutions: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    pub grid: Vec<GeneratorParams>,
    pub instances_per_point: usize,
    #[serde(default)]
    pub sat_filter: SatFilter,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub search: SearchSettings,
    pub master_seed: u64,
    /// Directory receiving CSVs and the manifest.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; `None` uses rayon's default.
    #[serde(default)]
    pub workers: Option<usize>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        ExperimentSpec::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances_per_point < 1 {
            return Err(invalid("instances_per_point must be at least 1"));
        }
        if self.grid.is_empty() {
            return Err(invalid("grid must contain at least one generator"));
        }
        for p in &self.grid {
            p.validate()?;
        }
        if self.caps.state_cap < 1 || self.caps.expansion_cap < 1 || self.caps.filter_attempts < 1 {
            return Err(invalid("caps must all be at least 1"));
        }
        if self.search.max_tries < 1 || self.search.max_flips == Some(0) {
            return Err(invalid("search limits must be at least 1"));
        }
        match &self.kind {
            ExperimentKind::Survey { levels, .. } if levels.is_empty() => {
                Err(invalid("survey needs at least one level"))
            }
            ExperimentKind::Escape { flips: 0, .. } => Err(invalid("escape needs at least one flip")),
            ExperimentKind::SolutionClusters { solutions: 0 } => {
                Err(invalid("solution clustering needs at least one solution"))
            }
            _ => Ok(()),
        }
    }

    pub(crate) fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = self.workers {
            b = b.num_threads(w.max(1));
        }
        b.build().map_err(|e| invalid(format!("thread pool: {e}")))
    }
}

/// Substream root of a grid point, derived from its parameters.
pub fn grid_point_seed(master: u64, params: &GeneratorParams) -> u64 {
    let key = serde_json::to_vec(params).expect("params serialize");
    derive_seed(master, &[stable_hash(&key)])
}

pub fn describe_point(params: &GeneratorParams) -> String {
    serde_json::to_string(params).expect("params serialize")
}

/// An instance that passed the filter.
#[derive(Debug, Clone)]
pub struct Instance {
    pub slot: usize,
    pub formula: Formula,
    /// `Sat`/`Unsat` when the solver ran, `None` without a filter.
    pub status: Option<SolveStatus>,
    /// Seed for everything done with this instance after generation.
    pub work_seed: u64,
}

impl Instance {
    /// 0 when the instance is known satisfiable.
    pub fn known_optimum(&self) -> Option<usize> {
        match self.status {
            Some(SolveStatus::Sat) => Some(0),
            _ => None,
        }
    }
}

/// Generates slot `slot` of a grid point, retrying with fresh substreams
/// until an instance passes the filter.
pub fn generate_instance(
    spec: &ExperimentSpec,
    params: &GeneratorParams,
    slot: usize,
) -> std::result::Result<Instance, usize> {
    let point_seed = grid_point_seed(spec.master_seed, params);
    for attempt in 0..spec.caps.filter_attempts {
        let seed = derive_seed(point_seed, &[slot as u64, attempt as u64]);
        let formula = GeneratorSpec::new(params.clone(), seed)
            .generate()
            .expect("grid validated");
        let status = match spec.sat_filter {
            SatFilter::None => None,
            filter => {
                let r = solve(&formula, spec.caps.solver_budget);
                let keep = match filter {
                    SatFilter::RequireSat => r.status == SolveStatus::Sat,
                    SatFilter::RequireUnsat => r.status == SolveStatus::Unsat,
                    SatFilter::None => unreachable!(),
                };
                if !keep {
                    continue;
                }
                Some(r.status)
            }
        };
        return Ok(Instance {
            slot,
            formula,
            status,
            work_seed: derive_seed(seed, &[u64::MAX]),
        });
    }
    Err(spec.caps.filter_attempts)
}

/// Runs `work` on every filtered instance of one grid point in parallel and
/// returns the results in slot order.
pub(crate) fn map_instances<T, F>(
    spec: &ExperimentSpec,
    pool: &rayon::ThreadPool,
    params: &GeneratorParams,
    work: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Instance) -> T + Sync,
{
    let results: Vec<std::result::Result<T, usize>> = pool.install(|| {
        (0..spec.instances_per_point)
            .into_par_iter()
            .map(|slot| generate_instance(spec, params, slot).map(|inst| work(&inst)))
            .collect()
    });
    let found = results.iter().filter(|r| r.is_ok()).count();
    if found < spec.instances_per_point {
        return Err(Error::FilterStarved {
            point: describe_point(params),
            filter: spec.sat_filter.name().to_string(),
            found,
            wanted: spec.instances_per_point,
            attempts: spec.caps.filter_attempts,
        });
    }
    Ok(results.into_iter().map(|r| r.ok().unwrap()).collect())
}

/// Result of any experiment kind, as produced by [`run_experiment`].
#[derive(Debug, Clone)]
pub enum ExperimentResult {
    Survey(Vec<AggregateRow>),
    Escape(Vec<EscapeSummary>),
    SolutionClusters(Vec<UniquenessReport>),
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    Ok(match spec.kind {
        ExperimentKind::Survey { .. } => ExperimentResult::Survey(run_plateau_survey(spec)?),
        ExperimentKind::Escape { .. } => ExperimentResult::Escape(run_escape_experiment(spec)?),
        ExperimentKind::SolutionClusters { .. } => {
            ExperimentResult::SolutionClusters(run_solution_cluster_experiment(spec)?)
        }
    })
}

/// Runs the experiment and writes its CSVs and manifest into `dir`
/// (or the spec's `output_dir`).
pub fn run_and_write(spec: &ExperimentSpec, dir: Option<&Path>) -> Result<(ExperimentResult, OutputFiles)> {
    let dir = dir
        .map(Path::to_path_buf)
        .or_else(|| spec.output_dir.clone())
        .ok_or_else(|| invalid("no output directory given"))?;
    let result = run_experiment(spec)?;
    let files = summarize_to_csv(&result, &dir)?;
    write_manifest(spec, &files, &dir)?;
    Ok((result, files))
}
