//! GSAT and the level-targeted sampling driver built on it.
//!
//! Every flip scans the level change of all N single-variable flips and
//! moves to a uniformly chosen member of the arg-min set, even when that
//! set only contains uphill moves. The per-variable deltas are maintained
//! incrementally from the clauses touched by each flip.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, Formula, LevelState, Var};
use crate::error::{invalid, Result};
use crate::generate::{derive_seed, rng_from_seed, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GsatConfig {
    pub max_flips: u64,
    pub max_tries: u64,
    pub seed: u64,
    /// Keep a per-flip record of every try.
    #[serde(default)]
    pub trace: bool,
}

impl GsatConfig {
    pub fn new(max_flips: u64, max_tries: u64, seed: u64) -> Self {
        GsatConfig {
            max_flips,
            max_tries,
            seed,
            trace: false,
        }
    }

    /// 10·N flips and 100 tries.
    pub fn sampling_defaults(num_vars: usize, seed: u64) -> Self {
        GsatConfig::new(10 * num_vars.max(1) as u64, 100, seed)
    }

    pub fn traced(mut self) -> Self {
        self.trace = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_flips < 1 || self.max_tries < 1 {
            return Err(invalid("max_flips and max_tries must both be at least 1"));
        }
        Ok(())
    }

    /// RNG seed of try `index`; tries are independent of one another.
    pub fn try_seed(&self, index: u64) -> u64 {
        derive_seed(self.seed, &[index])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipRecord {
    pub level_before: usize,
    pub var: Var,
    pub delta: i64,
    pub poss_flips: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TryStatus {
    /// Hit a state at the requested level (level 0 for plain GSAT).
    Reached,
    /// Ran out of flips.
    Exhausted,
    /// Dropped below the requested level without visiting it.
    Overshot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub try_index: u64,
    pub start: Assignment,
    pub status: TryStatus,
    pub flips: u64,
    pub final_state: Assignment,
    pub final_level: usize,
    /// Empty unless tracing was requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<FlipRecord>,
}

/// Incremental greedy walker: a [`LevelState`] plus cached flip deltas.
pub struct Walker<'f> {
    state: LevelState<'f>,
    deltas: Vec<i64>,
    best: Vec<Var>,
}

#[inline]
fn contribution(count: u8, literal_true: bool) -> i64 {
    match (count, literal_true) {
        (0, _) => -1,
        (1, true) => 1,
        _ => 0,
    }
}

impl<'f> Walker<'f> {
    pub fn new(formula: &'f Formula, start: Assignment) -> Result<Self> {
        let state = LevelState::new(formula, start)?;
        let deltas = state.all_deltas();
        Ok(Walker {
            state,
            deltas,
            best: Vec::with_capacity(formula.num_vars()),
        })
    }

    pub fn state(&self) -> &LevelState<'f> {
        &self.state
    }

    pub fn level(&self) -> usize {
        self.state.level()
    }

    pub fn assignment(&self) -> &Assignment {
        self.state.assignment()
    }

    pub fn deltas(&self) -> &[i64] {
        &self.deltas
    }

    /// The neighbors minimizing the level, as flip variables in ascending order.
    pub fn poss_flips(&mut self) -> &[Var] {
        self.best.clear();
        let mut min = i64::MAX;
        for (i, &d) in self.deltas.iter().enumerate() {
            if d < min {
                min = d;
                self.best.clear();
            }
            if d == min {
                self.best.push(Var::from_index(i));
            }
        }
        &self.best
    }

    /// Flips `var`, keeping the delta cache exact. Returns the level change.
    pub fn flip(&mut self, var: Var) -> i64 {
        let formula = self.state.formula();
        for (ci, _) in formula.occurrences_of(var) {
            let count = self.state.true_counts()[ci];
            for lit in formula.clauses()[ci].literals() {
                let t = lit.is_true(self.state.assignment());
                self.deltas[lit.var.index()] -= contribution(count, t);
            }
        }
        let delta = self.state.flip_unchecked(var);
        for (ci, _) in formula.occurrences_of(var) {
            let count = self.state.true_counts()[ci];
            for lit in formula.clauses()[ci].literals() {
                let t = lit.is_true(self.state.assignment());
                self.deltas[lit.var.index()] += contribution(count, t);
            }
        }
        delta
    }

    /// One greedy move: uniform choice among the arg-min flips.
    pub fn step<R: Rng>(&mut self, rng: &mut R) -> FlipRecord {
        let level_before = self.level();
        let poss = self.poss_flips();
        let n = poss.len();
        let var = poss[rng.gen_range(0..n)];
        let delta = self.flip(var);
        FlipRecord {
            level_before,
            var,
            delta,
            poss_flips: n,
        }
    }
}

/// Runs one try from a uniformly random start until the level equals
/// `target`, the level falls below `target`, or `max_flips` flips are spent.
/// The level is tested before every flip, so `max_flips` states are examined.
fn run_try(
    formula: &Formula,
    target: usize,
    max_flips: u64,
    try_index: u64,
    rng: &mut SeededRng,
    trace: bool,
) -> Trajectory {
    let start = Assignment::random(formula.num_vars(), rng);
    let mut walker = Walker::new(formula, start.clone()).expect("start has formula width");
    let mut records = Vec::new();
    let mut status = TryStatus::Exhausted;
    let mut flips = 0;
    for _ in 0..max_flips {
        let level = walker.level();
        if level == target {
            status = TryStatus::Reached;
            break;
        }
        if level < target {
            status = TryStatus::Overshot;
            break;
        }
        if formula.num_vars() == 0 {
            break;
        }
        let rec = walker.step(rng);
        flips += 1;
        if trace {
            records.push(rec);
        }
    }
    Trajectory {
        try_index,
        start,
        status,
        flips,
        final_level: walker.level(),
        final_state: walker.assignment().clone(),
        records,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GsatOutcome {
    /// The first state found at the requested level.
    pub found: Option<Assignment>,
    pub tries: Vec<Trajectory>,
}

impl GsatOutcome {
    pub fn total_flips(&self) -> u64 {
        self.tries.iter().map(|t| t.flips).sum()
    }
}

fn search_level(formula: &Formula, target: usize, config: &GsatConfig) -> Result<GsatOutcome> {
    config.validate()?;
    let mut tries = Vec::new();
    for index in 0..config.max_tries {
        let mut rng = rng_from_seed(config.try_seed(index));
        let t = run_try(formula, target, config.max_flips, index, &mut rng, config.trace);
        let hit = t.status == TryStatus::Reached;
        let state = t.final_state.clone();
        tries.push(t);
        if hit {
            return Ok(GsatOutcome {
                found: Some(state),
                tries,
            });
        }
    }
    Ok(GsatOutcome { found: None, tries })
}

/// GSAT: up to `max_tries` random restarts of `max_flips` greedy flips each.
/// `found` holds the first satisfying assignment, or `None` (FAIL).
pub fn gsat(formula: &Formula, config: &GsatConfig) -> Result<GsatOutcome> {
    search_level(formula, 0, config)
}

/// First visited state whose level is exactly `target`. A try that drops
/// below the target without touching it is abandoned for a fresh one.
pub fn find_state_at_level(
    formula: &Formula,
    target: usize,
    config: &GsatConfig,
) -> Result<GsatOutcome> {
    search_level(formula, target, config)
}

/// Convenience for a single try of exactly `flips` flips (never stopping
/// early except at level 0); returns the terminal trajectory.
pub fn single_try(formula: &Formula, flips: u64, seed: u64) -> Trajectory {
    let mut rng = rng_from_seed(seed);
    run_try(formula, 0, flips, 0, &mut rng, false)
}

/// JSON-lines dump of traced flips, one object per flip.
pub fn trajectory_jsonl(outcome: &GsatOutcome) -> String {
    let mut out = String::new();
    for t in &outcome.tries {
        for (i, r) in t.records.iter().enumerate() {
            let line = serde_json::json!({
                "try": t.try_index,
                "flip": i,
                "level": r.level_before,
                "var": r.var,
                "delta": r.delta,
                "poss_flips": r.poss_flips,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
    }
    out
}
