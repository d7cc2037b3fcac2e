//! Plateau enumeration, classification and escape barriers.
//!
//! A plateau is a maximal connected set of equal-level assignments under
//! single-flip adjacency. Its border is every neighbor of a member that is
//! not itself a member; border states therefore all sit at other levels.
//! A plateau with no strictly lower border state is a minimum, otherwise a
//! bench; members adjacent to a lower state are exits, and a bench made only
//! of exits is a contour.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::cnf::{Assignment, Formula, LevelState, Var, INLINE_WORDS};
use crate::error::{invalid, Result};

/// Default bound on plateau size; larger plateaus are reported truncated.
pub const DEFAULT_STATE_CAP: usize = 10_000;

/// Default bound on states expanded by [`escape_barrier`].
pub const DEFAULT_EXPANSION_CAP: usize = 1_000_000;

type Key = SmallVec<[u64; INLINE_WORDS]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlateauKind {
    /// A minimum at the instance's optimal level (level 0 is always optimal).
    GlobalMinimum,
    /// A minimum above a known optimal level.
    LocalMinimum,
    /// A minimum whose optimality is not known.
    Minimum,
    Bench,
    Contour,
}

impl PlateauKind {
    pub fn is_minimum(self) -> bool {
        matches!(
            self,
            PlateauKind::GlobalMinimum | PlateauKind::LocalMinimum | PlateauKind::Minimum
        )
    }

    /// Contours count as benches.
    pub fn is_bench(self) -> bool {
        matches!(self, PlateauKind::Bench | PlateauKind::Contour)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlateauOptions {
    pub state_cap: usize,
    /// Lowest level reachable in the instance, if known (0 for satisfiable
    /// instances). Used to split minima into local and global.
    pub known_optimum: Option<usize>,
}

impl Default for PlateauOptions {
    fn default() -> Self {
        PlateauOptions {
            state_cap: DEFAULT_STATE_CAP,
            known_optimum: None,
        }
    }
}

impl PlateauOptions {
    pub fn with_cap(state_cap: usize) -> Self {
        PlateauOptions {
            state_cap,
            ..Default::default()
        }
    }

    pub fn satisfiable(mut self) -> Self {
        self.known_optimum = Some(0);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlateauReport {
    pub level: usize,
    /// Members found; equals the cap when truncated.
    pub size: usize,
    pub truncated: bool,
    pub classification: PlateauKind,
    /// False only for truncated plateaus in which no exit was seen.
    pub classification_reliable: bool,
    /// Whether the plateau is at the instance's optimal level, when known.
    pub optimal: Option<bool>,
    pub exit_count: usize,
    pub border_size: usize,
    pub border_level_profile: BTreeMap<usize, usize>,
    /// Smallest member in string order; absent when truncated.
    pub canonical_rep: Option<Assignment>,
    pub seed_state: Assignment,
}

impl PlateauReport {
    /// Exits per member; 1 for contours.
    pub fn exit_ratio(&self) -> f64 {
        self.exit_count as f64 / self.size as f64
    }
}

/// A report together with the member states, in breadth-first order.
#[derive(Debug, Clone)]
pub struct Plateau {
    pub report: PlateauReport,
    pub members: Vec<Assignment>,
}

impl Plateau {
    pub fn contains(&self, a: &Assignment) -> bool {
        self.members.contains(a)
    }
}

/// Breadth-first flood fill over equal-level neighbors of `seed`.
pub fn enumerate_plateau(
    formula: &Formula,
    seed: &Assignment,
    options: &PlateauOptions,
) -> Result<Plateau> {
    if options.state_cap < 1 {
        return Err(invalid("state cap must be at least 1"));
    }
    let root = LevelState::new(formula, seed.clone())?;
    let level = root.level();
    let width = seed.len();

    let mut visited: FxHashSet<Key> = FxHashSet::default();
    let mut queue: VecDeque<Assignment> = VecDeque::new();
    let mut members = Vec::new();
    let mut border: FxHashMap<Key, usize> = FxHashMap::default();
    let mut exit_count = 0;
    let mut truncated = false;

    visited.insert(seed.words().clone());
    queue.push_back(seed.clone());
    while let Some(state) = queue.pop_front() {
        let ls = LevelState::new(formula, state.clone()).expect("width checked");
        let mut is_exit = false;
        let mut key = state.words().clone();
        for i in 0..width {
            let delta = ls.delta_unchecked(Var::from_index(i));
            let bit = 1u64 << (i % 64);
            key[i / 64] ^= bit;
            if delta == 0 {
                if !visited.contains(&key) {
                    if visited.len() >= options.state_cap {
                        truncated = true;
                    } else {
                        visited.insert(key.clone());
                        queue.push_back(Assignment::from_words(width, key.clone()));
                    }
                }
            } else {
                if delta < 0 {
                    is_exit = true;
                }
                border.entry(key.clone()).or_insert((level as i64 + delta) as usize);
            }
            key[i / 64] ^= bit;
        }
        exit_count += is_exit as usize;
        members.push(state);
    }

    let mut border_level_profile = BTreeMap::new();
    for &l in border.values() {
        *border_level_profile.entry(l).or_insert(0) += 1;
    }
    let size = members.len();
    let (classification, classification_reliable, optimal) =
        classify(level, size, exit_count, truncated, options.known_optimum);
    let canonical_rep = if truncated {
        None
    } else {
        members.iter().min().cloned()
    };
    Ok(Plateau {
        report: PlateauReport {
            level,
            size,
            truncated,
            classification,
            classification_reliable,
            optimal,
            exit_count,
            border_size: border.len(),
            border_level_profile,
            canonical_rep,
            seed_state: seed.clone(),
        },
        members,
    })
}

fn classify(
    level: usize,
    size: usize,
    exits: usize,
    truncated: bool,
    known_optimum: Option<usize>,
) -> (PlateauKind, bool, Option<bool>) {
    let optimal = if level == 0 {
        Some(true)
    } else {
        known_optimum.map(|o| level <= o)
    };
    if exits > 0 {
        let kind = if !truncated && exits == size {
            PlateauKind::Contour
        } else {
            PlateauKind::Bench
        };
        // a bench is never optimal unless the optimum is unknown
        return (kind, true, optimal.map(|_| false));
    }
    let kind = match optimal {
        Some(true) => PlateauKind::GlobalMinimum,
        Some(false) => PlateauKind::LocalMinimum,
        None => PlateauKind::Minimum,
    };
    (kind, !truncated, optimal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscapeOptions {
    pub expansion_cap: usize,
    /// Also run the level-ordered search and report its answer alongside.
    #[serde(default)]
    pub level_ordered: bool,
}

impl Default for EscapeOptions {
    fn default() -> Self {
        EscapeOptions {
            expansion_cap: DEFAULT_EXPANSION_CAP,
            level_ordered: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscapeReport {
    pub plateau_level: usize,
    /// Lowest achievable peak level on a path from the plateau to a state
    /// strictly below it. A lower bound when `capped`.
    pub barrier_level: usize,
    pub barrier_increase: usize,
    pub states_expanded: usize,
    pub capped: bool,
    /// False when the search ran out of states without finding a lower
    /// level, i.e. the plateau is a global minimum of an unsatisfiable instance.
    pub escaped: bool,
    /// Level of the first state dequeued by a search ordered on level alone
    /// that has a neighbor below the plateau. Present only when requested and
    /// the minimax search escaped within its cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_ordered_barrier: Option<usize>,
}

/// Minimax escape barrier of a fully enumerated plateau.
///
/// Floods outward from the plateau through states no higher than a
/// threshold, which starts at the plateau level. When the flood stalls, the
/// threshold rises to the lowest level seen just beyond it and the reached
/// states are rescanned. The first threshold at which the flood touches a
/// state strictly below the plateau is the barrier. Only states within the
/// threshold are stored. Benches short-circuit with an increase of 0.
pub fn escape_barrier(
    formula: &Formula,
    plateau: &Plateau,
    options: &EscapeOptions,
) -> Result<EscapeReport> {
    let report = &plateau.report;
    let base = report.level;
    if report.truncated {
        return Err(invalid("escape barrier needs a fully enumerated plateau"));
    }
    if report.exit_count > 0 {
        return Ok(EscapeReport {
            plateau_level: base,
            barrier_level: base,
            barrier_increase: 0,
            states_expanded: 0,
            capped: false,
            escaped: true,
            level_ordered_barrier: options.level_ordered.then_some(base),
        });
    }
    if base == 0 {
        return Err(invalid("no state lies below level 0"));
    }
    if options.expansion_cap < 1 {
        return Err(invalid("expansion cap must be at least 1"));
    }

    let mut flood = Flood {
        formula,
        base,
        threshold: base,
        beyond: usize::MAX,
        seen: plateau.members.iter().map(|m| m.words().clone()).collect(),
        reached: plateau.members.clone(),
        pending: (0..plateau.members.len()).rev().collect(),
    };
    let mut expanded = 0usize;
    let (capped, escaped) = 'search: loop {
        while let Some(i) = flood.pending.pop() {
            if expanded >= options.expansion_cap {
                break 'search (true, false);
            }
            expanded += 1;
            if flood.scan(i) {
                break 'search (false, true);
            }
        }
        if flood.beyond == usize::MAX {
            break (false, false);
        }
        flood.threshold = flood.beyond;
        flood.beyond = usize::MAX;
        for i in 0..flood.reached.len() {
            flood.scan(i);
        }
    };
    let barrier_level = flood.threshold;
    drop(flood);

    // The level-ordered search never looks past the minimax barrier before
    // answering, so it is pruned there; without an exact barrier it is skipped.
    let level_ordered_barrier = if options.level_ordered && escaped {
        level_ordered_escape(formula, plateau, options.expansion_cap, barrier_level)
    } else {
        None
    };
    Ok(EscapeReport {
        plateau_level: base,
        barrier_level,
        barrier_increase: barrier_level - base,
        states_expanded: expanded,
        capped,
        escaped,
        level_ordered_barrier,
    })
}

struct Flood<'f> {
    formula: &'f Formula,
    base: usize,
    threshold: usize,
    /// Lowest neighbor level above the threshold seen this round.
    beyond: usize,
    seen: FxHashSet<Key>,
    reached: Vec<Assignment>,
    /// Indices into `reached` awaiting expansion.
    pending: Vec<usize>,
}

impl Flood<'_> {
    /// Queues the unseen neighbors of `reached[i]` within the threshold.
    /// Returns true on finding a neighbor below the plateau.
    fn scan(&mut self, i: usize) -> bool {
        let state = &self.reached[i];
        let ls = LevelState::new(self.formula, state.clone()).expect("width checked");
        let mut fresh = Vec::new();
        for v in 0..state.len() {
            let var = Var::from_index(v);
            let l = (ls.level() as i64 + ls.delta_unchecked(var)) as usize;
            if l < self.base {
                return true;
            }
            if l > self.threshold {
                self.beyond = self.beyond.min(l);
                continue;
            }
            let nb = state.flipped(var);
            if self.seen.insert(nb.words().clone()) {
                fresh.push(nb);
            }
        }
        for nb in fresh {
            self.pending.push(self.reached.len());
            self.reached.push(nb);
        }
        false
    }
}

/// Expands border states in increasing order of level (ties by discovery
/// order) and returns the level of the first one with a neighbor strictly
/// below the plateau. This can undershoot the true barrier when the search
/// climbs before coming back down. States above `bound` are never queued.
fn level_ordered_escape(formula: &Formula, plateau: &Plateau, cap: usize, bound: usize) -> Option<usize> {
    let base = plateau.report.level;
    let width = formula.num_vars();
    let mut seen: FxHashSet<Key> = plateau.members.iter().map(|m| m.words().clone()).collect();
    let mut heap: LevelQueue = BinaryHeap::new();
    let mut seq = 0u64;
    for m in &plateau.members {
        let ls = LevelState::new(formula, m.clone()).ok()?;
        push_unseen(m, &ls, bound, &mut seen, &mut heap, &mut seq);
    }
    let mut expanded = 0;
    while let Some(Reverse((level, _, key))) = heap.pop() {
        if expanded >= cap {
            return None;
        }
        expanded += 1;
        let state = Assignment::from_words(width, key);
        let ls = LevelState::new(formula, state.clone()).ok()?;
        let has_lower = (0..width).any(|i| {
            (level as i64 + ls.delta_unchecked(Var::from_index(i))) < base as i64
        });
        if has_lower {
            return Some(level);
        }
        push_unseen(&state, &ls, bound, &mut seen, &mut heap, &mut seq);
    }
    None
}

type LevelQueue = BinaryHeap<Reverse<(usize, u64, Key)>>;

fn push_unseen(
    state: &Assignment,
    ls: &LevelState<'_>,
    bound: usize,
    seen: &mut FxHashSet<Key>,
    heap: &mut LevelQueue,
    seq: &mut u64,
) {
    for i in 0..state.len() {
        let var = Var::from_index(i);
        let l = (ls.level() as i64 + ls.delta_unchecked(var)) as usize;
        if l > bound {
            continue;
        }
        let nb = state.flipped(var);
        if seen.insert(nb.words().clone()) {
            heap.push(Reverse((l, *seq, nb.words().clone())));
            *seq += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::golden;

    fn a(s: &str) -> Assignment {
        s.parse().unwrap()
    }

    fn plateau(s: &str) -> Plateau {
        enumerate_plateau(&golden(), &a(s), &PlateauOptions::default().satisfiable()).unwrap()
    }

    fn sorted_members(p: &Plateau) -> Vec<String> {
        let mut v: Vec<String> = p.members.iter().map(|m| m.to_string()).collect();
        v.sort();
        v
    }

    #[test]
    fn golden_local_minimum() {
        let p = plateau("0000");
        let r = &p.report;
        assert_eq!((r.level, r.size, r.exit_count), (1, 1, 0));
        assert_eq!(r.classification, PlateauKind::LocalMinimum);
        assert_eq!(r.border_level_profile, BTreeMap::from([(2, 2), (3, 2)]));
        assert_eq!(r.border_size, 4);
    }

    #[test]
    fn golden_bench() {
        let p = plateau("1001");
        assert_eq!(sorted_members(&p), ["1001", "1011", "1101"]);
        assert_eq!(p.report.classification, PlateauKind::Bench);
        assert_eq!(p.report.exit_count, 2);
        assert_eq!(p.report.canonical_rep, Some(a("1001")));
    }

    #[test]
    fn golden_contours() {
        let p = plateau("0010");
        assert_eq!(sorted_members(&p), ["0010", "0011", "1010"]);
        assert_eq!(p.report.level, 2);
        assert_eq!(p.report.classification, PlateauKind::Contour);
        assert_eq!(p.report.exit_count, 3);

        let p = plateau("1000");
        assert_eq!(sorted_members(&p), ["1000", "1100"]);
        assert_eq!(p.report.level, 3);
        assert_eq!(p.report.classification, PlateauKind::Contour);
    }

    #[test]
    fn golden_global_minimum() {
        let p = enumerate_plateau(&golden(), &a("1111"), &PlateauOptions::default()).unwrap();
        assert_eq!(p.report.classification, PlateauKind::GlobalMinimum);
        assert_eq!((p.report.level, p.report.size), (0, 1));
    }

    #[test]
    fn unknown_optimum_reports_plain_minimum() {
        let p = enumerate_plateau(&golden(), &a("0000"), &PlateauOptions::default()).unwrap();
        assert_eq!(p.report.classification, PlateauKind::Minimum);
        assert_eq!(p.report.optimal, None);
    }

    #[test]
    fn canonical_rep_is_seed_independent() {
        for s in ["0010", "0011", "1010"] {
            assert_eq!(plateau(s).report.canonical_rep, Some(a("0010")));
        }
    }

    #[test]
    fn truncation() {
        // Empty formula: the whole 5-cube is one level-0 plateau of 32 states.
        let f = Formula::new(5, vec![]).unwrap();
        let p = enumerate_plateau(&f, &a("00000"), &PlateauOptions::with_cap(10)).unwrap();
        assert!(p.report.truncated);
        assert_eq!(p.report.size, 10);
        assert_eq!(p.report.canonical_rep, None);
        assert!(!p.report.classification_reliable);
        let full = enumerate_plateau(&f, &a("00000"), &PlateauOptions::with_cap(32)).unwrap();
        assert!(!full.report.truncated);
        assert_eq!(full.report.size, 32);
        assert_eq!(full.report.border_size, 0);
    }

    #[test]
    fn truncated_with_exit_is_a_bench() {
        // x1 ∨ x2 ∨ x3 over 8 vars, unsatisfied block of 32 states where x1..x3 = 0.
        let f = Formula::new(8, vec![crate::cnf::Clause::from_dimacs([1, 2, 3]).unwrap()]).unwrap();
        let p = enumerate_plateau(&f, &a("00000000"), &PlateauOptions::with_cap(4)).unwrap();
        assert!(p.report.truncated);
        assert!(p.report.exit_count > 0);
        assert_eq!(p.report.classification, PlateauKind::Bench);
        assert!(p.report.classification_reliable);
    }

    #[test]
    fn bad_inputs() {
        let f = golden();
        assert!(enumerate_plateau(&f, &a("000"), &PlateauOptions::default()).is_err());
        assert!(enumerate_plateau(&f, &a("0000"), &PlateauOptions::with_cap(0)).is_err());
        let g = plateau("1111");
        assert!(escape_barrier(&f, &g, &EscapeOptions::default()).is_err());
    }

    #[test]
    fn golden_escape() {
        let f = golden();
        let p = plateau("0000");
        let opts = EscapeOptions {
            level_ordered: true,
            ..Default::default()
        };
        let e = escape_barrier(&f, &p, &opts).unwrap();
        assert_eq!(e.barrier_level, 2);
        assert_eq!(e.barrier_increase, 1);
        assert!(e.escaped && !e.capped);
        // the level-ordered search reaches 1101 (level 1, next to 1111) first
        assert_eq!(e.level_ordered_barrier, Some(1));
    }

    #[test]
    fn bench_short_circuits() {
        let f = golden();
        let e = escape_barrier(&f, &plateau("1001"), &EscapeOptions::default()).unwrap();
        assert_eq!(e.barrier_increase, 0);
        assert_eq!(e.states_expanded, 0);
    }

    #[test]
    fn cap_gives_lower_bound() {
        let f = golden();
        let e = escape_barrier(
            &f,
            &plateau("0000"),
            &EscapeOptions {
                expansion_cap: 1,
                level_ordered: false,
            },
        )
        .unwrap();
        assert!(e.capped);
        assert!(e.barrier_level <= 2);
    }

    #[test]
    fn report_json_field_names() {
        let r = plateau("0000").report;
        let v = serde_json::to_value(&r).unwrap();
        for k in [
            "level",
            "size",
            "truncated",
            "classification",
            "exit_count",
            "border_size",
            "border_level_profile",
            "canonical_rep",
            "seed_state",
        ] {
            assert!(v.get(k).is_some(), "missing {k}");
        }
        assert_eq!(v["classification"], "local_minimum");
        assert_eq!(v["canonical_rep"], "0000");
    }
}
