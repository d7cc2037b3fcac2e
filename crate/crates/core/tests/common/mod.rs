//! Whole-hypercube reference computations for small instances. Deliberately
//! naive: states are plain integers (bit i is variable i+1), levels come from
//! the signed DIMACS literals, and nothing from the plateau module is used.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use satscape::generate::{gen_cluster, gen_cluster_with, gen_hard_solvable, gen_uniform, SubGenerator};
use satscape::{Assignment, Formula};

pub struct Hypercube {
    pub n: usize,
    pub levels: Vec<usize>,
    /// Component id of every state.
    pub component: Vec<usize>,
    pub components: Vec<Component>,
    pub optimum: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    Global,
    Local,
    Bench,
    Contour,
}

#[derive(Debug, Clone)]
pub struct Component {
    pub level: usize,
    pub members: Vec<u64>,
    pub exits: usize,
    pub border_profile: BTreeMap<usize, usize>,
    pub border_size: usize,
    pub kind: Kind,
    /// Smallest member read as a 0/1 string with variable 1 first.
    pub canonical: String,
}

pub fn state_string(n: usize, s: u64) -> String {
    (0..n).map(|i| if s >> i & 1 == 1 { '1' } else { '0' }).collect()
}

/// Inverse of [`state_string`].
pub fn state_index(s: &str) -> usize {
    s.chars().enumerate().filter(|&(_, c)| c == '1').map(|(i, _)| 1 << i).sum()
}

pub fn to_assignment(n: usize, s: u64) -> Assignment {
    state_string(n, s).parse().unwrap()
}

pub fn level_of(clauses: &[[i64; 3]], s: u64) -> usize {
    clauses
        .iter()
        .filter(|c| {
            !c.iter().any(|&l| {
                let bit = s >> (l.unsigned_abs() - 1) & 1 == 1;
                bit == (l > 0)
            })
        })
        .count()
}

pub fn raw_clauses(f: &Formula) -> Vec<[i64; 3]> {
    f.clauses()
        .iter()
        .map(|c| {
            let l = c.literals();
            [l[0].to_dimacs(), l[1].to_dimacs(), l[2].to_dimacs()]
        })
        .collect()
}

impl Hypercube {
    pub fn build(f: &Formula) -> Self {
        let n = f.num_vars();
        assert!(n <= 20);
        let clauses = raw_clauses(f);
        let total = 1u64 << n;
        let levels: Vec<usize> = (0..total).map(|s| level_of(&clauses, s)).collect();
        let optimum = *levels.iter().min().unwrap();
        let mut component = vec![usize::MAX; total as usize];
        let mut components = Vec::new();
        for start in 0..total {
            if component[start as usize] != usize::MAX {
                continue;
            }
            let id = components.len();
            let level = levels[start as usize];
            let mut members = vec![start];
            component[start as usize] = id;
            let mut queue = VecDeque::from([start]);
            while let Some(s) = queue.pop_front() {
                for i in 0..n {
                    let t = s ^ (1 << i);
                    if levels[t as usize] == level && component[t as usize] == usize::MAX {
                        component[t as usize] = id;
                        members.push(t);
                        queue.push_back(t);
                    }
                }
            }
            let mut exits = 0;
            let mut border = BTreeSet::new();
            for &s in &members {
                let mut exit = false;
                for i in 0..n {
                    let t = s ^ (1 << i);
                    let lt = levels[t as usize];
                    if lt != level {
                        border.insert(t);
                    }
                    if lt < level {
                        exit = true;
                    }
                }
                exits += exit as usize;
            }
            let mut border_profile = BTreeMap::new();
            for &t in &border {
                *border_profile.entry(levels[t as usize]).or_insert(0) += 1;
            }
            let kind = if exits == 0 {
                if level == optimum {
                    Kind::Global
                } else {
                    Kind::Local
                }
            } else if exits == members.len() {
                Kind::Contour
            } else {
                Kind::Bench
            };
            let canonical = members.iter().map(|&m| state_string(n, m)).min().unwrap();
            components.push(Component {
                level,
                members,
                exits,
                border_size: border.len(),
                border_profile,
                kind,
                canonical,
            });
        }
        Hypercube {
            n,
            levels,
            component,
            components,
            optimum,
        }
    }

    /// Smallest threshold t such that some state below the component's level
    /// is reachable from it through states of level at most t. `None` when
    /// nothing lower exists.
    pub fn escape_barrier(&self, id: usize) -> Option<usize> {
        let c = &self.components[id];
        if !self.levels.iter().any(|&l| l < c.level) {
            return None;
        }
        let max_level = *self.levels.iter().max().unwrap();
        for t in c.level..=max_level {
            let mut seen = vec![false; self.levels.len()];
            let mut queue: VecDeque<u64> = c.members.iter().copied().collect();
            for &m in &c.members {
                seen[m as usize] = true;
            }
            while let Some(s) = queue.pop_front() {
                for i in 0..self.n {
                    let u = s ^ (1 << i);
                    let lu = self.levels[u as usize];
                    if lu < c.level {
                        return Some(t);
                    }
                    if lu <= t && !seen[u as usize] {
                        seen[u as usize] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
        unreachable!("a lower state exists, so the top threshold reaches it")
    }
}

/// The small-instance population: all three generators, N ≤ 12.
pub fn small_instances(count_per_generator: usize) -> Vec<(String, Formula)> {
    let mut out = Vec::new();
    for i in 0..count_per_generator {
        let seed = 1000 + i as u64;
        let n = 6 + i % 7;
        let ratio = [3.0, 3.8, 4.3, 4.8, 5.5][i % 5];
        let c = ((n as f64) * ratio).round() as usize;
        out.push((format!("uniform n={n} c={c} seed={seed}"), gen_uniform(c, n, seed).unwrap()));
        out.push((
            format!("hard_solvable n={n} c={c} seed={seed}"),
            gen_hard_solvable(c, n, seed).unwrap(),
        ));
        // 3 or 4 clusters of 3 or 4 variables
        let (m, nc) = [(3, 4), (4, 3), (3, 3)][i % 3];
        let c_sub = [6, 10, 14][i % 3];
        let l = 1 + i % 4;
        let f = if i % 2 == 0 {
            gen_cluster(c_sub, nc, m, l, seed).unwrap()
        } else {
            gen_cluster_with(c_sub, nc, m, l, SubGenerator::HardSolvable, seed).unwrap()
        };
        out.push((format!("cluster m={m} n={nc} c={c_sub} l={l} seed={seed}"), f));
    }
    out
}

fn kind_matches(kind: &Kind, got: satscape::PlateauKind) -> bool {
    use satscape::PlateauKind as P;
    matches!(
        (kind, got),
        (Kind::Global, P::GlobalMinimum) | (Kind::Local, P::LocalMinimum) | (Kind::Bench, P::Bench) | (Kind::Contour, P::Contour)
    )
}

/// Checks every plateau of `f` against the hypercube. Returns the number of
/// plateaus compared.
pub fn compare_with_toolkit(f: &Formula) -> Result<usize, String> {
    use satscape::{enumerate_plateau, escape_barrier, EscapeOptions, PlateauOptions};
    let cube = Hypercube::build(f);
    let n = cube.n;
    let options = PlateauOptions {
        state_cap: 1 << n,
        known_optimum: Some(cube.optimum),
    };
    let mut covered = vec![false; cube.levels.len()];
    for (id, c) in cube.components.iter().enumerate() {
        let seed = c.members[c.members.len() / 2];
        let p = enumerate_plateau(f, &to_assignment(n, seed), &options).map_err(|e| e.to_string())?;
        let r = &p.report;
        let tag = format!("plateau of {} (level {})", c.canonical, c.level);
        if r.truncated || r.level != c.level || r.size != c.members.len() {
            return Err(format!("{tag}: size {} level {} vs {} {}", r.size, r.level, c.members.len(), c.level));
        }
        let mut got: Vec<String> = p.members.iter().map(|m| m.to_string()).collect();
        let mut want: Vec<String> = c.members.iter().map(|&m| state_string(n, m)).collect();
        got.sort();
        want.sort();
        if got != want {
            return Err(format!("{tag}: member sets differ"));
        }
        for m in &c.members {
            if std::mem::replace(&mut covered[*m as usize], true) {
                return Err(format!("{tag}: state {} in two plateaus", state_string(n, *m)));
            }
        }
        if !kind_matches(&c.kind, r.classification) {
            return Err(format!("{tag}: {:?} vs {:?}", r.classification, c.kind));
        }
        if (r.exit_count, r.border_size) != (c.exits, c.border_size) {
            return Err(format!("{tag}: exits/border {:?} vs {:?}", (r.exit_count, r.border_size), (c.exits, c.border_size)));
        }
        if r.border_level_profile != c.border_profile {
            return Err(format!("{tag}: border profile {:?} vs {:?}", r.border_level_profile, c.border_profile));
        }
        if r.canonical_rep.as_ref().map(|a| a.to_string()) != Some(c.canonical.clone()) {
            return Err(format!("{tag}: canonical rep {:?}", r.canonical_rep));
        }
        if c.exits == 0 && c.level > 0 {
            let e = escape_barrier(
                f,
                &p,
                &EscapeOptions {
                    expansion_cap: 1 << n,
                    level_ordered: false,
                },
            )
            .map_err(|e| e.to_string())?;
            match cube.escape_barrier(id) {
                Some(b) if e.escaped && !e.capped && e.barrier_level == b => {}
                None if !e.escaped && !e.capped => {}
                want => {
                    return Err(format!(
                        "{tag}: barrier {} escaped={} capped={} vs {want:?}",
                        e.barrier_level, e.escaped, e.capped
                    ))
                }
            }
        }
    }
    if covered.iter().any(|&c| !c) {
        return Err("plateaus do not cover the hypercube".into());
    }
    Ok(cube.components.len())
}
