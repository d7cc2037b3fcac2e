//! Random 3-SAT instance generators: uniform, hidden-solution ("hard
//! solvable") and clustered.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded through [`rng_from_seed`].
//! Independent tasks get their own seed via [`derive_seed`], which mixes a
//! master seed with a path of task indices using SplitMix64; the derived
//! value seeds a fresh ChaCha8 stream. The draw order inside each generator
//! is fixed (documented per function), so outputs are bit-identical across
//! platforms for a given seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, Clause, Formula, Literal, Var};
use crate::error::{invalid, Result};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the substream at `path` below `master`.
///
/// `derive_seed(m, &[a, b])` equals `derive_seed(derive_seed(m, &[a]), &[b])`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(master, |acc, &step| splitmix64(splitmix64(acc) ^ step))
}

/// Stable 64-bit FNV-1a hash, used to key substreams by content rather than position.
pub fn stable_hash(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubGenerator {
    #[default]
    Uniform,
    HardSolvable,
}

/// Which generator to run and with what sizes. Seed-free, so it can serve as
/// a grid template.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum GeneratorParams {
    Uniform {
        num_clauses: usize,
        num_variables: usize,
    },
    HardSolvable {
        num_clauses: usize,
        num_variables: usize,
    },
    /// `num_clauses` and `num_variables` are per cluster.
    Cluster {
        num_clauses: usize,
        num_variables: usize,
        num_clusters: usize,
        num_linking: usize,
        #[serde(default)]
        sub_generator: SubGenerator,
    },
}

impl GeneratorParams {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorParams::Uniform { .. } => "uniform",
            GeneratorParams::HardSolvable { .. } => "hard_solvable",
            GeneratorParams::Cluster { .. } => "cluster",
        }
    }

    pub fn total_variables(&self) -> usize {
        match *self {
            GeneratorParams::Uniform { num_variables, .. }
            | GeneratorParams::HardSolvable { num_variables, .. } => num_variables,
            GeneratorParams::Cluster {
                num_variables,
                num_clusters,
                ..
            } => num_variables * num_clusters,
        }
    }

    pub fn total_clauses(&self) -> usize {
        match *self {
            GeneratorParams::Uniform { num_clauses, .. }
            | GeneratorParams::HardSolvable { num_clauses, .. } => num_clauses,
            GeneratorParams::Cluster {
                num_clauses,
                num_clusters,
                num_linking,
                ..
            } => num_clauses * num_clusters + num_linking,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GeneratorParams::Uniform { num_clauses, num_variables }
            | GeneratorParams::HardSolvable { num_clauses, num_variables } => {
                check_sizes(num_clauses, num_variables)
            }
            GeneratorParams::Cluster {
                num_clauses,
                num_variables,
                num_clusters,
                ..
            } => {
                check_sizes(num_clauses, num_variables)?;
                if num_clusters < 3 {
                    return Err(invalid(format!(
                        "cluster generator needs at least 3 clusters, got {num_clusters}"
                    )));
                }
                Ok(())
            }
        }
    }
}

fn check_sizes(num_clauses: usize, num_variables: usize) -> Result<()> {
    if num_variables < 3 {
        return Err(invalid(format!(
            "3-SAT clauses need at least 3 variables, got {num_variables}"
        )));
    }
    if num_clauses < 1 {
        return Err(invalid("number of clauses must be at least 1"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub params: GeneratorParams,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(params: GeneratorParams, seed: u64) -> Self {
        GeneratorSpec { params, seed }
    }

    pub fn generate(&self) -> Result<Formula> {
        self.params.validate()?;
        match self.params {
            GeneratorParams::Uniform { num_clauses, num_variables } => {
                gen_uniform(num_clauses, num_variables, self.seed)
            }
            GeneratorParams::HardSolvable { num_clauses, num_variables } => {
                gen_hard_solvable(num_clauses, num_variables, self.seed)
            }
            GeneratorParams::Cluster {
                num_clauses,
                num_variables,
                num_clusters,
                num_linking,
                sub_generator,
            } => gen_cluster_with(
                num_clauses,
                num_variables,
                num_clusters,
                num_linking,
                sub_generator,
                self.seed,
            ),
        }
    }
}

/// Block layout of a clustered instance.
///
/// Cluster `i` (0-based) owns variables `i*variables_per_cluster+1 ..=
/// (i+1)*variables_per_cluster` and clauses `i*clauses_per_cluster ..
/// (i+1)*clauses_per_cluster`; the linking clauses follow, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterMap {
    pub num_clusters: usize,
    pub variables_per_cluster: usize,
    pub clauses_per_cluster: usize,
    /// The three clusters touched by each linking clause, in literal order.
    pub linking_clusters: Vec<[usize; 3]>,
}

impl ClusterMap {
    pub fn cluster_of(&self, var: Var) -> usize {
        var.index() / self.variables_per_cluster
    }

    pub fn intra_clause_count(&self) -> usize {
        self.num_clusters * self.clauses_per_cluster
    }
}

/// Generator record carried alongside a formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: GeneratorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_solution: Option<Assignment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_map: Option<ClusterMap>,
}

/// Three distinct variables from `offset+1 ..= offset+n`, by rejection, in
/// draw order; then one fair coin per literal in the same order.
fn random_clause<R: Rng>(rng: &mut R, n: usize, offset: usize) -> Clause {
    let first = rng.gen_range(0..n);
    let second = loop {
        let v = rng.gen_range(0..n);
        if v != first {
            break v;
        }
    };
    let third = loop {
        let v = rng.gen_range(0..n);
        if v != first && v != second {
            break v;
        }
    };
    literals_from(rng, [first + offset, second + offset, third + offset])
}

fn literals_from<R: Rng>(rng: &mut R, indices: [usize; 3]) -> Clause {
    let lits = indices.map(|i| Literal::new(Var::from_index(i), !rng.gen_bool(0.5)));
    Clause::new(lits).expect("distinct variables by construction")
}

fn uniform_clauses<R: Rng>(rng: &mut R, c: usize, n: usize, offset: usize) -> Vec<Clause> {
    (0..c).map(|_| random_clause(rng, n, offset)).collect()
}

/// Keeps drawing uniform clauses until `c` have exactly one or three literals
/// true under `hidden`. Every candidate consumes its draws whether kept or not.
fn hidden_solution_clauses<R: Rng>(
    rng: &mut R,
    c: usize,
    n: usize,
    offset: usize,
    hidden: &Assignment,
) -> Vec<Clause> {
    let mut out = Vec::with_capacity(c);
    while out.len() < c {
        let clause = random_clause(rng, n, offset);
        let t = clause.true_count(hidden);
        if t == 1 || t == 3 {
            out.push(clause);
        }
    }
    out
}

/// `c` clauses over `n` variables, each on three distinct variables with
/// independent fair-coin signs.
pub fn gen_uniform(c: usize, n: usize, seed: u64) -> Result<Formula> {
    let params = GeneratorParams::Uniform {
        num_clauses: c,
        num_variables: n,
    };
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    let clauses = uniform_clauses(&mut rng, c, n, 0);
    Ok(Formula::new(n, clauses)?.with_provenance(Provenance {
        generator: GeneratorSpec::new(params, seed),
        hidden_solution: None,
        cluster_map: None,
    }))
}

/// Forced-satisfiable instance: a hidden solution is drawn first (one coin
/// per variable), then uniform candidates are filtered to those with one or
/// three literals true under it.
pub fn gen_hard_solvable(c: usize, n: usize, seed: u64) -> Result<Formula> {
    let params = GeneratorParams::HardSolvable {
        num_clauses: c,
        num_variables: n,
    };
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    let hidden = Assignment::random(n, &mut rng);
    let clauses = hidden_solution_clauses(&mut rng, c, n, 0, &hidden);
    Ok(Formula::new(n, clauses)?.with_provenance(Provenance {
        generator: GeneratorSpec::new(params, seed),
        hidden_solution: Some(hidden),
        cluster_map: None,
    }))
}

/// `m` clusters of `c_sub` uniform clauses over `n` private variables each,
/// joined by `l` linking clauses that each take one variable from three
/// distinct clusters.
pub fn gen_cluster(c_sub: usize, n: usize, m: usize, l: usize, seed: u64) -> Result<Formula> {
    gen_cluster_with(c_sub, n, m, l, SubGenerator::Uniform, seed)
}

pub fn gen_cluster_with(
    c_sub: usize,
    n: usize,
    m: usize,
    l: usize,
    sub: SubGenerator,
    seed: u64,
) -> Result<Formula> {
    let params = GeneratorParams::Cluster {
        num_clauses: c_sub,
        num_variables: n,
        num_clusters: m,
        num_linking: l,
        sub_generator: sub,
    };
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut clauses = Vec::with_capacity(m * c_sub + l);
    for block in 0..m {
        let offset = block * n;
        match sub {
            SubGenerator::Uniform => clauses.extend(uniform_clauses(&mut rng, c_sub, n, offset)),
            SubGenerator::HardSolvable => {
                let local = Assignment::random(n, &mut rng);
                let mut hidden = Assignment::zeros(n * m);
                for (i, b) in local.iter().enumerate() {
                    hidden.set(Var::from_index(offset + i), b);
                }
                clauses.extend(hidden_solution_clauses(&mut rng, c_sub, n, offset, &hidden));
            }
        }
    }
    let mut linking_clusters = Vec::with_capacity(l);
    for _ in 0..l {
        let a = rng.gen_range(0..m);
        let b = loop {
            let x = rng.gen_range(0..m);
            if x != a {
                break x;
            }
        };
        let c = loop {
            let x = rng.gen_range(0..m);
            if x != a && x != b {
                break x;
            }
        };
        let picks = [a, b, c].map(|k| k * n + rng.gen_range(0..n));
        clauses.push(literals_from(&mut rng, picks));
        linking_clusters.push([a, b, c]);
    }
    Ok(Formula::new(n * m, clauses)?.with_provenance(Provenance {
        generator: GeneratorSpec::new(params, seed),
        hidden_solution: None,
        cluster_map: Some(ClusterMap {
            num_clusters: m,
            variables_per_cluster: n,
            clauses_per_cluster: c_sub,
            linking_clusters,
        }),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn single_clause_over_three_vars() {
        let f = gen_uniform(1, 3, 11).unwrap();
        let vars: BTreeSet<u32> = f.clauses()[0]
            .literals()
            .iter()
            .map(|l| l.var.number())
            .collect();
        assert_eq!(vars, BTreeSet::from([1, 2, 3]));
    }

    #[test]
    fn ratio_matches_request() {
        let f = gen_uniform(430, 100, 5).unwrap();
        assert_eq!(f.num_vars(), 100);
        assert_eq!(f.num_clauses(), 430);
        assert!((f.num_clauses() as f64 / f.num_vars() as f64 - 4.3).abs() < 1e-12);
    }

    #[test]
    fn too_few_variables() {
        assert!(gen_uniform(5, 2, 0).is_err());
        assert!(gen_hard_solvable(5, 2, 0).is_err());
        assert!(gen_cluster(5, 10, 2, 3, 0).is_err());
        assert!(gen_uniform(0, 5, 0).is_err());
    }

    #[test]
    fn polarity_is_a_fair_coin() {
        // 10^5 clauses, 3*10^5 literals; per variable ~3000 literals.
        let f = gen_uniform(100_000, 100, 1234).unwrap();
        let mut pos = vec![0u64; 100];
        let mut tot = vec![0u64; 100];
        for c in f.clauses() {
            for l in c.literals() {
                tot[l.var.index()] += 1;
                pos[l.var.index()] += l.positive as u64;
            }
        }
        for v in 0..100 {
            let n = tot[v] as f64;
            let sigma = (n * 0.25).sqrt();
            let dev = (pos[v] as f64 - n / 2.0).abs();
            assert!(dev <= 3.0 * sigma + 1.0, "var {} dev {dev} sigma {sigma}", v + 1);
        }
        let all_pos: u64 = pos.iter().sum();
        let all: u64 = tot.iter().sum();
        let sigma = (all as f64 * 0.25).sqrt();
        assert!((all_pos as f64 - all as f64 / 2.0).abs() <= 3.0 * sigma);
    }

    #[test]
    fn hidden_solution_filter() {
        for seed in 0..20 {
            let f = gen_hard_solvable(200, 50, seed).unwrap();
            let s = f.provenance().unwrap().hidden_solution.clone().unwrap();
            assert_eq!(f.level(&s).unwrap(), 0);
            for c in f.clauses() {
                assert!(matches!(c.true_count(&s), 1 | 3));
            }
        }
    }

    #[test]
    fn sign_pattern_acceptance_is_one_half() {
        // Exhaustive count over the 8 sign patterns of a fixed triple under a fixed S.
        let s = Assignment::from_bools(&[true, false, true]);
        let mut kept = 0;
        for mask in 0..8u32 {
            let lits = [1i64, 2, 3].map(|v| if mask >> (v - 1) & 1 == 1 { v } else { -v });
            let t = Clause::from_dimacs(lits).unwrap().true_count(&s);
            if t == 1 || t == 3 {
                kept += 1;
            }
        }
        assert_eq!(kept, 4);

        // Empirically: count candidates drawn by replaying the same stream.
        let (c, n, seed) = (4000, 60, 99);
        let f = gen_hard_solvable(c, n, seed).unwrap();
        let mut rng = rng_from_seed(seed);
        let hidden = Assignment::random(n, &mut rng);
        assert_eq!(Some(&hidden), f.provenance().unwrap().hidden_solution.as_ref());
        let mut drawn = 0usize;
        let mut accepted = 0usize;
        while accepted < c {
            let cl = random_clause(&mut rng, n, 0);
            drawn += 1;
            if matches!(cl.true_count(&hidden), 1 | 3) {
                assert_eq!(cl, f.clauses()[accepted]);
                accepted += 1;
            }
        }
        let rate = accepted as f64 / drawn as f64;
        assert!((rate - 0.5).abs() < 0.03, "acceptance rate {rate}");
    }

    #[test]
    fn cluster_structure() {
        let f = gen_cluster(36, 10, 10, 20, 3).unwrap();
        assert_eq!(f.num_vars(), 100);
        assert_eq!(f.num_clauses(), 380);
        let map = f.provenance().unwrap().cluster_map.clone().unwrap();
        for (i, c) in f.clauses().iter().enumerate() {
            let blocks: BTreeSet<usize> = c.literals().iter().map(|l| map.cluster_of(l.var)).collect();
            if i < map.intra_clause_count() {
                assert_eq!(blocks, BTreeSet::from([i / 36]));
            } else {
                assert_eq!(blocks.len(), 3);
                let expect: BTreeSet<usize> = map.linking_clusters[i - 360].into_iter().collect();
                assert_eq!(blocks, expect);
            }
        }
    }

    #[test]
    fn same_seed_same_formula() {
        assert_eq!(gen_uniform(50, 20, 8).unwrap(), gen_uniform(50, 20, 8).unwrap());
        assert_ne!(
            gen_uniform(50, 20, 8).unwrap().clauses(),
            gen_uniform(50, 20, 9).unwrap().clauses()
        );
        assert_eq!(
            gen_cluster(10, 5, 4, 6, 1).unwrap(),
            gen_cluster(10, 5, 4, 6, 1).unwrap()
        );
    }

    #[test]
    fn frozen_stream() {
        // Guards against silent changes to the draw order or RNG.
        let f = gen_uniform(3, 10, 42).unwrap();
        assert_eq!(crate::dimacs::emit_clauses(&f), "-10 -5 -7 0\n9 3 6 0\n-8 5 -2 0\n");
    }

    #[test]
    fn derive_seed_composes() {
        let m = 77;
        assert_eq!(derive_seed(m, &[1, 2]), derive_seed(derive_seed(m, &[1]), &[2]));
        assert_ne!(derive_seed(m, &[1, 2]), derive_seed(m, &[2, 1]));
        assert_eq!(derive_seed(m, &[]), m);
    }

    #[test]
    fn spec_json_shape() {
        let spec = GeneratorSpec::new(
            GeneratorParams::Cluster {
                num_clauses: 36,
                num_variables: 10,
                num_clusters: 10,
                num_linking: 20,
                sub_generator: SubGenerator::Uniform,
            },
            7,
        );
        let j = serde_json::to_value(&spec).unwrap();
        assert_eq!(j["variant"], "cluster");
        assert_eq!(j["seed"], 7);
        let back: GeneratorSpec = serde_json::from_value(j).unwrap();
        assert_eq!(back, spec);
        let parsed: GeneratorSpec =
            serde_json::from_str(r#"{"variant":"uniform","num_clauses":4,"num_variables":3,"seed":1}"#)
                .unwrap();
        assert_eq!(parsed.generate().unwrap().num_clauses(), 4);
    }
}
