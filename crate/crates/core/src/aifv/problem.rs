//! Turning a source into a minimum-cost Markov chain problem whose type-`k`
//! states are the type-`k` code trees within a node cap.
//!
//! Listing every tree is hopeless beyond a handful of symbols, and most trees
//! can never be optimal. The construction keeps a subset of trees whose
//! states have the same lower envelope `g_k` over all of `Q^{m-1}` as the full
//! capped set, which leaves every envelope, the polytope and the optimum
//! unchanged:
//!
//! 1. Shapes are built bottom-up per [`Role`], summarised by the sorted master
//!    depths of each degree. A shape whose depth lists are componentwise no
//!    shallower than another shape of the same role and degree counts, while
//!    using no fewer nodes, is discarded: substituting the other shape never
//!    lengthens any codeword.
//! 2. For a fixed `x` the best symbol placement on a shape sorts master slots
//!    by `depth + x_degree` and hands the most probable symbols the smallest
//!    weights. Only placements arising this way for some `x` are generated:
//!    each degree class takes its symbols in probability order, and the
//!    classes interleave arbitrarily.
//! 3. Among trees with the same transition vector only the shortest survives,
//!    and finally only vertices of the lower convex hull of `(q, ℓ)` are kept.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hull::lower_hull_vertices;
use crate::mcmc::{ChainSelection, ProblemSpec, StateSpec};
use crate::rational::Rational;

use super::grammar::{productions, reachable_roles, root_role, Production, Role, Skeleton};
use super::source::SourceDistribution;
use super::tree::{tree_to_state, validate_tree, AifvCode, AifvTree};

/// Default node cap: `3n + m`.
pub fn default_max_nodes(n: usize, m: usize) -> usize {
    3 * n + m
}

/// A code-tree problem: the Markov chain problem plus, for every state, the
/// tree it came from.
#[derive(Debug, Clone)]
pub struct AifvProblem {
    pub problem: ProblemSpec,
    pub trees: Vec<Vec<AifvTree>>,
    pub source: SourceDistribution,
    pub max_nodes: usize,
}

impl AifvProblem {
    pub fn m(&self) -> usize {
        self.problem.m()
    }

    pub fn tree(&self, k: usize, index: usize) -> &AifvTree {
        &self.trees[k][index]
    }

    /// The code formed by the trees a chain selects.
    pub fn code_for(&self, chain: &ChainSelection) -> Result<AifvCode> {
        self.problem.resolve(chain)?;
        let trees = chain
            .0
            .iter()
            .enumerate()
            .map(|(k, &i)| self.trees[k][i].clone())
            .collect();
        AifvCode::new(self.source.symbols().to_vec(), trees)
    }
}

#[derive(Debug, Clone)]
struct Entry {
    nodes: usize,
    /// Master depths per degree, ascending.
    depths: Vec<Vec<u16>>,
    skeleton: Arc<Skeleton>,
}

impl Entry {
    fn masters(&self) -> usize {
        self.depths.iter().map(Vec::len).sum()
    }

    fn key(&self) -> Vec<usize> {
        self.depths.iter().map(Vec::len).collect()
    }

    fn dominates(&self, other: &Entry) -> bool {
        self.nodes <= other.nodes
            && self
                .depths
                .iter()
                .zip(&other.depths)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x <= y))
    }

    fn shifted(&self, by: u16) -> Vec<Vec<u16>> {
        self.depths
            .iter()
            .map(|d| d.iter().map(|x| x + by).collect())
            .collect()
    }
}

fn merge_sorted(a: &[u16], b: &[u16]) -> Vec<u16> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[derive(Default)]
struct RoleTable {
    entries: Vec<Entry>,
    by_size: Vec<Vec<usize>>,
    by_key: HashMap<Vec<usize>, Vec<usize>>,
}

impl RoleTable {
    fn of_size(&self, size: usize) -> impl Iterator<Item = &Entry> {
        self.by_size
            .get(size)
            .into_iter()
            .flatten()
            .map(|&i| &self.entries[i])
    }

    /// Inserts a batch of same-size candidates, keeping only undominated ones.
    fn absorb(&mut self, size: usize, candidates: Vec<Entry>) {
        if self.by_size.len() <= size {
            self.by_size.resize(size + 1, Vec::new());
        }
        for cand in candidates {
            let key = cand.key();
            let bucket = self.by_key.entry(key).or_default();
            if bucket.iter().any(|&i| self.entries[i].dominates(&cand)) {
                continue;
            }
            // Only same-size entries can be dominated by a newcomer.
            let entries = &self.entries;
            let beaten: Vec<usize> = bucket
                .iter()
                .copied()
                .filter(|&i| entries[i].nodes == size && cand.dominates(&entries[i]))
                .collect();
            if !beaten.is_empty() {
                bucket.retain(|i| !beaten.contains(i));
                self.by_size[size].retain(|i| !beaten.contains(i));
            }
            let idx = self.entries.len();
            self.entries.push(cand);
            bucket.push(idx);
            self.by_size[size].push(idx);
        }
    }
}

/// Undominated shapes with exactly `n` masters for the root role of every
/// type, indexed by type.
fn root_shapes(m: usize, n: usize, max_nodes: usize) -> Vec<Vec<Entry>> {
    let mut roles: Vec<Role> = (0..m)
        .flat_map(|k| reachable_roles(root_role(k), m))
        .collect();
    roles.sort();
    roles.dedup();
    let mut tables: HashMap<Role, RoleTable> =
        roles.iter().map(|&r| (r, RoleTable::default())).collect();
    let empty_depths = || vec![Vec::<u16>::new(); m];
    for size in 1..=max_nodes {
        let batches: Vec<(Role, Vec<Entry>)> = roles
            .par_iter()
            .map(|&role| {
                let mut cands = Vec::new();
                for prod in productions(role, m) {
                    match prod {
                        Production::Leaf => {
                            if size == 1 {
                                let mut depths = empty_depths();
                                depths[0].push(0);
                                cands.push(Entry {
                                    nodes: 1,
                                    depths,
                                    skeleton: Arc::new(Skeleton::Leaf),
                                });
                            }
                        }
                        Production::Master { degree, child } => {
                            let own = 1 + degree;
                            if size <= own {
                                continue;
                            }
                            for e in tables[&child].of_size(size - own) {
                                if e.masters() + 1 > n {
                                    continue;
                                }
                                let mut depths = e.shifted(own as u16);
                                depths[degree].insert(0, 0);
                                cands.push(Entry {
                                    nodes: size,
                                    depths,
                                    skeleton: Arc::new(Skeleton::Master {
                                        degree,
                                        child: e.skeleton.clone(),
                                    }),
                                });
                            }
                        }
                        Production::I0(child) | Production::I1(child) => {
                            if size < 2 {
                                continue;
                            }
                            for e in tables[&child].of_size(size - 1) {
                                let skeleton = if matches!(prod, Production::I0(_)) {
                                    Skeleton::I0(e.skeleton.clone())
                                } else {
                                    Skeleton::I1(e.skeleton.clone())
                                };
                                cands.push(Entry {
                                    nodes: size,
                                    depths: e.shifted(1),
                                    skeleton: Arc::new(skeleton),
                                });
                            }
                        }
                        Production::Complete { zero, one } => {
                            if size < 3 {
                                continue;
                            }
                            for left in 1..=size - 2 {
                                let right = size - 1 - left;
                                for a in tables[&zero].of_size(left) {
                                    for b in tables[&one].of_size(right) {
                                        if a.masters() + b.masters() > n {
                                            continue;
                                        }
                                        let depths = a
                                            .depths
                                            .iter()
                                            .zip(&b.depths)
                                            .map(|(x, y)| {
                                                merge_sorted(x, y)
                                                    .into_iter()
                                                    .map(|d| d + 1)
                                                    .collect()
                                            })
                                            .collect();
                                        cands.push(Entry {
                                            nodes: size,
                                            depths,
                                            skeleton: Arc::new(Skeleton::Complete(
                                                a.skeleton.clone(),
                                                b.skeleton.clone(),
                                            )),
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
                (role, cands)
            })
            .collect();
        for (role, cands) in batches {
            tables
                .get_mut(&role)
                .expect("role table")
                .absorb(size, cands);
        }
    }
    (0..m)
        .map(|k| {
            let table = &tables[&root_role(k)];
            let mut out: Vec<Entry> = table
                .by_size
                .iter()
                .flatten()
                .map(|&i| &table.entries[i])
                .filter(|e| e.masters() == n)
                .cloned()
                .collect();
            out.sort_by(|a, b| a.depths.cmp(&b.depths).then(a.nodes.cmp(&b.nodes)));
            out
        })
        .collect()
}

/// All sequences over `0..counts.len()` using value `j` exactly `counts[j]` times.
fn interleavings(counts: &[usize]) -> Vec<Vec<u8>> {
    fn rec(left: &mut [usize], cur: &mut Vec<u8>, total: usize, out: &mut Vec<Vec<u8>>) {
        if cur.len() == total {
            out.push(cur.clone());
            return;
        }
        for j in 0..left.len() {
            if left[j] > 0 {
                left[j] -= 1;
                cur.push(j as u8);
                rec(left, cur, total, out);
                cur.pop();
                left[j] += 1;
            }
        }
    }
    let total = counts.iter().sum();
    let mut out = Vec::new();
    rec(&mut counts.to_vec(), &mut Vec::new(), total, &mut out);
    out
}

#[derive(Debug, Clone)]
struct Candidate {
    reward: u64,
    q: Vec<u64>,
    shape: usize,
    order: Vec<u8>,
}

/// Best placement per transition vector. The transition vector depends only
/// on which degree class each probability rank joins, so shapes sharing the
/// degree counts share their interleavings and only compete on reward.
fn candidates_for_shapes(
    shapes: &[Entry],
    scaled: &[u64],
    ranked: &[usize],
    m: usize,
) -> Vec<Candidate> {
    let mut groups: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (si, shape) in shapes.iter().enumerate() {
        groups.entry(shape.key()).or_default().push(si);
    }
    let mut keys: Vec<Vec<usize>> = groups.keys().cloned().collect();
    keys.sort();
    let mut best: HashMap<Vec<u64>, Candidate> = HashMap::new();
    for key in keys {
        let members = &groups[&key];
        let offsets: Vec<usize> = key
            .iter()
            .scan(0, |acc, &c| {
                let start = *acc;
                *acc += c;
                Some(start)
            })
            .collect();
        let flat: Vec<Vec<u64>> = members
            .iter()
            .map(|&si| {
                shapes[si]
                    .depths
                    .iter()
                    .flatten()
                    .map(|&d| d as u64)
                    .collect()
            })
            .collect();
        let found: Vec<Candidate> = interleavings(&key)
            .into_par_iter()
            .map(|order| {
                let mut next = offsets.clone();
                let mut q = vec![0u64; m];
                let mut pos = Vec::with_capacity(order.len());
                for (rank, &deg) in order.iter().enumerate() {
                    pos.push(next[deg as usize]);
                    next[deg as usize] += 1;
                    q[deg as usize] += scaled[ranked[rank]];
                }
                let weights: Vec<u64> = (0..order.len()).map(|r| scaled[ranked[r]]).collect();
                let (mut reward, mut shape) = (u64::MAX, 0);
                for (mi, depths) in flat.iter().enumerate() {
                    let r: u64 = weights.iter().zip(&pos).map(|(w, &p)| w * depths[p]).sum();
                    if r < reward {
                        reward = r;
                        shape = members[mi];
                    }
                }
                Candidate {
                    reward,
                    q,
                    shape,
                    order,
                }
            })
            .collect();
        for c in found {
            match best.get(&c.q) {
                Some(b) if b.reward <= c.reward => {}
                _ => {
                    best.insert(c.q.clone(), c);
                }
            }
        }
    }
    let mut out: Vec<Candidate> = best.into_values().collect();
    out.sort_by(|a, b| a.q.cmp(&b.q).then(a.reward.cmp(&b.reward)));
    out
}

fn materialise(shape: &Entry, order: &[u8], ranked: &[usize], k: usize, m: usize) -> AifvTree {
    // Symbols claimed by each degree class, most probable first.
    let mut by_degree: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (rank, &deg) in order.iter().enumerate() {
        by_degree[deg as usize].push(ranked[rank]);
    }
    let slots = shape.skeleton.slots();
    // Within a degree class, shallower slots (preorder on ties) take earlier symbols.
    let mut symbols = vec![0usize; slots.len()];
    for (deg, class) in by_degree.iter().enumerate() {
        let mut idx: Vec<usize> = (0..slots.len()).filter(|&i| slots[i].1 == deg).collect();
        idx.sort_by_key(|&i| slots[i].0);
        for (slot, &sym) in idx.into_iter().zip(class) {
            symbols[slot] = sym;
        }
    }
    AifvTree::new(k, shape.skeleton.to_node(&symbols))
}

/// Builds the Markov chain problem for AIFV-`m` codes over `source` whose
/// trees have at most `max_nodes` nodes. See the module docs for which trees
/// are kept as states.
pub fn aifv_problem(
    source: &SourceDistribution,
    m: usize,
    max_nodes: usize,
) -> Result<AifvProblem> {
    if m < 2 {
        return Err(Error::InvalidProblem(format!(
            "m must be at least 2, got {m}"
        )));
    }
    let n = source.len();
    let scaled = source.scaled_probs();
    let ranked = source.order_by_probability();
    let scale = Rational::from_integer(BigInt::from(1u8) << source.bits() as usize);
    let to_rat = |v: u64| Rational::from_integer(BigInt::from(v)) / &scale;

    let mut state_sets = Vec::with_capacity(m);
    let mut trees = Vec::with_capacity(m);
    let all_shapes = root_shapes(m, n, max_nodes);
    for (k, shapes) in all_shapes.into_iter().enumerate() {
        if shapes.is_empty() {
            return Err(Error::CapTooSmall(format!(
                "no type-{k} tree over {n} symbols fits in {max_nodes} nodes"
            )));
        }
        let cands = candidates_for_shapes(&shapes, &scaled, &ranked, m);
        let points: Vec<(Vec<Rational>, Rational)> = cands
            .iter()
            .map(|c| {
                (
                    c.q[1..].iter().map(|&v| to_rat(v)).collect(),
                    to_rat(c.reward),
                )
            })
            .collect();
        let keep = lower_hull_vertices(&points);
        let mut states = Vec::with_capacity(keep.len());
        let mut kept_trees = Vec::with_capacity(keep.len());
        for i in keep {
            let c = &cands[i];
            let tree = materialise(&shapes[c.shape], &c.order, &ranked, k, m);
            let problems = validate_tree(&tree, k, m, n);
            if !problems.is_empty() {
                return Err(Error::Invariant(format!(
                    "built an invalid tree {tree}: {problems:?}"
                )));
            }
            let state = tree_to_state(&tree, source, m)?;
            let expected =
                StateSpec::new(to_rat(c.reward), c.q.iter().map(|&v| to_rat(v)).collect())?;
            if state != expected {
                return Err(Error::Invariant(format!(
                    "tree {tree} does not realise its summary"
                )));
            }
            states.push(state);
            kept_trees.push(tree);
        }
        state_sets.push(states);
        trees.push(kept_trees);
    }
    Ok(AifvProblem {
        problem: ProblemSpec::new(state_sets)?,
        trees,
        source: source.clone(),
        max_nodes,
    })
}
