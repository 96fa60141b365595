//! Shared generators and reference computations for the integration tests.
//! The references here deliberately avoid the library's own solvers.

#![allow(dead_code)]

use aifv_mcmc::aifv::{AifvCode, AifvTree, Node, SourceDistribution};
use aifv_mcmc::{LiftedPoint, PointX, ProblemSpec, Rational, StateSpec};
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::Rng;

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn dyadic(num: i64, bits: u32) -> Rational {
    r(num, 1 << bits)
}

/// Random integer composition of `total` into `parts` nonnegative parts.
fn composition(rng: &mut StdRng, total: i64, parts: usize) -> Vec<i64> {
    let mut cuts: Vec<i64> = (0..parts - 1).map(|_| rng.gen_range(0..=total)).collect();
    cuts.sort();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(total - prev);
    out
}

/// A permissible state with dyadic entries of `b` bits: `q_0 > 0`, `Σ q = 1`,
/// reward in `[0, 4]`.
pub fn random_state(rng: &mut StdRng, m: usize, b: u32) -> StateSpec {
    let unit = 1i64 << b;
    let first = rng.gen_range(1..=unit);
    let mut w = vec![first];
    w.extend(composition(rng, unit - first, m - 1));
    let reward = dyadic(rng.gen_range(0..=4 * unit), b);
    StateSpec::new(reward, w.into_iter().map(|x| dyadic(x, b)).collect()).unwrap()
}

pub fn random_problem(rng: &mut StdRng, m: usize, max_states: usize, b: u32) -> ProblemSpec {
    let sets = (0..m)
        .map(|_| {
            let count = rng.gen_range(1..=max_states);
            (0..count).map(|_| random_state(rng, m, b)).collect()
        })
        .collect();
    ProblemSpec::new(sets).unwrap()
}

/// `n` probabilities that are positive multiples of `2^-b` summing to one.
pub fn random_source(rng: &mut StdRng, n: usize, b: u32) -> SourceDistribution {
    let unit = 1i64 << b;
    assert!(unit >= n as i64);
    let mut w: Vec<i64> = composition(rng, unit - n as i64, n)
        .into_iter()
        .map(|x| x + 1)
        .collect();
    w.sort_by(|a, b| b.cmp(a));
    let symbols = (0..n)
        .map(|i| ((b'a' + i as u8) as char).to_string())
        .collect();
    SourceDistribution::new(symbols, w.into_iter().map(|x| dyadic(x, b)).collect(), b).unwrap()
}

/// The two-type fixture: A, B of type 0 and C, D of type 1.
pub fn four_chain() -> ProblemSpec {
    let a = StateSpec::new(r(1, 1), vec![r(1, 2), r(1, 2)]).unwrap();
    let b = StateSpec::new(r(3, 4), vec![r(1, 4), r(3, 4)]).unwrap();
    let c = StateSpec::new(r(2, 1), vec![r(1, 1), r(0, 1)]).unwrap();
    let d = StateSpec::new(r(3, 2), vec![r(1, 2), r(1, 2)]).unwrap();
    ProblemSpec::new(vec![vec![a, b], vec![c, d]]).unwrap()
}

/// Determinant by expansion along the first row.
pub fn det(a: &[Vec<Rational>]) -> Rational {
    let n = a.len();
    if n == 1 {
        return a[0][0].clone();
    }
    let mut total = Rational::zero();
    for col in 0..n {
        if a[0][col].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Rational>> = a[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != col)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = &a[0][col] * det(&minor);
        if col % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// Common point of the chain's hyperplanes by Cramer's rule on the unknowns
/// `(y, x_1, .., x_{m-1})`.
pub fn cramer_intersection(states: &[&StateSpec]) -> LiftedPoint {
    let m = states.len();
    let a: Vec<Vec<Rational>> = states
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut row = vec![Rational::one()];
            for j in 1..m {
                let mut c = -s.q(j).clone();
                if j == k {
                    c += Rational::one();
                }
                row.push(c);
            }
            row
        })
        .collect();
    let rhs: Vec<Rational> = states.iter().map(|s| s.reward().clone()).collect();
    let d = det(&a);
    assert!(!d.is_zero(), "intersection system is singular");
    let sol: Vec<Rational> = (0..m)
        .map(|col| {
            let replaced: Vec<Vec<Rational>> = a
                .iter()
                .zip(&rhs)
                .map(|(row, v)| {
                    let mut row = row.clone();
                    row[col] = v.clone();
                    row
                })
                .collect();
            det(&replaced) / &d
        })
        .collect();
    LiftedPoint {
        x: PointX(sol[1..].to_vec()),
        y: sol[0].clone(),
    }
}

/// `f_k(x, s)` written out from the definition.
pub fn plane(k: usize, x: &[Rational], s: &StateSpec) -> Rational {
    let mut v = s.reward().clone();
    for j in 1..s.m() {
        v += s.q(j) * &x[j - 1];
    }
    if k > 0 {
        v -= &x[k - 1];
    }
    v
}

/// `g_k(x)` by a direct scan.
pub fn envelope(k: usize, x: &[Rational], p: &ProblemSpec) -> Rational {
    p.states(k).iter().map(|s| plane(k, x, s)).min().unwrap()
}

/// All chains in lexicographic order.
pub fn all_chains(p: &ProblemSpec) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for states in p.state_sets() {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..states.len()).map(move |i| {
                    let mut c = prefix.clone();
                    c.push(i);
                    c
                })
            })
            .collect();
    }
    out
}

/// The AIFV-3 code over {a, b, c, d} consistent with the worked encoding
/// example: in T_0, c ↦ 000 and b ↦ 1 with degree 2; in T_2, a ↦ ε with
/// degree 1; in T_1, b ↦ 010.
pub fn figure_code() -> AifvCode {
    let (a, b, c, d) = (0, 1, 2, 3);
    let t0 = Node::complete(
        Node::i0(Node::complete(Node::leaf(c), Node::leaf(d))),
        Node::master(2, b, Node::i0(Node::i0(Node::leaf(a)))),
    );
    let t1 = Node::complete(
        Node::i1(Node::complete(Node::leaf(b), Node::leaf(c))),
        Node::complete(Node::leaf(a), Node::leaf(d)),
    );
    let t2 = Node::master(
        1,
        a,
        Node::i0(Node::i1(Node::complete(
            Node::leaf(b),
            Node::complete(Node::leaf(c), Node::leaf(d)),
        ))),
    );
    AifvCode::new(
        ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect(),
        vec![
            AifvTree::new(0, t0),
            AifvTree::new(1, t1),
            AifvTree::new(2, t2),
        ],
    )
    .unwrap()
}

pub fn bits(s: &str) -> Vec<bool> {
    s.chars().map(|c| c == '1').collect()
}
