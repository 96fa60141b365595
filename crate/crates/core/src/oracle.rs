//! Brute-force references that share no algorithm with the solvers. Chains
//! are costed from their balance equations and codecs are checked on every
//! short message.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::aifv::{decode, encode, AifvCode};
use crate::error::{Error, Result};
use crate::mcmc::{eval_f, eval_h, ChainSelection, LiftedPoint, PointX, ProblemSpec, StateSpec};
use crate::rational::Rational;

/// Default cap on the number of chains [`brute_force_min`] will visit.
pub const DEFAULT_CHAIN_BUDGET: u128 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub best_chain: ChainSelection,
    pub best_cost: Rational,
    /// One cost per chain, in lexicographic chain order.
    pub all_costs: Vec<Rational>,
    pub samples: Option<Vec<(PointX, Rational)>>,
}

impl OracleReport {
    /// Attaches `(x, h(x))` for every grid point.
    pub fn with_samples(mut self, problem: &ProblemSpec, points: &[PointX]) -> Result<Self> {
        let values: Vec<Rational> = points
            .par_iter()
            .map(|x| eval_h(x, problem))
            .collect::<Result<_>>()?;
        self.samples = Some(points.iter().cloned().zip(values).collect());
        Ok(self)
    }
}

/// The `i`-th chain in lexicographic order (last type varies fastest).
fn chain_at(problem: &ProblemSpec, mut i: u128) -> ChainSelection {
    let sizes: Vec<u128> = problem
        .state_sets()
        .iter()
        .map(|s| s.len() as u128)
        .collect();
    let mut idx = vec![0usize; sizes.len()];
    for k in (0..sizes.len()).rev() {
        idx[k] = (i % sizes[k]) as usize;
        i /= sizes[k];
    }
    ChainSelection(idx)
}

/// Solves a square system given as augmented rows `[A | b]`.
#[allow(clippy::needless_range_loop)]
fn eliminate(mut rows: Vec<Vec<Rational>>) -> Result<Vec<Rational>> {
    let n = rows.len();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !rows[r][col].is_zero()) else {
            return Err(Error::Singular(format!("no pivot in column {col}")));
        };
        rows.swap(col, p);
        for r in 0..n {
            if r != col && !rows[r][col].is_zero() {
                let f = &rows[r][col] / &rows[col][col];
                for c in col..=n {
                    let d = &f * &rows[col][c];
                    rows[r][c] -= d;
                }
            }
        }
    }
    Ok((0..n).map(|k| &rows[k][n] / &rows[k][k]).collect())
}

/// Long-run average reward of a chain, from the stationary distribution of
/// its type-transition matrix solved by plain Gaussian elimination.
///
/// Row `k` of the matrix is the transition vector of the type-`k` state; the
/// balance rows `π P = π` for types `1..m-1` plus `Σ π = 1` pin `π` down.
pub fn chain_cost_by_balance(states: &[&StateSpec]) -> Result<Rational> {
    let m = states.len();
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
    rows.push((0..=m).map(|_| Rational::one()).collect());
    for j in 1..m {
        let mut row: Vec<Rational> = states.iter().map(|s| s.q(j).clone()).collect();
        row[j] -= Rational::one();
        row.push(Rational::zero());
        rows.push(row);
    }
    let pi = eliminate(rows)?;
    Ok(pi.iter().zip(states).map(|(p, s)| p * s.reward()).sum())
}

/// The optimal point `(x*, y*)`: among the cheapest chains, in lexicographic
/// order, the first whose planes meet on every lower envelope.
pub fn optimal_point(
    problem: &ProblemSpec,
    report: &OracleReport,
) -> Result<(ChainSelection, LiftedPoint)> {
    let m = problem.m();
    for (i, cost) in report.all_costs.iter().enumerate() {
        if *cost != report.best_cost {
            continue;
        }
        let chain = chain_at(problem, i as u128);
        let states = problem.resolve(&chain)?;
        // unknowns (y, x_1..x_{m-1}): y - Σ q_j x_j + [k>0] x_k = ℓ
        let rows: Vec<Vec<Rational>> = states
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
                row.push(s.reward().clone());
                row
            })
            .collect();
        let sol = eliminate(rows)?;
        let point = LiftedPoint {
            x: PointX(sol[1..].to_vec()),
            y: sol[0].clone(),
        };
        let on_envelopes = (0..m).all(|k| {
            problem
                .states(k)
                .iter()
                .all(|s| eval_f(k, &point.x, s).is_ok_and(|f| f >= point.y))
        });
        if on_envelopes {
            return Ok((chain, point));
        }
    }
    Err(Error::Invariant(
        "no cheapest chain meets on the envelopes".into(),
    ))
}

/// Costs every chain and returns the cheapest (ties: smallest index vector).
/// Refuses when the chain count exceeds `budget`.
pub fn brute_force_min(problem: &ProblemSpec, budget: u128) -> Result<OracleReport> {
    let total = problem.chain_count();
    if total > budget {
        return Err(Error::BudgetExceeded(format!(
            "{total} chains exceed the budget of {budget}"
        )));
    }
    let all_costs: Vec<Rational> = (0..total as u64)
        .into_par_iter()
        .map(|i| {
            let chain = chain_at(problem, i as u128);
            let states = problem.resolve(&chain)?;
            chain_cost_by_balance(&states)
        })
        .collect::<Result<_>>()?;
    let (best, best_cost) = all_costs
        .iter()
        .enumerate()
        .fold(None::<(usize, &Rational)>, |acc, (i, c)| match acc {
            Some((_, b)) if b <= c => acc,
            _ => Some((i, c)),
        })
        .expect("at least one chain");
    Ok(OracleReport {
        best_chain: chain_at(problem, best as u128),
        best_cost: best_cost.clone(),
        all_costs,
        samples: None,
    })
}

/// Evenly spaced grid with `steps + 1` points per axis over the box
/// `[lo_j, hi_j]`.
pub fn grid(lo: &[Rational], hi: &[Rational], steps: usize) -> Vec<PointX> {
    let mut out = vec![Vec::new()];
    for (a, b) in lo.iter().zip(hi) {
        let axis: Vec<Rational> = (0..=steps)
            .map(|i| {
                if steps == 0 {
                    a.clone()
                } else {
                    a + (b - a) * Rational::new((i as i64).into(), (steps as i64).into())
                }
            })
            .collect();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(PointX).collect()
}

/// `max h(x)` over the grid, a lower bound on the polytope height; `None` for
/// an empty grid.
pub fn sample_height(
    problem: &ProblemSpec,
    points: &[PointX],
) -> Result<Option<(PointX, Rational)>> {
    let values: Vec<Rational> = points
        .par_iter()
        .map(|x| eval_h(x, problem))
        .collect::<Result<_>>()?;
    Ok(points
        .iter()
        .zip(values)
        .fold(None, |acc: Option<(PointX, Rational)>, (x, v)| match acc {
            Some((_, ref b)) if *b >= v => acc,
            _ => Some((x.clone(), v)),
        }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundtripReport {
    pub checked: u64,
    pub counterexample: Option<RoundtripFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundtripFailure {
    pub message: Vec<usize>,
    pub detail: String,
}

/// Checks `decode(encode(s), |s|) = s` for every message of length at most
/// `max_len`, stopping at the first failure.
pub fn exhaustive_roundtrip(
    code: &AifvCode,
    max_len: usize,
    budget: u64,
) -> Result<RoundtripReport> {
    let n = code.symbols().len() as u64;
    let mut total: u64 = 0;
    let mut layer: u64 = 1;
    for _ in 0..=max_len {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(n);
    }
    if total > budget {
        return Err(Error::BudgetExceeded(format!(
            "{total} messages exceed the budget of {budget}"
        )));
    }
    let mut checked = 0;
    for len in 0..=max_len {
        let count = (n as u128).pow(len as u32) as u64;
        for i in 0..count {
            let mut rest = i;
            let msg: Vec<usize> = (0..len)
                .map(|_| {
                    let s = (rest % n) as usize;
                    rest /= n;
                    s
                })
                .collect();
            checked += 1;
            let outcome = encode(code, &msg).and_then(|bits| decode(code, &bits, msg.len()));
            let detail = match outcome {
                Ok(back) if back == msg => continue,
                Ok(back) => format!("decoded as {back:?}"),
                Err(e) => e.to_string(),
            };
            return Ok(RoundtripReport {
                checked,
                counterexample: Some(RoundtripFailure {
                    message: msg,
                    detail,
                }),
            });
        }
    }
    Ok(RoundtripReport {
        checked,
        counterexample: None,
    })
}
