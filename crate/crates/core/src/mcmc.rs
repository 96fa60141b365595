//! Data model for the minimum-cost Markov chain problem: permissible states,
//! chains, the per-type hyperplanes `f_k`, their lower envelopes `g_k`, the
//! polytope height function `h`, and the exact quantities attached to a chain
//! (stationary distribution, cost, multi-typed intersection).

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rational::{format_rational, Rational};

/// One permissible state: a nonnegative reward and a transition distribution
/// over the `m` state types.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateSpec {
    reward: Rational,
    transitions: Vec<Rational>,
}

impl StateSpec {
    pub fn new(reward: Rational, transitions: Vec<Rational>) -> Result<Self> {
        if transitions.len() < 2 {
            return Err(Error::InvalidState(format!(
                "need at least 2 transition probabilities, got {}",
                transitions.len()
            )));
        }
        if reward.is_negative() {
            return Err(Error::InvalidState(format!(
                "reward {} is negative",
                format_rational(&reward)
            )));
        }
        if let Some(j) = transitions.iter().position(|q| q.is_negative()) {
            return Err(Error::InvalidState(format!("q_{j} is negative")));
        }
        let total: Rational = transitions.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidState(format!(
                "transition probabilities sum to {}, not 1",
                format_rational(&total)
            )));
        }
        if !transitions[0].is_positive() {
            return Err(Error::InvalidState("q_0 must be positive".into()));
        }
        Ok(StateSpec {
            reward,
            transitions,
        })
    }

    pub fn reward(&self) -> &Rational {
        &self.reward
    }

    pub fn transitions(&self) -> &[Rational] {
        &self.transitions
    }

    pub fn q(&self, j: usize) -> &Rational {
        &self.transitions[j]
    }

    /// Number of state types this state was built for.
    pub fn m(&self) -> usize {
        self.transitions.len()
    }
}

/// `m` finite, nonempty lists of permissible states, one list per type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemSpec {
    m: usize,
    state_sets: Vec<Vec<StateSpec>>,
}

impl ProblemSpec {
    pub fn new(state_sets: Vec<Vec<StateSpec>>) -> Result<Self> {
        let m = state_sets.len();
        if m < 2 {
            return Err(Error::InvalidProblem(format!(
                "m must be at least 2, got {m}"
            )));
        }
        for (k, set) in state_sets.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidProblem(format!("state set {k} is empty")));
            }
            if let Some(i) = set.iter().position(|s| s.m() != m) {
                return Err(Error::InvalidProblem(format!(
                    "state {i} of type {k} has {} transitions, expected {m}",
                    set[i].m()
                )));
            }
        }
        Ok(ProblemSpec { m, state_sets })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn states(&self, k: usize) -> &[StateSpec] {
        &self.state_sets[k]
    }

    pub fn state_sets(&self) -> &[Vec<StateSpec>] {
        &self.state_sets
    }

    /// `∏ |𝕊_k|`, saturating.
    pub fn chain_count(&self) -> u128 {
        self.state_sets
            .iter()
            .fold(1u128, |acc, set| acc.saturating_mul(set.len() as u128))
    }

    /// The default starting chain: index 0 of every type.
    pub fn first_chain(&self) -> ChainSelection {
        ChainSelection(vec![0; self.m])
    }

    pub fn resolve(&self, chain: &ChainSelection) -> Result<Vec<&StateSpec>> {
        if chain.0.len() != self.m {
            return Err(Error::InvalidChain(format!(
                "chain has {} entries, expected {}",
                chain.0.len(),
                self.m
            )));
        }
        chain
            .0
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                self.state_sets[k].get(i).ok_or_else(|| {
                    Error::InvalidChain(format!(
                        "index {i} out of range for type {k} ({} states)",
                        self.state_sets[k].len()
                    ))
                })
            })
            .collect()
    }

    /// `S(x)`: the envelope argmin of every type at `x`.
    pub fn envelope_chain(&self, x: &PointX) -> Result<ChainSelection> {
        (0..self.m)
            .map(|k| eval_envelope(k, x, self).map(|e| e.argmin))
            .collect::<Result<Vec<_>>>()
            .map(ChainSelection)
    }
}

/// Selects one state per type by index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChainSelection(pub Vec<usize>);

impl ChainSelection {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for ChainSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{idx}")?;
        }
        write!(f, "]")
    }
}

/// A point `x = (x_1, …, x_{m-1})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointX(pub Vec<Rational>);

impl PointX {
    pub fn zeros(dim: usize) -> Self {
        PointX(vec![Rational::zero(); dim])
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Coordinate `x_j` for `j ≥ 1`, with the convention `x_0 = 0`.
    pub fn weight(&self, j: usize) -> Rational {
        if j == 0 {
            Rational::zero()
        } else {
            self.0[j - 1].clone()
        }
    }

    /// Componentwise `self ⪯ other`.
    pub fn precedes(&self, other: &PointX) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for PointX {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", format_rational(c))?;
        }
        write!(f, "]")
    }
}

/// A point `(x, y)` of `Q^{m-1} × Q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LiftedPoint {
    pub x: PointX,
    pub y: Rational,
}

/// `g_k(x)` together with the state attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvelopeEval {
    pub value: Rational,
    pub argmin: usize,
}

/// `f_k(x, s) = ℓ(s) + Σ_{j≥1} q_j(s)·x_j − [k > 0]·x_k`.
pub fn eval_f(k: usize, x: &PointX, s: &StateSpec) -> Result<Rational> {
    let m = s.m();
    if x.dim() + 1 != m {
        return Err(Error::DimensionMismatch {
            expected: m - 1,
            got: x.dim(),
        });
    }
    if k >= m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: k,
        });
    }
    Ok(eval_f_unchecked(k, x, s))
}

pub(crate) fn eval_f_unchecked(k: usize, x: &PointX, s: &StateSpec) -> Rational {
    let mut value = s.reward.clone();
    for (q, xj) in s.transitions[1..].iter().zip(&x.0) {
        if !q.is_zero() {
            value += q * xj;
        }
    }
    if k > 0 {
        value -= &x.0[k - 1];
    }
    value
}

/// `g_k(x)`: the lower envelope of all type-`k` hyperplanes. Ties go to the
/// smallest list index.
pub fn eval_envelope(k: usize, x: &PointX, problem: &ProblemSpec) -> Result<EnvelopeEval> {
    if k >= problem.m {
        return Err(Error::DimensionMismatch {
            expected: problem.m,
            got: k,
        });
    }
    if x.dim() + 1 != problem.m {
        return Err(Error::DimensionMismatch {
            expected: problem.m - 1,
            got: x.dim(),
        });
    }
    let mut best: Option<EnvelopeEval> = None;
    for (i, s) in problem.state_sets[k].iter().enumerate() {
        let value = eval_f_unchecked(k, x, s);
        match &best {
            Some(b) if b.value <= value => {}
            _ => best = Some(EnvelopeEval { value, argmin: i }),
        }
    }
    Ok(best.expect("state sets are nonempty"))
}

/// `h(x) = min_k g_k(x)`.
pub fn eval_h(x: &PointX, problem: &ProblemSpec) -> Result<Rational> {
    let mut best: Option<Rational> = None;
    for k in 0..problem.m {
        let g = eval_envelope(k, x, problem)?.value;
        if best.as_ref().is_none_or(|b| g < *b) {
            best = Some(g);
        }
    }
    Ok(best.expect("m >= 2"))
}

fn check_chain(chain: &[&StateSpec]) -> Result<usize> {
    let m = chain.len();
    if m < 2 {
        return Err(Error::InvalidChain(format!(
            "chain needs at least 2 states, got {m}"
        )));
    }
    if let Some(k) = chain.iter().position(|s| s.m() != m) {
        return Err(Error::InvalidChain(format!(
            "state {k} has {} transitions, chain has {m} states",
            chain[k].m()
        )));
    }
    Ok(m)
}

/// The unique common point of the chain's `m` hyperplanes, obtained from the
/// `m × m` system `f_k(x, S_k) = y`.
pub fn multi_typed_intersection(chain: &[&StateSpec]) -> Result<LiftedPoint> {
    let m = check_chain(chain)?;
    // Unknowns (x_1..x_{m-1}, y); row k: Σ_j (q_j − δ_jk)·x_j − y = −ℓ_k.
    let mut a = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (k, s) in chain.iter().enumerate() {
        let mut row: Vec<Rational> = s.transitions[1..].to_vec();
        if k > 0 {
            row[k - 1] -= Rational::one();
        }
        row.push(-Rational::one());
        a.push(row);
        rhs.push(-s.reward.clone());
    }
    let mut sol = linalg::solve(a, rhs).ok_or_else(|| {
        Error::Singular("hyperplanes of a permissible chain must meet in one point".into())
    })?;
    let y = sol.pop().expect("m >= 2");
    Ok(LiftedPoint { x: PointX(sol), y })
}

/// Stationary distribution `π` with `πQ = π`, `Σπ = 1`.
pub fn stationary_distribution(chain: &[&StateSpec]) -> Result<Vec<Rational>> {
    let m = check_chain(chain)?;
    // Balance equations for j = 1..m-1 plus normalisation; the j = 0 balance
    // equation is implied by the others.
    let mut a = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for j in 1..m {
        let mut row: Vec<Rational> = chain.iter().map(|s| s.transitions[j].clone()).collect();
        row[j] -= Rational::one();
        a.push(row);
        rhs.push(Rational::zero());
    }
    a.push(vec![Rational::one(); m]);
    rhs.push(Rational::one());
    let pi = linalg::solve(a, rhs)
        .ok_or_else(|| Error::Singular("a chain with q_0 > 0 everywhere is a unichain".into()))?;
    if let Some(k) = pi.iter().position(|p| p.is_negative()) {
        return Err(Error::Invariant(format!(
            "stationary probability π_{k} is negative"
        )));
    }
    Ok(pi)
}

/// `cost(S) = Σ_k ℓ(S_k)·π_k(S)`.
pub fn chain_cost(chain: &[&StateSpec]) -> Result<Rational> {
    let pi = stationary_distribution(chain)?;
    Ok(chain.iter().zip(&pi).map(|(s, p)| &s.reward * p).sum())
}

/// Cone label of `u ∈ R^{m-1}`: 0 when `u ⪯ 0`, otherwise the smallest `k`
/// whose coordinate is positive and maximal.
pub fn classify_cone(u: &[Rational]) -> usize {
    let mut best: Option<(usize, &Rational)> = None;
    for (i, c) in u.iter().enumerate() {
        if !c.is_positive() {
            continue;
        }
        match best {
            Some((_, b)) if b.cmp(c) != Ordering::Less => {}
            _ => best = Some((i + 1, c)),
        }
    }
    best.map_or(0, |(k, _)| k)
}

/// Whether `u` lies in cone `C_k` (the closed-form membership test, independent
/// of the tie-break in [`classify_cone`]).
pub fn in_cone(k: usize, u: &[Rational]) -> bool {
    if k == 0 {
        return u.iter().all(|c| !c.is_positive());
    }
    let uk = &u[k - 1];
    uk.is_positive() && u.iter().all(|c| c <= uk)
}
