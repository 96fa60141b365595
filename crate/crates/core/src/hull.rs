//! Pruning affine functions that never attain a lower envelope.
//!
//! Each point `(q, ℓ)` stands for the affine function `x ↦ ℓ + q·x`. A
//! function contributes nothing to `min_j (ℓ_j + q_j·x)` over all `x` exactly
//! when `(q_i, ℓ_i)` lies in the convex hull of the other points shifted
//! upward, i.e. some convex combination of the others has the same `q` and no
//! larger `ℓ`. Candidates for removal are found with a floating-point LP; a
//! removal only happens once the combination has been rebuilt and checked in
//! exact arithmetic, so rounding can cost pruning but never correctness.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::linalg::solve_any;
use crate::rational::Rational;

const SUPPORT_EPS: f64 = 1e-9;
const OBJECTIVE_EPS: f64 = 1e-7;

/// Indices (ascending) of the points that must be kept so that the lower
/// envelope of the whole set is unchanged. Points must have pairwise distinct
/// `q`; all `q` share one dimension.
pub fn lower_hull_vertices(points: &[(Vec<Rational>, Rational)]) -> Vec<usize> {
    if points.len() <= 1 {
        return (0..points.len()).collect();
    }
    let approx: Vec<(Vec<f64>, f64)> = points
        .iter()
        .map(|(q, l)| (q.iter().map(to_f64).collect(), to_f64(l)))
        .collect();
    (0..points.len())
        .into_par_iter()
        .filter(|&i| !is_redundant(i, points, &approx))
        .collect()
}

fn to_f64(v: &Rational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

fn is_redundant(
    i: usize,
    points: &[(Vec<Rational>, Rational)],
    approx: &[(Vec<f64>, f64)],
) -> bool {
    let dim = approx[i].0.len();
    let others: Vec<usize> = (0..points.len()).filter(|&j| j != i).collect();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = others
        .iter()
        .map(|&j| lp.add_var(approx[j].1, (0.0, f64::INFINITY)))
        .collect();
    for t in 0..dim {
        let expr: Vec<_> = vars
            .iter()
            .zip(&others)
            .map(|(&v, &j)| (v, approx[j].0[t]))
            .collect();
        lp.add_constraint(expr, ComparisonOp::Eq, approx[i].0[t]);
    }
    lp.add_constraint(
        vars.iter().map(|&v| (v, 1.0)).collect::<Vec<_>>(),
        ComparisonOp::Eq,
        1.0,
    );
    let Ok(solution) = lp.solve() else {
        return false;
    };
    if solution.objective() > approx[i].1 + OBJECTIVE_EPS {
        return false;
    }
    let support: Vec<usize> = vars
        .iter()
        .zip(&others)
        .filter(|(&v, _)| *solution.var_value(v) > SUPPORT_EPS)
        .map(|(_, &j)| j)
        .collect();
    certify(i, &support, points)
}

/// Exact check that some convex combination of `support` matches point `i`
/// in `q` with `ℓ` no larger.
fn certify(i: usize, support: &[usize], points: &[(Vec<Rational>, Rational)]) -> bool {
    if support.is_empty() {
        return false;
    }
    let dim = points[i].0.len();
    let mut a = Vec::with_capacity(dim + 1);
    let mut rhs = Vec::with_capacity(dim + 1);
    for t in 0..dim {
        a.push(support.iter().map(|&j| points[j].0[t].clone()).collect());
        rhs.push(points[i].0[t].clone());
    }
    a.push(vec![Rational::from_integer(1.into()); support.len()]);
    rhs.push(Rational::from_integer(1.into()));
    let Some(lambda) = solve_any(a, rhs) else {
        return false;
    };
    if lambda.iter().any(|l| l < &Rational::zero()) {
        return false;
    }
    let combined: Rational = lambda
        .iter()
        .zip(support)
        .map(|(l, &j)| l * &points[j].1)
        .sum();
    combined <= points[i].1
}
