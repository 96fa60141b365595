//! Binary search for the optimum of a three-type problem.
//!
//! On the slice `x_1 = λ`, every type-0 plane restricts to a line of slope
//! `q_2 ≥ 0` and every type-2 plane to one of slope `q_2 − 1 < 0`, so `g_0` and
//! `g_2` cross exactly once. That crossing is `E_1(λ)`; its projection
//! `E_1'(λ) = (λ, x_2)` traces a curve along which `g_0 − g_1` changes sign
//! exactly at the optimum, which the outer search brackets in `x_1`. The
//! planes that are envelope-minimal near the bracket then pin the optimum
//! down exactly.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::solve;
use crate::mcmc::{
    eval_envelope, eval_f, ChainSelection, LiftedPoint, PointX, ProblemSpec, StateSpec,
};
use crate::rational::{dyadic_bits, format_rational, pow2_neg, Rational};

/// Bit precision of the search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecisionConfig {
    pub b: u32,
    pub b_prime: u32,
    pub epsilon0: Rational,
}

impl PrecisionConfig {
    /// `b' = 14b + 18`.
    pub fn new(b: u32) -> Result<Self> {
        Self::with_b_prime(b, 14 * b + 18)
    }

    pub fn with_b_prime(b: u32, b_prime: u32) -> Result<Self> {
        if b == 0 {
            return Err(Error::InvalidProblem(
                "bit precision b must be at least 1".into(),
            ));
        }
        if b_prime < b {
            return Err(Error::InvalidProblem(format!(
                "b' = {b_prime} is below b = {b}"
            )));
        }
        Ok(PrecisionConfig {
            b,
            b_prime,
            epsilon0: pow2_neg(b_prime),
        })
    }

    /// Default config for the smallest `b` under which every reward and
    /// transition of `problem` is a multiple of `2^-b`.
    pub fn for_problem(problem: &ProblemSpec) -> Result<Self> {
        let mut b = 1;
        for states in problem.state_sets() {
            for s in states {
                for v in std::iter::once(s.reward()).chain(s.transitions()) {
                    let bits = dyadic_bits(v).ok_or_else(|| {
                        Error::InvalidProblem(format!("{} is not dyadic", format_rational(v)))
                    })?;
                    b = b.max(bits);
                }
            }
        }
        Self::new(b)
    }
}

/// `E_1(λ)`: the point `(λ, x2)` where `g_0` and `g_2` cross, at height `y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlicePoint {
    pub lambda: Rational,
    pub x2: Rational,
    pub y: Rational,
}

impl SlicePoint {
    pub fn projection(&self) -> PointX {
        PointX(vec![self.lambda.clone(), self.x2.clone()])
    }
}

fn require_three_types(problem: &ProblemSpec) -> Result<()> {
    if problem.m() != 3 {
        return Err(Error::Precondition(format!(
            "slice search requires m=3, got m={}",
            problem.m()
        )));
    }
    Ok(())
}

fn at(lambda: &Rational, x2: &Rational) -> PointX {
    PointX(vec![lambda.clone(), x2.clone()])
}

/// `(intercept, slope)` of `f_k((λ, ·), s)`.
fn restrict(k: usize, lambda: &Rational, s: &StateSpec) -> (Rational, Rational) {
    let mut intercept = s.reward() + s.q(1) * lambda;
    let mut slope = s.q(2).clone();
    match k {
        1 => intercept -= lambda,
        2 => slope -= Rational::one(),
        _ => {}
    }
    (intercept, slope)
}

/// [`eval_e1_in`] on the interval `[0, 1]`.
pub fn eval_e1(
    lambda: &Rational,
    problem: &ProblemSpec,
    cfg: &PrecisionConfig,
) -> Result<SlicePoint> {
    eval_e1_in(lambda, problem, cfg, &Rational::zero(), &Rational::one())
}

/// The crossing of `g_0` and `g_2` on the slice `x_1 = λ` inside `[lo, hi]`.
///
/// Halves the bracket on dyadic midpoints. After each step the lines that
/// are minimal at either end of the bracket are intersected pairwise, and a
/// candidate is accepted as soon as both envelopes agree at it exactly.
pub fn eval_e1_in(
    lambda: &Rational,
    problem: &ProblemSpec,
    cfg: &PrecisionConfig,
    lo: &Rational,
    hi: &Rational,
) -> Result<SlicePoint> {
    require_three_types(problem)?;
    if lo > hi {
        return Err(Error::Precondition(format!(
            "empty search interval [{}, {}]",
            format_rational(lo),
            format_rational(hi)
        )));
    }
    let diff = |x2: &Rational| -> Result<(Rational, Rational, usize, usize)> {
        let p = at(lambda, x2);
        let g0 = eval_envelope(0, &p, problem)?;
        let g2 = eval_envelope(2, &p, problem)?;
        Ok((&g0.value - &g2.value, g0.value, g0.argmin, g2.argmin))
    };
    let (mut l, mut r) = (lo.clone(), hi.clone());
    let (dl, yl, mut l0, mut l2) = diff(&l)?;
    let (dr, _, mut r0, mut r2) = diff(&r)?;
    if dl > Rational::zero() || dr < Rational::zero() {
        return Err(Error::NoSliceCrossing(format!(
            "no slice crossing in interval [{}, {}] at x1 = {}: g0 - g2 is {} and {} at the ends",
            format_rational(lo),
            format_rational(hi),
            format_rational(lambda),
            format_rational(&dl),
            format_rational(&dr)
        )));
    }
    if dl.is_zero() {
        return Ok(SlicePoint {
            lambda: lambda.clone(),
            x2: l,
            y: yl,
        });
    }
    let cap = 2 * cfg.b_prime as usize + 128;
    for _ in 0..cap {
        let mut candidates: Vec<Rational> = Vec::with_capacity(4);
        for &i0 in &[l0, r0] {
            for &i2 in &[l2, r2] {
                let (a0, s0) = restrict(0, lambda, &problem.states(0)[i0]);
                let (a2, s2) = restrict(2, lambda, &problem.states(2)[i2]);
                // s0 - s2 > 0 whenever q_0 > 0
                let x2 = (&a2 - &a0) / (&s0 - &s2);
                if x2 >= l && x2 <= r && !candidates.contains(&x2) {
                    candidates.push(x2);
                }
            }
        }
        for x2 in candidates {
            let (d, y, _, _) = diff(&x2)?;
            if d.is_zero() {
                return Ok(SlicePoint {
                    lambda: lambda.clone(),
                    x2,
                    y,
                });
            }
        }
        let mid = (&l + &r) / Rational::from_integer(2.into());
        let (d, y, m0, m2) = diff(&mid)?;
        if d.is_zero() {
            return Ok(SlicePoint {
                lambda: lambda.clone(),
                x2: mid,
                y,
            });
        }
        if d < Rational::zero() {
            l = mid;
            (l0, l2) = (m0, m2);
        } else {
            r = mid;
            (r0, r2) = (m0, m2);
        }
    }
    Err(Error::IterationCap(format!(
        "slice crossing at x1 = {} not certified after {cap} halvings",
        format_rational(lambda)
    )))
}

/// One round of the outer search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceStep {
    pub iteration: usize,
    pub l: Rational,
    pub r: Rational,
    pub e0: Rational,
    pub e1: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceSearchResult {
    pub chain: ChainSelection,
    pub point: LiftedPoint,
    /// Left end of the final bracket.
    pub x1_prime: Rational,
    pub steps: Vec<SliceStep>,
}

impl SliceSearchResult {
    /// `iteration,l,r,e0,e1` with exact fractions.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,l,r,e0,e1\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.iteration,
                format_rational(&s.l),
                format_rational(&s.r),
                format_rational(&s.e0),
                format_rational(&s.e1)
            ));
        }
        out
    }
}

/// Brackets `x_1*` to width `ε_0`, then recovers the exact optimum from the
/// planes minimal at `E_1'(l)`.
pub fn solve_slice_search(
    problem: &ProblemSpec,
    cfg: &PrecisionConfig,
) -> Result<SliceSearchResult> {
    require_three_types(problem)?;
    let e = |lambda: &Rational| -> Result<(PointX, Rational, Rational)> {
        let p = eval_e1(lambda, problem, cfg)?.projection();
        let e0 = eval_envelope(0, &p, problem)?.value;
        let e1 = eval_envelope(1, &p, problem)?.value;
        Ok((p, e0, e1))
    };
    let (mut l, mut r) = (Rational::zero(), Rational::one());
    let (_, e0, e1) = e(&l)?;
    if e0 > e1 {
        return Err(Error::Precondition(format!(
            "boundary sign fails at x1 = 0: g0 - g1 = {}",
            format_rational(&(&e0 - &e1))
        )));
    }
    let (_, e0r, e1r) = e(&r)?;
    if e0r < e1r {
        return Err(Error::Precondition(format!(
            "boundary sign fails at x1 = 1: g0 - g1 = {}",
            format_rational(&(&e0r - &e1r))
        )));
    }
    let mut steps = Vec::new();
    let two = Rational::from_integer(2.into());
    while &r - &l > cfg.epsilon0 {
        let mid = (&l + &r) / &two;
        let (_, e0, e1) = e(&mid)?;
        if e0 < e1 {
            l = mid;
        } else {
            r = mid;
        }
        steps.push(SliceStep {
            iteration: steps.len() + 1,
            l: l.clone(),
            r: r.clone(),
            e0,
            e1,
        });
    }
    let (p, _, _) = e(&l)?;
    let (chain, point) = snap_from(&p, problem)?;
    Ok(SliceSearchResult {
        chain,
        point,
        x1_prime: l,
        steps,
    })
}

/// Tries every combination of envelope-minimal planes at `p`; ties at `p`
/// make the minimiser a set, and any member may be the plane through `x*`.
fn snap_from(p: &PointX, problem: &ProblemSpec) -> Result<(ChainSelection, LiftedPoint)> {
    let mut minimal: Vec<Vec<usize>> = Vec::with_capacity(3);
    for k in 0..3 {
        let g = eval_envelope(k, p, problem)?.value;
        let mut idx = Vec::new();
        for (i, s) in problem.states(k).iter().enumerate() {
            if eval_f(k, p, s)? == g {
                idx.push(i);
            }
        }
        minimal.push(idx);
    }
    let mut last_err = None;
    for &i0 in &minimal[0] {
        for &i1 in &minimal[1] {
            for &i2 in &minimal[2] {
                let chain = [i0, i1, i2];
                let states: Vec<&StateSpec> =
                    (0..3).map(|k| &problem.states(k)[chain[k]]).collect();
                match snap_to_exact(states[0], states[1], states[2], problem) {
                    Ok(point) => return Ok((ChainSelection(chain.to_vec()), point)),
                    Err(e) => last_err = Some(e),
                }
            }
        }
    }
    Err(last_err.expect("every envelope has a minimiser"))
}

/// Solves the three planes `f_k(x, t_k) = y` for their common point and
/// certifies that each plane is envelope-minimal there.
pub fn snap_to_exact(
    t0: &StateSpec,
    t1: &StateSpec,
    t2: &StateSpec,
    problem: &ProblemSpec,
) -> Result<LiftedPoint> {
    require_three_types(problem)?;
    let states = [t0, t1, t2];
    if let Some(k) = states.iter().position(|s| s.m() != 3) {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: states[k].m(),
        });
    }
    // Unknowns (y, x1, x2): y - q1 x1 - q2 x2 + [k=1] x1 + [k=2] x2 = ℓ.
    let mut a = Vec::with_capacity(3);
    let mut rhs = Vec::with_capacity(3);
    for (k, s) in states.iter().enumerate() {
        let mut c1 = -s.q(1).clone();
        let mut c2 = -s.q(2).clone();
        if k == 1 {
            c1 += Rational::one();
        }
        if k == 2 {
            c2 += Rational::one();
        }
        a.push(vec![Rational::one(), c1, c2]);
        rhs.push(s.reward().clone());
    }
    let sol = solve(a, rhs).ok_or_else(|| Error::Singular("snap system is singular".into()))?;
    let point = LiftedPoint {
        x: PointX(vec![sol[1].clone(), sol[2].clone()]),
        y: sol[0].clone(),
    };
    for (k, s) in states.iter().enumerate() {
        let g = eval_envelope(k, &point.x, problem)?.value;
        let f = eval_f(k, &point.x, s)?;
        if g != f || f != point.y {
            return Err(Error::SnapRejected(format!(
                "at x = {} the type-{k} plane gives {} but g_{k} = {} (y = {})",
                point.x,
                format_rational(&f),
                format_rational(&g),
                format_rational(&point.y)
            )));
        }
    }
    Ok(point)
}

/// A sampled boundary point where the expected sign fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryViolation {
    pub x: PointX,
    pub k: usize,
    /// `0` or `1`: the fixed value of `x_k`.
    pub edge: u8,
    /// `g_0 − g_k` at `x_k = 0`, `g_k − g_0` at `x_k = 1`; positive here.
    pub excess: Rational,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundaryReport {
    pub checked: usize,
    pub violations: Vec<BoundaryViolation>,
    pub skipped: Option<String>,
}

impl BoundaryReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples each edge of the unit square (`samples ≥ 2` evenly spaced points,
/// endpoints included) and checks `g_0 − g_k ≤ 0` where `x_k = 0` and
/// `g_k − g_0 ≤ 0` where `x_k = 1`, for `k ∈ {1, 2}`.
pub fn boundary_sign_check(problem: &ProblemSpec, samples: usize) -> Result<BoundaryReport> {
    require_three_types(problem)?;
    let samples = samples.max(2);
    let mut report = BoundaryReport::default();
    for k in 1..3 {
        for edge in 0..2u8 {
            for i in 0..samples {
                let t = Rational::new((i as i64).into(), ((samples - 1) as i64).into());
                let fixed = Rational::from_integer(edge.into());
                let x = if k == 1 {
                    at(&fixed, &t)
                } else {
                    at(&t, &fixed)
                };
                let g0 = eval_envelope(0, &x, problem)?.value;
                let gk = eval_envelope(k, &x, problem)?.value;
                let excess = if edge == 0 { &g0 - &gk } else { &gk - &g0 };
                report.checked += 1;
                if excess > Rational::zero() {
                    report
                        .violations
                        .push(BoundaryViolation { x, k, edge, excess });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iterative::solve_and_certify;
    use crate::rational::{int, rat};

    fn st(l: Rational, q: [Rational; 3]) -> StateSpec {
        StateSpec::new(l, q.to_vec()).unwrap()
    }

    /// Type-0 lines `1 + x2/2`, `5/4 + x2/4`; type-2 lines `2 − x2`,
    /// `9/5 − x2/2` on the slice `x1 = 0`.
    fn synthetic() -> ProblemSpec {
        let t0 = vec![
            st(int(1), [rat(1, 2), int(0), rat(1, 2)]),
            st(rat(5, 4), [rat(3, 4), int(0), rat(1, 4)]),
        ];
        let t1 = vec![st(int(5), [int(1), int(0), int(0)])];
        let t2 = vec![
            st(int(2), [int(1), int(0), int(0)]),
            st(rat(9, 5), [rat(1, 2), int(0), rat(1, 2)]),
        ];
        ProblemSpec::new(vec![t0, t1, t2]).unwrap()
    }

    #[test]
    fn config_defaults() {
        let c = PrecisionConfig::new(3).unwrap();
        assert_eq!(c.b_prime, 60);
        assert_eq!(c.epsilon0, pow2_neg(60));
        assert!(PrecisionConfig::new(0).is_err());
        assert!(PrecisionConfig::with_b_prime(5, 4).is_err());
    }

    #[test]
    fn synthetic_slice_crossing() {
        let p = synthetic();
        let cfg = PrecisionConfig::new(4).unwrap();
        let e = eval_e1(&int(0), &p, &cfg).unwrap();
        assert_eq!(e.x2, rat(2, 3));
        assert_eq!(e.y, rat(4, 3));
    }

    #[test]
    fn single_lines_cross_at_half() {
        let t0 = vec![st(int(1), [int(1), int(0), int(0)])];
        let t1 = vec![st(int(1), [int(1), int(0), int(0)])];
        let t2 = vec![st(rat(3, 2), [int(1), int(0), int(0)])];
        let p = ProblemSpec::new(vec![t0, t1, t2]).unwrap();
        let e = eval_e1(&rat(1, 4), &p, &PrecisionConfig::new(1).unwrap()).unwrap();
        assert_eq!((e.x2, e.y), (rat(1, 2), int(1)));
    }

    #[test]
    fn missing_crossing_is_reported() {
        let t0 = vec![st(int(3), [int(1), int(0), int(0)])];
        let t1 = vec![st(int(1), [int(1), int(0), int(0)])];
        let t2 = vec![st(int(1), [int(1), int(0), int(0)])];
        let p = ProblemSpec::new(vec![t0, t1, t2]).unwrap();
        let err = eval_e1(&int(0), &p, &PrecisionConfig::new(1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NoSliceCrossing(_)));
    }

    #[test]
    fn snap_with_unit_q0() {
        let s = |l| st(l, [int(1), int(0), int(0)]);
        let p = ProblemSpec::new(vec![vec![s(int(2))], vec![s(int(2))], vec![s(int(2))]]).unwrap();
        let pt = snap_to_exact(&p.states(0)[0], &p.states(1)[0], &p.states(2)[0], &p).unwrap();
        assert_eq!(pt.x, PointX(vec![int(0), int(0)]));
        assert_eq!(pt.y, int(2));
    }

    #[test]
    fn snap_rejects_non_minimal_planes() {
        let s = |l| st(l, [int(1), int(0), int(0)]);
        let p = ProblemSpec::new(vec![
            vec![s(int(2)), s(int(1))],
            vec![s(int(2))],
            vec![s(int(2))],
        ])
        .unwrap();
        let err = snap_to_exact(&p.states(0)[0], &p.states(1)[0], &p.states(2)[0], &p).unwrap_err();
        assert!(matches!(err, Error::SnapRejected(_)));
    }

    #[test]
    fn search_matches_iterative_on_symmetric_problem() {
        let t0 = vec![
            st(int(1), [rat(1, 2), rat(1, 4), rat(1, 4)]),
            st(rat(3, 2), [int(1), int(0), int(0)]),
        ];
        let t1 = vec![
            st(rat(3, 2), [rat(1, 2), rat(1, 4), rat(1, 4)]),
            st(int(2), [int(1), int(0), int(0)]),
        ];
        let t2 = vec![
            st(rat(3, 2), [rat(1, 2), rat(1, 4), rat(1, 4)]),
            st(int(2), [int(1), int(0), int(0)]),
        ];
        let p = ProblemSpec::new(vec![t0, t1, t2]).unwrap();
        let cfg = PrecisionConfig::for_problem(&p).unwrap();
        let iter = solve_and_certify(&p).unwrap();
        let s = solve_slice_search(&p, &cfg).unwrap();
        assert_eq!(s.point, iter.point);
        assert!((&iter.point.x.0[0] - &s.x1_prime) <= cfg.epsilon0);
        assert_eq!(s.steps.len() as u32, cfg.b_prime);
        assert!(s.trace_csv().starts_with("iteration,l,r,e0,e1\n1,"));
    }

    #[test]
    fn wrong_m_is_rejected() {
        let s = StateSpec::new(int(1), vec![int(1), int(0)]).unwrap();
        let p = ProblemSpec::new(vec![vec![s.clone()], vec![s]]).unwrap();
        assert!(matches!(
            solve_slice_search(&p, &PrecisionConfig::new(1).unwrap()),
            Err(Error::Precondition(_))
        ));
    }
}
