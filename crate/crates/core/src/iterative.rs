//! Fastest-descent iteration over multi-typed intersection points.
//!
//! Starting from any permissible chain, repeatedly replace the chain by the
//! envelope argmins `S(p)` at the projection `p` of its intersection point
//! until `p` stops moving. Costs never increase, a plateau only moves `p`
//! down componentwise, and the loop stops after at most `∏|𝕊_k| + 1`
//! rounds; these facts are checked on every run.

use crate::error::{Error, Result};
use crate::mcmc::{
    eval_envelope, multi_typed_intersection, ChainSelection, LiftedPoint, PointX, ProblemSpec,
};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub chain: ChainSelection,
    pub p: PointX,
    pub c: Rational,
}

/// The sequence `(S_i, p_i, c_i)` visited by the descent, starting with the
/// user-supplied chain at index 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IterationTrace {
    pub steps: Vec<TraceStep>,
}

impl IterationTrace {
    /// Number of descent rounds (steps after the starting one).
    pub fn iterations(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    /// Checks cost monotonicity, plateau monotonicity and the fixed-point
    /// ending. Returns the first violation found.
    pub fn check_invariants(&self) -> Result<()> {
        for (i, pair) in self.steps.windows(2).enumerate() {
            let (prev, cur) = (&pair[0], &pair[1]);
            if cur.c > prev.c {
                return Err(Error::Invariant(format!(
                    "cost increased at step {}: {} -> {}",
                    i + 1,
                    format_rational(&prev.c),
                    format_rational(&cur.c)
                )));
            }
            if cur.c == prev.c && !cur.p.precedes(&prev.p) {
                return Err(Error::Invariant(format!(
                    "plateau at step {} moved p from {} to {}, not componentwise down",
                    i + 1,
                    prev.p,
                    cur.p
                )));
            }
        }
        match self.steps.as_slice() {
            [.., a, b] if a.p == b.p => Ok(()),
            [_] | [] => Err(Error::Invariant("trace never reached a fixed point".into())),
            _ => Err(Error::Invariant("final two steps differ in p".into())),
        }
    }

    /// CSV rendering: `step,c,x1,...` with exact `num/den` fields.
    pub fn to_csv(&self) -> String {
        let dim = self.steps.first().map_or(0, |s| s.p.dim());
        let mut out = String::from("step,c");
        for j in 1..=dim {
            out.push_str(&format!(",x{j}"));
        }
        out.push_str(",chain\n");
        for (i, s) in self.steps.iter().enumerate() {
            out.push_str(&format!("{i},{}", format_rational(&s.c)));
            for c in s.p.coords() {
                out.push(',');
                out.push_str(&format_rational(c));
            }
            let chain: Vec<String> = s.chain.0.iter().map(ToString::to_string).collect();
            out.push_str(&format!(",{}\n", chain.join(" ")));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub chain: ChainSelection,
    pub point: LiftedPoint,
    pub trace: IterationTrace,
}

/// Runs the descent from `start` and certifies the fixed point it reaches:
/// every envelope passes through the returned point, so the chain is optimal.
pub fn solve_iterative(problem: &ProblemSpec, start: &ChainSelection) -> Result<SolveResult> {
    let first = multi_typed_intersection(&problem.resolve(start)?)?;
    let cap = problem.chain_count().saturating_add(1);
    let mut trace = IterationTrace {
        steps: vec![TraceStep {
            chain: start.clone(),
            p: first.x,
            c: first.y,
        }],
    };
    loop {
        if trace.iterations() as u128 >= cap {
            return Err(Error::IterationCap(format!(
                "descent still moving after {cap} rounds"
            )));
        }
        let prev = trace.steps.last().expect("trace starts nonempty");
        let chain = problem.envelope_chain(&prev.p)?;
        let point = multi_typed_intersection(&problem.resolve(&chain)?)?;
        let done = point.x == prev.p;
        trace.steps.push(TraceStep {
            chain,
            p: point.x,
            c: point.y,
        });
        if done {
            break;
        }
    }
    trace.check_invariants()?;
    let last = trace.steps.last().expect("nonempty").clone();
    for k in 0..problem.m() {
        let g = eval_envelope(k, &last.p, problem)?.value;
        if g != last.c {
            return Err(Error::Invariant(format!(
                "fixed point {} is not on envelope {k}: g = {}, y = {}",
                last.p,
                format_rational(&g),
                format_rational(&last.c)
            )));
        }
    }
    Ok(SolveResult {
        chain: last.chain,
        point: LiftedPoint {
            x: last.p,
            y: last.c,
        },
        trace,
    })
}

/// Solves from the default start and from every chain in `extra_starts`,
/// demanding the same fixed point each time.
pub fn solve_and_certify_with(
    problem: &ProblemSpec,
    extra_starts: &[ChainSelection],
) -> Result<SolveResult> {
    let base = solve_iterative(problem, &problem.first_chain())?;
    for start in extra_starts {
        let other = solve_iterative(problem, start)?;
        if other.point != base.point {
            return Err(Error::Invariant(format!(
                "start {start} reached ({}, {}) but the default start reached ({}, {})",
                other.point.x,
                format_rational(&other.point.y),
                base.point.x,
                format_rational(&base.point.y)
            )));
        }
    }
    Ok(base)
}

/// [`solve_and_certify_with`] using the last state of every type as the second
/// start.
pub fn solve_and_certify(problem: &ProblemSpec) -> Result<SolveResult> {
    let last = ChainSelection(problem.state_sets().iter().map(|s| s.len() - 1).collect());
    solve_and_certify_with(problem, &[last])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcmc::StateSpec;
    use crate::rational::{int, rat};

    fn st(reward: Rational, q: &[Rational]) -> StateSpec {
        StateSpec::new(reward, q.to_vec()).unwrap()
    }

    fn four_chain() -> ProblemSpec {
        ProblemSpec::new(vec![
            vec![
                st(int(1), &[rat(1, 2), rat(1, 2)]),
                st(rat(3, 4), &[rat(1, 4), rat(3, 4)]),
            ],
            vec![
                st(int(2), &[int(1), int(0)]),
                st(rat(3, 2), &[rat(1, 2), rat(1, 2)]),
            ],
        ])
        .unwrap()
    }

    #[test]
    fn four_chain_from_every_start() {
        let p = four_chain();
        for a in 0..2 {
            for b in 0..2 {
                let r = solve_iterative(&p, &ChainSelection(vec![a, b])).unwrap();
                assert_eq!(r.chain, ChainSelection(vec![1, 1]));
                assert_eq!(r.point.x, PointX(vec![rat(3, 5)]));
                assert_eq!(r.point.y, rat(6, 5));
                assert!(r.trace.iterations() as u128 <= p.chain_count() + 1);
            }
        }
    }

    #[test]
    fn optimal_start_is_fixed_immediately() {
        let p = four_chain();
        let r = solve_iterative(&p, &ChainSelection(vec![1, 1])).unwrap();
        assert_eq!(r.trace.steps.len(), 2);
        assert_eq!(r.trace.steps[0].p, r.trace.steps[1].p);
    }

    #[test]
    fn single_chain_problem() {
        let p = ProblemSpec::new(vec![
            vec![st(int(1), &[rat(1, 2), rat(1, 2)])],
            vec![st(int(2), &[int(1), int(0)])],
        ])
        .unwrap();
        let r = solve_and_certify(&p).unwrap();
        assert_eq!(r.chain, ChainSelection(vec![0, 0]));
        assert!(r.trace.iterations() <= 2);
        assert_eq!(r.point.y, rat(4, 3));
    }

    #[test]
    fn certify_across_starts() {
        let p = four_chain();
        let r = solve_and_certify_with(
            &p,
            &[ChainSelection(vec![0, 0]), ChainSelection(vec![1, 0])],
        )
        .unwrap();
        assert_eq!(r.point.x, PointX(vec![rat(3, 5)]));
        assert_eq!(r.point.y, rat(6, 5));
    }

    #[test]
    fn invalid_start_rejected() {
        let p = four_chain();
        let err = solve_iterative(&p, &ChainSelection(vec![0, 2])).unwrap_err();
        assert_eq!(err.kind(), crate::ErrorKind::Input);
    }

    #[test]
    fn trace_invariant_checker_catches_violations() {
        let step = |c: Rational, x: Rational| TraceStep {
            chain: ChainSelection(vec![0, 0]),
            p: PointX(vec![x]),
            c,
        };
        let rising = IterationTrace {
            steps: vec![step(int(1), int(0)), step(int(2), int(0))],
        };
        assert!(rising.check_invariants().is_err());
        let plateau_up = IterationTrace {
            steps: vec![
                step(int(1), int(0)),
                step(int(1), int(1)),
                step(int(1), int(1)),
            ],
        };
        assert!(plateau_up.check_invariants().is_err());
        let unfinished = IterationTrace {
            steps: vec![step(int(2), int(0)), step(int(1), int(1))],
        };
        assert!(unfinished.check_invariants().is_err());
        let good = IterationTrace {
            steps: vec![
                step(int(2), int(0)),
                step(int(1), int(1)),
                step(int(1), int(1)),
            ],
        };
        assert!(good.check_invariants().is_ok());
    }

    #[test]
    fn trace_csv_uses_exact_fractions() {
        let p = four_chain();
        let r = solve_iterative(&p, &ChainSelection(vec![0, 0])).unwrap();
        let csv = r.trace.to_csv();
        assert!(csv.starts_with("step,c,x1,chain\n0,4/3,2/3,0 0\n"));
        assert!(csv.trim_end().ends_with("6/5,3/5,1 1"));
    }
}
