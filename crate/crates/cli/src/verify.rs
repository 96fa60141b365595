//! Randomised and exhaustive property suites behind `aifv verify`.

use aifv_mcmc::aifv::AifvCode;
use aifv_mcmc::mcmc::in_cone;
use aifv_mcmc::oracle::exhaustive_roundtrip;
use aifv_mcmc::rational::format_rational;
use aifv_mcmc::slice::boundary_sign_check;
use aifv_mcmc::{classify_cone, eval_f, PointX, ProblemSpec, Rational};
use rand::rngs::StdRng;
use rand::Rng;

pub enum Outcome {
    Pass(String),
    Fail(String),
    Skipped(String),
}

impl Outcome {
    pub fn failed(&self) -> bool {
        matches!(self, Outcome::Fail(_))
    }

    pub fn line(&self, suite: &str) -> String {
        match self {
            Outcome::Pass(s) => format!("{suite}: pass ({s})"),
            Outcome::Fail(s) => format!("{suite}: FAIL {s}"),
            Outcome::Skipped(s) => format!("{suite}: skipped ({s})"),
        }
    }
}

fn small(rng: &mut StdRng, lo: i64, hi: i64) -> Rational {
    Rational::new(rng.gen_range(lo * 8..=hi * 8).into(), 8.into())
}

/// A random direction in cone `C_k`: `d ⪯ 0` for `k = 0`; otherwise `d_k > 0`,
/// no coordinate above `d_k`, and every earlier coordinate strictly below it.
pub fn random_cone_direction(rng: &mut StdRng, k: usize, dim: usize) -> Vec<Rational> {
    if k == 0 {
        return (0..dim).map(|_| -small(rng, 0, 2)).collect();
    }
    let top = Rational::new(rng.gen_range(1..=16i64).into(), 8.into());
    (0..dim)
        .map(|j| {
            if j + 1 == k {
                top.clone()
            } else {
                let below: Rational = small(rng, 0, 3);
                let d = &top - below;
                if j + 1 < k && d == top {
                    &top - Rational::new(1.into(), 8.into())
                } else {
                    d
                }
            }
        })
        .collect()
}

pub fn lemma4(problem: &ProblemSpec, rng: &mut StdRng, cases: usize) -> Outcome {
    let m = problem.m();
    for _ in 0..cases {
        let i = rng.gen_range(0..m);
        let s = &problem.states(i)[rng.gen_range(0..problem.states(i).len())];
        let u = PointX((0..m - 1).map(|_| small(rng, -2, 2)).collect());
        let d = random_cone_direction(rng, i, m - 1);
        let v = PointX(u.0.iter().zip(&d).map(|(a, b)| a + b).collect());
        let fu = eval_f(i, &u, s).expect("dimensions match");
        let fv = eval_f(i, &v, s).expect("dimensions match");
        let ok = if i == 0 { fv <= fu } else { fv < fu };
        if !ok || classify_cone(&d) != i {
            return Outcome::Fail(format!(
                "i={i} u={u} v={v}: f_i(u)={} f_i(v)={}",
                format_rational(&fu),
                format_rational(&fv)
            ));
        }
    }
    Outcome::Pass(format!("{cases} cases"))
}

/// The closed cones cover `Q^{m-1}`, `C_0` meets no other cone, and
/// [`classify_cone`] names the first cone containing the vector.
pub fn cones(dim: usize, rng: &mut StdRng, cases: usize) -> Outcome {
    for _ in 0..cases {
        // coarse values so that ties and zeros are common
        let u: Vec<Rational> = (0..dim)
            .map(|_| Rational::from_integer(rng.gen_range(-2..=2i64).into()))
            .collect();
        let k = classify_cone(&u);
        let members: Vec<usize> = (0..=dim).filter(|&j| in_cone(j, &u)).collect();
        let ok = members.first() == Some(&k) && (k != 0 || members.len() == 1);
        if !ok {
            let shown: Vec<String> = u.iter().map(format_rational).collect();
            return Outcome::Fail(format!(
                "u=[{}] classified {k}, member of {members:?}",
                shown.join(",")
            ));
        }
    }
    Outcome::Pass(format!("{cases} cases"))
}

pub fn boundary(problem: &ProblemSpec, symbols: Option<usize>, samples: usize) -> Outcome {
    if problem.m() != 3 {
        return Outcome::Skipped("boundary signs are defined for m=3".into());
    }
    if let Some(n) = symbols {
        if n < 7 {
            eprintln!("warning: boundary signs are only guaranteed for n >= 7 symbols, got {n}");
            return Outcome::Skipped(format!("n={n} < 7"));
        }
    }
    match boundary_sign_check(problem, samples) {
        Ok(r) if r.passed() => Outcome::Pass(format!("{} points", r.checked)),
        Ok(r) => {
            let v = &r.violations[0];
            Outcome::Fail(format!(
                "{} of {} points; first at x={} (k={}, x_k={}) by {}",
                r.violations.len(),
                r.checked,
                v.x,
                v.k,
                v.edge,
                format_rational(&v.excess)
            ))
        }
        Err(e) => Outcome::Fail(e.to_string()),
    }
}

pub fn roundtrip(code: Option<&AifvCode>, max_len: usize) -> Outcome {
    let Some(code) = code else {
        return Outcome::Skipped("no code given".into());
    };
    match exhaustive_roundtrip(code, max_len, 50_000_000) {
        Ok(r) => match r.counterexample {
            None => Outcome::Pass(format!("{} messages up to length {max_len}", r.checked)),
            Some(f) => {
                let msg: Vec<&str> = f
                    .message
                    .iter()
                    .map(|&s| code.symbols()[s].as_str())
                    .collect();
                Outcome::Fail(format!("message \"{}\": {}", msg.join(" "), f.detail))
            }
        },
        Err(e) => Outcome::Fail(e.to_string()),
    }
}
