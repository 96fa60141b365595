//! Exact solvers for minimum-cost Markov chains and optimal AIFV-m codes.
//!
//! The crate is organised around the Markov chain polytope: every permissible
//! state becomes an affine function over `x ∈ Q^{m-1}`, the per-type lower
//! envelopes bound a polytope, and the cheapest chain sits at its highest
//! point. [`iterative`] walks multi-typed intersection points down to that
//! point; [`slice`] finds it by nested binary search for `m = 3`; [`oracle`]
//! supplies brute-force ground truth. [`aifv`] builds the code trees whose
//! costs form the motivating instance.

pub mod aifv;
pub mod error;
pub mod hull;
pub mod iterative;
pub mod linalg;
pub mod mcmc;
pub mod oracle;
pub mod rational;
pub mod slice;

pub use error::{Error, ErrorKind, Result};
pub use mcmc::{
    chain_cost, classify_cone, eval_envelope, eval_f, eval_h, multi_typed_intersection,
    stationary_distribution, ChainSelection, EnvelopeEval, LiftedPoint, PointX, ProblemSpec,
    StateSpec,
};
pub use rational::Rational;
