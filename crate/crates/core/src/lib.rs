//! Exact maximization of sums of products of linear forms over binary
//! variable blocks, with reductions from related problems and
//! brute-force oracles.
//!
//! All arithmetic is exact over arbitrary-precision rationals.

pub mod arrangement;
pub mod error;
pub mod instances;
pub mod io;
pub mod numeric;
pub mod oracle;
pub mod reductions;
pub mod solver;

pub use error::{Error, Result};
pub use instances::{
    eval_affine, eval_explicit, eval_factorized, eval_tensor_objective, AffineFactor, AffineFactorizedInstance,
    AffineTerm, Assignment, DenseTensor, Edge, ExplicitInstance, FactoredTensor, FactorizedInstance, Solution, Term,
};
pub use numeric::{frac, int, Rational, RationalMatrix};
pub use solver::{solve, solve_affine, solve_with_stats, BlockOrder, SolveOptions};
