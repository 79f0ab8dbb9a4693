//! Transformations between problem forms, each with a way back to the source.

mod explicit;
mod quadratic;
mod tensor;

pub use explicit::{affine_to_linear, explicit_to_factorized, factorized_to_explicit};
pub use quadratic::{eval_quadratic, quadratic_to_factorized, QuadraticInstance};
pub use tensor::{
    bmf_rank1, btf_factored_to_factorized, btf_term_count, btf_to_explicit, factor_dense_tensor,
    factored_tensor_to_uniform, r1btf_factored_to_uniform, recover_tensor, solve_btf, BmfSolution, BtfSolution,
};

use crate::error::{mismatch, Result};
use crate::instances::Assignment;
use crate::numeric::Rational;

/// Cap on the number of terms or monomials produced by an expansion.
pub const DEFAULT_EXPANSION_LIMIT: u128 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    ExplicitToFactorized,
    FactorizedToExplicit,
    AffineToLinear,
    TensorToUniform,
    BinaryTensorToExplicit,
    BinaryTensorToFactorized,
    QuadraticToFactorized,
    MaxCutToFactorized,
}

/// How a target assignment maps back to a source assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Recovery {
    /// Same blocks.
    Identity,
    /// Source variables are the first block of the target.
    FirstBlock,
    /// Source blocks are consecutive slices of the target's single flat vector.
    Split { sizes: Vec<usize> },
    /// Target blocks are `x^{i,j}` laid out `i`-major; the source object is
    /// the tensor `Σ_i ⊗_j x^{i,j}`.
    TensorFactors { dims: Vec<usize>, rank: usize },
}

/// Invariant: `source value = target value + value_shift` under `recover`,
/// wherever the reduction is value-exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionCertificate {
    pub direction: Direction,
    pub recover: Recovery,
    pub value_shift: Rational,
}

impl ReductionCertificate {
    /// Flat source variables recovered from a blockwise target assignment.
    pub fn recover_flat(&self, target: &Assignment) -> Result<Vec<bool>> {
        match &self.recover {
            Recovery::FirstBlock => target
                .blocks
                .first()
                .cloned()
                .ok_or_else(|| mismatch("empty assignment")),
            Recovery::Identity => Ok(target.flatten()),
            Recovery::Split { .. } | Recovery::TensorFactors { .. } => Ok(target.flatten()),
        }
    }

    /// Per-factor binary vectors `[i][j]` for the tensor reductions.
    pub fn recover_factors(&self, flat: &[bool]) -> Result<Vec<Vec<Vec<bool>>>> {
        let Recovery::TensorFactors { dims, rank } = &self.recover else {
            return Err(mismatch("certificate does not describe tensor factors"));
        };
        let per_factor: usize = dims.iter().sum();
        if flat.len() != per_factor * rank {
            return Err(mismatch(format!(
                "{} bits for {rank} factors of total length {per_factor}",
                flat.len()
            )));
        }
        let mut at = 0;
        let mut out = Vec::with_capacity(*rank);
        for _ in 0..*rank {
            let mut factor = Vec::with_capacity(dims.len());
            for &n in dims {
                factor.push(flat[at..at + n].to_vec());
                at += n;
            }
            out.push(factor);
        }
        Ok(out)
    }

    /// Blockwise source assignment for [`Recovery::Split`].
    pub fn recover_blocks(&self, flat: &[bool]) -> Result<Assignment> {
        match &self.recover {
            Recovery::Split { sizes } => Assignment::split(flat, sizes),
            _ => Err(mismatch("certificate does not split a flat vector")),
        }
    }
}
