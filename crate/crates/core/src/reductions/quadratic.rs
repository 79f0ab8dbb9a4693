use std::collections::BTreeMap;

use num_traits::Zero;

use super::{Direction, Recovery, ReductionCertificate};
use crate::error::{invalid, Result};
use crate::instances::{Assignment, FactorizedInstance, Term};
use crate::numeric::{inner_binary, is_zero_vector, rank_factorization, Rational, RationalMatrix};

/// `Σ_{i<j} x^{iᵀ} Q^{i,j} x^j + Σ_j c^{jᵀ} x^j` over binary blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticInstance {
    pub sizes: Vec<usize>,
    /// Keyed by `(i, j)` with `i < j`; missing pairs are zero.
    pub q: BTreeMap<(usize, usize), RationalMatrix>,
    /// Missing blocks have zero linear part.
    pub c: BTreeMap<usize, Vec<Rational>>,
}

impl QuadraticInstance {
    pub fn new(
        sizes: Vec<usize>,
        q: BTreeMap<(usize, usize), RationalMatrix>,
        c: BTreeMap<usize, Vec<Rational>>,
    ) -> Result<Self> {
        let inst = Self { sizes, q, c };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.sizes.len();
        if s == 0 || self.sizes.contains(&0) {
            return Err(invalid("block sizes must be positive and nonempty"));
        }
        for (&(i, j), m) in &self.q {
            if i >= j || j >= s {
                return Err(invalid(format!("matrix key ({}, {}) needs 1 <= i < j <= {s}", i + 1, j + 1)));
            }
            if m.rows() != self.sizes[i] || m.cols() != self.sizes[j] {
                return Err(invalid(format!(
                    "matrix ({}, {}) is {}x{}, expected {}x{}",
                    i + 1,
                    j + 1,
                    m.rows(),
                    m.cols(),
                    self.sizes[i],
                    self.sizes[j]
                )));
            }
        }
        for (&j, c) in &self.c {
            if j >= s || c.len() != self.sizes[j] {
                return Err(invalid(format!("linear part of block {} has the wrong shape", j + 1)));
            }
        }
        Ok(())
    }
}

pub fn eval_quadratic(inst: &QuadraticInstance, x: &Assignment) -> Result<Rational> {
    x.check_shape(&inst.sizes)?;
    let mut acc = Rational::zero();
    for (&(i, j), m) in &inst.q {
        acc += m.bilinear_binary(&x.blocks[i], &x.blocks[j]);
    }
    for (&j, c) in &inst.c {
        acc += inner_binary(c, &x.blocks[j]);
    }
    Ok(acc)
}

/// Rank-factorizes every `Q^{i,j} = Σ_r aʳ bʳᵀ` and emits one `{i, j}` term
/// per rank-one piece, plus one singleton per nonzero linear part.
pub fn quadratic_to_factorized(inst: &QuadraticInstance) -> Result<(FactorizedInstance, ReductionCertificate)> {
    inst.validate()?;
    let mut terms = Vec::new();
    for (&(i, j), m) in &inst.q {
        for (a, b) in rank_factorization(m).outer_pairs() {
            terms.push(Term::new([(i, a), (j, b)]));
        }
    }
    for (&j, c) in &inst.c {
        if !is_zero_vector(c) {
            terms.push(Term::singleton(j, c.clone()));
        }
    }
    let f = FactorizedInstance::new(inst.sizes.clone(), terms, Rational::zero())?;
    let certificate = ReductionCertificate {
        direction: Direction::QuadraticToFactorized,
        recover: Recovery::Identity,
        value_shift: Rational::zero(),
    };
    Ok((f, certificate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::eval_factorized;
    use crate::numeric::int;
    use crate::solver::{solve, SolveOptions};

    #[test]
    fn rank_one_block() {
        let q = RationalMatrix::from_i64_rows(&[&[1, 2], &[2, 4]]);
        let inst = QuadraticInstance::new(vec![2, 2], [((0, 1), q)].into(), BTreeMap::new()).unwrap();
        let (f, _) = quadratic_to_factorized(&inst).unwrap();
        assert_eq!(f.terms.len(), 1);
        let sol = solve(&f, &SolveOptions::default()).unwrap();
        assert_eq!(sol.value, int(9));
        assert_eq!(sol.assignment, Assignment::from_bits(&[&[1, 1], &[1, 1]]));
    }

    #[test]
    fn zero_matrix_leaves_a_separable_problem() {
        let inst = QuadraticInstance::new(
            vec![2, 3],
            [((0, 1), RationalMatrix::zeros(2, 3))].into(),
            [(0, vec![int(2), int(-1)]), (1, vec![int(0), int(3), int(-4)])].into(),
        )
        .unwrap();
        let (f, _) = quadratic_to_factorized(&inst).unwrap();
        assert!(f.terms.iter().all(|t| t.len() == 1));
        assert_eq!(solve(&f, &SolveOptions::default()).unwrap().value, int(5));
    }

    #[test]
    fn value_exact_everywhere() {
        let q = RationalMatrix::from_i64_rows(&[&[1, -2, 0], &[3, 1, 1]]);
        let inst = QuadraticInstance::new(vec![2, 3], [((0, 1), q)].into(), [(1, vec![int(1), int(0), int(-1)])].into()).unwrap();
        let (f, _) = quadratic_to_factorized(&inst).unwrap();
        for mask in 0u32..32 {
            let flat: Vec<bool> = (0..5).map(|i| mask >> i & 1 == 1).collect();
            let x = Assignment::split(&flat, &inst.sizes).unwrap();
            assert_eq!(eval_quadratic(&inst, &x).unwrap(), eval_factorized(&f, &x).unwrap());
        }
    }

    #[test]
    fn rejects_bad_keys() {
        let q = RationalMatrix::zeros(1, 1);
        assert!(QuadraticInstance::new(vec![1, 1], [((1, 0), q.clone())].into(), BTreeMap::new()).is_err());
        assert!(QuadraticInstance::new(vec![1, 2], [((0, 1), q)].into(), BTreeMap::new()).is_err());
    }
}
