use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{Direction, Recovery, ReductionCertificate};
use crate::error::{invalid, mismatch, Error, Result};
use crate::instances::{DenseTensor, Edge, ExplicitInstance, FactoredTensor, FactorizedInstance, MultiIndex, Term};
use crate::numeric::{int, is_zero_vector, rank_factorization, scale, Rational, RationalMatrix};
use crate::solver::{solve, SolveOptions};

fn unit(n: usize, k: usize, value: Rational) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[k] = value;
    v
}

fn check_rank(t: usize) -> Result<()> {
    if t == 0 {
        return Err(invalid("factorization rank t must be at least 1"));
    }
    Ok(())
}

fn tensor_certificate(direction: Direction, dims: &[usize], rank: usize, shift: Rational) -> ReductionCertificate {
    ReductionCertificate {
        direction,
        recover: Recovery::TensorFactors {
            dims: dims.to_vec(),
            rank,
        },
        value_shift: shift,
    }
}

/// One `[s]` term per factor: `Σ_p ∏_j ⟨a^{p,j}, x^j⟩` is the sum of the
/// tensor's entries over the support of `x¹ ⊗ ⋯ ⊗ x^s`.
pub fn factored_tensor_to_uniform(tensor: &FactoredTensor) -> Result<FactorizedInstance> {
    tensor.validate()?;
    let terms = tensor
        .factors
        .iter()
        .map(|factor| Term::new(factor.iter().cloned().enumerate()))
        .collect();
    FactorizedInstance::new(tensor.dims.clone(), terms, Rational::zero())
}

/// `B = Σ_i x^{i,1} ⊗ ⋯ ⊗ x^{i,s}` with integer entries (sums, not
/// disjunctions).
pub fn recover_tensor(factors: &[Vec<Vec<bool>>], dims: &[usize]) -> Result<DenseTensor> {
    for (i, factor) in factors.iter().enumerate() {
        if factor.len() != dims.len() || factor.iter().zip(dims).any(|(v, &n)| v.len() != n) {
            return Err(mismatch(format!("factor {} does not match dimensions {dims:?}", i + 1)));
        }
    }
    let mut b = DenseTensor::zeros(dims);
    for (pos, index) in MultiIndex::new(dims).enumerate() {
        let count = factors
            .iter()
            .filter(|factor| factor.iter().zip(&index).all(|(v, &k)| v[k]))
            .count();
        b.entries[pos] = int(count as i64);
    }
    Ok(b)
}

/// Explicit form of `max Σ_i Σ_k (2a_k − 1) ∏_j x^{i,j}_{k_j}
/// − 2 Σ_{i<i'} Σ_k ∏_j x^{i,j}_{k_j} x^{i',j}_{k_j}`, which equals
/// `Σa² − Σ(a − b)²` for the recovered tensor `b`.
///
/// Variables are laid out `i`-major: `x^{i,j}_k` is node
/// `i·Σn + Σ_{j'<j} n_{j'} + k`. The certificate's value shift is `Σa²`,
/// so the error of the recovered tensor is `value_shift − value`.
pub fn btf_to_explicit(a: &DenseTensor, t: usize, limit: u128) -> Result<(ExplicitInstance, ReductionCertificate)> {
    check_rank(t)?;
    let cells = a.entries.len() as u128;
    let monomials = cells.saturating_mul((t + t * (t - 1) / 2) as u128);
    if monomials > limit {
        return Err(Error::Budget {
            what: "tensor monomials".into(),
            needed: monomials,
            limit,
        });
    }

    let s = a.order();
    let mut starts = Vec::with_capacity(s);
    let mut width = 0;
    for &n in &a.dims {
        starts.push(width);
        width += n;
    }
    let node = |i: usize, j: usize, k: usize| i * width + starts[j] + k;

    let mut node_cost = vec![Rational::zero(); t * width];
    let mut edges: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    for (index, value) in a.indices().zip(&a.entries) {
        let linear = value * int(2) - Rational::one();
        for i in 0..t {
            let nodes: Vec<usize> = index.iter().enumerate().map(|(j, &k)| node(i, j, k)).collect();
            if s == 1 {
                node_cost[nodes[0]] += &linear;
            } else {
                *edges.entry(nodes).or_insert_with(Rational::zero) += &linear;
            }
        }
        for i in 0..t {
            for i2 in i + 1..t {
                let mut nodes: Vec<usize> = index
                    .iter()
                    .enumerate()
                    .flat_map(|(j, &k)| [node(i, j, k), node(i2, j, k)])
                    .collect();
                nodes.sort_unstable();
                *edges.entry(nodes).or_insert_with(Rational::zero) -= int(2);
            }
        }
    }

    let edges = edges
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(nodes, cost)| Edge { nodes, cost })
        .collect();
    let explicit = ExplicitInstance::new(node_cost, edges)?;
    let shift = a.entries.iter().map(|v| v * v).sum();
    Ok((explicit, tensor_certificate(Direction::BinaryTensorToExplicit, &a.dims, t, shift)))
}

/// Number of terms produced by [`btf_factored_to_factorized`]:
/// `tq + t + C(t,2)·∏ n_j`.
pub fn btf_term_count(t: usize, q: usize, dims: &[usize]) -> u128 {
    let (t, q) = (t as u128, q as u128);
    let cells = dims.iter().fold(1u128, |acc, &n| acc.saturating_mul(n as u128));
    t * q + t + (t * t.saturating_sub(1) / 2).saturating_mul(cells)
}

/// Factorized form of the same objective as [`btf_to_explicit`] over `st`
/// blocks (block `i·s + j` holds `x^{i,j}`).
///
/// Per `i`: one term `2 ∏_j ⟨a^{p,j}, x^{i,j}⟩` per factor `p` and one
/// term `−∏_j ⟨1, x^{i,j}⟩`. Per pair `i < i'`: the products
/// `∏_j ⟨x^{i,j}, x^{i',j}⟩` are bilinear in the two factor copies, so they
/// are expanded into one term per multi-index `k`, with unit vectors on all
/// `2s` blocks. Scalars sit on the last block of each term.
pub fn btf_factored_to_factorized(a: &FactoredTensor, t: usize) -> Result<(FactorizedInstance, ReductionCertificate)> {
    check_rank(t)?;
    a.validate()?;
    let s = a.order();
    let block = |i: usize, j: usize| i * s + j;
    let mut terms = Vec::new();

    for i in 0..t {
        for factor in &a.factors {
            terms.push(Term::new(factor.iter().enumerate().map(|(j, v)| {
                let v = if j == s - 1 { scale(v, &int(2)) } else { v.clone() };
                (block(i, j), v)
            })));
        }
        terms.push(Term::new(a.dims.iter().enumerate().map(|(j, &n)| {
            let fill = if j == s - 1 { -Rational::one() } else { Rational::one() };
            (block(i, j), vec![fill; n])
        })));
    }

    for i in 0..t {
        for i2 in i + 1..t {
            for index in MultiIndex::new(&a.dims) {
                let mut coeffs = Vec::with_capacity(2 * s);
                for (j, (&k, &n)) in index.iter().zip(&a.dims).enumerate() {
                    coeffs.push((block(i, j), unit(n, k, Rational::one())));
                    let value = if j == s - 1 { int(-2) } else { Rational::one() };
                    coeffs.push((block(i2, j), unit(n, k, value)));
                }
                terms.push(Term::new(coeffs));
            }
        }
    }

    let sizes = (0..t).flat_map(|_| a.dims.iter().copied()).collect();
    let f = FactorizedInstance::new(sizes, terms, Rational::zero())?;
    let shift = a.squared_norm();
    Ok((f, tensor_certificate(Direction::BinaryTensorToFactorized, &a.dims, t, shift)))
}

/// Rank-one case: `q + 1` uniform terms, the doubled factors and the
/// negated all-ones term.
pub fn r1btf_factored_to_uniform(a: &FactoredTensor) -> Result<(FactorizedInstance, ReductionCertificate)> {
    let (f, mut certificate) = btf_factored_to_factorized(a, 1)?;
    certificate.direction = Direction::TensorToUniform;
    Ok((f, certificate))
}

/// Optimal binary-rank-`t` approximation and its exact squared error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BtfSolution {
    /// `factors[i][j] = x^{i,j}`.
    pub factors: Vec<Vec<Vec<bool>>>,
    pub error: Rational,
}

pub fn solve_btf(a: &FactoredTensor, t: usize, options: &SolveOptions) -> Result<BtfSolution> {
    let (f, certificate) = btf_factored_to_factorized(a, t)?;
    let sol = solve(&f, options)?;
    let factors = certificate.recover_factors(&sol.assignment.flatten())?;
    Ok(BtfSolution {
        factors,
        error: &certificate.value_shift - &sol.value,
    })
}

/// Optimal `x yᵀ` approximation of a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BmfSolution {
    pub x: Vec<bool>,
    pub y: Vec<bool>,
    pub error: Rational,
}

pub fn bmf_rank1(a: &RationalMatrix, options: &SolveOptions) -> Result<BmfSolution> {
    let factors = rank_factorization(a)
        .outer_pairs()
        .into_iter()
        .map(|(u, v)| vec![u, v])
        .collect();
    let tensor = FactoredTensor::new(vec![a.rows(), a.cols()], factors)?;
    let (f, certificate) = r1btf_factored_to_uniform(&tensor)?;
    let sol = solve(&f, options)?;
    let mut blocks = sol.assignment.blocks.into_iter();
    Ok(BmfSolution {
        x: blocks.next().expect("two blocks"),
        y: blocks.next().expect("two blocks"),
        error: &certificate.value_shift - &sol.value,
    })
}

/// A factorization of a dense tensor: the rank factorization for matrices,
/// one factor per nonzero mode-`s` fiber otherwise.
pub fn factor_dense_tensor(a: &DenseTensor) -> FactoredTensor {
    let s = a.order();
    let factors = match s {
        1 if is_zero_vector(&a.entries) => vec![],
        1 => vec![vec![a.entries.clone()]],
        2 => {
            let m = RationalMatrix::from_entries(a.dims[0], a.dims[1], a.entries.clone()).expect("shape matches");
            rank_factorization(&m)
                .outer_pairs()
                .into_iter()
                .map(|(u, v)| vec![u, v])
                .collect()
        }
        _ => {
            let last = a.dims[s - 1];
            a.entries
                .chunks(last)
                .zip(MultiIndex::new(&a.dims[..s - 1]))
                .filter(|(fiber, _)| !is_zero_vector(fiber))
                .map(|(fiber, prefix)| {
                    let mut factor: Vec<Vec<Rational>> = prefix
                        .iter()
                        .zip(&a.dims)
                        .map(|(&k, &n)| unit(n, k, Rational::one()))
                        .collect();
                    factor.push(fiber.to_vec());
                    factor
                })
                .collect()
        }
    };
    FactoredTensor {
        dims: a.dims.clone(),
        factors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{eval_explicit, eval_factorized, eval_tensor_objective, materialize_tensor, Assignment};
    use rand::{Rng, SeedableRng};

    fn v(vals: &[i64]) -> Vec<Rational> {
        vals.iter().map(|&x| int(x)).collect()
    }

    fn dense(dims: &[usize], vals: &[i64]) -> DenseTensor {
        DenseTensor::new(dims.to_vec(), v(vals)).unwrap()
    }

    fn assignments(total: usize) -> impl Iterator<Item = Vec<bool>> {
        (0u32..1 << total).map(move |mask| (0..total).map(|i| mask >> i & 1 == 1).collect())
    }

    fn random_factored(rng: &mut impl Rng, dims: &[usize], q: usize) -> FactoredTensor {
        let factors = (0..q)
            .map(|_| dims.iter().map(|&n| (0..n).map(|_| int(rng.gen_range(-2..=2))).collect()).collect())
            .collect();
        FactoredTensor::new(dims.to_vec(), factors).unwrap()
    }

    #[test]
    fn recover_tensor_examples() {
        let b = recover_tensor(&[vec![vec![true, false], vec![false, true]]], &[2, 2]).unwrap();
        assert_eq!(b, dense(&[2, 2], &[0, 1, 0, 0]));
        let f = vec![vec![true, true], vec![true, false]];
        let b = recover_tensor(&[f.clone(), f], &[2, 2]).unwrap();
        assert_eq!(b, dense(&[2, 2], &[2, 0, 2, 0]));
        assert!(recover_tensor(&[vec![vec![true]]], &[2, 2]).is_err());
    }

    #[test]
    fn uniform_instance_matches_dense_monomials() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
        for _ in 0..10 {
            let c = random_factored(&mut rng, &[2, 2, 2], 2);
            let dense = materialize_tensor(&c, 1 << 10).unwrap();
            let f = factored_tensor_to_uniform(&c).unwrap();
            for flat in assignments(6) {
                let x = Assignment::split(&flat, &c.dims).unwrap();
                let expected: Rational = dense
                    .indices()
                    .zip(&dense.entries)
                    .filter(|(k, _)| k.iter().enumerate().all(|(j, &kj)| x.blocks[j][kj]))
                    .map(|(_, e)| e.clone())
                    .sum();
                assert_eq!(eval_factorized(&f, &x).unwrap(), expected);
            }
        }
        let empty = FactoredTensor::new(vec![2], vec![]).unwrap();
        let f = factored_tensor_to_uniform(&empty).unwrap();
        assert_eq!(solve(&f, &SolveOptions::default()).unwrap().value, int(0));
    }

    #[test]
    fn all_ones_rank_one_solves_to_four() {
        let c = FactoredTensor::new(vec![2, 2], vec![vec![v(&[1, 1]), v(&[1, 1])]]).unwrap();
        let f = factored_tensor_to_uniform(&c).unwrap();
        assert_eq!(f.terms.len(), 1);
        let sol = solve(&f, &SolveOptions::default()).unwrap();
        assert_eq!(sol.value, int(4));
        assert_eq!(sol.assignment, Assignment::from_bits(&[&[1, 1], &[1, 1]]));
    }

    #[test]
    fn explicit_btf_value_is_norm_minus_error() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(67);
        for (dims, t) in [(vec![2, 2], 1), (vec![2, 2], 2), (vec![3], 2), (vec![2, 1, 2], 2)] {
            let len = dims.iter().product();
            let a = DenseTensor::new(dims.clone(), (0..len).map(|_| int(rng.gen_range(-1..=2))).collect()).unwrap();
            let (e, cert) = btf_to_explicit(&a, t, 1 << 20).unwrap();
            for flat in assignments(e.node_count()) {
                let b = recover_tensor(&cert.recover_factors(&flat).unwrap(), &dims).unwrap();
                let error = eval_tensor_objective(&a, &b).unwrap();
                assert_eq!(eval_explicit(&e, &flat).unwrap(), &cert.value_shift - error);
            }
        }
    }

    #[test]
    fn factored_btf_value_is_norm_minus_error() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
        for (dims, t, q) in [(vec![2, 2], 1, 2), (vec![2, 2], 2, 1), (vec![2, 1, 2], 2, 2), (vec![3], 3, 1)] {
            let a = random_factored(&mut rng, &dims, q);
            let dense = materialize_tensor(&a, 1 << 10).unwrap();
            let (f, cert) = btf_factored_to_factorized(&a, t).unwrap();
            assert_eq!(f.terms.len() as u128, btf_term_count(t, q, &dims));
            for flat in assignments(f.variable_count()) {
                let x = Assignment::split(&flat, &f.sizes).unwrap();
                let b = recover_tensor(&cert.recover_factors(&flat).unwrap(), &dims).unwrap();
                let error = eval_tensor_objective(&dense, &b).unwrap();
                assert_eq!(eval_factorized(&f, &x).unwrap(), &cert.value_shift - error);
            }
        }
    }

    #[test]
    fn term_counts() {
        assert_eq!(btf_term_count(1, 1, &[2, 2]), 2);
        assert_eq!(btf_term_count(1, 3, &[5, 5]), 4);
        assert_eq!(btf_term_count(2, 3, &[1, 1]), 9);
        assert_eq!(btf_term_count(2, 3, &[2, 2]), 12);
    }

    #[test]
    fn identity_matrix_errors() {
        let identity = dense(&[2, 2], &[1, 0, 0, 1]);
        let a = factor_dense_tensor(&identity);
        assert_eq!(a.factors.len(), 2);
        let opts = SolveOptions::default();
        assert_eq!(solve_btf(&a, 1, &opts).unwrap().error, int(1));
        let two = solve_btf(&a, 2, &opts).unwrap();
        assert_eq!(two.error, int(0));
        assert_eq!(recover_tensor(&two.factors, &[2, 2]).unwrap(), identity);

        let ones = FactoredTensor::new(vec![2, 2], vec![vec![v(&[1, 1]), v(&[1, 1])]]).unwrap();
        let (f, _) = r1btf_factored_to_uniform(&ones).unwrap();
        assert_eq!(f.terms.len(), 2);
        let sol = solve_btf(&ones, 1, &opts).unwrap();
        assert_eq!((sol.error, sol.factors), (int(0), vec![vec![vec![true, true], vec![true, true]]]));

        let zero = FactoredTensor::new(vec![2, 2], vec![]).unwrap();
        let (f, _) = r1btf_factored_to_uniform(&zero).unwrap();
        assert_eq!(f.terms.len(), 1);
        assert_eq!(solve_btf(&zero, 1, &opts).unwrap().error, int(0));
    }

    #[test]
    fn bmf_examples() {
        let opts = SolveOptions::default();
        let ones = RationalMatrix::from_i64_rows(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]);
        let sol = bmf_rank1(&ones, &opts).unwrap();
        assert_eq!(sol.error, int(0));
        assert_eq!((sol.x, sol.y), (vec![true; 3], vec![true; 3]));
        assert_eq!(bmf_rank1(&RationalMatrix::identity(2), &opts).unwrap().error, int(1));
    }

    #[test]
    fn dense_factorization_reconstructs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(73);
        for dims in [vec![3], vec![2, 3], vec![2, 2, 2], vec![1, 3, 2]] {
            let len = dims.iter().product();
            let a = DenseTensor::new(dims.clone(), (0..len).map(|_| int(rng.gen_range(-1..=1))).collect()).unwrap();
            let f = factor_dense_tensor(&a);
            assert_eq!(materialize_tensor(&f, 1 << 10).unwrap(), a);
        }
        assert!(factor_dense_tensor(&dense(&[2], &[0, 0])).factors.is_empty());
    }

    #[test]
    fn zero_rank_is_rejected() {
        let a = FactoredTensor::new(vec![1], vec![]).unwrap();
        assert!(btf_factored_to_factorized(&a, 0).is_err());
        assert!(btf_to_explicit(&dense(&[1], &[1]), 0, 10).is_err());
        assert!(matches!(btf_to_explicit(&dense(&[2, 2], &[1, 1, 1, 1]), 2, 3), Err(Error::Budget { .. })));
    }
}
