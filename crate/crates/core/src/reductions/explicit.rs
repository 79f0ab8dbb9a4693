use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::{Direction, Recovery, ReductionCertificate};
use crate::error::{invalid, Error, Result};
use crate::instances::{
    AffineFactorizedInstance, Edge, ExplicitInstance, FactorizedInstance, MultiIndex, Term,
};
use crate::numeric::{int, scale, Rational};

fn unit(n: usize, k: usize, value: Rational) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[k] = value;
    v
}

/// Copies the variables once per position of the largest edge and adds a
/// penalty `M Σ_k (s ∏_j x^j_k − Σ_j x^j_k)`, `M = Σ|c_e| + 1`, that makes
/// disagreeing copies strictly worse than agreeing ones. The source
/// variables are read from the first copy.
///
/// Node costs go on copy 1; an edge's `i`-th smallest node goes on copy `i`.
/// Edgeless inputs become a single-block linear instance.
pub fn explicit_to_factorized(inst: &ExplicitInstance) -> Result<(FactorizedInstance, ReductionCertificate)> {
    inst.validate()?;
    let n = inst.node_count();
    if n == 0 {
        return Err(invalid("explicit instance has no nodes"));
    }
    let certificate = ReductionCertificate {
        direction: Direction::ExplicitToFactorized,
        recover: Recovery::FirstBlock,
        value_shift: Rational::zero(),
    };
    let Some(s) = inst.max_edge_size() else {
        let f = FactorizedInstance::new(vec![n], vec![Term::singleton(0, inst.node_cost.clone())], Rational::zero())?;
        return Ok((f, certificate));
    };

    let penalty = inst.edges.iter().fold(Rational::one(), |acc, e| acc + e.cost.abs());
    let mut terms = Vec::with_capacity(n + inst.edges.len() + s);

    // linear part of each copy
    for j in 0..s {
        let mut c = vec![-&penalty; n];
        if j == 0 {
            for (ck, cost) in c.iter_mut().zip(&inst.node_cost) {
                *ck += cost;
            }
        }
        terms.push(Term::singleton(j, c));
    }

    for e in &inst.edges {
        let mut nodes = e.nodes.clone();
        nodes.sort_unstable();
        terms.push(Term::new(nodes.iter().enumerate().map(|(j, &k)| {
            let value = if j == 0 { e.cost.clone() } else { Rational::one() };
            (j, unit(n, k, value))
        })));
    }

    let diagonal = &penalty * int(s as i64);
    for k in 0..n {
        terms.push(Term::new((0..s).map(|j| {
            let value = if j == 0 { diagonal.clone() } else { Rational::one() };
            (j, unit(n, k, value))
        })));
    }

    let f = FactorizedInstance::new(vec![n; s], terms, Rational::zero())?;
    Ok((f, certificate))
}

/// Expands every product into monomials over `Σ n_j` nodes (block `j`
/// occupies nodes `Σ_{i<j} n_i ..`). Like monomials are merged and zero
/// coefficients dropped. The explicit objective equals the factorized one
/// minus its offset, which is returned as the certificate's value shift.
pub fn factorized_to_explicit(inst: &FactorizedInstance, limit: u128) -> Result<(ExplicitInstance, ReductionCertificate)> {
    inst.validate()?;
    let monomials = inst.terms.iter().fold(0u128, |acc, t| {
        let count = t
            .coeffs
            .values()
            .map(|c| c.iter().filter(|v| !v.is_zero()).count() as u128)
            .fold(1u128, u128::saturating_mul);
        acc.saturating_add(count)
    });
    if monomials > limit {
        return Err(Error::Budget {
            what: "expanded monomials".into(),
            needed: monomials,
            limit,
        });
    }

    let mut starts = Vec::with_capacity(inst.block_count());
    let mut total = 0;
    for &n in &inst.sizes {
        starts.push(total);
        total += n;
    }

    let mut node_cost = vec![Rational::zero(); total];
    let mut edges: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    for term in &inst.terms {
        let blocks: Vec<usize> = term.index_set().collect();
        let supports: Vec<Vec<usize>> = blocks
            .iter()
            .map(|&j| (0..inst.sizes[j]).filter(|&k| !term.coeffs[&j][k].is_zero()).collect())
            .collect();
        let dims: Vec<usize> = supports.iter().map(Vec::len).collect();
        for pick in MultiIndex::new(&dims) {
            let mut coeff = Rational::one();
            let mut nodes = Vec::with_capacity(blocks.len());
            for ((&j, support), &p) in blocks.iter().zip(&supports).zip(&pick) {
                let k = support[p];
                coeff *= &term.coeffs[&j][k];
                nodes.push(starts[j] + k);
            }
            if nodes.len() == 1 {
                node_cost[nodes[0]] += coeff;
            } else {
                *edges.entry(nodes).or_insert_with(Rational::zero) += coeff;
            }
        }
    }

    let edges = edges
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(nodes, cost)| Edge { nodes, cost })
        .collect();
    let explicit = ExplicitInstance::new(node_cost, edges)?;
    let certificate = ReductionCertificate {
        direction: Direction::FactorizedToExplicit,
        recover: Recovery::Split {
            sizes: inst.sizes.clone(),
        },
        value_shift: inst.offset.clone(),
    };
    Ok((explicit, certificate))
}

/// Expands `∏_{j∈I} (⟨c^j, x^j⟩ + d^j)` over the subsets of `I`.
///
/// The subset `I'` keeps the vectors `c^j` for `j ∈ I'`, with the scalar
/// `∏_{j∈I∖I'} d^j` absorbed into its smallest block; subsets whose scalar
/// vanishes are skipped. The empty subset contributes `∏ d^j` to the offset.
pub fn affine_to_linear(inst: &AffineFactorizedInstance, limit: u128) -> Result<FactorizedInstance> {
    inst.validate()?;
    let expanded = inst.terms.iter().fold(0u128, |acc, t| {
        acc.saturating_add(1u128.checked_shl(t.factors.len() as u32).unwrap_or(u128::MAX))
    });
    if expanded > limit {
        return Err(Error::Budget {
            what: "affine expansion terms".into(),
            needed: expanded,
            limit,
        });
    }

    let mut offset = inst.offset.clone();
    let mut terms = Vec::new();
    for term in &inst.terms {
        let factors: Vec<_> = term.factors.iter().collect();
        let width = factors.len();
        for mask in 0u64..1 << width {
            let scalar = factors
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 0)
                .fold(Rational::one(), |acc, (_, (_, f))| acc * &f.d);
            if scalar.is_zero() {
                continue;
            }
            if mask == 0 {
                offset += scalar;
                continue;
            }
            let mut first = true;
            let coeffs = factors
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, (&j, f))| {
                    let c = if first { scale(&f.c, &scalar) } else { f.c.clone() };
                    first = false;
                    (j, c)
                });
            terms.push(Term::new(coeffs));
        }
    }
    FactorizedInstance::new(inst.sizes.clone(), terms, offset)
}
