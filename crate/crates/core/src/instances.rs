//! Problem data and exact evaluators.
//!
//! Block indices are 0-based everywhere inside the crate; the JSON layer
//! converts to and from the 1-based convention used in files.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{invalid, mismatch, Error, Result};
use crate::numeric::{inner_binary, Rational};

/// Default cap on the number of entries of a dense tensor.
pub const DEFAULT_DENSE_LIMIT: u128 = 1 << 22;

/// One summand `∏_{j∈I} ⟨c^{I,j}, x^j⟩`. The key set of `coeffs` is the index set `I`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeffs: BTreeMap<usize, Vec<Rational>>,
}

impl Term {
    pub fn new(coeffs: impl IntoIterator<Item = (usize, Vec<Rational>)>) -> Self {
        Self {
            coeffs: coeffs.into_iter().collect(),
        }
    }

    pub fn singleton(block: usize, coeffs: Vec<Rational>) -> Self {
        Self::new([(block, coeffs)])
    }

    pub fn index_set(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn contains(&self, block: usize) -> bool {
        self.coeffs.contains_key(&block)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self, block: usize) -> Option<&[Rational]> {
        self.coeffs.get(&block).map(Vec::as_slice)
    }

    /// Product of the inner products; assumes `x` conforms.
    pub fn value(&self, x: &Assignment) -> Rational {
        let mut acc = Rational::one();
        for (&j, c) in &self.coeffs {
            let ip = inner_binary(c, &x.blocks[j]);
            if ip.is_zero() {
                return ip;
            }
            acc *= ip;
        }
        acc
    }

    fn validate(&self, position: usize, sizes: &[usize]) -> Result<()> {
        if self.coeffs.is_empty() {
            return Err(invalid(format!("term {}: empty index set", position + 1)));
        }
        for (&j, c) in &self.coeffs {
            let Some(&n) = sizes.get(j) else {
                return Err(invalid(format!(
                    "term {}: block {} out of range 1..={}",
                    position + 1,
                    j + 1,
                    sizes.len()
                )));
            };
            if c.len() != n {
                return Err(invalid(format!(
                    "term {}: block {} has {} coefficients, expected {n}",
                    position + 1,
                    j + 1,
                    c.len()
                )));
            }
        }
        Ok(())
    }
}

/// Maximize `offset + Σ_{I} ∏_{j∈I} ⟨c^{I,j}, x^j⟩` over binary blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorizedInstance {
    pub sizes: Vec<usize>,
    pub terms: Vec<Term>,
    pub offset: Rational,
}

impl FactorizedInstance {
    pub fn new(sizes: Vec<usize>, terms: Vec<Term>, offset: Rational) -> Result<Self> {
        let inst = Self { sizes, terms, offset };
        inst.validate()?;
        Ok(inst)
    }

    /// Number of blocks `s`.
    pub fn block_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn variable_count(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        validate_sizes(&self.sizes)?;
        for (t, term) in self.terms.iter().enumerate() {
            term.validate(t, &self.sizes)?;
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &Assignment) -> Result<Rational> {
        eval_factorized(self, x)
    }
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() {
        return Err(invalid("at least one block is required"));
    }
    if let Some(j) = sizes.iter().position(|&n| n == 0) {
        return Err(invalid(format!("block {} has size 0", j + 1)));
    }
    Ok(())
}

/// Affine factor `⟨c, x^j⟩ + d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineFactor {
    pub c: Vec<Rational>,
    pub d: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineTerm {
    pub factors: BTreeMap<usize, AffineFactor>,
}

impl AffineTerm {
    pub fn new(factors: impl IntoIterator<Item = (usize, AffineFactor)>) -> Self {
        Self {
            factors: factors.into_iter().collect(),
        }
    }

    pub fn value(&self, x: &Assignment) -> Rational {
        self.factors
            .iter()
            .map(|(&j, f)| inner_binary(&f.c, &x.blocks[j]) + &f.d)
            .fold(Rational::one(), |acc, v| acc * v)
    }
}

/// Same shape as [`FactorizedInstance`], with affine instead of linear factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineFactorizedInstance {
    pub sizes: Vec<usize>,
    pub terms: Vec<AffineTerm>,
    pub offset: Rational,
}

impl AffineFactorizedInstance {
    pub fn new(sizes: Vec<usize>, terms: Vec<AffineTerm>, offset: Rational) -> Result<Self> {
        let inst = Self { sizes, terms, offset };
        inst.validate()?;
        Ok(inst)
    }

    pub fn block_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn validate(&self) -> Result<()> {
        validate_sizes(&self.sizes)?;
        for (t, term) in self.terms.iter().enumerate() {
            if term.factors.is_empty() {
                return Err(invalid(format!("term {}: empty index set", t + 1)));
            }
            for (&j, f) in &term.factors {
                match self.sizes.get(j) {
                    None => {
                        return Err(invalid(format!(
                            "term {}: block {} out of range 1..={}",
                            t + 1,
                            j + 1,
                            self.sizes.len()
                        )))
                    }
                    Some(&n) if n != f.c.len() => {
                        return Err(invalid(format!(
                            "term {}: block {} has {} coefficients, expected {n}",
                            t + 1,
                            j + 1,
                            f.c.len()
                        )))
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    /// Drops every `d`, keeping the linear parts.
    pub fn linear_part(&self) -> FactorizedInstance {
        FactorizedInstance {
            sizes: self.sizes.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| Term::new(t.factors.iter().map(|(&j, f)| (j, f.c.clone()))))
                .collect(),
            offset: self.offset.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub nodes: Vec<usize>,
    pub cost: Rational,
}

/// Hypergraph form: `Σ_k c_k x_k + Σ_e c_e ∏_{k∈e} x_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitInstance {
    pub node_cost: Vec<Rational>,
    pub edges: Vec<Edge>,
}

impl ExplicitInstance {
    pub fn new(node_cost: Vec<Rational>, edges: Vec<Edge>) -> Result<Self> {
        let inst = Self { node_cost, edges };
        inst.validate()?;
        Ok(inst)
    }

    pub fn node_count(&self) -> usize {
        self.node_cost.len()
    }

    pub fn max_edge_size(&self) -> Option<usize> {
        self.edges.iter().map(|e| e.nodes.len()).max()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.edges.iter().enumerate() {
            if e.nodes.len() < 2 {
                return Err(invalid(format!("edge {}: has {} node(s), need at least 2", i + 1, e.nodes.len())));
            }
            if let Some(&k) = e.nodes.iter().find(|&&k| k >= self.node_count()) {
                return Err(invalid(format!(
                    "edge {}: node {} out of range 1..={}",
                    i + 1,
                    k + 1,
                    self.node_count()
                )));
            }
            let mut sorted = e.nodes.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != e.nodes.len() {
                return Err(invalid(format!("edge {}: repeated node", i + 1)));
            }
        }
        Ok(())
    }
}

/// One binary vector per block.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    pub blocks: Vec<Vec<bool>>,
}

impl Assignment {
    pub fn new(blocks: Vec<Vec<bool>>) -> Self {
        Self { blocks }
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        Self {
            blocks: sizes.iter().map(|&n| vec![false; n]).collect(),
        }
    }

    pub fn from_bits(blocks: &[&[u8]]) -> Self {
        Self {
            blocks: blocks.iter().map(|b| b.iter().map(|&v| v != 0).collect()).collect(),
        }
    }

    /// Splits a flat vector into consecutive blocks of the given sizes.
    pub fn split(flat: &[bool], sizes: &[usize]) -> Result<Self> {
        let total: usize = sizes.iter().sum();
        if flat.len() != total {
            return Err(mismatch(format!("{} bits for {total} variables", flat.len())));
        }
        let mut blocks = Vec::with_capacity(sizes.len());
        let mut at = 0;
        for &n in sizes {
            blocks.push(flat[at..at + n].to_vec());
            at += n;
        }
        Ok(Self { blocks })
    }

    pub fn flatten(&self) -> Vec<bool> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn check_shape(&self, sizes: &[usize]) -> Result<()> {
        if self.blocks.len() != sizes.len() {
            return Err(mismatch(format!(
                "assignment has {} blocks, instance has {}",
                self.blocks.len(),
                sizes.len()
            )));
        }
        for (j, (b, &n)) in self.blocks.iter().zip(sizes).enumerate() {
            if b.len() != n {
                return Err(mismatch(format!("block {} has length {}, expected {n}", j + 1, b.len())));
            }
        }
        Ok(())
    }
}

/// Assignment together with its exact objective value (offset included).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub assignment: Assignment,
    pub value: Rational,
}

/// Dense tensor, row-major with the last index varying fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseTensor {
    pub dims: Vec<usize>,
    pub entries: Vec<Rational>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, entries: Vec<Rational>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(invalid("tensor dimensions must be positive and nonempty"));
        }
        if entries.len() != expected {
            return Err(mismatch(format!(
                "tensor of shape {dims:?} needs {expected} entries, got {}",
                entries.len()
            )));
        }
        Ok(Self { dims, entries })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let len = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            entries: vec![Rational::zero(); len],
        }
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn offset_of(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.dims).fold(0, |acc, (&k, &n)| acc * n + k)
    }

    pub fn get(&self, index: &[usize]) -> &Rational {
        &self.entries[self.offset_of(index)]
    }

    pub fn indices(&self) -> MultiIndex {
        MultiIndex::new(&self.dims)
    }
}

/// Iterates all multi-indices of a shape in row-major order.
#[derive(Clone, Debug)]
pub struct MultiIndex {
    dims: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl MultiIndex {
    pub fn new(dims: &[usize]) -> Self {
        let next = if dims.contains(&0) {
            None
        } else {
            Some(vec![0; dims.len()])
        };
        Self {
            dims: dims.to_vec(),
            next,
        }
    }
}

impl Iterator for MultiIndex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.dims[pos] {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(current)
    }
}

/// `Σ_p a^{p,1} ⊗ ⋯ ⊗ a^{p,s}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredTensor {
    pub dims: Vec<usize>,
    pub factors: Vec<Vec<Vec<Rational>>>,
}

impl FactoredTensor {
    pub fn new(dims: Vec<usize>, factors: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        let t = Self { dims, factors };
        t.validate()?;
        Ok(t)
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(invalid("tensor dimensions must be positive and nonempty"));
        }
        for (p, factor) in self.factors.iter().enumerate() {
            if factor.len() != self.dims.len() {
                return Err(mismatch(format!(
                    "factor {} has {} vectors, tensor order is {}",
                    p + 1,
                    factor.len(),
                    self.dims.len()
                )));
            }
            for (j, (v, &n)) in factor.iter().zip(&self.dims).enumerate() {
                if v.len() != n {
                    return Err(mismatch(format!(
                        "factor {}, mode {}: length {}, expected {n}",
                        p + 1,
                        j + 1,
                        v.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// `Σ a²` over the materialized tensor, computed from the factors as
    /// `Σ_{p,p'} ∏_j ⟨a^{p,j}, a^{p',j}⟩`.
    pub fn squared_norm(&self) -> Rational {
        let mut acc = Rational::zero();
        for p in &self.factors {
            for q in &self.factors {
                let prod = p
                    .iter()
                    .zip(q)
                    .fold(Rational::one(), |acc, (u, v)| acc * crate::numeric::dot(u, v));
                acc += prod;
            }
        }
        acc
    }
}

/// Objective value of `x`, offset included.
pub fn eval_factorized(inst: &FactorizedInstance, x: &Assignment) -> Result<Rational> {
    x.check_shape(&inst.sizes)?;
    Ok(inst
        .terms
        .iter()
        .fold(inst.offset.clone(), |acc, term| acc + term.value(x)))
}

pub fn eval_explicit(inst: &ExplicitInstance, x: &[bool]) -> Result<Rational> {
    if x.len() != inst.node_count() {
        return Err(mismatch(format!(
            "{} values for {} nodes",
            x.len(),
            inst.node_count()
        )));
    }
    let mut acc = inner_binary(&inst.node_cost, x);
    for e in &inst.edges {
        if e.nodes.iter().all(|&k| x[k]) {
            acc += &e.cost;
        }
    }
    Ok(acc)
}

pub fn eval_affine(inst: &AffineFactorizedInstance, x: &Assignment) -> Result<Rational> {
    x.check_shape(&inst.sizes)?;
    Ok(inst
        .terms
        .iter()
        .fold(inst.offset.clone(), |acc, term| acc + term.value(x)))
}

/// `Σ (a − b)²` over all entries.
pub fn eval_tensor_objective(a: &DenseTensor, b: &DenseTensor) -> Result<Rational> {
    if a.dims != b.dims {
        return Err(mismatch(format!("tensor shapes {:?} and {:?}", a.dims, b.dims)));
    }
    Ok(a.entries.iter().zip(&b.entries).fold(Rational::zero(), |acc, (x, y)| {
        let d = x - y;
        acc + &d * &d
    }))
}

/// `m_j`: number of terms (with multiplicity) containing `j` and some smaller block.
pub fn compute_m(inst: &FactorizedInstance) -> Vec<usize> {
    let mut m = vec![0; inst.block_count()];
    for term in &inst.terms {
        let Some(first) = term.index_set().next() else {
            continue;
        };
        for j in term.index_set().filter(|&j| j > first) {
            m[j] += 1;
        }
    }
    m
}

/// Dense sum of outer products.
pub fn materialize_tensor(tensor: &FactoredTensor, limit: u128) -> Result<DenseTensor> {
    tensor.validate()?;
    let size = tensor
        .dims
        .iter()
        .try_fold(1u128, |acc, &n| acc.checked_mul(n as u128))
        .unwrap_or(u128::MAX);
    if size > limit {
        return Err(Error::Budget {
            what: "dense tensor entries".into(),
            needed: size,
            limit,
        });
    }
    let mut dense = DenseTensor::zeros(&tensor.dims);
    for factor in &tensor.factors {
        for (pos, index) in MultiIndex::new(&tensor.dims).enumerate() {
            let mut prod = Rational::one();
            for (v, &k) in factor.iter().zip(&index) {
                if v[k].is_zero() {
                    prod = Rational::zero();
                    break;
                }
                prod *= &v[k];
            }
            if !prod.is_zero() {
                dense.entries[pos] += prod;
            }
        }
    }
    Ok(dense)
}
