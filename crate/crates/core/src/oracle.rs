//! Exhaustive solvers and seeded instance generators for cross-checking.

use std::collections::BTreeMap;

use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::instances::{
    eval_explicit, eval_factorized, eval_tensor_objective, AffineFactor, AffineFactorizedInstance, AffineTerm, Assignment,
    DenseTensor, Edge, ExplicitInstance, FactoredTensor, FactorizedInstance, MultiIndex, Solution, Term,
};
use crate::numeric::{frac, int, Rational, RationalMatrix};
use crate::reductions::{recover_tensor, Direction, QuadraticInstance, Recovery, ReductionCertificate};

/// Largest number of binary variables enumerated by default.
pub const DEFAULT_BRUTE_CAP: usize = 24;

fn check_cap(vars: usize, cap: usize) -> Result<()> {
    if vars > cap {
        return Err(Error::Budget {
            what: "brute-force variables".into(),
            needed: vars as u128,
            limit: cap as u128,
        });
    }
    Ok(())
}

/// All `2^n` vectors in lexicographic order (`0 < 1`, first bit most
/// significant).
fn lex_vectors(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << n).map(move |mask| (0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect())
}

/// Exact maximum over every assignment; ties go to the lexicographically
/// smallest one.
pub fn brute_force(inst: &FactorizedInstance, cap: usize) -> Result<Solution> {
    inst.validate()?;
    let n = inst.variable_count();
    check_cap(n, cap)?;
    let mut best: Option<Solution> = None;
    for flat in lex_vectors(n) {
        let assignment = Assignment::split(&flat, &inst.sizes)?;
        let value = eval_factorized(inst, &assignment)?;
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(Solution { assignment, value });
        }
    }
    Ok(best.expect("at least one assignment"))
}

/// Every maximizer, in lexicographic order.
pub fn all_optima(inst: &FactorizedInstance, cap: usize) -> Result<(Rational, Vec<Assignment>)> {
    inst.validate()?;
    let n = inst.variable_count();
    check_cap(n, cap)?;
    let mut best: Option<Rational> = None;
    let mut argmax = Vec::new();
    for flat in lex_vectors(n) {
        let assignment = Assignment::split(&flat, &inst.sizes)?;
        let value = eval_factorized(inst, &assignment)?;
        match best.as_ref().map(|b| value.cmp(b)) {
            Some(std::cmp::Ordering::Less) => {}
            Some(std::cmp::Ordering::Equal) => argmax.push(assignment),
            _ => {
                best = Some(value);
                argmax = vec![assignment];
            }
        }
    }
    Ok((best.expect("at least one assignment"), argmax))
}

/// [`all_optima`] for instances with integer data, using machine
/// arithmetic and per-block lookup tables of the inner products. Meant for
/// instances up to the default cap that are too slow to enumerate exactly.
pub fn all_optima_integer(inst: &FactorizedInstance, cap: usize) -> Result<(Rational, Vec<Assignment>)> {
    inst.validate()?;
    let total = inst.variable_count();
    check_cap(total, cap)?;
    let to_int = |v: &Rational| -> Result<i128> {
        if !v.is_integer() {
            return Err(invalid("integer enumeration needs integer coefficients"));
        }
        v.to_integer()
            .to_i64()
            .map(i128::from)
            .ok_or_else(|| invalid("coefficient does not fit in 64 bits"))
    };
    let offset = to_int(&inst.offset)?;

    // tables[t][j][mask] = ⟨c^{t,j}, x⟩ with bit i of x equal to mask >> (n - 1 - i)
    let mut tables: Vec<Vec<(usize, Vec<i128>)>> = Vec::with_capacity(inst.terms.len());
    for term in &inst.terms {
        let mut per_block = Vec::with_capacity(term.len());
        for (&j, c) in &term.coeffs {
            let n = inst.sizes[j];
            let c = c.iter().map(to_int).collect::<Result<Vec<_>>>()?;
            let table = (0usize..1 << n)
                .map(|mask| (0..n).filter(|&i| mask >> (n - 1 - i) & 1 == 1).map(|i| c[i]).sum())
                .collect();
            per_block.push((j, table));
        }
        tables.push(per_block);
    }

    let mut shifts = vec![0; inst.block_count()];
    let mut acc = 0;
    for j in (0..inst.block_count()).rev() {
        shifts[j] = acc;
        acc += inst.sizes[j];
    }
    let overflow = || invalid("objective overflows 128-bit arithmetic");
    let mut best: Option<i128> = None;
    let mut argmax = Vec::new();
    let mut masks = vec![0usize; inst.block_count()];
    for combined in 0u64..1 << total {
        for (j, m) in masks.iter_mut().enumerate() {
            *m = (combined >> shifts[j]) as usize & ((1 << inst.sizes[j]) - 1);
        }
        let mut value = offset;
        for term in &tables {
            let mut prod: i128 = 1;
            for (j, table) in term {
                prod = prod.checked_mul(table[masks[*j]]).ok_or_else(overflow)?;
                if prod == 0 {
                    break;
                }
            }
            value = value.checked_add(prod).ok_or_else(overflow)?;
        }
        match best.map(|b| value.cmp(&b)) {
            Some(std::cmp::Ordering::Less) => continue,
            Some(std::cmp::Ordering::Equal) => {}
            _ => {
                best = Some(value);
                argmax.clear();
            }
        }
        let flat: Vec<bool> = (0..total).map(|i| combined >> (total - 1 - i) & 1 == 1).collect();
        argmax.push(Assignment::split(&flat, &inst.sizes)?);
    }
    let best = best.expect("at least one assignment");
    Ok((Rational::from_integer(best.into()), argmax))
}

pub fn brute_force_explicit(inst: &ExplicitInstance, cap: usize) -> Result<(Vec<bool>, Rational)> {
    inst.validate()?;
    check_cap(inst.node_count(), cap)?;
    let mut best: Option<(Vec<bool>, Rational)> = None;
    for x in lex_vectors(inst.node_count()) {
        let value = eval_explicit(inst, &x)?;
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((x, value));
        }
    }
    Ok(best.expect("at least one assignment"))
}

/// Objective computed monomial by monomial, independently of the
/// product-of-inner-products evaluator.
pub fn eval_by_monomials(inst: &FactorizedInstance, x: &Assignment) -> Result<Rational> {
    inst.validate()?;
    x.check_shape(&inst.sizes)?;
    let mut total = inst.offset.clone();
    for term in &inst.terms {
        let blocks: Vec<usize> = term.coeffs.keys().copied().collect();
        let dims: Vec<usize> = blocks.iter().map(|&j| inst.sizes[j]).collect();
        for pick in MultiIndex::new(&dims) {
            if blocks.iter().zip(&pick).all(|(&j, &k)| x.blocks[j][k]) {
                total += blocks
                    .iter()
                    .zip(&pick)
                    .fold(Rational::one(), |acc, (&j, &k)| acc * &term.coeffs[&j][k]);
            }
        }
    }
    Ok(total)
}

/// Best binary-rank-`t` tensor by enumerating every factor assignment.
pub fn brute_force_btf(a: &DenseTensor, t: usize, cap: usize) -> Result<(DenseTensor, Rational)> {
    if t == 0 {
        return Err(invalid("factorization rank t must be at least 1"));
    }
    let width: usize = a.dims.iter().sum();
    check_cap(t * width, cap)?;
    let mut best: Option<(DenseTensor, Rational)> = None;
    for flat in lex_vectors(t * width) {
        let mut bits = flat.into_iter();
        let factors: Vec<Vec<Vec<bool>>> = (0..t)
            .map(|_| a.dims.iter().map(|&n| bits.by_ref().take(n).collect()).collect())
            .collect();
        let b = recover_tensor(&factors, &a.dims)?;
        let error = eval_tensor_objective(a, &b)?;
        if best.as_ref().is_none_or(|(_, e)| error < *e) {
            best = Some((b, error));
        }
    }
    Ok(best.expect("at least one candidate"))
}

/// Simple undirected graph on nodes `0..nodes`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for &(u, v) in &edges {
            if u == v || u >= nodes || v >= nodes {
                return Err(invalid(format!("edge ({}, {}) is not a simple edge", u + 1, v + 1)));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(invalid(format!("edge ({}, {}) repeated", u + 1, v + 1)));
            }
        }
        Ok(Self { nodes, edges })
    }

    pub fn complete(nodes: usize) -> Self {
        let edges = (0..nodes).flat_map(|u| (u + 1..nodes).map(move |v| (u, v))).collect();
        Self { nodes, edges }
    }

    pub fn cut_size(&self, side: &[bool]) -> usize {
        self.edges.iter().filter(|&&(u, v)| side[u] != side[v]).count()
    }
}

pub fn max_cut_value(g: &Graph) -> usize {
    lex_vectors(g.nodes).map(|side| g.cut_size(&side)).max().unwrap_or(0)
}

/// Two copies `x, y` of the node variables with objective
/// `Σ_{i<j, ij∈E} (x_i + y_j − 2x_i y_j) + n Σ_i (2x_i y_i − x_i − y_i)`,
/// written as `f(x) + g(y) + Σ_i h_i(x) h_i(y)`: `n + 2` terms.
pub fn maxcut_to_factorized(g: &Graph) -> Result<(FactorizedInstance, ReductionCertificate)> {
    if g.nodes == 0 {
        return Err(invalid("graph has no nodes"));
    }
    let n = g.nodes;
    let nn = int(n as i64);
    let mut later: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in &g.edges {
        later[u.min(v)].push(u.max(v));
    }
    let mut earlier_count = vec![0i64; n];
    for &(u, v) in &g.edges {
        earlier_count[u.max(v)] += 1;
    }

    let f: Vec<Rational> = later.iter().map(|l| int(l.len() as i64) - &nn).collect();
    let gy: Vec<Rational> = earlier_count.iter().map(|&c| int(c) - &nn).collect();
    let mut terms = vec![Term::singleton(0, f), Term::singleton(1, gy)];
    for (i, l) in later.iter().enumerate() {
        let mut hx = vec![Rational::zero(); n];
        hx[i] = int(2);
        let mut hy = vec![Rational::zero(); n];
        hy[i] = nn.clone();
        for &j in l {
            hy[j] -= Rational::one();
        }
        terms.push(Term::new([(0, hx), (1, hy)]));
    }
    let inst = FactorizedInstance::new(vec![n, n], terms, Rational::zero())?;
    let certificate = ReductionCertificate {
        direction: Direction::MaxCutToFactorized,
        recover: Recovery::FirstBlock,
        value_shift: Rational::zero(),
    };
    Ok((inst, certificate))
}

/// Ranges for [`gen_random`]. Inclusive bounds throughout.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomSpec {
    pub seed: u64,
    pub blocks: (usize, usize),
    pub block_size: (usize, usize),
    pub terms: (usize, usize),
    pub numerator: (i64, i64),
    pub max_denominator: i64,
    /// Chance that a block joins a term's index set (resampled when empty).
    pub block_probability: f64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            blocks: (1, 4),
            block_size: (1, 4),
            terms: (1, 4),
            numerator: (-3, 3),
            max_denominator: 3,
            block_probability: 0.5,
        }
    }
}

impl RandomSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.blocks.0 >= 1
            && self.blocks.0 <= self.blocks.1
            && self.block_size.0 >= 1
            && self.block_size.0 <= self.block_size.1
            && self.terms.0 <= self.terms.1
            && self.numerator.0 <= self.numerator.1
            && self.max_denominator >= 1
            && self.block_probability > 0.0
            && self.block_probability <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("inconsistent generator ranges {self:?}")))
        }
    }
}

fn coefficient(rng: &mut impl Rng, spec: &RandomSpec) -> Rational {
    frac(rng.gen_range(spec.numerator.0..=spec.numerator.1), rng.gen_range(1..=spec.max_denominator))
}

fn index_set(rng: &mut impl Rng, s: usize, p: f64) -> Vec<usize> {
    loop {
        let set: Vec<usize> = (0..s).filter(|_| rng.gen_bool(p)).collect();
        if !set.is_empty() {
            return set;
        }
    }
}

fn sizes(rng: &mut impl Rng, spec: &RandomSpec) -> Vec<usize> {
    let s = rng.gen_range(spec.blocks.0..=spec.blocks.1);
    (0..s).map(|_| rng.gen_range(spec.block_size.0..=spec.block_size.1)).collect()
}

pub fn gen_random(spec: &RandomSpec) -> Result<FactorizedInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sizes = sizes(&mut rng, spec);
    let count = rng.gen_range(spec.terms.0..=spec.terms.1);
    let terms = (0..count)
        .map(|_| {
            let set = index_set(&mut rng, sizes.len(), spec.block_probability);
            Term::new(set.into_iter().map(|j| (j, (0..sizes[j]).map(|_| coefficient(&mut rng, spec)).collect())))
        })
        .collect();
    FactorizedInstance::new(sizes, terms, Rational::zero())
}

/// Same shape distribution as [`gen_random`], with a shift `d` per factor.
pub fn gen_random_affine(spec: &RandomSpec) -> Result<AffineFactorizedInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sizes = sizes(&mut rng, spec);
    let count = rng.gen_range(spec.terms.0..=spec.terms.1);
    let terms = (0..count)
        .map(|_| {
            let set = index_set(&mut rng, sizes.len(), spec.block_probability);
            AffineTerm::new(set.into_iter().map(|j| {
                let c = (0..sizes[j]).map(|_| coefficient(&mut rng, spec)).collect();
                (j, AffineFactor { c, d: coefficient(&mut rng, spec) })
            }))
        })
        .collect();
    let offset = coefficient(&mut rng, spec);
    AffineFactorizedInstance::new(sizes, terms, offset)
}

/// Explicit instance with integer costs in `-3..=3`.
pub fn gen_random_explicit(seed: u64, max_nodes: usize, max_edges: usize, max_edge_size: usize) -> Result<ExplicitInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_nodes.max(1));
    let node_cost = (0..n).map(|_| int(rng.gen_range(-3..=3))).collect();
    let mut edges = Vec::new();
    if n >= 2 && max_edge_size >= 2 {
        for _ in 0..rng.gen_range(0..=max_edges) {
            let size = rng.gen_range(2..=max_edge_size.min(n));
            let mut pool: Vec<usize> = (0..n).collect();
            let mut nodes = Vec::with_capacity(size);
            for _ in 0..size {
                nodes.push(pool.swap_remove(rng.gen_range(0..pool.len())));
            }
            nodes.sort_unstable();
            edges.push(Edge { nodes, cost: int(rng.gen_range(-3..=3)) });
        }
    }
    ExplicitInstance::new(node_cost, edges)
}

/// `q` factors with entries in `-2..=2`.
pub fn gen_factored_tensor(rng: &mut impl Rng, dims: &[usize], q: usize) -> Result<FactoredTensor> {
    let factors = (0..q)
        .map(|_| dims.iter().map(|&n| (0..n).map(|_| int(rng.gen_range(-2..=2))).collect()).collect())
        .collect();
    FactoredTensor::new(dims.to_vec(), factors)
}

/// Every pair `i < j` gets `Q^{i,j} = Σ_{r<rank} a bᵀ` with small integer
/// vectors; linear parts are random or absent.
pub fn gen_quadratic(rng: &mut impl Rng, sizes: &[usize], max_rank: usize) -> Result<QuadraticInstance> {
    let s = sizes.len();
    let mut q = BTreeMap::new();
    for i in 0..s {
        for j in i + 1..s {
            let mut m = RationalMatrix::zeros(sizes[i], sizes[j]);
            for _ in 0..rng.gen_range(0..=max_rank) {
                let a: Vec<i64> = (0..sizes[i]).map(|_| rng.gen_range(-2..=2)).collect();
                let b: Vec<i64> = (0..sizes[j]).map(|_| rng.gen_range(-2..=2)).collect();
                for (r, &ar) in a.iter().enumerate() {
                    for (c, &bc) in b.iter().enumerate() {
                        let value = m.get(r, c) + int(ar * bc);
                        m.set(r, c, value);
                    }
                }
            }
            q.insert((i, j), m);
        }
    }
    let mut c = BTreeMap::new();
    for (j, &n) in sizes.iter().enumerate() {
        if rng.gen_bool(0.7) {
            c.insert(j, (0..n).map(|_| int(rng.gen_range(-3..=3))).collect());
        }
    }
    QuadraticInstance::new(sizes.to_vec(), q, c)
}
