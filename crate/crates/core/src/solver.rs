//! Recursive block elimination over hyperplane arrangements.
//!
//! The last block `x^s` enters the objective linearly once the other blocks
//! are fixed, with coefficients `h_k(λ)` that depend only on the values
//! `λ_I` of the terms shared with earlier blocks. Every cell of the
//! arrangement `{h_k = 0}` fixes one candidate for `x^s`; the block is then
//! substituted into a child instance with one block fewer, until a single
//! block remains and is set greedily. The best leaf wins.

use num_traits::{Signed, Zero};

use crate::arrangement::{cell_bound, enumerate_cells, AffineFunctional, Sign, SignVector, CELL_FACTOR};
use crate::error::{invalid, Error, Result};
use crate::instances::{compute_m, eval_factorized, AffineFactorizedInstance, Assignment, FactorizedInstance, Solution, Term};
use crate::numeric::{inner_binary, scale, Rational};
use crate::reductions::{affine_to_linear, DEFAULT_EXPANSION_LIMIT};

/// Default refusal threshold for the predicted number of leaves.
pub const DEFAULT_LEAF_BUDGET: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BlockOrder {
    /// Relabel with [`choose_order`] before solving.
    #[default]
    Auto,
    Identity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub order: BlockOrder,
    pub leaf_budget: u128,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            order: BlockOrder::Auto,
            leaf_budget: DEFAULT_LEAF_BUDGET,
        }
    }
}

/// Term indices split by their relation to the last block.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TermPartition {
    /// Terms without the last block.
    pub alpha: Vec<usize>,
    /// Terms strictly containing the last block.
    pub beta: Vec<usize>,
    /// Terms equal to `{last}`.
    pub gamma: Vec<usize>,
}

/// Predicted arrangement sizes, from the last block down to block 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BudgetReport {
    /// `per_level[i]` bounds the number of cells when block `s - i` is eliminated.
    pub per_level: Vec<u128>,
    /// Running products of `per_level`.
    pub cumulative: Vec<u128>,
    /// Predicted number of leaves (product of all levels, at least 1).
    pub total: u128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveStats {
    pub leaves_explored: u64,
    pub budget: BudgetReport,
    /// `order[p]` is the input block placed at position `p` while solving.
    pub order: Vec<usize>,
}

pub fn partition_terms(inst: &FactorizedInstance) -> Result<TermPartition> {
    let s = inst.block_count();
    if s < 2 {
        return Err(invalid(format!("term partition needs at least 2 blocks, got {s}")));
    }
    let last = s - 1;
    let mut part = TermPartition::default();
    for (t, term) in inst.terms.iter().enumerate() {
        match (term.contains(last), term.len()) {
            (false, _) => part.alpha.push(t),
            (true, 1) => part.gamma.push(t),
            (true, _) => part.beta.push(t),
        }
    }
    Ok(part)
}

/// `h_k(λ) = Σ_{β} λ_I c^{I,s}_k + Σ_{γ} c^{I,s}_k` for every coordinate `k` of the last block.
pub fn build_functionals(inst: &FactorizedInstance, part: &TermPartition) -> Vec<AffineFunctional> {
    let last = inst.block_count() - 1;
    let column = |t: usize| inst.terms[t].coeffs(last).expect("term contains the last block");
    (0..inst.sizes[last])
        .map(|k| {
            let linear = part.beta.iter().map(|&t| column(t)[k].clone()).collect();
            let constant = part
                .gamma
                .iter()
                .fold(Rational::zero(), |acc, &t| acc + &column(t)[k]);
            AffineFunctional::new(linear, constant)
        })
        .collect()
}

/// `λ_I = ∏_{j∈I∖{s}} ⟨c^{I,j}, x^j⟩` for every β-term, in partition order.
pub fn lambda_at(inst: &FactorizedInstance, part: &TermPartition, x: &Assignment) -> Vec<Rational> {
    let last = inst.block_count() - 1;
    part.beta
        .iter()
        .map(|&t| {
            inst.terms[t]
                .coeffs
                .iter()
                .filter(|(&j, _)| j != last)
                .fold(Rational::from_integer(1.into()), |acc, (&j, c)| acc * inner_binary(c, &x.blocks[j]))
        })
        .collect()
}

/// `x̄_k = 1` exactly where the cell has `h_k ≥ 0`.
pub fn partial_solution(signs: &SignVector) -> Vec<bool> {
    signs.0.iter().map(|&s| s == Sign::Pos).collect()
}

/// Fixes the last block to `fixed` and absorbs the resulting scalars.
///
/// β-terms whose scalar `⟨c^{I,s}, x̄⟩` vanishes are dropped; the others lose
/// block `s` and have their smallest remaining block rescaled. γ-terms move
/// into the offset.
pub fn build_child(inst: &FactorizedInstance, part: &TermPartition, fixed: &[bool]) -> FactorizedInstance {
    let last = inst.block_count() - 1;
    let mut terms: Vec<Term> = part.alpha.iter().map(|&t| inst.terms[t].clone()).collect();
    for &t in &part.beta {
        let term = &inst.terms[t];
        let scalar = inner_binary(term.coeffs(last).expect("β-term"), fixed);
        if scalar.is_zero() {
            continue;
        }
        let mut coeffs = term.coeffs.clone();
        coeffs.remove(&last);
        let (_, first) = coeffs.iter_mut().next().expect("β-term has another block");
        *first = scale(first, &scalar);
        terms.push(Term { coeffs });
    }
    let offset = part.gamma.iter().fold(inst.offset.clone(), |acc, &t| {
        acc + inner_binary(inst.terms[t].coeffs(last).expect("γ-term"), fixed)
    });
    FactorizedInstance {
        sizes: inst.sizes[..last].to_vec(),
        terms,
        offset,
    }
}

/// Single-block case: take every coordinate with a positive column sum.
pub fn solve_base(inst: &FactorizedInstance) -> Result<Solution> {
    if inst.block_count() != 1 {
        return Err(invalid(format!(
            "base case needs exactly 1 block, got {}",
            inst.block_count()
        )));
    }
    let n = inst.sizes[0];
    let mut sums = vec![Rational::zero(); n];
    for term in &inst.terms {
        for (acc, c) in sums.iter_mut().zip(term.coeffs(0).expect("single-block term")) {
            *acc += c;
        }
    }
    let bits: Vec<bool> = sums.iter().map(Signed::is_positive).collect();
    let value = sums
        .iter()
        .zip(&bits)
        .filter(|(_, &b)| b)
        .fold(inst.offset.clone(), |acc, (v, _)| acc + v);
    Ok(Solution {
        assignment: Assignment::new(vec![bits]),
        value,
    })
}

/// Block order heuristic: the block with the largest `m_j` goes first (it is
/// never the dimension of an arrangement); the rest keep their input order.
pub fn choose_order(inst: &FactorizedInstance) -> Vec<usize> {
    let m = compute_m(inst);
    let s = m.len();
    let Some(top) = (0..s).rev().max_by_key(|&j| m[j]) else {
        return Vec::new();
    };
    if m[top] == m[0] {
        return (0..s).collect();
    }
    std::iter::once(top).chain((0..s).filter(|&j| j != top)).collect()
}

/// Instance with block `order[p]` moved to position `p`.
pub fn relabel(inst: &FactorizedInstance, order: &[usize]) -> FactorizedInstance {
    let mut position = vec![0; order.len()];
    for (p, &j) in order.iter().enumerate() {
        position[j] = p;
    }
    FactorizedInstance {
        sizes: order.iter().map(|&j| inst.sizes[j]).collect(),
        terms: inst
            .terms
            .iter()
            .map(|t| Term::new(t.coeffs.iter().map(|(&j, c)| (position[j], c.clone()))))
            .collect(),
        offset: inst.offset.clone(),
    }
}

pub fn check_budget(inst: &FactorizedInstance) -> BudgetReport {
    let m = compute_m(inst);
    let per_level: Vec<u128> = (1..inst.block_count())
        .rev()
        .map(|j| CELL_FACTOR.saturating_mul(cell_bound(inst.sizes[j], m[j])))
        .collect();
    let mut cumulative = Vec::with_capacity(per_level.len());
    let mut total: u128 = 1;
    for &level in &per_level {
        total = total.saturating_mul(level);
        cumulative.push(total);
    }
    BudgetReport {
        per_level,
        cumulative,
        total,
    }
}

pub fn solve(inst: &FactorizedInstance, options: &SolveOptions) -> Result<Solution> {
    solve_with_stats(inst, options).map(|(sol, _)| sol)
}

/// Exact maximizer. Among the optimal leaves, the lexicographically smallest
/// assignment (blocks in input order, `0 < 1`) is returned.
pub fn solve_with_stats(inst: &FactorizedInstance, options: &SolveOptions) -> Result<(Solution, SolveStats)> {
    inst.validate()?;
    let order = match options.order {
        BlockOrder::Auto => choose_order(inst),
        BlockOrder::Identity => (0..inst.block_count()).collect(),
    };
    let working = relabel(inst, &order);
    let budget = check_budget(&working);
    if budget.total > options.leaf_budget {
        return Err(Error::Budget {
            what: format!("predicted leaves (per level {:?})", budget.per_level),
            needed: budget.total,
            limit: options.leaf_budget,
        });
    }

    let mut search = Search {
        order: &order,
        cell_limit: options.leaf_budget,
        suffix: Vec::new(),
        best: None,
        leaves: 0,
    };
    search.descend(&working)?;
    let (assignment, value) = search.best.expect("at least one leaf");
    debug_assert_eq!(eval_factorized(inst, &assignment).ok(), Some(value.clone()));
    let stats = SolveStats {
        leaves_explored: search.leaves,
        budget,
        order,
    };
    Ok((Solution { assignment, value }, stats))
}

/// Maximizes an affine instance by expanding it into a linear one.
pub fn solve_affine(inst: &AffineFactorizedInstance, options: &SolveOptions) -> Result<Solution> {
    let linear = affine_to_linear(inst, DEFAULT_EXPANSION_LIMIT)?;
    solve(&linear, options)
}

struct Search<'a> {
    order: &'a [usize],
    cell_limit: u128,
    /// Fixed blocks for positions `s-1, s-2, ...` of the working instance.
    suffix: Vec<Vec<bool>>,
    best: Option<(Assignment, Rational)>,
    leaves: u64,
}

impl Search<'_> {
    fn descend(&mut self, inst: &FactorizedInstance) -> Result<()> {
        let s = inst.block_count();
        if s == 1 {
            let base = solve_base(inst)?;
            self.record(base);
            return Ok(());
        }
        let part = partition_terms(inst)?;
        let functionals = build_functionals(inst, &part);
        for signs in enumerate_cells(part.beta.len(), &functionals, self.cell_limit)? {
            let fixed = partial_solution(&signs);
            let child = build_child(inst, &part, &fixed);
            self.suffix.push(fixed);
            let outcome = self.descend(&child);
            self.suffix.pop();
            outcome?;
        }
        Ok(())
    }

    fn record(&mut self, base: Solution) {
        self.leaves += 1;
        let mut blocks = vec![Vec::new(); self.order.len()];
        let permuted = base.assignment.blocks.into_iter().chain(self.suffix.iter().rev().cloned());
        for (p, bits) in permuted.enumerate() {
            blocks[self.order[p]] = bits;
        }
        let candidate = Assignment::new(blocks);
        let better = match &self.best {
            None => true,
            Some((a, v)) => base.value > *v || (base.value == *v && candidate < *a),
        };
        if better {
            self.best = Some((candidate, base.value));
        }
    }
}
