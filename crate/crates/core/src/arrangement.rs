//! Exact cell enumeration for arrangements of affine hyperplanes in ℚ^d.
//!
//! Cells are found by recursing onto the hyperplanes themselves: every cell
//! of a nonempty arrangement has a facet, that facet contains a cell of the
//! arrangement induced on its supporting hyperplane, and stepping off that
//! induced cell to either side lands in a full-dimensional cell. Each
//! reported cell carries an exact interior witness point, so the output
//! contains no spurious sign vectors and at most `Σ_{i≤d} C(n,i)` entries,
//! where `n` counts distinct non-degenerate hyperplanes.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{mismatch, Error, Result};
use crate::numeric::{abs, dot, frac, Rational};

/// Factor between the cell-count bound `Σ_{i≤d} C(n,i)` and the number of
/// sign vectors reported. The enumeration is exact, so this is 1.
pub const CELL_FACTOR: u128 = 1;

/// Default refusal threshold for the predicted number of cells.
pub const DEFAULT_CELL_LIMIT: u128 = 10_000_000;

/// `λ ↦ ⟨linear, λ⟩ + constant`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineFunctional {
    pub linear: Vec<Rational>,
    pub constant: Rational,
}

impl AffineFunctional {
    pub fn new(linear: Vec<Rational>, constant: Rational) -> Self {
        Self { linear, constant }
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    /// Zero linear part: the "hyperplane" is empty or everything.
    pub fn is_degenerate(&self) -> bool {
        self.linear.iter().all(Zero::is_zero)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.is_degenerate() && self.constant.is_zero()
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        dot(&self.linear, point) + &self.constant
    }

    /// Scaled so the first nonzero linear coefficient is 1.
    fn canonical(&self) -> Option<Self> {
        let lead = self.linear.iter().find(|v| !v.is_zero())?;
        let inv = lead.recip();
        Some(Self {
            linear: self.linear.iter().map(|v| v * &inv).collect(),
            constant: &self.constant * &inv,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of(value: &Rational) -> Self {
        if value.is_positive() {
            Sign::Pos
        } else if value.is_negative() {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Neg => '-',
            Sign::Zero => '0',
            Sign::Pos => '+',
        }
    }
}

/// One sign per functional. Cell signings only use `Pos` and `Neg`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignVector(pub Vec<Sign>);

impl SignVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parse(text: &str) -> Option<Self> {
        text.chars()
            .map(|c| match c {
                '+' => Some(Sign::Pos),
                '-' => Some(Sign::Neg),
                '0' => Some(Sign::Zero),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(SignVector)
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.symbol())?;
        }
        Ok(())
    }
}

/// A full-dimensional cell and a point in its interior.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub signs: SignVector,
    pub witness: Vec<Rational>,
}

/// `Σ_{i=0}^{d} C(n, i)`, saturating.
pub fn cell_bound(hyperplanes: usize, dim: usize) -> u128 {
    let n = hyperplanes as u128;
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for i in 0..=dim.min(hyperplanes) as u128 {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul(n - i) / (i + 1);
    }
    total
}

/// Exact sign of every functional at `point`.
pub fn sign_at_point(functionals: &[AffineFunctional], point: &[Rational]) -> Result<Vec<Sign>> {
    functionals
        .iter()
        .enumerate()
        .map(|(k, h)| {
            if h.dim() != point.len() {
                return Err(mismatch(format!(
                    "functional {} has dimension {}, point has {}",
                    k + 1,
                    h.dim(),
                    point.len()
                )));
            }
            Ok(Sign::of(&h.eval(point)))
        })
        .collect()
}

/// Sign vectors of all cells, sorted lexicographically (`-` before `+`).
///
/// Positions whose functional has zero linear part carry the sign of its
/// constant in every vector, and `+` when the functional is identically zero.
pub fn enumerate_cells(dim: usize, functionals: &[AffineFunctional], limit: u128) -> Result<Vec<SignVector>> {
    Ok(enumerate_cells_with_witnesses(dim, functionals, limit)?
        .into_iter()
        .map(|c| c.signs)
        .collect())
}

pub fn enumerate_cells_with_witnesses(
    dim: usize,
    functionals: &[AffineFunctional],
    limit: u128,
) -> Result<Vec<Cell>> {
    if let Some((k, h)) = functionals.iter().enumerate().find(|(_, h)| h.dim() != dim) {
        return Err(mismatch(format!(
            "functional {} has dimension {}, arrangement has {dim}",
            k + 1,
            h.dim()
        )));
    }
    let hyperplanes = distinct_hyperplanes(functionals.iter());
    let predicted = CELL_FACTOR.saturating_mul(cell_bound(hyperplanes.len(), dim));
    if predicted > limit {
        return Err(Error::Budget {
            what: format!("arrangement of {} hyperplanes in dimension {dim}", hyperplanes.len()),
            needed: predicted,
            limit,
        });
    }

    let mut cells: BTreeMap<SignVector, Vec<Rational>> = BTreeMap::new();
    for point in witnesses(dim, &hyperplanes) {
        let signs = functionals
            .iter()
            .map(|h| match Sign::of(&h.eval(&point)) {
                Sign::Zero => {
                    debug_assert!(h.is_identically_zero());
                    Sign::Pos
                }
                s => s,
            })
            .collect();
        cells.entry(SignVector(signs)).or_insert(point);
    }
    Ok(cells
        .into_iter()
        .map(|(signs, witness)| Cell { signs, witness })
        .collect())
}

/// Non-degenerate functionals, canonically scaled, duplicates removed.
fn distinct_hyperplanes<'a>(functionals: impl Iterator<Item = &'a AffineFunctional>) -> Vec<AffineFunctional> {
    let mut seen = Vec::<AffineFunctional>::new();
    for h in functionals.filter_map(AffineFunctional::canonical) {
        if !seen.contains(&h) {
            seen.push(h);
        }
    }
    seen
}

/// One interior point per cell of the arrangement of `hyperplanes`, which
/// must be non-degenerate and pairwise distinct.
fn witnesses(dim: usize, hyperplanes: &[AffineFunctional]) -> Vec<Vec<Rational>> {
    if dim == 0 || hyperplanes.is_empty() {
        return vec![vec![Rational::zero(); dim]];
    }
    if dim == 1 {
        return line_witnesses(hyperplanes);
    }

    let mut found: BTreeMap<Vec<bool>, Vec<Rational>> = BTreeMap::new();
    for (k, h) in hyperplanes.iter().enumerate() {
        let flat = Flat::of(h);
        let others: Vec<&AffineFunctional> = hyperplanes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, g)| g)
            .collect();
        let restricted: Vec<AffineFunctional> = others.iter().map(|g| flat.restrict(g)).collect();
        let induced = distinct_hyperplanes(restricted.iter());

        // how fast each other functional moves along the normal of h
        let rates: Vec<Rational> = others.iter().map(|g| dot(&g.linear, &h.linear)).collect();

        for u in witnesses(dim - 1, &induced) {
            let q = flat.point(&u);
            let values: Vec<Rational> = others.iter().map(|g| g.eval(&q)).collect();
            // every other hyperplane is strictly off q; stay inside that margin
            let step = values
                .iter()
                .zip(&rates)
                .filter(|(_, r)| !r.is_zero())
                .map(|(v, r)| abs(v) / abs(r))
                .min()
                .map_or_else(Rational::one, |m| m * frac(1, 2));
            for direction in [-1i64, 1] {
                let delta = &step * frac(direction, 1);
                let p: Vec<Rational> = q.iter().zip(&h.linear).map(|(qi, ai)| qi + &delta * ai).collect();
                let key: Vec<bool> = hyperplanes.iter().map(|g| g.eval(&p).is_positive()).collect();
                found.entry(key).or_insert(p);
            }
        }
    }
    found.into_values().collect()
}

fn line_witnesses(hyperplanes: &[AffineFunctional]) -> Vec<Vec<Rational>> {
    // canonical form has linear = [1], so the root is -constant
    let mut roots: Vec<Rational> = hyperplanes.iter().map(|h| -&h.constant).collect();
    roots.sort();
    roots.dedup();
    let mut points = Vec::with_capacity(roots.len() + 1);
    points.push(vec![&roots[0] - Rational::one()]);
    for pair in roots.windows(2) {
        points.push(vec![(&pair[0] + &pair[1]) * frac(1, 2)]);
    }
    points.push(vec![roots[roots.len() - 1].clone() + Rational::one()]);
    points
}

/// Parametrization `u ↦ base + Σ_j u_j b_j` of a hyperplane `⟨a,λ⟩ + b = 0`
/// with `a[pivot] = 1`: the free coordinates are all but `pivot`.
struct Flat {
    pivot: usize,
    normal: Vec<Rational>,
    constant: Rational,
}

impl Flat {
    fn of(h: &AffineFunctional) -> Self {
        let pivot = h
            .linear
            .iter()
            .position(|v| !v.is_zero())
            .expect("hyperplane is non-degenerate");
        debug_assert!(h.linear[pivot].is_one());
        Self {
            pivot,
            normal: h.linear.clone(),
            constant: h.constant.clone(),
        }
    }

    fn point(&self, u: &[Rational]) -> Vec<Rational> {
        let dim = self.normal.len();
        let mut p = Vec::with_capacity(dim);
        let mut free = u.iter();
        for j in 0..dim {
            if j == self.pivot {
                p.push(Rational::zero());
            } else {
                p.push(free.next().expect("u has dim - 1 entries").clone());
            }
        }
        let mut pivot_value = -&self.constant;
        for (j, a) in self.normal.iter().enumerate() {
            if j != self.pivot && !a.is_zero() {
                pivot_value -= a * &p[j];
            }
        }
        p[self.pivot] = pivot_value;
        p
    }

    fn restrict(&self, g: &AffineFunctional) -> AffineFunctional {
        let gp = &g.linear[self.pivot];
        let linear = (0..self.normal.len())
            .filter(|&j| j != self.pivot)
            .map(|j| &g.linear[j] - gp * &self.normal[j])
            .collect();
        let constant = &g.constant - gp * &self.constant;
        AffineFunctional { linear, constant }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::int;
    use rand::{Rng, SeedableRng};

    fn f(linear: &[i64], constant: i64) -> AffineFunctional {
        AffineFunctional::new(linear.iter().map(|&v| int(v)).collect(), int(constant))
    }

    fn strs(cells: &[SignVector]) -> Vec<String> {
        cells.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn three_intervals_on_a_line() {
        let cells = enumerate_cells(1, &[f(&[1], 0), f(&[1], -1)], DEFAULT_CELL_LIMIT).unwrap();
        assert_eq!(strs(&cells), vec!["--", "+-", "++"]);
    }

    #[test]
    fn three_generic_lines_make_seven_cells() {
        let lines = [f(&[1, 0], 0), f(&[0, 1], 0), f(&[1, 1], -1)];
        let cells = enumerate_cells(2, &lines, DEFAULT_CELL_LIMIT).unwrap();
        assert_eq!(cells.len(), 7);
        assert!(!cells.contains(&SignVector::parse("--+").unwrap()));
    }

    #[test]
    fn concurrent_lines_make_six_cells() {
        let lines = [f(&[1, 0], 0), f(&[0, 1], 0), f(&[1, 1], 0)];
        assert_eq!(enumerate_cells(2, &lines, DEFAULT_CELL_LIMIT).unwrap().len(), 6);
    }

    #[test]
    fn skewed_lines_through_a_vertex() {
        // y = 0 and y = 2x; axis-aligned probing would land on y = 0
        let lines = [f(&[0, 1], 0), f(&[-2, 1], 0)];
        assert_eq!(enumerate_cells(2, &lines, DEFAULT_CELL_LIMIT).unwrap().len(), 4);
    }

    #[test]
    fn forced_positions() {
        let hs = [f(&[0, 0], 0), f(&[1, 0], 0), f(&[0, 0], -3), f(&[0, 0], 2), f(&[2, 0], 0)];
        let cells = enumerate_cells(2, &hs, DEFAULT_CELL_LIMIT).unwrap();
        assert_eq!(strs(&cells), vec!["+--+-", "++-++"]);
    }

    #[test]
    fn duplicates_and_parallels() {
        // λ₁ = 0 twice (one negated), λ₁ = 1 parallel, λ₂ = 0
        let hs = [f(&[1, 0], 0), f(&[-3, 0], 0), f(&[1, 0], -1), f(&[0, 1], 0)];
        let cells = enumerate_cells(2, &hs, DEFAULT_CELL_LIMIT).unwrap();
        assert_eq!(cells.len(), 6);
        for c in &cells {
            assert_ne!(c.0[0], c.0[1]);
        }
    }

    #[test]
    fn trivial_arrangements() {
        assert_eq!(strs(&enumerate_cells(0, &[f(&[], 2), f(&[], 0)], 10).unwrap()), vec!["++"]);
        assert_eq!(enumerate_cells(3, &[], 10).unwrap(), vec![SignVector(vec![])]);
    }

    #[test]
    fn refuses_over_budget() {
        let hs: Vec<_> = (0..10).map(|k| f(&[1, k], k * k)).collect();
        assert!(matches!(enumerate_cells(2, &hs, 5), Err(Error::Budget { .. })));
    }

    #[test]
    fn rejects_mixed_dimensions() {
        assert!(enumerate_cells(2, &[f(&[1], 0)], 10).is_err());
        assert!(sign_at_point(&[f(&[1, 1], 0)], &[int(1)]).is_err());
    }

    #[test]
    fn sign_at_point_examples() {
        assert_eq!(sign_at_point(&[f(&[1], 0)], &[int(0)]).unwrap(), vec![Sign::Zero]);
        assert_eq!(sign_at_point(&[f(&[1], -1)], &[int(2)]).unwrap(), vec![Sign::Pos]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let h = f(&[rng.gen_range(-3..=3), rng.gen_range(-3..=3)], rng.gen_range(-3..=3));
            let p = [int(rng.gen_range(-3..=3)), int(rng.gen_range(-3..=3))];
            let direct = &h.linear[0] * &p[0] + &h.linear[1] * &p[1] + &h.constant;
            assert_eq!(sign_at_point(&[h], &p).unwrap()[0], Sign::of(&direct));
        }
    }

    #[test]
    fn cell_bound_values() {
        assert_eq!(cell_bound(3, 2), 7);
        assert_eq!(cell_bound(5, 1), 6);
        assert_eq!(cell_bound(0, 3), 1);
        assert_eq!(cell_bound(2, 5), 4);
    }

    #[test]
    fn witnesses_are_interior() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..40 {
            let d = rng.gen_range(1..=3);
            let n = rng.gen_range(0..=6);
            let hs: Vec<_> = (0..n)
                .map(|_| {
                    AffineFunctional::new(
                        (0..d).map(|_| frac(rng.gen_range(-3..=3), rng.gen_range(1..=3))).collect(),
                        int(rng.gen_range(-3..=3)),
                    )
                })
                .collect();
            for cell in enumerate_cells_with_witnesses(d, &hs, DEFAULT_CELL_LIMIT).unwrap() {
                let at = sign_at_point(&hs, &cell.witness).unwrap();
                for (k, (s, h)) in at.iter().zip(&hs).enumerate() {
                    if h.is_identically_zero() {
                        assert_eq!(*s, Sign::Zero);
                        assert_eq!(cell.signs.0[k], Sign::Pos);
                    } else {
                        assert_eq!(*s, cell.signs.0[k]);
                    }
                }
            }
        }
    }
}
