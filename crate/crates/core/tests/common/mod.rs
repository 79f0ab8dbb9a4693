#![allow(dead_code)]

use std::collections::BTreeSet;

use facpoly::arrangement::{AffineFunctional, Sign, SignVector};
use facpoly::{frac, int, Assignment, Rational, RationalMatrix};
use num_traits::Zero;
use rand::Rng;

pub fn v(vals: &[i64]) -> Vec<Rational> {
    vals.iter().map(|&x| int(x)).collect()
}

/// Every assignment of the given block sizes.
pub fn assignments(sizes: &[usize]) -> Vec<Assignment> {
    let total: usize = sizes.iter().sum();
    (0u64..1 << total)
        .map(|mask| {
            let flat: Vec<bool> = (0..total).map(|i| mask >> i & 1 == 1).collect();
            Assignment::split(&flat, sizes).unwrap()
        })
        .collect()
}

/// Maximum of `f` over all assignments.
pub fn exhaustive_max(sizes: &[usize], f: impl Fn(&Assignment) -> Rational) -> Rational {
    assignments(sizes).iter().map(f).max().expect("nonempty")
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Any `k ≤ d` hyperplanes meet in a flat of dimension `d − k` and no
/// `d + 1` share a point.
pub fn is_generic(dim: usize, fs: &[AffineFunctional]) -> bool {
    for k in 1..=dim.min(fs.len()) {
        for set in subsets(fs.len(), k) {
            let rows = set.iter().map(|&i| fs[i].linear.clone()).collect();
            if RationalMatrix::from_rows(rows).unwrap().rank() != k {
                return false;
            }
        }
    }
    if fs.len() > dim {
        for set in subsets(fs.len(), dim + 1) {
            let rows = set
                .iter()
                .map(|&i| {
                    let mut r = fs[i].linear.clone();
                    r.push(fs[i].constant.clone());
                    r
                })
                .collect();
            if RationalMatrix::from_rows(rows).unwrap().rank() != dim + 1 {
                return false;
            }
        }
    }
    true
}

/// Intersection point of `dim` hyperplanes, if it is unique.
fn vertex(fs: &[&AffineFunctional], dim: usize) -> Option<Vec<Rational>> {
    let rows = fs
        .iter()
        .map(|f| {
            let mut r = f.linear.clone();
            r.push(-f.constant.clone());
            r
        })
        .collect();
    let (rref, pivots) = RationalMatrix::from_rows(rows).unwrap().reduced_row_echelon();
    if pivots != (0..dim).collect::<Vec<_>>() {
        return None;
    }
    Some((0..dim).map(|i| rref.get(i, dim).clone()).collect())
}

fn signs_at(fs: &[AffineFunctional], p: &[Rational]) -> Option<SignVector> {
    let mut out = Vec::with_capacity(fs.len());
    for f in fs {
        let s = Sign::of(&f.eval(p));
        if f.is_identically_zero() {
            out.push(Sign::Pos);
        } else if s == Sign::Zero {
            return None;
        } else {
            out.push(s);
        }
    }
    Some(SignVector(out))
}

/// Sign vectors seen at sample points that avoid every hyperplane: a grid
/// with step 1/2 on `[-6, 6]^d`, plus small perturbations of every vertex
/// along skewed directions.
pub fn sample_cells(dim: usize, fs: &[AffineFunctional]) -> BTreeSet<SignVector> {
    let mut found = BTreeSet::new();
    let mut add = |p: &[Rational]| {
        if let Some(s) = signs_at(fs, p) {
            found.insert(s);
        }
    };
    let axis: Vec<Rational> = (-12..=12).map(|i| frac(i, 2)).collect();
    let mut point = vec![Rational::zero(); dim];
    let mut idx = vec![0usize; dim];
    loop {
        for (c, &i) in point.iter_mut().zip(&idx) {
            *c = axis[i].clone();
        }
        add(&point);
        let mut pos = 0;
        while pos < dim {
            idx[pos] += 1;
            if idx[pos] < axis.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == dim {
            break;
        }
    }

    let proper: Vec<&AffineFunctional> = fs.iter().filter(|f| !f.is_degenerate()).collect();
    let skew: Vec<Rational> = (0..dim).map(|i| frac(1, 7i64.pow(i as u32))).collect();
    for set in subsets(proper.len(), dim.min(proper.len())) {
        let chosen: Vec<&AffineFunctional> = set.iter().map(|&i| proper[i]).collect();
        let Some(v) = vertex(&chosen, dim) else {
            continue;
        };
        for signs in 0u32..1 << dim {
            let p: Vec<Rational> = (0..dim)
                .map(|i| {
                    let dir = if signs >> i & 1 == 1 { int(1) } else { int(-1) };
                    &v[i] + dir * &skew[i] * frac(1, 1000)
                })
                .collect();
            add(&p);
        }
    }
    found
}

pub fn random_functional(rng: &mut impl Rng, dim: usize, range: i64) -> AffineFunctional {
    AffineFunctional::new(
        (0..dim).map(|_| frac(rng.gen_range(-range..=range), rng.gen_range(1..=2))).collect(),
        int(rng.gen_range(-range..=range)),
    )
}

/// Arrangement with duplicates, parallels and zero functionals mixed in.
pub fn degenerate_arrangement(rng: &mut impl Rng, dim: usize, n: usize) -> Vec<AffineFunctional> {
    let mut fs: Vec<AffineFunctional> = Vec::with_capacity(n);
    while fs.len() < n {
        let choice = rng.gen_range(0..5);
        let f = match (choice, fs.last()) {
            (1, Some(prev)) => AffineFunctional::new(
                prev.linear.iter().map(|a| a * int(-2)).collect(),
                &prev.constant * int(-2),
            ),
            (2, Some(prev)) => AffineFunctional::new(prev.linear.clone(), &prev.constant + int(1)),
            (3, _) => AffineFunctional::new(vec![Rational::zero(); dim], int(rng.gen_range(-1..=1))),
            _ => random_functional(rng, dim, 2),
        };
        fs.push(f);
    }
    fs
}
