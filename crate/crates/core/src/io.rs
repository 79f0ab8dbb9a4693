//! JSON documents. Block, node and mode indices are 1-based in files and
//! 0-based in memory; rationals are written as `"p/q"` strings and read
//! from strings or integers.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arrangement::AffineFunctional;
use crate::error::{invalid, Error, Result};
use crate::instances::{
    AffineFactor, AffineFactorizedInstance, AffineTerm, Assignment, DenseTensor, Edge, ExplicitInstance,
    FactoredTensor, FactorizedInstance, Term,
};
use crate::numeric::{format_rational, parse_rational, Rational, RationalMatrix};
use crate::reductions::QuadraticInstance;

/// A type with a JSON file representation.
pub trait Document: Sized {
    fn from_json(text: &str) -> Result<Self>;
    fn to_json(&self) -> String;
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RatRepr {
    Int(i64),
    Text(String),
}

impl RatRepr {
    fn value(&self) -> Result<Rational> {
        match self {
            RatRepr::Int(v) => Ok(Rational::from_integer((*v).into())),
            RatRepr::Text(s) => parse_rational(s),
        }
    }

    fn of(value: &Rational) -> Self {
        RatRepr::Text(format_rational(value))
    }
}

fn values(reprs: &[RatRepr]) -> Result<Vec<Rational>> {
    reprs.iter().map(RatRepr::value).collect()
}

fn reprs(values: &[Rational]) -> Vec<RatRepr> {
    values.iter().map(RatRepr::of).collect()
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn render<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("documents serialize")
}

/// 1-based file index to 0-based, checking `1..=count`.
fn index(one_based: usize, count: usize, what: impl FnOnce() -> String) -> Result<usize> {
    if one_based == 0 || one_based > count {
        return Err(invalid(format!("{}: index {one_based} out of range 1..={count}", what())));
    }
    Ok(one_based - 1)
}

fn block_key(key: &str, what: impl FnOnce() -> String) -> Result<usize> {
    key.trim()
        .parse::<usize>()
        .map_err(|_| invalid(format!("{}: block key {key:?} is not a number", what())))
}

fn check_count(declared: usize, sizes: &[usize]) -> Result<()> {
    if declared != sizes.len() {
        return Err(invalid(format!("s = {declared} but n lists {} block sizes", sizes.len())));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    #[serde(rename = "I")]
    index_set: Vec<usize>,
    c: BTreeMap<String, Vec<RatRepr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<BTreeMap<String, RatRepr>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorizedDoc {
    s: usize,
    n: Vec<usize>,
    #[serde(default = "zero_repr")]
    offset: RatRepr,
    terms: Vec<TermDoc>,
}

fn zero_repr() -> RatRepr {
    RatRepr::Int(0)
}

/// Term coefficients keyed by 0-based block, with the key set checked
/// against `I`.
fn term_coeffs(t: usize, term: &TermDoc, s: usize) -> Result<BTreeMap<usize, Vec<Rational>>> {
    let what = || format!("term {}", t + 1);
    let mut set = Vec::with_capacity(term.index_set.len());
    for &j in &term.index_set {
        set.push(index(j, s, what)?);
    }
    let mut coeffs = BTreeMap::new();
    for (key, c) in &term.c {
        let j = index(block_key(key, what)?, s, what)?;
        if !set.contains(&j) {
            return Err(invalid(format!("term {}: coefficients given for block {} not in I", t + 1, j + 1)));
        }
        coeffs.insert(j, values(c)?);
    }
    if let Some(&j) = set.iter().find(|j| !coeffs.contains_key(j)) {
        return Err(invalid(format!("term {}: block {} in I has no coefficients", t + 1, j + 1)));
    }
    Ok(coeffs)
}

fn term_doc(coeffs: &BTreeMap<usize, Vec<Rational>>) -> TermDoc {
    TermDoc {
        index_set: coeffs.keys().map(|j| j + 1).collect(),
        c: coeffs.iter().map(|(j, c)| ((j + 1).to_string(), reprs(c))).collect(),
        d: None,
    }
}

impl Document for FactorizedInstance {
    fn from_json(text: &str) -> Result<Self> {
        let doc: FactorizedDoc = parse(text)?;
        check_count(doc.s, &doc.n)?;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for (t, term) in doc.terms.iter().enumerate() {
            if term.d.is_some() {
                return Err(invalid(format!("term {}: shifts d belong to affine instances", t + 1)));
            }
            terms.push(Term { coeffs: term_coeffs(t, term, doc.s)? });
        }
        FactorizedInstance::new(doc.n, terms, doc.offset.value()?)
    }

    fn to_json(&self) -> String {
        render(&FactorizedDoc {
            s: self.block_count(),
            n: self.sizes.clone(),
            offset: RatRepr::of(&self.offset),
            terms: self.terms.iter().map(|t| term_doc(&t.coeffs)).collect(),
        })
    }
}

impl Document for AffineFactorizedInstance {
    fn from_json(text: &str) -> Result<Self> {
        let doc: FactorizedDoc = parse(text)?;
        check_count(doc.s, &doc.n)?;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for (t, term) in doc.terms.iter().enumerate() {
            let coeffs = term_coeffs(t, term, doc.s)?;
            let mut shifts: BTreeMap<usize, Rational> = BTreeMap::new();
            for (key, d) in term.d.iter().flatten() {
                let what = || format!("term {}", t + 1);
                let j = index(block_key(key, what)?, doc.s, what)?;
                if !coeffs.contains_key(&j) {
                    return Err(invalid(format!("term {}: shift given for block {} not in I", t + 1, j + 1)));
                }
                shifts.insert(j, d.value()?);
            }
            terms.push(AffineTerm::new(coeffs.into_iter().map(|(j, c)| {
                let d = shifts.remove(&j).unwrap_or_else(Rational::zero);
                (j, AffineFactor { c, d })
            })));
        }
        AffineFactorizedInstance::new(doc.n, terms, doc.offset.value()?)
    }

    fn to_json(&self) -> String {
        let terms = self
            .terms
            .iter()
            .map(|t| TermDoc {
                index_set: t.factors.keys().map(|j| j + 1).collect(),
                c: t.factors.iter().map(|(j, f)| ((j + 1).to_string(), reprs(&f.c))).collect(),
                d: Some(t.factors.iter().map(|(j, f)| ((j + 1).to_string(), RatRepr::of(&f.d))).collect()),
            })
            .collect();
        render(&FactorizedDoc {
            s: self.block_count(),
            n: self.sizes.clone(),
            offset: RatRepr::of(&self.offset),
            terms,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    set: Vec<usize>,
    cost: RatRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitDoc {
    nodes: usize,
    #[serde(rename = "nodeCost")]
    node_cost: Vec<RatRepr>,
    edges: Vec<EdgeDoc>,
}

impl Document for ExplicitInstance {
    fn from_json(text: &str) -> Result<Self> {
        let doc: ExplicitDoc = parse(text)?;
        if doc.node_cost.len() != doc.nodes {
            return Err(invalid(format!("nodes = {} but nodeCost has {} entries", doc.nodes, doc.node_cost.len())));
        }
        let mut edges = Vec::with_capacity(doc.edges.len());
        for (e, edge) in doc.edges.iter().enumerate() {
            let nodes = edge
                .set
                .iter()
                .map(|&v| index(v, doc.nodes, || format!("edge {}", e + 1)))
                .collect::<Result<Vec<_>>>()?;
            edges.push(Edge { nodes, cost: edge.cost.value()? });
        }
        ExplicitInstance::new(values(&doc.node_cost)?, edges)
    }

    fn to_json(&self) -> String {
        render(&ExplicitDoc {
            nodes: self.node_count(),
            node_cost: reprs(&self.node_cost),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    set: e.nodes.iter().map(|v| v + 1).collect(),
                    cost: RatRepr::of(&e.cost),
                })
                .collect(),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DenseDoc {
    dims: Vec<usize>,
    entries: Vec<RatRepr>,
}

impl Document for DenseTensor {
    fn from_json(text: &str) -> Result<Self> {
        let doc: DenseDoc = parse(text)?;
        DenseTensor::new(doc.dims, values(&doc.entries)?)
    }

    fn to_json(&self) -> String {
        render(&DenseDoc {
            dims: self.dims.clone(),
            entries: reprs(&self.entries),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactoredDoc {
    dims: Vec<usize>,
    factors: Vec<Vec<Vec<RatRepr>>>,
}

impl Document for FactoredTensor {
    fn from_json(text: &str) -> Result<Self> {
        let doc: FactoredDoc = parse(text)?;
        let factors = doc
            .factors
            .iter()
            .map(|f| f.iter().map(|v| values(v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        FactoredTensor::new(doc.dims, factors)
    }

    fn to_json(&self) -> String {
        render(&FactoredDoc {
            dims: self.dims.clone(),
            factors: self.factors.iter().map(|f| f.iter().map(|v| reprs(v)).collect()).collect(),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<RatRepr>>,
}

impl MatrixDoc {
    fn matrix(&self) -> Result<RationalMatrix> {
        if self.entries.len() != self.rows || self.entries.iter().any(|r| r.len() != self.cols) {
            return Err(invalid(format!("matrix entries do not form {}x{}", self.rows, self.cols)));
        }
        let flat = self.entries.iter().map(|r| values(r)).collect::<Result<Vec<_>>>()?;
        RationalMatrix::from_entries(self.rows, self.cols, flat.into_iter().flatten().collect())
    }

    fn of(m: &RationalMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.to_rows().iter().map(|r| reprs(r)).collect(),
        }
    }
}

impl Document for RationalMatrix {
    fn from_json(text: &str) -> Result<Self> {
        parse::<MatrixDoc>(text)?.matrix()
    }

    fn to_json(&self) -> String {
        render(&MatrixDoc::of(self))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDoc {
    i: usize,
    j: usize,
    matrix: MatrixDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadraticDoc {
    s: usize,
    n: Vec<usize>,
    #[serde(rename = "Q")]
    q: Vec<PairDoc>,
    #[serde(default)]
    c: BTreeMap<String, Vec<RatRepr>>,
}

impl Document for QuadraticInstance {
    fn from_json(text: &str) -> Result<Self> {
        let doc: QuadraticDoc = parse(text)?;
        check_count(doc.s, &doc.n)?;
        let mut q = BTreeMap::new();
        for (p, pair) in doc.q.iter().enumerate() {
            let what = || format!("matrix {}", p + 1);
            let key = (index(pair.i, doc.s, what)?, index(pair.j, doc.s, what)?);
            if q.insert(key, pair.matrix.matrix()?).is_some() {
                return Err(invalid(format!("matrix ({}, {}) given twice", pair.i, pair.j)));
            }
        }
        let mut c = BTreeMap::new();
        for (key, v) in &doc.c {
            let what = || "linear part".to_string();
            c.insert(index(block_key(key, what)?, doc.s, what)?, values(v)?);
        }
        QuadraticInstance::new(doc.n, q, c)
    }

    fn to_json(&self) -> String {
        render(&QuadraticDoc {
            s: self.sizes.len(),
            n: self.sizes.clone(),
            q: self
                .q
                .iter()
                .map(|(&(i, j), m)| PairDoc {
                    i: i + 1,
                    j: j + 1,
                    matrix: MatrixDoc::of(m),
                })
                .collect(),
            c: self.c.iter().map(|(j, v)| ((j + 1).to_string(), reprs(v))).collect(),
        })
    }
}

/// Functionals sharing one ambient dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrangement {
    pub dim: usize,
    pub functionals: Vec<AffineFunctional>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionalDoc {
    linear: Vec<RatRepr>,
    constant: RatRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrangementDoc {
    dim: usize,
    functionals: Vec<FunctionalDoc>,
}

impl Document for Arrangement {
    fn from_json(text: &str) -> Result<Self> {
        let doc: ArrangementDoc = parse(text)?;
        let mut functionals = Vec::with_capacity(doc.functionals.len());
        for (k, f) in doc.functionals.iter().enumerate() {
            if f.linear.len() != doc.dim {
                return Err(invalid(format!(
                    "functional {}: {} coefficients, dimension is {}",
                    k + 1,
                    f.linear.len(),
                    doc.dim
                )));
            }
            functionals.push(AffineFunctional::new(values(&f.linear)?, f.constant.value()?));
        }
        Ok(Arrangement { dim: doc.dim, functionals })
    }

    fn to_json(&self) -> String {
        render(&ArrangementDoc {
            dim: self.dim,
            functionals: self
                .functionals
                .iter()
                .map(|f| FunctionalDoc {
                    linear: reprs(&f.linear),
                    constant: RatRepr::of(&f.constant),
                })
                .collect(),
        })
    }
}

/// Solver output as written to disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionRecord {
    pub value: Rational,
    pub assignment: Assignment,
    pub leaves_explored: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionDoc {
    value: RatRepr,
    assignment: Vec<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    leaves_explored: Option<u64>,
}

impl Document for SolutionRecord {
    fn from_json(text: &str) -> Result<Self> {
        let doc: SolutionDoc = parse(text)?;
        let mut blocks = Vec::with_capacity(doc.assignment.len());
        for (j, block) in doc.assignment.iter().enumerate() {
            let bits = block
                .iter()
                .map(|&b| match b {
                    0 => Ok(false),
                    1 => Ok(true),
                    _ => Err(invalid(format!("block {}: entry {b} is not binary", j + 1))),
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.push(bits);
        }
        Ok(SolutionRecord {
            value: doc.value.value()?,
            assignment: Assignment::new(blocks),
            leaves_explored: doc.leaves_explored,
        })
    }

    fn to_json(&self) -> String {
        render(&SolutionDoc {
            value: RatRepr::of(&self.value),
            assignment: bits_doc(&self.assignment.blocks),
            leaves_explored: self.leaves_explored,
        })
    }
}

/// Binary blocks as lists of 0/1.
pub fn bits_doc(blocks: &[Vec<bool>]) -> Vec<Vec<u8>> {
    blocks.iter().map(|b| b.iter().map(|&v| u8::from(v)).collect()).collect()
}
