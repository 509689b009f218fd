//! Solver-neutral SDP instances.
//!
//! An [`SdpInstance`] maximizes a linear objective over free scalar
//! variables subject to linear equalities in those variables and in the
//! upper-triangle entries of a family of PSD blocks. The builders in this
//! module produce every program used by the crate; [`sdpa`] reads and writes
//! the SDPA sparse format.

mod build;
pub mod sdpa;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pauli::AnticommGraph;

pub use build::{
    build_reduced_feasibility, build_theta, build_theta_body_feasibility, build_theta_sym, build_theta_unguarded,
    theta_sym_variable, FeasibilityOptions, PinMode, THETA_VERTEX_GUARD,
};
pub use sdpa::{export_sdpa, parse_sdpa, read_sdpa, to_sdpa_string};

/// One operand of a linear constraint.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Term {
    /// Scalar variable by index.
    Var(usize),
    /// Entry `(row, col)` of a PSD block, `row <= col`.
    Entry { block: usize, row: usize, col: usize },
}

impl Term {
    /// Normalizes `(row, col)` to the upper triangle.
    pub fn entry(block: usize, row: usize, col: usize) -> Self {
        Term::Entry { block, row: row.min(col), col: row.max(col) }
    }
}

/// `Σ coeff · term = rhs`. Terms are sorted, merged, and never zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constraint {
    terms: Vec<(Term, f64)>,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(terms: impl IntoIterator<Item = (Term, f64)>, rhs: f64) -> Self {
        let mut merged: BTreeMap<Term, f64> = BTreeMap::new();
        for (term, c) in terms {
            let term = match term {
                Term::Entry { block, row, col } => Term::entry(block, row, col),
                v => v,
            };
            *merged.entry(term).or_insert(0.0) += c;
        }
        Self { terms: merged.into_iter().filter(|(_, c)| *c != 0.0).collect(), rhs }
    }

    pub fn terms(&self) -> &[(Term, f64)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockSpec {
    pub label: String,
    pub dim: usize,
}

/// maximize `Σ objective[v] · x_v` subject to `constraints`, every block PSD.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SdpInstance {
    pub blocks: Vec<BlockSpec>,
    pub variables: Vec<String>,
    pub objective: BTreeMap<usize, f64>,
    pub constraints: Vec<Constraint>,
    pub metadata: String,
}

impl SdpInstance {
    pub fn new(metadata: impl Into<String>) -> Self {
        Self {
            blocks: Vec::new(),
            variables: Vec::new(),
            objective: BTreeMap::new(),
            constraints: Vec::new(),
            metadata: metadata.into(),
        }
    }

    pub fn add_block(&mut self, label: impl Into<String>, dim: usize) -> usize {
        self.blocks.push(BlockSpec { label: label.into(), dim });
        self.blocks.len() - 1
    }

    pub fn add_variable(&mut self, name: impl Into<String>) -> usize {
        self.variables.push(name.into());
        self.variables.len() - 1
    }

    /// Adds `coeff` to the objective coefficient of `var`.
    pub fn add_objective(&mut self, var: usize, coeff: f64) {
        let c = self.objective.entry(var).or_insert(0.0);
        *c += coeff;
        if *c == 0.0 {
            self.objective.remove(&var);
        }
    }

    /// Appends the constraint unless it is `0 = 0`.
    pub fn add_constraint(&mut self, terms: impl IntoIterator<Item = (Term, f64)>, rhs: f64) {
        let c = Constraint::new(terms, rhs);
        if !(c.is_empty() && rhs == 0.0) {
            self.constraints.push(c);
        }
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    /// `true` when every objective coefficient vanishes.
    pub fn is_feasibility(&self) -> bool {
        self.objective.is_empty()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|(&v, c)| c * x[v]).sum()
    }

    /// Checks index ranges, finiteness, and the single-line metadata rule.
    pub fn validate(&self) -> Result<()> {
        if self.metadata.contains('\n') {
            return Err(Error::Invalid("metadata must be a single line".into()));
        }
        for b in &self.blocks {
            if b.dim == 0 || b.label.contains(char::is_whitespace) {
                return Err(Error::Invalid(format!("bad block spec {:?}", b)));
            }
        }
        if self.variables.iter().any(|v| v.is_empty() || v.contains(char::is_whitespace)) {
            return Err(Error::Invalid("variable names must be non-empty without whitespace".into()));
        }
        for (&v, c) in &self.objective {
            if v >= self.variables.len() || !c.is_finite() {
                return Err(Error::Invalid(format!("objective term x{v} = {c}")));
            }
        }
        for (k, con) in self.constraints.iter().enumerate() {
            if !con.rhs.is_finite() {
                return Err(Error::Invalid(format!("constraint {k}: rhs {}", con.rhs)));
            }
            for &(term, c) in con.terms() {
                let ok = c.is_finite()
                    && match term {
                        Term::Var(v) => v < self.variables.len(),
                        Term::Entry { block, row, col } => {
                            block < self.blocks.len() && row <= col && col < self.blocks[block].dim
                        }
                    };
                if !ok {
                    return Err(Error::Invalid(format!("constraint {k}: bad term {term:?} · {c}")));
                }
            }
        }
        Ok(())
    }
}

/// Simple undirected graph on `0..vertices`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Edges are normalized to `u < v`, sorted and deduplicated.
    pub fn new(vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u == v || u >= vertices || v >= vertices {
                return Err(Error::Invalid(format!("edge ({u}, {v}) on {vertices} vertices")));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        list.dedup();
        Ok(Self { vertices, edges: list })
    }

    pub fn empty(m: usize) -> Self {
        Self { vertices: m, edges: Vec::new() }
    }

    pub fn complete(m: usize) -> Self {
        let edges = (0..m).flat_map(|u| (u + 1..m).map(move |v| (u, v))).collect();
        Self { vertices: m, edges }
    }

    pub fn cycle(m: usize) -> Self {
        Self::new(m, (0..m).map(|u| (u, (u + 1) % m))).expect("cycle on m >= 3 vertices")
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

impl From<&AnticommGraph> for Graph {
    fn from(g: &AnticommGraph) -> Self {
        Self { vertices: g.num_vertices(), edges: g.edges().collect() }
    }
}
