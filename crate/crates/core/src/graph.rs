//! Dense endorsement graphs and the fixed-point random walk over them.
//!
//! Every agreement graph in the engine is complete (each ordered pair of
//! distinct vertices carries a smoothing weight), so graphs are stored as a
//! dense row-major matrix with a zero diagonal. The stationary distribution
//! of the row-normalized chain is found by power iteration from the uniform
//! vector; irreducibility comes from the smoothing weights, no teleportation
//! term is added.

use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::claims::SourceId;

/// Matrix products above this many vertices are split across the rayon pool.
const PAR_THRESHOLD: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vertex {vertex} has no outgoing weight")]
    ZeroOutMass { vertex: usize },
    #[error("row {row} sums to {sum}, graph is not row-normalized")]
    NotStochastic { row: usize, sum: f64 },
    #[error("random walk did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
}

/// A graph failure tagged with the graph it happened on.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{context}: {source}")]
pub struct WalkFailure {
    pub context: String,
    #[source]
    pub source: GraphError,
}

impl WalkFailure {
    pub fn new(context: impl Into<String>, source: GraphError) -> Self {
        Self {
            context: context.into(),
            source,
        }
    }
}

/// Power-iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    /// L1 tolerance on `‖πP − π‖₁`.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for WalkParams {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 10_000,
        }
    }
}

/// Weighted directed graph over sources with dense storage.
#[derive(Debug, Clone, PartialEq)]
pub struct EndorsementGraph {
    vertices: Vec<SourceId>,
    weights: Vec<f64>,
}

impl EndorsementGraph {
    /// A graph with all weights zero.
    pub fn new(vertices: Vec<SourceId>) -> Self {
        let n = vertices.len();
        Self {
            vertices,
            weights: vec![0.0; n * n],
        }
    }

    /// Builds `w(i→j) = β + (1−β)·signal(i, j)` for every ordered pair of
    /// distinct vertices.
    pub fn smoothed(vertices: Vec<SourceId>, beta: f64, mut signal: impl FnMut(usize, usize) -> f64) -> Self {
        let mut g = Self::new(vertices);
        let n = g.len();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    g.weights[i * n + j] = beta + (1.0 - beta) * signal(i, j);
                }
            }
        }
        g
    }

    /// Builds the graph from full rows; diagonal entries are forced to zero.
    pub fn from_rows(vertices: Vec<SourceId>, rows: Vec<Vec<f64>>) -> Self {
        let n = vertices.len();
        assert_eq!(rows.len(), n, "one row per vertex");
        let mut weights = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), n, "square weight matrix");
            weights.extend(row.into_iter().enumerate().map(|(j, w)| if i == j { 0.0 } else { w }));
        }
        Self { vertices, weights }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[SourceId] {
        &self.vertices
    }

    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.weights[from * self.len() + to]
    }

    pub fn set_weight(&mut self, from: usize, to: usize, weight: f64) {
        assert!(from != to, "self-loops are not allowed");
        assert!(weight >= 0.0, "negative edge weight");
        let n = self.len();
        self.weights[from * n + to] = weight;
    }

    pub fn row(&self, from: usize) -> &[f64] {
        let n = self.len();
        &self.weights[from * n..(from + 1) * n]
    }

    /// Divides each row by its out-mass. A lone vertex keeps its empty row.
    pub fn row_normalize(&self) -> Result<EndorsementGraph, GraphError> {
        let n = self.len();
        let mut weights = self.weights.clone();
        if n >= 2 {
            for (i, row) in weights.chunks_mut(n).enumerate() {
                let mass: f64 = row.iter().sum();
                if mass <= 0.0 {
                    return Err(GraphError::ZeroOutMass { vertex: i });
                }
                row.iter_mut().for_each(|w| *w /= mass);
            }
        }
        Ok(EndorsementGraph {
            vertices: self.vertices.clone(),
            weights,
        })
    }

    /// Stationary visit probabilities of the row-normalized chain.
    pub fn stationary(&self, params: &WalkParams) -> Result<StationaryDistribution, GraphError> {
        let n = self.len();
        if n <= 1 {
            return Ok(StationaryDistribution {
                probabilities: vec![1.0; n],
            });
        }
        for (i, row) in self.weights.chunks(n).enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(GraphError::NotStochastic { row: i, sum });
            }
        }

        let mut pi = vec![1.0 / n as f64; n];
        let mut next = vec![0.0; n];
        let mut residual = f64::INFINITY;
        for _ in 0..params.max_iters {
            self.step(&pi, &mut next);
            let total: f64 = next.iter().sum();
            next.iter_mut().for_each(|p| *p /= total);
            residual = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
            std::mem::swap(&mut pi, &mut next);
            if residual <= params.tol {
                return Ok(StationaryDistribution { probabilities: pi });
            }
        }
        Err(GraphError::NonConvergence {
            iterations: params.max_iters,
            residual,
        })
    }

    /// `next = πᵀ P`, accumulated column by column so the summation order
    /// does not depend on the thread count.
    fn step(&self, pi: &[f64], next: &mut [f64]) {
        let n = self.len();
        let column = |j: usize| -> f64 { (0..n).map(|i| pi[i] * self.weights[i * n + j]).sum() };
        if n >= PAR_THRESHOLD {
            next.par_iter_mut().enumerate().for_each(|(j, x)| *x = column(j));
        } else {
            next.iter_mut().enumerate().for_each(|(j, x)| *x = column(j));
        }
    }

    /// `from<TAB>to<TAB>weight` rows for every off-diagonal edge.
    pub fn write_tsv<W: Write>(&self, mut out: W, name: impl Fn(SourceId) -> String) -> io::Result<()> {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    writeln!(
                        out,
                        "{}\t{}\t{}",
                        name(self.vertices[i]),
                        name(self.vertices[j]),
                        self.weight(i, j)
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Stationary visit probabilities aligned with the graph's vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub probabilities: Vec<f64>,
}

impl StationaryDistribution {
    /// Rescales so the most-visited vertex maps to `anchor`.
    pub fn normalize_to_precision(&self, anchor: f64) -> Vec<f64> {
        let max = self.probabilities.iter().copied().fold(0.0, f64::max);
        assert!(max > 0.0, "degenerate stationary distribution");
        let rate = anchor / max;
        self.probabilities.iter().map(|p| p * rate).collect()
    }
}
