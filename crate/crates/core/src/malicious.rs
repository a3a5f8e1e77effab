//! Per-object ±malicious agreement graphs and source dependence scores.
//!
//! Sources that share values unlikely to be true are evidence of copying.
//! For every object claimed by at least two sources we build one graph per
//! side over `S_o`, run the random walk, and anchor the most-visited source
//! of each graph to `pc_max` / `nc_max`.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::claims::{DerivedView, ObjectId, SourceId};
use crate::engine::ConfidenceTable;
use crate::graph::{EndorsementGraph, WalkFailure, WalkParams};
use crate::supportive::{agreement_term, Side};

/// `D(s, o)` and `D̃(s, o)`, stored per object in claim-slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceMap {
    positive: Vec<Vec<f64>>,
    negative: Vec<Vec<f64>>,
    /// Outer iteration that produced this map; 0 when built by hand.
    pub generation: usize,
}

impl DependenceMap {
    /// All scores zero: no copying evidence anywhere.
    pub fn zeros(view: &DerivedView) -> Self {
        let shape: Vec<Vec<f64>> = view.objects().iter().map(|e| vec![0.0; e.num_sources()]).collect();
        Self {
            positive: shape.clone(),
            negative: shape,
            generation: 0,
        }
    }

    /// `(D(s,o), D̃(s,o))`, or `None` when `s` makes no claim on `o`.
    pub fn get(&self, view: &DerivedView, s: SourceId, o: ObjectId) -> Option<(f64, f64)> {
        let slot = view.object(o).slot(s)?;
        Some((self.positive[o.0][slot], self.negative[o.0][slot]))
    }

    pub fn positive_at(&self, o: ObjectId, slot: usize) -> f64 {
        self.positive[o.0][slot]
    }

    pub fn negative_at(&self, o: ObjectId, slot: usize) -> f64 {
        self.negative[o.0][slot]
    }

    pub fn set(&mut self, o: ObjectId, slot: usize, positive: f64, negative: f64) {
        self.positive[o.0][slot] = positive;
        self.negative[o.0][slot] = negative;
    }

    /// `object_id<TAB>source_id<TAB>D<TAB>D_tilde` rows.
    pub fn write_tsv<W: Write>(&self, view: &DerivedView, mut out: W) -> io::Result<()> {
        writeln!(out, "object_id\tsource_id\tD\tD_tilde")?;
        for o in view.object_ids() {
            for (slot, c) in view.object(o).claims.iter().enumerate() {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    view.object_name(o),
                    view.source_name(c.source),
                    self.positive[o.0][slot],
                    self.negative[o.0][slot]
                )?;
            }
        }
        Ok(())
    }
}

/// Pre-normalization ±malicious weights over `S_o` in claim-slot order.
///
/// `+`: `β + (1−β)·|A_o|/|V_{s2,o}|·(1 − Π_{A_o} C_v)`;
/// `−`: `β + (1−β)·|Ã_o|/|Ṽ_{s2,o}|·(1 − Π_{Ã_o} C_ṽ)`.
pub fn malicious_weights(
    view: &DerivedView,
    conf: &ConfidenceTable,
    o: ObjectId,
    beta: f64,
) -> (EndorsementGraph, EndorsementGraph) {
    let claims = &view.object(o).claims;
    let vertices: Vec<SourceId> = claims.iter().map(|c| c.source).collect();
    let (c_true, c_false) = (conf.true_conf(o), conf.false_conf(o));
    let positive = EndorsementGraph::smoothed(vertices.clone(), beta, |i, j| {
        agreement_term(&claims[i], &claims[j], Side::Positive, c_true)
    });
    let negative = EndorsementGraph::smoothed(vertices, beta, |i, j| {
        agreement_term(&claims[i], &claims[j], Side::Negative, c_false)
    });
    (positive, negative)
}

/// Row-normalized ±malicious agreement graphs of object `o`.
pub fn build_malicious_graphs(
    view: &DerivedView,
    conf: &ConfidenceTable,
    o: ObjectId,
    beta: f64,
) -> Result<(EndorsementGraph, EndorsementGraph), WalkFailure> {
    let (pos, neg) = malicious_weights(view, conf, o, beta);
    let name = view.object_name(o);
    Ok((
        pos.row_normalize()
            .map_err(|e| WalkFailure::new(format!("+malicious graph of object {name}"), e))?,
        neg.row_normalize()
            .map_err(|e| WalkFailure::new(format!("-malicious graph of object {name}"), e))?,
    ))
}

fn object_dependence(
    view: &DerivedView,
    conf: &ConfidenceTable,
    o: ObjectId,
    pc_max: f64,
    nc_max: f64,
    beta: f64,
    walk: &WalkParams,
) -> Result<(Vec<f64>, Vec<f64>), WalkFailure> {
    let n = view.object(o).num_sources();
    if n < 2 {
        return Ok((vec![0.0; n], vec![0.0; n]));
    }
    let (pos, neg) = build_malicious_graphs(view, conf, o, beta)?;
    let name = view.object_name(o);
    let pi_pos = pos
        .stationary(walk)
        .map_err(|e| WalkFailure::new(format!("+malicious walk of object {name}"), e))?;
    let pi_neg = neg
        .stationary(walk)
        .map_err(|e| WalkFailure::new(format!("-malicious walk of object {name}"), e))?;
    Ok((
        pi_pos.normalize_to_precision(pc_max),
        pi_neg.normalize_to_precision(nc_max),
    ))
}

/// Dependence scores for every claiming `(source, object)` pair. Objects with
/// a single source get zero on both sides.
pub fn derive_dependence(
    view: &DerivedView,
    conf: &ConfidenceTable,
    pc_max: f64,
    nc_max: f64,
    beta: f64,
    walk: &WalkParams,
) -> Result<DependenceMap, WalkFailure> {
    let per_object: Vec<(Vec<f64>, Vec<f64>)> = view
        .object_ids()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|o| object_dependence(view, conf, o, pc_max, nc_max, beta, walk))
        .collect::<Result<_, _>>()?;
    let (positive, negative) = per_object.into_iter().unzip();
    Ok(DependenceMap {
        positive,
        negative,
        generation: 0,
    })
}
