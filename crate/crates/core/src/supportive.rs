//! ±Supportive agreement graphs and two-sided source precision.

use std::collections::BTreeSet;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::claims::{DerivedView, ObjectId, SourceClaim, SourceId};
use crate::engine::ConfidenceTable;
use crate::graph::{EndorsementGraph, WalkFailure, WalkParams};
use crate::malicious::DependenceMap;
use crate::popularity::PopularityTable;

/// Which side of the mutual-exclusion split an agreement is taken on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Positive,
    Negative,
}

/// `|A| / |claims of s2 on this side| · (1 − Π_{v∈A} conf(v))`, with `A`
/// the agreement of `c1` and `c2` on `side`. Zero when the denominator or
/// the agreement is empty.
pub(crate) fn agreement_term(c1: &SourceClaim, c2: &SourceClaim, side: Side, conf: &[f64]) -> f64 {
    let (denominator, agreed, product) = match side {
        Side::Positive => {
            let mut n = 0usize;
            let mut prod = 1.0;
            for &v in c2.positive() {
                if c1.claims(v) {
                    n += 1;
                    prod *= conf[v];
                }
            }
            (c2.positive_len(), n, prod)
        }
        Side::Negative => {
            let mut n = 0usize;
            let mut prod = 1.0;
            for v in c2.negative() {
                if !c1.claims(v) {
                    n += 1;
                    prod *= conf[v];
                }
            }
            (c2.negative_len(), n, prod)
        }
    };
    if denominator == 0 || agreed == 0 {
        return 0.0;
    }
    agreed as f64 / denominator as f64 * (1.0 - product)
}

/// `A_o(s1, s2) = V_{s1,o} ∩ V_{s2,o}`; `None` unless both sources claim on `o`.
pub fn positive_agreement(view: &DerivedView, s1: SourceId, s2: SourceId, o: ObjectId) -> Option<BTreeSet<&str>> {
    let (c1, c2) = (view.claim(s1, o)?, view.claim(s2, o)?);
    let universe = view.universe(o);
    Some(
        c2.positive()
            .iter()
            .filter(|&&v| c1.claims(v))
            .map(|&v| universe[v].as_str())
            .collect(),
    )
}

/// `Ã_o(s1, s2) = U_o − (V_{s1,o} ∪ V_{s2,o})`.
pub fn negative_agreement(view: &DerivedView, s1: SourceId, s2: SourceId, o: ObjectId) -> Option<BTreeSet<&str>> {
    let (c1, c2) = (view.claim(s1, o)?, view.claim(s2, o)?);
    let universe = view.universe(o);
    Some(
        c2.negative()
            .filter(|&v| !c1.claims(v))
            .map(|v| universe[v].as_str())
            .collect(),
    )
}

fn endorsement(
    view: &DerivedView,
    conf: &ConfidenceTable,
    pop: &PopularityTable,
    dep: &DependenceMap,
    s1: SourceId,
    s2: SourceId,
    side: Side,
) -> f64 {
    let mut total = 0.0;
    for &(o, slot1) in view.objects_of_source(s1) {
        let entry = view.object(o);
        let Some(slot2) = entry.slot(s2) else { continue };
        total += object_contribution(entry.claims.as_slice(), slot1, slot2, o, conf, pop, dep, side);
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn object_contribution(
    claims: &[SourceClaim],
    slot1: usize,
    slot2: usize,
    o: ObjectId,
    conf: &ConfidenceTable,
    pop: &PopularityTable,
    dep: &DependenceMap,
    side: Side,
) -> f64 {
    // + side discounts by the false confidence of shared claims, − side by
    // the true confidence of shared disclaims.
    let (conf_slice, dependence) = match side {
        Side::Positive => (conf.false_conf(o), dep.positive_at(o, slot1)),
        Side::Negative => (conf.true_conf(o), dep.negative_at(o, slot1)),
    };
    agreement_term(&claims[slot1], &claims[slot2], side, conf_slice) * pop.get(o) * (1.0 - dependence)
}

/// `A(s1, s2)`: endorsement of `s2` by `s1` over their common objects.
pub fn positive_endorsement(
    view: &DerivedView,
    conf: &ConfidenceTable,
    pop: &PopularityTable,
    dep: &DependenceMap,
    s1: SourceId,
    s2: SourceId,
) -> f64 {
    endorsement(view, conf, pop, dep, s1, s2, Side::Positive)
}

/// `Ã(s1, s2)`; objects where `s2` disclaims nothing contribute zero.
pub fn negative_endorsement(
    view: &DerivedView,
    conf: &ConfidenceTable,
    pop: &PopularityTable,
    dep: &DependenceMap,
    s1: SourceId,
    s2: SourceId,
) -> f64 {
    endorsement(view, conf, pop, dep, s1, s2, Side::Negative)
}

/// The ± supportive agreement graphs, over all sources in id order.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportiveGraphs {
    pub positive: EndorsementGraph,
    pub negative: EndorsementGraph,
}

/// Pre-normalization weights `β + (1−β)·A(s1,s2)/|O_s1 ∩ O_s2|`; pairs with
/// no common object carry `β` alone.
pub fn supportive_weights(
    view: &DerivedView,
    conf: &ConfidenceTable,
    pop: &PopularityTable,
    dep: &DependenceMap,
    beta: f64,
) -> SupportiveGraphs {
    let n = view.num_sources();
    // Each row sums its objects in id order, so rows are independent and the
    // result does not depend on how rows are scheduled.
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|s1| {
            let mut pos = vec![0.0; n];
            let mut neg = vec![0.0; n];
            let mut common = vec![0usize; n];
            for &(o, slot1) in view.objects_of_source(SourceId(s1)) {
                let claims = view.object(o).claims.as_slice();
                for (slot2, c2) in claims.iter().enumerate() {
                    if slot2 == slot1 {
                        continue;
                    }
                    let s2 = c2.source.0;
                    common[s2] += 1;
                    pos[s2] += object_contribution(claims, slot1, slot2, o, conf, pop, dep, Side::Positive);
                    neg[s2] += object_contribution(claims, slot1, slot2, o, conf, pop, dep, Side::Negative);
                }
            }
            let smooth = |sum: f64, k: usize| {
                if k == 0 {
                    beta
                } else {
                    beta + (1.0 - beta) * sum / k as f64
                }
            };
            let pos_row = (0..n).map(|s2| smooth(pos[s2], common[s2])).collect();
            let neg_row = (0..n).map(|s2| smooth(neg[s2], common[s2])).collect();
            (pos_row, neg_row)
        })
        .collect();
    let (pos_rows, neg_rows): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let vertices: Vec<SourceId> = view.source_ids().collect();
    SupportiveGraphs {
        positive: EndorsementGraph::from_rows(vertices.clone(), pos_rows),
        negative: EndorsementGraph::from_rows(vertices, neg_rows),
    }
}

/// Row-normalized ± supportive agreement graphs.
pub fn build_supportive_graphs(
    view: &DerivedView,
    conf: &ConfidenceTable,
    pop: &PopularityTable,
    dep: &DependenceMap,
    beta: f64,
) -> Result<SupportiveGraphs, WalkFailure> {
    normalize_supportive(&supportive_weights(view, conf, pop, dep, beta))
}

pub fn normalize_supportive(raw: &SupportiveGraphs) -> Result<SupportiveGraphs, WalkFailure> {
    Ok(SupportiveGraphs {
        positive: raw
            .positive
            .row_normalize()
            .map_err(|e| WalkFailure::new("+supportive graph", e))?,
        negative: raw
            .negative
            .row_normalize()
            .map_err(|e| WalkFailure::new("-supportive graph", e))?,
    })
}

/// Two-sided source precision `τ(s)`, `τ̃(s)`, indexed by [`SourceId`].
#[derive(Debug, Clone, PartialEq)]
pub struct SourceProfile {
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
    /// Outer iteration that produced this profile; 0 when built by hand.
    pub generation: usize,
}

impl SourceProfile {
    pub fn new(positive: Vec<f64>, negative: Vec<f64>) -> Self {
        assert_eq!(positive.len(), negative.len());
        Self {
            positive,
            negative,
            generation: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.positive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positive.is_empty()
    }

    /// `τ` followed by `τ̃`, in source order.
    pub fn flatten(&self) -> Vec<f64> {
        self.positive.iter().chain(&self.negative).copied().collect()
    }

    /// `source_id<TAB>tau<TAB>tau_tilde` rows.
    pub fn write_tsv<W: Write>(&self, view: &DerivedView, mut out: W) -> io::Result<()> {
        writeln!(out, "source_id\ttau\ttau_tilde")?;
        for s in view.source_ids() {
            writeln!(
                out,
                "{}\t{}\t{}",
                view.source_name(s),
                self.positive[s.0],
                self.negative[s.0]
            )?;
        }
        Ok(())
    }
}

/// Stationary walk on each row-normalized graph, anchored to `pp_max` / `np_max`.
pub fn derive_precision(
    graphs: &SupportiveGraphs,
    pp_max: f64,
    np_max: f64,
    walk: &WalkParams,
) -> Result<SourceProfile, WalkFailure> {
    let pos = graphs
        .positive
        .stationary(walk)
        .map_err(|e| WalkFailure::new("+supportive walk", e))?;
    let neg = graphs
        .negative
        .stationary(walk)
        .map_err(|e| WalkFailure::new("-supportive walk", e))?;
    Ok(SourceProfile::new(
        pos.normalize_to_precision(pp_max),
        neg.normalize_to_precision(np_max),
    ))
}
