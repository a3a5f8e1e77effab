//! Object popularity from occurrence frequency weighted by inverse coverage.

use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::claims::{DerivedView, ObjectId};

/// Per-object popularity, indexed by [`ObjectId`].
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityTable {
    unnormalized: Vec<f64>,
    normalized: Vec<f64>,
}

impl PopularityTable {
    /// Every object weighted `1/|O|`.
    pub fn uniform(n_objects: usize) -> Self {
        let p = 1.0 / n_objects as f64;
        Self {
            unnormalized: vec![1.0; n_objects],
            normalized: vec![p; n_objects],
        }
    }

    /// `P_o^u`.
    pub fn unnormalized(&self, o: ObjectId) -> f64 {
        self.unnormalized[o.0]
    }

    /// `P_o`.
    pub fn get(&self, o: ObjectId) -> f64 {
        self.normalized[o.0]
    }

    pub fn len(&self) -> usize {
        self.normalized.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normalized.is_empty()
    }

    /// Normalized popularity keyed by object name.
    pub fn by_name(&self, view: &DerivedView) -> BTreeMap<String, f64> {
        view.object_ids()
            .map(|o| (view.object_name(o).to_string(), self.get(o)))
            .collect()
    }

    /// `object_id<TAB>popularity` rows.
    pub fn write_tsv<W: Write>(&self, view: &DerivedView, mut out: W) -> io::Result<()> {
        writeln!(out, "object_id\tpopularity")?;
        for o in view.object_ids() {
            writeln!(out, "{}\t{}", view.object_name(o), self.get(o))?;
        }
        Ok(())
    }
}

/// `P_o^u = Σ_{s ∈ S_o} 1/Cov(s)`, normalized over all objects.
pub fn compute_popularity(view: &DerivedView) -> PopularityTable {
    let unnormalized: Vec<f64> = view
        .object_ids()
        .map(|o| view.sources_of_object(o).map(|s| 1.0 / view.coverage(s)).sum())
        .collect();
    let total: f64 = unnormalized.iter().sum();
    let normalized = unnormalized.iter().map(|p| p / total).collect();
    PopularityTable {
        unnormalized,
        normalized,
    }
}
