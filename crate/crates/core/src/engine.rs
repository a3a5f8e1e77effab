//! The iterative multi-truth discovery loop.
//!
//! Confidence starts from per-value vote shares. Each outer iteration then
//! runs copy detection on the current confidences, rebuilds the supportive
//! graphs with the fresh dependence scores, derives two-sided precision and
//! recomputes every value's confidence. The loop stops once the cosine
//! difference between successive precision vectors drops below `delta`.

use std::fmt;

use thiserror::Error;

use crate::claims::{derive_view, ClaimTable, ClaimsError, DerivedView, ObjectId, TruthAssignment};
use crate::graph::{WalkFailure, WalkParams};
use crate::malicious::{derive_dependence, DependenceMap};
use crate::popularity::{compute_popularity, PopularityTable};
use crate::supportive::{derive_precision, normalize_supportive, supportive_weights, SourceProfile, SupportiveGraphs};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid {field} = {value}: must be {bound}")]
    Config {
        field: &'static str,
        value: f64,
        bound: &'static str,
    },
    #[error(transparent)]
    Claims(#[from] ClaimsError),
    #[error("iteration {iteration}: {failure}")]
    Walk { iteration: usize, failure: WalkFailure },
}

/// `C_v` and `C_ṽ` for every `(object, value ∈ U_o)`, in universe order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceTable {
    true_conf: Vec<Vec<f64>>,
    false_conf: Vec<Vec<f64>>,
}

impl ConfidenceTable {
    pub fn new(true_conf: Vec<Vec<f64>>, false_conf: Vec<Vec<f64>>) -> Self {
        assert_eq!(true_conf.len(), false_conf.len());
        Self { true_conf, false_conf }
    }

    /// Every value gets the same pair of scores.
    pub fn uniform(view: &DerivedView, c_true: f64, c_false: f64) -> Self {
        Self {
            true_conf: view.objects().iter().map(|e| vec![c_true; e.universe.len()]).collect(),
            false_conf: view.objects().iter().map(|e| vec![c_false; e.universe.len()]).collect(),
        }
    }

    pub fn true_conf(&self, o: ObjectId) -> &[f64] {
        &self.true_conf[o.0]
    }

    pub fn false_conf(&self, o: ObjectId) -> &[f64] {
        &self.false_conf[o.0]
    }

    /// `(C_v, C_ṽ)`.
    pub fn get(&self, o: ObjectId, value: usize) -> (f64, f64) {
        (self.true_conf[o.0][value], self.false_conf[o.0][value])
    }

    /// Iterates `(object, value index, C_v, C_ṽ)`.
    pub fn iter(&self) -> impl Iterator<Item = (ObjectId, usize, f64, f64)> + '_ {
        self.true_conf
            .iter()
            .zip(&self.false_conf)
            .enumerate()
            .flat_map(|(o, (t, f))| {
                t.iter()
                    .zip(f)
                    .enumerate()
                    .map(move |(v, (ct, cf))| (ObjectId(o), v, *ct, *cf))
            })
    }
}

/// Which of the two optional signals the engine uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Copy detection and popularity.
    Full,
    /// Neither: dependence forced to zero, popularity uniform.
    Core,
    /// Copy detection only.
    CopyDetection,
    /// Popularity only.
    Popularity,
}

impl Variant {
    fn flags(self) -> (bool, bool) {
        match self {
            Variant::Full => (true, true),
            Variant::Core => (false, false),
            Variant::CopyDetection => (true, false),
            Variant::Popularity => (false, true),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Full => "full",
            Variant::Core => "core",
            Variant::CopyDetection => "copy-detection",
            Variant::Popularity => "popularity",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    /// Smoothing weight on every edge, in `[0, 1)`.
    pub beta: f64,
    /// Convergence threshold on `1 − cos(τ_prev, τ_curr)`.
    pub delta: f64,
    pub pp_max: f64,
    pub np_max: f64,
    pub pc_max: f64,
    pub nc_max: f64,
    pub max_outer_iters: usize,
    pub walk: WalkParams,
    pub detect_copying: bool,
    pub use_popularity: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            beta: 0.1,
            delta: 1e-4,
            pp_max: 1.0,
            np_max: 0.9,
            pc_max: 1.0,
            nc_max: 0.8,
            max_outer_iters: 100,
            walk: WalkParams::default(),
            detect_copying: true,
            use_popularity: true,
        }
    }
}

impl EngineConfig {
    pub fn with_variant(mut self, variant: Variant) -> Self {
        (self.detect_copying, self.use_popularity) = variant.flags();
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let check = |field, value: f64, ok: bool, bound| {
            if ok {
                Ok(())
            } else {
                Err(EngineError::Config { field, value, bound })
            }
        };
        check("beta", self.beta, (0.0..1.0).contains(&self.beta), "in [0, 1)")?;
        check(
            "delta",
            self.delta,
            self.delta > 0.0 && self.delta.is_finite(),
            "positive",
        )?;
        for (field, value) in [
            ("pp_max", self.pp_max),
            ("np_max", self.np_max),
            ("pc_max", self.pc_max),
            ("nc_max", self.nc_max),
        ] {
            check(field, value, value > 0.0 && value <= 1.0, "in (0, 1]")?;
        }
        check(
            "max_outer_iters",
            self.max_outer_iters as f64,
            self.max_outer_iters >= 1,
            "at least 1",
        )?;
        check("walk_tol", self.walk.tol, self.walk.tol > 0.0, "positive")?;
        check(
            "walk_max_iters",
            self.walk.max_iters as f64,
            self.walk.max_iters >= 1,
            "at least 1",
        )?;
        Ok(())
    }
}

/// Vote-share initialization: `C_v = |S_v| / |S_o|`, `C_ṽ = 1 − C_v`.
pub fn initialize_confidence(view: &DerivedView) -> ConfidenceTable {
    let mut true_conf = Vec::with_capacity(view.num_objects());
    let mut false_conf = Vec::with_capacity(view.num_objects());
    for entry in view.objects() {
        let n = entry.num_sources() as f64;
        let mut votes = vec![0usize; entry.universe.len()];
        for c in &entry.claims {
            for &v in c.positive() {
                votes[v] += 1;
            }
        }
        let t: Vec<f64> = votes.iter().map(|&k| k as f64 / n).collect();
        false_conf.push(t.iter().map(|c| 1.0 - c).collect());
        true_conf.push(t);
    }
    ConfidenceTable { true_conf, false_conf }
}

/// Smart votes: each claimer adds `τ(s)` to `C_v` and `1 − τ(s)` to `C_ṽ`;
/// each disclaimer adds `1 − τ̃(s)` and `τ̃(s)`. Both are divided by `|S_o|`.
pub fn update_confidence(view: &DerivedView, profile: &SourceProfile) -> ConfidenceTable {
    let mut true_conf = Vec::with_capacity(view.num_objects());
    let mut false_conf = Vec::with_capacity(view.num_objects());
    for entry in view.objects() {
        let n = entry.num_sources() as f64;
        let mut t = vec![0.0; entry.universe.len()];
        let mut f = vec![0.0; entry.universe.len()];
        for c in &entry.claims {
            let (tau, tau_neg) = (profile.positive[c.source.0], profile.negative[c.source.0]);
            for v in 0..entry.universe.len() {
                if c.claims(v) {
                    t[v] += tau;
                    f[v] += 1.0 - tau;
                } else {
                    t[v] += 1.0 - tau_neg;
                    f[v] += tau_neg;
                }
            }
        }
        t.iter_mut().for_each(|x| *x /= n);
        f.iter_mut().for_each(|x| *x /= n);
        true_conf.push(t);
        false_conf.push(f);
    }
    ConfidenceTable { true_conf, false_conf }
}

/// `1 − cos(prev, curr)` over the flattened `τ ‖ τ̃` vectors; `None` when
/// either vector has zero magnitude.
pub fn cosine_difference(prev: &SourceProfile, curr: &SourceProfile) -> Option<f64> {
    let (a, b) = (prev.flatten(), curr.flatten());
    assert_eq!(a.len(), b.len(), "profiles cover different source sets");
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some(1.0 - dot / (na * nb))
}

pub fn has_converged(prev: &SourceProfile, curr: &SourceProfile, delta: f64) -> bool {
    cosine_difference(prev, curr).is_some_and(|d| d < delta)
}

/// `V_o* = { v ∈ U_o : C_v > C_ṽ }`. Objects left with no truth are kept
/// with an empty set and logged.
pub fn extract_truths(view: &DerivedView, conf: &ConfidenceTable) -> TruthAssignment {
    let mut out = TruthAssignment::new();
    for o in view.object_ids() {
        let universe = view.universe(o);
        let truths = conf
            .true_conf(o)
            .iter()
            .zip(conf.false_conf(o))
            .enumerate()
            .filter(|(_, (t, f))| t > f)
            .map(|(v, _)| universe[v].clone())
            .collect::<std::collections::BTreeSet<_>>();
        if truths.is_empty() {
            log::warn!("object {} has no value judged true", view.object_name(o));
        }
        out.truths.insert(view.object_name(o).to_string(), truths);
    }
    out
}

/// State after one outer iteration, handed to observers.
#[derive(Debug)]
pub struct IterationTrace<'a> {
    pub iteration: usize,
    pub dependence: &'a DependenceMap,
    pub graphs: &'a SupportiveGraphs,
    pub profile: &'a SourceProfile,
    pub confidence: &'a ConfidenceTable,
    /// `None` on the first iteration, which has nothing to compare against.
    pub cosine_difference: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub truths: TruthAssignment,
    pub profile: SourceProfile,
    pub dependence: DependenceMap,
    pub confidence: ConfidenceTable,
    pub popularity: PopularityTable,
    /// Supportive graphs of the last iteration, before row normalization.
    pub graphs: SupportiveGraphs,
    pub iterations: usize,
    pub converged: bool,
    pub final_cosine_difference: Option<f64>,
}

pub fn run(claims: &ClaimTable, config: &EngineConfig) -> Result<(DerivedView, RunOutcome), EngineError> {
    let view = derive_view(claims)?;
    let outcome = run_view(&view, config)?;
    Ok((view, outcome))
}

pub fn run_view(view: &DerivedView, config: &EngineConfig) -> Result<RunOutcome, EngineError> {
    run_traced(view, config, |_| {})
}

/// Runs the loop, calling `observer` after every outer iteration.
pub fn run_traced(
    view: &DerivedView,
    config: &EngineConfig,
    mut observer: impl FnMut(&IterationTrace<'_>),
) -> Result<RunOutcome, EngineError> {
    config.validate()?;
    let popularity = if config.use_popularity {
        compute_popularity(view)
    } else {
        PopularityTable::uniform(view.num_objects())
    };
    let mut confidence = initialize_confidence(view);
    let mut previous: Option<SourceProfile> = None;
    let mut last = None;
    let mut converged = false;
    let mut final_difference = None;
    let mut iterations = 0;

    for iteration in 1..=config.max_outer_iters {
        iterations = iteration;
        let walk_err = |failure| EngineError::Walk { iteration, failure };

        let mut dependence = if config.detect_copying {
            derive_dependence(
                view,
                &confidence,
                config.pc_max,
                config.nc_max,
                config.beta,
                &config.walk,
            )
            .map_err(walk_err)?
        } else {
            DependenceMap::zeros(view)
        };
        dependence.generation = iteration;

        debug_assert_eq!(dependence.generation, iteration);
        let raw = supportive_weights(view, &confidence, &popularity, &dependence, config.beta);
        let normalized = normalize_supportive(&raw).map_err(walk_err)?;
        let mut profile =
            derive_precision(&normalized, config.pp_max, config.np_max, &config.walk).map_err(walk_err)?;
        profile.generation = iteration;

        confidence = update_confidence(view, &profile);
        let difference = previous.as_ref().and_then(|p| cosine_difference(p, &profile));

        observer(&IterationTrace {
            iteration,
            dependence: &dependence,
            graphs: &normalized,
            profile: &profile,
            confidence: &confidence,
            cosine_difference: difference,
        });

        final_difference = difference;
        converged = difference.is_some_and(|d| d < config.delta);
        previous = Some(profile.clone());
        last = Some((profile, dependence, raw));
        if converged {
            break;
        }
    }

    let (profile, dependence, graphs) = last.expect("at least one iteration");
    if !converged {
        log::warn!(
            "no convergence after {} iterations (last cosine difference {:?})",
            iterations,
            final_difference
        );
    }
    Ok(RunOutcome {
        truths: extract_truths(view, &confidence),
        profile,
        dependence,
        confidence,
        popularity,
        graphs,
        iterations,
        converged,
        final_cosine_difference: final_difference,
    })
}
