//! Synthetic multi-truth datasets with planted ground truth.
//!
//! Objects follow a power-law popularity curve that drives how many
//! independent sources cover them. Independent sources claim each true value
//! with probability `honest_negative_precision` and pad their claims with
//! false values from the object's pool so that roughly a fraction
//! `honest_positive_precision` of their claims is true. Source 0 is the
//! copy victim when copiers are requested; copiers replicate its claims,
//! errors included, value by value with probability `copy_fidelity`.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::claims::{ClaimTable, TruthAssignment};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_objects: usize,
    /// All sources, copiers included.
    pub n_sources: usize,
    /// Inclusive range for the number of true values per object.
    pub truths_per_object: (usize, usize),
    pub false_pool_size: usize,
    pub honest_positive_precision: f64,
    pub honest_negative_precision: f64,
    pub n_copiers: usize,
    pub copy_fidelity: f64,
    /// Positive precision of the copy victim.
    pub victim_positive_precision: f64,
    /// Power-law exponent of object popularity; 0 gives uniform coverage.
    pub coverage_skew: f64,
    /// Expected fraction of objects an independent source covers.
    pub mean_coverage: f64,
    /// How strongly source precision falls off towards unpopular objects, in
    /// `[0, 1]`: at 1 the least popular object is claimed at precision 0.5.
    pub quality_popularity_correlation: f64,
    pub rng_seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_objects: 20,
            n_sources: 15,
            truths_per_object: (1, 3),
            false_pool_size: 10,
            honest_positive_precision: 0.9,
            honest_negative_precision: 0.8,
            n_copiers: 0,
            copy_fidelity: 0.9,
            victim_positive_precision: 0.4,
            coverage_skew: 0.0,
            mean_coverage: 0.6,
            quality_popularity_correlation: 0.0,
            rng_seed: 0,
        }
    }
}

fn probability(field: &'static str, p: f64) -> Result<(), SynthError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(SynthError::Invalid {
            field,
            reason: format!("{p} is not a probability"),
        })
    }
}

fn positive_probability(field: &'static str, p: f64) -> Result<(), SynthError> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(SynthError::Invalid {
            field,
            reason: format!("{p} is not in (0, 1]"),
        })
    }
}

/// Number of false values padded onto `k` true claims at precision `p`.
fn expected_false(k: usize, p: f64) -> f64 {
    k as f64 * (1.0 - p) / p
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let invalid = |field, reason: &str| {
            Err(SynthError::Invalid {
                field,
                reason: reason.to_string(),
            })
        };
        if self.n_objects == 0 {
            return invalid("n_objects", "must be positive");
        }
        if self.n_sources == 0 {
            return invalid("n_sources", "must be positive");
        }
        if self.n_copiers >= self.n_sources {
            return invalid("n_copiers", "must leave at least one independent source");
        }
        let (lo, hi) = self.truths_per_object;
        if lo == 0 || lo > hi {
            return invalid("truths_per_object", "needs 1 <= min <= max");
        }
        positive_probability("honest_positive_precision", self.honest_positive_precision)?;
        probability("honest_negative_precision", self.honest_negative_precision)?;
        probability("copy_fidelity", self.copy_fidelity)?;
        positive_probability("victim_positive_precision", self.victim_positive_precision)?;
        positive_probability("mean_coverage", self.mean_coverage)?;
        probability("quality_popularity_correlation", self.quality_popularity_correlation)?;
        if !(self.coverage_skew >= 0.0 && self.coverage_skew.is_finite()) {
            return invalid("coverage_skew", "must be a finite non-negative exponent");
        }

        let mut lowest = self.honest_positive_precision;
        if self.quality_popularity_correlation > 0.0 {
            lowest = lowest.min(0.5);
        }
        if self.n_copiers > 0 {
            lowest = lowest.min(self.victim_positive_precision);
        }
        let mut needed = expected_false(hi, lowest).ceil() as usize;
        if self.honest_negative_precision < 1.0 || self.n_copiers > 0 {
            // A source that drops every true value still claims one false value.
            needed = needed.max(1);
        }
        if needed > self.false_pool_size {
            return Err(SynthError::Infeasible(format!(
                "false pool of {} values cannot supply {} false claims per source",
                self.false_pool_size, needed
            )));
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment. Unknown keys are errors.
    pub fn from_key_values(text: &str) -> Result<Self, SynthError> {
        let mut spec = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| SynthError::Parse {
                line: line_no,
                reason: "expected key=value".into(),
            })?;
            spec.set(key.trim(), value.trim())
                .map_err(|reason| SynthError::Parse { line: line_no, reason })?;
        }
        Ok(spec)
    }

    /// Inverse of [`SynthSpec::from_key_values`], one field per line.
    pub fn to_key_values(&self) -> String {
        let (lo, hi) = self.truths_per_object;
        format!(
            "n_objects={}\nn_sources={}\ntruths_per_object={lo}..{hi}\nfalse_pool_size={}\n\
             honest_positive_precision={}\nhonest_negative_precision={}\nn_copiers={}\ncopy_fidelity={}\n\
             victim_positive_precision={}\ncoverage_skew={}\nmean_coverage={}\n\
             quality_popularity_correlation={}\nrng_seed={}\n",
            self.n_objects,
            self.n_sources,
            self.false_pool_size,
            self.honest_positive_precision,
            self.honest_negative_precision,
            self.n_copiers,
            self.copy_fidelity,
            self.victim_positive_precision,
            self.coverage_skew,
            self.mean_coverage,
            self.quality_popularity_correlation,
            self.rng_seed,
        )
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("bad value {v:?} for {key}"))
        }
        match key {
            "n_objects" => self.n_objects = num(key, value)?,
            "n_sources" => self.n_sources = num(key, value)?,
            "truths_per_object" => {
                self.truths_per_object = match value.split_once("..") {
                    Some((a, b)) => (num(key, a.trim())?, num(key, b.trim())?),
                    None => {
                        let n = num(key, value)?;
                        (n, n)
                    }
                }
            }
            "false_pool_size" => self.false_pool_size = num(key, value)?,
            "honest_positive_precision" => self.honest_positive_precision = num(key, value)?,
            "honest_negative_precision" => self.honest_negative_precision = num(key, value)?,
            "n_copiers" => self.n_copiers = num(key, value)?,
            "copy_fidelity" => self.copy_fidelity = num(key, value)?,
            "victim_positive_precision" => self.victim_positive_precision = num(key, value)?,
            "coverage_skew" => self.coverage_skew = num(key, value)?,
            "mean_coverage" => self.mean_coverage = num(key, value)?,
            "quality_popularity_correlation" => self.quality_popularity_correlation = num(key, value)?,
            "rng_seed" => self.rng_seed = num(key, value)?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }
}

pub fn object_name(o: usize) -> String {
    format!("o{o:04}")
}

pub fn source_name(s: usize) -> String {
    format!("s{s:03}")
}

fn true_value(j: usize) -> String {
    format!("t{j}")
}

fn false_value(j: usize) -> String {
    format!("f{j}")
}

struct Planted {
    truths: Vec<Vec<String>>,
    pools: Vec<Vec<String>>,
    /// Relative popularity in `(0, 1]`, 1 for the most popular object.
    relative: Vec<f64>,
}

fn draw_claims(
    rng: &mut ChaCha8Rng,
    truths: &[String],
    pool: &[String],
    recall: f64,
    precision: f64,
) -> BTreeSet<String> {
    let mut claims: BTreeSet<String> = truths.iter().filter(|_| rng.random_bool(recall)).cloned().collect();
    let x = expected_false(claims.len(), precision);
    let mut n_false = x.floor() as usize + usize::from(rng.random_bool(x.fract()));
    if claims.is_empty() {
        n_false = n_false.max(1);
    }
    let n_false = n_false.min(pool.len());
    claims.extend(pool.choose_multiple(rng, n_false).cloned());
    claims
}

/// Draws a dataset and its planted truth. Identical specs give identical output.
pub fn generate(spec: &SynthSpec) -> Result<(ClaimTable, TruthAssignment), SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);

    let weights: Vec<f64> = (0..spec.n_objects)
        .map(|o| ((o + 1) as f64).powf(-spec.coverage_skew))
        .collect();
    let total: f64 = weights.iter().sum();
    let planted = Planted {
        truths: (0..spec.n_objects)
            .map(|_| {
                let k = rng.random_range(spec.truths_per_object.0..=spec.truths_per_object.1);
                (0..k).map(true_value).collect()
            })
            .collect(),
        pools: (0..spec.n_objects)
            .map(|_| (0..spec.false_pool_size).map(false_value).collect())
            .collect(),
        relative: weights.iter().map(|w| w / weights[0]).collect(),
    };
    let inclusion: Vec<f64> = weights
        .iter()
        .map(|w| (spec.mean_coverage * w * spec.n_objects as f64 / total).min(1.0))
        .collect();

    let n_independent = spec.n_sources - spec.n_copiers;
    // claims[s][o]
    let mut claims: Vec<Vec<Option<BTreeSet<String>>>> = vec![vec![None; spec.n_objects]; spec.n_sources];

    let precision_on = |s: usize, o: usize| -> f64 {
        let base = if s == 0 && spec.n_copiers > 0 {
            spec.victim_positive_precision
        } else {
            spec.honest_positive_precision
        };
        let drop = spec.quality_popularity_correlation * (1.0 - planted.relative[o]);
        base * (1.0 - drop) + 0.5 * drop
    };

    for s in 0..n_independent {
        let mut covered: Vec<usize> = (0..spec.n_objects).filter(|&o| rng.random_bool(inclusion[o])).collect();
        if covered.is_empty() {
            let all: Vec<usize> = (0..spec.n_objects).collect();
            let pick = *all
                .choose_weighted(&mut rng, |&o| weights[o])
                .expect("positive weights");
            covered.push(pick);
        }
        for o in covered {
            claims[s][o] = Some(draw_claims(
                &mut rng,
                &planted.truths[o],
                &planted.pools[o],
                spec.honest_negative_precision,
                precision_on(s, o),
            ));
        }
    }

    // Objects nobody picked get one random independent source.
    for o in 0..spec.n_objects {
        if (0..n_independent).all(|s| claims[s][o].is_none()) {
            let s = rng.random_range(0..n_independent);
            claims[s][o] = Some(draw_claims(
                &mut rng,
                &planted.truths[o],
                &planted.pools[o],
                spec.honest_negative_precision,
                precision_on(s, o),
            ));
        }
    }

    for c in n_independent..spec.n_sources {
        for o in 0..spec.n_objects {
            let Some(victim) = claims[0][o].clone() else { continue };
            let victim: Vec<String> = victim.into_iter().collect();
            let mut copied: BTreeSet<String> = victim
                .iter()
                .filter(|_| rng.random_bool(spec.copy_fidelity))
                .cloned()
                .collect();
            if copied.is_empty() {
                copied.insert(victim.choose(&mut rng).expect("non-empty claims").clone());
            }
            claims[c][o] = Some(copied);
        }
    }

    // Every planted truth must be claimed by someone.
    for o in 0..spec.n_objects {
        let mut holders: Vec<usize> = (0..n_independent).filter(|&s| claims[s][o].is_some()).collect();
        holders.shuffle(&mut rng);
        for t in &planted.truths[o] {
            let seen = claims.iter().any(|row| row[o].as_ref().is_some_and(|c| c.contains(t)));
            if !seen {
                let s = holders[rng.random_range(0..holders.len())];
                claims[s][o].as_mut().expect("holder covers object").insert(t.clone());
            }
        }
    }

    let mut table = ClaimTable::new();
    for (s, row) in claims.iter().enumerate() {
        for (o, vals) in row.iter().enumerate() {
            if let Some(vals) = vals {
                for v in vals {
                    table.insert(&source_name(s), &object_name(o), v);
                }
            }
        }
    }
    let mut gold = TruthAssignment::new();
    for (o, truths) in planted.truths.iter().enumerate() {
        gold.truths.insert(object_name(o), truths.iter().cloned().collect());
    }
    Ok((table, gold))
}
