//! Reference truth-discovery methods used as benchmark baselines.
//!
//! [`voting`] works on joint value *sets*: the most common exact claim set
//! wins, so a partially correct source never contributes to recall. The
//! hub/authority methods [`sums`] and [`avg_log`] score values on both sides
//! of the mutual-exclusion split and keep a value when its claim score beats
//! its disclaim score.

use std::collections::{BTreeMap, BTreeSet};

use crate::claims::{DerivedView, SourceId, TruthAssignment};

/// Most frequent exact positive-claim set per object. Ties go to the
/// lexicographically smallest sorted value list.
pub fn voting(view: &DerivedView) -> TruthAssignment {
    let mut out = TruthAssignment::new();
    for entry in view.objects() {
        let mut tally: BTreeMap<Vec<&str>, usize> = BTreeMap::new();
        for c in &entry.claims {
            let set: Vec<&str> = c.positive().iter().map(|&v| entry.universe[v].as_str()).collect();
            *tally.entry(set).or_default() += 1;
        }
        // BTreeMap iterates in key order, so the first maximum is the smallest key.
        let best = tally
            .iter()
            .fold(None::<(&Vec<&str>, usize)>, |best, (set, &n)| match best {
                Some((_, m)) if m >= n => best,
                _ => Some((set, n)),
            })
            .map(|(set, _)| set.iter().map(|v| v.to_string()).collect::<BTreeSet<_>>())
            .unwrap_or_default();
        out.truths.insert(entry.name.clone(), best);
    }
    out
}

/// How a source's score is formed from the true-scores of its claims.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceWeighting {
    /// Sum of claimed values' true-scores.
    Sums,
    /// `ln(|O_s|)` times the mean true-score of its claimed values.
    AverageLog,
}

/// Final state of a hub/authority iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct HubAuthorityScores {
    pub source: Vec<f64>,
    /// Claim-side score per object per value, universe order.
    pub true_score: Vec<Vec<f64>>,
    /// Disclaim-side score per object per value.
    pub false_score: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
}

fn value_scores(view: &DerivedView, source: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(view.num_objects());
    let mut f: Vec<Vec<f64>> = Vec::with_capacity(view.num_objects());
    for entry in view.objects() {
        let mut tv = vec![0.0; entry.universe.len()];
        let mut fv = vec![0.0; entry.universe.len()];
        for c in &entry.claims {
            let w = source[c.source.0];
            for v in 0..entry.universe.len() {
                if c.claims(v) {
                    tv[v] += w;
                } else {
                    fv[v] += w;
                }
            }
        }
        t.push(tv);
        f.push(fv);
    }
    // One shared constant keeps the claim/disclaim comparison intact.
    let max = t.iter().chain(&f).flatten().copied().fold(0.0, f64::max);
    if max > 0.0 {
        t.iter_mut().chain(f.iter_mut()).flatten().for_each(|x| *x /= max);
    }
    (t, f)
}

fn source_scores(view: &DerivedView, true_score: &[Vec<f64>], weighting: SourceWeighting) -> Vec<f64> {
    let mut scores: Vec<f64> = view
        .source_ids()
        .map(|s: SourceId| {
            let objs = view.objects_of_source(s);
            let mut sum = 0.0;
            let mut n = 0usize;
            for &(o, slot) in objs {
                for &v in view.object(o).claims[slot].positive() {
                    sum += true_score[o.0][v];
                    n += 1;
                }
            }
            match weighting {
                SourceWeighting::Sums => sum,
                SourceWeighting::AverageLog => (objs.len() as f64).ln() * sum / n as f64,
            }
        })
        .collect();
    let max = scores.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        scores.iter_mut().for_each(|x| *x /= max);
    } else {
        // Every source scored zero (e.g. all cover one object under AverageLog).
        scores.iter_mut().for_each(|x| *x = 1.0);
    }
    scores
}

/// Alternates value and source scoring from uniform source scores until the
/// largest source-score change is below `tol` or `max_iters` rounds ran.
pub fn hub_authority(view: &DerivedView, weighting: SourceWeighting, max_iters: usize, tol: f64) -> HubAuthorityScores {
    let mut source = vec![1.0; view.num_sources()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        let (t, _) = value_scores(view, &source);
        let next = source_scores(view, &t, weighting);
        let change = source.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        source = next;
        if change < tol {
            converged = true;
            break;
        }
    }
    let (true_score, false_score) = value_scores(view, &source);
    HubAuthorityScores {
        source,
        true_score,
        false_score,
        iterations,
        converged,
    }
}

fn decide(view: &DerivedView, scores: &HubAuthorityScores) -> TruthAssignment {
    let mut out = TruthAssignment::new();
    for (o, entry) in view.objects().iter().enumerate() {
        let truths = (0..entry.universe.len())
            .filter(|&v| scores.true_score[o][v] > scores.false_score[o][v])
            .map(|v| entry.universe[v].clone())
            .collect();
        out.truths.insert(entry.name.clone(), truths);
    }
    out
}

pub fn sums(view: &DerivedView, max_iters: usize, tol: f64) -> TruthAssignment {
    decide(view, &hub_authority(view, SourceWeighting::Sums, max_iters, tol))
}

pub fn avg_log(view: &DerivedView, max_iters: usize, tol: f64) -> TruthAssignment {
    decide(view, &hub_authority(view, SourceWeighting::AverageLog, max_iters, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::claims::{derive_view, ClaimTable};

    fn view(rows: &[(&str, &str, &str)]) -> DerivedView {
        let mut t = ClaimTable::new();
        for (s, o, v) in rows {
            t.insert(s, o, v);
        }
        derive_view(&t).unwrap()
    }

    fn set(vals: &[&str]) -> BTreeSet<String> {
        vals.iter().map(|v| v.to_string()).collect()
    }

    #[test]
    fn voting_on_cast_breaks_tie_lexicographically() {
        let v = view(&[
            ("s1", "hp", "daniel radcliffe"),
            ("s1", "hp", "emma watson"),
            ("s1", "hp", "rupert grint"),
            ("s2", "hp", "emma watson"),
            ("s2", "hp", "rupert grint"),
            ("s3", "hp", "daniel radcliffe"),
            ("s3", "hp", "emma watson"),
            ("s3", "hp", "jonny depp"),
        ]);
        // Candidates, sorted: [dr, ew, jd] < [dr, ew, rg] < [ew, rg].
        assert_eq!(
            voting(&v).get("hp").unwrap(),
            &set(&["daniel radcliffe", "emma watson", "jonny depp"])
        );
    }

    #[test]
    fn voting_majority_and_single_source() {
        let v = view(&[
            ("a", "o", "x"),
            ("a", "o", "y"),
            ("b", "o", "x"),
            ("b", "o", "y"),
            ("c", "o", "z"),
        ]);
        assert_eq!(voting(&v).get("o").unwrap(), &set(&["x", "y"]));
        let v = view(&[("a", "o", "x"), ("a", "o", "y")]);
        assert_eq!(voting(&v).get("o").unwrap(), &set(&["x", "y"]));
    }

    #[test]
    fn identical_sources_make_every_claim_true() {
        let rows = [("a", "o1", "x"), ("a", "o2", "y"), ("b", "o1", "x"), ("b", "o2", "y")];
        let v = view(&rows);
        for truths in [sums(&v, 50, 1e-9), avg_log(&v, 50, 1e-9)] {
            assert_eq!(truths.get("o1").unwrap(), &set(&["x"]));
            assert_eq!(truths.get("o2").unwrap(), &set(&["y"]));
        }
        // A single object per source zeroes the log weight; scores fall back to uniform.
        let v = view(&[("a", "o", "x"), ("b", "o", "x")]);
        assert_eq!(avg_log(&v, 50, 1e-9).get("o").unwrap(), &set(&["x"]));
    }

    #[test]
    fn unanimous_value_is_true() {
        let v = view(&[
            ("a", "o", "x"),
            ("a", "o", "y"),
            ("b", "o", "x"),
            ("c", "o", "x"),
            ("c", "o", "z"),
        ]);
        for truths in [sums(&v, 50, 1e-9), avg_log(&v, 50, 1e-9)] {
            assert!(truths.get("o").unwrap().contains("x"));
        }
    }

    /// a: o1{x}, o2{p}; b: o1{x, y}; c: o1{y}, o2{q}.
    fn trace_instance() -> DerivedView {
        view(&[
            ("a", "o1", "x"),
            ("a", "o2", "p"),
            ("b", "o1", "x"),
            ("b", "o1", "y"),
            ("c", "o1", "y"),
            ("c", "o2", "q"),
        ])
    }

    #[test]
    fn sums_hand_trace() {
        // Round 1 from t = (1, 1, 1):
        //   o1: T(x)=2 F(x)=1, T(y)=2 F(y)=1; o2: T(p)=1 F(p)=1, T(q)=1 F(q)=1; max 2.
        //   T = x 1, y 1, p .5, q .5.
        //   a = 1 + .5 = 1.5, b = 2, c = 1.5 → (.75, 1, .75).
        // Round 2 from (.75, 1, .75):
        //   T(x)=1.75 F(x)=.75, T(y)=1.75 F(y)=.75, T(p)=.75 F(p)=.75, same for q; max 1.75.
        //   a = 1 + 3/7 = 10/7, b = 2, c = 10/7 → (5/7, 1, 5/7).
        // Round 3 from (5/7, 1, 5/7):
        //   T(x) = 12/7, T(p) = 5/7; max 12/7 → T(x) = 1, T(p) = 5/12.
        //   a = 17/12, b = 2, c = 17/12 → (17/24, 1, 17/24).
        let v = trace_instance();
        let s = hub_authority(&v, SourceWeighting::Sums, 3, 0.0);
        assert_eq!(s.iterations, 3);
        let want = [17.0 / 24.0, 1.0, 17.0 / 24.0];
        for (got, w) in s.source.iter().zip(want) {
            assert!((got - w).abs() < 1e-12, "{got} vs {w}");
        }
        let truths = decide(&v, &s);
        assert_eq!(truths.get("o1").unwrap(), &set(&["x", "y"]));
        // p and q tie on both sides (17/24 each), so neither is kept.
        assert!(truths.get("o2").unwrap().is_empty());
    }

    #[test]
    fn avg_log_hand_trace() {
        // |O_a| = |O_c| = 2, |O_b| = 1 → b's weight is ln 1 = 0 from round 1 on.
        // Round 1 value scores as in the Sums trace: x 1, y 1, p .5, q .5.
        //   a = ln2·(1.5/2), b = 0, c = ln2·(1.5/2) → (1, 0, 1).
        // Round 2 from (1, 0, 1):
        //   T(x)=1 F(x)=1, T(y)=1 F(y)=1, T(p)=1 F(p)=1, T(q)=1 F(q)=1 → all 1.
        //   a = ln2, c = ln2 → (1, 0, 1). Change 0.
        let v = trace_instance();
        let s = hub_authority(&v, SourceWeighting::AverageLog, 10, 1e-12);
        assert_eq!(s.iterations, 2);
        assert!(s.converged);
        assert_eq!(s.source, vec![1.0, 0.0, 1.0]);
        let truths = decide(&v, &s);
        assert!(truths.get("o1").unwrap().is_empty());
        assert!(truths.get("o2").unwrap().is_empty());
    }

    #[test]
    fn baselines_stay_within_universe_and_finite() {
        let v = trace_instance();
        for truths in [voting(&v), sums(&v, 100, 1e-9), avg_log(&v, 100, 1e-9)] {
            for o in v.object_ids() {
                let universe: BTreeSet<String> = v.universe(o).iter().cloned().collect();
                assert!(truths.get(v.object_name(o)).unwrap().is_subset(&universe));
            }
        }
        let s = hub_authority(&v, SourceWeighting::Sums, 100, 1e-9);
        assert!(s.source.iter().all(|x| x.is_finite()));
        assert!(s.true_score.iter().flatten().all(|x| x.is_finite() && *x <= 1.0));
    }
}
