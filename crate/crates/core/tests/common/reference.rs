//! Unoptimized scalar model of the full iteration, keyed by identifier
//! strings throughout. Shares no code with the engine beyond `ClaimTable`
//! accessors; random walks use dense matrix powers instead of power
//! iteration.

use std::collections::{BTreeMap, BTreeSet};

use mtd_core::ClaimTable;

use super::matrix_power_stationary;

type Key = (String, String);

#[derive(Debug, Clone, Copy)]
pub struct Params {
    pub beta: f64,
    pub delta: f64,
    pub pp_max: f64,
    pub np_max: f64,
    pub pc_max: f64,
    pub nc_max: f64,
    pub max_iters: usize,
}

/// One outer iteration of state.
#[derive(Debug, Clone)]
pub struct RefIteration {
    /// (source, object) → (D, D̃)
    pub dependence: BTreeMap<Key, (f64, f64)>,
    /// (from, to) → row-normalized ± supportive weights
    pub positive_graph: BTreeMap<Key, f64>,
    pub negative_graph: BTreeMap<Key, f64>,
    /// source → (τ, τ̃)
    pub precision: BTreeMap<String, (f64, f64)>,
    /// (object, value) → (C_v, C_ṽ) after the update
    pub confidence: BTreeMap<Key, (f64, f64)>,
    pub cosine_difference: Option<f64>,
}

pub struct Reference<'a> {
    claims: &'a ClaimTable,
    sources: Vec<String>,
    objects: Vec<String>,
}

impl<'a> Reference<'a> {
    pub fn new(claims: &'a ClaimTable) -> Self {
        Self {
            claims,
            sources: claims.sources().map(String::from).collect(),
            objects: claims.objects().map(String::from).collect(),
        }
    }

    fn v(&self, s: &str, o: &str) -> Option<&BTreeSet<String>> {
        self.claims.positive_claims(s, o)
    }

    fn universe(&self, o: &str) -> BTreeSet<String> {
        let mut u = BTreeSet::new();
        for s in &self.sources {
            if let Some(vals) = self.v(s, o) {
                u.extend(vals.iter().cloned());
            }
        }
        u
    }

    fn negative(&self, s: &str, o: &str) -> BTreeSet<String> {
        self.universe(o).difference(self.v(s, o).unwrap()).cloned().collect()
    }

    fn sources_of(&self, o: &str) -> Vec<String> {
        self.sources
            .iter()
            .filter(|s| self.v(s, o).is_some())
            .cloned()
            .collect()
    }

    fn objects_of(&self, s: &str) -> Vec<String> {
        self.objects
            .iter()
            .filter(|o| self.v(s, o).is_some())
            .cloned()
            .collect()
    }

    pub fn popularity(&self, enabled: bool) -> BTreeMap<String, f64> {
        if !enabled {
            let n = self.objects.len() as f64;
            return self.objects.iter().map(|o| (o.clone(), 1.0 / n)).collect();
        }
        let n = self.objects.len() as f64;
        let mut raw = BTreeMap::new();
        for o in &self.objects {
            let mut p = 0.0;
            for s in self.sources_of(o) {
                let cov = self.objects_of(&s).len() as f64 / n;
                p += 1.0 / cov;
            }
            raw.insert(o.clone(), p);
        }
        let total: f64 = raw.values().sum();
        raw.into_iter().map(|(o, p)| (o, p / total)).collect()
    }

    pub fn initial_confidence(&self) -> BTreeMap<Key, (f64, f64)> {
        let mut c = BTreeMap::new();
        for o in &self.objects {
            let so = self.sources_of(o);
            for v in self.universe(o) {
                let votes = so.iter().filter(|s| self.v(s, o).unwrap().contains(&v)).count();
                let cv = votes as f64 / so.len() as f64;
                c.insert((o.clone(), v), (cv, 1.0 - cv));
            }
        }
        c
    }

    fn positive_agreement(&self, s1: &str, s2: &str, o: &str) -> BTreeSet<String> {
        self.v(s1, o)
            .unwrap()
            .intersection(self.v(s2, o).unwrap())
            .cloned()
            .collect()
    }

    fn negative_agreement(&self, s1: &str, s2: &str, o: &str) -> BTreeSet<String> {
        let union: BTreeSet<String> = self.v(s1, o).unwrap().union(self.v(s2, o).unwrap()).cloned().collect();
        self.universe(o).difference(&union).cloned().collect()
    }

    fn walk(
        &self,
        labels: &[String],
        weight: impl Fn(&str, &str) -> f64,
    ) -> (BTreeMap<Key, f64>, BTreeMap<String, f64>) {
        let n = labels.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m[i][j] = weight(&labels[i], &labels[j]);
                }
            }
            let row: f64 = m[i].iter().sum();
            if n > 1 {
                for x in m[i].iter_mut() {
                    *x /= row;
                }
            }
        }
        let pi = matrix_power_stationary(&m);
        let mut normalized = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    normalized.insert((labels[i].clone(), labels[j].clone()), m[i][j]);
                }
            }
        }
        let visits = labels.iter().cloned().zip(pi).collect();
        (normalized, visits)
    }

    fn anchor(visits: &BTreeMap<String, f64>, top: f64) -> BTreeMap<String, f64> {
        let max = visits.values().cloned().fold(0.0, f64::max);
        visits.iter().map(|(k, p)| (k.clone(), p * top / max)).collect()
    }

    pub fn dependence(&self, conf: &BTreeMap<Key, (f64, f64)>, p: &Params) -> BTreeMap<Key, (f64, f64)> {
        let mut dep = BTreeMap::new();
        for o in &self.objects {
            let so = self.sources_of(o);
            if so.len() < 2 {
                for s in so {
                    dep.insert((s, o.clone()), (0.0, 0.0));
                }
                continue;
            }
            let c = |v: &String| conf[&(o.clone(), v.clone())];
            let (_, pos) = self.walk(&so, |s1, s2| {
                let a = self.positive_agreement(s1, s2, o);
                let denom = self.v(s2, o).unwrap().len() as f64;
                let mut prod = 1.0;
                for v in &a {
                    prod *= c(v).0;
                }
                p.beta + (1.0 - p.beta) * (a.len() as f64 / denom) * (1.0 - prod)
            });
            let (_, neg) = self.walk(&so, |s1, s2| {
                let a = self.negative_agreement(s1, s2, o);
                let denom = self.negative(s2, o).len() as f64;
                if denom == 0.0 {
                    return p.beta;
                }
                let mut prod = 1.0;
                for v in &a {
                    prod *= c(v).1;
                }
                p.beta + (1.0 - p.beta) * (a.len() as f64 / denom) * (1.0 - prod)
            });
            let (pos, neg) = (Self::anchor(&pos, p.pc_max), Self::anchor(&neg, p.nc_max));
            for s in so {
                dep.insert((s.clone(), o.clone()), (pos[&s], neg[&s]));
            }
        }
        dep
    }

    /// Positive and negative endorsement sums for one ordered pair.
    pub fn endorsement(
        &self,
        s1: &str,
        s2: &str,
        conf: &BTreeMap<Key, (f64, f64)>,
        pop: &BTreeMap<String, f64>,
        dep: &BTreeMap<Key, (f64, f64)>,
    ) -> (f64, f64, usize) {
        let (mut pos, mut neg, mut common) = (0.0, 0.0, 0usize);
        for o in &self.objects {
            if self.v(s1, o).is_none() || self.v(s2, o).is_none() {
                continue;
            }
            common += 1;
            let (d, dt) = dep[&(s1.to_string(), o.clone())];
            let a = self.positive_agreement(s1, s2, o);
            let mut prod = 1.0;
            for v in &a {
                prod *= conf[&(o.clone(), v.clone())].1;
            }
            pos += a.len() as f64 / self.v(s2, o).unwrap().len() as f64 * (1.0 - prod) * pop[o] * (1.0 - d);
            let denom = self.negative(s2, o).len();
            if denom > 0 {
                let a = self.negative_agreement(s1, s2, o);
                let mut prod = 1.0;
                for v in &a {
                    prod *= conf[&(o.clone(), v.clone())].0;
                }
                neg += a.len() as f64 / denom as f64 * (1.0 - prod) * pop[o] * (1.0 - dt);
            }
        }
        (pos, neg, common)
    }

    pub fn run(&self, p: &Params, detect_copying: bool, use_popularity: bool) -> Vec<RefIteration> {
        let pop = self.popularity(use_popularity);
        let mut conf = self.initial_confidence();
        let mut out: Vec<RefIteration> = Vec::new();
        for _ in 0..p.max_iters {
            let dep = if detect_copying {
                self.dependence(&conf, p)
            } else {
                let mut z = BTreeMap::new();
                for s in &self.sources {
                    for o in self.objects_of(s) {
                        z.insert((s.clone(), o), (0.0, 0.0));
                    }
                }
                z
            };
            let weight = |s1: &str, s2: &str, positive: bool| {
                let (pos, neg, common) = self.endorsement(s1, s2, &conf, &pop, &dep);
                if common == 0 {
                    p.beta
                } else {
                    let a = if positive { pos } else { neg };
                    p.beta + (1.0 - p.beta) * a / common as f64
                }
            };
            let (pg, pv) = self.walk(&self.sources, |a, b| weight(a, b, true));
            let (ng, nv) = self.walk(&self.sources, |a, b| weight(a, b, false));
            let (tau, tau_n) = (Self::anchor(&pv, p.pp_max), Self::anchor(&nv, p.np_max));
            let precision: BTreeMap<String, (f64, f64)> =
                self.sources.iter().map(|s| (s.clone(), (tau[s], tau_n[s]))).collect();

            let mut next = BTreeMap::new();
            for o in &self.objects {
                let so = self.sources_of(o);
                for v in self.universe(o) {
                    let (mut t, mut f) = (0.0, 0.0);
                    for s in &so {
                        let (tp, tn) = precision[s];
                        if self.v(s, o).unwrap().contains(&v) {
                            t += tp;
                            f += 1.0 - tp;
                        } else {
                            t += 1.0 - tn;
                            f += tn;
                        }
                    }
                    next.insert((o.clone(), v), (t / so.len() as f64, f / so.len() as f64));
                }
            }
            conf = next;

            let cosine_difference = out.last().map(|prev| {
                let a: Vec<f64> = self
                    .sources
                    .iter()
                    .map(|s| prev.precision[s].0)
                    .chain(self.sources.iter().map(|s| prev.precision[s].1))
                    .collect();
                let b: Vec<f64> = self
                    .sources
                    .iter()
                    .map(|s| precision[s].0)
                    .chain(self.sources.iter().map(|s| precision[s].1))
                    .collect();
                let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
                let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                1.0 - dot / (na * nb)
            });
            let done = cosine_difference.is_some_and(|d| d < p.delta);
            out.push(RefIteration {
                dependence: dep,
                positive_graph: pg,
                negative_graph: ng,
                precision,
                confidence: conf.clone(),
                cosine_difference,
            });
            if done {
                break;
            }
        }
        out
    }
}
