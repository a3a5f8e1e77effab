#![allow(dead_code)]

pub mod equivalence;
pub mod reference;

use mtd_core::{ClaimTable, TruthAssignment};

/// Stationary distribution of a row-stochastic dense matrix by repeated
/// squaring of the lazy chain `(P + I)/2` until every row agrees.
pub fn matrix_power_stationary(p: &[Vec<f64>]) -> Vec<f64> {
    let n = p.len();
    if n == 1 {
        return vec![1.0];
    }
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * p[i][j] + if i == j { 0.5 } else { 0.0 }).collect())
        .collect();
    for _ in 0..100 {
        let mut sq = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                let a = m[i][k];
                for j in 0..n {
                    sq[i][j] += a * m[k][j];
                }
            }
        }
        m = sq;
        let mut spread: f64 = 0.0;
        for row in m.iter().skip(1) {
            for j in 0..n {
                spread = spread.max((row[j] - m[0][j]).abs());
            }
        }
        if spread < 1e-15 {
            break;
        }
    }
    let mut pi: Vec<f64> = (0..n).map(|j| m.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    pi
}

pub fn table(rows: &[(&str, &str, &str)]) -> ClaimTable {
    let mut t = ClaimTable::new();
    for (s, o, v) in rows {
        t.insert(s, o, v);
    }
    t
}

/// The three sources of the "Harry Potter" cast example.
pub fn cast() -> ClaimTable {
    table(&[
        ("s1", "Harry Potter", "Daniel Radcliffe"),
        ("s1", "Harry Potter", "Emma Watson"),
        ("s1", "Harry Potter", "Rupert Grint"),
        ("s2", "Harry Potter", "Emma Watson"),
        ("s2", "Harry Potter", "Rupert Grint"),
        ("s3", "Harry Potter", "Daniel Radcliffe"),
        ("s3", "Harry Potter", "Emma Watson"),
        ("s3", "Harry Potter", "Jonny Depp"),
    ])
}

pub fn f1_of(pred: &TruthAssignment, gold: &TruthAssignment) -> f64 {
    let (p, r) = mtd_core::metrics::precision_recall(std::slice::from_ref(pred), gold).unwrap();
    mtd_core::metrics::f1(p, r)
}
