//! Side-by-side comparison of engine traces against the reference model.

use super::reference::{Params, RefIteration, Reference};
use mtd_core::engine::{self, IterationTrace};
use mtd_core::synth::generate;
use mtd_core::{derive_view, ClaimTable, DerivedView, EngineConfig, SynthSpec, Variant, WalkParams};

const TOL: f64 = 1e-9;

struct Snapshot {
    dependence: Vec<(String, String, f64, f64)>,
    positive: Vec<(String, String, f64)>,
    negative: Vec<(String, String, f64)>,
    precision: Vec<(String, f64, f64)>,
    confidence: Vec<(String, String, f64, f64)>,
    cosine_difference: Option<f64>,
}

fn snapshot(view: &DerivedView, t: &IterationTrace<'_>) -> Snapshot {
    let mut dependence = Vec::new();
    for o in view.object_ids() {
        for s in view.sources_of_object(o) {
            let (d, dt) = t.dependence.get(view, s, o).unwrap();
            dependence.push((view.source_name(s).into(), view.object_name(o).into(), d, dt));
        }
    }
    let edges = |g: &mtd_core::EndorsementGraph| {
        let mut out = Vec::new();
        for i in 0..g.len() {
            for j in 0..g.len() {
                if i != j {
                    out.push((
                        view.source_name(g.vertices()[i]).to_string(),
                        view.source_name(g.vertices()[j]).to_string(),
                        g.weight(i, j),
                    ));
                }
            }
        }
        out
    };
    let precision = view
        .source_ids()
        .map(|s| {
            (
                view.source_name(s).into(),
                t.profile.positive[s.0],
                t.profile.negative[s.0],
            )
        })
        .collect();
    let confidence = t
        .confidence
        .iter()
        .map(|(o, v, c, ct)| (view.object_name(o).into(), view.universe(o)[v].clone(), c, ct))
        .collect();
    Snapshot {
        dependence,
        positive: edges(&t.graphs.positive),
        negative: edges(&t.graphs.negative),
        precision,
        confidence,
        cosine_difference: t.cosine_difference,
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

fn compare(label: &str, got: &Snapshot, want: &RefIteration) {
    assert_eq!(got.dependence.len(), want.dependence.len(), "{label}: dependence size");
    for (s, o, d, dt) in &got.dependence {
        let (rd, rdt) = want.dependence[&(s.clone(), o.clone())];
        assert!(
            close(*d, rd) && close(*dt, rdt),
            "{label}: D({s},{o}) = ({d},{dt}) vs ({rd},{rdt})"
        );
    }
    for (edges, reference, name) in [
        (&got.positive, &want.positive_graph, "positive"),
        (&got.negative, &want.negative_graph, "negative"),
    ] {
        assert_eq!(edges.len(), reference.len());
        for (a, b, w) in edges {
            let r = reference[&(a.clone(), b.clone())];
            assert!(close(*w, r), "{label}: {name} edge {a}->{b} = {w} vs {r}");
        }
    }
    for (s, t, tn) in &got.precision {
        let (rt, rtn) = want.precision[s];
        assert!(
            close(*t, rt) && close(*tn, rtn),
            "{label}: tau({s}) = ({t},{tn}) vs ({rt},{rtn})"
        );
    }
    assert_eq!(got.confidence.len(), want.confidence.len());
    for (o, v, c, ct) in &got.confidence {
        let (rc, rct) = want.confidence[&(o.clone(), v.clone())];
        assert!(
            close(*c, rc) && close(*ct, rct),
            "{label}: C({o},{v}) = ({c},{ct}) vs ({rc},{rct})"
        );
    }
    match (got.cosine_difference, want.cosine_difference) {
        (None, None) => {}
        (Some(a), Some(b)) => assert!(close(a, b), "{label}: cosine difference {a} vs {b}"),
        other => panic!("{label}: cosine difference presence differs: {other:?}"),
    }
}

/// Runs engine and reference side by side and compares every iteration.
/// Returns the number of iterations compared.
pub fn check_equivalence(claims: &ClaimTable, variant: Variant, label: &str) -> usize {
    let config = EngineConfig {
        walk: WalkParams {
            tol: 1e-13,
            max_iters: 100_000,
        },
        ..EngineConfig::default().with_variant(variant)
    };
    let view = derive_view(claims).unwrap();
    let mut snaps = Vec::new();
    let outcome = engine::run_traced(&view, &config, |t| snaps.push(snapshot(&view, t))).unwrap();

    let params = Params {
        beta: config.beta,
        delta: config.delta,
        pp_max: config.pp_max,
        np_max: config.np_max,
        pc_max: config.pc_max,
        nc_max: config.nc_max,
        max_iters: config.max_outer_iters,
    };
    let reference = Reference::new(claims).run(&params, config.detect_copying, config.use_popularity);
    assert_eq!(snaps.len(), reference.len(), "{label}: iteration count");
    assert_eq!(outcome.iterations, reference.len());
    for (i, (got, want)) in snaps.iter().zip(&reference).enumerate() {
        compare(&format!("{label} iteration {}", i + 1), got, want);
    }
    snaps.len()
}

pub fn small_instances() -> Vec<(String, ClaimTable)> {
    let mut out = vec![("cast example".to_string(), super::cast())];
    for seed in 0..25u64 {
        let n_sources = 2 + (seed % 4) as usize;
        let spec = SynthSpec {
            n_objects: 1 + (seed % 6) as usize,
            n_sources,
            truths_per_object: (1, 2),
            false_pool_size: 3,
            n_copiers: if n_sources >= 3 && seed % 3 == 0 { 1 } else { 0 },
            coverage_skew: (seed % 3) as f64 * 0.75,
            mean_coverage: 0.7,
            rng_seed: 1000 + seed,
            ..SynthSpec::default()
        };
        let (claims, _) = generate(&spec).unwrap();
        out.push((format!("synthetic seed {seed}"), claims));
    }
    out
}
