use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use mtd_core::baselines::{avg_log, sums, voting};
use mtd_core::engine::{run_view, RunOutcome};
use mtd_core::metrics::evaluate;
use mtd_core::synth::generate;
use mtd_core::{
    compute_popularity, derive_view, ingest_claims, ingest_truths, write_claims, write_truths, ClaimFormat, ClaimTable,
    DerivedView, EngineConfig, SynthSpec, TruthAssignment, Variant,
};

use crate::error::CliError;
use crate::manifest::{comment_header, text_hash, ConfigSnapshot, Method, RunManifest};
use crate::{DumpDependenceArgs, DumpPopularityArgs, EvalArgs, RunArgs, SynthArgs};

/// Iteration budget and tolerance for the Sums and Average-Log baselines.
const BASELINE_MAX_ITERS: usize = 1000;
const BASELINE_TOL: f64 = 1e-9;

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Input("invalid --threads = 0: must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Input(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

fn read_claims(path: &Path, format: ClaimFormat) -> Result<ClaimTable, CliError> {
    ingest_claims(open(path)?, format).map_err(|e| CliError::claims(path, e))
}

fn read_truths(path: &Path, format: ClaimFormat) -> Result<TruthAssignment, CliError> {
    ingest_truths(open(path)?, format).map_err(|e| CliError::claims(path, e))
}

fn absolute(path: &Path) -> Result<PathBuf, CliError> {
    fs::canonicalize(path).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn write_output(out: Option<&Path>, contents: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, contents),
        None => io::stdout()
            .write_all(contents)
            .map_err(|e| CliError::Input(format!("stdout: {e}"))),
    }
}

/// A table buffer that starts with the version and manifest comment line.
fn table(hash: &str) -> Vec<u8> {
    comment_header(hash).into_bytes()
}

fn truths_tsv(truths: &TruthAssignment, hash: &str) -> Vec<u8> {
    let mut buf = table(hash);
    write_truths(truths, &mut buf, ClaimFormat::default()).expect("writing to memory");
    buf
}

fn execute(
    method: Method,
    view: &DerivedView,
    config: &EngineConfig,
) -> Result<(TruthAssignment, Option<RunOutcome>), CliError> {
    Ok(match method.variant() {
        Some(variant) => {
            let out = run_view(view, &config.clone().with_variant(variant))?;
            (out.truths.clone(), Some(out))
        }
        None => {
            let truths = match method {
                Method::Voting => voting(view),
                Method::Sums => sums(view, BASELINE_MAX_ITERS, BASELINE_TOL),
                _ => avg_log(view, BASELINE_MAX_ITERS, BASELINE_TOL),
            };
            (truths, None)
        }
    })
}

fn engine_config(method: Method, base: EngineConfig) -> Result<EngineConfig, CliError> {
    let config = base.with_variant(method.variant().unwrap_or(Variant::Full));
    config.validate()?;
    Ok(config)
}

fn non_convergence(out: &RunOutcome, config: &EngineConfig) -> CliError {
    CliError::Algorithm(format!(
        "no convergence after {} iterations: last cosine difference {} is not below --delta {}",
        out.iterations,
        out.final_cosine_difference.map_or("n/a".into(), |d| d.to_string()),
        config.delta
    ))
}

fn manifest_for(args: &RunArgs) -> Result<RunManifest, CliError> {
    if let Some(path) = &args.manifest {
        if args.engine.any() {
            return Err(CliError::Input(
                "engine flags cannot be combined with --manifest".into(),
            ));
        }
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut m: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: not a run manifest: {e}", path.display())))?;
        if let Some(out) = &args.out {
            m.out_dir = out.clone();
        }
        m.threads = args.threads;
        EngineConfig::from(&m.config).validate()?;
        return Ok(m);
    }
    let method = args.method.expect("clap requires --method without --manifest");
    let claims = args
        .claims
        .as_deref()
        .expect("clap requires --claims without --manifest");
    let config = engine_config(method, args.engine.apply(EngineConfig::default()))?;
    Ok(RunManifest {
        version: env!("CARGO_PKG_VERSION").into(),
        method,
        config: ConfigSnapshot::from(&config),
        claims: absolute(claims)?,
        gold: args.gold.as_deref().map(absolute).transpose()?,
        delimiter: args.format.delimiter,
        header: args.format.header,
        seed: None,
        out_dir: args.out.clone().expect("clap requires --out without --manifest"),
        threads: args.threads,
    })
}

pub fn run(args: RunArgs) -> Result<(), CliError> {
    let manifest = manifest_for(&args)?;
    let hash = manifest.hash();
    let format = ClaimFormat {
        delimiter: manifest.delimiter,
        has_header: manifest.header,
    };
    let config = EngineConfig::from(&manifest.config);
    let claims = read_claims(&manifest.claims, format)?;
    let gold = manifest.gold.as_deref().map(|g| read_truths(g, format)).transpose()?;

    let (view, truths, outcome, seconds) = with_threads(manifest.threads, || {
        let start = Instant::now();
        let view = derive_view(&claims).map_err(|e| CliError::claims(&manifest.claims, e))?;
        let (truths, outcome) = execute(manifest.method, &view, &config)?;
        Ok::<_, CliError>((view, truths, outcome, start.elapsed().as_secs_f64()))
    })??;

    let dir = &manifest.out_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_file(&dir.join("truths.tsv"), &truths_tsv(&truths, &hash))?;

    let mut report = format!("method={}\nmanifest={hash}\n", manifest.method.name());
    if let Some(out) = &outcome {
        let mut profile = table(&hash);
        out.profile.write_tsv(&view, &mut profile).expect("writing to memory");
        write_file(&dir.join("profile.tsv"), &profile)?;
        report += &format!(
            "iterations={}\nconverged={}\nfinal_cosine_difference={}\n",
            out.iterations,
            out.converged,
            out.final_cosine_difference.map_or("n/a".into(), |d| d.to_string())
        );
    }
    report += &format!("wall_time_s={seconds}\n");
    if let Some(gold) = &gold {
        let weights = compute_popularity(&view).by_name(&view);
        let preds = [complete_prediction(truths, &view)?];
        report += &evaluate(&preds, gold, &weights, &[])?.to_key_values();
    }
    write_file(&dir.join("report.txt"), report.as_bytes())?;
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&dir.join("manifest.json"), (json + "\n").as_bytes())?;

    if args.dump_graphs {
        let mut popularity = table(&hash);
        compute_popularity(&view)
            .write_tsv(&view, &mut popularity)
            .expect("writing to memory");
        write_file(&dir.join("popularity.tsv"), &popularity)?;
        if let Some(out) = &outcome {
            let name = |s| view.source_name(s).to_string();
            for (file, graph) in [
                ("positive_graph.tsv", &out.graphs.positive),
                ("negative_graph.tsv", &out.graphs.negative),
            ] {
                let mut buf = table(&hash);
                buf.extend_from_slice(b"from\tto\tweight\n");
                graph.write_tsv(&mut buf, name).expect("writing to memory");
                write_file(&dir.join(file), &buf)?;
            }
            let mut dependence = table(&hash);
            out.dependence
                .write_tsv(&view, &mut dependence)
                .expect("writing to memory");
            write_file(&dir.join("dependence.tsv"), &dependence)?;
        }
    }

    match outcome {
        Some(out) if !out.converged => Err(non_convergence(&out, &config)),
        _ => Ok(()),
    }
}

/// Gives every claimed object an entry, empty when nothing was predicted, and
/// rejects predictions for objects absent from the claims.
fn complete_prediction(mut pred: TruthAssignment, view: &DerivedView) -> Result<TruthAssignment, CliError> {
    let known: BTreeSet<&str> = view.object_ids().map(|o| view.object_name(o)).collect();
    let unknown: Vec<&str> = pred.objects().filter(|o| !known.contains(o)).collect();
    if !unknown.is_empty() {
        return Err(CliError::Input(format!(
            "predicted objects not present in the claims: {}",
            unknown.join(", ")
        )));
    }
    for o in known {
        pred.truths.entry(o.to_string()).or_default();
    }
    Ok(pred)
}

pub fn eval(args: EvalArgs) -> Result<(), CliError> {
    let format = args.format.format();
    let claims = read_claims(&args.claims, format)?;
    let gold = read_truths(&args.gold, format)?;
    let view = derive_view(&claims).map_err(|e| CliError::claims(&args.claims, e))?;
    let weights = compute_popularity(&view).by_name(&view);

    let mut preds = Vec::new();
    let mut durations = Vec::new();
    let mut unconverged = None;
    if let Some(method) = args.method {
        let config = engine_config(method, args.engine.apply(EngineConfig::default()))?;
        for _ in 0..args.runs {
            let (truths, outcome, seconds) = with_threads(args.threads, || {
                let start = Instant::now();
                let (truths, outcome) = execute(method, &view, &config)?;
                Ok::<_, CliError>((truths, outcome, start.elapsed().as_secs_f64()))
            })??;
            if let Some(out) = outcome.filter(|o| !o.converged) {
                unconverged = Some(non_convergence(&out, &config));
            }
            preds.push(truths);
            durations.push(seconds);
        }
    } else {
        if args.engine.any() {
            return Err(CliError::Input("engine flags need --method".into()));
        }
        for path in &args.pred {
            preds.push(read_truths(path, format)?);
        }
    }
    let preds = preds
        .into_iter()
        .map(|p| complete_prediction(p, &view))
        .collect::<Result<Vec<_>, _>>()?;

    let report = evaluate(&preds, &gold, &weights, &durations)?;
    let text = if args.kv {
        report.to_key_values()
    } else {
        report.to_table()
    };
    print!("{text}");
    unconverged.map_or(Ok(()), Err)
}

pub fn synth(args: SynthArgs) -> Result<(), CliError> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            SynthSpec::from_key_values(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        None => SynthSpec::default(),
    };
    for (key, value) in args.overrides() {
        spec.set(key, &value)
            .map_err(|e| CliError::Input(format!("--{}: {e}", key.replace('_', "-"))))?;
    }
    let (claims, gold) = generate(&spec)?;
    let spec_text = spec.to_key_values();
    let hash = text_hash(&spec_text);

    let dir = &args.out;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut buf = table(&hash);
    write_claims(&claims, &mut buf, ClaimFormat::default()).expect("writing to memory");
    write_file(&dir.join("claims.tsv"), &buf)?;
    write_file(&dir.join("gold.tsv"), &truths_tsv(&gold, &hash))?;
    write_file(&dir.join("spec.txt"), spec_text.as_bytes())?;
    log::info!(
        "wrote {} sources x {} objects to {}",
        claims.num_sources(),
        claims.num_objects(),
        dir.display()
    );
    Ok(())
}

pub fn dump_popularity(args: DumpPopularityArgs) -> Result<(), CliError> {
    let format = args.format.format();
    let claims = read_claims(&args.claims, format)?;
    let view = derive_view(&claims).map_err(|e| CliError::claims(&args.claims, e))?;
    let hash = text_hash(&format!(
        "dump-popularity\nclaims={}\ndelimiter={:?}\nheader={}\n",
        absolute(&args.claims)?.display(),
        format.delimiter,
        format.has_header
    ));
    let mut buf = table(&hash);
    compute_popularity(&view)
        .write_tsv(&view, &mut buf)
        .expect("writing to memory");
    write_output(args.out.as_deref(), &buf)
}

pub fn dump_dependence(args: DumpDependenceArgs) -> Result<(), CliError> {
    let config = engine_config(Method::Smartmtd, args.engine.apply(EngineConfig::default()))?;
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").into(),
        method: Method::Smartmtd,
        config: ConfigSnapshot::from(&config),
        claims: absolute(&args.claims)?,
        gold: None,
        delimiter: args.format.delimiter,
        header: args.format.header,
        seed: None,
        out_dir: PathBuf::new(),
        threads: args.threads,
    };
    let claims = read_claims(&args.claims, args.format.format())?;
    let view = derive_view(&claims).map_err(|e| CliError::claims(&args.claims, e))?;
    let out = with_threads(args.threads, || run_view(&view, &config))??;
    let mut buf = table(&manifest.hash());
    out.dependence.write_tsv(&view, &mut buf).expect("writing to memory");
    write_output(args.out.as_deref(), &buf)?;
    if out.converged {
        Ok(())
    } else {
        Err(non_convergence(&out, &config))
    }
}
