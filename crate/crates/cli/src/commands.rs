use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use rand::Rng as _;
use serde::Serialize;

use gresnet::autodiff::{grad_norm_probe, GradNormProbe, Tape};
use gresnet::graph::normalized_adjacency;
use gresnet::model::{train as fit, ModelConfig, ResidualKind, TrainReport};
use gresnet::seed::rng_for;
use gresnet::spectral::{
    analyze_limit, degree_representation_distance, feature_representation_distance, lazy_limit_bound,
    LimitDepth, LimitOptions, LimitReport, OperatorKind, SpectrumSummary, StationaryDistribution,
};
use gresnet::{Matrix, SparseMatrix};

use crate::args::{
    BoundArgs, DistanceArgs, Format, LimitArgs, Pairs, ProbeArgs, SpectralArgs, SweepArgs, TrainArgs,
};
use crate::data::{self, Source};
use crate::Failure;

const CURVE_HEADER: [&str; 8] = [
    "depth", "residual", "seed", "epoch", "loss", "train_acc", "val_acc", "test_acc",
];

/// Graphs up to this size get one probe column per node in `limit`.
const ONE_HOT_LIMIT: usize = 512;
const SAMPLED_COLUMNS: usize = 64;

fn create(path: &Path) -> Result<Box<dyn Write>, Failure> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(Box::new(BufWriter::new(file)))
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    match out {
        Some(path) => create(path),
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn write_json(out: &Option<PathBuf>, value: &impl Serialize) -> Result<(), Failure> {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(anyhow::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn csv_writer(w: Box<dyn Write>, header: &[&str]) -> Result<csv::Writer<Box<dyn Write>>, Failure> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(header).map_err(anyhow::Error::from)?;
    Ok(w)
}

fn finish(mut w: csv::Writer<Box<dyn Write>>) -> Result<(), Failure> {
    w.flush()?;
    Ok(())
}

fn write_curve(
    w: &mut csv::Writer<Box<dyn Write>>,
    report: &TrainReport,
) -> Result<(), Failure> {
    let c = &report.config;
    for r in &report.records {
        w.serialize((
            c.layers,
            c.residual.name(),
            c.seed,
            r.epoch,
            r.loss,
            r.train_acc,
            r.val_acc,
            r.test_acc,
        ))
        .map_err(anyhow::Error::from)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TrainOutput<'a> {
    dataset: &'a str,
    checkpoint: Option<&'a Path>,
    report: &'a TrainReport,
}

pub fn train(args: TrainArgs) -> Result<(), Failure> {
    let source = data::load(&args.data)?;
    let dataset = source.labelled()?;
    let config = args.model.config(args.model.layers, args.residual, args.seed);
    let a_hat = normalized_adjacency(&dataset.graph);
    let trained = fit(&config, dataset, &a_hat)?;
    let report = &trained.report;
    log::info!(
        "best validation at epoch {}: val {:.4}, test {:.4}",
        report.best.epoch,
        report.best.val_acc,
        report.best.test_acc
    );
    if let Some(path) = &args.checkpoint {
        trained.model.save(path)?;
    }
    match args.format {
        Format::Json => write_json(
            &args.output.out,
            &TrainOutput {
                dataset: &source.name,
                checkpoint: args.checkpoint.as_deref(),
                report,
            },
        ),
        Format::Csv => {
            let mut w = csv_writer(output(&args.output.out)?, &CURVE_HEADER)?;
            write_curve(&mut w, report)?;
            finish(w)
        }
    }
}

struct Cell {
    depth: usize,
    residual: ResidualKind,
    best_test: Vec<f64>,
    max_train: Vec<f64>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn sweep(args: SweepArgs) -> Result<(), Failure> {
    if args.depths.is_empty() {
        return Err(Failure::usage(anyhow!("--depths must list at least one depth")));
    }
    if args.residual.is_empty() {
        return Err(Failure::usage(anyhow!("--residual must list at least one kind")));
    }
    let seeds: Vec<u64> = if args.seeds.is_empty() {
        (0..args.repetitions).collect()
    } else {
        args.seeds.clone()
    };
    if seeds.is_empty() {
        return Err(Failure::usage(anyhow!("--repetitions must be at least 1")));
    }
    // Reject bad hyperparameters before loading anything.
    for &depth in &args.depths {
        args.model.config(depth, ResidualKind::None, 0).validate()?;
    }

    let source = data::load(&args.data)?;
    let dataset = source.labelled()?;
    let a_hat = normalized_adjacency(&dataset.graph);
    let mut w = csv_writer(output(&args.output.out)?, &CURVE_HEADER)?;
    let mut cells = Vec::new();
    for &depth in &args.depths {
        for &residual in &args.residual {
            let mut cell = Cell {
                depth,
                residual,
                best_test: Vec::new(),
                max_train: Vec::new(),
            };
            for &seed in &seeds {
                let config = args.model.config(depth, residual, seed);
                let report = fit(&config, dataset, &a_hat)?.report;
                log::info!(
                    "depth {depth} {residual} seed {seed}: best test {:.4}, max train {:.4}",
                    report.best.test_acc,
                    report.max_train_acc()
                );
                write_curve(&mut w, &report)?;
                cell.best_test.push(report.best.test_acc);
                cell.max_train.push(report.max_train_acc());
            }
            cells.push(cell);
        }
    }
    finish(w)?;

    if let Some(path) = &args.summary {
        let mut s = csv_writer(
            create(path)?,
            &[
                "depth",
                "residual",
                "runs",
                "mean_best_test_acc",
                "std_best_test_acc",
                "mean_max_train_acc",
            ],
        )?;
        for c in &cells {
            let (mean, std) = mean_std(&c.best_test);
            let (train_mean, _) = mean_std(&c.max_train);
            s.serialize((c.depth, c.residual.name(), c.best_test.len(), mean, std, train_mean))
                .map_err(anyhow::Error::from)?;
        }
        finish(s)?;
    }
    Ok(())
}

/// One-hot probe columns: every node on small graphs, a seeded sample
/// otherwise.
fn probe_columns(n: usize, seed: u64) -> Matrix {
    if n <= ONE_HOT_LIMIT {
        return Matrix::eye(n);
    }
    let mut rng = rng_for(seed, "limit/columns");
    let nodes = rand::seq::index::sample(&mut rng, n, SAMPLED_COLUMNS);
    let mut x = Matrix::zeros((n, SAMPLED_COLUMNS));
    for (c, node) in nodes.iter().enumerate() {
        x[[node, c]] = 1.0;
    }
    x
}

/// Depth bound for `½M + ½I`, whose second eigenvalue is `(λ₂ + 1) / 2`.
fn lazy_bound(kind: OperatorKind, report: &LimitReport) -> Result<LimitDepth, Failure> {
    if kind == OperatorKind::Lazy {
        return Ok(report.bound_depth);
    }
    let s = report.spectrum;
    let half = |l: f64| 0.5 * l + 0.5;
    let lazy = SpectrumSummary {
        lambda1: half(s.lambda1),
        lambda2: half(s.lambda2),
        lambda_n: half(s.lambda_n),
        lambda_max: half(s.lambda2).max(half(s.lambda_n).abs()),
    };
    let pi = StationaryDistribution {
        pi: vec![1.0 / report.n as f64; report.n],
    };
    lazy_limit_bound(&lazy, &pi, report.epsilon).map_err(|e| Failure::new(1, e))
}

fn spectral_report(args: &SpectralArgs, x: impl FnOnce(usize) -> Matrix, max_iter: usize) -> Result<(Source, LimitReport, LimitDepth), Failure> {
    if !(args.epsilon > 0.0) {
        return Err(Failure::usage(anyhow!("--epsilon must be positive")));
    }
    let source = data::load(&args.data)?;
    let n = source.graph.node_count();
    if n == 0 {
        return Err(Failure::data(anyhow!("{} has no nodes", source.name)));
    }
    let kind = OperatorKind::from(args.operator);
    let opts = LimitOptions {
        kind,
        self_loops: args.self_loops,
        epsilon: args.epsilon,
        max_iter,
    };
    let report = analyze_limit(&source.graph, &x(n), &opts).map_err(|e| Failure::new(1, e))?;
    if let Some(w) = &report.warning {
        log::warn!("{}: {w}", source.name);
    }
    let lazy = lazy_bound(kind, &report)?;
    Ok((source, report, lazy))
}

#[derive(Serialize)]
struct LimitOutput<'a> {
    dataset: &'a str,
    #[serde(flatten)]
    report: &'a LimitReport,
    lazy_bound_depth: LimitDepth,
    probe_columns: usize,
}

pub fn limit(args: LimitArgs) -> Result<(), Failure> {
    let seed = args.seed;
    let mut columns = 0;
    let (source, report, lazy) = spectral_report(
        &args.spectral,
        |n| {
            let x = probe_columns(n, seed);
            columns = x.ncols();
            x
        },
        args.max_iter,
    )?;
    write_json(
        &args.spectral.output.out,
        &LimitOutput {
            dataset: &source.name,
            report: &report,
            lazy_bound_depth: lazy,
            probe_columns: columns,
        },
    )
}

#[derive(Serialize)]
struct BoundOutput<'a> {
    dataset: &'a str,
    n: usize,
    edge_count: usize,
    operator_kind: OperatorKind,
    #[serde(flatten)]
    spectrum: SpectrumSummary,
    pi_min: Option<f64>,
    epsilon: f64,
    bound_depth: LimitDepth,
    lazy_bound_depth: LimitDepth,
    warning: Option<&'a str>,
}

pub fn bound(args: BoundArgs) -> Result<(), Failure> {
    // A single column and no iterations: only the spectrum is wanted.
    let (source, report, lazy) = spectral_report(
        &args.spectral,
        |n| Matrix::from_shape_fn((n, 1), |(i, _)| if i == 0 { 1.0 } else { 0.0 }),
        0,
    )?;
    write_json(
        &args.spectral.output.out,
        &BoundOutput {
            dataset: &source.name,
            n: report.n,
            edge_count: report.edge_count,
            operator_kind: report.operator_kind,
            spectrum: report.spectrum,
            pi_min: report.pi_min,
            epsilon: report.epsilon,
            bound_depth: report.bound_depth,
            lazy_bound_depth: lazy,
            warning: report.warning.as_deref(),
        },
    )
}

/// Gradient norms through `depth` identity maps applied to a seeded row.
fn identity_chain_probe(depth: usize, width: usize, seed: u64) -> Result<GradNormProbe, Failure> {
    let mut rng = rng_for(seed, "identity-chain");
    let x = Matrix::from_shape_fn((1, width), |_| rng.gen_range(-1.0..1.0));
    let eye = Matrix::eye(width);
    let mut tape = Tape::new();
    let mut h = tape.param(x);
    let mut layers = Vec::with_capacity(depth);
    for _ in 0..depth {
        let w = tape.constant(eye.clone());
        h = tape.matmul(h, w).map_err(|e| Failure::new(1, e))?;
        layers.push(h);
    }
    let loss = tape.sum(h);
    let grads = tape.backward(loss).map_err(|e| Failure::new(1, e))?;
    grad_norm_probe(&grads, &layers).map_err(|e| Failure::new(1, e))
}

fn write_probe(
    w: &mut csv::Writer<Box<dyn Write>>,
    epoch: usize,
    probe: &GradNormProbe,
) -> Result<(), Failure> {
    for (k, norm) in probe.norms.iter().enumerate() {
        let ratio = k.checked_sub(1).and_then(|i| probe.ratios[i]);
        w.serialize((epoch, k + 1, norm, ratio, probe.delta_hat))
            .map_err(anyhow::Error::from)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ProbeSummary {
    residual: ResidualKind,
    layers: usize,
    seed: u64,
    samples: usize,
    median_delta_hat: Option<f64>,
    delta_hat: Vec<f64>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

fn summarize(config: &ModelConfig, report: &TrainReport) -> ProbeSummary {
    let delta_hat: Vec<f64> = report.probes.iter().filter_map(|p| p.probe.delta_hat).collect();
    ProbeSummary {
        residual: config.residual,
        layers: config.layers,
        seed: config.seed,
        samples: report.probes.len(),
        median_delta_hat: median(delta_hat.clone()),
        delta_hat,
    }
}

pub fn probe(args: ProbeArgs) -> Result<(), Failure> {
    const HEADER: [&str; 5] = ["epoch", "layer", "norm", "ratio", "delta_hat"];
    if args.identity_chain {
        if args.model.layers == 0 || args.model.hidden == 0 {
            return Err(Failure::usage(anyhow!("--layers and --hidden must be positive")));
        }
        let p = identity_chain_probe(args.model.layers, args.model.hidden, args.seed)?;
        let mut w = csv_writer(output(&args.output.out)?, &HEADER)?;
        write_probe(&mut w, 0, &p)?;
        return finish(w);
    }
    if args.probe_every == 0 {
        return Err(Failure::usage(anyhow!("--probe-every must be positive")));
    }
    let config_for = |residual| ModelConfig {
        probe_every: args.probe_every,
        ..args.model.config(args.model.layers, residual, args.seed)
    };
    config_for(args.residual).validate()?;

    let source = data::load(&args.data)?;
    let dataset = source.labelled()?;
    let a_hat: SparseMatrix = normalized_adjacency(&dataset.graph);
    let config = config_for(args.residual);
    let report = fit(&config, dataset, &a_hat)?.report;
    let mut w = csv_writer(output(&args.output.out)?, &HEADER)?;
    for sample in &report.probes {
        write_probe(&mut w, sample.epoch, &sample.probe)?;
    }
    finish(w)?;

    if let Some(path) = &args.summary {
        let mut summaries = vec![summarize(&config, &report)];
        for &kind in &args.compare {
            if summaries.iter().any(|s| s.residual == kind) {
                continue;
            }
            let c = config_for(kind);
            let r = fit(&c, dataset, &a_hat)?.report;
            summaries.push(summarize(&c, &r));
        }
        write_json(&Some(path.clone()), &summaries)?;
    }
    Ok(())
}

fn sample_pairs(n: usize, pairs: Pairs, seed: u64) -> Vec<(usize, usize)> {
    match pairs {
        Pairs::All => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
        Pairs::Sample(count) => {
            let mut rng = rng_for(seed, "distance/pairs");
            (0..count)
                .map(|_| {
                    let i = rng.gen_range(0..n);
                    let j = (i + rng.gen_range(1..n)) % n;
                    (i.min(j), i.max(j))
                })
                .collect()
        }
    }
}

/// `‖Â(i,:) - Â(j,:)‖₁`: the feature distance under one-hot features.
fn row_distance(a: &SparseMatrix, i: usize, j: usize) -> f64 {
    let mut diff: BTreeMap<usize, f64> = a.row(i).collect();
    for (c, v) in a.row(j) {
        *diff.entry(c).or_insert(0.0) -= v;
    }
    diff.values().map(|d| d.abs()).sum()
}

pub fn distance(args: DistanceArgs) -> Result<(), Failure> {
    let source = data::load(&args.data)?;
    let g = &source.graph;
    let n = g.node_count();
    if n < 2 {
        return Err(Failure::data(anyhow!("{} needs at least two nodes", source.name)));
    }
    if g.edge_count() == 0 {
        return Err(Failure::data(anyhow!("{} has no edges", source.name)));
    }
    let d_x = args
        .dx
        .unwrap_or_else(|| source.dataset.as_ref().map_or(n, |d| d.feature_dim()));
    let a_hat = normalized_adjacency(g);

    let mut w = csv_writer(
        output(&args.output.out)?,
        &["i", "j", "degree_distance", "feature_distance"],
    )?;
    for (i, j) in sample_pairs(n, args.pairs, args.seed) {
        let degree = degree_representation_distance(g, i, j, d_x).map_err(|e| Failure::new(1, e))?;
        let feature = match &source.dataset {
            Some(d) => feature_representation_distance(&a_hat, &d.features, i, j)
                .map_err(|e| Failure::new(1, e))?,
            None => row_distance(&a_hat, i, j),
        };
        w.serialize((i, j, degree, feature)).map_err(anyhow::Error::from)?;
    }
    finish(w)?;

    if let Some(path) = &args.histogram {
        let mut counts = BTreeMap::new();
        for &d in g.degrees() {
            *counts.entry(d).or_insert(0usize) += 1;
        }
        let mut h = csv_writer(create(path)?, &["degree", "count"])?;
        for (d, c) in counts {
            h.serialize((d, c)).map_err(anyhow::Error::from)?;
        }
        finish(h)?;
    }
    Ok(())
}
