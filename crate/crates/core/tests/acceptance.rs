//! Acceptance report: one verdict line per criterion.
//!
//! Runs without the libtest harness so every line reaches the test log.
//! Criteria that need the citation datasets look for them under
//! `$GRESNET_DATA_DIR` (default `<workspace>/data`) and report BLOCKED when
//! the files are absent. Where a criterion is blocked, a synthetic
//! planted-partition run is reported underneath as a qualitative stand-in;
//! it never decides the verdict. The process fails only on FAIL.

mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::fd::{model_instance, op_instance, INSTANCES, OPS};
use common::{random_column_stochastic, random_connected_non_bipartite, random_matrix};
use gresnet::autodiff::{grad_norm_probe, Tape};
use gresnet::dataset::synthetic::{planted_partition, SyntheticConfig};
use gresnet::dataset::{load_named, row_normalize, standard_split, Dataset};
use gresnet::graph::{build_graph, normalized_adjacency, random_walk_matrix};
use gresnet::model::{train, Mode, Model, ModelConfig, ParamRole, ResidualKind, TrainReport};
use gresnet::seed::rng_for;
use gresnet::sparse::{spmm, SparseMatrix};
use gresnet::spectral::{
    analyze_limit, p_norm, stationary_distribution, LimitDepth, LimitOptions, OperatorKind,
};
use gresnet::{Graph, Matrix};
use nalgebra::DMatrix;
use rand::Rng as _;

const SEEDS: u64 = 10;
const PROXY_SEEDS: u64 = 3;

#[derive(Clone, Copy, PartialEq)]
enum Verdict {
    Pass,
    Fail,
    /// The checkable part passed; the rest needs missing data.
    Partial,
    Blocked,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Partial => "PARTIAL",
            Verdict::Blocked => "BLOCKED",
        }
    }
}

#[derive(Default)]
struct Report {
    failures: Vec<u32>,
}

impl Report {
    fn line(&mut self, id: u32, verdict: Verdict, gated: bool, title: &str, detail: &str) {
        let soft = if gated { "" } else { " (soft)" };
        println!("criterion {id:>2}: {}{soft} {title}: {detail}", verdict.label());
        if gated && verdict == Verdict::Fail {
            self.failures.push(id);
        }
    }

    fn note(&self, text: &str) {
        println!("              {text}");
    }
}

fn data_dir() -> PathBuf {
    std::env::var_os("GRESNET_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
            manifest.ancestors().nth(2).unwrap_or(manifest).join("data")
        })
}

/// The named dataset with row-normalised features and the default split,
/// or `None` when its files are missing.
fn dataset(name: &str) -> Option<Dataset> {
    let (mut d, _) = load_named(name, data_dir()).ok()?;
    d.features = row_normalize(&d.features);
    standard_split(&d, 20, 500, 1000, None).ok()
}

fn blocked(name: &str) -> String {
    format!("{name} files not found under {}", data_dir().display())
}

/// Planted-partition stand-in for Cora, small enough for the test profile.
fn proxy_data() -> Dataset {
    let cfg = SyntheticConfig {
        nodes: 1500,
        classes: 5,
        features: 300,
        p_in: 0.01,
        p_out: 0.0008,
        words_per_node: 15,
        signal: 0.3,
    };
    let mut d = planted_partition(&cfg, 0).unwrap();
    d.features = row_normalize(&d.features);
    standard_split(&d, 20, 300, 600, None).unwrap()
}

fn config(layers: usize, residual: ResidualKind, seed: u64, patience: usize) -> ModelConfig {
    ModelConfig {
        layers,
        residual,
        seed,
        patience,
        ..ModelConfig::default()
    }
}

fn runs(data: &Dataset, layers: usize, residual: ResidualKind, seeds: u64, patience: usize) -> Vec<TrainReport> {
    let a = normalized_adjacency(&data.graph);
    (0..seeds)
        .map(|s| {
            train(&config(layers, residual, s, patience), data, &a)
                .unwrap()
                .report
        })
        .collect()
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn fmt_accs(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|a| format!("{a:.2}")).collect();
    parts.join(" ")
}

fn table2(
    r: &mut Report,
    id: u32,
    name: &str,
    layers: usize,
    residual: ResidualKind,
    target: f64,
    budget: Option<Duration>,
) {
    let title = format!("{name} {residual} K={layers} best-validation test accuracy {target} ± 0.02");
    let Some(data) = dataset(name) else {
        r.line(id, Verdict::Blocked, true, &title, &blocked(name));
        return;
    };
    let start = Instant::now();
    let reports = runs(&data, layers, residual, SEEDS, 10);
    let elapsed = start.elapsed();
    let acc = mean(reports.iter().map(|x| x.best.test_acc));
    let in_band = (acc - target).abs() <= 0.02;
    let in_time = budget.is_none_or(|b| elapsed <= b);
    r.line(
        id,
        Verdict::from_bool(in_band && in_time),
        true,
        &title,
        &format!("mean {acc:.4} over {SEEDS} seeds in {:.0}s", elapsed.as_secs_f64()),
    );
}

fn criterion_5(r: &mut Report, cora: Option<&Dataset>) {
    let title = "vanilla K=5,6,7 max train acc <= 0.5 in >= 8/10 seeds, K=2 > 0.9 in all";
    match cora {
        Some(d) => {
            let mut ok = true;
            let mut parts = Vec::new();
            for k in [5, 6, 7] {
                let low = runs(d, k, ResidualKind::None, SEEDS, 0)
                    .iter()
                    .filter(|x| x.max_train_acc() <= 0.5)
                    .count();
                ok &= low >= 8;
                parts.push(format!("K={k}: {low}/10 stalled"));
            }
            let high = runs(d, 2, ResidualKind::None, SEEDS, 0)
                .iter()
                .filter(|x| x.max_train_acc() > 0.9)
                .count();
            ok &= high == SEEDS as usize;
            parts.push(format!("K=2: {high}/10 above 0.9"));
            r.line(5, Verdict::from_bool(ok), true, title, &parts.join(", "));
        }
        None => r.line(5, Verdict::Blocked, true, title, &blocked("cora")),
    }
}

fn criterion_6(r: &mut Report, cora: Option<&Dataset>) {
    let title = "K=7 raw and graph-raw reach train >= 0.9 and test >= 0.78 in >= 8/10 seeds";
    match cora {
        Some(d) => {
            let mut ok = true;
            let mut parts = Vec::new();
            for kind in [ResidualKind::Raw, ResidualKind::GraphRaw] {
                let good = runs(d, 7, kind, SEEDS, 0)
                    .iter()
                    .filter(|x| x.max_train_acc() >= 0.9 && x.best.test_acc >= 0.78)
                    .count();
                ok &= good >= 8;
                parts.push(format!("{kind}: {good}/10"));
            }
            r.line(6, Verdict::from_bool(ok), true, title, &parts.join(", "));
        }
        None => r.line(6, Verdict::Blocked, true, title, &blocked("cora")),
    }
}

/// Depth collapse and residual rescue on the synthetic stand-in, where the
/// collapse sets in deeper than on Cora.
fn depth_proxy(r: &Report, data: &Dataset) {
    let show = |k: usize, kind: ResidualKind| {
        let reps = runs(data, k, kind, PROXY_SEEDS, 0);
        let train: Vec<f64> = reps.iter().map(TrainReport::max_train_acc).collect();
        let test: Vec<f64> = reps.iter().map(|x| x.best.test_acc).collect();
        r.note(&format!(
            "synthetic proxy {kind:>9} K={k:>2}: max train [{}], best test [{}]",
            fmt_accs(&train),
            fmt_accs(&test)
        ));
    };
    show(2, ResidualKind::None);
    show(12, ResidualKind::None);
    show(12, ResidualKind::Raw);
    show(12, ResidualKind::GraphRaw);
}

fn corpus() -> impl Iterator<Item = (u64, Graph)> {
    (0..100).map(|s| {
        let mut rng = rng_for(s, "corpus");
        let n = rng.gen_range(3..=50);
        (s, random_connected_non_bipartite(&mut rng, n))
    })
}

fn criterion_7(r: &mut Report) {
    let mut failures = 0;
    let mut worst_steps = 0;
    for (s, g) in corpus() {
        for loops in [false, true] {
            let p = random_walk_matrix(&g, loops).unwrap();
            let pi = stationary_distribution(&g, OperatorKind::RandomWalk, loops).unwrap();
            let total: f64 = g.degrees().iter().map(|&d| (d + loops as usize) as f64).sum();
            let formula_ok = pi
                .pi
                .iter()
                .enumerate()
                .all(|(i, &v)| (v - (g.degree(i) + loops as usize) as f64 / total).abs() < 1e-15);
            let mut rng = rng_for(s, "simplex");
            let mut v: Vec<f64> = (0..g.node_count()).map(|_| rng.gen::<f64>()).collect();
            let sum: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= sum);
            let dist = |v: &[f64]| v.iter().zip(&pi.pi).map(|(a, b)| (a - b).abs()).sum::<f64>();
            let mut steps = 0;
            while dist(&v) > 1e-8 && steps < 10_000 {
                v = p.matvec(&v).unwrap();
                steps += 1;
            }
            worst_steps = worst_steps.max(steps);
            if !formula_ok || dist(&v) > 1e-8 {
                failures += 1;
            }
        }
    }
    r.line(
        7,
        Verdict::from_bool(failures == 0),
        true,
        "random walk reaches d(i)/sum d within L1 1e-8 on 100 graphs, with and without self-loops",
        &format!("{failures} failures, slowest chain {worst_steps} steps"),
    );
}

fn bound_violation(g: &Graph, x: &Matrix, kind: OperatorKind) -> Option<String> {
    let opts = LimitOptions {
        kind,
        epsilon: 1e-4,
        ..LimitOptions::default()
    };
    let rep = analyze_limit(g, x, &opts).unwrap();
    match rep.empirical_depth {
        Some(e) if rep.bound_depth.admits(e) => None,
        Some(e) => Some(format!("{kind:?}: empirical {e} > bound {}", rep.bound_depth)),
        None if rep.bound_depth == LimitDepth::Infinite => None,
        None => Some(format!("{kind:?}: never converged under bound {}", rep.bound_depth)),
    }
}

fn criterion_8(r: &mut Report, cora: Option<&Dataset>) {
    let mut checks = 0;
    let mut violations = Vec::new();
    for (s, g) in corpus() {
        let n = g.node_count();
        let mut rng = rng_for(s, "probe-features");
        let inputs = [Matrix::eye(n), random_column_stochastic(&mut rng, n, 8)];
        for x in &inputs {
            for kind in [OperatorKind::Normalized, OperatorKind::Lazy] {
                checks += 1;
                if let Some(v) = bound_violation(&g, x, kind) {
                    violations.push(format!("graph {s} {v}"));
                }
            }
        }
    }
    let title = "empirical limit (eps 1e-4) <= closed-form bound, plain and lazy operators";
    let corpus_detail = format!("corpus: {} violations in {checks} checks", violations.len());
    for v in violations.iter().take(3) {
        r.note(v);
    }
    match cora {
        None => {
            let verdict = if violations.is_empty() {
                Verdict::Partial
            } else {
                Verdict::Fail
            };
            r.line(8, verdict, true, title, &format!("{corpus_detail}; cora part: {}", blocked("cora")));
        }
        Some(d) => {
            let n = d.node_count();
            let mut rng = rng_for(0, "limit/columns");
            let nodes = rand::seq::index::sample(&mut rng, n, 64);
            let mut x = Matrix::zeros((n, 64));
            for (c, node) in nodes.iter().enumerate() {
                x[[node, c]] = 1.0;
            }
            let mut cora_violations = 0;
            for kind in [OperatorKind::Normalized, OperatorKind::Lazy] {
                if let Some(v) = bound_violation(&d.graph, &x, kind) {
                    r.note(&format!("cora {v}"));
                    cora_violations += 1;
                }
            }
            r.line(
                8,
                Verdict::from_bool(violations.is_empty() && cora_violations == 0),
                true,
                title,
                &format!("{corpus_detail}; cora: {cora_violations} violations"),
            );
        }
    }
}

fn criterion_9(r: &mut Report) {
    let mut bad = Vec::new();
    let p2 = build_graph(2, [(0, 1)]).unwrap();
    let no_loops = LimitOptions {
        kind: OperatorKind::RandomWalk,
        self_loops: false,
        ..LimitOptions::default()
    };
    if analyze_limit(&p2, &Matrix::eye(2), &no_loops).unwrap().bound_depth != LimitDepth::Infinite {
        bad.push("P2".to_owned());
    }
    let fixtures = [
        ("two edges", build_graph(4, [(0, 1), (2, 3)]).unwrap()),
        ("path + edge", build_graph(5, [(0, 1), (1, 2), (3, 4)]).unwrap()),
        ("two triangles", build_graph(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap()),
        ("isolated node", build_graph(4, [(0, 1), (1, 2), (2, 0)]).unwrap()),
    ];
    for (name, g) in &fixtures {
        let x = Matrix::eye(g.node_count());
        for kind in [OperatorKind::Normalized, OperatorKind::Lazy, OperatorKind::RandomWalk] {
            let opts = LimitOptions {
                kind,
                ..LimitOptions::default()
            };
            let rep = analyze_limit(g, &x, &opts).unwrap();
            let warned = rep.warning.as_deref().is_some_and(|w| w.contains("disconnected"));
            if rep.bound_depth != LimitDepth::Infinite || !warned {
                bad.push(format!("{name} {kind:?}"));
            }
        }
    }
    r.line(
        9,
        Verdict::from_bool(bad.is_empty()),
        true,
        "P2 without self-loops and disconnected fixtures give bound inf",
        &if bad.is_empty() {
            format!("P2 and {} disconnected fixtures x 3 operators unbounded", fixtures.len())
        } else {
            format!("bounded: {}", bad.join(", "))
        },
    );
}

fn criterion_10(r: &mut Report) {
    let mut worst_op: f64 = 0.0;
    let mut op_failures = 0;
    for op in OPS {
        for s in 0..INSTANCES {
            let e = op_instance(op, s);
            worst_op = worst_op.max(e);
            op_failures += (e > 1e-5) as usize;
        }
    }
    let mut worst_model: f64 = 0.0;
    let mut model_failures = 0;
    for s in 0..INSTANCES {
        let e = model_instance(s, ResidualKind::None, 2);
        worst_model = worst_model.max(e);
        model_failures += (e > 1e-4) as usize;
    }
    r.line(
        10,
        Verdict::from_bool(op_failures + model_failures == 0),
        true,
        "central finite differences: ops <= 1e-5, K=2 model <= 1e-4, 20 instances each",
        &format!(
            "{} ops, worst {worst_op:.1e}; model worst {worst_model:.1e}; {} failures",
            OPS.len(),
            op_failures + model_failures
        ),
    );
}

fn reference_forward(a: &SparseMatrix, x: &Matrix, weights: &[&Matrix], biases: &[&Matrix]) -> Matrix {
    let mut h = x.clone();
    for (k, w) in weights.iter().enumerate() {
        let mut z = spmm(a, &h.dot(*w)).unwrap();
        if let Some(b) = biases.get(k) {
            z += *b;
        }
        h = if k + 1 == weights.len() { z } else { z.mapv(|v| v.max(0.0)) };
    }
    h
}

fn logits(m: &Model, a: &SparseMatrix, x: &Matrix, dropout_seed: Option<u64>) -> Matrix {
    let mut tape = Tape::new();
    let pass = match dropout_seed {
        None => m.forward(&mut tape, a, x, Mode::Eval).unwrap(),
        Some(s) => {
            let mut rng = rng_for(s, "dropout/1");
            m.forward(&mut tape, a, x, Mode::Train(&mut rng)).unwrap()
        }
    };
    tape.value(pass.logits).clone()
}

fn criterion_11(r: &mut Report) {
    let mut checks = 0;
    let mut mismatches = Vec::new();
    for layers in 1..=7 {
        for bias in [false, true] {
            let mut rng = rng_for(layers as u64, "acceptance/vanilla");
            let g = random_connected_non_bipartite(&mut rng, 20);
            let (a, x) = (normalized_adjacency(&g), random_matrix(&mut rng, 20, 7));
            let cfg = ModelConfig {
                layers,
                hidden: 5,
                bias,
                seed: 11,
                ..ModelConfig::default()
            };
            let mut m = Model::new(&cfg, 7, 3).unwrap();
            for p in m.params_mut() {
                if p.nrows() == 1 {
                    p.fill(0.25);
                }
            }
            let w: Vec<&Matrix> = (1..=layers)
                .map(|l| m.param(ParamRole::Weight { layer: l }).unwrap())
                .collect();
            let b: Vec<&Matrix> = (1..=layers)
                .filter_map(|l| m.param(ParamRole::Bias { layer: l }))
                .collect();
            checks += 1;
            if m.predict(&a, &x).unwrap() != reference_forward(&a, &x, &w, &b) {
                mismatches.push(format!("vanilla K={layers} bias={bias}"));
            }
        }
    }
    let mut rng = rng_for(3, "acceptance/zeroed");
    let g = random_connected_non_bipartite(&mut rng, 25);
    let (a, x) = (normalized_adjacency(&g), random_matrix(&mut rng, 25, 9));
    for residual in [ResidualKind::Raw, ResidualKind::GraphRaw] {
        for layers in [1, 2, 5] {
            let base = ModelConfig {
                layers,
                hidden: 6,
                seed: 5,
                ..ModelConfig::default()
            };
            let vanilla = Model::new(&base, 9, 4).unwrap();
            let mut gres = Model::new(&ModelConfig { residual, ..base.clone() }, 9, 4).unwrap();
            let roles = gres.roles().to_vec();
            for (role, p) in roles.iter().zip(gres.params_mut()) {
                if matches!(role, ParamRole::Adjust { .. }) {
                    p.fill(0.0);
                }
            }
            for seed in [None, Some(8)] {
                checks += 1;
                if logits(&vanilla, &a, &x, seed) != logits(&gres, &a, &x, seed) {
                    mismatches.push(format!("{residual} K={layers} dropout={seed:?}"));
                }
            }
        }
    }
    r.line(
        11,
        Verdict::from_bool(mismatches.is_empty()),
        true,
        "vanilla forward and zeroed residual weights match the reference bitwise",
        &if mismatches.is_empty() {
            format!("{checks} bitwise comparisons equal")
        } else {
            format!("differ: {}", mismatches.join(", "))
        },
    );
}

fn criterion_12(r: &mut Report) {
    const ROUNDING: f64 = 1e-12;
    let mut norm_violations = 0;
    for (p, q) in [(1.0, 2.0), (2.0, 4.0), (1.0, 64.0)] {
        for s in 0..1000u64 {
            let mut rng = rng_for(s, "lemma-p-norm");
            let n = rng.gen_range(1..=64);
            let scale = 10f64.powi(rng.gen_range(-3..=3));
            let x: Vec<f64> = (0..n).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
            let (np, nq) = (p_norm(&x, p).unwrap(), p_norm(&x, q).unwrap());
            let factor = (n as f64).powf(1.0 / p - 1.0 / q);
            if nq > np * (1.0 + ROUNDING) || np > factor * nq * (1.0 + ROUNDING) {
                norm_violations += 1;
            }
        }
    }
    let mut sv_violations = 0;
    for s in 0..200u64 {
        let mut rng = rng_for(s, "lemma-singular");
        let n = rng.gen_range(1..=8);
        let raw: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let target: f64 = rng.gen_range(0.01..0.99);
        let m: DMatrix<f64> = &raw * (target / raw.singular_values().max());
        let sigma = m.singular_values().max();
        let sv = (DMatrix::identity(n, n) + &m).singular_values();
        if 1.0 - sigma > sv.min() + ROUNDING || sv.max() > 1.0 + sigma + ROUNDING {
            sv_violations += 1;
        }
    }
    r.line(
        12,
        Verdict::from_bool(norm_violations + sv_violations == 0),
        true,
        "p-norm inequality (3000 vectors) and singular-value sandwich (200 matrices)",
        &format!("{norm_violations} + {sv_violations} violations"),
    );
}

fn identity_chain_delta(depth: usize, width: usize) -> Option<f64> {
    let mut rng = rng_for(0, "identity-chain");
    let mut tape = Tape::new();
    let mut h = tape.param(Matrix::from_shape_fn((1, width), |_| rng.gen_range(-1.0..1.0)));
    let mut layers = Vec::new();
    for _ in 0..depth {
        let eye = tape.constant(Matrix::eye(width));
        h = tape.matmul(h, eye).unwrap();
        layers.push(h);
    }
    let loss = tape.sum(h);
    let grads = tape.backward(loss).unwrap();
    let p = grad_norm_probe(&grads, &layers).unwrap();
    p.ratios.iter().all(|x| *x == Some(1.0)).then_some(p.delta_hat?)
}

/// Median δ̂ over every probe sample of `seeds` K=7 runs.
fn median_delta(data: &Dataset, kind: ResidualKind, seeds: u64) -> (f64, usize) {
    let a = normalized_adjacency(&data.graph);
    let mut deltas = Vec::new();
    for s in 0..seeds {
        let cfg = ModelConfig {
            probe_every: 10,
            ..config(7, kind, s, 0)
        };
        let rep = train(&cfg, data, &a).unwrap().report;
        deltas.extend(rep.probes.iter().filter_map(|p| p.probe.delta_hat));
    }
    (median(deltas.clone()), deltas.len())
}

fn criterion_13(r: &mut Report, cora: Option<&Dataset>, proxy: &Dataset) {
    let identity_ok = identity_chain_delta(7, 16) == Some(0.0);
    let title = "identity-chain ratios exactly 1; K=7 median delta-hat raw < none";
    let compare = |r: &Report, data: &Dataset, seeds: u64, tag: &str| {
        let (none, n_none) = median_delta(data, ResidualKind::None, seeds);
        let (raw, n_raw) = median_delta(data, ResidualKind::Raw, seeds);
        r.note(&format!("{tag} residual  samples  median delta-hat"));
        r.note(&format!("{tag} none      {n_none:>7}  {none:.4}"));
        r.note(&format!("{tag} raw       {n_raw:>7}  {raw:.4}"));
        raw < none
    };
    match cora {
        Some(d) => {
            let ok = compare(r, d, SEEDS, "cora");
            r.line(
                13,
                Verdict::from_bool(identity_ok && ok),
                false,
                title,
                &format!("identity chain exact: {identity_ok}; cora raw < none: {ok}"),
            );
        }
        None => {
            let ok = compare(r, proxy, PROXY_SEEDS, "synthetic proxy");
            let verdict = if identity_ok { Verdict::Partial } else { Verdict::Fail };
            r.line(
                13,
                verdict,
                false,
                title,
                &format!(
                    "identity chain exact: {identity_ok}; synthetic proxy raw < none: {ok}; cora part: {}",
                    blocked("cora")
                ),
            );
        }
    }
}

fn main() {
    // `cargo test -- --list` and name filters should not trigger a full run.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    if let Some(filter) = args.iter().find(|a| !a.starts_with('-')) {
        if !"acceptance".contains(filter.as_str()) {
            return;
        }
    }

    let start = Instant::now();
    let mut r = Report::default();
    let cora = dataset("cora");
    let proxy = proxy_data();

    table2(&mut r, 1, "cora", 2, ResidualKind::None, 0.815, Some(Duration::from_secs(300)));
    table2(&mut r, 2, "cora", 5, ResidualKind::GraphRaw, 0.843, None);
    table2(&mut r, 3, "citeseer", 4, ResidualKind::Raw, 0.727, None);
    table2(&mut r, 4, "pubmed", 7, ResidualKind::GraphRaw, 0.817, Some(Duration::from_secs(2400)));
    criterion_5(&mut r, cora.as_ref());
    criterion_6(&mut r, cora.as_ref());
    if cora.is_none() {
        depth_proxy(&r, &proxy);
    }
    criterion_7(&mut r);
    criterion_8(&mut r, cora.as_ref());
    criterion_9(&mut r);
    criterion_10(&mut r);
    criterion_11(&mut r);
    criterion_12(&mut r);
    criterion_13(&mut r, cora.as_ref(), &proxy);

    println!("acceptance finished in {:.0}s", start.elapsed().as_secs_f64());
    if !r.failures.is_empty() {
        println!("failed criteria: {:?}", r.failures);
        std::process::exit(1);
    }
}
