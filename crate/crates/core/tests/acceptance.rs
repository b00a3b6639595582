//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use psyprofile::analysis::{feature_trait_matrix, pearson, tsne, TsneConfig};
use psyprofile::bundled;
use psyprofile::corpus::{filter_spam, parse_users, write_users, LoadOptions, PsychTrait, SpamPolicy, TraitProfile};
use psyprofile::features::select_top_k;
use psyprofile::ml::{fit_baseline, fit_tree, mae, rmse, ForestParams, TreeNode, TreeParams};
use psyprofile::pipeline::{
    evaluate, label_columns, learning_curve, write_model_report, write_predictions, write_prepared, write_trait_report,
    EvalConfig, FeatureConfig, FeaturePipeline, ModelConfig, PreparedUser, Route, RouteMap,
};
use psyprofile::rng::rng_from;
use psyprofile::synth::{generate, SynthSpec};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, budget: Duration, detail: String) -> Outcome {
    ensure(elapsed <= budget, format!("{detail}; {:.1}s of {}s", elapsed.as_secs_f64(), budget.as_secs()))
}

// (y, yhat, sum of squared errors, sum of absolute errors), worked out by hand.
const METRIC_CASES: [(&[f64], &[f64], f64, f64); 20] = [
    (&[1.25, 3.0, 0.5, 0.5, 1.0, 1.5, -1.5, -1.75], &[1.25, 3.0, 0.5, 0.5, 1.0, 1.5, -1.5, -1.75], 0.0, 0.0),
    (&[-2.5, 1.25, 2.5], &[2.0, -2.75, 1.75], 36.8125, 9.25),
    (&[0.5, 2.0, 2.75, 1.75, 2.0, -1.75, 1.75], &[-3.0, 1.0, -2.5, -2.75, -2.75, -1.5, -1.25], 92.6875, 22.25),
    (&[3.0], &[0.5], 6.25, 2.5),
    (&[0.5, 1.5, -1.5, 1.0, -1.25, 2.0], &[-0.75, 0.75, -3.0, 2.25, -2.5, 0.5], 9.75, 7.5),
    (&[0.25, 1.25, -2.5, 2.5, -1.0], &[-0.5, 3.0, -1.25, 1.0, -0.75], 7.5, 5.5),
    (&[-2.5], &[1.5], 16.0, 4.0),
    (&[0.0, -2.25], &[-0.75, 0.0], 5.625, 3.0),
    (&[-3.0, 2.25], &[-3.0, -1.5], 14.0625, 3.75),
    (&[-2.75, 0.75, 0.0, 2.5], &[0.0, 0.25, -2.5, 1.5], 15.0625, 6.75),
    (&[3.0, 2.25, -1.0, -0.5], &[-2.5, -0.75, -0.5, -3.0], 45.75, 11.5),
    (&[3.0, -2.25, -2.0, -1.25, 2.5, -2.25, -3.0], &[-2.75, 0.5, 0.75, -1.75, 2.25, 1.25, -1.5], 63.0, 17.0),
    (&[1.0, -1.5, 2.75, 3.0, -2.0, 0.25, 2.0, 0.0], &[-2.25, 0.0, 0.25, -1.5, -3.0, -1.0, 1.5, -0.75], 42.6875, 15.25),
    (&[-1.5], &[-1.75], 0.0625, 0.25),
    (&[1.75, 2.0, 1.5, -2.25, -2.75, -2.0, -1.5], &[0.5, -1.0, -3.0, 3.0, 1.75, -0.5, -0.75], 81.4375, 20.75),
    (&[-2.5, -2.5, -2.5, -1.5, 1.5, 2.0, -1.25], &[-3.0, 1.75, -0.25, -0.25, 1.75, 0.5, -2.0], 27.8125, 10.75),
    (&[1.5, -2.0, 0.0, -1.75, 2.0, -2.0, -0.75, -1.25], &[1.75, -1.25, 2.75, -1.5, -1.75, 2.75, 2.0, 1.25], 58.6875, 17.75),
    (&[2.25, 0.0, 0.75, 1.75], &[-2.5, 0.25, -2.75, -2.25], 50.875, 12.5),
    (&[-2.75, 1.0], &[-1.0, -1.25], 8.125, 4.0),
    (&[-1.0, 0.25, 1.75, 0.75, -0.75, 1.0, -1.75], &[2.75, -2.5, -2.0, -1.25, 0.75, 1.25, 2.0], 56.0625, 17.75),
];

fn metric_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (y, yhat, sse, sae) in METRIC_CASES {
        let n = y.len() as f64;
        worst = worst.max((rmse(y, yhat).unwrap() - (sse / n).sqrt()).abs());
        worst = worst.max((mae(y, yhat).unwrap() - sae / n).abs());
    }
    let mut rng = rng_from(101);
    let normal = Normal::new(0.0, 3.0).unwrap();
    let mut violations = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=50);
        let y: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let yhat: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        if mae(&y, &yhat).unwrap() > rmse(&y, &yhat).unwrap() {
            violations += 1;
        }
    }
    let detail = format!("max |err| {worst:.2e} on 20 vectors, {violations} mae > rmse in 10000 trials");
    if worst > 1e-12 || violations > 0 {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(1), detail)
}

fn baseline_equivalence() -> Outcome {
    let mut rng = rng_from(202);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=300);
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let mean = y.iter().sum::<f64>() / n as f64;
        let std = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        let model = fit_baseline(&y).unwrap();
        worst = worst.max((rmse(&y, &model.predict_n(n)).unwrap() - std).abs());
    }
    ensure(worst <= 1e-12, format!("max |rmse - population std| {worst:.2e} over 100 label sets"))
}

fn sse(rows: &[usize], y: &[f64]) -> f64 {
    let mean = rows.iter().map(|&i| y[i]).sum::<f64>() / rows.len() as f64;
    rows.iter().map(|&i| (y[i] - mean).powi(2)).sum()
}

/// Exhaustive search over every feature and every gap between distinct
/// values; first (feature, threshold) wins among equal errors.
fn brute_force_split(x: &[Vec<f64>], y: &[f64]) -> Option<(usize, f64, f64)> {
    let parent = sse(&(0..y.len()).collect::<Vec<_>>(), y);
    let mut best: Option<(usize, f64, f64)> = None;
    for (f, col) in x.iter().enumerate() {
        let mut values = col.clone();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = w[0] + (w[1] - w[0]) / 2.0;
            let (left, right): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| col[i] <= t);
            let err = sse(&left, y) + sse(&right, y);
            let tol = 1e-9 * parent.max(1.0);
            if best.is_none_or(|(_, _, b)| err < b - tol) {
                best = Some((f, t, err));
            }
        }
    }
    best.filter(|&(_, _, err)| err < parent - 1e-9 * parent.max(1.0))
}

fn tree_split_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from(303);
    let mut mismatches = Vec::new();
    for case in 0..50 {
        let n = rng.random_range(10..=200);
        let p = rng.random_range(1..=10);
        let discrete = case % 3 == 0;
        let mut x: Vec<Vec<f64>> = (0..p)
            .map(|_| {
                (0..n).map(|_| if discrete { rng.random_range(0..5) as f64 } else { rng.random::<f64>() * 10.0 }).collect()
            })
            .collect();
        if case % 5 == 0 && p > 1 {
            x[p - 1] = x[0].clone();
        }
        let y: Vec<f64> = (0..n).map(|i| x[0][i].sin() + 0.3 * x[p / 2][i] + rng.random::<f64>()).collect();
        let refs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let tree = fit_tree(&refs, &y, &TreeParams::default(), case).unwrap();
        let got = match tree {
            TreeNode::Split { feature, threshold, .. } => Some((feature, threshold)),
            TreeNode::Leaf { .. } => None,
        };
        let want = brute_force_split(&x, &y).map(|(f, t, _)| (f, t));
        let same = match (got, want) {
            (Some((gf, gt)), Some((wf, wt))) => gf == wf && (gt - wt).abs() <= 1e-12 * wt.abs().max(1.0),
            (None, None) => true,
            _ => false,
        };
        if !same {
            mismatches.push(format!("case {case}: tree {got:?} vs brute force {want:?}"));
        }
    }
    if !mismatches.is_empty() {
        return Err(format!("{} of 50 root splits differ: {}", mismatches.len(), mismatches.join("; ")));
    }
    within(start.elapsed(), Duration::from_secs(30), "50 of 50 root splits match brute force".into())
}

fn abs_pearson(x: &[f64], y: &[f64]) -> f64 {
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return 0.0;
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxy / (sxx * syy).sqrt()).abs()
}

fn selection_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from(404);
    let mut ties = 0;
    for case in 0..100 {
        let n = rng.random_range(5..=60);
        let m = rng.random_range(1..=300);
        let constant_target = case % 10 == 0;
        let y: Vec<f64> = (0..n).map(|i| if constant_target { 2.0 } else { rng.random::<f64>() + (i % 3) as f64 }).collect();
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(m);
        for j in 0..m {
            let col = match rng.random_range(0..6) {
                0 if j > 0 => cols[rng.random_range(0..j)].clone(),
                1 if j > 0 => cols[rng.random_range(0..j)].iter().map(|v: &f64| -v).collect(),
                2 => vec![rng.random::<f64>(); n],
                _ => (0..n).map(|i| rng.random::<f64>() + if j % 4 == 0 { y[i] } else { 0.0 }).collect(),
            };
            cols.push(col);
        }
        let mut ids: Vec<usize> = (0..m).collect();
        ids.shuffle(&mut rng);
        let names: Vec<String> = ids.iter().map(|i| format!("col{i:04}")).collect();
        let k = rng.random_range(0..=m + 5);

        let scores: Vec<f64> = cols.iter().map(|c| abs_pearson(c, &y)).collect();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(names[a].cmp(&names[b])));
        order.truncate(k);
        ties += order.windows(2).filter(|w| scores[w[0]] == scores[w[1]]).count();

        let got = select_top_k(&names, &cols, &y, k);
        if got != order {
            return Err(format!("case {case} (n={n}, m={m}, k={k}): selection {got:?} vs full sort {order:?}"));
        }
    }
    within(start.elapsed(), Duration::from_secs(10), format!("100 of 100 column sets match, {ties} tied neighbors"))
}

fn prepare(spec: &SynthSpec) -> Vec<PreparedUser> {
    bundled::preprocessor(0).prepare(&generate(spec).unwrap()).unwrap()
}

fn chain_benefit() -> Outcome {
    let start = Instant::now();
    let users = prepare(&SynthSpec::bundled_strong());
    let eval = evaluate(&users, &EvalConfig { seed: 1, ..EvalConfig::default() }).unwrap();
    let hm = eval.mean_holistic_rmse().unwrap();
    let im = eval.mean_independent_rmse().unwrap();
    let base = eval.mean_baseline_rmse();
    let detail = format!(
        "n={} HM {hm:.4} IM {im:.4} baseline {base:.4}: margin {:.4}, HM {:.0}% and IM {:.0}% below baseline",
        users.len(),
        im - hm,
        100.0 * (1.0 - hm / base),
        100.0 * (1.0 - im / base)
    );
    if !(im - hm >= 0.005 && hm <= 0.8 * base && im <= 0.8 * base) {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(300), detail)
}

fn learning_curve_shape() -> Outcome {
    let start = Instant::now();
    let users = prepare(&SynthSpec::bundled_default());
    let points =
        learning_curve(&users, &[0.4, 0.6, 0.8, 1.0], 0.2, &EvalConfig { seed: 1, ..EvalConfig::default() }).unwrap();
    let curve: Vec<String> = points.iter().map(|p| format!("{:.0}%={:.4}", p.fraction * 100.0, p.rmse)).collect();
    let detail = format!("holdout rmse {}", curve.join(" "));
    if points.last().unwrap().rmse > points[0].rmse {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(600), detail)
}

fn weight_bits(seed: u64) -> Vec<u64> {
    let (clf, _) = bundled::emotion_classifier(seed);
    clf.heads.iter().flat_map(|h| h.weights.iter().chain([&h.bias]).map(|w| w.to_bits())).collect()
}

fn emotion_classifier() -> Outcome {
    let (_, report) = bundled::emotion_classifier(7);
    let first = weight_bits(7);
    let again = weight_bits(7);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let threaded = pool.install(|| weight_bits(7));
    let identical = first == again && first == threaded;
    ensure(
        report.precision == Some(1.0) && identical,
        format!(
            "held-out precision {:?} on {} texts, {} weights bit-identical across runs: {identical}",
            report.precision,
            report.n_test,
            first.len()
        ),
    )
}

fn permutation_p(x: &[f64], y: &[f64], rounds: usize, seed: u64) -> f64 {
    let observed = abs_pearson(x, y);
    let mut rng = rng_from(seed);
    let mut shuffled = y.to_vec();
    let mut hits = 0;
    for _ in 0..rounds {
        shuffled.shuffle(&mut rng);
        if abs_pearson(x, &shuffled) >= observed - 1e-12 {
            hits += 1;
        }
    }
    hits as f64 / rounds as f64
}

fn correlation_machinery() -> Outcome {
    let mut rng = rng_from(808);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut worst = 0.0f64;
    for s in 0..20 {
        let n = rng.random_range(8..=30);
        let beta = [0.0, 0.3, 0.6, 1.0][s % 4];
        let x: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let y: Vec<f64> = x.iter().map(|v| beta * v + normal.sample(&mut rng)).collect();
        let analytic = pearson(&x, &y).unwrap().p;
        worst = worst.max((analytic - permutation_p(&x, &y, 10_000, 900 + s as u64)).abs());
    }

    let spec = SynthSpec::bundled_default();
    let users = prepare(&spec);
    let refs: Vec<&PreparedUser> = users.iter().collect();
    let y = label_columns(&refs).unwrap();
    let features = FeatureConfig { routes: RouteMap::uniform(Route::All), ..FeatureConfig::default() };
    let pipeline = FeaturePipeline::fit(&refs, &y, &features).unwrap();
    let matrix = pipeline.to_matrix(&pipeline.transform(&refs), &refs).unwrap();
    let labels: Vec<TraitProfile> = users.iter().map(|u| u.label.unwrap()).collect();
    let report = feature_trait_matrix(&matrix, &labels).unwrap();
    let planted = spec.planted_columns();
    let mut misses = Vec::new();
    for (column, planted_trait) in &planted {
        let row = column.to_string();
        let strength = |t: PsychTrait| report.get(&row, t).map_or(-1.0, |s| s.rho.abs());
        let top = PsychTrait::ALL.into_iter().max_by(|a, b| strength(*a).total_cmp(&strength(*b))).unwrap();
        if top != *planted_trait || report.get(&row, *planted_trait).is_none() {
            misses.push(format!("{row} peaks at {top}, planted {planted_trait}"));
        }
    }
    let detail = format!(
        "max |p - permutation p| {worst:.4} over 20 samples; {} of {} planted columns lead their rows",
        planted.len() - misses.len(),
        planted.len()
    );
    ensure(worst <= 0.02 && misses.is_empty(), if misses.is_empty() { detail } else { format!("{detail}: {}", misses.join("; ")) })
}

/// Best training accuracy of a threshold on the Fisher discriminant direction.
fn linear_probe(points: &[[f64; 2]], group: &[bool]) -> f64 {
    let mean = |g: bool| {
        let sel: Vec<&[f64; 2]> = points.iter().zip(group).filter(|(_, &b)| b == g).map(|(p, _)| p).collect();
        let n = sel.len() as f64;
        [sel.iter().map(|p| p[0]).sum::<f64>() / n, sel.iter().map(|p| p[1]).sum::<f64>() / n]
    };
    let (m0, m1) = (mean(false), mean(true));
    let mut s = [[0.0; 2]; 2];
    for (p, &g) in points.iter().zip(group) {
        let m = if g { m1 } else { m0 };
        let d = [p[0] - m[0], p[1] - m[1]];
        for i in 0..2 {
            for j in 0..2 {
                s[i][j] += d[i] * d[j];
            }
        }
    }
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let diff = [m1[0] - m0[0], m1[1] - m0[1]];
    let w = [(s[1][1] * diff[0] - s[0][1] * diff[1]) / det, (s[0][0] * diff[1] - s[1][0] * diff[0]) / det];
    let mut proj: Vec<(f64, bool)> = points.iter().zip(group).map(|(p, &g)| (w[0] * p[0] + w[1] * p[1], g)).collect();
    proj.sort_by(|a, b| a.0.total_cmp(&b.0));
    let positives = group.iter().filter(|&&g| g).count();
    // predict "true" above the cut; scan every cut position
    let mut best = positives.max(group.len() - positives);
    let mut right_above = positives;
    let mut right_below = 0;
    for &(_, g) in &proj {
        if g {
            right_above -= 1;
        } else {
            right_below += 1;
        }
        best = best.max(right_above + right_below);
    }
    best as f64 / group.len() as f64
}

fn embedding_separation() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from(909);
    let mut points = Vec::with_capacity(600);
    let mut group = Vec::with_capacity(600);
    for i in 0..600 {
        let high = i % 2 == 1;
        let (lo, hi) = if high { (0.6, 0.95) } else { (0.05, 0.4) };
        points.push((0..7).map(|_| rng.random_range(lo..hi)).collect::<Vec<f64>>());
        group.push(high);
    }
    let embedding = tsne(&points, &TsneConfig { seed: 3, ..TsneConfig::default() }).unwrap();
    let accuracy = linear_probe(&embedding.points, &group);
    let detail = format!("linear probe accuracy {:.4} on 600 points, final KL {:.4}", accuracy, embedding.final_kl().unwrap());
    if accuracy < 0.99 {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(120), detail)
}

fn pipeline_outputs() -> Vec<(&'static str, Vec<u8>)> {
    let mut spec = SynthSpec::bundled_default();
    spec.n_users = 150;
    let mut users_bytes = Vec::new();
    write_users(&mut users_bytes, &generate(&spec).unwrap()).unwrap();
    let loaded = parse_users(users_bytes.as_slice(), &LoadOptions::default()).unwrap();
    let (kept, _) = filter_spam(&loaded.users, &SpamPolicy::default());
    let prepared = bundled::preprocessor(0).prepare(&kept).unwrap();
    let mut prepared_bytes = Vec::new();
    write_prepared(&mut prepared_bytes, &prepared).unwrap();
    let config = EvalConfig {
        folds: 3,
        seed: 10,
        features: FeatureConfig::default(),
        model: ModelConfig { n_chains: 4, forest: ForestParams { n_trees: 20, ..ForestParams::default() }, ..ModelConfig::default() },
        baseline_only: false,
    };
    let eval = evaluate(&prepared, &config).unwrap();
    let (mut traits, mut models, mut preds) = (Vec::new(), Vec::new(), Vec::new());
    write_trait_report(&mut traits, &eval).unwrap();
    write_model_report(&mut models, &eval).unwrap();
    write_predictions(&mut preds, &eval).unwrap();
    vec![
        ("users.jsonl", users_bytes),
        ("prepared.jsonl", prepared_bytes),
        ("trait_report.csv", traits),
        ("model_report.csv", models),
        ("oof_predictions.csv", preds),
    ]
}

fn determinism_sweep() -> Outcome {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).max(8);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let wide = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let a = single.install(pipeline_outputs);
    let b = single.install(pipeline_outputs);
    let c = wide.install(pipeline_outputs);
    let differing: Vec<&str> =
        a.iter().zip(&b).zip(&c).filter(|((x, y), z)| x.1 != y.1 || x.1 != z.1).map(|((x, _), _)| x.0).collect();
    let bytes: usize = a.iter().map(|(_, v)| v.len()).sum();
    ensure(
        differing.is_empty(),
        format!("{} files ({bytes} bytes) compared over 2 runs on 1 thread and 1 on {threads}; differing: {differing:?}", a.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("metric oracle", metric_oracle),
        ("baseline equivalence", baseline_equivalence),
        ("tree-split oracle", tree_split_oracle),
        ("selection oracle", selection_oracle),
        ("chain benefit", chain_benefit),
        ("learning-curve shape", learning_curve_shape),
        ("emotion classifier", emotion_classifier),
        ("correlation machinery", correlation_machinery),
        ("embedding separation", embedding_separation),
        ("determinism sweep", determinism_sweep),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail}) [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({detail}) [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
