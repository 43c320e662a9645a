//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::time::Instant;

use gradcobra::aggregate::{
    cobra_weights, consensual_weights, smooth_with_dh, AggregatorModel, PredictionMatrix, ZeroMassFallback,
};
use gradcobra::bandwidth::{CvPlan, CvProblem, GdConfig, GridConfig};
use gradcobra::kernel::{Bandwidth, Kernel, KernelFamily, KernelSpec};
use gradcobra::learners::{self, build_prediction_matrix, predict_all, LearnerSpec};
use gradcobra::simulate::{
    covariance, covariance_factor, gen_inputs, model_response, rmse, simulate, split_data, Dataset, InputDesign,
    SimDesign, SimModel, SplitPlan,
};
use gradcobra::tuning::{tune, Method, TuneConfig};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn cheb_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn row(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

fn random_instance(rng: &mut ChaCha8Rng, l: usize, m: usize) -> PredictionMatrix {
    let rows = DMatrix::<f64>::from_fn(l, m, |_, _| rng.random_range(-1.0..1.0));
    let y = DVector::from_fn(l, |i, _| rows[(i, 0)].sin() + rng.random_range(-0.2..0.2));
    PredictionMatrix::unnamed(rows, y).unwrap()
}

fn weight_normalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut negative = 0;
    for inst in 0..1000 {
        let family = KernelFamily::ALL[inst % KernelFamily::ALL.len()];
        let spec = KernelSpec::new(family);
        let l = rng.random_range(1..=100);
        let m = rng.random_range(1..=5);
        let rows = DMatrix::<f64>::from_fn(l, m, |_, _| rng.random_range(0.0..1.0));
        let query: Vec<f64> = (0..m).map(|_| rng.random_range(-0.2..1.2)).collect();
        let h = 10f64.powf(rng.random_range(-3.0..3.0));
        let param = if rng.random_bool(0.5) || family.is_compact() {
            Bandwidth::scale(h)
        } else {
            Bandwidth::inverse_scale(h)
        };
        let kernel = Kernel::new(spec, param).unwrap();
        let sq: Vec<f64> = (0..l).map(|i| sq_dist(&row(&rows, i), &query)).collect();
        let cheb: Vec<f64> = (0..l).map(|i| cheb_dist(&row(&rows, i), &query)).collect();
        let w = consensual_weights(&kernel, &sq, Some(&cheb));
        negative += w.values.iter().filter(|v| **v < 0.0).count();
        let total: f64 = w.values.iter().sum();
        if w.values.iter().all(|v| *v == 0.0) {
            continue;
        }
        worst = worst.max((total - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        negative == 0 && worst <= 1e-12 && secs < 10.0,
        format!("1000 instances, max |sum-1| = {worst:.2e}, negatives = {negative}, {secs:.2}s"),
    )
}

fn gradient_vs_finite_difference() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let mut worst_rel: f64 = 0.0;
    let mut failures = 0;
    let mut checks = 0;
    for inst in 0..100u64 {
        let l = rng.random_range(10..=40);
        let m = rng.random_range(1..=3);
        let kappa = if inst % 2 == 0 { 2 } else { 5 };
        let data = random_instance(&mut rng, l, m);
        let problem = CvProblem::new(&data, CvPlan::new(l, kappa, inst).unwrap()).unwrap();
        for spec in [KernelSpec::gaussian(), KernelSpec::new(KernelFamily::Exp4)] {
            let h = 10f64.powf(rng.random_range(-1.0..2.5));
            let (_, grad) = problem.error_and_grad(&spec, &Bandwidth::inverse_scale(h)).unwrap();
            let f = |h: f64| {
                problem
                    .error(&gradcobra::aggregate::Rule::consensual(spec, Bandwidth::inverse_scale(h)))
                    .unwrap()
            };
            let step = 1e-5 * h;
            let fd = (f(h + step) - f(h - step)) / (2.0 * step);
            let err = (grad - fd).abs();
            let scale = grad.abs().max(fd.abs());
            checks += 1;
            if err > (1e-4 * scale).max(1e-8) {
                failures += 1;
            }
            if scale > 1e-8 {
                worst_rel = worst_rel.max(err / scale);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && secs < 30.0,
        format!("{checks} checks, {failures} outside tolerance, max rel err = {worst_rel:.2e}, {secs:.2}s"),
    )
}

fn pairwise_gradient_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let l = rng.random_range(2..=10);
        let sigma = rng.random_range(0.5..2.0);
        let h = 10f64.powf(rng.random_range(-1.0..1.5));
        let d: Vec<f64> = (0..l).map(|_| rng.random_range(0.0..3.0)).collect();
        let y: Vec<f64> = (0..l).map(|_| rng.random_range(-2.0..2.0)).collect();
        let kernel = Kernel::new(KernelSpec::gaussian().with_sigma(sigma), Bandwidth::inverse_scale(h)).unwrap();
        let (_, ratio) = smooth_with_dh(&kernel, &d, &y).unwrap();
        let s2 = 2.0 * sigma * sigma;
        let s0: f64 = d.iter().map(|di| (-h * di / s2).exp()).sum();
        let mut pair = 0.0;
        for i in 0..l {
            for q in 0..l {
                pair += (y[q] - y[i]) * d[i] * (-h * (d[i] + d[q]) / s2).exp();
            }
        }
        let pair = pair / (s2 * s0 * s0);
        worst = worst.max((ratio - pair).abs());
    }
    outcome(worst <= 1e-10, format!("20 instances, max |ratio - pairwise| = {worst:.2e}"))
}

fn cobra_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    let mut compared = 0;
    let mut inst = 0;
    while inst < 200 {
        let l = rng.random_range(1..=8);
        let m = rng.random_range(1..=3);
        let rows = DMatrix::<f64>::from_fn(l, m, |_, _| rng.random_range(0.0..1.0));
        let query: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        let h = rng.random_range(0.05..0.8);
        let diffs: Vec<Vec<f64>> = (0..l)
            .map(|i| (0..m).map(|j| (rows[(i, j)] - query[j]).abs()).collect())
            .collect();
        if diffs.iter().flatten().any(|v| (v - h).abs() < 1e-9) {
            continue;
        }
        inst += 1;

        let unanimous: Vec<f64> = diffs
            .iter()
            .map(|dv| if dv.iter().all(|v| *v < h) { 1.0 } else { 0.0 })
            .collect();
        let expected = normalize(unanimous);
        let naive = Kernel::new(KernelSpec::new(KernelFamily::Naive), Bandwidth::scale(h)).unwrap();
        let sq: Vec<f64> = (0..l).map(|i| sq_dist(&row(&rows, i), &query)).collect();
        let cheb: Vec<f64> = (0..l).map(|i| cheb_dist(&row(&rows, i), &query)).collect();
        compared += 1;
        if consensual_weights(&naive, &sq, Some(&cheb)).values != expected {
            mismatches += 1;
        }

        for k in 1..=m {
            let alpha = k as f64 / m as f64;
            let raw: Vec<f64> = diffs
                .iter()
                .map(|dv| if dv.iter().filter(|v| **v < h).count() >= k { 1.0 } else { 0.0 })
                .collect();
            compared += 1;
            if cobra_weights(&rows, &query, h, alpha).unwrap().values != normalize(raw) {
                mismatches += 1;
            }
        }
    }
    outcome(mismatches == 0, format!("200 instances, {compared} weight vectors, {mismatches} mismatches"))
}

fn normalize(raw: Vec<f64>) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.into_iter().map(|v| v / total).collect()
    } else {
        raw
    }
}

/// Base learners fitted on one half of the training part; prediction matrix on the other half.
fn prediction_matrix_for(design: &SimDesign) -> PredictionMatrix {
    let data = simulate(design).unwrap();
    let split = split_data(&data, &SplitPlan::new(design.seed)).unwrap();
    let fitted: Vec<_> = LearnerSpec::default_roster()
        .iter()
        .map(|s| learners::fit(s, &split.learn.x, &split.learn.y).unwrap())
        .collect();
    build_prediction_matrix(&fitted, &split.aggregate.x, &split.aggregate.y).unwrap()
}

fn descent_vs_grid() -> Outcome {
    let start = Instant::now();
    let mut worst_ratio: f64 = 0.0;
    let mut best_ratio = f64::INFINITY;
    let mut max_evals = 0;
    let mut bad = 0;
    for inst in 0..20u64 {
        let model = SimModel::new(if inst % 2 == 0 { 1 } else { 3 }).unwrap();
        let d = model.default_size().1;
        let design = SimDesign::new(model, InputDesign::Uncorrelated, 500 + inst).with_size(200, d);
        let data = prediction_matrix_for(&design);
        let problem = CvProblem::new(&data, CvPlan::new(data.len(), CvPlan::DEFAULT_KAPPA, inst).unwrap()).unwrap();
        let spec = KernelSpec::gaussian();
        let grid = problem.grid_search(&spec, &GridConfig::default()).unwrap();
        let gd = problem.gradient_descent(&spec, &GdConfig { seed: inst, ..GdConfig::default() }).unwrap();
        let ratio = gd.loss / grid.loss;
        worst_ratio = worst_ratio.max(ratio);
        best_ratio = best_ratio.min(ratio);
        max_evals = max_evals.max(gd.evaluations);
        if ratio > 1.02 || gd.evaluations >= 500 {
            bad += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad == 0,
        format!("20 instances, GD/grid loss ratio in [{best_ratio:.4}, {worst_ratio:.4}], max GD evaluations = {max_evals}, {secs:.1}s"),
    )
}

fn aggregation_matches_best() -> Outcome {
    let start = Instant::now();
    let method: Method = "gauss".parse().unwrap();
    let mut base = vec![Vec::new(); 3];
    let mut agg = Vec::new();
    for rep in 0..20u64 {
        let design = SimDesign::new(SimModel::new(1).unwrap(), InputDesign::Uncorrelated, 1000 + rep).with_size(400, 20);
        let data = simulate(&design).unwrap();
        let split = split_data(&data, &SplitPlan::new(1000 + rep)).unwrap();
        let fitted: Vec<_> = LearnerSpec::default_roster()
            .iter()
            .map(|s| learners::fit(s, &split.learn.x, &split.learn.y).unwrap())
            .collect();
        let truth = split.test.y.as_slice();
        for (b, learner) in base.iter_mut().zip(&fitted) {
            b.push(rmse(&learner.predict(&split.test.x).unwrap(), truth).unwrap());
        }
        let train = build_prediction_matrix(&fitted, &split.aggregate.x, &split.aggregate.y).unwrap();
        let tuned = tune(&train, &method, &TuneConfig { seed: rep, ..TuneConfig::default() }).unwrap();
        let model = AggregatorModel::fit(train, tuned.rule, ZeroMassFallback::PaperZero).unwrap();
        let pred = model.predict(&predict_all(&fitted, &split.test.x).unwrap()).unwrap();
        agg.push(rmse(&pred.values, truth).unwrap());
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let base_means: Vec<f64> = base.iter().map(|b| mean(b)).collect();
    let best = base_means.iter().copied().fold(f64::INFINITY, f64::min);
    let ours = mean(&agg);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ours <= 1.05 * best,
        format!(
            "mean RMSE gauss = {ours:.4}, knn/ridge/tree = {:.4}/{:.4}/{:.4}, ratio = {:.3}, {secs:.1}s",
            base_means[0],
            base_means[1],
            base_means[2],
            ours / best
        ),
    )
}

/// Spearman rank correlation with average ranks for ties.
fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn variance_trend() -> Outcome {
    let start = Instant::now();
    let model = SimModel::new(1).unwrap();
    let d = 20;
    let draw = |n: usize, seed: u64| -> Dataset {
        simulate(&SimDesign::new(model, InputDesign::Uncorrelated, seed).with_size(n, d)).unwrap()
    };
    let learn = draw(200, 7001);
    let test = draw(400, 7002);
    let fitted: Vec<_> = LearnerSpec::default_roster()
        .iter()
        .map(|s| learners::fit(s, &learn.x, &learn.y).unwrap())
        .collect();
    let queries = predict_all(&fitted, &test.x).unwrap();
    let method: Method = "gauss".parse().unwrap();
    let sizes = [50usize, 100, 200, 400];
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut means = Vec::new();
    for &l in &sizes {
        let mut sum = 0.0;
        for rep in 0..10u64 {
            let agg = draw(l, 8000 + 100 * l as u64 + rep);
            let train = build_prediction_matrix(&fitted, &agg.x, &agg.y).unwrap();
            let tuned = tune(&train, &method, &TuneConfig { seed: rep, ..TuneConfig::default() }).unwrap();
            let model = AggregatorModel::fit(train, tuned.rule, ZeroMassFallback::PaperZero).unwrap();
            let e = rmse(&model.predict(&queries).unwrap().values, test.y.as_slice()).unwrap();
            xs.push(l as f64);
            ys.push(e);
            sum += e;
        }
        means.push(sum / 10.0);
    }
    let rho = spearman(&xs, &ys);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        rho <= 0.0,
        format!(
            "Spearman(l, RMSE) = {rho:.3}; mean RMSE at l=50/100/200/400: {:.4}/{:.4}/{:.4}/{:.4}, {secs:.1}s",
            means[0], means[1], means[2], means[3]
        ),
    )
}

fn simulation_fidelity() -> Outcome {
    let l = covariance_factor(100).unwrap();
    let recon = (&l * l.transpose() - covariance(100)).amax();
    let origin = model_response(SimModel::new(1).unwrap(), &DMatrix::zeros(1, 2), 0).unwrap()[0];
    let design = SimDesign::new(SimModel::new(1).unwrap(), InputDesign::Uncorrelated, 11).with_size(100_000, 3);
    let x = gen_inputs(&design).unwrap();
    let mut worst_mean: f64 = 0.0;
    let mut worst_var: f64 = 0.0;
    for c in x.column_iter() {
        let mean = c.mean();
        let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / c.len() as f64;
        worst_mean = worst_mean.max(mean.abs());
        worst_var = worst_var.max((var - 1.0 / 3.0).abs());
    }
    outcome(
        recon <= 1e-10 && origin == 1.0 && worst_mean <= 0.02 && worst_var <= 0.02,
        format!(
            "||LL'-S||max = {recon:.2e}, model 1 at 0 = {origin}, |mean| <= {worst_mean:.4}, |var-1/3| <= {worst_var:.4}"
        ),
    )
}

fn run_benchmark_cli(dir: &std::path::Path, tag: &str, timing: bool) -> Vec<u8> {
    let out = dir.join(format!("report-{tag}.csv"));
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_gradcobra"));
    cmd.args(["benchmark", "--model", "3", "--n", "150", "--d", "10", "--replications", "3"])
        .args(["--methods", "gauss,epanechnikov@grid,kcobra", "--grid-count", "60", "--seed", "42"])
        .arg("--out")
        .arg(&out);
    if !timing {
        cmd.arg("--no-timing");
    }
    let status = cmd.output().expect("run benchmark binary").status;
    assert!(status.success(), "benchmark exited with {status}");
    std::fs::read(out).unwrap()
}

/// Every column except `tune_ms` and `predict_ms`.
fn without_timing(report: &[u8]) -> Vec<String> {
    String::from_utf8_lossy(report)
        .lines()
        .map(|l| l.split(',').take(3).collect::<Vec<_>>().join(","))
        .collect()
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let a = run_benchmark_cli(dir.path(), "a", false);
    let b = run_benchmark_cli(dir.path(), "b", false);
    let c = run_benchmark_cli(dir.path(), "c", true);
    let d = run_benchmark_cli(dir.path(), "d", true);
    let rows = String::from_utf8_lossy(&a).lines().count() - 1;
    let timed_match = without_timing(&c) == without_timing(&d) && without_timing(&c) == without_timing(&a);
    outcome(
        a == b && timed_match && rows == 3 * 6,
        format!(
            "{rows} report rows; --no-timing reports bitwise equal: {}; timed reports equal outside time columns: {timed_match}",
            a == b
        ),
    )
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("1 weight normalization", weight_normalization),
        ("2 gradient vs finite difference", gradient_vs_finite_difference),
        ("3 ratio gradient equals pairwise sum", pairwise_gradient_equivalence),
        ("4 classical COBRA oracle", cobra_oracle),
        ("5 gradient descent vs grid", descent_vs_grid),
        ("6 aggregate vs best base learner", aggregation_matches_best),
        ("7 error decreases with l", variance_trend),
        ("8 simulation fidelity", simulation_fidelity),
        ("9 benchmark CLI determinism", cli_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let o = check();
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
