//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Built with `harness = false`, so `cargo test --test acceptance` runs all
//! eleven criteria in order and exits non-zero if any of them fails.
//! Reference values come from independent oracles (brute-force tensor
//! expansions, closed forms, exact binomial tails), never from the code
//! under test.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use noisy_kernel::environments::{impossibility_experiment, impossibility_pair, NoiseModel};
use noisy_kernel::feature_map::{prod_exact, prod_pair, FeatureEstimate, FeatureSampler};
use noisy_kernel::harness::stats::{loglog_slope, Running};
use noisy_kernel::harness::{execute, run_experiment, ExperimentSpec, ExperimentSummary};
use noisy_kernel::kernels::Kernel;
use noisy_kernel::learner::linear::{two_copy_gradient, LinearLearner, NaiveOgd};
use noisy_kernel::learner::{grad_length_estimate, Hypothesis};
use noisy_kernel::losses::{loss_catalogue, AnalyticLoss, LossFamily};
use noisy_kernel::oracle::NoisyInstanceOracle;
use noisy_kernel::rng::{StreamSeeds, StreamTag};
use noisy_kernel::series::{estimate_scalar, second_moment_bound, CoefficientStream, GeometricLaw, IndexLaw};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String), Box<dyn std::error::Error>>;
type Criterion = (&'static str, fn() -> Check, Duration);

/// Standard-error band used by every statistical criterion.
const K_SE: f64 = 4.0;

fn spec_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(format!("{name}.json"))
}

fn load(name: &str) -> Result<ExperimentSpec, Box<dyn std::error::Error>> {
    Ok(ExperimentSpec::load(&spec_path(name))?)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- 1

fn geometric_law() -> Check {
    let n = 1_000_000u64;
    let mut ok = true;
    let mut notes = Vec::new();
    for (i, p) in [1.5, 2.0, 4.0].into_iter().enumerate() {
        let law = GeometricLaw::new(p)?;
        let mut r = rng(100 + i as u64);
        let mut sum = 0u64;
        let zs = [1u64, 2, 3, 5];
        let mut tail = [0u64; 4];
        for _ in 0..n {
            let d = law.sample(&mut r)?;
            sum += d;
            for (k, z) in zs.iter().enumerate() {
                if d >= *z {
                    tail[k] += 1;
                }
            }
        }
        let mean = sum as f64 / n as f64;
        let target = 1.0 / (p - 1.0);
        let mean_ok = (mean - target).abs() <= 0.01 * target;
        ok &= mean_ok;
        let mut worst = 0.0f64;
        for (k, z) in zs.iter().enumerate() {
            let q = p.powi(-(*z as i32));
            let se = (q * (1.0 - q) / n as f64).sqrt();
            let dev = (tail[k] as f64 / n as f64 - q).abs() / se;
            worst = worst.max(dev);
        }
        ok &= worst <= K_SE;
        notes.push(format!("p={p}: E[N]={mean:.4} (target {target:.4}), worst tail {worst:.2} SE"));
    }
    Ok((ok, notes.join("; ")))
}

// ---------------------------------------------------------------- 2

fn scalar_estimator() -> Check {
    let f = CoefficientStream::exp_linear(1.0);
    let law = GeometricLaw::new(2.0)?;
    let mut r = rng(200);
    let mut x = |r: &mut dyn RngCore| if r.random::<bool>() { 0.4 } else { 0.6 };
    let mut theta = Running::default();
    let mut theta_sq = Running::default();
    for _ in 0..1_000_000 {
        let t = estimate_scalar(&f, &mut x, &law, &mut r)?.theta;
        theta.push(t);
        theta_sq.push(t * t);
    }
    let target = 0.5f64.exp();
    let s = theta.summary();
    let unbiased = s.within(target, K_SE);
    let second_x = (0.4f64 * 0.4 + 0.6 * 0.6) / 2.0;
    let bound = second_moment_bound(f64::exp, &law, second_x)?;
    let m2 = theta_sq.summary();
    let bounded = m2.mean - K_SE * m2.stderr <= bound;
    Ok((
        unbiased && bounded,
        format!(
            "mean {:.5} +- {:.5} vs e^0.5 = {target:.5}; E[theta^2] = {:.4} <= bound {bound:.4}",
            s.mean, s.stderr, m2.mean
        ),
    ))
}

// ---------------------------------------------------------------- 3

/// Independent expansion of an estimate into its formal coordinates,
/// keyed by degree: `scale * exp_factor * (c_1 (x) ... (x) c_n)`.
fn formal(f: &FeatureEstimate) -> BTreeMap<usize, Vec<f64>> {
    let mut block = vec![f.scale() * f.exp_factor()];
    for c in f.copies() {
        block = block.iter().flat_map(|b| c.iter().map(move |v| b * v)).collect();
    }
    BTreeMap::from([(f.degree(), block)])
}

fn tensor_power(x: &[f64], n: usize) -> Vec<f64> {
    let mut block = vec![1.0];
    for _ in 0..n {
        block = block.iter().flat_map(|b| x.iter().map(move |v| b * v)).collect();
    }
    block
}

fn feature_map_unbiased() -> Check {
    let kernel = Kernel::homogeneous(2)?;
    let p = 2.0;
    let x = vec![1.0, 2.0];
    // Two coordinates uniform on [-r, r]: E|Z|^2 = 2 r^2 / 3 = 0.5.
    let radius = 0.75f64.sqrt();
    let mut oracle = NoisyInstanceOracle::new(x.clone(), NoiseModel::Uniform { radius }, rng(300))?;
    let sampler = FeatureSampler::new(kernel, GeometricLaw::new(p)?, false);
    let mut r = rng(301);
    let mut coords = [Running::default(); 4];
    let mut norm = Running::default();
    let mut stray = 0u64;
    for _ in 0..1_000_000 {
        let f = sampler.map_estimate(&mut oracle, &mut r)?;
        let v = formal(&f);
        let block = if f.degree() == 2 {
            v[&2].clone()
        } else {
            if v.values().flatten().any(|c| *c != 0.0) {
                stray += 1;
            }
            vec![0.0; 4]
        };
        for (acc, c) in coords.iter_mut().zip(&block) {
            acc.push(*c);
        }
        norm.push(v.values().flatten().map(|c| c * c).sum());
    }
    let target = [1.0, 2.0, 2.0, 4.0];
    let mut ok = stray == 0;
    let mut notes = Vec::new();
    for (acc, t) in coords.iter().zip(target) {
        let s = acc.summary();
        ok &= s.within(t, K_SE);
        notes.push(format!("{:.4}+-{:.4}", s.mean, s.stderr));
    }
    let b_x = 5.0 + 0.5;
    let bound = p / (p - 1.0) * (p * b_x).powi(2);
    let n = norm.summary();
    ok &= n.mean - K_SE * n.stderr <= bound;
    Ok((
        ok,
        format!(
            "coords [{}] vs (1,2,2,4); E|Psi~|^2 = {:.2} <= {bound}; off-degree mass in {stray} draws",
            notes.join(", "),
            n.mean
        ),
    ))
}

// ---------------------------------------------------------------- 4

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Independent `beta_n` for the kernels used here.
fn reference_beta(name: &str, n: usize, sigma_sq: f64) -> f64 {
    match name {
        "linear" => f64::from(n == 1),
        "homogeneous2" => f64::from(n == 2),
        "homogeneous3" => f64::from(n == 3),
        "inhomogeneous3" => {
            if n <= 3 {
                binom(3, n)
            } else {
                0.0
            }
        }
        "exponential" => 1.0 / factorial(n),
        "gaussian" => (2.0 / sigma_sq).powi(n as i32) / factorial(n),
        _ => unreachable!(),
    }
}

fn prod_exactness() -> Check {
    let sigma_sq = 1.7;
    let kernels = [
        ("linear", Kernel::linear()),
        ("homogeneous2", Kernel::homogeneous(2)?),
        ("homogeneous3", Kernel::homogeneous(3)?),
        ("inhomogeneous3", Kernel::inhomogeneous(3)?),
        ("exponential", Kernel::exponential()),
        ("gaussian", Kernel::gaussian(sigma_sq)?),
    ];
    let mut r = rng(400);
    let p = 2.0;
    let mut worst = 0.0f64;
    let mut mismatched_degree_nonzero = 0;
    for case in 0..1000 {
        let (name, kernel) = kernels[case % kernels.len()];
        let dim = r.random_range(1..=3usize);
        let deg_a = r.random_range(0..=4usize);
        let deg_b = if r.random_bool(0.7) { deg_a } else { r.random_range(0..=4usize) };
        let gaussian = matches!(kernel, Kernel::Gaussian(_));
        let make = |deg: usize, r: &mut ChaCha8Rng| -> Result<FeatureEstimate, noisy_kernel::Error> {
            let copies: Vec<Vec<f64>> = (0..deg)
                .map(|_| (0..dim).map(|_| r.random_range(-2.0..2.0)).collect())
                .collect();
            let exp_factor = if gaussian { r.random_range(0.1..3.0) } else { 1.0 };
            FeatureEstimate::from_parts(kernel, p, copies, r.random_range(-3.0..3.0), exp_factor)
        };
        let a = make(deg_a, &mut r)?;
        let b = make(deg_b, &mut r)?;
        let got = prod_pair(&a, &b)?;
        if deg_a != deg_b {
            if got != 0.0 {
                mismatched_degree_nonzero += 1;
            }
        } else {
            let (fa, fb) = (formal(&a), formal(&b));
            let (va, vb) = (&fa[&deg_a], &fb[&deg_b]);
            let exact: f64 = va.iter().zip(vb).map(|(u, v)| u * v).sum();
            let scale: f64 = va.iter().zip(vb).map(|(u, v)| (u * v).abs()).sum();
            if scale > 0.0 {
                worst = worst.max((got - exact).abs() / scale);
            } else if got != 0.0 {
                worst = f64::INFINITY;
            }
        }
        // Against the exact feature map of a fresh point.
        let xp: Vec<f64> = (0..dim).map(|_| r.random_range(-1.5..1.5)).collect();
        let beta = reference_beta(name, deg_a, sigma_sq);
        let outer = if gaussian {
            (-xp.iter().map(|v| v * v).sum::<f64>() / sigma_sq).exp()
        } else {
            1.0
        };
        let psi: Vec<f64> = tensor_power(&xp, deg_a).iter().map(|v| beta.sqrt() * outer * v).collect();
        let va = &formal(&a)[&deg_a];
        let exact: f64 = va.iter().zip(&psi).map(|(u, v)| u * v).sum();
        let scale: f64 = va.iter().zip(&psi).map(|(u, v)| (u * v).abs()).sum();
        let got = prod_exact(&a, &xp)?;
        if scale > 0.0 {
            worst = worst.max((got - exact).abs() / scale);
        } else if got != 0.0 {
            worst = f64::INFINITY;
        }
    }
    Ok((
        worst <= 1e-12 && mismatched_degree_nonzero == 0,
        format!(
            "worst relative error {worst:.2e} (scaled by sum |a_i b_i|); nonzero cross-degree products: {mismatched_degree_nonzero}"
        ),
    ))
}

// ---------------------------------------------------------------- 5

fn per_round_queries(summary: &ExperimentSummary) -> (f64, usize) {
    let q = summary.queries.as_ref().expect("queries diagnostic requested");
    (q.per_round.mean, q.per_round.n)
}

fn query_counts() -> Check {
    let (dot, _) = execute(&load("queries_dot_product")?)?;
    let (gauss, _) = execute(&load("queries_gaussian")?)?;
    let (m_dot, n_dot) = per_round_queries(&dot);
    let (m_gauss, n_gauss) = per_round_queries(&gauss);
    let ok = (m_dot - 2.0).abs() <= 0.02 * 2.0
        && (m_gauss - 6.0).abs() <= 0.02 * 6.0
        && n_dot == 100_000
        && n_gauss == 100_000;
    Ok((
        ok,
        format!("dot-product {m_dot:.4} over {n_dot} rounds (target 2); gaussian {m_gauss:.4} over {n_gauss} rounds (target 6)"),
    ))
}

// ---------------------------------------------------------------- 6

fn gradient_estimator() -> Check {
    let p = 2.0;
    let law = GeometricLaw::new(p)?;
    let kernels = [
        Kernel::linear(),
        Kernel::homogeneous(2)?,
        Kernel::inhomogeneous(2)?,
        Kernel::exponential(),
        Kernel::gaussian(2.0)?,
    ];
    let noise = NoiseModel::Gaussian { variance: 0.05 };
    let trials = 100_000;
    let mut ok = true;
    let mut worst_dev = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for h in 0..10u64 {
        let kernel = kernels[h as usize % kernels.len()];
        let sampler = FeatureSampler::new(kernel, law, false);
        let mut r = rng(600 + h);
        // Freeze a hypothesis built from noisy feature estimates.
        let mut terms = Vec::new();
        for _ in 0..6 {
            let c: Vec<f64> = (0..2).map(|_| r.random_range(-0.5..0.5)).collect();
            let mut o = NoisyInstanceOracle::new(c, noise.clone(), rng(r.random()))?;
            terms.push((r.random_range(-0.3..0.3), sampler.map_estimate(&mut o, &mut r)?));
        }
        let mut hyp = Hypothesis::from_terms(kernel, p, terms)?;
        hyp.project(0.5);
        let b_w = hyp.norm_sq();
        let x: Vec<f64> = (0..2).map(|_| r.random_range(-0.5..0.5)).collect();
        let a = hyp.predict(&x)?;
        let mut oracle = NoisyInstanceOracle::new(x.clone(), noise.clone(), rng(r.random()))?;
        let mut psi_sq = Running::default();
        for _ in 0..trials {
            psi_sq.push(sampler.map_estimate(&mut oracle, &mut r)?.squared_norm());
        }
        let b_psi = psi_sq.mean();
        for loss in [AnalyticLoss::exponential(), AnalyticLoss::squared()] {
            let y = match loss.family() {
                LossFamily::Classification => {
                    if r.random_bool(0.5) {
                        1.0
                    } else {
                        -1.0
                    }
                }
                LossFamily::Regression => r.random_range(-1.0..1.0),
            };
            let grad_law = IndexLaw::for_series(law, loss.deriv_series(), false);
            let mut g = Running::default();
            let mut g_sq = Running::default();
            for _ in 0..trials {
                let (v, _) = grad_length_estimate(&mut oracle, y, &hyp, &loss, &sampler, &grad_law, &mut r)?;
                g.push(v);
                g_sq.push(v * v);
            }
            let (target, arg_sq) = match loss.family() {
                LossFamily::Classification => (y * loss.deriv(y * a), b_w * b_psi),
                LossFamily::Regression => (loss.deriv(a - y), ((b_w * b_psi).sqrt() + y.abs()).powi(2)),
            };
            let s = g.summary();
            let dev = (s.mean - target).abs() / s.stderr.max(f64::MIN_POSITIVE);
            worst_dev = worst_dev.max(dev);
            let bound = p / (p - 1.0) * loss.deriv_plus((p * arg_sq).sqrt()).powi(2);
            let m2 = g_sq.summary();
            worst_ratio = worst_ratio.max((m2.mean - K_SE * m2.stderr) / bound);
            ok &= s.within(target, K_SE) && m2.mean - K_SE * m2.stderr <= bound;
        }
    }
    Ok((
        ok,
        format!("worst mean deviation {worst_dev:.2} SE; worst (E[g^2] - 4 SE) / bound = {worst_ratio:.3}"),
    ))
}

// ---------------------------------------------------------------- 7

fn mean_regret(summary: &ExperimentSummary) -> f64 {
    summary.regret.as_ref().expect("regret diagnostic requested").mean
}

fn sublinear_regret() -> Check {
    let (short, _) = execute(&load("regret_linear_T1000")?)?;
    let (long, _) = execute(&load("regret_linear_T10000")?)?;
    let (r1, r2) = (mean_regret(&short), mean_regret(&long));
    let slope = loglog_slope(&[1e3, 1e4], &[r1, r2])?;
    let (avg1, avg2) = (r1 / 1e3, r2 / 1e4);
    Ok((
        slope <= 0.75 && avg2 < avg1,
        format!("regret {r1:.1} (T=1e3), {r2:.1} (T=1e4); slope {slope:.3}; average {avg1:.4} -> {avg2:.4}"),
    ))
}

// ---------------------------------------------------------------- 8

fn two_copy() -> Check {
    let mut r = rng(800);
    let mut worst = 0.0f64;
    let mut ok = true;
    for _ in 0..10 {
        let w: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
        let y: f64 = r.random_range(-1.0..1.0);
        let residual: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() - y;
        let exact: Vec<f64> = x.iter().map(|v| 2.0 * residual * v).collect();
        let mut o = NoisyInstanceOracle::new(x.clone(), NoiseModel::Gaussian { variance: 0.5 }, rng(r.random()))?;
        let mut acc = [Running::default(); 3];
        for _ in 0..100_000 {
            let g = two_copy_gradient(&mut o, y, &w)?;
            acc.iter_mut().zip(&g).for_each(|(a, v)| a.push(*v));
        }
        for (a, t) in acc.iter().zip(&exact) {
            let s = a.summary();
            worst = worst.max((s.mean - t).abs() / s.stderr);
            ok &= s.within(*t, K_SE);
        }
    }
    let (tc, _) = execute(&load("two_copy_T10000")?)?;
    let (base, _) = execute(&load("baseline_T10000")?)?;
    let ratio = mean_regret(&tc) / mean_regret(&base);
    Ok((
        ok && ratio <= 2.0,
        format!(
            "gradient worst deviation {worst:.2} SE; average regret two-copy {:.5} vs baseline {:.5} (ratio {ratio:.3})",
            mean_regret(&tc) / 1e4,
            mean_regret(&base) / 1e4
        ),
    ))
}

// ---------------------------------------------------------------- 9

fn impossibility() -> Check {
    let spec_a = load("impossibility_a_naive")?;
    let spec_b = load("impossibility_b_naive")?;
    let horizon = spec_a.environment.horizon;
    let (env_a, env_b) = impossibility_pair(1, horizon)?;
    let specs_match = spec_a.environment == env_a && spec_b.environment == env_b;

    let loss = AnalyticLoss::squared();
    let seeds = StreamSeeds::new(spec_a.seed, 0);
    let make = || Box::new(NaiveOgd::new(1, 1.0, horizon, 4.0, AnalyticLoss::squared())) as Box<dyn LinearLearner>;
    let mut lrng = seeds.stream(0, StreamTag::Learner);
    let out = impossibility_experiment(&make, 1, horizon, &loss, 4.0, seeds, &mut lrng)?;
    let (ra, rb) = (out.avg_regret_a(), out.avg_regret_b());

    // The same runs through the harness reproduce the learner's losses.
    let (sa, _) = execute(&spec_a)?;
    let (sb, _) = execute(&spec_b)?;
    let harness_agrees = sa.repetitions[0].cumulative_loss == out.run_a.cumulative_loss
        && sb.repetitions[0].cumulative_loss == out.run_b.cumulative_loss;

    let (two, _) = execute(&load("impossibility_a_two_copy")?)?;
    let r_two = mean_regret(&two) / horizon as f64;
    let ok = specs_match && harness_agrees && out.observations_identical && ra.max(rb) >= 0.3 && r_two < 0.05 && rb < 0.05;
    Ok((
        ok,
        format!(
            "identical observations: {}; naive average regret A = {ra:.4}, B = {rb:.4}; two-query learner in A: {r_two:.4}; specs match pair: {specs_match}; harness agrees: {harness_agrees}",
            out.observations_identical
        ),
    ))
}

// ---------------------------------------------------------------- 10

fn loss_catalogue_checks() -> Check {
    let grid: Vec<f64> = (-60..=60).map(|i| i as f64 * 0.05).collect();
    let h = 1e-5;
    let mut fd_worst = 0.0f64;
    let mut series_worst = 0.0f64;
    let mut convex_worst = 0.0f64;
    let mut dominance_ok = true;
    for s in [0.5, 1.0, 2.0] {
        for loss in loss_catalogue(s)? {
            for &a in &grid {
                let d = loss.deriv(a);
                let fd = (loss.value(a + h) - loss.value(a - h)) / (2.0 * h);
                fd_worst = fd_worst.max((d - fd).abs() / d.abs().max(1.0));
                let step = 0.05;
                let second = loss.value(a + step) - 2.0 * loss.value(a) + loss.value(a - step);
                convex_worst = convex_worst.min(second);
                if a.abs() <= 2.0 {
                    let by_series = loss.deriv_series().eval(a);
                    series_worst = series_worst.max((by_series - d).abs() / d.abs().max(1.0));
                }
            }
            for i in 1..=40 {
                let x = i as f64 * 0.05;
                // p = 2, so (p - 1) u = x^2.
                let plus = loss.deriv_series().eval_abs(x);
                dominance_ok &= plus <= loss.deriv_plus_bound(2.0, x * x)?;
            }
        }
    }
    // Closed-form derivative bounds against the absolute-coefficient series.
    let mut closed_worst = 0.0f64;
    for loss in [AnalyticLoss::squared(), AnalyticLoss::exponential()] {
        for p in [1.5, 2.0, 4.0] {
            for u in [0.1f64, 0.5, 1.0, 2.0, 4.0] {
                let x = ((p - 1.0) * u).sqrt();
                let closed = loss.deriv_plus_bound(p, u)?;
                let series = loss.deriv_series().eval_abs(x);
                closed_worst = closed_worst.max((closed - series).abs() / series.abs());
            }
        }
    }
    let examples = (AnalyticLoss::squared().deriv_plus_bound(2.0, 4.0)? - 4.0).abs() < 1e-15
        && (AnalyticLoss::exponential().deriv_plus_bound(2.0, 1.0)? - std::f64::consts::E).abs() < 1e-15;
    let ok = fd_worst <= 1e-6
        && series_worst <= 1e-8
        && convex_worst >= -1e-9
        && dominance_ok
        && closed_worst <= 1e-10
        && examples;
    Ok((
        ok,
        format!(
            "finite-difference {fd_worst:.1e}, series {series_worst:.1e}, min second difference {convex_worst:.1e}, bound dominance {dominance_ok}, closed-form bounds {closed_worst:.1e}"
        ),
    ))
}

// ---------------------------------------------------------------- 11

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).expect("readable output dir") {
        let e = e.expect("dir entry");
        out.insert(
            e.file_name().to_string_lossy().into_owned(),
            std::fs::read(e.path()).expect("readable output file"),
        );
    }
    out
}

fn determinism() -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["determinism_gaussian", "regret_linear_T1000", "two_copy_T10000"] {
        let mut runs = Vec::new();
        for threads in [1, 3] {
            let dir = tempfile::tempdir()?;
            let mut spec = load(name)?;
            spec.outputs = Some(dir.path().to_path_buf());
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
            pool.install(|| run_experiment(&spec))?;
            runs.push(read_dir_bytes(dir.path()));
        }
        let same = runs[0] == runs[1];
        ok &= same && !runs[0].is_empty();
        notes.push(format!("{name}: {} files {}", runs[0].len(), if same { "identical" } else { "DIFFER" }));
    }
    Ok((ok, notes.join("; ")))
}

// ----------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 11] = [
        ("geometric law", geometric_law, Duration::from_secs(10)),
        ("scalar estimator", scalar_estimator, Duration::from_secs(30)),
        ("feature-map unbiasedness", feature_map_unbiased, Duration::from_secs(60)),
        ("prod exactness", prod_exactness, Duration::from_secs(5)),
        ("query counts", query_counts, Duration::from_secs(120)),
        ("gradient estimator", gradient_estimator, Duration::from_secs(120)),
        ("sublinear regret", sublinear_regret, Duration::from_secs(600)),
        ("two-copy special case", two_copy, Duration::from_secs(120)),
        ("impossibility", impossibility, Duration::from_secs(300)),
        ("loss catalogue", loss_catalogue_checks, Duration::from_secs(10)),
        ("determinism", determinism, Duration::from_secs(600)),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let number = i + 1;
        if !only.is_empty() && !only.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok((p, d)) => (p && elapsed <= *budget, d),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "criterion {number:>2} [{}] {name}: {detail} ({:.1} s, budget {} s)",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
