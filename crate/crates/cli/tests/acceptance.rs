//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion with the
//! observed numbers and runtime, and exits non-zero if any criterion fails.

use std::f64::consts::LN_2;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use wishart_rd::bounds::{
    impossibility_threshold, regime_bounds, shannon_lower_bound_gram, slb_expanded, wishart_differential_entropy,
    BoundConstants, ObservationModel,
};
use wishart_rd::oracles::{
    blahut_arimoto_at_distortion, mc_differential_entropy_wishart, moment_checks, quantization_upper_bound,
    verify_inequality_suite, DiscreteRDProblem, SuiteReport, DEFAULT_MOMENT_PARAMS,
};
use wishart_rd::rgg::{phase_sweep, GridPoint, SweepOptions};
use wishart_rd::specfun::binary_entropy;
use wishart_rd::{LatentConfig, Prior};

const SEED: u64 = 7;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn h(p: f64) -> f64 {
    binary_entropy(p).unwrap().value
}

fn suite_lines(report: &SuiteReport) -> Vec<String> {
    report
        .checks
        .iter()
        .map(|c| format!("{}: {}/{} violations, worst slack {:.3e}", c.name, c.violations, c.evaluations, c.worst_slack))
        .collect()
}

fn lemma31() -> Outcome {
    let report = verify_inequality_suite("lemma31", 10_000, SEED).unwrap();
    let zero = |name: &str| report.check(name).unwrap().violations == 0;
    let passed = zero("lemma31_stated") && zero("powers_stormer") && zero("rank_bound_sqrt_d");
    outcome(passed, suite_lines(&report).join("\n      "))
}

fn wishart_entropy() -> Outcome {
    let exact_12 = wishart_differential_entropy(1, 2).unwrap();
    let mut passed = exact_12 == 1.0;
    let mut detail = vec![format!("(1,2) closed form {exact_12:?}")];
    for (n, d) in [(2, 5), (3, 8)] {
        let est = mc_differential_entropy_wishart(n, d, 1_000_000, SEED).unwrap();
        let exact = wishart_differential_entropy(n, d).unwrap();
        let err = (est.estimate - exact).abs();
        let ok = err < 3.0 * est.std_error && err < 0.01 * exact.abs();
        passed &= ok;
        detail.push(format!(
            "({n},{d}) estimate {:.6} se {:.2e} closed form {exact:.6} ({:.2} se)",
            est.estimate,
            est.std_error,
            err / est.std_error
        ));
    }
    outcome(passed, detail.join("; "))
}

fn blahut_arimoto() -> Outcome {
    let mut worst_binary: f64 = 0.0;
    for d in [0.05, 0.1, 0.2] {
        let problem = DiscreteRDProblem::binary_hamming(0.5, d).unwrap();
        let pt = blahut_arimoto_at_distortion(&problem, 1e-9, 100_000).unwrap();
        worst_binary = worst_binary.max((pt.rate - (LN_2 - h(d))).abs());
    }
    let mut worst_gauss: f64 = 0.0;
    let mut worst_at = 0.0;
    let base = DiscreteRDProblem::discretized_gaussian(1.0, 401, 5.0, 0.5).unwrap();
    for i in 0..=17 {
        let d = 0.05 + 0.05 * i as f64;
        let pt = blahut_arimoto_at_distortion(&base.with_target(d).unwrap(), 1e-4, 100_000).unwrap();
        let err = (pt.rate - 0.5 * (1.0 / d).ln()).abs();
        if err > worst_gauss {
            worst_gauss = err;
            worst_at = d;
        }
    }
    outcome(
        worst_binary < 1e-3 && worst_gauss < 0.05,
        format!("binary max error {worst_binary:.2e}; gaussian max error {worst_gauss:.4} at D={worst_at:.2}"),
    )
}

fn slb_identity() -> Outcome {
    let k = BoundConstants::default();
    let ns = [1, 2, 3, 5, 10, 20, 50, 100, 200, 500];
    let ds = [0, 1, 3, 17, 200];
    let dists = [1e-6, 1e-4, 1e-2, 0.3, 0.9];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (i, &n) in ns.iter().enumerate() {
        for (j, &extra) in ds.iter().enumerate() {
            let d = n + extra;
            let dist = dists[(i + j) % dists.len()];
            let a = slb_expanded(n, d, dist, &k).unwrap().value_nats;
            let b = shannon_lower_bound_gram(n, d, dist, &k).unwrap().value_nats;
            worst = worst.max((a - b).abs());
            count += 1;
        }
    }
    outcome(worst <= 1e-9 && count == 50, format!("{count} points, max |difference| {worst:.2e}"))
}

fn sandwich() -> Outcome {
    let k = BoundConstants::default();
    let mut passed = true;
    let mut detail = Vec::new();
    for (n, d) in [(20, 5), (30, 30)] {
        let cfg = LatentConfig::new(n, d, Prior::GaussianIsotropic, SEED).unwrap();
        for eta in [0.2, 0.05, 0.01] {
            let pt = quantization_upper_bound(&cfg, eta, 200).unwrap();
            let bounds = regime_bounds(n, d, pt.distortion, &k).unwrap();
            let best = bounds.iter().map(|b| b.value_nats).fold(f64::NEG_INFINITY, f64::max);
            passed &= bounds.iter().all(|b| pt.rate > b.value_nats);
            detail.push(format!("({n},{d},eta={eta}) D={:.3e} rate {:.1} > {:.1}", pt.distortion, pt.rate, best));
        }
    }
    outcome(passed, detail.join("; "))
}

fn moments() -> Outcome {
    let checks = moment_checks(&DEFAULT_MOMENT_PARAMS, 1_000_000, SEED).unwrap();
    let passed = checks.iter().all(|c| c.passed());
    let worst = checks
        .iter()
        .map(|c| (c.observed.unwrap() - c.expected.unwrap()).abs() / c.std_error.unwrap())
        .fold(0.0, f64::max);
    outcome(passed, format!("{} identities, worst deviation {worst:.2} se", checks.len()))
}

fn specfun() -> Outcome {
    let report = verify_inequality_suite("specfun", 10_000, SEED).unwrap();
    outcome(report.passed(), suite_lines(&report).join("\n      "))
}

fn phase_trend() -> Outcome {
    let n = 400;
    let cases = [(0.5, 5, 1110), (0.05, 3, 320)];
    let points: Vec<GridPoint> = cases
        .iter()
        .flat_map(|&(p, lo, hi)| [GridPoint { n, d: lo, p }, GridPoint { n, d: hi, p }])
        .collect();
    let opts = SweepOptions {
        prior: Prior::GaussianIsotropic,
        trials: 20,
        seed: SEED,
        ..SweepOptions::default()
    };
    let sweep = phase_sweep(&points, &opts).unwrap();
    let mut passed = true;
    let mut detail = Vec::new();
    for pair in sweep.summary.chunks(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        passed &= lo.ratio <= 0.05 && hi.ratio >= 4.0;
        let factor = hi.mean_loss_spectral / lo.mean_loss_spectral;
        passed &= factor >= 1.5;
        detail.push(format!(
            "p={}: loss {:.3} (ratio {:.3}) -> {:.3} (ratio {:.2}), factor {factor:.2}",
            lo.p, lo.mean_loss_spectral, lo.ratio, hi.mean_loss_spectral, hi.ratio
        ));
    }
    let worst_trivial = sweep
        .summary
        .iter()
        .map(|s| (s.mean_loss_trivial - 1.0).abs())
        .fold(0.0, f64::max);
    passed &= worst_trivial <= 0.05;
    detail.push(format!("trivial max |loss - 1| {worst_trivial:.4}"));
    outcome(passed, detail.join("; "))
}

fn thresholds() -> Outcome {
    let data = include_str!("../../core/tests/data/threshold_reference.csv");
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for line in data.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let n: usize = f[0].parse().unwrap();
        let p: f64 = f[1].parse().unwrap();
        let c: f64 = f[2].parse().unwrap();
        for (model, expected) in [(ObservationModel::Graph, f[3]), (ObservationModel::Completion, f[4])] {
            let expected: f64 = expected.parse().unwrap();
            let got = impossibility_threshold(n, p, c, model).unwrap();
            worst = worst.max((got - expected).abs() / expected.abs());
        }
        rows += 1;
    }
    outcome(worst <= 1e-12, format!("{rows} (n,p,c) rows, max relative error {worst:.2e}"))
}

fn run_cli(args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_wishart-rd")).args(args).output().unwrap();
    out.status.code().unwrap_or(-1)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    std::fs::write(&grid, "n,d,D,p\n1000,3,1e-6,\n50,20,0.01,0.2\n10,300,1e-5,0.5\n").unwrap();
    let grid = grid.to_str().unwrap().to_owned();
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("bounds", vec!["bounds", "--n", "100", "--d", "1000", "--D", "1e-4", "--p", "0.3"]),
        ("bounds-grid", vec!["bounds", "--grid", &grid]),
        ("bounds-json", vec!["bounds", "--n", "30", "--d", "5", "--D", "0.01", "--format", "json"]),
        ("verify", vec!["verify", "--suite", "all", "--trials", "5000", "--seed", "11"]),
        ("ba-binary", vec!["oracle", "--kind", "ba-binary", "--p", "0.3"]),
        ("ba-gaussian", vec!["oracle", "--kind", "ba-gaussian", "--D", "0.3"]),
        ("entropy", vec!["oracle", "--kind", "wishart-entropy", "--n", "2", "--d", "5", "--samples", "50000", "--seed", "3"]),
        ("quantize", vec!["oracle", "--kind", "quantize", "--n", "20", "--d", "5", "--trials", "20", "--seed", "3"]),
        (
            "phase",
            vec![
                "phase-diagram", "--n", "80", "--d", "2,60", "--p", "0.1,0.5", "--trials", "4", "--samples", "50000",
                "--seed", "3",
            ],
        ),
    ];
    let mut mismatched = Vec::new();
    for (name, args) in &runs {
        let mut files = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("{name}-{rep}.out"));
            let mut full = args.clone();
            let out_str = out.to_str().unwrap().to_owned();
            full.extend(["--output", &out_str]);
            let code = run_cli(&full);
            if code != 0 && !(*name == "verify" && code == 1) {
                mismatched.push(format!("{name} exit {code}"));
            }
            files.push(out);
        }
        let same = |a: &Path, b: &Path| std::fs::read(a).ok().zip(std::fs::read(b).ok()).is_some_and(|(x, y)| x == y);
        if !same(&files[0], &files[1]) {
            mismatched.push(name.to_string());
        }
        if *name == "phase" {
            let summary = |p: &Path| p.with_extension("summary.json");
            if !same(&summary(&files[0]), &summary(&files[1])) {
                mismatched.push("phase summary".into());
            }
        }
    }
    outcome(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            format!("{} configurations byte-identical across reruns", runs.len())
        } else {
            format!("differing: {}", mismatched.join(", "))
        },
    )
}

type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("Procrustes/Gram inequality chain", Some(Duration::from_secs(60)), lemma31),
        ("Wishart differential entropy", Some(Duration::from_secs(300)), wishart_entropy),
        ("Blahut-Arimoto reference curves", Some(Duration::from_secs(120)), blahut_arimoto),
        ("expanded Shannon lower bound identity", None, slb_identity),
        ("quantizer rate above lower bounds", Some(Duration::from_secs(300)), sandwich),
        ("norm/direction moment identities", None, moments),
        ("special function sandwiches", None, specfun),
        ("spectral loss phase trend", Some(Duration::from_secs(900)), phase_trend),
        ("entropy-count thresholds", None, thresholds),
        ("byte-identical reruns", None, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed < l);
        let passed = result.passed && in_time;
        if !passed {
            failed += 1;
        }
        let limit_note = limit.map(|l| format!(" (limit {}s)", l.as_secs())).unwrap_or_default();
        println!(
            "{} {:>2} {name} [{:.1}s{limit_note}]\n      {}",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            result.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
