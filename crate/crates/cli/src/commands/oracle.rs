use serde::Serialize;
use wishart_rd::bounds::{regime_bounds, spherical_bound, wishart_differential_entropy, BoundReport};
use wishart_rd::oracles::{
    blahut_arimoto_at_distortion, mc_differential_entropy_wishart, quantization_upper_bound, rd_curve,
    DiscreteRDProblem, RDCurvePoint, UniformQuantizer,
};
use wishart_rd::specfun::binary_entropy;
use wishart_rd::{LatentConfig, Prior};

use crate::config::{require, OracleKind, RunArgs};
use crate::error::CliError;
use crate::output::{float, opt_float, Provenance, Report};

const CURVE_COLUMNS: [&str; 9] = [
    "slope",
    "rate_nats",
    "distortion",
    "iterations",
    "converged",
    "lower_bound_nats",
    "duality_gap_bound",
    "target_distortion",
    "reference_nats",
];

/// Half-width of the discretized Gaussian support, in standard deviations.
const GAUSSIAN_WIDTH: f64 = 5.0;

/// Slope magnitudes of a default curve: log-spaced over `[0.1, 100]`.
fn default_slopes() -> Vec<f64> {
    (0..25).map(|i| -(10f64).powf(-1.0 + 3.0 * i as f64 / 24.0)).collect()
}

#[derive(Serialize)]
struct CurveRow<'a> {
    #[serde(flatten)]
    point: &'a RDCurvePoint,
    target_distortion: Option<f64>,
    reference_nats: f64,
}

fn curve_fields(pt: &RDCurvePoint, target: Option<f64>, reference: f64) -> Vec<String> {
    vec![
        opt_float(pt.slope),
        float(pt.rate),
        float(pt.distortion),
        pt.iterations.to_string(),
        pt.converged.to_string(),
        opt_float(pt.lower_bound),
        float(pt.duality_gap_bound),
        opt_float(target),
        float(reference),
    ]
}

/// `h(p) - h(D)` for `D < min(p, 1-p)`, else 0.
fn binary_reference(p: f64, distortion: f64) -> f64 {
    if distortion >= p.min(1.0 - p) {
        return 0.0;
    }
    let h = |x: f64| binary_entropy(x).map(|r| r.value).unwrap_or(f64::NAN);
    h(p) - h(distortion)
}

fn gaussian_reference(distortion: f64) -> f64 {
    (0.5 * (1.0 / distortion).ln()).max(0.0)
}

pub fn run(args: &RunArgs) -> Result<u8, CliError> {
    let kind = require(args.kind, "kind")?;
    match kind {
        OracleKind::BaBinary | OracleKind::BaGaussian => blahut(args, kind),
        OracleKind::WishartEntropy => entropy(args),
        OracleKind::Quantize => quantize(args),
    }
}

fn blahut(args: &RunArgs, kind: OracleKind) -> Result<u8, CliError> {
    let binary = kind == OracleKind::BaBinary;
    let tol = args.tol.unwrap_or(if binary { 1e-9 } else { 1e-4 });
    let max_iter = args.max_iter.unwrap_or(100_000);
    let target = args.distortion;
    let mut prov = Provenance::new("oracle");
    prov.param("tol", tol).param("max-iter", max_iter);
    // the solver needs some target; curves ignore it
    let placeholder = target.unwrap_or(0.1);
    let (problem, reference): (DiscreteRDProblem, Box<dyn Fn(f64) -> f64>) = if binary {
        let p = RunArgs::single(&args.p, "p")?.unwrap_or(0.5);
        prov.param("kind", "ba-binary").param("p", p);
        (DiscreteRDProblem::binary_hamming(p, placeholder)?, Box::new(move |d| binary_reference(p, d)))
    } else {
        let points = args.points.unwrap_or(401);
        prov.param("kind", "ba-gaussian")
            .param("points", points)
            .param("sigma", 1.0)
            .param("width", GAUSSIAN_WIDTH);
        (
            DiscreteRDProblem::discretized_gaussian(1.0, points, GAUSSIAN_WIDTH, placeholder)?,
            Box::new(gaussian_reference),
        )
    };
    let points = match target {
        Some(dist) => {
            prov.param("D", dist);
            vec![blahut_arimoto_at_distortion(&problem, tol, max_iter)?]
        }
        None => {
            let slopes = default_slopes();
            prov.list("slopes", &slopes);
            rd_curve(&problem, &slopes, tol, max_iter)?
        }
    };
    let mut out = Report::new(args.format(), &prov, &CURVE_COLUMNS)?;
    for pt in &points {
        let reference_nats = reference(pt.distortion);
        let row = CurveRow {
            point: pt,
            target_distortion: target,
            reference_nats,
        };
        out.row(&curve_fields(pt, target, reference_nats), &row)?;
    }
    out.finish(args.output.as_deref())?;
    let unconverged = points.iter().filter(|p| !p.converged).count();
    if let [pt] = points.as_slice() {
        eprintln!(
            "rate {} nats at distortion {} (converged: {})",
            float(pt.rate),
            float(pt.distortion),
            pt.converged
        );
    } else {
        eprintln!("{} curve points, {unconverged} unconverged", points.len());
    }
    Ok(0)
}

#[derive(Serialize)]
struct EntropyRow {
    n: usize,
    d: usize,
    samples: usize,
    estimate: f64,
    std_error: f64,
    closed_form: f64,
    rejected: usize,
}

fn entropy(args: &RunArgs) -> Result<u8, CliError> {
    let n = RunArgs::required(&args.n, "n")?;
    let d = RunArgs::required(&args.d, "d")?;
    let samples = args.samples.unwrap_or(1_000_000);
    let seed = args.seed();
    let mut prov = Provenance::new("oracle");
    prov.param("kind", "wishart-entropy")
        .param("n", n)
        .param("d", d)
        .param("samples", samples)
        .param("seed", seed);
    let est = mc_differential_entropy_wishart(n, d, samples, seed)?;
    let row = EntropyRow {
        n,
        d,
        samples: est.samples,
        estimate: est.estimate,
        std_error: est.std_error,
        closed_form: wishart_differential_entropy(n, d)?,
        rejected: est.rejected,
    };
    let fields = vec![
        n.to_string(),
        d.to_string(),
        row.samples.to_string(),
        float(row.estimate),
        float(row.std_error),
        float(row.closed_form),
        row.rejected.to_string(),
    ];
    let columns = ["n", "d", "samples", "estimate", "std_error", "closed_form", "rejected"];
    let mut out = Report::new(args.format(), &prov, &columns)?;
    out.row(&fields, &row)?;
    out.finish(args.output.as_deref())?;
    eprintln!(
        "entropy estimate {} +- {} (closed form {})",
        float(row.estimate),
        float(row.std_error),
        float(row.closed_form)
    );
    Ok(0)
}

#[derive(Serialize)]
struct QuantizeRow {
    n: usize,
    d: usize,
    prior: String,
    eta: f64,
    levels: u64,
    trials: usize,
    rate_nats: f64,
    distortion: f64,
    distortion_std_error: Option<f64>,
    max_lower_bound_nats: Option<f64>,
    max_lower_bound: Option<String>,
}

/// Largest lower bound that applies at the achieved distortion, if any.
fn lower_bound(prior: Prior, n: usize, d: usize, distortion: f64, args: &RunArgs) -> Result<Option<BoundReport>, CliError> {
    if !(distortion > 0.0) {
        return Ok(None);
    }
    let k = args.constants()?;
    let reports = match prior {
        Prior::GaussianIsotropic => regime_bounds(n, d, distortion, &k)?,
        Prior::SphereUniform => vec![spherical_bound(n, d, distortion, &k)?],
    };
    Ok(reports.into_iter().max_by(|a, b| a.value_nats.total_cmp(&b.value_nats)))
}

fn quantize(args: &RunArgs) -> Result<u8, CliError> {
    let n = RunArgs::required(&args.n, "n")?;
    let d = RunArgs::required(&args.d, "d")?;
    let eta = args.eta.unwrap_or(0.05);
    let trials = args.trials.unwrap_or(100);
    let seed = args.seed();
    let prior = args.prior();
    let k = args.constants()?;
    let mut prov = Provenance::new("oracle");
    prov.param("kind", "quantize")
        .param("n", n)
        .param("d", d)
        .param("eta", eta)
        .param("trials", trials)
        .param("seed", seed)
        .param("prior", prior)
        .param("c", k.c)
        .param("c-star", k.c_star)
        .param("C0", k.c0)
        .param("c1", k.c1)
        .param("k-slack", k.k_slack);
    let cfg = LatentConfig::new(n, d, prior, seed)?;
    let pt = quantization_upper_bound(&cfg, eta, trials)?;
    let bound = lower_bound(prior, n, d, pt.distortion, args)?;
    let row = QuantizeRow {
        n,
        d,
        prior: prior.to_string(),
        eta,
        levels: UniformQuantizer::new(eta, d)?.levels(),
        trials,
        rate_nats: pt.rate,
        distortion: pt.distortion,
        distortion_std_error: pt.distortion_std_error,
        max_lower_bound_nats: bound.as_ref().map(|b| b.value_nats),
        max_lower_bound: bound.as_ref().map(|b| b.bound_name.clone()),
    };
    let fields = vec![
        n.to_string(),
        d.to_string(),
        row.prior.clone(),
        float(eta),
        row.levels.to_string(),
        trials.to_string(),
        float(row.rate_nats),
        float(row.distortion),
        opt_float(row.distortion_std_error),
        opt_float(row.max_lower_bound_nats),
        row.max_lower_bound.clone().unwrap_or_default(),
    ];
    let columns = [
        "n",
        "d",
        "prior",
        "eta",
        "levels",
        "trials",
        "rate_nats",
        "distortion",
        "distortion_std_error",
        "max_lower_bound_nats",
        "max_lower_bound",
    ];
    let mut out = Report::new(args.format(), &prov, &columns)?;
    out.row(&fields, &row)?;
    out.finish(args.output.as_deref())?;
    eprintln!("rate {} nats at distortion {}", float(row.rate_nats), float(row.distortion));
    Ok(0)
}
