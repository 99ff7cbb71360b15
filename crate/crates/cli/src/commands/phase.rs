use std::path::{Path, PathBuf};

use serde::Serialize;
use wishart_rd::rgg::{grid, phase_sweep, GridPoint, SweepOptions, SweepSummary, DEFAULT_CALIBRATION_SAMPLES};

use crate::config::{grid_value, read_grid, RunArgs};
use crate::error::CliError;
use crate::output::{float, write_bytes, Provenance, Report};

const DEMO_N: [usize; 1] = [400];
const DEMO_D: [usize; 5] = [5, 20, 80, 320, 1280];
const DEMO_P: [f64; 2] = [0.05, 0.5];

const COLUMNS: [&str; 8] = ["n", "d", "p", "tau", "seed", "estimator", "loss_L", "runtime_s"];

#[derive(Serialize)]
struct TrendFlag {
    n: usize,
    p: f64,
    d_from: usize,
    d_to: usize,
    drop: f64,
    std_error: f64,
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    summary: &'a [SweepSummary],
    /// Consecutive `d` steps at fixed `(n, p)` where the spectral loss fell by more
    /// than two standard errors.
    trend_flags: Vec<TrendFlag>,
}

fn points(args: &RunArgs) -> Result<Vec<GridPoint>, CliError> {
    if let Some(path) = &args.grid {
        return read_grid(path)?
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let missing = |key: &str| CliError::usage(format!("grid row {}: missing {key}", i + 1));
                Ok(GridPoint {
                    n: grid_value(row, "n")?.ok_or_else(|| missing("n"))?,
                    d: grid_value(row, "d")?.ok_or_else(|| missing("d"))?,
                    p: grid_value(row, "p")?.ok_or_else(|| missing("p"))?,
                })
            })
            .collect();
    }
    let ns = args.n.clone().unwrap_or(DEMO_N.to_vec());
    let ds = args.d.clone().unwrap_or(DEMO_D.to_vec());
    let ps = args.p.clone().unwrap_or(DEMO_P.to_vec());
    Ok(grid(&ns, &ds, &ps))
}

fn trend_flags(summary: &[SweepSummary]) -> Vec<TrendFlag> {
    let mut flags = Vec::new();
    for (i, a) in summary.iter().enumerate() {
        let next = summary[i + 1..].iter().filter(|b| b.n == a.n && b.p == a.p && b.d > a.d).min_by_key(|b| b.d);
        if let Some(b) = next {
            let se = a.std_error_spectral.hypot(b.std_error_spectral);
            let drop = a.mean_loss_spectral - b.mean_loss_spectral;
            if drop > 2.0 * se {
                flags.push(TrendFlag {
                    n: a.n,
                    p: a.p,
                    d_from: a.d,
                    d_to: b.d,
                    drop,
                    std_error: se,
                });
            }
        }
    }
    flags
}

/// `out.csv` -> `out.summary.json`.
fn summary_path(args: &RunArgs) -> Option<PathBuf> {
    args.summary
        .clone()
        .or_else(|| args.output.as_deref().map(|p: &Path| p.with_extension("summary.json")))
}

pub fn run(args: &RunArgs) -> Result<u8, CliError> {
    let pts = points(args)?;
    let opts = SweepOptions {
        prior: args.prior(),
        trials: args.trials.unwrap_or(SweepOptions::default().trials),
        seed: args.seed(),
        threshold_samples: args.samples.unwrap_or(DEFAULT_CALIBRATION_SAMPLES),
        timing: args.timing,
    };
    if opts.trials == 0 {
        return Err(CliError::usage("--trials must be >= 1"));
    }
    let mut prov = Provenance::new("phase-diagram");
    prov.param("prior", opts.prior)
        .param("trials", opts.trials)
        .param("seed", opts.seed)
        .param("samples", opts.threshold_samples)
        .param("timing", opts.timing);
    match &args.grid {
        Some(_) => prov.param("grid_rows", pts.len()),
        None => prov
            .list("n", &args.n.clone().unwrap_or(DEMO_N.to_vec()))
            .list("d", &args.d.clone().unwrap_or(DEMO_D.to_vec()))
            .list("p", &args.p.clone().unwrap_or(DEMO_P.to_vec())),
    };
    let sweep = phase_sweep(&pts, &opts)?;

    let mut out = Report::new(args.format(), &prov, &COLUMNS)?;
    for r in &sweep.records {
        let fields = vec![
            r.n.to_string(),
            r.d.to_string(),
            float(r.p),
            float(r.tau),
            r.seed.to_string(),
            r.estimator.clone(),
            float(r.loss_l),
            float(r.runtime_s),
        ];
        out.row(&fields, r)?;
    }
    out.finish(args.output.as_deref())?;

    let flags = trend_flags(&sweep.summary);
    eprintln!("{:>6} {:>6} {:>6} {:>10} {:>12} {:>12}", "n", "d", "p", "d/(n h(p))", "spectral", "trivial");
    for s in &sweep.summary {
        eprintln!(
            "{:>6} {:>6} {:>6} {:>10.4} {:>12.4} {:>12.4}",
            s.n, s.d, s.p, s.ratio, s.mean_loss_spectral, s.mean_loss_trivial
        );
    }
    for f in &flags {
        eprintln!(
            "note: spectral loss fell by {:.4} (se {:.4}) from d={} to d={} at n={}, p={}",
            f.drop, f.std_error, f.d_from, f.d_to, f.n, f.p
        );
    }
    if let Some(path) = summary_path(args) {
        let file = SummaryFile {
            provenance: &prov,
            summary: &sweep.summary,
            trend_flags: flags,
        };
        let mut text = serde_json::to_string_pretty(&file).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        write_bytes(Some(&path), text.as_bytes())?;
    }
    Ok(0)
}
