use serde::Serialize;
use wishart_rd::oracles::{verify_inequality_suite, SuiteCheck, SUITE_NAMES};

use crate::config::RunArgs;
use crate::error::CliError;
use crate::output::{float, opt_float, Provenance, Report};

const COLUMNS: [&str; 10] = [
    "suite",
    "check",
    "evaluations",
    "violations",
    "worst_slack",
    "observed",
    "expected",
    "std_error",
    "passed",
    "trials",
];

#[derive(Serialize)]
struct Row<'a> {
    suite: &'a str,
    trials: usize,
    #[serde(flatten)]
    check: &'a SuiteCheck,
    passed: bool,
}

/// Trials used when `--trials` is absent.
fn default_trials(suite: &str) -> usize {
    match suite {
        "moments_spherical" => 1_000_000,
        _ => 10_000,
    }
}

fn fields(suite: &str, trials: usize, c: &SuiteCheck) -> Vec<String> {
    vec![
        suite.to_owned(),
        c.name.clone(),
        c.evaluations.to_string(),
        c.violations.to_string(),
        float(c.worst_slack),
        opt_float(c.observed),
        opt_float(c.expected),
        opt_float(c.std_error),
        c.passed().to_string(),
        trials.to_string(),
    ]
}

pub fn run(args: &RunArgs) -> Result<u8, CliError> {
    let suite = args.suite.as_deref().unwrap_or("all");
    if !SUITE_NAMES.contains(&suite) {
        return Err(CliError::usage(format!(
            "unknown suite {suite:?}; expected one of {}",
            SUITE_NAMES.join(", ")
        )));
    }
    let suites: Vec<&str> = match suite {
        "all" => SUITE_NAMES.iter().copied().filter(|s| *s != "all").collect(),
        s => vec![s],
    };
    let seed = args.seed();
    let mut prov = Provenance::new("verify");
    prov.param("suite", suite).param("seed", seed);
    if let Some(t) = args.trials {
        prov.param("trials", t);
    }
    let mut out = Report::new(args.format(), &prov, &COLUMNS)?;
    let mut total = 0;
    for s in suites {
        let trials = args.trials.unwrap_or_else(|| default_trials(s));
        let report = verify_inequality_suite(s, trials, seed)?;
        for c in &report.checks {
            let row = Row {
                suite: s,
                trials,
                check: c,
                passed: c.passed(),
            };
            out.row(&fields(s, trials, c), &row)?;
        }
        let worst = report
            .checks
            .iter()
            .map(|c| c.worst_slack)
            .fold(f64::INFINITY, f64::min);
        eprintln!(
            "{s}: {} checks, {} violations, worst slack {}",
            report.checks.len(),
            report.violations(),
            float(worst)
        );
        for c in report.checks.iter().filter(|c| !c.passed()) {
            eprintln!("  FAILED {} ({} of {})", c.name, c.violations, c.evaluations);
        }
        total += report.violations();
    }
    out.finish(args.output.as_deref())?;
    Ok(if total == 0 { 0 } else { 1 })
}
