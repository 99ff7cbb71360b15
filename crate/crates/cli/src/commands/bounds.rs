use std::collections::BTreeMap;

use serde::Serialize;
use wishart_rd::bounds::{all_reports, tightest, BoundConstants, BoundReport, Term};

use crate::config::{grid_value, read_grid, RunArgs};
use crate::error::CliError;
use crate::output::{float, Provenance, Report};

const REPORT_COLUMNS: [&str; 12] = [
    "n",
    "d",
    "D",
    "p",
    "bound",
    "regime",
    "value_nats",
    "usable_value",
    "valid",
    "terms",
    "auxiliary",
    "failed_checks",
];

/// Bound columns of the wide grid layout, in output order.
const GRID_BOUNDS: [&str; 7] = [
    "theorem2_smalld_bound",
    "theorem2_middled_bound",
    "theorem2_larged_bound",
    "shannon_lower_bound_gram",
    "spherical_bound",
    "entropy_count_graph",
    "entropy_count_completion",
];

fn join_terms(terms: &[Term]) -> String {
    terms
        .iter()
        .map(|t| format!("{}={}", t.label, float(t.value_nats)))
        .collect::<Vec<_>>()
        .join(";")
}

fn report_fields(n: usize, d: usize, distortion: f64, p: Option<f64>, r: &BoundReport) -> Vec<String> {
    let failed: Vec<&str> = r.validity.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    vec![
        n.to_string(),
        d.to_string(),
        float(distortion),
        p.map(float).unwrap_or_default(),
        r.bound_name.clone(),
        format!("{:?}", r.regime),
        float(r.value_nats),
        r.usable_value.map(float).unwrap_or_default(),
        r.is_valid().to_string(),
        join_terms(&r.terms),
        join_terms(&r.auxiliary),
        failed.join(";"),
    ]
}

fn add_constants(prov: &mut Provenance, k: &BoundConstants) {
    prov.param("c", k.c)
        .param("c-star", k.c_star)
        .param("C0", k.c0)
        .param("c1", k.c1)
        .param("k-slack", k.k_slack);
}

#[derive(Serialize)]
struct GridRecord<'a> {
    n: usize,
    d: usize,
    #[serde(rename = "D")]
    distortion: f64,
    p: Option<f64>,
    tightest_bound: Option<&'a str>,
    tightest_value_nats: Option<f64>,
    reports: &'a [BoundReport],
}

pub fn run(args: &RunArgs) -> Result<u8, CliError> {
    let k = args.constants()?;
    let mut prov = Provenance::new("bounds");
    add_constants(&mut prov, &k);
    if let Some(grid) = &args.grid {
        return run_grid(args, &k, grid, prov);
    }
    let n = RunArgs::required(&args.n, "n")?;
    let d = RunArgs::required(&args.d, "d")?;
    let distortion = crate::config::require(args.distortion, "D")?;
    let p = RunArgs::single(&args.p, "p")?;
    prov.param("n", n).param("d", d).param("D", distortion);
    if let Some(p) = p {
        prov.param("p", p);
    }
    let reports = all_reports(n, d, distortion, p, &k)?;
    let mut out = Report::new(args.format(), &prov, &REPORT_COLUMNS)?;
    for r in &reports {
        out.row(&report_fields(n, d, distortion, p, r), r)?;
    }
    out.finish(args.output.as_deref())?;
    match tightest(&reports) {
        Some(t) => eprintln!(
            "tightest lower bound: {} = {} nats ({:?})",
            t.bound_name,
            float(t.value_nats),
            t.regime
        ),
        None => eprintln!("no valid lower bound at n={n}, d={d}, D={distortion}"),
    }
    Ok(0)
}

fn run_grid(args: &RunArgs, k: &BoundConstants, grid: &std::path::Path, mut prov: Provenance) -> Result<u8, CliError> {
    let rows = read_grid(grid)?;
    prov.param("grid_rows", rows.len());
    let mut columns = vec!["n", "d", "D", "p", "tightest_bound", "tightest_value_nats"];
    columns.extend(GRID_BOUNDS);
    let mut out = Report::new(args.format(), &prov, &columns)?;
    for (i, row) in rows.iter().enumerate() {
        let missing = |key: &str| CliError::usage(format!("grid row {}: missing {key}", i + 1));
        let n: usize = grid_value(row, "n")?.ok_or_else(|| missing("n"))?;
        let d: usize = grid_value(row, "d")?.ok_or_else(|| missing("d"))?;
        let distortion: f64 = grid_value(row, "D")?.ok_or_else(|| missing("D"))?;
        let p: Option<f64> = grid_value(row, "p")?;
        let reports = all_reports(n, d, distortion, p, k)?;
        let best = tightest(&reports);
        let mut fields = vec![
            n.to_string(),
            d.to_string(),
            float(distortion),
            p.map(float).unwrap_or_default(),
            best.map(|b| b.bound_name.clone()).unwrap_or_default(),
            best.map(|b| float(b.value_nats)).unwrap_or_default(),
        ];
        let by_name: BTreeMap<&str, f64> = reports.iter().map(|r| (r.bound_name.as_str(), r.value_nats)).collect();
        fields.extend(GRID_BOUNDS.iter().map(|b| by_name.get(b).copied().map(float).unwrap_or_default()));
        let record = GridRecord {
            n,
            d,
            distortion,
            p,
            tightest_bound: best.map(|b| b.bound_name.as_str()),
            tightest_value_nats: best.map(|b| b.value_nats),
            reports: &reports,
        };
        out.row(&fields, &record)?;
    }
    out.finish(args.output.as_deref())?;
    eprintln!("evaluated {} grid rows", rows.len());
    Ok(0)
}
