use log::warn;
use serde::Serialize;
use utility_eval::compliance::{
    compliance_verdict, ComplianceReport, Verdict, DEFAULT_FREQUENCY_GRID,
};

use super::{out_dir, resolve_seed, select_metrics};
use crate::error::{CliError, CliResult};
use crate::report::{csv_text, table, to_json, write_file, Format};
use crate::Common;

#[derive(Serialize)]
struct ComplianceOutput<'a> {
    seed: u64,
    frequency_grid: &'a [f64],
    reports: &'a [ComplianceReport],
    witness_file: Option<String>,
}

fn witness_rows(reports: &[ComplianceReport]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for r in reports {
        for (k, w) in r.witnesses.iter().enumerate() {
            let u = w.utility.entries();
            for (member, c) in [("first", &w.first), ("second", &w.second)] {
                let e = c.entries();
                let score = utility_eval::metrics::metric_by_name(&r.metric)
                    .ok()
                    .and_then(|m| m.score(c).ok());
                rows.push(vec![
                    r.metric.clone(),
                    k.to_string(),
                    member.to_string(),
                    format!("{};{};{};{}", u[0][0], u[0][1], u[1][0], u[1][1]),
                    w.f0.to_string(),
                    e[0][0].to_string(),
                    e[0][1].to_string(),
                    e[1][0].to_string(),
                    e[1][1].to_string(),
                    w.utility.yield_unchecked(c).to_string(),
                    score.map_or_else(String::new, |s| s.to_string()),
                ]);
            }
        }
    }
    rows
}

const WITNESS_HEADER: [&str; 11] = [
    "metric", "pair", "member", "utility", "f0", "c00", "c01", "c10", "c11", "yield", "score",
];

pub fn compliance(
    common: &Common,
    names: &[String],
    samples: usize,
    grid: Option<&[f64]>,
    witness: bool,
) -> CliResult<String> {
    let metrics = select_metrics(names)?;
    let grid = grid.unwrap_or(&DEFAULT_FREQUENCY_GRID);
    let seed = resolve_seed(common.seed, None);
    let reports = metrics
        .iter()
        .map(|m| compliance_verdict(m, grid, samples, seed).map_err(CliError::config))
        .collect::<CliResult<Vec<_>>>()?;
    for r in &reports {
        if (r.verdict == Verdict::Compliant) != r.declared_compliant {
            warn!(
                "{}: sampled verdict {:?} differs from its declared status",
                r.metric, r.verdict
            );
        }
    }

    let witness_file = if witness {
        let path = out_dir(common.out.as_deref()).join("witnesses.csv");
        write_file(
            &path,
            csv_text(&WITNESS_HEADER, &witness_rows(&reports)).as_bytes(),
        )?;
        Some(path.display().to_string())
    } else {
        None
    };

    Ok(match common.format {
        Format::Json => to_json(
            "compliance",
            &ComplianceOutput {
                seed,
                frequency_grid: grid,
                reports: &reports,
                witness_file,
            },
        ),
        Format::Csv => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    let angle = r.direction.map(|[x, y]| y.atan2(x).to_degrees());
                    vec![
                        r.metric.clone(),
                        verdict_name(r.verdict).into(),
                        r.declared_compliant.to_string(),
                        angle.map_or_else(String::new, |a| a.to_string()),
                        r.witnesses.len().to_string(),
                    ]
                })
                .collect();
            csv_text(
                &[
                    "metric",
                    "verdict",
                    "declared_compliant",
                    "direction_degrees",
                    "witnesses",
                ],
                &rows,
            )
        }
        Format::Text => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    let direction = match (r.direction, r.common_directions) {
                        (Some([x, y]), Some(i)) => format!(
                            "X={x:.4} Y={y:.4} (theta in [{:.2}, {:.2}] deg)",
                            i.lo, i.hi
                        ),
                        _ => "-".into(),
                    };
                    vec![
                        r.metric.clone(),
                        verdict_name(r.verdict).into(),
                        direction,
                        r.witnesses.len().to_string(),
                    ]
                })
                .collect();
            let mut s = table(&["metric", "verdict", "direction", "witnesses"], &rows);
            if let Some(path) = witness_file {
                s.push_str(&format!("\nreversal pairs written to {path}\n"));
            }
            s
        }
    })
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Compliant => "compliant",
        Verdict::NonCompliant => "non-compliant",
    }
}
