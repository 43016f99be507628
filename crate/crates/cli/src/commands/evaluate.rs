use std::path::{Path, PathBuf};

use log::warn;
use serde::Serialize;
use utility_eval::{ConfusionMatrix, UtilityMatrix};

use super::{load_utility, metric_values, MetricValue};
use crate::error::{CliError, CliResult};
use crate::input::read_confusion;
use crate::report::{csv_text, matrix_text, optional, rounded_matrix, table, to_json, Format};
use crate::Common;

/// Class frequencies closer than this count as the same test set.
const FREQUENCY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Serialize)]
struct Evaluation {
    input: String,
    items: Option<u64>,
    /// Item counts, rows predicted class, columns true class.
    counts: Option<[[u64; 2]; 2]>,
    confusion: [[f64; 2]; 2],
    f0: f64,
    utility_yield: f64,
    metrics: Vec<MetricValue>,
}

fn evaluation(path: &Path, u: &UtilityMatrix) -> CliResult<Evaluation> {
    let c = read_confusion(path)?;
    let counts = c.total().map(|n| {
        c.entries()
            .map(|row| row.map(|v| (v * n as f64).round() as u64))
    });
    Ok(Evaluation {
        input: path.display().to_string(),
        items: c.total(),
        counts,
        confusion: c.entries(),
        f0: c.f0(),
        utility_yield: u.utility_yield(&c).map_err(CliError::input)?,
        metrics: metric_values(&c),
    })
}

#[derive(Serialize)]
struct EvaluateReport<'a> {
    utility: UtilityMatrix,
    #[serde(flatten)]
    evaluation: &'a Evaluation,
}

pub fn evaluate(common: &Common, predictions: &Path, utilities: &Path) -> CliResult<String> {
    let (_, u) = load_utility(utilities)?;
    let e = evaluation(predictions, &u)?;
    let c = ConfusionMatrix::new(e.confusion).map_err(CliError::input)?;
    Ok(match common.format {
        Format::Json => to_json(
            "evaluate",
            &EvaluateReport {
                utility: u,
                evaluation: &e,
            },
        ),
        Format::Csv => {
            let mut rows = vec![vec![
                "utility_yield".to_string(),
                e.utility_yield.to_string(),
            ]];
            for m in &e.metrics {
                rows.push(vec![
                    m.name.clone(),
                    m.value.map_or_else(String::new, |v| v.to_string()),
                ]);
            }
            csv_text(&["quantity", "value"], &rows)
        }
        Format::Text => {
            let mut s = format!(
                "{} ({} items)\n\nconfusion matrix (relative frequencies)\n{}\n",
                e.input,
                e.items.unwrap_or(0),
                matrix_text(&c)
            );
            s.push_str(&format!("class-0 frequency  {:.6}\n", e.f0));
            s.push_str(&format!("utility yield      {}\n\n", e.utility_yield));
            let rows: Vec<Vec<String>> = e
                .metrics
                .iter()
                .map(|m| {
                    vec![
                        m.name.clone(),
                        optional(m.value, 4),
                        if m.declared_compliant { "yes" } else { "no" }.into(),
                    ]
                })
                .collect();
            s.push_str(&table(&["metric", "value", "compliant"], &rows));
            s
        }
    })
}

#[derive(Debug, Serialize)]
struct RankReport {
    utility: UtilityMatrix,
    /// Descending utility yield.
    ranking: Vec<Evaluation>,
    /// Metrics that order some pair of inputs against the yield.
    disagreeing_metrics: Vec<String>,
    warnings: Vec<String>,
}

/// True when the metric strictly reverses some pair strictly ordered by yield.
fn disagrees(ranked: &[Evaluation], metric: usize) -> bool {
    const TOL: f64 = 1e-9;
    ranked.iter().enumerate().any(|(i, a)| {
        ranked[i + 1..].iter().any(
            |b| match (a.metrics[metric].value, b.metrics[metric].value) {
                (Some(sa), Some(sb)) => a.utility_yield > b.utility_yield + TOL && sa < sb - TOL,
                _ => false,
            },
        )
    })
}

pub fn rank(common: &Common, predictions: &[PathBuf], utilities: &Path) -> CliResult<String> {
    let (_, u) = load_utility(utilities)?;
    let mut ranking = predictions
        .iter()
        .map(|p| evaluation(p, &u))
        .collect::<CliResult<Vec<_>>>()?;
    let mut warnings = Vec::new();
    if ranking
        .iter()
        .any(|e| (e.f0 - ranking[0].f0).abs() > FREQUENCY_TOLERANCE)
    {
        let msg = "class frequencies differ between inputs; yields are only comparable \
                   on the same test set"
            .to_string();
        warn!("{msg}");
        warnings.push(msg);
    }
    // Stable, so equal yields keep their input order.
    ranking.sort_by(|a, b| b.utility_yield.total_cmp(&a.utility_yield));
    let disagreeing_metrics: Vec<String> = (0..ranking[0].metrics.len())
        .filter(|&k| disagrees(&ranking, k))
        .map(|k| ranking[0].metrics[k].name.clone())
        .collect();
    let report = RankReport {
        utility: u,
        ranking,
        disagreeing_metrics,
        warnings,
    };

    Ok(match common.format {
        Format::Json => to_json("rank", &report),
        Format::Csv => {
            let mut header = vec!["rank", "input", "utility_yield"];
            let names: Vec<String> = report.ranking[0]
                .metrics
                .iter()
                .map(|m| m.name.clone())
                .collect();
            header.extend(names.iter().map(String::as_str));
            let rows: Vec<Vec<String>> = report
                .ranking
                .iter()
                .enumerate()
                .map(|(k, e)| {
                    let mut r = vec![
                        (k + 1).to_string(),
                        e.input.clone(),
                        e.utility_yield.to_string(),
                    ];
                    r.extend(
                        e.metrics
                            .iter()
                            .map(|m| m.value.map_or_else(String::new, |v| v.to_string())),
                    );
                    r
                })
                .collect();
            csv_text(&header, &rows)
        }
        Format::Text => {
            let rows: Vec<Vec<String>> = report
                .ranking
                .iter()
                .enumerate()
                .map(|(k, e)| {
                    let c = ConfusionMatrix::new(e.confusion).expect("validated on read");
                    let m = rounded_matrix(&c);
                    vec![
                        (k + 1).to_string(),
                        e.input.clone(),
                        e.utility_yield.to_string(),
                        format!("[[{}, {}], [{}, {}]]", m[0][0], m[0][1], m[1][0], m[1][1]),
                    ]
                })
                .collect();
            let mut s = table(&["rank", "input", "yield", "confusion"], &rows);
            if report.disagreeing_metrics.is_empty() {
                s.push_str("\nevery registry metric agrees with the yield order\n");
            } else {
                s.push_str(&format!(
                    "\nmetrics disagreeing with the yield order: {}\n",
                    report.disagreeing_metrics.join(", ")
                ));
            }
            s
        }
    })
}
