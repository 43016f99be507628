use std::path::{Path, PathBuf};

use log::warn;
use serde::Serialize;
use utility_eval::roc::{
    auc_disagrees, compare_by_tangent, optimal_operating_point, OperatingContext, OperatingPoint,
    TangentRank,
};
use utility_eval::UtilityMatrix;

use super::load_utility;
use crate::error::{CliError, CliResult};
use crate::input::read_curve;
use crate::report::{csv_text, optional, table, to_json, Format};
use crate::Common;

#[derive(Serialize)]
struct CurveSummary {
    input: String,
    auc: f64,
    optimum: OperatingPoint,
}

#[derive(Serialize)]
struct RocOutput {
    utility: UtilityMatrix,
    balance: f64,
    /// Slope of the iso-yield lines; `null` when infinite.
    slope: Option<f64>,
    curves: Vec<CurveSummary>,
    ranking: Vec<TangentRank>,
    warnings: Vec<String>,
}

pub fn roc(
    common: &Common,
    inputs: &[PathBuf],
    utilities: &Path,
    balance: Option<f64>,
) -> CliResult<String> {
    let (cfg, u) = load_utility(utilities)?;
    let mut curves = Vec::with_capacity(inputs.len());
    let mut observed = None;
    for p in inputs {
        let (curve, b) = read_curve(p)?;
        observed = observed.or(b);
        curves.push(curve);
    }
    let b = balance.or(cfg.balance).or(observed).ok_or_else(|| {
        CliError::Config(
            "class balance unknown: pass --balance or set `balance` in the utilities file".into(),
        )
    })?;
    let ctx = OperatingContext::new(u, b).map_err(CliError::config)?;

    let summaries: Vec<CurveSummary> = inputs
        .iter()
        .zip(&curves)
        .map(|(p, c)| CurveSummary {
            input: p.display().to_string(),
            auc: c.auc(),
            optimum: optimal_operating_point(c, &ctx),
        })
        .collect();
    let ranking = if curves.len() > 1 {
        compare_by_tangent(&curves, &ctx)
    } else {
        Vec::new()
    };
    let mut warnings = Vec::new();
    if auc_disagrees(&ranking) {
        let msg = "AUC ordering disagrees with the utility ranking; \
                   rank by the tangent intercept, not by AUC"
            .to_string();
        warn!("{msg}");
        warnings.push(msg);
    }
    let slope = ctx.slope();
    let out = RocOutput {
        utility: u,
        balance: b,
        slope: slope.is_finite().then_some(slope),
        curves: summaries,
        ranking,
        warnings,
    };

    Ok(match common.format {
        Format::Json => to_json("roc", &out),
        Format::Csv => {
            let rows: Vec<Vec<String>> = out
                .curves
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let rank = out.ranking.iter().find(|r| r.curve == k);
                    vec![
                        c.input.clone(),
                        c.auc.to_string(),
                        c.optimum.fpr.to_string(),
                        c.optimum.tpr.to_string(),
                        c.optimum
                            .threshold
                            .map_or_else(String::new, |t| t.to_string()),
                        c.optimum.utility_yield.to_string(),
                        rank.map_or_else(|| "1".into(), |r| r.rank.to_string()),
                    ]
                })
                .collect();
            csv_text(
                &["input", "auc", "fpr", "tpr", "threshold", "yield", "rank"],
                &rows,
            )
        }
        Format::Text => {
            let mut s = format!(
                "class-0 proportion {b}, iso-yield slope {}\n\n",
                if slope.is_finite() {
                    format!("{slope:.6}")
                } else {
                    "infinite".into()
                }
            );
            let rows: Vec<Vec<String>> = out
                .curves
                .iter()
                .map(|c| {
                    vec![
                        c.input.clone(),
                        format!("{:.4}", c.auc),
                        format!("{:.4}", c.optimum.fpr),
                        format!("{:.4}", c.optimum.tpr),
                        optional(c.optimum.threshold, 4),
                        c.optimum.utility_yield.to_string(),
                    ]
                })
                .collect();
            s.push_str(&table(
                &["input", "auc", "f*", "t*", "threshold", "yield"],
                &rows,
            ));
            if !out.ranking.is_empty() {
                s.push_str("\nranking by tangent intercept\n");
                let rows: Vec<Vec<String>> = out
                    .ranking
                    .iter()
                    .map(|r| {
                        vec![
                            r.rank.to_string(),
                            out.curves[r.curve].input.clone(),
                            optional(r.intercept, 6),
                            format!("{:.4}", r.auc),
                        ]
                    })
                    .collect();
                s.push_str(&table(&["rank", "input", "intercept", "auc"], &rows));
            }
            for w in &out.warnings {
                s.push_str(&format!("\nwarning: {w}\n"));
            }
            s
        }
    })
}
