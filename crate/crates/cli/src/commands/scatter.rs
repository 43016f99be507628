use std::path::Path;

use serde::Serialize;
use utility_eval::metrics::metric_by_name;
use utility_eval::montecarlo::{scatter_dataset, ScatterData};

use super::{load_utility, resolve_seed};
use crate::error::{CliError, CliResult};
use crate::report::{csv_text, to_json, write_file, Format};
use crate::svg::scatter_svg;
use crate::Common;

#[derive(Serialize)]
struct ScatterOutput<'a> {
    seed: u64,
    max_linear_residual: Option<f64>,
    #[serde(flatten)]
    data: &'a ScatterData,
}

pub fn scatter(
    common: &Common,
    utilities: &Path,
    metric: &str,
    f0: f64,
    points: usize,
    witnesses: usize,
    svg: Option<&Path>,
) -> CliResult<String> {
    let (cfg, u) = load_utility(utilities)?;
    let metric = metric_by_name(metric).map_err(CliError::input)?;
    let seed = resolve_seed(common.seed, Some(&cfg));
    let data =
        scatter_dataset(&u, &metric, f0, points, seed, witnesses).map_err(CliError::config)?;
    if let Some(path) = svg {
        write_file(path, scatter_svg(&data).as_bytes())?;
    }
    let residual = data.max_linear_residual();
    Ok(match common.format {
        Format::Json => to_json(
            "scatter",
            &ScatterOutput {
                seed,
                max_linear_residual: residual,
                data: &data,
            },
        ),
        Format::Csv => {
            let rows: Vec<Vec<String>> = data
                .points
                .iter()
                .map(|p| {
                    vec![
                        p.yield_value.to_string(),
                        p.score.to_string(),
                        p.pair_id.map_or_else(String::new, |k| k.to_string()),
                        p.reversed.to_string(),
                    ]
                })
                .collect();
            csv_text(&["yield", "score", "pair", "reversed"], &rows)
        }
        Format::Text => format!(
            "{} against utility yield, f0 = {f0}: {} sampled points, {} reversal pairs, \
             largest deviation from a straight line {}\n",
            data.metric,
            data.points.len() - 2 * data.witness_pairs(),
            data.witness_pairs(),
            residual.map_or_else(|| "undefined".into(), |r| format!("{r:.3e}")),
        ),
    })
}
