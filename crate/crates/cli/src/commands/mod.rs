mod compliance;
mod evaluate;
mod roc;
mod scatter;
mod simulate;

use std::path::{Path, PathBuf};

use serde::Serialize;
use utility_eval::metrics::{metric_by_name, registry, MetricDescriptor};
use utility_eval::{ConfusionMatrix, UtilityMatrix};

use crate::config::UtilityConfig;
use crate::error::{CliError, CliResult};
use crate::{Cli, Command};

pub const DEFAULT_SEED: u64 = 0;

pub fn run(cli: &Cli) -> CliResult<String> {
    let common = &cli.common;
    match &cli.command {
        Command::Evaluate {
            predictions,
            utilities,
        } => evaluate::evaluate(common, predictions, utilities),
        Command::Rank {
            predictions,
            utilities,
        } => evaluate::rank(common, predictions, utilities),
        Command::Simulate {
            utilities,
            pairs,
            sigma,
            prior,
            prior_sigma,
            chunk_size,
            workers,
            metrics,
        } => simulate::simulate(
            common,
            &simulate::SimulateArgs {
                utilities: utilities.as_deref(),
                pairs: *pairs,
                sigma: sigma.as_deref(),
                prior: *prior,
                prior_sigma: *prior_sigma,
                chunk_size: *chunk_size,
                workers: *workers,
                metrics: metrics.as_deref(),
            },
        ),
        Command::Compliance {
            metrics,
            samples,
            grid,
            witness,
        } => compliance::compliance(common, metrics, *samples, grid.as_deref(), *witness),
        Command::Roc {
            inputs,
            utilities,
            balance,
        } => roc::roc(common, inputs, utilities, *balance),
        Command::Scatter {
            utilities,
            metric,
            balance,
            points,
            witnesses,
            svg,
        } => scatter::scatter(
            common,
            utilities,
            metric,
            *balance,
            *points,
            *witnesses,
            svg.as_deref(),
        ),
    }
}

/// `--seed`, else the config file's seed, else [`DEFAULT_SEED`].
fn resolve_seed(flag: Option<u64>, cfg: Option<&UtilityConfig>) -> u64 {
    flag.or(cfg.and_then(|c| c.seed)).unwrap_or(DEFAULT_SEED)
}

fn out_dir(flag: Option<&Path>) -> PathBuf {
    flag.map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

/// Registry metrics by name; empty selects the whole registry.
fn select_metrics(names: &[String]) -> CliResult<Vec<MetricDescriptor>> {
    if names.is_empty() {
        return Ok(registry());
    }
    names
        .iter()
        .map(|n| metric_by_name(n).map_err(CliError::input))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct MetricValue {
    name: String,
    /// `None` when the metric is undefined on this matrix.
    value: Option<f64>,
    declared_compliant: bool,
}

fn metric_values(c: &ConfusionMatrix) -> Vec<MetricValue> {
    registry()
        .into_iter()
        .map(|m| MetricValue {
            value: m.score(c).ok(),
            declared_compliant: m.declared_compliant(),
            name: m.name,
        })
        .collect()
}

fn load_utility(path: &Path) -> CliResult<(UtilityConfig, UtilityMatrix)> {
    let cfg = UtilityConfig::load(path)?;
    let u = cfg.effective_utility()?;
    Ok((cfg, u))
}
