use std::path::Path;

use serde::Serialize;
use utility_eval::montecarlo::{
    run_pairwise_experiment, EvaluatorResult, ExperimentConfig, ExperimentReport, SweepReport,
    DEFAULT_CHUNK_SIZE, DEFAULT_PAIRS, DEFAULT_SIGMA_GRID,
};
use utility_eval::UtilityPrior;

use super::{out_dir, resolve_seed, select_metrics};
use crate::config::UtilityConfig;
use crate::error::{CliError, CliResult};
use crate::report::{csv_text, table, to_json, write_file, Format};
use crate::{Common, PriorArg};

pub struct SimulateArgs<'a> {
    pub utilities: Option<&'a Path>,
    pub pairs: Option<u64>,
    pub sigma: Option<&'a [f64]>,
    pub prior: Option<PriorArg>,
    pub prior_sigma: Option<f64>,
    pub chunk_size: Option<u64>,
    pub workers: Option<usize>,
    pub metrics: Option<&'a [String]>,
}

fn prior(name: Option<&str>, sigma: Option<f64>) -> CliResult<UtilityPrior> {
    let p = match name.unwrap_or("uniform") {
        "uniform" => UtilityPrior::Uniform,
        "gaussian" => UtilityPrior::Gaussian {
            sigma: sigma.unwrap_or(UtilityPrior::DEFAULT_GAUSSIAN_SIGMA),
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown prior `{other}`; expected uniform or gaussian"
            )))
        }
    };
    p.validate().map_err(CliError::config)?;
    Ok(p)
}

fn build_config(common: &Common, args: &SimulateArgs) -> CliResult<ExperimentConfig> {
    let file = args.utilities.map(UtilityConfig::load).transpose()?;
    let exp = file
        .as_ref()
        .map(|f| f.experiment.clone())
        .unwrap_or_default();
    let prior_name = match args.prior {
        Some(PriorArg::Uniform) => Some("uniform".to_string()),
        Some(PriorArg::Gaussian) => Some("gaussian".to_string()),
        None => exp.prior.clone(),
    };
    let cfg = ExperimentConfig {
        prior: prior(prior_name.as_deref(), args.prior_sigma.or(exp.prior_sigma))?,
        sigmas: args
            .sigma
            .map(<[f64]>::to_vec)
            .or(exp.sigmas)
            .unwrap_or_else(|| DEFAULT_SIGMA_GRID.to_vec()),
        metrics: select_metrics(args.metrics.unwrap_or(&[]))?,
        pairs: args.pairs.or(exp.pairs).unwrap_or(DEFAULT_PAIRS),
        seed: resolve_seed(common.seed, file.as_ref()),
        chunk_size: args
            .chunk_size
            .or(exp.chunk_size)
            .unwrap_or(DEFAULT_CHUNK_SIZE),
        workers: args.workers,
    };
    cfg.validate().map_err(CliError::config)?;
    Ok(cfg)
}

#[derive(Serialize)]
struct SimulationOutput<'a> {
    config: &'a ExperimentConfig,
    report: &'a ExperimentReport,
    sweep: &'a SweepReport,
}

fn rows(report: &ExperimentReport) -> Vec<&EvaluatorResult> {
    report.metrics.iter().chain(&report.noisy_utility).collect()
}

/// Worker counts and timings are deliberately absent so reports compare
/// byte for byte.
fn csv_report(report: &ExperimentReport) -> String {
    let rows: Vec<Vec<String>> = rows(report)
        .into_iter()
        .map(|r| {
            vec![
                r.evaluator.clone(),
                r.sigma.map_or_else(String::new, |s| s.to_string()),
                r.pairs.to_string(),
                r.misranked.to_string(),
                r.ties.to_string(),
                r.undefined.to_string(),
                r.fraction.to_string(),
                r.std_error.to_string(),
            ]
        })
        .collect();
    csv_text(
        &[
            "evaluator",
            "sigma",
            "pairs",
            "misranked",
            "ties",
            "undefined",
            "fraction",
            "std_error",
        ],
        &rows,
    )
}

fn summary(cfg: &ExperimentConfig, report: &ExperimentReport, sweep: &SweepReport) -> String {
    let rows: Vec<Vec<String>> = rows(report)
        .into_iter()
        .map(|r| {
            let name = match r.sigma {
                Some(s) => format!("{} (sigma={s})", r.evaluator),
                None => r.evaluator.clone(),
            };
            vec![
                name,
                format!("{:.3}%", 100.0 * r.fraction),
                format!("{:.3}", 100.0 * r.std_error),
            ]
        })
        .collect();
    let mut s = format!(
        "{} pairs per estimate, {} prior, seed {}\n\n",
        cfg.pairs,
        cfg.prior.name(),
        cfg.seed
    );
    s.push_str(&table(&["evaluator", "misranked", "s.e. (pp)"], &rows));
    if let Some(fit) = &sweep.fit {
        s.push_str(&format!(
            "\nnoisy-utility fit: slope {:.4} per unit sigma, R^2 {:.4}\n",
            fit.slope, fit.r_squared
        ));
    }
    match sweep.accuracy_crossing {
        Some(sigma) => s.push_str(&format!(
            "noisy utilities are no better than accuracy from sigma = {sigma}\n"
        )),
        None if !sweep.curve.is_empty() && report.metric("accuracy").is_some() => {
            s.push_str("noisy utilities beat accuracy at every tested sigma\n")
        }
        None => {}
    }
    s
}

pub fn simulate(common: &Common, args: &SimulateArgs) -> CliResult<String> {
    let cfg = build_config(common, args)?;
    let report = run_pairwise_experiment(&cfg).map_err(CliError::config)?;
    let sweep = SweepReport::from_experiment(&report);
    let json = to_json(
        "simulate",
        &SimulationOutput {
            config: &cfg,
            report: &report,
            sweep: &sweep,
        },
    );
    let csv = csv_report(&report);
    let dir = out_dir(common.out.as_deref());
    write_file(&dir.join("simulation.json"), json.as_bytes())?;
    write_file(&dir.join("simulation.csv"), csv.as_bytes())?;
    Ok(match common.format {
        Format::Json => json,
        Format::Csv => csv,
        Format::Text => summary(&cfg, &report, &sweep),
    })
}
