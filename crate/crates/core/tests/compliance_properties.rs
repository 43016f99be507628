use utility_eval::compliance::{
    compliance_verdict, find_reversal_witness, Verdict, DEFAULT_FREQUENCY_GRID, TIE_TOLERANCE,
};
use utility_eval::metrics::{metric_by_name, registry};
use utility_eval::montecarlo::{run_pairwise_experiment, ExperimentConfig};
use utility_eval::sampling::{sample_confusion_uniform, substream};
use utility_eval::UtilityMatrix;

#[test]
fn compliant_directions_reproduce_the_metric_ordering() {
    for name in ["accuracy", "recall", "specificity"] {
        let m = metric_by_name(name).unwrap();
        let report = compliance_verdict(&m, &DEFAULT_FREQUENCY_GRID, 200, 21).unwrap();
        assert_eq!(report.verdict, Verdict::Compliant, "{name}");
        let [x, y] = report.direction.unwrap();
        for (k, &f0) in DEFAULT_FREQUENCY_GRID.iter().enumerate() {
            let mut rng = substream(99, k as u64);
            let mut disagreements = 0;
            for _ in 0..10_000 {
                let a = sample_confusion_uniform(f0, &mut rng);
                let b = sample_confusion_uniform(f0, &mut rng);
                let dm = m.score(&b).unwrap() - m.score(&a).unwrap();
                let dl = x * (b.c00() - a.c00()) + y * (b.c11() - a.c11());
                if dm.abs() < TIE_TOLERANCE || dl.abs() < TIE_TOLERANCE {
                    continue;
                }
                if dm.signum() != dl.signum() {
                    disagreements += 1;
                }
            }
            assert_eq!(disagreements, 0, "{name} at f0 = {f0}");
        }
    }
}

#[test]
fn verdicts_are_reproducible() {
    for m in registry() {
        let a = compliance_verdict(&m, &DEFAULT_FREQUENCY_GRID, 120, 5).unwrap();
        let b = compliance_verdict(&m, &DEFAULT_FREQUENCY_GRID, 120, 5).unwrap();
        assert_eq!(a, b, "{}", m.name);
    }
}

#[test]
fn tpr_agrees_with_its_utility_matrix() {
    let m = metric_by_name("recall").unwrap();
    let u = UtilityMatrix::new([[1.0, 0.0], [0.0, 0.0]]).unwrap();
    for f0 in DEFAULT_FREQUENCY_GRID {
        assert!(find_reversal_witness(&m, &u, f0, 20_000, 3)
            .unwrap()
            .is_none());
    }
}

#[test]
fn monte_carlo_reports_are_consistent() {
    let cfg = ExperimentConfig {
        pairs: 20_000,
        chunk_size: 2_500,
        seed: 17,
        ..Default::default()
    };
    let one = run_pairwise_experiment(&ExperimentConfig {
        workers: Some(1),
        ..cfg.clone()
    })
    .unwrap();
    let many = run_pairwise_experiment(&ExperimentConfig {
        workers: Some(4),
        ..cfg
    })
    .unwrap();
    assert_eq!(one, many);
    for r in one.metrics.iter().chain(&one.noisy_utility) {
        assert!((0.0..=1.0).contains(&r.fraction));
        assert_eq!(r.fraction, r.misranked as f64 / r.pairs as f64);
        let se = (r.fraction * (1.0 - r.fraction) / r.pairs as f64).sqrt();
        assert!((r.std_error - se).abs() <= 1e-15);
    }
    assert_eq!(one.noisy(0.0).unwrap().misranked, 0);
}

#[test]
fn independent_seeds_agree_statistically() {
    let run = |seed| {
        run_pairwise_experiment(&ExperimentConfig {
            pairs: 40_000,
            seed,
            sigmas: vec![0.1],
            ..Default::default()
        })
        .unwrap()
    };
    let (a, b) = (run(1), run(2));
    for (x, y) in a
        .metrics
        .iter()
        .zip(&b.metrics)
        .chain(a.noisy_utility.iter().zip(&b.noisy_utility))
    {
        let se = x.std_error.hypot(y.std_error);
        assert!(
            (x.fraction - y.fraction).abs() <= 3.0 * se.max(1e-12) + 1e-12,
            "{}: {} vs {}",
            x.evaluator,
            x.fraction,
            y.fraction
        );
    }
}
