use proptest::prelude::*;
use utility_eval::roc::{
    auc_disagrees, brute_force_operating_point, compare_by_tangent, confusion_at,
    curve_from_scores, dominates, optimal_operating_point, OperatingContext, RocCurve, RocPoint,
};
use utility_eval::UtilityMatrix;

/// Monotone vertex lists from nonnegative increments, with zero steps mixed in
/// so vertical and horizontal runs occur.
fn vertex_curve() -> impl Strategy<Value = RocCurve> {
    let step = prop_oneof![Just(0.0), 0.0..1.0f64];
    prop::collection::vec((step.clone(), step), 1..30).prop_filter_map("flat curve", |steps| {
        let (tf, tt): (f64, f64) = steps.iter().fold((0.0, 0.0), |a, s| (a.0 + s.0, a.1 + s.1));
        if tf == 0.0 || tt == 0.0 {
            return None;
        }
        let mut points = vec![RocPoint::new(0.0, 0.0)];
        let (mut f, mut t) = (0.0, 0.0);
        for (df, dt) in &steps {
            f += df;
            t += dt;
            points.push(RocPoint::new(f / tf, t / tt));
        }
        points.push(RocPoint::new(1.0, 1.0));
        RocCurve::new(points).ok()
    })
}

/// Empirical curves with heavily tied integer scores.
fn score_curve() -> impl Strategy<Value = RocCurve> {
    prop::collection::vec((0u8..=1, 0i32..8), 2..60).prop_filter_map("single class", |rows| {
        let labels: Vec<u8> = rows.iter().map(|r| r.0).collect();
        let scores: Vec<f64> = rows.iter().map(|r| r.1 as f64).collect();
        curve_from_scores(&labels, &scores).ok()
    })
}

fn any_curve() -> impl Strategy<Value = RocCurve> {
    prop_oneof![vertex_curve(), score_curve()]
}

fn context() -> impl Strategy<Value = OperatingContext> {
    let gain = prop_oneof![Just(0.0), 0.0..10.0f64];
    (
        gain.clone(),
        gain,
        -5.0..5.0f64,
        -5.0..5.0f64,
        0.01..0.99f64,
    )
        .prop_filter_map("degenerate utility", |(g0, g1, u10, u01, b)| {
            let u = UtilityMatrix::new([[u10 + g0, u01], [u10, u01 + g1]]).ok()?;
            OperatingContext::new(u, b).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hull_tangent_matches_brute_force(curve in any_curve(), ctx in context()) {
        let fast = optimal_operating_point(&curve, &ctx);
        let slow = brute_force_operating_point(&curve, &ctx);
        prop_assert_eq!((fast.fpr, fast.tpr), (slow.fpr, slow.tpr));
        for p in curve.points() {
            prop_assert!(fast.utility_yield >= ctx.yield_at(*p) - 1e-9);
        }
    }

    #[test]
    fn optimal_yield_matches_confusion_yield(curve in any_curve(), ctx in context()) {
        let best = optimal_operating_point(&curve, &ctx);
        let c = confusion_at(RocPoint::new(best.fpr, best.tpr), ctx.balance()).unwrap();
        let direct = ctx.utility().utility_yield(&c).unwrap();
        prop_assert!((direct - best.utility_yield).abs() <= 1e-9 * (1.0 + direct.abs()));
    }

    #[test]
    fn auc_is_a_probability(curve in any_curve()) {
        let a = curve.auc();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
    }

    #[test]
    fn confusion_at_is_normalized(f in 0.0..=1.0f64, t in 0.0..=1.0f64, b in 0.001..0.999f64) {
        let c = confusion_at(RocPoint::new(f, t), b).unwrap();
        prop_assert!(c.is_normalized());
        prop_assert!((c.f0() - b).abs() <= 1e-12);
    }

    #[test]
    fn tangent_ranking_ignores_utility_units(
        curves in prop::collection::vec(vertex_curve(), 2..5),
        ctx in context(),
        a in 0.1..10.0f64,
        shift in -10.0..10.0f64,
    ) {
        let scaled = OperatingContext::new(
            ctx.utility().affine_transform(a, shift).unwrap(),
            ctx.balance(),
        )
        .unwrap();
        let r1 = compare_by_tangent(&curves, &ctx);
        let r2 = compare_by_tangent(&curves, &scaled);
        // Near-ties may split differently after rescaling; compare the strict
        // orderings only.
        for x in &r1 {
            for y in &r1 {
                if x.optimal_yield > y.optimal_yield + 1e-6 {
                    let rx = r2.iter().find(|r| r.curve == x.curve).unwrap();
                    let ry = r2.iter().find(|r| r.curve == y.curve).unwrap();
                    prop_assert!(rx.optimal_yield > ry.optimal_yield);
                }
            }
        }
    }

    #[test]
    fn intercepts_order_like_yields(
        curves in prop::collection::vec(vertex_curve(), 2..5),
        ctx in context(),
    ) {
        let ranks = compare_by_tangent(&curves, &ctx);
        for w in ranks.windows(2) {
            prop_assert!(w[0].optimal_yield >= w[1].optimal_yield);
            if let (Some(a), Some(b)) = (w[0].intercept, w[1].intercept) {
                prop_assert!(a >= b - 1e-9);
            }
        }
    }

    #[test]
    fn dominance_implies_higher_optimal_yield(
        a in any_curve(),
        b in any_curve(),
        ctx in context(),
    ) {
        if dominates(&a, &b) {
            let (ya, yb) = (
                optimal_operating_point(&a, &ctx).utility_yield,
                optimal_operating_point(&b, &ctx).utility_yield,
            );
            prop_assert!(ya >= yb - 1e-9);
        }
    }

    #[test]
    fn curves_dominate_their_lower_envelope(curve in vertex_curve()) {
        // Capping each vertex at the diagonal lowers the curve.
        let lowered: Vec<RocPoint> = curve
            .points()
            .iter()
            .map(|p| RocPoint::new(p.fpr, p.tpr.min(p.fpr)))
            .collect();
        let lower = RocCurve::new(lowered).unwrap();
        prop_assert!(!dominates(&lower, &curve));
        prop_assert!(dominates(&curve, &lower) || lower.points() == curve.points());
    }
}

#[test]
fn dominated_curve_never_ranks_first() {
    // A curve squeezed toward the diagonal is dominated by the original.
    let a = RocCurve::from_pairs(&[(0.0, 0.0), (0.1, 0.5), (0.4, 0.85), (1.0, 1.0)]).unwrap();
    let squeezed: Vec<(f64, f64)> = a
        .points()
        .iter()
        .map(|p| (p.fpr, 0.5 * (p.tpr + p.fpr)))
        .collect();
    let b = RocCurve::from_pairs(&squeezed).unwrap();
    assert!(dominates(&a, &b));
    for k in 0..100 {
        let g0 = 0.1 + (k % 10) as f64;
        let g1 = 0.1 + (k / 10) as f64;
        let ctx = OperatingContext::new(
            UtilityMatrix::new([[g0, 0.0], [0.0, g1]]).unwrap(),
            0.05 + 0.009 * k as f64,
        )
        .unwrap();
        let ranks = compare_by_tangent(&[a.clone(), b.clone()], &ctx);
        assert!(ranks[0].curve == 0 || ranks[0].rank == ranks[1].rank);
        assert!(!auc_disagrees(&ranks));
    }
}
