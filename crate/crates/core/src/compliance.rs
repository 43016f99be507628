//! Empirical test of whether a metric ranks classifiers like some utility
//! yield, and search for pairs of confusion matrices that a metric ranks
//! against a given utility matrix.
//!
//! On a fixed test set (fixed `f_0`) a compliant metric orders confusion
//! matrices exactly like `X·C_00 + Y·C_11` for constants `X, Y ≥ 0`. Writing
//! `(X, Y) = (cos θ, sin θ)`, every strictly ordered pair of sampled matrices
//! confines `θ` to a half circle; the admissible directions at that frequency
//! are the intersection of those arcs with `[0°, 90°]`, which is a single
//! closed interval or empty. The metric is compliant when one direction
//! works at every frequency of the grid.

use log::debug;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confusion::ConfusionMatrix;
use crate::error::{Error, Result};
use crate::metrics::MetricDescriptor;
use crate::sampling::{sample_confusion_uniform, substream};
use crate::utility::UtilityMatrix;

/// Differences below this are ties and never count as (dis)agreement.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Both differences of a reversal witness exceed this.
pub const WITNESS_TOLERANCE: f64 = 1e-6;

pub const DEFAULT_FREQUENCY_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

pub const MIN_SAMPLES: usize = 100;

/// Closed interval of direction angles, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleInterval {
    pub lo: f64,
    pub hi: f64,
}

impl AngleInterval {
    pub fn contains(&self, degrees: f64) -> bool {
        self.lo <= degrees && degrees <= self.hi
    }

    pub fn intersect(&self, other: &AngleInterval) -> Option<AngleInterval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(AngleInterval { lo, hi })
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Directions `(cos θ, sin θ)` consistent with a metric's ordering at one
/// class frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub f0: f64,
    pub samples: usize,
    /// Pairs that were strictly ordered by the metric.
    pub ordered_pairs: usize,
    pub resampled: usize,
    pub interval: Option<AngleInterval>,
}

impl DirectionSet {
    pub fn contains(&self, degrees: f64) -> bool {
        self.interval.is_some_and(|i| i.contains(degrees))
    }
}

fn draw_scored<R: Rng + ?Sized>(
    metric: &MetricDescriptor,
    f0: f64,
    samples: usize,
    rng: &mut R,
) -> (Vec<(f64, f64, f64)>, usize) {
    let mut out = Vec::with_capacity(samples);
    let mut rejected = 0usize;
    while out.len() < samples {
        let c = sample_confusion_uniform(f0, rng);
        match metric.score(&c) {
            Ok(s) if s.is_finite() => out.push((c.c00(), c.c11(), s)),
            Ok(_) | Err(_) => {
                rejected += 1;
                debug!(
                    "{}: resampling undefined draw {:?}",
                    metric.name,
                    c.entries()
                );
            }
        }
    }
    (out, rejected)
}

/// Intersects `[lo, hi]` (radians) with the closed arc `[φ - w, φ + w]`.
fn clip_to_arc(lo: f64, hi: f64, phi: f64, half_width: f64) -> Option<(f64, f64)> {
    use std::f64::consts::TAU;
    let mut best: Option<(f64, f64)> = None;
    for k in -1..=1 {
        let a = phi - half_width + k as f64 * TAU;
        let b = phi + half_width + k as f64 * TAU;
        let (l, h) = (lo.max(a), hi.min(b));
        if l <= h {
            best = Some(match best {
                None => (l, h),
                Some((bl, bh)) => (bl.min(l), bh.max(h)),
            });
        }
    }
    best
}

/// Admissible directions for `metric` at class-0 frequency `f0`, estimated
/// from `samples` confusion matrices drawn uniformly over the test-set
/// polytope and all pairs among them.
pub fn admissible_directions(
    metric: &MetricDescriptor,
    f0: f64,
    samples: usize,
    rng_seed: u64,
) -> Result<DirectionSet> {
    let mut rng = substream(rng_seed, 0);
    directions_with_rng(metric, f0, samples, &mut rng)
}

fn directions_with_rng<R: Rng + ?Sized>(
    metric: &MetricDescriptor,
    f0: f64,
    samples: usize,
    rng: &mut R,
) -> Result<DirectionSet> {
    if !(f0 > 0.0 && f0 < 1.0) {
        return Err(Error::InvalidFrequency(f0));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidConfig(format!(
            "at least {MIN_SAMPLES} samples are needed, got {samples}"
        )));
    }
    let (points, resampled) = draw_scored(metric, f0, samples, rng);
    let (mut lo, mut hi) = (0.0, std::f64::consts::FRAC_PI_2);
    let mut ordered_pairs = 0usize;
    let mut empty = false;
    'outer: for (i, &(a00, a11, sa)) in points.iter().enumerate() {
        for &(b00, b11, sb) in &points[i + 1..] {
            let dm = sb - sa;
            if dm.abs() < TIE_TOLERANCE {
                continue;
            }
            ordered_pairs += 1;
            let sign = dm.signum();
            let (dx, dy) = (sign * (b00 - a00), sign * (b11 - a11));
            let norm = dx.hypot(dy);
            if norm < TIE_TOLERANCE {
                // The functional cannot order this pair in any direction.
                empty = true;
                break 'outer;
            }
            // Functional differences within the tie tolerance are allowed.
            let slack = (TIE_TOLERANCE / norm).min(1.0).asin();
            match clip_to_arc(lo, hi, dy.atan2(dx), std::f64::consts::FRAC_PI_2 + slack) {
                Some((l, h)) => {
                    lo = l;
                    hi = h;
                }
                None => {
                    empty = true;
                    break 'outer;
                }
            }
        }
    }
    Ok(DirectionSet {
        f0,
        samples,
        ordered_pairs,
        resampled,
        interval: (!empty).then(|| AngleInterval {
            lo: lo.to_degrees(),
            hi: hi.to_degrees(),
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Compliant,
    NonCompliant,
}

/// Two confusion matrices on the same test set ranked oppositely by a metric
/// and by a utility matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReversalWitness {
    pub utility: UtilityMatrix,
    pub f0: f64,
    pub first: ConfusionMatrix,
    pub second: ConfusionMatrix,
    /// `yield(second) - yield(first)`.
    pub yield_difference: f64,
    /// `metric(second) - metric(first)`.
    pub score_difference: f64,
    pub draws: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub metric: String,
    pub verdict: Verdict,
    /// Status carried by the metric descriptor, independent of the test.
    pub declared_compliant: bool,
    pub samples_per_frequency: usize,
    pub per_frequency: Vec<DirectionSet>,
    /// Directions admissible at every frequency.
    pub common_directions: Option<AngleInterval>,
    /// Unit `(X, Y)` of a common direction, when compliant: the declared form
    /// if the samples admit it, otherwise the interval midpoint.
    pub direction: Option<[f64; 2]>,
    pub witnesses: Vec<ReversalWitness>,
}

/// Reference problems used to exhibit witnesses for a non-compliant metric.
fn reference_utilities() -> [UtilityMatrix; 3] {
    [
        UtilityMatrix::identity(),
        UtilityMatrix::new([[1.0, 0.0], [0.0, 0.0]]).expect("valid"),
        UtilityMatrix::new([[0.0, 0.0], [0.0, 1.0]]).expect("valid"),
    ]
}

/// Decides compliance over a grid of class frequencies. Deterministic given
/// the seed and grid.
pub fn compliance_verdict(
    metric: &MetricDescriptor,
    frequency_grid: &[f64],
    samples: usize,
    rng_seed: u64,
) -> Result<ComplianceReport> {
    let mut distinct = frequency_grid.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InvalidConfig(
            "compliance needs at least 3 distinct class frequencies".into(),
        ));
    }
    let per_frequency = frequency_grid
        .par_iter()
        .enumerate()
        .map(|(k, &f0)| {
            let mut rng = substream(rng_seed, k as u64);
            directions_with_rng(metric, f0, samples, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    let common_directions = per_frequency
        .iter()
        .try_fold(AngleInterval { lo: 0.0, hi: 90.0 }, |acc, d| {
            d.interval.and_then(|i| acc.intersect(&i))
        });
    let verdict = if common_directions.is_some() {
        Verdict::Compliant
    } else {
        Verdict::NonCompliant
    };
    // The declared form is exact when the samples admit it; the midpoint of a
    // sampled interval is only accurate to the sampling resolution.
    let direction = common_directions.map(|i| match metric.admissible_form {
        Some(form) if i.contains(form.direction_degrees()) => {
            let norm = form.x.hypot(form.y);
            [form.x / norm, form.y / norm]
        }
        _ => {
            let t = i.midpoint().to_radians();
            [t.cos(), t.sin()]
        }
    });

    let mut witnesses = Vec::new();
    if verdict == Verdict::NonCompliant {
        for (r, u) in reference_utilities().iter().enumerate() {
            let seed = rng_seed ^ (0x5157_0000 + r as u64);
            if let Some(w) =
                find_reversal_witness_any(metric, u, frequency_grid, DEFAULT_MAX_DRAWS, seed)?
            {
                witnesses.push(w);
            }
        }
    }

    Ok(ComplianceReport {
        metric: metric.name.clone(),
        verdict,
        declared_compliant: metric.declared_compliant(),
        samples_per_frequency: samples,
        per_frequency,
        common_directions,
        direction,
        witnesses,
    })
}

pub const DEFAULT_MAX_DRAWS: u64 = 200_000;

/// Searches pairs of confusion matrices at class-0 frequency `f0` until the
/// metric and the utility yield rank one oppositely, both differences
/// exceeding [`WITNESS_TOLERANCE`]. `Ok(None)` after `max_draws` pairs.
pub fn find_reversal_witness(
    metric: &MetricDescriptor,
    utility: &UtilityMatrix,
    f0: f64,
    max_draws: u64,
    rng_seed: u64,
) -> Result<Option<ReversalWitness>> {
    let mut rng = substream(rng_seed, 0);
    witness_with_rng(metric, utility, f0, max_draws, &mut rng)
}

pub(crate) fn witness_with_rng<R: Rng + ?Sized>(
    metric: &MetricDescriptor,
    utility: &UtilityMatrix,
    f0: f64,
    max_draws: u64,
    rng: &mut R,
) -> Result<Option<ReversalWitness>> {
    if !(f0 > 0.0 && f0 < 1.0) {
        return Err(Error::InvalidFrequency(f0));
    }
    for draw in 1..=max_draws {
        let first = sample_confusion_uniform(f0, rng);
        let second = sample_confusion_uniform(f0, rng);
        let (Ok(s1), Ok(s2)) = (metric.score(&first), metric.score(&second)) else {
            continue;
        };
        let dy = utility.yield_unchecked(&second) - utility.yield_unchecked(&first);
        let ds = s2 - s1;
        if dy.abs() > WITNESS_TOLERANCE && ds.abs() > WITNESS_TOLERANCE && dy * ds < 0.0 {
            return Ok(Some(ReversalWitness {
                utility: *utility,
                f0,
                first,
                second,
                yield_difference: dy,
                score_difference: ds,
                draws: draw,
            }));
        }
    }
    Ok(None)
}

/// [`find_reversal_witness`] tried at each frequency in turn; each frequency
/// gets its own substream.
pub fn find_reversal_witness_any(
    metric: &MetricDescriptor,
    utility: &UtilityMatrix,
    frequencies: &[f64],
    max_draws: u64,
    rng_seed: u64,
) -> Result<Option<ReversalWitness>> {
    for (k, &f0) in frequencies.iter().enumerate() {
        let mut rng = substream(rng_seed, k as u64);
        if let Some(w) = witness_with_rng(metric, utility, f0, max_draws, &mut rng)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{metric_by_name, yield_as_metric};

    fn metric(name: &str) -> MetricDescriptor {
        metric_by_name(name).unwrap()
    }

    #[test]
    fn clip_to_arc_handles_wraparound() {
        let half_pi = std::f64::consts::FRAC_PI_2;
        // Arc centred just below zero still covers the low end of [0, 90°].
        let (l, h) = clip_to_arc(0.0, half_pi, -0.1, half_pi).unwrap();
        assert_eq!(l, 0.0);
        assert!((h - (half_pi - 0.1)).abs() < 1e-12);
        // Arc centred at 180° misses [0, 90°] except the 90° endpoint.
        let (l, h) = clip_to_arc(0.0, half_pi, std::f64::consts::PI, half_pi).unwrap();
        assert!((l - half_pi).abs() < 1e-12 && (h - half_pi).abs() < 1e-12);
        assert!(clip_to_arc(0.0, 0.5, 3.0, half_pi).is_none());
    }

    #[test]
    fn accuracy_directions_contain_diagonal() {
        for f0 in [0.1, 0.5, 0.8] {
            let d = admissible_directions(&metric("accuracy"), f0, 200, 11).unwrap();
            assert!(d.contains(45.0), "{d:?}");
        }
    }

    #[test]
    fn recall_directions_contain_zero() {
        for f0 in [0.2, 0.5, 0.9] {
            let d = admissible_directions(&metric("recall"), f0, 200, 12).unwrap();
            assert!(d.contains(0.0), "{d:?}");
        }
    }

    #[test]
    fn precision_has_no_direction_at_balance() {
        let d = admissible_directions(&metric("precision"), 0.5, 200, 13).unwrap();
        assert!(d.interval.is_none());
        assert!(d.ordered_pairs > 0);
    }

    #[test]
    fn precision_pencil_brute_force() {
        // Precision level sets at f0 = 0.5 are lines through (0, f1). On a
        // grid, find two pairs whose required directions are incompatible.
        let f0 = 0.5;
        let grid: Vec<ConfusionMatrix> = (0..=10)
            .flat_map(|i| {
                (0..=10)
                    .map(move |j| ConfusionMatrix::from_rates(f0, i as f64 / 10.0, j as f64 / 10.0))
            })
            .filter(|c| c.c00() > 0.0)
            .collect();
        let p = metric("precision");
        let mut any_angle_survives = false;
        for deg in 0..=180 {
            let t = (deg as f64 * 0.5).to_radians();
            let agrees = grid.iter().all(|a| {
                grid.iter().all(|b| {
                    let dm = p.score(b).unwrap() - p.score(a).unwrap();
                    let dl = t.cos() * (b.c00() - a.c00()) + t.sin() * (b.c11() - a.c11());
                    dm.abs() < TIE_TOLERANCE || dl.abs() < TIE_TOLERANCE || dm * dl > 0.0
                })
            });
            any_angle_survives |= agrees;
        }
        assert!(!any_angle_survives);
    }

    #[test]
    fn balanced_accuracy_rotates_with_frequency() {
        let m = metric("balanced_accuracy");
        for f0 in [0.1, 0.5, 0.9] {
            let d = admissible_directions(&m, f0, 200, 14).unwrap();
            let expected = f0.atan2(1.0 - f0).to_degrees();
            let i = d.interval.expect("linear at fixed frequency");
            assert!(
                i.contains(expected) || (i.midpoint() - expected).abs() < 1e-6,
                "{i:?} vs {expected}"
            );
        }
        let report = compliance_verdict(&m, &DEFAULT_FREQUENCY_GRID, 200, 15).unwrap();
        assert_eq!(report.verdict, Verdict::NonCompliant);
        assert!(report.per_frequency.iter().all(|d| d.interval.is_some()));
        assert!(!report.witnesses.is_empty());
    }

    #[test]
    fn verdicts_for_registry() {
        for (name, expected) in [
            ("accuracy", Verdict::Compliant),
            ("recall", Verdict::Compliant),
            ("specificity", Verdict::Compliant),
            ("precision", Verdict::NonCompliant),
            ("f1", Verdict::NonCompliant),
            ("mcc", Verdict::NonCompliant),
            ("fowlkes_mallows", Verdict::NonCompliant),
        ] {
            let r = compliance_verdict(&metric(name), &DEFAULT_FREQUENCY_GRID, 150, 21).unwrap();
            assert_eq!(r.verdict, expected, "{name}");
            assert_eq!(
                r.declared_compliant,
                expected == Verdict::Compliant,
                "{name}"
            );
        }
    }

    #[test]
    fn verdict_is_deterministic_and_needs_three_frequencies() {
        let m = metric("mcc");
        let a = compliance_verdict(&m, &DEFAULT_FREQUENCY_GRID, 120, 5).unwrap();
        let b = compliance_verdict(&m, &DEFAULT_FREQUENCY_GRID, 120, 5).unwrap();
        assert_eq!(a, b);
        assert!(compliance_verdict(&m, &[0.2, 0.2, 0.4], 120, 5).is_err());
        assert!(admissible_directions(&m, 0.5, 50, 5).is_err());
    }

    #[test]
    fn witness_examples() {
        let id = UtilityMatrix::identity();
        let w = find_reversal_witness(&metric("f1"), &id, 0.5, 100_000, 1)
            .unwrap()
            .expect("F1 misranks under the identity");
        assert!(w.yield_difference * w.score_difference < 0.0);
        assert_eq!(w.first.f0(), w.second.f0());

        for f0 in [0.1, 0.5, 0.9] {
            assert!(
                find_reversal_witness(&metric("accuracy"), &id, f0, 20_000, 2)
                    .unwrap()
                    .is_none()
            );
        }
        let tp = UtilityMatrix::new([[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!(
            find_reversal_witness(&metric("recall"), &tp, 0.3, 20_000, 3)
                .unwrap()
                .is_none()
        );
        // The yield of a matrix never misranks against itself.
        let factory = UtilityMatrix::new([[15.0, -335.0], [-35.0, 165.0]]).unwrap();
        assert!(
            find_reversal_witness(&yield_as_metric(factory), &factory, 0.4, 20_000, 4)
                .unwrap()
                .is_none()
        );
    }
}
