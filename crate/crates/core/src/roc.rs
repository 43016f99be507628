//! ROC curves and utility-optimal operating points.
//!
//! A curve is a list of vertices `(f, t)` (false-positive rate, true-positive
//! rate) produced by sweeping a threshold over classifier scores. Higher
//! scores predict class 0, the positive class. For class-0 proportion `B` the
//! vertex `(f, t)` realises the confusion matrix
//! `[[B t, (1-B) f], [B (1-t), (1-B)(1-f)]]`, whose yield is
//! `(U_00-U_10) B t - (U_11-U_01)(1-B) f + U_10 B + U_11 (1-B)`.
//! The best vertex is where a line of slope
//! `s = (U_11-U_01)(1-B) / ((U_00-U_10) B)` touches the upper convex hull.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::confusion::ConfusionMatrix;
use crate::error::{Error, Result};
use crate::utility::UtilityMatrix;

/// Yields closer than this are ties, resolved toward the smaller `f`.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// False-positive rate.
    pub fpr: f64,
    /// True-positive rate.
    pub tpr: f64,
}

impl RocPoint {
    pub fn new(fpr: f64, tpr: f64) -> Self {
        Self { fpr, tpr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    points: Vec<RocPoint>,
    /// `thresholds[k]` is the score cut-off of vertex `k` (predict class 0
    /// when `score >= threshold`); vertex 0 uses `+inf`.
    thresholds: Option<Vec<f64>>,
}

impl RocCurve {
    /// Validates a vertex list: at least two points, coordinates in `[0, 1]`,
    /// both non-decreasing, from `(0, 0)` to `(1, 1)`.
    pub fn new(points: Vec<RocPoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidCurve("need at least two vertices".into()));
        }
        for p in &points {
            if !(0.0..=1.0).contains(&p.fpr) || !(0.0..=1.0).contains(&p.tpr) {
                return Err(Error::InvalidCurve(format!(
                    "vertex ({}, {}) outside the unit square",
                    p.fpr, p.tpr
                )));
            }
        }
        if points
            .windows(2)
            .any(|w| w[1].fpr < w[0].fpr || w[1].tpr < w[0].tpr)
        {
            return Err(Error::InvalidCurve("rates must be non-decreasing".into()));
        }
        let (first, last) = (points[0], points[points.len() - 1]);
        if first != RocPoint::new(0.0, 0.0) || last != RocPoint::new(1.0, 1.0) {
            return Err(Error::InvalidCurve(
                "curve must start at (0, 0) and end at (1, 1)".into(),
            ));
        }
        Ok(Self {
            points,
            thresholds: None,
        })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(f, t)| RocPoint::new(f, t)).collect())
    }

    pub fn diagonal() -> Self {
        Self::from_pairs(&[(0.0, 0.0), (1.0, 1.0)]).expect("valid")
    }

    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }

    pub fn thresholds(&self) -> Option<&[f64]> {
        self.thresholds.as_deref()
    }

    /// Trapezoidal area under the curve.
    pub fn auc(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].fpr - w[0].fpr) * 0.5 * (w[0].tpr + w[1].tpr))
            .sum()
    }

    /// Lowest and highest `t` the curve reaches at false-positive rate `f`.
    fn span_at(&self, f: f64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for w in self.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if f < a.fpr || f > b.fpr {
                continue;
            }
            let (l, h) = if a.fpr == b.fpr {
                (a.tpr, b.tpr)
            } else if f == a.fpr {
                (a.tpr, a.tpr)
            } else if f == b.fpr {
                (b.tpr, b.tpr)
            } else {
                let t = a.tpr + (b.tpr - a.tpr) * (f - a.fpr) / (b.fpr - a.fpr);
                (t, t)
            };
            lo = lo.min(l);
            hi = hi.max(h);
        }
        (lo, hi)
    }

    /// Vertices of the upper convex hull, left to right, collinear points
    /// dropped.
    pub fn upper_hull(&self) -> Vec<usize> {
        let mut hull: Vec<usize> = Vec::new();
        for (k, p) in self.points.iter().enumerate() {
            // Keep only the highest vertex at each f.
            if let Some(&last) = hull.last() {
                let q = self.points[last];
                if q.fpr == p.fpr {
                    if p.tpr > q.tpr {
                        hull.pop();
                    } else {
                        continue;
                    }
                }
            }
            while hull.len() >= 2 {
                let a = self.points[hull[hull.len() - 2]];
                let b = self.points[hull[hull.len() - 1]];
                let cross = (b.fpr - a.fpr) * (p.tpr - a.tpr) - (b.tpr - a.tpr) * (p.fpr - a.fpr);
                if cross >= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(k);
        }
        // The hull starts at (0, 0) even when a higher vertex shares f = 0.
        if self.points[hull[0]] != self.points[0] {
            hull.insert(0, 0);
        }
        hull
    }
}

/// Builds the empirical curve for `labels` (0 or 1) and real `scores`.
/// Tied scores form a single step.
pub fn curve_from_scores(labels: &[u8], scores: &[f64]) -> Result<RocCurve> {
    if labels.len() != scores.len() {
        return Err(Error::InvalidScores(format!(
            "{} labels but {} scores",
            labels.len(),
            scores.len()
        )));
    }
    if let Some(bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidScores(format!("label {bad} is not 0 or 1")));
    }
    if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::InvalidScores(format!("score {bad} is not finite")));
    }
    let positives = labels.iter().filter(|&&l| l == 0).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::InvalidScores(
            "both classes must be present to build an ROC curve".into(),
        ));
    }
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint::new(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let threshold = scores[order[k]];
        while k < order.len() && scores[order[k]] == threshold {
            if labels[order[k]] == 0 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        points.push(RocPoint::new(
            fp as f64 / negatives as f64,
            tp as f64 / positives as f64,
        ));
        thresholds.push(threshold);
    }
    let mut curve = RocCurve::new(points)?;
    curve.thresholds = Some(thresholds);
    Ok(curve)
}

/// Confusion matrix of operating point `p` on a test set with class-0
/// proportion `balance`.
pub fn confusion_at(p: RocPoint, balance: f64) -> Result<ConfusionMatrix> {
    if !(balance > 0.0 && balance < 1.0) {
        return Err(Error::InvalidFrequency(balance));
    }
    let (b, t, f) = (balance, p.tpr, p.fpr);
    ConfusionMatrix::new([
        [b * t, (1.0 - b) * f],
        [b * (1.0 - t), (1.0 - b) * (1.0 - f)],
    ])
}

/// A utility matrix and the class-0 proportion of the test set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingContext {
    utility: UtilityMatrix,
    balance: f64,
}

impl OperatingContext {
    pub fn new(utility: UtilityMatrix, balance: f64) -> Result<Self> {
        if !(balance > 0.0 && balance < 1.0) {
            return Err(Error::InvalidFrequency(balance));
        }
        if !utility.is_feasible() {
            return Err(Error::InfeasibleUtility);
        }
        if utility.gain_class0() == 0.0 && utility.gain_class1() == 0.0 {
            return Err(Error::DegenerateUtilities);
        }
        Ok(Self { utility, balance })
    }

    pub fn utility(&self) -> &UtilityMatrix {
        &self.utility
    }

    pub fn balance(&self) -> f64 {
        self.balance
    }

    /// Slope of the iso-yield lines in ROC space; infinite when correctly
    /// classifying class 0 gains nothing.
    pub fn slope(&self) -> f64 {
        let num = self.utility.gain_class1() * (1.0 - self.balance);
        let den = self.utility.gain_class0() * self.balance;
        if den == 0.0 {
            f64::INFINITY
        } else {
            num / den
        }
    }

    /// Yield of a classifier operating at `p`.
    pub fn yield_at(&self, p: RocPoint) -> f64 {
        let u = &self.utility;
        let b = self.balance;
        u.gain_class0() * b * p.tpr - u.gain_class1() * (1.0 - b) * p.fpr
            + u.get(1, 0) * b
            + u.get(1, 1) * (1.0 - b)
    }

    /// The part of [`yield_at`](Self::yield_at) that depends on the vertex.
    fn variable_yield(&self, p: RocPoint) -> f64 {
        let b = self.balance;
        self.utility.gain_class0() * b * p.tpr - self.utility.gain_class1() * (1.0 - b) * p.fpr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub index: usize,
    pub fpr: f64,
    pub tpr: f64,
    pub utility_yield: f64,
    /// Score threshold of the vertex, when the curve came from scores.
    pub threshold: Option<f64>,
}

fn operating_point(curve: &RocCurve, ctx: &OperatingContext, index: usize) -> OperatingPoint {
    let p = curve.points[index];
    OperatingPoint {
        index,
        fpr: p.fpr,
        tpr: p.tpr,
        utility_yield: ctx.yield_at(p),
        threshold: curve.thresholds.as_ref().map(|t| t[index]),
    }
}

/// Utility-maximizing vertex, located by walking the upper convex hull until
/// the edge slope drops to `s` or below. Ties go to the smaller `f`.
pub fn optimal_operating_point(curve: &RocCurve, ctx: &OperatingContext) -> OperatingPoint {
    let hull = curve.upper_hull();
    let gain0 = ctx.utility.gain_class0() * ctx.balance;
    let gain1 = ctx.utility.gain_class1() * (1.0 - ctx.balance);
    let mut best = hull[0];
    for w in hull.windows(2) {
        let (a, b) = (curve.points[w[0]], curve.points[w[1]]);
        // Yield gained along the edge; positive iff its slope exceeds s.
        if gain0 * (b.tpr - a.tpr) - gain1 * (b.fpr - a.fpr) > TIE_TOLERANCE {
            best = w[1];
        } else {
            break;
        }
    }
    // A vertex on the hull can share its f with a lower one; report the
    // first vertex reaching the same point.
    let target = curve.points[best];
    let index = curve
        .points
        .iter()
        .position(|p| *p == target)
        .unwrap_or(best);
    operating_point(curve, ctx, index)
}

/// Exhaustive maximization of the yield over every vertex.
pub fn brute_force_operating_point(curve: &RocCurve, ctx: &OperatingContext) -> OperatingPoint {
    let mut best = 0;
    let mut best_yield = ctx.variable_yield(curve.points[0]);
    for (k, p) in curve.points.iter().enumerate().skip(1) {
        let y = ctx.variable_yield(*p);
        if y > best_yield + TIE_TOLERANCE {
            best = k;
            best_yield = y;
        }
    }
    operating_point(curve, ctx, best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentRank {
    /// Position of the curve in the input list.
    pub curve: usize,
    /// 1-based rank; tied curves share a rank.
    pub rank: usize,
    /// Highest intercept `t - s·f` over the vertices; `None` when `s` is
    /// infinite.
    pub intercept: Option<f64>,
    pub optimal_yield: f64,
    pub auc: f64,
}

/// Ranks curves by the intercept of their touching line of slope `s`,
/// equivalently by the best yield they can achieve.
pub fn compare_by_tangent(curves: &[RocCurve], ctx: &OperatingContext) -> Vec<TangentRank> {
    let s = ctx.slope();
    let mut ranks: Vec<TangentRank> = curves
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let intercept = s.is_finite().then(|| {
                c.points
                    .iter()
                    .map(|p| p.tpr - s * p.fpr)
                    .fold(f64::NEG_INFINITY, f64::max)
            });
            TangentRank {
                curve: k,
                rank: 0,
                intercept,
                optimal_yield: optimal_operating_point(c, ctx).utility_yield,
                auc: c.auc(),
            }
        })
        .collect();
    ranks.sort_by(|a, b| {
        b.optimal_yield
            .partial_cmp(&a.optimal_yield)
            .unwrap_or(Ordering::Equal)
            .then(a.curve.cmp(&b.curve))
    });
    for k in 0..ranks.len() {
        ranks[k].rank = if k > 0
            && (ranks[k - 1].optimal_yield - ranks[k].optimal_yield).abs() <= TIE_TOLERANCE
        {
            ranks[k - 1].rank
        } else {
            k + 1
        };
    }
    ranks
}

/// True when the AUC ordering of the ranked curves contradicts their tangent
/// ranking for some pair.
pub fn auc_disagrees(ranks: &[TangentRank]) -> bool {
    ranks.iter().enumerate().any(|(i, a)| {
        ranks[i + 1..]
            .iter()
            .any(|b| a.rank < b.rank && a.auc < b.auc)
    })
}

/// `a` lies on or above `b` everywhere and strictly above somewhere.
pub fn dominates(a: &RocCurve, b: &RocCurve) -> bool {
    let mut xs: Vec<f64> = a.points.iter().chain(&b.points).map(|p| p.fpr).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut strict = false;
    for &f in &xs {
        let (alo, ahi) = a.span_at(f);
        let (blo, bhi) = b.span_at(f);
        if alo < blo || ahi < bhi {
            return false;
        }
        strict |= alo > blo || ahi > bhi;
    }
    // Between breakpoints both curves are linear, so checking midpoints
    // catches nothing new; strictness at a breakpoint suffices.
    strict
}

/// Binormal curve `t = Φ(a + b·Φ⁻¹(f))` sampled at `steps + 1` evenly spaced
/// false-positive rates.
pub fn binormal_curve(separation: f64, slope: f64, steps: usize) -> Result<RocCurve> {
    if steps < 1 || !(slope > 0.0 && separation.is_finite()) {
        return Err(Error::InvalidCurve(format!(
            "binormal parameters ({separation}, {slope}, {steps}) are invalid"
        )));
    }
    let std = Normal::standard();
    let points = (0..=steps)
        .map(|k| {
            let f = k as f64 / steps as f64;
            let t = if k == 0 {
                0.0
            } else if k == steps {
                1.0
            } else {
                std.cdf(separation + slope * std.inverse_cdf(f))
            };
            RocPoint::new(f, t)
        })
        .collect();
    RocCurve::new(points)
}

/// Binormal `(separation, slope)` parameters of the AUC-reversal fixture,
/// picked by a grid search over both parameters in steps of 0.1 for the
/// widest reversal with both optimal vertices away from the corners.
pub const AUC_REVERSAL_CURVE_A: (f64, f64) = (2.0, 3.0);
pub const AUC_REVERSAL_CURVE_B: (f64, f64) = (1.1, 0.3);
pub const AUC_REVERSAL_STEPS: usize = 50;

/// Two curves whose AUC ordering is opposite to their utility ordering for
/// `U = [[4, 0], [0, 1]]` and `B = 0.5`: `(a, b)` with `auc(a) < auc(b)` yet
/// `a` reaching the higher yield.
pub fn auc_reversal_fixture() -> (RocCurve, RocCurve) {
    let (sa, ba) = AUC_REVERSAL_CURVE_A;
    let (sb, bb) = AUC_REVERSAL_CURVE_B;
    (
        binormal_curve(sa, ba, AUC_REVERSAL_STEPS).expect("valid parameters"),
        binormal_curve(sb, bb, AUC_REVERSAL_STEPS).expect("valid parameters"),
    )
}
