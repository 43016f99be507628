//! Classical evaluation metrics for binary classifiers.
//!
//! Every metric is written in terms of `C_00`, `C_11` and the class
//! frequencies `f_0`, `f_1`, using `C_10 = f_0 - C_00` and `C_01 = f_1 - C_11`.
//! Class 0 is the positive class.
//!
//! Conventions for degenerate inputs:
//! * a test set missing one of the classes (`f_0` or `f_1` equal to zero)
//!   cannot evaluate both classes and is rejected by every metric except
//!   accuracy;
//! * otherwise an empty denominator (no item predicted positive, say) makes
//!   precision, F-beta, Fowlkes–Mallows and Matthews correlation return 0.
//!
//! # Matthews correlation
//!
//! The standard coefficient `(C_00 C_11 - C_01 C_10) / √(...)` rewritten in
//! `C_00`, `C_11` has numerator `f_1 C_00 + f_0 C_11 - f_0 f_1`. Dropping the
//! `- f_0 f_1` term gives 1.26 and 1.55 for the two factory classifiers, which
//! is not even a valid correlation; keeping it gives the tabulated 0.24 and
//! 0.51. The centred numerator is therefore the one implemented here.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::confusion::ConfusionMatrix;
use crate::error::{Error, Result};
use crate::utility::UtilityMatrix;

fn undefined(metric: &str, reason: &str) -> Error {
    Error::UndefinedMetric {
        metric: metric.to_string(),
        reason: reason.to_string(),
    }
}

fn require_both_classes(metric: &str, c: &ConfusionMatrix) -> Result<(f64, f64)> {
    let (f0, f1) = (c.f0(), c.f1());
    if f0 <= 0.0 || f1 <= 0.0 {
        return Err(undefined(metric, "test set contains a single class"));
    }
    Ok((f0, f1))
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// `C_00 + C_11`.
pub fn accuracy(c: &ConfusionMatrix) -> f64 {
    c.c00() + c.c11()
}

/// Recall: `C_00 / f_0`.
pub fn true_positive_rate(c: &ConfusionMatrix) -> Result<f64> {
    let f0 = c.f0();
    if f0 <= 0.0 {
        return Err(undefined("true_positive_rate", "no items of class 0"));
    }
    Ok(c.c00() / f0)
}

/// Specificity: `C_11 / f_1`.
pub fn true_negative_rate(c: &ConfusionMatrix) -> Result<f64> {
    let f1 = c.f1();
    if f1 <= 0.0 {
        return Err(undefined("true_negative_rate", "no items of class 1"));
    }
    Ok(c.c11() / f1)
}

/// `C_00 / (C_00 - C_11 + f_1)`; the denominator is the predicted-positive mass.
pub fn precision(c: &ConfusionMatrix) -> Result<f64> {
    let (_, f1) = require_both_classes("precision", c)?;
    Ok(ratio_or_zero(c.c00(), c.c00() - c.c11() + f1))
}

/// F-beta measure, `(1+β²) C_00 / (β² f_0 + C_00 - C_11 + f_1)`.
///
/// For `β = 1` this is `2 C_00 / (C_00 - C_11 + 1)`, the harmonic mean of
/// precision and recall.
pub fn f_beta(c: &ConfusionMatrix, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(undefined("f_beta", "beta must be positive"));
    }
    let (f0, f1) = require_both_classes("f_beta", c)?;
    let b2 = beta * beta;
    Ok(ratio_or_zero(
        (1.0 + b2) * c.c00(),
        b2 * f0 + c.c00() - c.c11() + f1,
    ))
}

pub fn f1_score(c: &ConfusionMatrix) -> Result<f64> {
    f_beta(c, 1.0)
}

/// Matthews correlation coefficient
/// `(f_1 C_00 + f_0 C_11 - f_0 f_1) / √(f_0 f_1 (f_1 + C_00 - C_11)(f_0 + C_11 - C_00))`.
pub fn matthews_cc(c: &ConfusionMatrix) -> Result<f64> {
    let (f0, f1) = require_both_classes("matthews_cc", c)?;
    let (c00, c11) = (c.c00(), c.c11());
    let num = f1 * c00 + f0 * c11 - f0 * f1;
    let radicand = f0 * f1 * (f1 + c00 - c11) * (f0 + c11 - c00);
    if radicand <= 0.0 {
        return Ok(0.0);
    }
    Ok((num / radicand.sqrt()).clamp(-1.0, 1.0))
}

/// Fowlkes–Mallows index `C_00 / √(f_0 (f_1 + C_00 - C_11))`, the geometric
/// mean of precision and recall.
pub fn fowlkes_mallows(c: &ConfusionMatrix) -> Result<f64> {
    let (f0, f1) = require_both_classes("fowlkes_mallows", c)?;
    let radicand = f0 * (f1 + c.c00() - c.c11());
    if radicand <= 0.0 {
        return Ok(0.0);
    }
    Ok(c.c00() / radicand.sqrt())
}

/// `C_00 / (2 f_0) + C_11 / (2 f_1)`.
pub fn balanced_accuracy(c: &ConfusionMatrix) -> Result<f64> {
    let (f0, f1) = require_both_classes("balanced_accuracy", c)?;
    Ok(c.c00() / (2.0 * f0) + c.c11() / (2.0 * f1))
}

/// The positive factor `a(N, f_0, f_1)` of an admissible metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleFactor {
    One,
    /// `1 / f_0`
    InverseF0,
    /// `1 / f_1`
    InverseF1,
}

impl ScaleFactor {
    pub fn value(self, f0: f64, f1: f64) -> f64 {
        match self {
            ScaleFactor::One => 1.0,
            ScaleFactor::InverseF0 => 1.0 / f0,
            ScaleFactor::InverseF1 => 1.0 / f1,
        }
    }
}

/// Witness that a metric has the form `a·X·C_00 + a·Y·C_11 + b`, with `X`, `Y`
/// constants, `a > 0` a function of the class frequencies, and
/// `b = a·(b_0 f_0 + b_1 f_1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleForm {
    pub x: f64,
    pub y: f64,
    pub scale: ScaleFactor,
    pub offset: [f64; 2],
}

impl AdmissibleForm {
    pub fn evaluate(&self, c: &ConfusionMatrix) -> f64 {
        let (f0, f1) = (c.f0(), c.f1());
        let a = self.scale.value(f0, f1);
        a * (self.x * c.c00() + self.y * c.c11() + self.offset[0] * f0 + self.offset[1] * f1)
    }

    /// Direction angle of `(X, Y)` in degrees.
    pub fn direction_degrees(&self) -> f64 {
        self.y.atan2(self.x).to_degrees()
    }
}

/// The scoring rule behind a [`MetricDescriptor`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    Accuracy,
    BalancedAccuracy,
    Precision,
    TruePositiveRate,
    TrueNegativeRate,
    FBeta { beta: f64 },
    Matthews,
    FowlkesMallows,
    UtilityYield { utility: UtilityMatrix },
}

impl MetricKind {
    #[inline]
    pub fn score(&self, c: &ConfusionMatrix) -> Result<f64> {
        match self {
            MetricKind::Accuracy => Ok(accuracy(c)),
            MetricKind::BalancedAccuracy => balanced_accuracy(c),
            MetricKind::Precision => precision(c),
            MetricKind::TruePositiveRate => true_positive_rate(c),
            MetricKind::TrueNegativeRate => true_negative_rate(c),
            MetricKind::FBeta { beta } => f_beta(c, *beta),
            MetricKind::Matthews => matthews_cc(c),
            MetricKind::FowlkesMallows => fowlkes_mallows(c),
            MetricKind::UtilityYield { utility } => utility.utility_yield(c),
        }
    }

    /// Admissible-form witness for the metrics that have one.
    pub fn admissible_form(&self) -> Option<AdmissibleForm> {
        let form = |x, y, scale| AdmissibleForm {
            x,
            y,
            scale,
            offset: [0.0, 0.0],
        };
        match self {
            MetricKind::Accuracy => Some(form(1.0, 1.0, ScaleFactor::One)),
            MetricKind::TruePositiveRate => Some(form(1.0, 0.0, ScaleFactor::InverseF0)),
            MetricKind::TrueNegativeRate => Some(form(0.0, 1.0, ScaleFactor::InverseF1)),
            MetricKind::UtilityYield { utility } if utility.is_feasible() => Some(AdmissibleForm {
                x: utility.gain_class0(),
                y: utility.gain_class1(),
                scale: ScaleFactor::One,
                offset: [utility.get(1, 0), utility.get(0, 1)],
            }),
            _ => None,
        }
    }
}

/// A named metric together with its declared decision-theoretic status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDescriptor {
    pub name: String,
    pub kind: MetricKind,
    /// Present iff the metric is declared compliant.
    pub admissible_form: Option<AdmissibleForm>,
}

impl MetricDescriptor {
    pub fn new(name: impl Into<String>, kind: MetricKind) -> Self {
        Self {
            name: name.into(),
            admissible_form: kind.admissible_form(),
            kind,
        }
    }

    pub fn score(&self, c: &ConfusionMatrix) -> Result<f64> {
        self.kind.score(c)
    }

    pub fn declared_compliant(&self) -> bool {
        self.admissible_form.is_some()
    }
}

impl fmt::Display for MetricDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Wraps the utility yield of `utility` as a metric.
pub fn yield_as_metric(utility: UtilityMatrix) -> MetricDescriptor {
    MetricDescriptor::new("utility_yield", MetricKind::UtilityYield { utility })
}

const REGISTRY: [(&str, &[&str]); 8] = [
    ("accuracy", &["acc"]),
    ("balanced_accuracy", &["bacc", "balanced"]),
    ("precision", &["ppv"]),
    ("recall", &["tpr", "true_positive_rate", "sensitivity"]),
    ("specificity", &["tnr", "true_negative_rate"]),
    ("f1", &["f1_score", "f_measure"]),
    ("mcc", &["matthews", "matthews_cc"]),
    ("fowlkes_mallows", &["fm", "fmi"]),
];

fn kind_for(name: &str) -> MetricKind {
    match name {
        "accuracy" => MetricKind::Accuracy,
        "balanced_accuracy" => MetricKind::BalancedAccuracy,
        "precision" => MetricKind::Precision,
        "recall" => MetricKind::TruePositiveRate,
        "specificity" => MetricKind::TrueNegativeRate,
        "f1" => MetricKind::FBeta { beta: 1.0 },
        "mcc" => MetricKind::Matthews,
        "fowlkes_mallows" => MetricKind::FowlkesMallows,
        _ => unreachable!("not a registry name: {name}"),
    }
}

/// The eight standard metrics, in a fixed order.
pub fn registry() -> Vec<MetricDescriptor> {
    REGISTRY
        .iter()
        .map(|(name, _)| MetricDescriptor::new(*name, kind_for(name)))
        .collect()
}

/// Registry names, comma separated, for diagnostics.
pub fn registry_names() -> String {
    REGISTRY
        .iter()
        .map(|(n, _)| *n)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Looks a metric up by canonical name or alias (case-insensitive, `-` and `_`
/// interchangeable).
pub fn metric_by_name(name: &str) -> Result<MetricDescriptor> {
    let key = name.trim().to_ascii_lowercase().replace('-', "_");
    REGISTRY
        .iter()
        .find(|(canon, aliases)| *canon == key || aliases.contains(&key.as_str()))
        .map(|(canon, _)| MetricDescriptor::new(*canon, kind_for(canon)))
        .ok_or_else(|| Error::UnknownMetric {
            name: name.to_string(),
            known: registry_names(),
        })
}
