//! Utility matrices, the utility yield, and the two-dimensional coordinate
//! space of normalized binary utility matrices.

use serde::{Deserialize, Serialize};

use crate::confusion::ConfusionMatrix;
use crate::error::{Error, Result};

/// Absolute tolerance used when comparing yields and normalized utilities.
pub const YIELD_TOLERANCE: f64 = 1e-9;

/// Utilities `U_ij` gained by choosing class `i` when class `j` is true.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct UtilityMatrix {
    entries: [[f64; 2]; 2],
}

impl TryFrom<[[f64; 2]; 2]> for UtilityMatrix {
    type Error = Error;

    fn try_from(entries: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(entries)
    }
}

impl From<UtilityMatrix> for [[f64; 2]; 2] {
    fn from(u: UtilityMatrix) -> Self {
        u.entries
    }
}

impl UtilityMatrix {
    /// Rejects non-finite entries and constant matrices.
    pub fn new(entries: [[f64; 2]; 2]) -> Result<Self> {
        for (row, r) in entries.iter().enumerate() {
            for (col, &value) in r.iter().enumerate() {
                if !value.is_finite() {
                    return Err(Error::InvalidUtilityEntry { row, col, value });
                }
            }
        }
        let u = Self { entries };
        if u.max() == u.min() {
            return Err(Error::DegenerateUtilities);
        }
        Ok(u)
    }

    pub fn identity() -> Self {
        Self {
            entries: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.entries
    }

    pub fn get(&self, chosen: usize, truth: usize) -> f64 {
        self.entries[chosen][truth]
    }

    pub fn min(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `U_00 - U_10`: gain from classifying a true class-0 item correctly.
    pub fn gain_class0(&self) -> f64 {
        self.entries[0][0] - self.entries[1][0]
    }

    /// `U_11 - U_01`: gain from classifying a true class-1 item correctly.
    pub fn gain_class1(&self) -> f64 {
        self.entries[1][1] - self.entries[0][1]
    }

    /// Correct classification is never worse than misclassification of the same
    /// true class, up to [`YIELD_TOLERANCE`].
    pub fn is_feasible(&self) -> bool {
        self.gain_class0() >= -YIELD_TOLERANCE && self.gain_class1() >= -YIELD_TOLERANCE
    }

    pub fn is_normalized(&self) -> bool {
        self.min().abs() <= YIELD_TOLERANCE && (self.max() - 1.0).abs() <= YIELD_TOLERANCE
    }

    /// `a·U + b` entrywise, a change of unit and zero of the utility scale.
    pub fn affine_transform(&self, scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidScale(scale));
        }
        Self::new(self.entries.map(|row| row.map(|u| scale * u + shift)))
    }

    /// Rescales to minimum 0 and maximum 1.
    pub fn normalize(&self) -> Self {
        let (lo, hi) = (self.min(), self.max());
        // `new` guarantees hi > lo.
        Self {
            entries: self.entries.map(|row| row.map(|u| (u - lo) / (hi - lo))),
        }
    }

    /// Average utility per classified item, `Σ U_ij C_ij`, for a normalized
    /// confusion matrix.
    pub fn utility_yield(&self, c: &ConfusionMatrix) -> Result<f64> {
        c.check_normalized()?;
        Ok(self.yield_unchecked(c))
    }

    /// [`utility_yield`](Self::utility_yield) without the normalization check.
    #[inline]
    pub fn yield_unchecked(&self, c: &ConfusionMatrix) -> f64 {
        let u = &self.entries;
        let e = c.entries();
        u[0][0] * e[0][0] + u[0][1] * e[0][1] + u[1][0] * e[1][0] + u[1][1] * e[1][1]
    }

    /// Expected utility of each choice under class probabilities `p`.
    pub fn expected_utilities(&self, p: &ClassDistribution) -> [f64; 2] {
        let [p0, p1] = p.probabilities();
        let u = &self.entries;
        [u[0][0] * p0 + u[0][1] * p1, u[1][0] * p0 + u[1][1] * p1]
    }

    /// Coordinates of a normalized, feasible matrix.
    pub fn to_coordinates(&self) -> Result<UtilityCoordinates> {
        UtilityCoordinates::from_matrix(self)
    }
}

/// Free function form of [`UtilityMatrix::utility_yield`].
pub fn utility_yield(u: &UtilityMatrix, c: &ConfusionMatrix) -> Result<f64> {
    u.utility_yield(c)
}

/// A point of the feasible square of normalized binary utility matrices.
///
/// The centre is the identity matrix. Moving along `x` trades the utility of
/// correctly classifying class 0 against class 1; moving along `y` raises the
/// utility of misclassifying class 1 (`y > 0`) or class 0 (`y < 0`). The two
/// corners with `|y - x| > 1` would prefer misclassification and are excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityCoordinates {
    pub x: f64,
    pub y: f64,
}

impl UtilityCoordinates {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let c = Self { x, y };
        if c.is_feasible() {
            Ok(c)
        } else {
            Err(Error::InfeasibleCoordinates { x, y })
        }
    }

    /// Inside the square `|x|, |y| ≤ 1` and off the two cut corners. The cut
    /// lines are included up to [`YIELD_TOLERANCE`].
    pub fn is_feasible(&self) -> bool {
        let (x, y) = (self.x, self.y);
        x.is_finite()
            && y.is_finite()
            && x.abs() <= 1.0
            && y.abs() <= 1.0
            && y - x <= 1.0 + YIELD_TOLERANCE
            && x - y <= 1.0 + YIELD_TOLERANCE
    }

    pub fn to_matrix(&self) -> Result<UtilityMatrix> {
        if !self.is_feasible() {
            return Err(Error::InfeasibleCoordinates {
                x: self.x,
                y: self.y,
            });
        }
        Ok(self.to_matrix_unchecked())
    }

    pub(crate) fn to_matrix_unchecked(self) -> UtilityMatrix {
        let (x, y) = (self.x, self.y);
        let pos = |v: f64| if v > 0.0 { v } else { 0.0 };
        let neg = |v: f64| if v < 0.0 { v } else { 0.0 };
        UtilityMatrix {
            entries: [[1.0 - pos(x), pos(y)], [-neg(y), 1.0 + neg(x)]],
        }
    }

    /// Inverse of [`to_matrix`](Self::to_matrix). The matrix must already be
    /// normalized and feasible; nothing is rescaled implicitly.
    pub fn from_matrix(u: &UtilityMatrix) -> Result<Self> {
        if !u.is_normalized() {
            return Err(Error::UtilityNotNormalized {
                min: u.min(),
                max: u.max(),
            });
        }
        if !u.is_feasible() {
            return Err(Error::InfeasibleUtility);
        }
        let [[u00, u01], [u10, u11]] = u.entries();
        // A normalized feasible matrix has a 1 on the diagonal; which diagonal
        // entry is below 1 gives the sign of x.
        let x = if u00 < 1.0 - YIELD_TOLERANCE {
            1.0 - u00
        } else {
            u11 - 1.0
        };
        let y = if u01 > YIELD_TOLERANCE { u01 } else { -u10 };
        let expected = Self { x, y }.to_matrix_unchecked();
        let close = expected
            .entries()
            .iter()
            .flatten()
            .zip(u.entries().iter().flatten())
            .all(|(a, b)| (a - b).abs() <= YIELD_TOLERANCE);
        if !close {
            // e.g. both off-diagonal entries positive: not on the chart.
            return Err(Error::InfeasibleUtility);
        }
        Self::new(x.clamp(-1.0, 1.0), y.clamp(-1.0, 1.0))
    }
}

/// Probabilities of the two classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    p: [f64; 2],
}

impl ClassDistribution {
    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        if !(p0 >= 0.0 && p1 >= 0.0) || ((p0 + p1) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbabilities(format!(
                "({p0}, {p1}) must be nonnegative and sum to 1"
            )));
        }
        Ok(Self { p: [p0, p1] })
    }

    /// Normalizes nonnegative weights with a positive sum.
    pub fn from_weights(w0: f64, w1: f64) -> Result<Self> {
        let s = w0 + w1;
        if !(w0 >= 0.0 && w1 >= 0.0 && s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidProbabilities(format!(
                "weights ({w0}, {w1}) cannot be normalized"
            )));
        }
        Ok(Self {
            p: [w0 / s, w1 / s],
        })
    }

    pub fn probabilities(&self) -> [f64; 2] {
        self.p
    }
}

/// Result of maximizing expected utility over the two classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decision {
    pub class: usize,
    pub expected_utilities: [f64; 2],
}

/// Chooses the class with maximal expected utility. Ties go to class 0.
pub fn optimal_class(u: &UtilityMatrix, p: &ClassDistribution) -> Decision {
    let expected_utilities = u.expected_utilities(p);
    let class = if expected_utilities[1] > expected_utilities[0] {
        1
    } else {
        0
    };
    Decision {
        class,
        expected_utilities,
    }
}

/// A probability distribution over candidate utility matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityMixture {
    components: Vec<(f64, UtilityMatrix)>,
}

impl UtilityMixture {
    pub fn new(components: Vec<(f64, UtilityMatrix)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyMixture);
        }
        if components
            .iter()
            .any(|(w, _)| !(*w >= 0.0 && w.is_finite()))
        {
            return Err(Error::InvalidProbabilities(
                "mixture weights must be nonnegative".into(),
            ));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbabilities(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(f64, UtilityMatrix)] {
        &self.components
    }

    /// `Σ_a q_a U^(a)`, the matrix to use when the true utilities are uncertain.
    pub fn expected_matrix(&self) -> Result<UtilityMatrix> {
        let mut acc = [[0.0; 2]; 2];
        for (w, u) in &self.components {
            for (i, row) in u.entries().iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    acc[i][j] += w * v;
                }
            }
        }
        UtilityMatrix::new(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factory() -> UtilityMatrix {
        UtilityMatrix::new([[15.0, -335.0], [-35.0, 165.0]]).unwrap()
    }

    fn assert_matrix(u: &UtilityMatrix, expected: [[f64; 2]; 2]) {
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (u.get(i, j) - expected[i][j]).abs() < 1e-12,
                    "{:?} != {:?}",
                    u.entries(),
                    expected
                );
            }
        }
    }

    #[test]
    fn constant_matrix_is_degenerate() {
        assert_eq!(
            UtilityMatrix::new([[2.0; 2]; 2]),
            Err(Error::DegenerateUtilities)
        );
    }

    #[test]
    fn factory_normalizes_to_scaled_medical_matrix() {
        assert_matrix(&factory().normalize(), [[0.7, 0.0], [0.6, 1.0]]);
        let medical = UtilityMatrix::new([[350.0, 0.0], [300.0, 500.0]]).unwrap();
        assert_matrix(&medical.normalize(), [[0.7, 0.0], [0.6, 1.0]]);
    }

    #[test]
    fn normalize_examples() {
        let u = UtilityMatrix::new([[0.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(u.normalize(), u);
        let u = UtilityMatrix::new([[2.0, 0.0], [0.0, 2.0]]).unwrap();
        assert_eq!(u.normalize(), UtilityMatrix::identity());
    }

    #[test]
    fn affine_shift_gives_medical_matrix() {
        let shifted = factory().affine_transform(1.0, 335.0).unwrap();
        assert_matrix(&shifted, [[350.0, 0.0], [300.0, 500.0]]);
        assert_eq!(factory().affine_transform(1.0, 0.0).unwrap(), factory());
        assert_eq!(
            factory().affine_transform(0.0, 1.0),
            Err(Error::InvalidScale(0.0))
        );
        assert!(factory().affine_transform(-2.0, 1.0).is_err());
    }

    #[test]
    fn yield_requires_normalized_confusion() {
        let c = ConfusionMatrix::new([[27.0, 15.0], [23.0, 35.0]]).unwrap();
        assert!(matches!(
            factory().utility_yield(&c),
            Err(Error::NotNormalized { .. })
        ));
        let c = c.normalize().unwrap();
        assert!((factory().utility_yield(&c).unwrap() - 3.5).abs() < 1e-9);
    }

    #[test]
    fn coordinate_examples() {
        let m = |x, y| UtilityCoordinates::new(x, y).unwrap().to_matrix().unwrap();
        assert_eq!(m(0.0, 0.0), UtilityMatrix::identity());
        assert_matrix(&m(-1.0, 0.0), [[1.0, 0.0], [0.0, 0.0]]);
        assert_matrix(&m(0.0, 1.0), [[1.0, 1.0], [0.0, 1.0]]);
        assert_matrix(&m(0.5, -0.25), [[0.5, 0.0], [0.25, 1.0]]);
    }

    #[test]
    fn cut_corners_are_infeasible() {
        assert!(UtilityCoordinates::new(-0.5, 0.6).is_err());
        assert!(UtilityCoordinates::new(0.6, -0.5).is_err());
        assert!(UtilityCoordinates::new(-0.5, 0.5).is_ok());
        assert!(UtilityCoordinates::new(1.0, 0.0).is_ok());
        assert!(UtilityCoordinates::new(1.2, 0.0).is_err());
    }

    #[test]
    fn from_matrix_rejects_unnormalized_and_infeasible() {
        assert!(matches!(
            factory().to_coordinates(),
            Err(Error::UtilityNotNormalized { .. })
        ));
        let swapped = UtilityMatrix::new([[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(swapped.to_coordinates(), Err(Error::InfeasibleUtility));
        let medical = UtilityMatrix::new([[350.0, 0.0], [300.0, 500.0]]).unwrap();
        let c = medical.normalize().to_coordinates().unwrap();
        assert!((c.x - 0.3).abs() < 1e-12 && (c.y + 0.6).abs() < 1e-12);
    }

    #[test]
    fn optimal_class_examples() {
        let p = ClassDistribution::new(0.7, 0.3).unwrap();
        let d = optimal_class(&UtilityMatrix::identity(), &p);
        assert_eq!(d.class, 0);
        assert!((d.expected_utilities[0] - 0.7).abs() < 1e-12);
        assert!((d.expected_utilities[1] - 0.3).abs() < 1e-12);

        let half = ClassDistribution::new(0.5, 0.5).unwrap();
        let d = optimal_class(&factory(), &half);
        assert_eq!(d.class, 1);
        assert!((d.expected_utilities[0] + 160.0).abs() < 1e-12);
        assert!((d.expected_utilities[1] - 65.0).abs() < 1e-12);

        let d = optimal_class(&UtilityMatrix::identity(), &half);
        assert_eq!(d.class, 0);
        assert_eq!(d.expected_utilities, [0.5, 0.5]);
    }

    #[test]
    fn class_distribution_validation() {
        assert!(ClassDistribution::new(0.6, 0.5).is_err());
        assert!(ClassDistribution::new(-0.1, 1.1).is_err());
        let p = ClassDistribution::from_weights(3.0, 1.0).unwrap();
        assert_eq!(p.probabilities(), [0.75, 0.25]);
        assert!(ClassDistribution::from_weights(0.0, 0.0).is_err());
    }

    #[test]
    fn mixture_examples() {
        let a = UtilityMatrix::new([[1.0, 0.0], [0.0, 0.0]]).unwrap();
        let b = UtilityMatrix::new([[0.0, 0.0], [0.0, 1.0]]).unwrap();
        let m = UtilityMixture::new(vec![(0.5, a), (0.5, b)]).unwrap();
        let e = m.expected_matrix().unwrap();
        assert_matrix(&e, [[0.5, 0.0], [0.0, 0.5]]);
        assert_eq!(e.normalize(), UtilityMatrix::identity());

        let single = UtilityMixture::new(vec![(1.0, factory())]).unwrap();
        assert_eq!(single.expected_matrix().unwrap(), factory());
        let split = UtilityMixture::new(vec![(0.25, factory()), (0.75, factory())]).unwrap();
        assert_matrix(&split.expected_matrix().unwrap(), factory().entries());

        assert_eq!(UtilityMixture::new(vec![]), Err(Error::EmptyMixture));
        assert!(UtilityMixture::new(vec![(0.4, a), (0.4, b)]).is_err());
        assert!(UtilityMixture::new(vec![(-0.5, a), (1.5, b)]).is_err());
    }

    #[test]
    fn array_conversion_validates() {
        let arr: [[f64; 2]; 2] = factory().into();
        assert_eq!(arr, [[15.0, -335.0], [-35.0, 165.0]]);
        assert!(UtilityMatrix::try_from([[1.0; 2]; 2]).is_err());
    }
}
