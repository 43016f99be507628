//! Binary confusion matrices.
//!
//! Entries are indexed `(predicted, true)`: row `i` is the class output by the
//! classifier and column `j` the true class. Class 0 is the "positive" class.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the grand sum of a normalized confusion matrix.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// A 2×2 matrix of nonnegative counts or relative frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    entries: [[f64; 2]; 2],
    total: Option<u64>,
}

impl ConfusionMatrix {
    /// Builds a matrix from arbitrary nonnegative entries (counts or frequencies).
    pub fn new(entries: [[f64; 2]; 2]) -> Result<Self> {
        for (row, r) in entries.iter().enumerate() {
            for (col, &value) in r.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::InvalidConfusionEntry { row, col, value });
                }
            }
        }
        Ok(Self {
            entries,
            total: None,
        })
    }

    /// Builds a matrix that must already be normalized.
    pub fn normalized(entries: [[f64; 2]; 2]) -> Result<Self> {
        let c = Self::new(entries)?;
        c.check_normalized()?;
        Ok(c)
    }

    /// Normalizes integer counts `F_ij` into relative frequencies `F_ij / N`,
    /// remembering `N`.
    pub fn from_counts(counts: [[u64; 2]; 2]) -> Result<Self> {
        let n: u64 = counts.iter().flatten().sum();
        if n == 0 {
            return Err(Error::EmptyConfusion);
        }
        let nf = n as f64;
        let entries = counts.map(|row| row.map(|v| v as f64 / nf));
        Ok(Self {
            entries,
            total: Some(n),
        })
    }

    /// Confusion matrix realised by a classifier with the given true-positive and
    /// true-negative rates on a test set with class-0 frequency `f0`.
    ///
    /// Rates and `f0` are not validated; callers sampling in the hot loop rely on
    /// that.
    pub fn from_rates(f0: f64, tpr: f64, tnr: f64) -> Self {
        let f1 = 1.0 - f0;
        Self {
            entries: [[f0 * tpr, f1 * (1.0 - tnr)], [f0 * (1.0 - tpr), f1 * tnr]],
            total: None,
        }
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.entries
    }

    pub fn get(&self, predicted: usize, truth: usize) -> f64 {
        self.entries[predicted][truth]
    }

    /// Number of items `N` when the matrix was built from counts.
    pub fn total(&self) -> Option<u64> {
        self.total
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().flatten().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.sum() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    pub fn check_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized { sum: self.sum() })
        }
    }

    /// Divides every entry by the grand sum. The original total is kept when it
    /// is known from counts; otherwise an integral sum is taken as the count.
    pub fn normalize(&self) -> Result<Self> {
        let s = self.sum();
        if s <= 0.0 {
            return Err(Error::EmptyConfusion);
        }
        let total = self
            .total
            .or_else(|| (s.fract() == 0.0 && s >= 1.0 && s < u64::MAX as f64).then_some(s as u64));
        Ok(Self {
            entries: self.entries.map(|row| row.map(|v| v / s)),
            total,
        })
    }

    /// Frequency of true class 0: `C_00 + C_10`.
    pub fn f0(&self) -> f64 {
        self.entries[0][0] + self.entries[1][0]
    }

    /// Frequency of true class 1: `C_01 + C_11`.
    pub fn f1(&self) -> f64 {
        self.entries[0][1] + self.entries[1][1]
    }

    pub fn c00(&self) -> f64 {
        self.entries[0][0]
    }

    pub fn c11(&self) -> f64 {
        self.entries[1][1]
    }

    /// The same test outcomes with the two class labels exchanged.
    pub fn relabeled(&self) -> Self {
        let [[a, b], [c, d]] = self.entries;
        Self {
            entries: [[d, c], [b, a]],
            total: self.total,
        }
    }
}
