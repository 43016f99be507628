//! Random generation for the experiments.
//!
//! Every logical task (a chunk of Monte Carlo trials, a witness search, ...)
//! draws from its own ChaCha8 stream keyed by `(master seed, task index)`, so
//! results never depend on how tasks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::confusion::ConfusionMatrix;
use crate::error::{Error, Result};
use crate::utility::{UtilityCoordinates, UtilityMatrix};

/// Maximum number of rejected draws before a sampler reports misconfiguration.
pub const REJECTION_CAP: u64 = 1_000_000;

/// Independent generator for task `index` under `master_seed`.
pub fn substream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Rates on `[0.5, 1]` with density proportional to `r - 0.5`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RateSampler;

impl RateSampler {
    /// Inverse CDF: `0.5 + 0.5·√u`.
    #[inline]
    pub fn from_uniform(u: f64) -> f64 {
        0.5 + 0.5 * u.sqrt()
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Self::from_uniform(rng.random::<f64>())
    }
}

pub fn sample_rate<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    RateSampler.sample(rng)
}

/// A classifier with independent rate-sampled TPR and TNR on a test set with
/// class-0 frequency `f0`.
pub fn sample_confusion<R: Rng + ?Sized>(f0: f64, rng: &mut R) -> Result<ConfusionMatrix> {
    if !(f0 > 0.0 && f0 < 1.0) {
        return Err(Error::InvalidFrequency(f0));
    }
    Ok(sample_confusion_unchecked(f0, rng))
}

#[inline]
pub(crate) fn sample_confusion_unchecked<R: Rng + ?Sized>(f0: f64, rng: &mut R) -> ConfusionMatrix {
    let tpr = RateSampler.sample(rng);
    let tnr = RateSampler.sample(rng);
    ConfusionMatrix::from_rates(f0, tpr, tnr)
}

/// Any classifier at all on a test set with class-0 frequency `f0`: TPR and
/// TNR uniform on `[0, 1]`. Used where the whole confusion polytope must be
/// explored rather than only good classifiers.
pub fn sample_confusion_uniform<R: Rng + ?Sized>(f0: f64, rng: &mut R) -> ConfusionMatrix {
    let tpr = rng.random::<f64>();
    let tnr = rng.random::<f64>();
    ConfusionMatrix::from_rates(f0, tpr, tnr)
}

/// Class-0 frequency uniform on `(0, 1)`; the endpoints are redrawn.
pub fn sample_frequency<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let f0 = rng.random::<f64>();
        if f0 > 0.0 && f0 < 1.0 {
            return f0;
        }
    }
}

/// Distribution of "true" utility matrices over the feasible coordinate square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilityPrior {
    /// Uniform over the square with the two corners cut.
    Uniform,
    /// Bivariate Gaussian centred on the identity matrix, truncated to the
    /// feasible region.
    Gaussian { sigma: f64 },
}

impl UtilityPrior {
    pub const DEFAULT_GAUSSIAN_SIGMA: f64 = 1.0 / 3.0;

    pub fn gaussian() -> Self {
        UtilityPrior::Gaussian {
            sigma: Self::DEFAULT_GAUSSIAN_SIGMA,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            UtilityPrior::Uniform => "uniform",
            UtilityPrior::Gaussian { .. } => "gaussian",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            UtilityPrior::Uniform => Ok(()),
            UtilityPrior::Gaussian { sigma } if *sigma > 0.0 && sigma.is_finite() => Ok(()),
            UtilityPrior::Gaussian { sigma } => Err(Error::InvalidConfig(format!(
                "gaussian prior needs a positive standard deviation, got {sigma}"
            ))),
        }
    }

    /// Draws feasible coordinates by rejection.
    pub fn sample_coordinates<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<UtilityCoordinates> {
        let normal = match self {
            UtilityPrior::Uniform => None,
            UtilityPrior::Gaussian { sigma } => Some(
                Normal::new(0.0, *sigma)
                    .map_err(|e| Error::InvalidConfig(format!("gaussian prior: {e}")))?,
            ),
        };
        for _ in 0..REJECTION_CAP {
            let (x, y) = match &normal {
                None => (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)),
                Some(n) => (n.sample(rng), n.sample(rng)),
            };
            let c = UtilityCoordinates { x, y };
            if c.is_feasible() {
                return Ok(c);
            }
        }
        Err(Error::SamplerExhausted {
            attempts: REJECTION_CAP,
            what: format!("{} utility prior", self.name()),
        })
    }
}

/// Step 1 of the misranking experiment: a normalized feasible "true" matrix.
pub fn sample_true_utility<R: Rng + ?Sized>(
    prior: &UtilityPrior,
    rng: &mut R,
) -> Result<UtilityMatrix> {
    Ok(prior.sample_coordinates(rng)?.to_matrix_unchecked())
}

/// Gaussian assessment error on each utility entry, truncated jointly so the
/// perturbed matrix stays in `[0, 1]` and keeps correct classification at
/// least as good as misclassification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    sigma: f64,
}

impl ErrorModel {
    pub const MAX_SIGMA: f64 = 0.3;

    pub fn new(sigma: f64) -> Result<Self> {
        if !(0.0..=Self::MAX_SIGMA).contains(&sigma) {
            return Err(Error::InvalidConfig(format!(
                "error standard deviation {sigma} outside [0, {}]",
                Self::MAX_SIGMA
            )));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Adds the error to `u` without renormalizing. With `sigma == 0` the
    /// matrix is returned unchanged and no randomness is consumed.
    pub fn perturb<R: Rng + ?Sized>(
        &self,
        u: &UtilityMatrix,
        rng: &mut R,
    ) -> Result<UtilityMatrix> {
        perturb_utility(u, self.sigma, rng)
    }
}

/// See [`ErrorModel::perturb`]. `sigma` must be nonnegative; the upper bound of
/// the experiment range is not enforced here.
pub fn perturb_utility<R: Rng + ?Sized>(
    u: &UtilityMatrix,
    sigma: f64,
    rng: &mut R,
) -> Result<UtilityMatrix> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "error standard deviation must be nonnegative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(*u);
    }
    let normal =
        Normal::new(0.0, sigma).map_err(|e| Error::InvalidConfig(format!("error model: {e}")))?;
    let base = u.entries();
    for _ in 0..REJECTION_CAP {
        let e = base.map(|row| row.map(|v| v + normal.sample(rng)));
        let in_range = e.iter().flatten().all(|v| (0.0..=1.0).contains(v));
        if in_range && e[0][0] >= e[1][0] && e[1][1] >= e[0][1] {
            if let Ok(m) = UtilityMatrix::new(e) {
                return Ok(m);
            }
        }
    }
    Err(Error::SamplerExhausted {
        attempts: REJECTION_CAP,
        what: format!("utility error model with sigma {sigma}"),
    })
}
