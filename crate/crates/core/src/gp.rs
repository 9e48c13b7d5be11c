//! Gaussian-process surrogate with a Matern 5/2 kernel.
//!
//! The model is fit once per dataset (no hyperparameter learning): the Gram
//! matrix is factorized by Cholesky with an escalating diagonal jitter, and
//! posterior queries reuse the stored factor. Fitted models are immutable, so
//! posterior evaluation is safe from many threads at once.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap for the jitter escalation during factorization.
pub const MAX_JITTER: f64 = 1e-4;

const SQRT_5: f64 = 2.236_067_977_499_79;

/// Matern 5/2 kernel hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Length scale of the kernel. Inputs are expected in normalized
    /// coordinates, so 1.0 is a sensible default.
    pub length_scale: f64,
    /// Initial diagonal jitter; multiplied by 10 on factorization failure up
    /// to [`MAX_JITTER`].
    pub jitter: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            length_scale: 1.0,
            jitter: 1e-8,
        }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        if !self.length_scale.is_finite() || self.length_scale <= 0.0 {
            return Err(Error::invalid(format!(
                "length_scale must be positive, got {}",
                self.length_scale
            )));
        }
        if !(self.jitter > 0.0 && self.jitter <= MAX_JITTER) {
            return Err(Error::invalid(format!(
                "jitter must lie in (0, {MAX_JITTER:e}], got {}",
                self.jitter
            )));
        }
        Ok(())
    }
}

/// Matern 5/2 covariance between two points:
/// `(1 + sqrt(5) r/l + 5/3 (r/l)^2) exp(-sqrt(5) r/l)` with `r = |a - b|`.
///
/// The value is 1 at `r = 0` and decays monotonically with distance.
pub fn matern52(a: &[f64], b: &[f64], params: &KernelParams) -> Result<f64> {
    params.validate()?;
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "kernel inputs have mismatched dimensions {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(matern52_raw(a, b, params.length_scale))
}

pub(crate) fn matern52_raw(a: &[f64], b: &[f64], length_scale: f64) -> f64 {
    let mut sq = 0.0;
    for (x, y) in a.iter().zip(b) {
        let diff = x - y;
        sq += diff * diff;
    }
    let r = sq.sqrt();
    let s = SQRT_5 * r / length_scale;
    let q = r / length_scale;
    (1.0 + s + (5.0 / 3.0) * q * q) * (-s).exp()
}

/// A fitted Gaussian-process regression model.
///
/// Holds the training set, the lower Cholesky factor of `K + jitter*I`, and
/// the precomputed solve `alpha = (K + jitter*I)^-1 (y - prior_mean)`.
#[derive(Clone, Debug)]
pub struct GpModel {
    points: Vec<Vec<f64>>,
    observations: Vec<f64>,
    prior_mean: f64,
    kernel: KernelParams,
    chol: Option<Cholesky<f64, Dyn>>,
    alpha: DVector<f64>,
}

impl GpModel {
    /// Fits the model. The jitter recorded in [`GpModel::kernel`] is the
    /// effective value after any escalation.
    pub fn fit(
        points: Vec<Vec<f64>>,
        observations: Vec<f64>,
        prior_mean: f64,
        kernel: KernelParams,
    ) -> Result<Self> {
        kernel.validate()?;
        if points.len() != observations.len() {
            return Err(Error::invalid(format!(
                "{} points but {} observations",
                points.len(),
                observations.len()
            )));
        }
        if !prior_mean.is_finite() {
            return Err(Error::invalid("prior mean must be finite"));
        }
        let dim = points.first().map(Vec::len);
        for p in &points {
            if Some(p.len()) != dim {
                return Err(Error::invalid("training points have mixed dimensions"));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid("training points must be finite"));
            }
        }
        if observations.iter().any(|y| !y.is_finite()) {
            return Err(Error::invalid("observations must be finite"));
        }

        let n = points.len();
        if n == 0 {
            return Ok(GpModel {
                points,
                observations,
                prior_mean,
                kernel,
                chol: None,
                alpha: DVector::zeros(0),
            });
        }

        let gram = DMatrix::from_fn(n, n, |i, j| {
            matern52_raw(&points[i], &points[j], kernel.length_scale)
        });

        let mut jitter = kernel.jitter;
        let (chol, effective_jitter) = loop {
            let mut k = gram.clone();
            for i in 0..n {
                k[(i, i)] += jitter;
            }
            match Cholesky::new(k) {
                Some(c) => break (c, jitter),
                None => {
                    jitter *= 10.0;
                    if jitter > MAX_JITTER * (1.0 + 1e-12) {
                        return Err(Error::SingularKernel { jitter: MAX_JITTER });
                    }
                }
            }
        };

        let centered = DVector::from_iterator(n, observations.iter().map(|y| y - prior_mean));
        let alpha = chol.solve(&centered);

        Ok(GpModel {
            points,
            observations,
            prior_mean,
            kernel: KernelParams {
                jitter: effective_jitter,
                ..kernel
            },
            chol: Some(chol),
            alpha,
        })
    }

    /// Posterior mean and variance at `query`.
    ///
    /// An empty model returns the prior: `(prior_mean, 1.0)`. The variance is
    /// clamped below at zero.
    pub fn posterior(&self, query: &[f64]) -> Result<(f64, f64)> {
        let (mean, raw_var) = self.posterior_raw(query)?;
        Ok((mean, raw_var.max(0.0)))
    }

    /// Same as [`GpModel::posterior`] but without the variance clamp; used to
    /// check how negative rounding can drive the raw value.
    pub(crate) fn posterior_raw(&self, query: &[f64]) -> Result<(f64, f64)> {
        if query.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("query point must be finite"));
        }
        let Some(chol) = &self.chol else {
            return Ok((self.prior_mean, 1.0));
        };
        if query.len() != self.points[0].len() {
            return Err(Error::invalid(format!(
                "query dimension {} does not match model dimension {}",
                query.len(),
                self.points[0].len()
            )));
        }
        let n = self.points.len();
        let k_star = DVector::from_fn(n, |i, _| {
            matern52_raw(query, &self.points[i], self.kernel.length_scale)
        });
        let mean = self.prior_mean + k_star.dot(&self.alpha);
        let solved = chol.solve(&k_star);
        let variance = matern52_raw(query, query, self.kernel.length_scale) - k_star.dot(&solved);
        Ok((mean, variance))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Dimension of the training points, or `None` for an empty model.
    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(Vec::len)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    /// Kernel parameters, with `jitter` reflecting the effective value used
    /// by the factorization.
    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    /// Lower Cholesky factor of `K + jitter*I`, if the model is nonempty.
    pub fn factor_l(&self) -> Option<DMatrix<f64>> {
        self.chol.as_ref().map(|c| c.l())
    }

    /// Precomputed `(K + jitter*I)^-1 (y - prior_mean)`.
    pub fn alpha(&self) -> &[f64] {
        self.alpha.as_slice()
    }
}
