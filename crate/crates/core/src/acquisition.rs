//! Lower-confidence-bound acquisition scoring.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weight of the exploration term in the lower confidence bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionParams {
    /// Nonnegative trade-off weight; 0 scores by posterior mean alone.
    pub k_weight: f64,
}

impl Default for AcquisitionParams {
    fn default() -> Self {
        AcquisitionParams { k_weight: 2.0 }
    }
}

impl AcquisitionParams {
    pub fn validate(&self) -> Result<()> {
        if !self.k_weight.is_finite() || self.k_weight < 0.0 {
            return Err(Error::invalid(format!(
                "k_weight must be nonnegative, got {}",
                self.k_weight
            )));
        }
        Ok(())
    }
}

/// Lower confidence bound `mean - k * sqrt(variance)`; lower is better.
///
/// The variance is the posterior variance, so the exploration term uses its
/// square root (the posterior standard deviation).
pub fn lcb(mean: f64, variance: f64, params: &AcquisitionParams) -> Result<f64> {
    params.validate()?;
    if variance < 0.0 || !variance.is_finite() {
        return Err(Error::invalid(format!(
            "variance must be nonnegative, got {variance}"
        )));
    }
    Ok(mean - params.k_weight * variance.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(w: f64) -> AcquisitionParams {
        AcquisitionParams { k_weight: w }
    }

    #[test]
    fn arithmetic_example() {
        assert_eq!(lcb(5.0, 4.0, &k(1.0)).unwrap(), 3.0);
    }

    #[test]
    fn zero_weight_returns_mean_exactly() {
        for mean in [-3.5, 0.0, 1e6, 0.123_456_789] {
            assert_eq!(lcb(mean, 7.0, &k(0.0)).unwrap(), mean);
        }
    }

    #[test]
    fn zero_variance_returns_mean_exactly() {
        for (mean, w) in [(2.0, 0.5), (-1.0, 3.0), (0.0, 0.0), (1e8, 10.0)] {
            assert_eq!(lcb(mean, 0.0, &k(w)).unwrap(), mean);
        }
    }

    #[test]
    fn strictly_decreasing_in_variance() {
        let mut prev = f64::INFINITY;
        for v in [0.0, 1.0, 4.0, 9.0] {
            let s = lcb(2.0, v, &k(1.5)).unwrap();
            assert!(s < prev, "score {s} not below {prev} at variance {v}");
            prev = s;
        }
    }

    #[test]
    fn strictly_increasing_in_mean() {
        let a = lcb(1.0, 2.0, &k(1.0)).unwrap();
        let b = lcb(1.1, 2.0, &k(1.0)).unwrap();
        assert!(b > a);
    }

    #[test]
    fn negative_variance_is_rejected() {
        assert!(matches!(
            lcb(0.0, -1e-9, &k(1.0)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            lcb(0.0, 1.0, &k(-0.1)),
            Err(Error::InvalidArgument(_))
        ));
    }
}
