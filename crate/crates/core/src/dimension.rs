//! Time-grid dimension reduction and fill-in.
//!
//! A horizon of `t_f` epochs is reduced to `d` evenly spaced epochs with gap
//! `phi = floor(t_f / d)`. A reduced control vector assigns one value per
//! selected epoch; the fill-in strategies reconstruct the remaining epochs.
//!
//! Between consecutive selected epochs `A = q*phi + 1` and `B = (q+1)*phi + 1`
//! the selected values stay fixed and only the interior epochs are filled.
//! When `t_f` is not divisible by `d`, the epochs after the last selected one
//! hold the last reduced value (the Gaussian-regression fill predicts them
//! from its posterior instead).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{GpModel, KernelParams};

/// Closed feasible interval for a single control value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::invalid(format!(
                "bounds must satisfy lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Bounds { lower, upper })
    }

    /// The unit interval, the default feasible region for controls.
    pub fn unit() -> Self {
        Bounds {
            lower: 0.0,
            upper: 1.0,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lower, self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Affine map onto [0, 1].
    pub fn normalize(&self, x: f64) -> f64 {
        (x - self.lower) / self.width()
    }
}

/// Even selection of `d` out of `t_f` time epochs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionSchedule {
    t_f: usize,
    d: usize,
    phi: usize,
    epochs: Vec<usize>,
}

impl ReductionSchedule {
    /// Builds the schedule `{1, phi+1, ..., (d-1)*phi + 1}` with
    /// `phi = floor(t_f / d)`. Requires `1 <= d <= t_f`.
    pub fn new(t_f: usize, d: usize) -> Result<Self> {
        if t_f == 0 || d == 0 || d > t_f {
            return Err(Error::invalid(format!(
                "reduction requires 1 <= d <= t_f, got d = {d}, t_f = {t_f}"
            )));
        }
        let phi = t_f / d;
        let epochs: Vec<usize> = (0..d).map(|q| q * phi + 1).collect();
        debug_assert!(*epochs.last().unwrap() <= t_f);
        Ok(ReductionSchedule { t_f, d, phi, epochs })
    }

    pub fn t_f(&self) -> usize {
        self.t_f
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Gap between consecutive selected epochs.
    pub fn phi(&self) -> usize {
        self.phi
    }

    /// Selected epochs, 1-based time indices.
    pub fn epochs(&self) -> &[usize] {
        &self.epochs
    }

    pub fn is_identity(&self) -> bool {
        self.d == self.t_f
    }
}

/// A control value per epoch, either on the full horizon or on a reduced
/// schedule. All values lie within the bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlStrategy {
    values: Vec<f64>,
    bounds: Bounds,
    schedule: Option<ReductionSchedule>,
}

impl ControlStrategy {
    /// A reduced strategy: one value per schedule epoch.
    pub fn reduced(values: Vec<f64>, schedule: ReductionSchedule, bounds: Bounds) -> Result<Self> {
        if values.len() != schedule.d() {
            return Err(Error::invalid(format!(
                "reduced strategy has {} values but the schedule selects {}",
                values.len(),
                schedule.d()
            )));
        }
        Self::check_values(&values, bounds)?;
        Ok(ControlStrategy {
            values,
            bounds,
            schedule: Some(schedule),
        })
    }

    /// A full-horizon strategy: one value per epoch.
    pub fn full(values: Vec<f64>, bounds: Bounds) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("control strategy must not be empty"));
        }
        Self::check_values(&values, bounds)?;
        Ok(ControlStrategy {
            values,
            bounds,
            schedule: None,
        })
    }

    /// A constant full-horizon strategy.
    pub fn constant(value: f64, t_f: usize, bounds: Bounds) -> Result<Self> {
        Self::full(vec![value; t_f.max(1)], bounds)
    }

    fn check_values(values: &[f64], bounds: Bounds) -> Result<()> {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || !bounds.contains(*v) {
                return Err(Error::invalid(format!(
                    "control value {v} at index {i} outside [{}, {}]",
                    bounds.lower, bounds.upper
                )));
            }
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn schedule(&self) -> Option<&ReductionSchedule> {
        self.schedule.as_ref()
    }

    pub fn is_full(&self) -> bool {
        self.schedule.is_none()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Strategy used to reconstruct a full-horizon control from a reduced one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillStrategy {
    /// Hold each selected value across its segment.
    Identical,
    /// Draw each interior value uniformly between the segment endpoints.
    Uniform,
    /// Interpolate linearly between the segment endpoints.
    Linear,
    /// Draw from a normal with the endpoints' mean and standard deviation.
    Normal,
    /// Predict interior values with a one-dimensional Gaussian regression
    /// over the selected epochs.
    Gp,
}

impl FillStrategy {
    pub const ALL: [FillStrategy; 5] = [
        FillStrategy::Identical,
        FillStrategy::Uniform,
        FillStrategy::Linear,
        FillStrategy::Normal,
        FillStrategy::Gp,
    ];

    /// Dispatches to the matching fill function. The random stream is only
    /// consumed by the stochastic strategies.
    pub fn fill<R: Rng>(&self, reduced: &ControlStrategy, rng: &mut R) -> Result<ControlStrategy> {
        match self {
            FillStrategy::Identical => fill_identical(reduced),
            FillStrategy::Uniform => fill_uniform(reduced, rng),
            FillStrategy::Linear => fill_linear(reduced),
            FillStrategy::Normal => fill_normal(reduced, rng),
            FillStrategy::Gp => fill_gp(reduced),
        }
    }
}

impl fmt::Display for FillStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FillStrategy::Identical => "identical",
            FillStrategy::Uniform => "uniform",
            FillStrategy::Linear => "linear",
            FillStrategy::Normal => "normal",
            FillStrategy::Gp => "gp",
        };
        f.write_str(name)
    }
}

impl FromStr for FillStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identical" => Ok(FillStrategy::Identical),
            "uniform" => Ok(FillStrategy::Uniform),
            "linear" => Ok(FillStrategy::Linear),
            "normal" => Ok(FillStrategy::Normal),
            "gp" => Ok(FillStrategy::Gp),
            other => Err(Error::invalid(format!(
                "unknown fill strategy '{other}' (expected identical|uniform|linear|normal|gp)"
            ))),
        }
    }
}

fn reduced_parts(reduced: &ControlStrategy) -> Result<(&ReductionSchedule, &[f64])> {
    let schedule = reduced
        .schedule()
        .ok_or_else(|| Error::invalid("fill-in requires a reduced strategy with a schedule"))?;
    Ok((schedule, reduced.values()))
}

/// Fills every segment and the trailing epochs with `interior(q, t)` for the
/// positions strictly between selected epochs, keeping the selected values.
fn fill_segments(
    reduced: &ControlStrategy,
    mut interior: impl FnMut(usize, usize) -> f64,
    mut trailing: impl FnMut(usize) -> f64,
) -> Result<ControlStrategy> {
    let (schedule, values) = reduced_parts(reduced)?;
    let t_f = schedule.t_f();
    let epochs = schedule.epochs();
    let mut full = vec![0.0; t_f];
    for (q, &e) in epochs.iter().enumerate() {
        full[e - 1] = values[q];
        if q + 1 < epochs.len() {
            for t in e + 1..epochs[q + 1] {
                full[t - 1] = interior(q, t);
            }
        }
    }
    for t in epochs[epochs.len() - 1] + 1..=t_f {
        full[t - 1] = trailing(t);
    }
    ControlStrategy::full(full, reduced.bounds())
}

/// Holds each selected value across its segment; trailing epochs hold the
/// last selected value.
pub fn fill_identical(reduced: &ControlStrategy) -> Result<ControlStrategy> {
    let (_, values) = reduced_parts(reduced)?;
    let last = *values.last().unwrap();
    fill_segments(reduced, |q, _| values[q], |_| last)
}

/// Draws interior values uniformly between the segment endpoints. Equal
/// endpoints produce exactly that value.
pub fn fill_uniform<R: Rng>(reduced: &ControlStrategy, rng: &mut R) -> Result<ControlStrategy> {
    let (_, values) = reduced_parts(reduced)?;
    let values = values.to_vec();
    let last = *values.last().unwrap();
    fill_segments(
        reduced,
        |q, _| {
            let (a, b) = (values[q], values[q + 1]);
            if a == b {
                a
            } else {
                rng.random_range(a.min(b)..a.max(b))
            }
        },
        |_| last,
    )
}

/// Linear interpolation between segment endpoints; exact on affine inputs.
/// Trailing epochs extrapolate as a constant.
pub fn fill_linear(reduced: &ControlStrategy) -> Result<ControlStrategy> {
    let (schedule, values) = reduced_parts(reduced)?;
    let phi = schedule.phi() as f64;
    let epochs = schedule.epochs().to_vec();
    let values = values.to_vec();
    let last = *values.last().unwrap();
    fill_segments(
        reduced,
        |q, t| {
            let a = values[q];
            let b = values[q + 1];
            let m = (t - epochs[q] + 1) as f64;
            a + (m - 1.0) * (b - a) / phi
        },
        |_| last,
    )
}

/// Draws interior values from a normal with the endpoints' mean and their
/// population standard deviation `|a - b| / 2`, clamped to the bounds.
pub fn fill_normal<R: Rng>(reduced: &ControlStrategy, rng: &mut R) -> Result<ControlStrategy> {
    let (_, values) = reduced_parts(reduced)?;
    let bounds = reduced.bounds();
    let values = values.to_vec();
    let last = *values.last().unwrap();
    fill_segments(
        reduced,
        |q, _| {
            let (a, b) = (values[q], values[q + 1]);
            let mean = 0.5 * (a + b);
            let std = 0.5 * (a - b).abs();
            if std == 0.0 {
                mean
            } else {
                let normal = Normal::new(mean, std).expect("finite normal parameters");
                bounds.clamp(normal.sample(rng))
            }
        },
        |_| last,
    )
}

/// Predicts all epochs with a one-dimensional Gaussian regression over
/// normalized epoch times, clamped to the bounds.
///
/// The regression's prior mean is the mean of the reduced values and its
/// length scale spans two segment gaps, which keeps the Gram matrix well
/// conditioned and reproduces the selected values to about 1e-9.
pub fn fill_gp(reduced: &ControlStrategy) -> Result<ControlStrategy> {
    let (schedule, values) = reduced_parts(reduced)?;
    let bounds = reduced.bounds();
    let t_f = schedule.t_f();
    let span = (t_f - 1).max(1) as f64;
    let times: Vec<Vec<f64>> = schedule
        .epochs()
        .iter()
        .map(|&e| vec![(e - 1) as f64 / span])
        .collect();
    let kernel = KernelParams {
        length_scale: (2.0 * schedule.phi() as f64 / span).max(1e-3),
        jitter: 1e-10,
    };
    let prior = values.iter().sum::<f64>() / values.len() as f64;
    let model = GpModel::fit(times, values.to_vec(), prior, kernel)?;
    let mut full = Vec::with_capacity(t_f);
    for t in 1..=t_f {
        let (mean, _) = model.posterior(&[(t - 1) as f64 / span])?;
        full.push(bounds.clamp(mean));
    }
    ControlStrategy::full(full, bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn strategy(values: Vec<f64>, t_f: usize, bounds: Bounds) -> ControlStrategy {
        let schedule = ReductionSchedule::new(t_f, values.len()).unwrap();
        ControlStrategy::reduced(values, schedule, bounds).unwrap()
    }

    #[test]
    fn schedule_selects_even_epochs() {
        let s = ReductionSchedule::new(100, 20).unwrap();
        assert_eq!(s.phi(), 5);
        let expected: Vec<usize> = (0..20).map(|q| 1 + 5 * q).collect();
        assert_eq!(s.epochs(), expected.as_slice());
        assert_eq!(*s.epochs().last().unwrap(), 96);
    }

    #[test]
    fn schedule_identity_when_d_equals_t_f() {
        let s = ReductionSchedule::new(100, 100).unwrap();
        assert_eq!(s.phi(), 1);
        assert!(s.is_identity());
        let expected: Vec<usize> = (1..=100).collect();
        assert_eq!(s.epochs(), expected.as_slice());
    }

    #[test]
    fn schedule_with_remainder() {
        let s = ReductionSchedule::new(100, 30).unwrap();
        assert_eq!(s.phi(), 3);
        assert_eq!(s.epochs()[0], 1);
        assert_eq!(s.epochs()[1], 4);
        assert_eq!(*s.epochs().last().unwrap(), 88);
    }

    #[test]
    fn schedule_rejects_bad_dimensions() {
        assert!(ReductionSchedule::new(10, 0).is_err());
        assert!(ReductionSchedule::new(10, 11).is_err());
        assert!(ReductionSchedule::new(0, 1).is_err());
    }

    #[test]
    fn identical_fill_holds_values() {
        let r = strategy(vec![0.3, 0.7], 4, Bounds::unit());
        let full = fill_identical(&r).unwrap();
        assert_eq!(full.values(), &[0.3, 0.3, 0.7, 0.7]);
    }

    #[test]
    fn identical_fill_is_identity_at_full_dimension() {
        let r = strategy(vec![0.1, 0.5, 0.9], 3, Bounds::unit());
        let full = fill_identical(&r).unwrap();
        assert_eq!(full.values(), r.values());
    }

    #[test]
    fn identical_fill_keeps_constants() {
        let r = strategy(vec![0.4; 7], 23, Bounds::unit());
        let full = fill_identical(&r).unwrap();
        assert!(full.values().iter().all(|&v| v == 0.4));
    }

    #[test]
    fn uniform_fill_respects_segment_intervals() {
        let r = strategy(vec![0.2, 0.6], 12, Bounds::unit());
        let mut rng = StdRng::seed_from_u64(3);
        let full = fill_uniform(&r, &mut rng).unwrap();
        for t in 2..=6 {
            let v = full.values()[t - 1];
            assert!((0.2..=0.6).contains(&v), "interior value {v}");
        }
        assert_eq!(full.values()[0], 0.2);
        assert_eq!(full.values()[6], 0.6);
        // Trailing epochs hold the last value.
        for t in 8..=12 {
            assert_eq!(full.values()[t - 1], 0.6);
        }
    }

    #[test]
    fn uniform_fill_degenerate_interval_is_exact() {
        let r = strategy(vec![0.35, 0.35, 0.35], 9, Bounds::unit());
        let mut rng = StdRng::seed_from_u64(1);
        let full = fill_uniform(&r, &mut rng).unwrap();
        assert!(full.values().iter().all(|&v| v == 0.35));
    }

    #[test]
    fn stochastic_fills_are_seed_reproducible() {
        let r = strategy(vec![0.1, 0.9, 0.4, 0.6], 20, Bounds::unit());
        for strat in [FillStrategy::Uniform, FillStrategy::Normal] {
            let a = strat.fill(&r, &mut StdRng::seed_from_u64(8)).unwrap();
            let b = strat.fill(&r, &mut StdRng::seed_from_u64(8)).unwrap();
            assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn linear_fill_interpolates() {
        // phi = 5: interior positions m = 2..=5 take (m-1)/5.
        let r = strategy(vec![0.0, 1.0], 10, Bounds::unit());
        let full = fill_linear(&r).unwrap();
        for (m, want) in [(2usize, 0.2), (3, 0.4), (4, 0.6), (5, 0.8)] {
            let got = full.values()[m - 1];
            assert!((got - want).abs() < 1e-12, "position {m}: {got} vs {want}");
        }
        assert_eq!(full.values()[0], 0.0);
        assert_eq!(full.values()[5], 1.0);
    }

    #[test]
    fn linear_fill_flat_segments_stay_flat() {
        let r = strategy(vec![0.25, 0.25], 8, Bounds::unit());
        let full = fill_linear(&r).unwrap();
        assert!(full.values().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn linear_fill_without_interior_is_identity() {
        let r = strategy(vec![0.2, 0.8, 0.5], 3, Bounds::unit());
        let full = fill_linear(&r).unwrap();
        assert_eq!(full.values(), r.values());
    }

    #[test]
    fn linear_fill_is_exact_on_affine_inputs() {
        let t_f = 50;
        let d = 10;
        let schedule = ReductionSchedule::new(t_f, d).unwrap();
        let affine = |t: usize| 0.1 + 0.012 * (t as f64 - 1.0);
        let values: Vec<f64> = schedule.epochs().iter().map(|&e| affine(e)).collect();
        let r = ControlStrategy::reduced(values, schedule.clone(), Bounds::unit()).unwrap();
        let full = fill_linear(&r).unwrap();
        let last_epoch = *schedule.epochs().last().unwrap();
        for t in 1..=last_epoch {
            let got = full.values()[t - 1];
            let want = affine(t);
            assert!((got - want).abs() < 1e-12, "epoch {t}: {got} vs {want}");
        }
    }

    #[test]
    fn normal_fill_degenerate_endpoints_are_exact() {
        let r = strategy(vec![0.6, 0.6], 10, Bounds::unit());
        let mut rng = StdRng::seed_from_u64(2);
        let full = fill_normal(&r, &mut rng).unwrap();
        assert!(full.values().iter().all(|&v| v == 0.6));
    }

    #[test]
    fn normal_fill_matches_two_point_moments() {
        // Wide bounds so the clamp never bites; endpoints 0 and 1 give a
        // normal with mean 0.5 and population standard deviation 0.5.
        let bounds = Bounds::new(-10.0, 11.0).unwrap();
        let t_f = 20000;
        let schedule = ReductionSchedule::new(t_f, 2).unwrap();
        let r = ControlStrategy::reduced(vec![0.0, 1.0], schedule, bounds).unwrap();
        let mut rng = StdRng::seed_from_u64(77);
        let full = fill_normal(&r, &mut rng).unwrap();
        let interior = &full.values()[1..t_f / 2 - 1];
        assert!(interior.len() > 9000);
        let mean = interior.iter().sum::<f64>() / interior.len() as f64;
        assert!((mean - 0.5).abs() < 0.02, "sample mean {mean}");
        let var = interior.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
            / interior.len() as f64;
        assert!((var.sqrt() - 0.5).abs() < 0.02, "sample std {}", var.sqrt());
    }

    #[test]
    fn gp_fill_interpolates_at_full_dimension() {
        let values: Vec<f64> = (0..40).map(|i| 0.5 + 0.4 * (i as f64 * 0.3).sin()).collect();
        let r = strategy(values.clone(), 40, Bounds::unit());
        let full = fill_gp(&r).unwrap();
        for (got, want) in full.values().iter().zip(&values) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn gp_fill_reproduces_constants() {
        let r = strategy(vec![0.42; 8], 50, Bounds::unit());
        let full = fill_gp(&r).unwrap();
        for v in full.values() {
            assert!((v - 0.42).abs() < 1e-6, "got {v}");
        }
    }

    #[test]
    fn gp_fill_stays_in_bounds_on_monotone_input() {
        let values: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
        let r = strategy(values, 47, Bounds::unit());
        let full = fill_gp(&r).unwrap();
        assert!(full.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn fill_requires_a_schedule() {
        let full = ControlStrategy::full(vec![0.5; 4], Bounds::unit()).unwrap();
        assert!(fill_identical(&full).is_err());
    }

    #[test]
    fn all_strategies_coincide_at_full_dimension() {
        let values: Vec<f64> = (0..12).map(|i| 0.1 + 0.07 * i as f64).collect();
        let r = strategy(values.clone(), 12, Bounds::unit());
        let mut rng = StdRng::seed_from_u64(5);
        for strat in FillStrategy::ALL {
            let full = strat.fill(&r, &mut rng).unwrap();
            for (got, want) in full.values().iter().zip(&values) {
                let tol = if strat == FillStrategy::Gp { 1e-6 } else { 0.0 };
                assert!(
                    (got - want).abs() <= tol,
                    "{strat}: {got} vs {want}"
                );
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn fills_preserve_length_bounds_and_epochs(
                seed in 0u64..1000,
                t_f in 2usize..120,
                d_frac in 0.01f64..1.0,
            ) {
                let d = ((t_f as f64 * d_frac).ceil() as usize).clamp(1, t_f);
                let mut rng = StdRng::seed_from_u64(seed);
                let schedule = ReductionSchedule::new(t_f, d).unwrap();
                let values: Vec<f64> =
                    (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
                let r = ControlStrategy::reduced(values.clone(), schedule.clone(), Bounds::unit())
                    .unwrap();
                for strat in FillStrategy::ALL {
                    let full = strat.fill(&r, &mut rng).unwrap();
                    prop_assert_eq!(full.values().len(), t_f);
                    prop_assert!(full.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
                    let tol = if strat == FillStrategy::Gp { 1e-6 } else { 0.0 };
                    for (q, &e) in schedule.epochs().iter().enumerate() {
                        let got = full.values()[e - 1];
                        prop_assert!(
                            (got - values[q]).abs() <= tol,
                            "{} kept {} instead of {} at epoch {}", strat, got, values[q], e
                        );
                    }
                }
            }
        }
    }
}
