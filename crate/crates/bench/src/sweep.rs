//! Experiment sweeps over reduced dimension, fill strategy, and seed.
//!
//! Every cell runs the optimizer once. Accumulated objective values and
//! running times are reported both raw and as ratios against the reference
//! dimension's cell with the same fill and seed, so the scaling behavior
//! reads off directly. Cells are ordered by (d, fill, seed) regardless of
//! how they were executed.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use epibo::dimension::FillStrategy;
use epibo::error::{Error, Result};
use epibo::optimizer::{run, OptimizerConfig, RunReport};

/// A sweep: the base configuration and the grid to vary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: OptimizerConfig,
    pub d_values: Vec<usize>,
    pub fill_strategies: Vec<FillStrategy>,
    pub seeds: Vec<u64>,
    /// Denominator dimension of the ratio columns.
    pub reference_d: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d_values.is_empty() || self.fill_strategies.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config(
                "sweep needs at least one d value, fill strategy, and seed".into(),
            ));
        }
        if !self.d_values.contains(&self.reference_d) {
            return Err(Error::Config(format!(
                "reference_d = {} is not among d_values {:?}",
                self.reference_d, self.d_values
            )));
        }
        Ok(())
    }
}

/// Ratio of an accumulated objective against the reference dimension's.
pub fn aofv_ratio(aofv_d: f64, aofv_ref: f64) -> Result<f64> {
    if !aofv_ref.is_finite() || aofv_ref <= 0.0 {
        return Err(Error::invalid_ratio("AOFV", aofv_ref));
    }
    Ok(aofv_d / aofv_ref)
}

/// Ratio of a running time against the reference dimension's.
pub fn rt_ratio(rt_d: f64, rt_ref: f64) -> Result<f64> {
    if !rt_ref.is_finite() || rt_ref <= 0.0 {
        return Err(Error::invalid_ratio("running time", rt_ref));
    }
    Ok(rt_d / rt_ref)
}

trait RatioError {
    fn invalid_ratio(kind: &str, denominator: f64) -> Error;
}

impl RatioError for Error {
    fn invalid_ratio(kind: &str, denominator: f64) -> Error {
        Error::InvalidArgument(format!(
            "{kind} ratio needs a positive denominator, got {denominator}"
        ))
    }
}

/// One successful sweep cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub model: String,
    pub d: usize,
    pub fill: FillStrategy,
    pub seed: u64,
    pub aofv: f64,
    pub rt_seconds: f64,
    pub aofv_ratio: f64,
    pub rt_ratio: f64,
}

/// A cell that failed to run or could not be related to its reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub model: String,
    pub d: usize,
    pub fill: FillStrategy,
    pub seed: u64,
    pub message: String,
}

/// Results of a sweep, ordered by (d, fill, seed).
#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    pub cells: Vec<CellResult>,
    /// Per-cell run reports, aligned with `cells`.
    pub reports: Vec<RunReport>,
    pub failures: Vec<CellFailure>,
}

impl SweepReport {
    pub fn has_failures(&self) -> bool {
        !self.failures.is_empty()
    }

    /// Median of the running times at the given dimension.
    pub fn median_rt(&self, d: usize) -> Option<f64> {
        median(self.cells.iter().filter(|c| c.d == d).map(|c| c.rt_seconds))
    }

    /// Median of the accumulated objectives at the given dimension.
    pub fn median_aofv(&self, d: usize) -> Option<f64> {
        median(self.cells.iter().filter(|c| c.d == d).map(|c| c.aofv))
    }
}

fn median(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut values: Vec<f64> = values.collect();
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

struct RawCell {
    d: usize,
    fill: FillStrategy,
    seed: u64,
    outcome: Result<(RunReport, f64)>,
}

/// Runs every cell of the grid. With `parallel` set, cells execute on the
/// rayon pool; timings are cleanest when it is off.
pub fn run_sweep(spec: &SweepSpec, parallel: bool) -> Result<SweepReport> {
    spec.validate()?;
    let model = spec.base.instance.model.name().to_string();

    let mut grid = Vec::new();
    for &d in &spec.d_values {
        for &fill in &spec.fill_strategies {
            for &seed in &spec.seeds {
                grid.push((d, fill, seed));
            }
        }
    }

    let execute = |&(d, fill, seed): &(usize, FillStrategy, u64)| -> RawCell {
        let mut config = spec.base.clone();
        config.d = d;
        config.fill_strategy = fill;
        config.seed = seed;
        let started = Instant::now();
        let outcome = run(&config).map(|report| {
            let rt = started.elapsed().as_secs_f64();
            (report, rt)
        });
        RawCell {
            d,
            fill,
            seed,
            outcome,
        }
    };

    let raw: Vec<RawCell> = if parallel {
        grid.par_iter().map(execute).collect()
    } else {
        grid.iter().map(execute).collect()
    };

    // Reference values per (fill, seed) for the ratio columns.
    let reference: Vec<(FillStrategy, u64, f64, f64)> = raw
        .iter()
        .filter(|cell| cell.d == spec.reference_d)
        .filter_map(|cell| {
            cell.outcome
                .as_ref()
                .ok()
                .map(|(report, rt)| (cell.fill, cell.seed, report.best_objective_full, *rt))
        })
        .collect();

    let mut report = SweepReport::default();
    for cell in raw {
        let failure = |message: String| CellFailure {
            model: model.clone(),
            d: cell.d,
            fill: cell.fill,
            seed: cell.seed,
            message,
        };
        match cell.outcome {
            Err(err) => report.failures.push(failure(err.to_string())),
            Ok((run_report, rt)) => {
                let aofv = run_report.best_objective_full;
                let reference_cell = reference
                    .iter()
                    .find(|(f, s, _, _)| *f == cell.fill && *s == cell.seed);
                let Some(&(_, _, aofv_ref, rt_ref)) = reference_cell else {
                    report
                        .failures
                        .push(failure(format!("reference cell d = {} failed", spec.reference_d)));
                    continue;
                };
                let ratios = aofv_ratio(aofv, aofv_ref)
                    .and_then(|ar| rt_ratio(rt, rt_ref).map(|rr| (ar, rr)));
                match ratios {
                    Err(err) => report.failures.push(failure(err.to_string())),
                    Ok((aofv_ratio, rt_ratio)) => {
                        report.cells.push(CellResult {
                            model: model.clone(),
                            d: cell.d,
                            fill: cell.fill,
                            seed: cell.seed,
                            aofv,
                            rt_seconds: rt,
                            aofv_ratio,
                            rt_ratio,
                        });
                        report.reports.push(run_report);
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use epibo::epidemic::EpidemicInstance;

    fn tiny_spec() -> SweepSpec {
        let mut base = OptimizerConfig::new(EpidemicInstance::default_seir());
        base.instance.objective.t_f = 20;
        base.d = 20;
        base.iterations = 3;
        base.n_init = 3;
        base.n_zones = 3;
        base.m_points = 2;
        base.n_random = 5;
        base.adam.steps = 3;
        SweepSpec {
            base,
            d_values: vec![5, 20],
            fill_strategies: vec![FillStrategy::Linear],
            seeds: vec![0, 1],
            reference_d: 20,
        }
    }

    #[test]
    fn ratio_identities_hold_exactly() {
        assert_eq!(aofv_ratio(3.25, 3.25).unwrap(), 1.0);
        assert_eq!(rt_ratio(0.125, 0.125).unwrap(), 1.0);
    }

    #[test]
    fn nonpositive_denominators_are_rejected() {
        assert!(matches!(
            aofv_ratio(1.0, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            rt_ratio(1.0, -2.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sweep_orders_cells_and_fills_ratios() {
        let spec = tiny_spec();
        let report = run_sweep(&spec, false).unwrap();
        assert!(!report.has_failures(), "{:?}", report.failures);
        assert_eq!(report.cells.len(), 4);
        assert_eq!(report.reports.len(), 4);
        let order: Vec<(usize, u64)> = report.cells.iter().map(|c| (c.d, c.seed)).collect();
        assert_eq!(order, vec![(5, 0), (5, 1), (20, 0), (20, 1)]);
        for cell in report.cells.iter().filter(|c| c.d == 20) {
            assert_eq!(cell.aofv_ratio, 1.0);
            assert_eq!(cell.rt_ratio, 1.0);
        }
        for cell in &report.cells {
            assert!(cell.rt_seconds > 0.0);
            assert!(cell.aofv.is_finite());
        }
    }

    #[test]
    fn sweep_aofv_columns_are_reproducible() {
        let spec = tiny_spec();
        let a = run_sweep(&spec, false).unwrap();
        let b = run_sweep(&spec, true).unwrap();
        let aofv_a: Vec<f64> = a.cells.iter().map(|c| c.aofv).collect();
        let aofv_b: Vec<f64> = b.cells.iter().map(|c| c.aofv).collect();
        for (x, y) in aofv_a.iter().zip(&aofv_b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn median_helpers_aggregate_per_dimension() {
        let spec = tiny_spec();
        let report = run_sweep(&spec, false).unwrap();
        assert!(report.median_rt(5).unwrap() > 0.0);
        assert!(report.median_aofv(20).unwrap() > 0.0);
        assert!(report.median_rt(999).is_none());
    }
}
