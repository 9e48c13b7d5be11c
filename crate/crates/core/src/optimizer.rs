//! The full optimization loop.
//!
//! A run proceeds in four stages: a random initial design on the reduced
//! grid, the sampling loop (bandit and random candidates scored by the lower
//! confidence bound of a Gaussian-process surrogate, one winner evaluated and
//! added to the model per iteration), an Adam local search from the best
//! recorded point, and finally fill-in to the full horizon plus one
//! full-horizon evaluation.
//!
//! The surrogate always sees normalized inputs (coordinates mapped to the
//! unit cube) and standardized observations (zero mean, unit variance), so
//! the kernel length scale and the acquisition weight are scale-free.
//! Scoring ranks candidates within one iteration, which standardization does
//! not change.
//!
//! Runs are deterministic given the seed: every stochastic stage draws from
//! its own derived substream, and parallel candidate scoring reduces its
//! results in candidate order. The stochastic SIS objective draws a fresh
//! noise substream per evaluation, except during the local search where every
//! evaluation reuses one frozen substream (common random numbers) so that
//! finite differences see a deterministic function.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquisition::{lcb, AcquisitionParams};
use crate::dimension::{Bounds, ControlStrategy, FillStrategy, ReductionSchedule};
use crate::epidemic::{evaluate_full, evaluate_reduced, EpidemicInstance};
use crate::error::{Error, Result};
use crate::gp::{GpModel, KernelParams};
use crate::local_search::{adam_search, AdamConfig};
use crate::rng::{derive_seed, substream, Domain};
use crate::sampling::{
    sample_bandit, sample_random, select_winner, Candidate, CandidateOrigin, RandomSearchState,
    ZoneState,
};

/// Everything a run needs. Construct with [`OptimizerConfig::new`] and adjust
/// fields as needed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub instance: EpidemicInstance,
    /// Reduced dimension; one control value per selected epoch.
    pub d: usize,
    /// Sampling-loop budget.
    pub iterations: usize,
    pub n_zones: usize,
    /// Initial rewards (points per zone) of the bandit sampler.
    pub m_points: u32,
    /// Random-search candidates per iteration.
    pub n_random: usize,
    /// Contraction of the random-search interval's lower end on bandit wins.
    pub shrink_lower: f64,
    /// Contraction of the upper end on bandit wins.
    pub shrink_upper: f64,
    /// Contract only the side farther from the winning bandit point.
    pub adaptive_shrink: bool,
    pub acquisition: AcquisitionParams,
    pub kernel: KernelParams,
    pub adam: AdamConfig,
    pub fill_strategy: FillStrategy,
    /// Size of the random initial design.
    pub n_init: usize,
    pub seed: u64,
}

impl OptimizerConfig {
    /// Defaults for the given problem: no dimension reduction, 100
    /// iterations, 10 zones of 5 points, 50 random candidates, linear fill.
    pub fn new(instance: EpidemicInstance) -> Self {
        let d = instance.objective.t_f;
        OptimizerConfig {
            instance,
            d,
            iterations: 100,
            n_zones: 10,
            m_points: 5,
            n_random: 50,
            shrink_lower: 0.0,
            shrink_upper: 0.0,
            adaptive_shrink: false,
            acquisition: AcquisitionParams::default(),
            kernel: KernelParams::default(),
            adam: AdamConfig::default(),
            fill_strategy: FillStrategy::Linear,
            n_init: 10,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.instance.validate()?;
        let t_f = self.instance.objective.t_f;
        if self.d == 0 || self.d > t_f {
            return Err(Error::invalid(format!(
                "reduced dimension must satisfy 1 <= d <= {t_f}, got {}",
                self.d
            )));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("need at least one iteration"));
        }
        if self.n_init < 2 {
            return Err(Error::invalid("initial design needs at least two points"));
        }
        if self.n_zones == 0 {
            return Err(Error::invalid("need at least one zone"));
        }
        if self.n_zones as u32 * self.m_points == 0 && self.n_random == 0 {
            return Err(Error::invalid(
                "no candidates per iteration; raise m_points or n_random",
            ));
        }
        if !(self.shrink_lower >= 0.0 && self.shrink_upper >= 0.0) {
            return Err(Error::invalid("shrink amounts must be nonnegative"));
        }
        self.acquisition.validate()?;
        self.kernel.validate()?;
        self.adam.validate()?;
        Ok(())
    }
}

/// One sampling-loop iteration as recorded in the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// The evaluated point (the iteration's winner).
    pub point: Vec<f64>,
    /// Reduced objective value of the point.
    pub objective: f64,
    pub bandit_won: bool,
    /// Zone rewards after this iteration's update.
    pub rewards: Vec<u32>,
    /// Random-search interval after this iteration's contraction.
    pub lower: f64,
    pub upper: f64,
}

/// Outcome of a run, serializable as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Best reduced strategy after local search.
    pub best_reduced: Vec<f64>,
    /// Best strategy filled in to the full horizon.
    pub best_full: Vec<f64>,
    /// Full-horizon accumulated objective of `best_full`.
    pub best_objective_full: f64,
    /// Reduced objective of `best_reduced`.
    pub best_objective_reduced: f64,
    /// Reduced objectives of the initial design.
    pub initial_objectives: Vec<f64>,
    pub trace: Vec<IterationRecord>,
    /// Training points held by the surrogate at the end of the loop.
    pub gp_points: usize,
    pub wall_time_seconds: f64,
    pub seed: u64,
    pub config: OptimizerConfig,
    /// Raw configuration file text, when the run came from one.
    pub config_text: Option<String>,
}

fn fit_surrogate(
    points: &[Vec<f64>],
    observations: &[f64],
    bounds: Bounds,
    kernel: KernelParams,
) -> Result<GpModel> {
    let normalized: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().map(|&x| bounds.normalize(x)).collect())
        .collect();
    let n = observations.len() as f64;
    let mean = observations.iter().sum::<f64>() / n;
    let variance = observations.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    let scale = if variance.sqrt() > 1e-12 {
        variance.sqrt()
    } else {
        1.0
    };
    let standardized: Vec<f64> = observations.iter().map(|y| (y - mean) / scale).collect();
    GpModel::fit(normalized, standardized, 0.0, kernel)
}

fn score_candidates(
    model: &GpModel,
    acquisition: &AcquisitionParams,
    bounds: Bounds,
    candidates: &mut [Candidate],
) -> Result<()> {
    candidates.par_iter_mut().try_for_each(|c| {
        let normalized: Vec<f64> = c.point.iter().map(|&x| bounds.normalize(x)).collect();
        let (mean, variance) = model.posterior(&normalized)?;
        c.acq_value = Some(lcb(mean, variance, acquisition)?);
        Ok(())
    })
}

fn best_candidate(candidates: &[Candidate]) -> Option<usize> {
    extreme_candidate(candidates, |a, b| a < b)
}

fn worst_candidate(candidates: &[Candidate]) -> Option<usize> {
    extreme_candidate(candidates, |a, b| a > b)
}

fn extreme_candidate(candidates: &[Candidate], beats: impl Fn(f64, f64) -> bool) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let score = c.acq_value.expect("candidates are scored before selection");
        if best.is_none_or(|(_, s)| beats(score, s)) {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i)
}

/// Nudges the point away from already-visited points (closer than 1e-9 in
/// every coordinate) so the kernel matrix stays well conditioned.
fn separate_from_visited(
    point: &mut [f64],
    visited: &[Vec<f64>],
    bounds: Bounds,
    rng: &mut StdRng,
) {
    const TOL: f64 = 1e-9;
    let too_close = |p: &[f64]| {
        visited
            .iter()
            .any(|q| q.iter().zip(p).all(|(a, b)| (a - b).abs() <= TOL))
    };
    let mut attempts = 0;
    while too_close(point) && attempts < 32 {
        for x in point.iter_mut() {
            *x = bounds.clamp(*x + rng.random_range(-1e-6..1e-6));
        }
        attempts += 1;
    }
    if too_close(point) {
        for x in point.iter_mut() {
            *x = rng.random_range(bounds.lower..bounds.upper);
        }
    }
}

struct LoopOutcome {
    points: Vec<Vec<f64>>,
    observations: Vec<f64>,
    initial_objectives: Vec<f64>,
    trace: Vec<IterationRecord>,
    gp_points: usize,
}

fn run_sampling_loop(
    config: &OptimizerConfig,
    schedule: &ReductionSchedule,
    bandit_enabled: bool,
) -> Result<LoopOutcome> {
    let instance = &config.instance;
    let bounds = instance.objective.bounds;
    let d = schedule.d();

    let eval_point = |point: &[f64], noise: &mut StdRng| -> Result<f64> {
        let strategy = ControlStrategy::reduced(point.to_vec(), schedule.clone(), bounds)?;
        let value = evaluate_reduced(instance, &strategy, Some(noise))?;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::EvaluationFailure(format!(
                "reduced objective returned {value} at {point:?}"
            )))
        }
    };

    let mut points: Vec<Vec<f64>> = Vec::with_capacity(config.n_init + config.iterations);
    let mut observations: Vec<f64> = Vec::with_capacity(points.capacity());
    let mut init_rng = substream(config.seed, Domain::InitDesign, 0);
    for k in 0..config.n_init {
        let point: Vec<f64> = (0..d)
            .map(|_| init_rng.random_range(bounds.lower..bounds.upper))
            .collect();
        let mut noise = substream(config.seed, Domain::InitNoise, k as u64);
        let value = eval_point(&point, &mut noise)?;
        points.push(point);
        observations.push(value);
    }
    let initial_objectives = observations.clone();

    // Carry the effective jitter forward between refits: once the Gram
    // matrix needed escalation, later (larger) datasets will too, and
    // restarting from the configured jitter would redo the failed
    // factorizations every iteration.
    let mut kernel = config.kernel;
    let mut model = fit_surrogate(&points, &observations, bounds, kernel)?;
    kernel.jitter = model.kernel().jitter;
    let mut zones = ZoneState::new(config.n_zones, config.m_points, bounds)?;
    // The baseline arm replaces the bandit's candidates with extra random
    // ones so both arms score the same number of points per iteration.
    let n_random = if bandit_enabled {
        config.n_random
    } else {
        config.n_random + zones.total_reward() as usize
    };
    let mut search =
        RandomSearchState::new(bounds, config.shrink_lower, config.shrink_upper, n_random)?;
    let mut trace = Vec::with_capacity(config.iterations);

    for iteration in 0..config.iterations {
        let mut rng = substream(config.seed, Domain::IterSample, iteration as u64);
        let mut bandit_cands = if bandit_enabled {
            sample_bandit(&zones, d, &mut rng)
        } else {
            Vec::new()
        };
        let mut random_cands = sample_random(&search, d, &mut rng);
        score_candidates(&model, &config.acquisition, bounds, &mut bandit_cands)?;
        score_candidates(&model, &config.acquisition, bounds, &mut random_cands)?;

        if bandit_enabled {
            if let (Some(b), Some(w)) = (best_candidate(&bandit_cands), worst_candidate(&bandit_cands))
            {
                let (CandidateOrigin::Bandit { zone: best_zone }, CandidateOrigin::Bandit { zone: worst_zone }) =
                    (bandit_cands[b].origin, bandit_cands[w].origin)
                else {
                    unreachable!("bandit candidates carry zone origins");
                };
                zones.update_rewards(best_zone, worst_zone);
            }
        }

        let best_bandit = best_candidate(&bandit_cands);
        let best_random = best_candidate(&random_cands);
        let (mut point, bandit_won) = match (best_bandit, best_random) {
            (Some(b), Some(r)) => select_winner(
                (
                    &bandit_cands[b].point,
                    bandit_cands[b].acq_value.unwrap(),
                ),
                (
                    &random_cands[r].point,
                    random_cands[r].acq_value.unwrap(),
                ),
            ),
            (Some(b), None) => (bandit_cands[b].point.clone(), true),
            (None, Some(r)) => (random_cands[r].point.clone(), false),
            (None, None) => {
                return Err(Error::invalid(
                    "iteration produced no candidates; raise m_points or n_random",
                ))
            }
        };

        if bandit_enabled {
            if config.adaptive_shrink {
                search.shrink_adaptive(bandit_won, &point);
            } else {
                search.shrink(bandit_won);
            }
        }

        separate_from_visited(&mut point, &points, bounds, &mut rng);

        let mut noise = substream(config.seed, Domain::IterNoise, iteration as u64);
        let value = eval_point(&point, &mut noise)?;
        points.push(point.clone());
        observations.push(value);
        trace.push(IterationRecord {
            iteration,
            point,
            objective: value,
            bandit_won,
            rewards: zones.rewards().to_vec(),
            lower: search.lower(),
            upper: search.upper(),
        });
        model = fit_surrogate(&points, &observations, bounds, kernel)?;
        kernel.jitter = model.kernel().jitter;
    }

    Ok(LoopOutcome {
        gp_points: model.len(),
        points,
        observations,
        initial_objectives,
        trace,
    })
}

fn best_recorded(outcome: &LoopOutcome) -> usize {
    let mut best = 0;
    for (i, &y) in outcome.observations.iter().enumerate() {
        if y < outcome.observations[best] {
            best = i;
        }
    }
    best
}

/// Runs the full algorithm and reports the best strategy found.
pub fn run(config: &OptimizerConfig) -> Result<RunReport> {
    config.validate()?;
    let started = Instant::now();
    let instance = &config.instance;
    let bounds = instance.objective.bounds;
    let schedule = ReductionSchedule::new(instance.objective.t_f, config.d)?;

    let outcome = run_sampling_loop(config, &schedule, true)?;
    let start_point = outcome.points[best_recorded(&outcome)].clone();

    // Local search on the reduced objective with a frozen noise substream,
    // so the finite differences see a deterministic function.
    let crn_seed = derive_seed(config.seed, Domain::LocalSearchNoise, 0);
    let objective = |x: &[f64]| -> Result<f64> {
        let strategy = ControlStrategy::reduced(x.to_vec(), schedule.clone(), bounds)?;
        let mut noise = StdRng::seed_from_u64(crn_seed);
        let value = evaluate_reduced(instance, &strategy, Some(&mut noise))?;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::EvaluationFailure(format!(
                "reduced objective returned {value} at {x:?}"
            )))
        }
    };
    let refined = adam_search(&objective, &start_point, &config.adam, bounds)?;

    let reduced =
        ControlStrategy::reduced(refined.point.clone(), schedule.clone(), bounds)?;
    let mut fill_rng = substream(config.seed, Domain::Fill, 0);
    let full = config.fill_strategy.fill(&reduced, &mut fill_rng)?;

    let mut final_noise = substream(config.seed, Domain::FinalNoise, 0);
    let best_objective_full = evaluate_full(instance, &full, Some(&mut final_noise))?;

    Ok(RunReport {
        best_reduced: refined.point,
        best_full: full.values().to_vec(),
        best_objective_full,
        best_objective_reduced: refined.value,
        initial_objectives: outcome.initial_objectives,
        trace: outcome.trace,
        gp_points: outcome.gp_points,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        seed: config.seed,
        config: config.clone(),
        config_text: None,
    })
}

/// Comparison arm: plain Bayesian optimization with the same loop budget but
/// no dimension reduction, no bandit sampling (pure random candidates over
/// the fixed feasible interval), and no local search or fill-in.
pub fn run_baseline_standard_bo(config: &OptimizerConfig) -> Result<RunReport> {
    let mut config = config.clone();
    config.d = config.instance.objective.t_f;
    config.validate()?;
    let started = Instant::now();
    let instance = &config.instance;
    let bounds = instance.objective.bounds;
    let schedule = ReductionSchedule::new(instance.objective.t_f, config.d)?;

    let outcome = run_sampling_loop(&config, &schedule, false)?;
    let best = best_recorded(&outcome);
    let best_point = outcome.points[best].clone();
    let best_value = outcome.observations[best];

    let full = ControlStrategy::full(best_point.clone(), bounds)?;
    let mut final_noise = substream(config.seed, Domain::FinalNoise, 0);
    let best_objective_full = evaluate_full(instance, &full, Some(&mut final_noise))?;

    Ok(RunReport {
        best_reduced: best_point.clone(),
        best_full: best_point,
        best_objective_full,
        best_objective_reduced: best_value,
        initial_objectives: outcome.initial_objectives,
        trace: outcome.trace,
        gp_points: outcome.gp_points,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        seed: config.seed,
        config: config.clone(),
        config_text: None,
    })
}
