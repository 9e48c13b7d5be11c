//! Compartmental epidemic simulators and the control objective.
//!
//! Two benchmark models are provided: a deterministic SEIR model integrated
//! by forward Euler, and a stochastic SIS model integrated by Euler-Maruyama
//! with the contact-rate noise entering through a `sigma * S * I * dB` term.
//! The control value enters both models as an extra removal rate on the
//! infectious compartment, and the objective accumulates
//! `c1 * I(t) + c2 * f(u(t))` per epoch with the oscillatory control cost
//! `f(u) = 0.3 |sin(10u)| + 2.1 |sin(u)| + u^2`.
//!
//! Both simulators also run on a coarse grid of selected epochs where each
//! step spans one epoch gap and each grid point's cost is weighted by the
//! epochs it covers, so evaluating a reduced strategy costs O(d) instead of
//! O(t_f). On the identity schedule the coarse and full evaluations take the
//! exact same code path and agree bit for bit.
//!
//! After each step negative compartments are clamped to zero and the state is
//! renormalized onto the simplex, so population fractions keep summing to one
//! even with large coarse steps.

use rand::rngs::StdRng;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dimension::{Bounds, ControlStrategy};
use crate::error::{Error, Result};

/// Control cost `0.3 |sin(10u)| + 2.1 |sin(u)| + u^2`; nonconvex, even, and
/// zero at `u = 0`.
pub fn control_cost(u: f64) -> f64 {
    0.3 * (10.0 * u).sin().abs() + 2.1 * u.sin().abs() + u * u
}

/// SEIR rates, all per epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeirParams {
    /// Natural birth rate; the death rate is assumed equal.
    pub tau: f64,
    /// Contact rate between susceptible and infectious individuals.
    pub beta: f64,
    /// Transfer rate from exposed to infectious.
    pub alpha_rate: f64,
    /// Recovery rate.
    pub gamma: f64,
    /// Feed the recovered compartment with `I` instead of `gamma * I`.
    /// This variant does not conserve the population, so the simplex
    /// renormalization is skipped when it is set.
    #[serde(default)]
    pub unit_recovery: bool,
}

impl SeirParams {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau", self.tau),
            ("beta", self.beta),
            ("alpha", self.alpha_rate),
            ("gamma", self.gamma),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("rate {name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// SIS rates plus the diffusion coefficient of the contact-rate noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SisParams {
    pub tau: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Diffusion coefficient; zero recovers the deterministic drift.
    pub sigma: f64,
}

impl SisParams {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau", self.tau),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("rate {name} = {v} outside [0, 1]")));
            }
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::invalid(format!(
                "sigma must be nonnegative, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Population fractions of the SEIR compartments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeirState {
    pub s: f64,
    pub e: f64,
    pub i: f64,
    pub r: f64,
}

/// Population fractions of the SIS compartments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SisState {
    pub s: f64,
    pub i: f64,
}

/// State of either model at one epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum EpidemicState {
    Seir(SeirState),
    Sis(SisState),
}

impl EpidemicState {
    pub fn infectious(&self) -> f64 {
        match self {
            EpidemicState::Seir(s) => s.i,
            EpidemicState::Sis(s) => s.i,
        }
    }

    /// Distance of the component sum from one.
    pub fn simplex_residual(&self) -> f64 {
        match self {
            EpidemicState::Seir(s) => (s.s + s.e + s.i + s.r - 1.0).abs(),
            EpidemicState::Sis(s) => (s.s + s.i - 1.0).abs(),
        }
    }

    fn validate(&self) -> Result<()> {
        let components: Vec<f64> = match self {
            EpidemicState::Seir(s) => vec![s.s, s.e, s.i, s.r],
            EpidemicState::Sis(s) => vec![s.s, s.i],
        };
        if components.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::invalid("state components must be finite and nonnegative"));
        }
        let tol = match self {
            EpidemicState::Seir(_) => 1e-9,
            EpidemicState::Sis(_) => 1e-12,
        };
        if self.simplex_residual() > tol {
            return Err(Error::invalid(format!(
                "state components must sum to 1 (residual {})",
                self.simplex_residual()
            )));
        }
        Ok(())
    }
}

/// One forward-Euler step of the SEIR dynamics with step `h` epochs.
///
/// The recovered compartment gains `gamma * I + u * I`, so the four
/// derivatives sum to `tau * (1 - S - E - I - R)` and the simplex is
/// preserved; the state is clamped and renormalized afterwards to absorb
/// Euler overshoot.
pub fn seir_step(state: &SeirState, u: f64, params: &SeirParams, h: f64) -> SeirState {
    let SeirState { s, e, i, r } = *state;
    let infection = params.beta * s * i;
    let recovery = if params.unit_recovery { i } else { params.gamma * i };
    let ds = params.tau - infection - params.tau * s;
    let de = infection - (params.tau + params.alpha_rate) * e;
    let di = params.alpha_rate * e - (params.tau + params.gamma) * i - u * i;
    let dr = recovery - params.tau * r + u * i;
    let mut next = SeirState {
        s: (s + h * ds).max(0.0),
        e: (e + h * de).max(0.0),
        i: (i + h * di).max(0.0),
        r: (r + h * dr).max(0.0),
    };
    if !params.unit_recovery {
        let total = next.s + next.e + next.i + next.r;
        if total > 0.0 {
            next.s /= total;
            next.e /= total;
            next.i /= total;
            next.r /= total;
        } else {
            next = *state;
        }
    }
    next
}

/// One Euler-Maruyama step of the SIS dynamics: drift scaled by `h`, the
/// shared diffusion increment `sigma * S * I * dB` added to `I` and removed
/// from `S`, then clamp to [0, 1] and renormalize.
pub fn sis_step(state: &SisState, u: f64, params: &SisParams, h: f64, db: f64) -> SisState {
    let SisState { s, i } = *state;
    let infection = params.beta * s * i;
    let ds_drift = params.tau - infection + params.gamma * i - params.tau * s + u * i;
    let di_drift = infection - (params.tau + params.gamma) * i - u * i;
    let diffusion = params.sigma * s * i * db;
    let mut next = SisState {
        s: (s + h * ds_drift - diffusion).clamp(0.0, 1.0),
        i: (i + h * di_drift + diffusion).clamp(0.0, 1.0),
    };
    let total = next.s + next.i;
    if total > 0.0 {
        next.s /= total;
        next.i /= total;
    } else {
        next = *state;
    }
    next
}

/// Model selector with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelParams {
    Seir(SeirParams),
    Sis(SisParams),
}

impl ModelParams {
    pub fn name(&self) -> &'static str {
        match self {
            ModelParams::Seir(_) => "seir",
            ModelParams::Sis(_) => "sis",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, ModelParams::Sis(p) if p.sigma > 0.0)
    }
}

/// Objective coefficients and horizon. Costs accumulate from epoch 1 to
/// `t_f` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveParams {
    /// Cost of infection per epoch.
    pub c1: f64,
    /// Weight of the control cost per epoch.
    pub c2: f64,
    /// Final epoch of the horizon.
    pub t_f: usize,
    /// Feasible interval of the control values.
    pub bounds: Bounds,
}

/// A fully specified benchmark problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpidemicInstance {
    pub model: ModelParams,
    pub initial_state: EpidemicState,
    pub objective: ObjectiveParams,
    /// Integration step in epochs for the finest grid; each epoch (or epoch
    /// gap on a coarse grid) is integrated in `round(1/step_size)` substeps.
    pub step_size: f64,
}

impl EpidemicInstance {
    /// SEIR benchmark with a sharp uncontrolled outbreak over 100 epochs.
    /// The parameter values are this crate's choices, picked for their
    /// qualitative behavior; they are configurable.
    pub fn default_seir() -> Self {
        EpidemicInstance {
            model: ModelParams::Seir(SeirParams {
                tau: 0.01,
                beta: 0.9,
                alpha_rate: 0.25,
                gamma: 0.1,
                unit_recovery: false,
            }),
            initial_state: EpidemicState::Seir(SeirState {
                s: 0.99,
                e: 0.0,
                i: 0.01,
                r: 0.0,
            }),
            objective: ObjectiveParams {
                c1: 10_000.0,
                c2: 100.0,
                t_f: 100,
                bounds: Bounds::unit(),
            },
            step_size: 1.0,
        }
    }

    /// Stochastic SIS benchmark with a persistent endemic level over 200
    /// epochs. Parameter values are this crate's choices.
    pub fn default_sis() -> Self {
        EpidemicInstance {
            model: ModelParams::Sis(SisParams {
                tau: 0.01,
                beta: 0.5,
                gamma: 0.2,
                sigma: 0.05,
            }),
            initial_state: EpidemicState::Sis(SisState { s: 0.97, i: 0.03 }),
            objective: ObjectiveParams {
                c1: 10_000.0,
                c2: 100.0,
                t_f: 200,
                bounds: Bounds::unit(),
            },
            step_size: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.model, &self.initial_state) {
            (ModelParams::Seir(p), EpidemicState::Seir(_)) => p.validate()?,
            (ModelParams::Sis(p), EpidemicState::Sis(_)) => p.validate()?,
            _ => {
                return Err(Error::invalid(
                    "initial state does not match the model kind",
                ))
            }
        }
        self.initial_state.validate()?;
        if !(self.objective.c1 >= 0.0 && self.objective.c2 >= 0.0) {
            return Err(Error::invalid("objective costs must be nonnegative"));
        }
        if self.objective.t_f == 0 {
            return Err(Error::invalid("horizon must be at least one epoch"));
        }
        Bounds::new(self.objective.bounds.lower, self.objective.bounds.upper)?;
        if !(self.step_size > 0.0 && self.step_size <= 1.0) {
            return Err(Error::invalid(format!(
                "step_size must lie in (0, 1], got {}",
                self.step_size
            )));
        }
        let inv = 1.0 / self.step_size;
        if (inv - inv.round()).abs() > 1e-9 {
            return Err(Error::invalid(
                "step_size must divide an epoch into an integer number of substeps",
            ));
        }
        Ok(())
    }

    fn substeps_per_epoch(&self) -> usize {
        (1.0 / self.step_size).round() as usize
    }
}

/// Simulated states and per-grid-point costs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Grid epochs, 1-based.
    pub epochs: Vec<usize>,
    pub states: Vec<EpidemicState>,
    pub controls: Vec<f64>,
    /// Weighted cost attributed to each grid point.
    pub costs: Vec<f64>,
}

impl Trajectory {
    pub fn total_cost(&self) -> f64 {
        self.costs.iter().sum()
    }
}

fn advance(
    instance: &EpidemicInstance,
    state: &EpidemicState,
    u: f64,
    gap: usize,
    rng: &mut Option<&mut StdRng>,
) -> Result<EpidemicState> {
    let substeps = instance.substeps_per_epoch();
    let dt = gap as f64 / substeps as f64;
    match (&instance.model, state) {
        (ModelParams::Seir(p), EpidemicState::Seir(s)) => {
            let mut cur = *s;
            for _ in 0..substeps {
                cur = seir_step(&cur, u, p, dt);
            }
            Ok(EpidemicState::Seir(cur))
        }
        (ModelParams::Sis(p), EpidemicState::Sis(s)) => {
            let mut cur = *s;
            let sqrt_dt = dt.sqrt();
            for _ in 0..substeps {
                let db = match rng {
                    Some(r) => sqrt_dt * r.sample::<f64, _>(rand_distr::StandardNormal),
                    None if p.sigma == 0.0 => 0.0,
                    None => {
                        return Err(Error::invalid(
                            "stochastic SIS simulation requires a noise stream",
                        ))
                    }
                };
                cur = sis_step(&cur, u, p, dt, db);
            }
            Ok(EpidemicState::Sis(cur))
        }
        _ => Err(Error::invalid("state does not match the model kind")),
    }
}

/// Steps the model over the given grid epochs, applying `controls[q]` from
/// grid point `q` to the next. Returns states at the grid points and each
/// point's cost weighted by the epochs it covers; the weights sum to `t_f`.
fn simulate_grid(
    instance: &EpidemicInstance,
    grid: &[usize],
    controls: &[f64],
    mut rng: Option<&mut StdRng>,
) -> Result<Trajectory> {
    instance.validate()?;
    let t_f = instance.objective.t_f;
    if grid.len() != controls.len() {
        return Err(Error::invalid(format!(
            "{} grid points but {} control values",
            grid.len(),
            controls.len()
        )));
    }
    if grid.is_empty() || grid[0] != 1 || *grid.last().unwrap() > t_f {
        return Err(Error::invalid("grid must start at epoch 1 and end within the horizon"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("grid epochs must be strictly increasing"));
    }

    let mut states = Vec::with_capacity(grid.len());
    let mut costs = Vec::with_capacity(grid.len());
    let mut state = instance.initial_state;
    for (q, (&epoch, &u)) in grid.iter().zip(controls).enumerate() {
        let weight = if q + 1 < grid.len() {
            grid[q + 1] - epoch
        } else {
            t_f - epoch + 1
        };
        states.push(state);
        costs.push(
            weight as f64 * (instance.objective.c1 * state.infectious()
                + instance.objective.c2 * control_cost(u)),
        );
        if q + 1 < grid.len() {
            state = advance(instance, &state, u, grid[q + 1] - epoch, &mut rng)?;
        }
    }
    Ok(Trajectory {
        epochs: grid.to_vec(),
        states,
        controls: controls.to_vec(),
        costs,
    })
}

/// Simulates a full-horizon control epoch by epoch.
pub fn simulate(
    instance: &EpidemicInstance,
    control: &ControlStrategy,
    rng: Option<&mut StdRng>,
) -> Result<Trajectory> {
    let t_f = instance.objective.t_f;
    if control.len() != t_f {
        return Err(Error::invalid(format!(
            "control has {} values but the horizon is {t_f}",
            control.len()
        )));
    }
    let grid: Vec<usize> = (1..=t_f).collect();
    simulate_grid(instance, &grid, control.values(), rng)
}

/// Accumulated objective of a full-horizon control: the sum of
/// `c1 * I(t) + c2 * f(u(t))` over every epoch.
pub fn evaluate_full(
    instance: &EpidemicInstance,
    control: &ControlStrategy,
    rng: Option<&mut StdRng>,
) -> Result<f64> {
    Ok(simulate(instance, control, rng)?.total_cost())
}

/// Coarse-grid objective of a reduced control: the model is stepped only
/// between the schedule epochs and each grid cost is weighted by its epoch
/// coverage, so the evaluation costs O(d). On the identity schedule this is
/// exactly [`evaluate_full`].
pub fn evaluate_reduced(
    instance: &EpidemicInstance,
    reduced: &ControlStrategy,
    rng: Option<&mut StdRng>,
) -> Result<f64> {
    let schedule = reduced
        .schedule()
        .ok_or_else(|| Error::invalid("reduced evaluation requires a schedule"))?;
    if schedule.t_f() != instance.objective.t_f {
        return Err(Error::invalid(format!(
            "schedule horizon {} does not match instance horizon {}",
            schedule.t_f(),
            instance.objective.t_f
        )));
    }
    Ok(simulate_grid(instance, schedule.epochs(), reduced.values(), rng)?.total_cost())
}
