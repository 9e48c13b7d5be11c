//! Flat key-value configuration files.
//!
//! One `key = value` pair per line, `#` starts a comment, blank lines are
//! ignored. Unknown keys are rejected so typos surface as config errors.
//! Command-line overrides are applied on top of the file.

use std::collections::BTreeMap;

use epibo::dimension::{Bounds, FillStrategy};
use epibo::epidemic::{
    EpidemicInstance, EpidemicState, ModelParams, SeirState, SisState,
};
use epibo::error::{Error, Result};
use epibo::optimizer::OptimizerConfig;

use crate::sweep::SweepSpec;

/// Command-line overrides applied after the file is parsed.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub d: Option<usize>,
    pub fill: Option<FillStrategy>,
    pub iterations: Option<usize>,
}

const KNOWN_KEYS: &[&str] = &[
    // model and instance
    "model",
    "tau",
    "beta",
    "alpha",
    "gamma",
    "sigma",
    "c1",
    "c2",
    "t_f",
    "u_l",
    "u_u",
    "step_size",
    "s0",
    "e0",
    "i0",
    "r0",
    "unit_recovery",
    // optimizer
    "d",
    "iterations",
    "seed",
    "n_init",
    "n_zones",
    "m_points",
    "n_random",
    "fill",
    "k_weight",
    "length_scale",
    "jitter",
    "shrink_lower",
    "shrink_upper",
    "adaptive_shrink",
    // local search
    "adam_steps",
    "adam_lr",
    "adam_beta1",
    "adam_beta2",
    "adam_epsilon",
    "fd_step",
    // sweep
    "d_values",
    "fill_strategies",
    "seeds",
    "reference_d",
];

/// Parses the raw `key = value` lines.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected 'key = value', got '{raw}'",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "line {}: unknown key '{key}'",
                lineno + 1
            )));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!(
                "line {}: duplicate key '{key}'",
                lineno + 1
            )));
        }
    }
    Ok(map)
}

fn get<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{raw}'"))),
    }
}

fn get_list<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<Vec<T>>> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .split(',')
            .map(|item| {
                item.trim()
                    .parse::<T>()
                    .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{item}'")))
            })
            .collect::<Result<Vec<T>>>()
            .map(Some),
    }
}

fn reject_keys(map: &BTreeMap<String, String>, keys: &[&str], model: &str) -> Result<()> {
    for key in keys {
        if map.contains_key(*key) {
            return Err(Error::Config(format!(
                "key '{key}' does not apply to the {model} model"
            )));
        }
    }
    Ok(())
}

fn build_instance(map: &BTreeMap<String, String>, model: &str) -> Result<EpidemicInstance> {
    let mut instance = match model {
        "seir" => {
            reject_keys(map, &["sigma"], "seir")?;
            EpidemicInstance::default_seir()
        }
        "sis" => {
            reject_keys(map, &["alpha", "e0", "r0", "unit_recovery"], "sis")?;
            EpidemicInstance::default_sis()
        }
        other => {
            return Err(Error::Config(format!(
                "model must be 'seir' or 'sis', got '{other}'"
            )))
        }
    };

    match &mut instance.model {
        ModelParams::Seir(p) => {
            if let Some(v) = get(map, "tau")? {
                p.tau = v;
            }
            if let Some(v) = get(map, "beta")? {
                p.beta = v;
            }
            if let Some(v) = get(map, "alpha")? {
                p.alpha_rate = v;
            }
            if let Some(v) = get(map, "gamma")? {
                p.gamma = v;
            }
            if let Some(v) = get(map, "unit_recovery")? {
                p.unit_recovery = v;
            }
        }
        ModelParams::Sis(p) => {
            if let Some(v) = get(map, "tau")? {
                p.tau = v;
            }
            if let Some(v) = get(map, "beta")? {
                p.beta = v;
            }
            if let Some(v) = get(map, "gamma")? {
                p.gamma = v;
            }
            if let Some(v) = get(map, "sigma")? {
                p.sigma = v;
            }
        }
    }

    match &mut instance.initial_state {
        EpidemicState::Seir(state) => {
            let SeirState { s, e, i, r } = state;
            if let Some(v) = get(map, "s0")? {
                *s = v;
            }
            if let Some(v) = get(map, "e0")? {
                *e = v;
            }
            if let Some(v) = get(map, "i0")? {
                *i = v;
            }
            if let Some(v) = get(map, "r0")? {
                *r = v;
            }
        }
        EpidemicState::Sis(state) => {
            let SisState { s, i } = state;
            if let Some(v) = get(map, "s0")? {
                *s = v;
            }
            if let Some(v) = get(map, "i0")? {
                *i = v;
            }
        }
    }

    if let Some(v) = get(map, "c1")? {
        instance.objective.c1 = v;
    }
    if let Some(v) = get(map, "c2")? {
        instance.objective.c2 = v;
    }
    if let Some(v) = get(map, "t_f")? {
        instance.objective.t_f = v;
    }
    let lower = get(map, "u_l")?.unwrap_or(instance.objective.bounds.lower);
    let upper = get(map, "u_u")?.unwrap_or(instance.objective.bounds.upper);
    instance.objective.bounds = Bounds::new(lower, upper).map_err(to_config)?;
    if let Some(v) = get(map, "step_size")? {
        instance.step_size = v;
    }
    Ok(instance)
}

fn to_config(err: Error) -> Error {
    Error::Config(err.to_string())
}

/// Builds one run's configuration from parsed pairs plus overrides.
pub fn optimizer_config(
    map: &BTreeMap<String, String>,
    overrides: &Overrides,
) -> Result<OptimizerConfig> {
    let model = overrides
        .model
        .clone()
        .or_else(|| map.get("model").cloned())
        .unwrap_or_else(|| "seir".to_string());
    let instance = build_instance(map, &model)?;
    let mut config = OptimizerConfig::new(instance);

    if let Some(v) = get(map, "d")? {
        config.d = v;
    }
    if let Some(v) = get(map, "iterations")? {
        config.iterations = v;
    }
    if let Some(v) = get(map, "seed")? {
        config.seed = v;
    }
    if let Some(v) = get(map, "n_init")? {
        config.n_init = v;
    }
    if let Some(v) = get(map, "n_zones")? {
        config.n_zones = v;
    }
    if let Some(v) = get(map, "m_points")? {
        config.m_points = v;
    }
    if let Some(v) = get(map, "n_random")? {
        config.n_random = v;
    }
    if let Some(raw) = map.get("fill") {
        config.fill_strategy = raw.parse().map_err(to_config)?;
    }
    if let Some(v) = get(map, "k_weight")? {
        config.acquisition.k_weight = v;
    }
    if let Some(v) = get(map, "length_scale")? {
        config.kernel.length_scale = v;
    }
    if let Some(v) = get(map, "jitter")? {
        config.kernel.jitter = v;
    }
    if let Some(v) = get(map, "shrink_lower")? {
        config.shrink_lower = v;
    }
    if let Some(v) = get(map, "shrink_upper")? {
        config.shrink_upper = v;
    }
    if let Some(v) = get(map, "adaptive_shrink")? {
        config.adaptive_shrink = v;
    }
    if let Some(v) = get(map, "adam_steps")? {
        config.adam.steps = v;
    }
    if let Some(v) = get(map, "adam_lr")? {
        config.adam.learning_rate = v;
    }
    if let Some(v) = get(map, "adam_beta1")? {
        config.adam.beta1 = v;
    }
    if let Some(v) = get(map, "adam_beta2")? {
        config.adam.beta2 = v;
    }
    if let Some(v) = get(map, "adam_epsilon")? {
        config.adam.epsilon = v;
    }
    if let Some(v) = get(map, "fd_step")? {
        config.adam.fd_step = v;
    }

    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(d) = overrides.d {
        config.d = d;
    }
    if let Some(fill) = overrides.fill {
        config.fill_strategy = fill;
    }
    if let Some(iterations) = overrides.iterations {
        config.iterations = iterations;
    }

    config.validate().map_err(to_config)?;
    Ok(config)
}

/// Builds a sweep specification: the base run configuration plus the grid.
pub fn sweep_spec(map: &BTreeMap<String, String>, overrides: &Overrides) -> Result<SweepSpec> {
    let base = optimizer_config(map, overrides)?;
    let t_f = base.instance.objective.t_f;
    let d_values = get_list(map, "d_values")?.unwrap_or_else(|| vec![t_f]);
    let fills = match map.get("fill_strategies") {
        None => vec![base.fill_strategy],
        Some(raw) => raw
            .split(',')
            .map(|item| item.trim().parse::<FillStrategy>().map_err(to_config))
            .collect::<Result<Vec<_>>>()?,
    };
    let seeds = get_list(map, "seeds")?.unwrap_or_else(|| vec![base.seed]);
    let reference_d = get(map, "reference_d")?.unwrap_or(t_f);
    let spec = SweepSpec {
        base,
        d_values,
        fill_strategies: fills,
        seeds,
        reference_d,
    };
    spec.validate()?;
    Ok(spec)
}

/// Reads a control file: one value per line, `#` comments allowed.
pub fn parse_control_values(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        values.push(line.parse::<f64>().map_err(|_| {
            Error::Config(format!("control line {}: cannot parse '{line}'", lineno + 1))
        })?);
    }
    Ok(values)
}
