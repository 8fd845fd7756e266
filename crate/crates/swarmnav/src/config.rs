//! Flat `key = value` configuration files for [`SimConfig`].
//!
//! Every field of `SimConfig` has a key of the same name. Blank lines and
//! lines starting with `#` are ignored.

use std::path::Path;

use swarmnav_core::sim::SimConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{origin}: line {line}: {reason}")]
    Syntax {
        origin: String,
        line: usize,
        reason: String,
    },
    #[error("{0}")]
    Invalid(#[from] swarmnav_core::sim::ConfigError),
}

pub const KEYS: &[&str] = &[
    "dt",
    "agent_radius",
    "safe_buffer",
    "max_speed",
    "visibility_range",
    "trigger_k",
    "max_steps",
    "tau",
    "tau_obst",
    "max_neighbors",
    "coordination_enabled",
    "seed",
    "waypoint_epsilon",
    "goal_epsilon",
    "start_epsilon",
    "cooldown",
    "infeasible_cooldown",
    "start_timeout",
    "square_area",
];

/// Sets one field from its textual value.
pub fn set_key(config: &mut SimConfig, key: &str, value: &str) -> Result<(), String> {
    fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
        v.parse()
            .map_err(|_| format!("invalid value {v:?} for {key}"))
    }
    fn flag(key: &str, v: &str) -> Result<bool, String> {
        match v {
            "true" | "1" | "yes" | "on" => Ok(true),
            "false" | "0" | "no" | "off" => Ok(false),
            _ => Err(format!("invalid value {v:?} for {key}")),
        }
    }
    let v = value.trim();
    match key.trim() {
        "dt" => config.dt = num(key, v)?,
        "agent_radius" => config.agent_radius = num(key, v)?,
        "safe_buffer" => config.safe_buffer = num(key, v)?,
        "max_speed" => config.max_speed = num(key, v)?,
        "visibility_range" => config.visibility_range = num(key, v)?,
        "trigger_k" => config.trigger_k = num(key, v)?,
        "max_steps" => config.max_steps = num(key, v)?,
        "tau" => config.tau = num(key, v)?,
        "tau_obst" => config.tau_obst = num(key, v)?,
        "max_neighbors" => config.max_neighbors = num(key, v)?,
        "coordination_enabled" => config.coordination_enabled = flag(key, v)?,
        "seed" => config.seed = num(key, v)?,
        "waypoint_epsilon" => config.waypoint_epsilon = num(key, v)?,
        "goal_epsilon" => config.goal_epsilon = num(key, v)?,
        "start_epsilon" => config.start_epsilon = num(key, v)?,
        "cooldown" => config.cooldown = num(key, v)?,
        "infeasible_cooldown" => config.infeasible_cooldown = num(key, v)?,
        "start_timeout" => config.start_timeout = num(key, v)?,
        "square_area" => config.square_area = flag(key, v)?,
        other => return Err(format!("unknown key {other:?}")),
    }
    Ok(())
}

/// Applies the assignments in `text` on top of `base`. `origin` names the
/// source in error messages.
pub fn parse_config(
    text: &str,
    base: SimConfig,
    origin: &str,
) -> Result<SimConfig, ConfigFileError> {
    let mut config = base;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let syntax = |reason: String| ConfigFileError::Syntax {
            origin: origin.to_owned(),
            line: n + 1,
            reason,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| syntax("expected key = value".into()))?;
        set_key(&mut config, key, value).map_err(syntax)?;
    }
    config.validate()?;
    Ok(config)
}

pub fn read_config(path: &Path, base: SimConfig) -> Result<SimConfig, ConfigFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, base, &path.display().to_string())
}

/// Writes every key with its current value.
pub fn to_config_string(c: &SimConfig) -> String {
    format!(
        "dt = {}\nagent_radius = {}\nsafe_buffer = {}\nmax_speed = {}\nvisibility_range = {}\ntrigger_k = {}\n\
         max_steps = {}\ntau = {}\ntau_obst = {}\nmax_neighbors = {}\ncoordination_enabled = {}\nseed = {}\n\
         waypoint_epsilon = {}\ngoal_epsilon = {}\nstart_epsilon = {}\ncooldown = {}\ninfeasible_cooldown = {}\n\
         start_timeout = {}\nsquare_area = {}\n",
        c.dt,
        c.agent_radius,
        c.safe_buffer,
        c.max_speed,
        c.visibility_range,
        c.trigger_k,
        c.max_steps,
        c.tau,
        c.tau_obst,
        c.max_neighbors,
        c.coordination_enabled,
        c.seed,
        c.waypoint_epsilon,
        c.goal_epsilon,
        c.start_epsilon,
        c.cooldown,
        c.infeasible_cooldown,
        c.start_timeout,
        c.square_area,
    )
}
