//! Flat TOML run configuration, merged with command-line overrides.

use std::collections::HashSet;
use std::path::Path;

use colornoise::dynamics::{Scenario, ScenarioConfig, TimeGrid, Topology};
use colornoise::spectra::{RateDistribution, DEFAULT_GAMMA_MAX, DEFAULT_GAMMA_MIN};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 12345;
pub const DEFAULT_POINTS: usize = 2000;
pub const DEFAULT_VALIDATE_POINTS: usize = 50;

/// Every key is optional; missing keys take the documented defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nf: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_rates: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_rates_b: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freq_points: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periodogram: Option<bool>,
}

/// Where each value came from, for error messages.
#[derive(Debug, Default)]
pub struct Sources {
    file: Option<(String, String)>,
    flags: HashSet<&'static str>,
}

impl Sources {
    pub fn locate(&self, key: &str) -> String {
        if self.flags.contains(key) {
            return format!("--{}", key.replace('_', "-"));
        }
        if let Some((path, text)) = &self.file {
            for (i, line) in text.lines().enumerate() {
                let head = line.trim_start();
                if let Some(rest) = head.strip_prefix(key) {
                    if rest.trim_start().starts_with('=') {
                        return format!("{path}:{}", i + 1);
                    }
                }
            }
            return path.clone();
        }
        "configuration".into()
    }
}

pub fn read_file(path: &Path) -> Result<(RawConfig, Sources), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: cannot read config: {e}", path.display())))?;
    let raw: RawConfig = toml::from_str(&text).map_err(|e| {
        let at = e
            .span()
            .map(|s| format!(":{}", text[..s.start.min(text.len())].matches('\n').count() + 1))
            .unwrap_or_default();
        CliError::Config(format!("{}{at}: {}", path.display(), e.message()))
    })?;
    Ok((
        raw,
        Sources {
            file: Some((path.display().to_string(), text)),
            flags: HashSet::new(),
        },
    ))
}

/// Applies a command-line value, remembering that it came from a flag.
pub fn set<T>(slot: &mut Option<T>, value: Option<T>, key: &'static str, sources: &mut Sources) {
    if let Some(v) = value {
        *slot = Some(v);
        sources.flags.insert(key);
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub scenario: ScenarioConfig,
    pub mc: bool,
    pub trajectories: usize,
    pub threads: Option<usize>,
    pub freq_points: usize,
    pub periodogram: bool,
    /// The raw configuration with every default filled in; echoed in manifests.
    pub echo: RawConfig,
}

fn core(sources: &Sources, key: &str, e: colornoise::Error) -> CliError {
    match e {
        colornoise::Error::Config(m) => bad(sources, key, m),
        other => bad(sources, key, other.to_string()),
    }
}

fn bad(sources: &Sources, key: &str, msg: String) -> CliError {
    CliError::Config(format!("{}: {msg}", sources.locate(key)))
}

fn positive_count(v: i64, min: i64, key: &str, sources: &Sources) -> Result<usize, CliError> {
    if v < min {
        return Err(bad(sources, key, format!("{key} = {v} must be at least {min}")));
    }
    Ok(v as usize)
}

pub fn resolve(raw: &RawConfig, sources: &Sources, default_points: usize) -> Result<Settings, CliError> {
    let scenario_name = raw.scenario.clone().unwrap_or_else(|| "single".into());
    let scenario = match scenario_name.as_str() {
        "single" => Scenario::SingleRandomFluctuator,
        "collection" => Scenario::FixedCollection,
        "collection-random" => Scenario::RandomRateCollection,
        other => {
            return Err(bad(
                sources,
                "scenario",
                format!("scenario = \"{other}\" is not one of single, collection, collection-random"),
            ))
        }
    };
    let topology_name = raw.topology.clone().unwrap_or_else(|| "separate".into());
    let topology = match topology_name.as_str() {
        "separate" => Topology::Separate,
        "common" => Topology::Common,
        other => {
            return Err(bad(
                sources,
                "topology",
                format!("topology = \"{other}\" is not one of separate, common"),
            ))
        }
    };

    let alpha = raw.alpha.unwrap_or(1.0);
    if !(1.0..=2.0).contains(&alpha) {
        return Err(bad(sources, "alpha", format!("alpha = {alpha} is outside the valid range [1, 2]")));
    }
    let gamma_min = raw.gamma_min.unwrap_or(DEFAULT_GAMMA_MIN);
    if !(gamma_min.is_finite() && gamma_min > 0.0) {
        return Err(bad(sources, "gamma_min", format!("gamma_min = {gamma_min} must be a positive rate")));
    }
    let gamma_max = raw.gamma_max.unwrap_or(DEFAULT_GAMMA_MAX);
    if !(gamma_max.is_finite() && gamma_max > gamma_min) {
        return Err(bad(
            sources,
            "gamma_max",
            format!("gamma_max = {gamma_max} must exceed gamma_min = {gamma_min}"),
        ));
    }
    let dist = RateDistribution::new(alpha, gamma_min, gamma_max).map_err(|e| core(sources, "alpha", e))?;

    let nf = positive_count(raw.nf.unwrap_or(20), 1, "nf", sources)?;
    let t_max = raw.t_max.unwrap_or(20.0);
    let points = positive_count(raw.points.unwrap_or(default_points as i64), 2, "points", sources)?;
    let grid = match &raw.times {
        Some(times) => TimeGrid::new(times.clone()).map_err(|e| core(sources, "times", e))?,
        None => {
            if !(t_max.is_finite() && t_max > 0.0) {
                return Err(bad(sources, "t_max", format!("t_max = {t_max} must be positive")));
            }
            TimeGrid::uniform(t_max, points).map_err(|e| core(sources, "points", e))?
        }
    };

    for (key, list) in [("fixed_rates", &raw.fixed_rates), ("fixed_rates_b", &raw.fixed_rates_b)] {
        let Some(list) = list else { continue };
        if scenario != Scenario::FixedCollection {
            return Err(bad(sources, key, format!("{key} needs scenario = \"collection\"")));
        }
        if list.is_empty() {
            return Err(bad(sources, key, format!("{key} is empty")));
        }
        if let Some(g) = list.iter().find(|g| !(**g >= gamma_min && **g <= gamma_max)) {
            return Err(bad(
                sources,
                key,
                format!("{key} contains {g}, outside [gamma_min, gamma_max] = [{gamma_min}, {gamma_max}]"),
            ));
        }
    }
    if raw.fixed_rates_b.is_some() && (raw.fixed_rates.is_none() || topology == Topology::Common) {
        return Err(bad(
            sources,
            "fixed_rates_b",
            "fixed_rates_b needs fixed_rates and topology = \"separate\"".into(),
        ));
    }

    let trajectories = positive_count(raw.trajectories.unwrap_or(100_000), 1000, "trajectories", sources)?;
    let threads = raw.threads.map(|t| positive_count(t, 1, "threads", sources)).transpose()?;
    let freq_points = positive_count(raw.freq_points.unwrap_or(60), 2, "freq_points", sources)?;
    let seed = raw.seed.unwrap_or(DEFAULT_SEED);

    let mut scenario_config = ScenarioConfig::new(scenario, topology, dist, nf, grid, seed);
    scenario_config.fixed_rates = raw.fixed_rates.clone();
    scenario_config.fixed_rates_b = raw.fixed_rates_b.clone();
    scenario_config
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let echo = RawConfig {
        scenario: Some(scenario_name),
        topology: Some(topology_name),
        alpha: Some(alpha),
        gamma_min: Some(gamma_min),
        gamma_max: Some(gamma_max),
        nf: Some(nf as i64),
        t_max: raw.times.is_none().then_some(t_max),
        points: raw.times.is_none().then_some(points as i64),
        times: raw.times.clone(),
        fixed_rates: raw.fixed_rates.clone(),
        fixed_rates_b: raw.fixed_rates_b.clone(),
        mc: Some(raw.mc.unwrap_or(false)),
        trajectories: Some(trajectories as i64),
        seed: Some(seed),
        threads: threads.map(|t| t as i64),
        freq_points: Some(freq_points as i64),
        periodogram: Some(raw.periodogram.unwrap_or(true)),
    };
    Ok(Settings {
        scenario: scenario_config,
        mc: raw.mc.unwrap_or(false),
        trajectories,
        threads,
        freq_points,
        periodogram: raw.periodogram.unwrap_or(true),
        echo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_text(text: &str) -> Result<Settings, CliError> {
        let raw: RawConfig = toml::from_str(text).unwrap();
        let sources = Sources {
            file: Some(("cfg.toml".into(), text.into())),
            flags: HashSet::new(),
        };
        resolve(&raw, &sources, DEFAULT_POINTS)
    }

    #[test]
    fn defaults() {
        let s = from_text("").unwrap();
        assert_eq!(s.scenario.scenario, Scenario::SingleRandomFluctuator);
        assert_eq!(s.scenario.time_grid.len(), 2000);
        assert_eq!(s.scenario.dist.alpha(), 1.0);
        assert_eq!(s.trajectories, 100_000);
        assert_eq!(s.scenario.seed, DEFAULT_SEED);
    }

    #[test]
    fn range_errors_name_line_field_and_range() {
        let err = from_text("scenario = \"single\"\nalpha = 3\n").unwrap_err().to_string();
        assert!(err.contains("cfg.toml:2") && err.contains("alpha") && err.contains("[1, 2]"), "{err}");
    }

    #[test]
    fn empty_grid_is_rejected() {
        let err = from_text("times = []\n").unwrap_err().to_string();
        assert!(err.contains("cfg.toml:1") && err.contains("empty"), "{err}");
    }

    #[test]
    fn flags_are_named() {
        let mut sources = Sources::default();
        let mut raw = RawConfig::default();
        set(&mut raw.nf, Some(0), "nf", &mut sources);
        let err = resolve(&raw, &sources, DEFAULT_POINTS).unwrap_err().to_string();
        assert!(err.contains(": --nf:"), "{err}");
    }

    #[test]
    fn echo_resolves_to_the_same_settings() {
        let s = from_text("scenario = \"collection\"\nnf = 3\nalpha = 2\n").unwrap();
        let again = resolve(&s.echo, &Sources::default(), DEFAULT_VALIDATE_POINTS).unwrap();
        assert_eq!(again.scenario, s.scenario);
    }
}
