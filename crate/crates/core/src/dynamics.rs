//! Analytic Bell-mixture coefficient for every environment configuration.
//!
//! Starting from `|φ⁺⟩`, the averaged state stays
//! `½[(1+x)|φ⁺⟩⟨φ⁺| + (1−x)|ψ⁺⟩⟨ψ⁺|]`. The coefficient `x(t)` is
//!
//! | scenario | separate | common |
//! |---|---|---|
//! | single random fluctuator | `(∫D₂ p dγ)²` | `∫D₄ p dγ` |
//! | fixed-rate collection | `Π D₂(γ_Aj) D₂(γ_Bj)` | `Π D₄(γ_j)` |
//! | random-rate collection | single-fluctuator value to the power `N_f` | same |
//!
//! and then `N = |x|`, `Q = h(x)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::{h_function, CorrelationPoint};
use crate::quad::{integrate_with_breaks, Tolerance};
use crate::rng::{stream, Domain};
use crate::rtn::dephasing_factor;
use crate::spectra::RateDistribution;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    SingleRandomFluctuator,
    FixedCollection,
    RandomRateCollection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    Separate,
    Common,
}

impl Topology {
    /// Phase multiplier seen by the pair: 2 per qubit, or 4 for a shared fluctuator.
    pub fn multiplier(self) -> f64 {
        match self {
            Topology::Separate => 2.0,
            Topology::Common => 4.0,
        }
    }
}

/// Nonnegative, strictly increasing sample times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Config("time grid is empty".into()));
        }
        if let Some(&t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::Config(format!("time grid contains invalid time {t}")));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!(
                "time grid is not strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { times })
    }

    /// `n` evenly spaced points on `[0, t_max]`.
    pub fn uniform(t_max: f64, n: usize) -> Result<Self> {
        if n < 2 || !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::Config(format!(
                "uniform grid needs t_max > 0 and at least 2 points (got {t_max}, {n})"
            )));
        }
        Self::new((0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(times: Vec<f64>) -> Result<Self> {
        Self::new(times)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.times
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub topology: Topology,
    pub dist: RateDistribution,
    /// Fluctuators per environment; unused for a single fluctuator.
    pub n_fluctuators: usize,
    /// Explicit rates for a fixed collection. In the separate topology they
    /// apply to qubit A, and to B as well unless `fixed_rates_b` is given.
    pub fixed_rates: Option<Vec<f64>>,
    pub fixed_rates_b: Option<Vec<f64>>,
    pub time_grid: TimeGrid,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, topology: Topology, dist: RateDistribution, n_fluctuators: usize, time_grid: TimeGrid, seed: u64) -> Self {
        Self {
            scenario,
            topology,
            dist,
            n_fluctuators,
            fixed_rates: None,
            fixed_rates_b: None,
            time_grid,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenario != Scenario::SingleRandomFluctuator && self.n_fluctuators == 0 {
            return Err(Error::Config("n_fluctuators must be at least 1".into()));
        }
        let explicit = self.fixed_rates.is_some() || self.fixed_rates_b.is_some();
        if explicit && self.scenario != Scenario::FixedCollection {
            return Err(Error::Config("fixed rates are only meaningful for a fixed collection".into()));
        }
        if self.fixed_rates.is_none() && self.fixed_rates_b.is_some() {
            return Err(Error::Config("fixed_rates_b requires fixed_rates".into()));
        }
        if self.fixed_rates_b.is_some() && self.topology == Topology::Common {
            return Err(Error::Config("a common environment has a single rate set".into()));
        }
        let (lo, hi) = (self.dist.gamma_min(), self.dist.gamma_max());
        for list in [&self.fixed_rates, &self.fixed_rates_b].into_iter().flatten() {
            if list.is_empty() {
                return Err(Error::Config("fixed rate list is empty".into()));
            }
            if let Some(g) = list.iter().find(|g| !(**g >= lo && **g <= hi)) {
                return Err(Error::Config(format!("fixed rate {g} lies outside [{lo}, {hi}]")));
            }
        }
        TimeGrid::new(self.time_grid.times.clone()).map(|_| ())
    }
}

/// Switching rates of a fixed collection. `qubit_b` is `None` for a common environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentRates {
    pub qubit_a: Vec<f64>,
    pub qubit_b: Option<Vec<f64>>,
}

/// Draws `n` rates per environment from `dist`.
///
/// Rate `j` of qubit `q` comes from its own stream, so the first `n` rates
/// drawn for a larger collection are the same as for a smaller one.
pub fn sample_fixed_rates(dist: &RateDistribution, n: usize, topology: Topology, seed: u64) -> EnvironmentRates {
    let draw = |q: u64| -> Vec<f64> {
        (0..n as u64)
            .map(|j| dist.sample(&mut stream(seed, Domain::FIXED_RATES, q << 32 | j)))
            .collect()
    };
    EnvironmentRates {
        qubit_a: draw(0),
        qubit_b: (topology == Topology::Separate).then(|| draw(1)),
    }
}

/// Rates a fixed-collection config runs with, explicit or sampled.
pub fn resolve_rates(config: &ScenarioConfig) -> EnvironmentRates {
    match &config.fixed_rates {
        Some(a) => EnvironmentRates {
            qubit_a: a.clone(),
            qubit_b: (config.topology == Topology::Separate)
                .then(|| config.fixed_rates_b.clone().unwrap_or_else(|| a.clone())),
        },
        None => sample_fixed_rates(&config.dist, config.n_fluctuators, config.topology, config.seed),
    }
}

fn rate_tolerance() -> Tolerance {
    Tolerance {
        abs: 1e-13,
        rel: 1e-10,
        max_intervals: 4000,
    }
}

/// `∫ D_{mν}(γ, t) p_α(γ) dγ`, integrated in `ln γ` with a break at `γ = mν`.
pub fn rate_average(dist: &RateDistribution, m: f64, t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(crate::error::domain("t", t, "[0, inf)"));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let (lo, hi) = (dist.gamma_min().ln(), dist.gamma_max().ln());
    let mut breaks = vec![lo];
    if m.ln() > lo && m.ln() < hi {
        breaks.push(m.ln());
    }
    breaks.push(hi);
    let v = integrate_with_breaks(
        |u| {
            let g = u.exp();
            dephasing_factor(g, m, t) * dist.log_density(g)
        },
        &breaks,
        rate_tolerance(),
    )?;
    Ok(v.value.clamp(-1.0, 1.0))
}

pub fn lambda_de(dist: &RateDistribution, t: f64) -> Result<f64> {
    Ok(rate_average(dist, 2.0, t)?.powi(2))
}

pub fn lambda_ce(dist: &RateDistribution, t: f64) -> Result<f64> {
    rate_average(dist, 4.0, t)
}

pub fn gamma_de(rates_a: &[f64], rates_b: &[f64], t: f64) -> f64 {
    rates_a
        .iter()
        .chain(rates_b)
        .map(|&g| dephasing_factor(g, 2.0, t))
        .product()
}

pub fn gamma_ce(rates: &[f64], t: f64) -> f64 {
    rates.iter().map(|&g| dephasing_factor(g, 4.0, t)).product()
}

pub fn gamma_random(dist: &RateDistribution, n_fluctuators: usize, topology: Topology, t: f64) -> Result<f64> {
    if n_fluctuators == 0 {
        return Err(Error::Config("n_fluctuators must be at least 1".into()));
    }
    let lambda = match topology {
        Topology::Separate => lambda_de(dist, t)?,
        Topology::Common => lambda_ce(dist, t)?,
    };
    Ok(lambda.powi(n_fluctuators as i32))
}

/// Coefficient of one configuration as a function of time.
#[derive(Debug, Clone)]
pub struct CoefficientModel {
    scenario: Scenario,
    topology: Topology,
    dist: RateDistribution,
    n_fluctuators: usize,
    rates: Option<EnvironmentRates>,
    multiplier: f64,
}

impl CoefficientModel {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let rates = (config.scenario == Scenario::FixedCollection).then(|| resolve_rates(config));
        Ok(Self {
            scenario: config.scenario,
            topology: config.topology,
            dist: config.dist,
            n_fluctuators: config.n_fluctuators,
            rates,
            multiplier: config.topology.multiplier(),
        })
    }

    /// Replaces the phase multiplier. Only useful to build a deliberately wrong
    /// model as a negative control.
    pub fn with_multiplier(mut self, m: f64) -> Self {
        self.multiplier = m;
        self
    }

    pub fn rates(&self) -> Option<&EnvironmentRates> {
        self.rates.as_ref()
    }

    pub fn coefficient(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(1.0);
        }
        let m = self.multiplier;
        let single = || -> Result<f64> {
            let v = rate_average(&self.dist, m, t)?;
            Ok(match self.topology {
                Topology::Separate => v * v,
                Topology::Common => v,
            })
        };
        match self.scenario {
            Scenario::SingleRandomFluctuator => single(),
            Scenario::RandomRateCollection => Ok(single()?.powi(self.n_fluctuators as i32)),
            Scenario::FixedCollection => {
                let r = self.rates.as_ref().expect("fixed collection has rates");
                let prod = |xs: &[f64]| xs.iter().map(|&g| dephasing_factor(g, m, t)).product::<f64>();
                Ok(prod(&r.qubit_a) * r.qubit_b.as_deref().map_or(1.0, prod))
            }
        }
    }

    /// Coefficients at every time, evaluated in parallel; the result does not
    /// depend on the number of worker threads.
    pub fn coefficients(&self, times: &[f64]) -> Result<Vec<f64>> {
        times.par_iter().map(|&t| self.coefficient(t)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSeries {
    pub config: ScenarioConfig,
    pub rates: Option<EnvironmentRates>,
    pub points: Vec<CorrelationPoint>,
    pub coefficients: Vec<f64>,
}

pub fn points_from_coefficients(times: &[f64], coefficients: &[f64]) -> Result<Vec<CorrelationPoint>> {
    times
        .iter()
        .zip(coefficients)
        .map(|(&time, &c)| {
            Ok(CorrelationPoint {
                time,
                negativity: c.abs(),
                discord: h_function(c)?,
            })
        })
        .collect()
}

pub fn evolve_series(config: &ScenarioConfig) -> Result<CorrelationSeries> {
    let model = CoefficientModel::new(config)?;
    series_from_model(config, &model)
}

pub fn series_from_model(config: &ScenarioConfig, model: &CoefficientModel) -> Result<CorrelationSeries> {
    let times = config.time_grid.times();
    let coefficients = model.coefficients(times)?;
    Ok(CorrelationSeries {
        config: config.clone(),
        rates: model.rates().cloned(),
        points: points_from_coefficients(times, &coefficients)?,
        coefficients,
    })
}
