//! Monte Carlo trajectories of the two-qubit state.
//!
//! Each trajectory draws telegraph histories for the fluctuators, applies
//! `exp(iφ_A σ_x) ⊗ exp(iφ_B σ_x)` to `|φ⁺⟩` and records the Bell-mixture
//! coefficient `|⟨φ⁺|ψ⟩|² − |⟨ψ⁺|ψ⟩|²` together with `|ψ⟩⟨ψ|`. None of the
//! analytic averaging formulas are used.
//!
//! Trajectory `i` draws from stream `i`, trajectories are grouped in fixed
//! batches, and batch sums are merged in a fixed tree order, so estimates are
//! bitwise identical for any number of threads.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::{discord_of_bell_projection, h_function, negativity};
use crate::dynamics::{resolve_rates, CorrelationSeries, EnvironmentRates, Scenario, ScenarioConfig, Topology};
use crate::qstate::{kron, pauli_x, TwoQubitDensityMatrix};
use crate::rng::{stream, Domain, Stream};
use crate::rtn::accumulate_grid_phases;
use crate::stats::CompensatedSum;
use crate::{Error, Result};

pub const MIN_TRAJECTORIES: usize = 1000;
const BATCH: usize = 1024;

/// Entries of `ρ` outside the `{|φ⁺⟩, |ψ⁺⟩}` pattern.
const OFF_FAMILY: [(usize, usize); 8] = [(0, 1), (0, 2), (1, 0), (2, 0), (1, 3), (2, 3), (3, 1), (3, 2)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub scenario: ScenarioConfig,
    pub n_trajectories: usize,
    /// Worker threads; `Some(1)` runs everything on the calling thread.
    pub threads: Option<usize>,
}

impl McConfig {
    pub fn new(scenario: ScenarioConfig, n_trajectories: usize) -> Self {
        Self {
            scenario,
            n_trajectories,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trajectories < MIN_TRAJECTORIES {
            return Err(Error::Config(format!(
                "n_trajectories must be at least {MIN_TRAJECTORIES}, got {}",
                self.n_trajectories
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        self.scenario.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub time: f64,
    pub coeff_mean: f64,
    pub coeff_stderr: f64,
    /// Trajectory-averaged state.
    pub density_matrix: TwoQubitDensityMatrix,
    /// Largest off-pattern element of the averaged state.
    pub leakage: f64,
    /// Standard-error bound for any single off-pattern element.
    pub leakage_stderr: f64,
}

impl McEstimate {
    /// True when every off-pattern element is within 5 standard errors of zero.
    pub fn stays_in_bell_family(&self) -> bool {
        self.leakage <= 5.0 * self.leakage_stderr
    }
}

// exp(iφσ_x) = cos φ I + i sin φ σ_x
fn phase_rotation(phi: f64) -> Matrix2<Complex64> {
    Matrix2::identity() * Complex64::from(phi.cos()) + pauli_x() * Complex64::new(0.0, phi.sin())
}

// The same evolution applied to |00⟩ + |11⟩ (norm √2), which keeps t = 0 exact.
fn evolve_scaled(phi_a: f64, phi_b: f64) -> Vector4<Complex64> {
    let one = Complex64::from(1.0);
    let zero = Complex64::from(0.0);
    kron(&phase_rotation(phi_a), &phase_rotation(phi_b)) * Vector4::new(one, zero, zero, one)
}

/// `exp(iφ_A σ_x) ⊗ exp(iφ_B σ_x) |φ⁺⟩`.
pub fn evolve_trajectory(phi_a: f64, phi_b: f64) -> Vector4<Complex64> {
    evolve_scaled(phi_a, phi_b) * Complex64::from(std::f64::consts::FRAC_1_SQRT_2)
}

#[derive(Clone)]
struct Accumulator {
    n: usize,
    coeff: Vec<CompensatedSum>,
    coeff_sq: Vec<CompensatedSum>,
    // upper triangle of ρ, (re, im) per entry, row-major
    rho: Vec<[CompensatedSum; 20]>,
    leak_sq: Vec<CompensatedSum>,
}

impl Accumulator {
    fn new(points: usize) -> Self {
        Self {
            n: 0,
            coeff: vec![CompensatedSum::default(); points],
            coeff_sq: vec![CompensatedSum::default(); points],
            rho: vec![[CompensatedSum::default(); 20]; points],
            leak_sq: vec![CompensatedSum::default(); points],
        }
    }

    fn record(&mut self, k: usize, psi: &Vector4<Complex64>) {
        // ψ here has norm √2.
        let on = 0.25 * (psi[0] + psi[3]).norm_sqr();
        let swapped = 0.25 * (psi[1] + psi[2]).norm_sqr();
        let x = on - swapped;
        self.coeff[k].add(x);
        self.coeff_sq[k].add(x * x);
        let mut slot = 0;
        for i in 0..4 {
            for j in i..4 {
                let e = psi[i] * psi[j].conj() * 0.5;
                self.rho[k][slot].add(e.re);
                self.rho[k][slot + 1].add(e.im);
                slot += 2;
            }
        }
        let leak = OFF_FAMILY
            .iter()
            .map(|&(i, j)| (psi[i] * psi[j].conj() * 0.5).norm_sqr())
            .fold(0.0, f64::max);
        self.leak_sq[k].add(leak);
    }

    fn merge(mut self, other: &Accumulator) -> Self {
        self.n += other.n;
        for k in 0..self.coeff.len() {
            self.coeff[k].merge(&other.coeff[k]);
            self.coeff_sq[k].merge(&other.coeff_sq[k]);
            self.leak_sq[k].merge(&other.leak_sq[k]);
            for s in 0..20 {
                self.rho[k][s].merge(&other.rho[k][s]);
            }
        }
        self
    }
}

fn merge_tree(mut parts: Vec<Accumulator>) -> Accumulator {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.merge(&b),
                None => a,
            });
        }
        parts = next;
    }
    parts.pop().expect("at least one batch")
}

struct Plan<'a> {
    config: &'a ScenarioConfig,
    rates: Option<EnvironmentRates>,
    // simulation grid, starting at 0
    grid: Vec<f64>,
    // offset of the requested times inside `grid`
    skip: usize,
}

impl Plan<'_> {
    fn add_environment(&self, rng: &mut Stream, fixed: Option<&[f64]>, phi: &mut [f64]) {
        let c = self.config;
        match c.scenario {
            Scenario::SingleRandomFluctuator => {
                let g = c.dist.sample(rng);
                accumulate_grid_phases(g, &self.grid, rng, phi);
            }
            Scenario::RandomRateCollection => {
                for _ in 0..c.n_fluctuators {
                    let g = c.dist.sample(rng);
                    accumulate_grid_phases(g, &self.grid, rng, phi);
                }
            }
            Scenario::FixedCollection => {
                for &g in fixed.expect("fixed collection has rates") {
                    accumulate_grid_phases(g, &self.grid, rng, phi);
                }
            }
        }
    }

    fn run_batch(&self, batch: usize, n_total: usize) -> Accumulator {
        let points = self.grid.len() - self.skip;
        let mut acc = Accumulator::new(points);
        let start = batch * BATCH;
        let end = (start + BATCH).min(n_total);
        let mut phi_a = vec![0.0; self.grid.len()];
        let mut phi_b = vec![0.0; self.grid.len()];
        for i in start..end {
            let mut rng = stream(self.config.seed, Domain::TRAJECTORY, i as u64);
            phi_a.iter_mut().for_each(|p| *p = 0.0);
            let rates = self.rates.as_ref();
            self.add_environment(&mut rng, rates.map(|r| r.qubit_a.as_slice()), &mut phi_a);
            let phi_b: &[f64] = match self.config.topology {
                // both qubits see the very same histories
                Topology::Common => &phi_a,
                Topology::Separate => {
                    phi_b.iter_mut().for_each(|p| *p = 0.0);
                    let b = rates.map(|r| r.qubit_b.as_deref().expect("separate rates"));
                    self.add_environment(&mut rng, b, &mut phi_b);
                    &phi_b
                }
            };
            for k in 0..points {
                let psi = evolve_scaled(phi_a[k + self.skip], phi_b[k + self.skip]);
                acc.record(k, &psi);
            }
            acc.n += 1;
        }
        acc
    }
}

fn run(config: &McConfig) -> Result<(Accumulator, Option<EnvironmentRates>)> {
    config.validate()?;
    let sc = &config.scenario;
    let times = sc.time_grid.times();
    let skip = usize::from(times[0] > 0.0);
    let mut grid = Vec::with_capacity(times.len() + skip);
    if skip == 1 {
        grid.push(0.0);
    }
    grid.extend_from_slice(times);
    let plan = Plan {
        config: sc,
        rates: (sc.scenario == Scenario::FixedCollection).then(|| resolve_rates(sc)),
        grid,
        skip,
    };
    let n = config.n_trajectories;
    let batches = n.div_ceil(BATCH);
    let parts: Vec<Accumulator> = match config.threads {
        Some(1) => (0..batches).map(|b| plan.run_batch(b, n)).collect(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {k} worker threads: {e}")))?
            .install(|| (0..batches).into_par_iter().map(|b| plan.run_batch(b, n)).collect()),
        None => (0..batches).into_par_iter().map(|b| plan.run_batch(b, n)).collect(),
    };
    Ok((merge_tree(parts), plan.rates))
}

/// Coefficient estimates with standard errors at every grid time.
pub fn estimate_coefficient(config: &McConfig) -> Result<Vec<McEstimate>> {
    let (acc, _) = run(config)?;
    let n = acc.n as f64;
    let times = config.scenario.time_grid.times();
    times
        .iter()
        .enumerate()
        .map(|(k, &time)| {
            let mean = acc.coeff[k].value() / n;
            let var = ((acc.coeff_sq[k].value() - n * mean * mean) / (n - 1.0)).max(0.0);
            let mut m = Matrix4::zeros();
            let mut slot = 0;
            for i in 0..4 {
                for j in i..4 {
                    let z = Complex64::new(acc.rho[k][slot].value(), acc.rho[k][slot + 1].value()) / n;
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                    slot += 2;
                }
            }
            let leakage = OFF_FAMILY.iter().map(|&(i, j)| m[(i, j)].norm()).fold(0.0, f64::max);
            Ok(McEstimate {
                time,
                coeff_mean: mean,
                coeff_stderr: (var / n).sqrt(),
                density_matrix: TwoQubitDensityMatrix::new(m)?,
                leakage,
                leakage_stderr: (acc.leak_sq[k].value() / n / n).sqrt(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McPoint {
    pub time: f64,
    pub coeff: f64,
    pub coeff_stderr: f64,
    pub negativity: f64,
    pub discord: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSeries {
    pub points: Vec<McPoint>,
    pub estimates: Vec<McEstimate>,
}

/// Negativity and discord of the trajectory-averaged states.
pub fn estimate_correlations(config: &McConfig) -> Result<McSeries> {
    let estimates = estimate_coefficient(config)?;
    let points = estimates
        .iter()
        .map(|e| {
            Ok(McPoint {
                time: e.time,
                coeff: e.coeff_mean,
                coeff_stderr: e.coeff_stderr,
                negativity: negativity(&e.density_matrix),
                discord: discord_of_bell_projection(&e.density_matrix)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(McSeries { points, estimates })
}

/// Agreement of one analytic point with its Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    pub time: f64,
    pub analytic: f64,
    pub estimate: f64,
    pub stderr: f64,
    /// `(estimate − analytic) / stderr`; zero when both agree exactly.
    pub z: f64,
    pub coeff_ok: bool,
    pub negativity_ok: bool,
    pub discord_ok: bool,
}

impl PointCheck {
    pub fn passed(&self) -> bool {
        self.coeff_ok && self.negativity_ok && self.discord_ok
    }
}

const EXACT: f64 = 1e-12;

/// Compares an analytic series with Monte Carlo estimates at `k` standard errors.
///
/// Negativity passes when `|N_mc − N| ≤ kσ`; discord passes when `Q_mc` lies
/// between `h` evaluated at `N ∓ kσ`, `h` being monotone in `|x|`.
pub fn compare(analytic: &CorrelationSeries, mc: &McSeries, k: f64) -> Result<Vec<PointCheck>> {
    if analytic.points.len() != mc.points.len() {
        return Err(Error::Config("series have different lengths".into()));
    }
    analytic
        .coefficients
        .iter()
        .zip(&analytic.points)
        .zip(&mc.points)
        .map(|((&c, a), m)| {
            let s = m.coeff_stderr;
            let diff = m.coeff - c;
            let z = if diff.abs() <= EXACT { 0.0 } else { diff / s };
            let band = k * s + EXACT;
            let lo = h_function((a.negativity - k * s).max(0.0))?;
            let hi = h_function((a.negativity + k * s).min(1.0))?;
            Ok(PointCheck {
                time: a.time,
                analytic: c,
                estimate: m.coeff,
                stderr: s,
                z,
                coeff_ok: diff.abs() <= band,
                negativity_ok: (m.negativity - a.negativity).abs() <= band,
                discord_ok: m.discord >= lo - EXACT && m.discord <= hi + EXACT,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_series, TimeGrid};
    use crate::qstate::{phi_plus, psi_plus};
    use crate::rtn::dephasing_factor;
    use crate::spectra::RateDistribution;

    fn narrow(g0: f64) -> RateDistribution {
        RateDistribution::new(1.0, g0, g0 * (1.0 + 1e-9)).unwrap()
    }

    fn mc(s: Scenario, top: Topology, dist: RateDistribution, nf: usize, n: usize) -> McConfig {
        McConfig::new(ScenarioConfig::new(s, top, dist, nf, TimeGrid::uniform(6.0, 25).unwrap(), 77), n)
    }

    fn overlap(a: &Vector4<Complex64>, b: &Vector4<Complex64>) -> f64 {
        a.dotc(b).norm_sqr()
    }

    #[test]
    fn evolution_examples() {
        let s = evolve_trajectory(0.0, 0.0);
        assert!((s - phi_plus()).norm() < 1e-15);
        let s = evolve_trajectory(0.3, std::f64::consts::FRAC_PI_2 - 0.3);
        assert!((s - psi_plus() * Complex64::i()).norm() < 1e-15);
        for &(a, b) in &[(0.1, 2.0), (-1.3, 0.4), (5.0, 7.0)] {
            let s = evolve_trajectory(a, b);
            assert!((s.norm() - 1.0).abs() < 1e-15);
            assert!((overlap(&phi_plus(), &s) + overlap(&psi_plus(), &s) - 1.0).abs() < 1e-14);
            let closed = phi_plus() * Complex64::from((a + b).cos()) + psi_plus() * Complex64::new(0.0, (a + b).sin());
            assert!((s - closed).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_small_runs() {
        assert!(mc(Scenario::SingleRandomFluctuator, Topology::Common, narrow(1.0), 1, 999).validate().is_err());
    }

    #[test]
    fn plain_rtn_matches_closed_form() {
        for top in [Topology::Separate, Topology::Common] {
            let cfg = mc(Scenario::SingleRandomFluctuator, top, narrow(1.3), 1, 20_000);
            for e in estimate_coefficient(&cfg).unwrap() {
                let want = match top {
                    Topology::Separate => dephasing_factor(1.3, 2.0, e.time).powi(2),
                    Topology::Common => dephasing_factor(1.3, 4.0, e.time),
                };
                assert!((e.coeff_mean - want).abs() <= 4.0 * e.coeff_stderr + 1e-12, "{top:?} t={}", e.time);
                assert!(e.stays_in_bell_family(), "t={}: {} vs {}", e.time, e.leakage, e.leakage_stderr);
            }
        }
    }

    #[test]
    fn common_environment_is_not_two_copies() {
        // With a shared fluctuator the estimate follows D₄; two independent copies would give D₂².
        let g = 0.5;
        let cfg = mc(Scenario::SingleRandomFluctuator, Topology::Common, narrow(g), 1, 20_000);
        let est = estimate_coefficient(&cfg).unwrap();
        let worst = est
            .iter()
            .map(|e| (e.coeff_mean - dephasing_factor(g, 2.0, e.time).powi(2)).abs() / e.coeff_stderr.max(1e-12))
            .fold(0.0, f64::max);
        assert!(worst > 20.0);
    }

    #[test]
    fn fixed_collection_matches_product() {
        let d = RateDistribution::with_default_range(1.0).unwrap();
        let cfg = mc(Scenario::FixedCollection, Topology::Separate, d, 20, 20_000);
        let series = evolve_series(&cfg.scenario).unwrap();
        let est = estimate_coefficient(&cfg).unwrap();
        for (e, c) in est.iter().zip(&series.coefficients) {
            assert!((e.coeff_mean - c).abs() <= 4.0 * e.coeff_stderr + 1e-12, "t={}", e.time);
        }
    }

    #[test]
    fn stderr_scales_as_inverse_root_n() {
        let d = RateDistribution::with_default_range(1.0).unwrap();
        let small = estimate_coefficient(&mc(Scenario::SingleRandomFluctuator, Topology::Separate, d, 1, 5_000)).unwrap();
        let large = estimate_coefficient(&mc(Scenario::SingleRandomFluctuator, Topology::Separate, d, 1, 20_000)).unwrap();
        for (a, b) in small.iter().zip(&large).skip(1) {
            let r = a.coeff_stderr / b.coeff_stderr;
            assert!((r / 2.0 - 1.0).abs() < 0.2, "t={}: ratio {r}", a.time);
        }
    }

    #[test]
    fn identical_for_any_thread_count() {
        let d = RateDistribution::with_default_range(1.0).unwrap();
        let mut cfg = mc(Scenario::RandomRateCollection, Topology::Separate, d, 3, 3_000);
        cfg.threads = Some(1);
        let serial = estimate_coefficient(&cfg).unwrap();
        cfg.threads = Some(3);
        let parallel = estimate_coefficient(&cfg).unwrap();
        cfg.threads = None;
        let default = estimate_coefficient(&cfg).unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(serial, default);
    }

    #[test]
    fn initial_point_is_exact() {
        let d = RateDistribution::with_default_range(2.0).unwrap();
        let s = estimate_correlations(&mc(Scenario::FixedCollection, Topology::Common, d, 4, 1_000)).unwrap();
        let p = s.points[0];
        assert_eq!((p.coeff, p.negativity, p.discord, p.coeff_stderr), (1.0, 1.0, 1.0, 0.0));
    }

    #[test]
    fn grids_not_starting_at_zero() {
        let mut cfg = mc(Scenario::SingleRandomFluctuator, Topology::Separate, narrow(2.5), 1, 10_000);
        cfg.scenario.time_grid = TimeGrid::new(vec![0.5, 1.0, 3.0]).unwrap();
        for e in estimate_coefficient(&cfg).unwrap() {
            let want = dephasing_factor(2.5, 2.0, e.time).powi(2);
            assert!((e.coeff_mean - want).abs() <= 4.0 * e.coeff_stderr, "t={}", e.time);
        }
    }

    #[test]
    fn pink_collection_decoheres_completely() {
        let d = RateDistribution::with_default_range(1.0).unwrap();
        let mut cfg = mc(Scenario::RandomRateCollection, Topology::Separate, d, 20, 10_000);
        cfg.scenario.time_grid = TimeGrid::new(vec![0.0, 40.0]).unwrap();
        let s = estimate_correlations(&cfg).unwrap();
        let last = s.points[1];
        assert!(last.negativity <= 3.0 * last.coeff_stderr + 1e-3);
        assert!(last.discord <= h_function((3.0 * last.coeff_stderr).min(1.0)).unwrap() + 1e-6);
    }
}
