//! A single random telegraph fluctuator coupled to one qubit.
//!
//! The fluctuator value `c(t) = ±1` flips at rate `γ`; the qubit picks up the
//! phase `φ(t) = -ν ∫₀ᵗ c(s) ds`. Averaging `e^{imφ}` over histories gives the
//! dephasing factor `D_{mν}(γ, t)`.

use rand::Rng;
use rand_distr::{Beta, Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::quad::{integrate_with_breaks, Tolerance};
use crate::special::{i0e, i1e};
use crate::Result;

/// Qubit-fluctuator coupling. Every rate and time in the crate is in units of it.
pub const NU: f64 = 1.0;

/// Relative width below which `γ = mν` is treated as the critical point.
const CRITICAL_TOL: f64 = 1e-9;

/// Phase multiplier: `2` for a fluctuator seen by one qubit of the pair, `4`
/// when both qubits share it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Multiplier {
    Two,
    Four,
}

impl Multiplier {
    pub fn value(self) -> f64 {
        match self {
            Multiplier::Two => 2.0,
            Multiplier::Four => 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtnParams {
    gamma: f64,
    multiplier: Multiplier,
}

impl RtnParams {
    pub fn new(gamma: f64, multiplier: Multiplier) -> Result<Self> {
        check_rate(gamma)?;
        Ok(Self { gamma, multiplier })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn multiplier(&self) -> Multiplier {
        self.multiplier
    }

    pub fn nu(&self) -> f64 {
        NU
    }
}

fn check_rate(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(domain("gamma", gamma, "(0, inf)"))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(domain("t", t, "[0, inf)"))
    }
}

/// `D_{mν}(γ, t)` for validated parameters.
pub fn d_coefficient(params: RtnParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(dephasing_factor(params.gamma, params.multiplier.value(), t))
}

/// Unchecked `D_{mν}(γ, t)` for any `m > 0`, `γ > 0`, `t ≥ 0`.
///
/// Overdamped (`γ > mν`): `e^{-γt}[cosh κt + (γ/κ) sinh κt]`,
/// underdamped: `e^{-γt}[cos κt + (γ/κ) sin κt]`, with `κ = √|γ² - m²ν²|`.
pub fn dephasing_factor(gamma: f64, m: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let a = m * NU;
    let gt = gamma * t;
    let d = if (gamma - a).abs() < CRITICAL_TOL * a {
        (-gt).exp() * (1.0 + gt)
    } else if gamma > a {
        let k = ((gamma - a) * (gamma + a)).sqrt();
        let kt = k * t;
        if kt > 1.0 {
            // Both exponentials kept separately; γ - κ is formed as m²ν²/(γ + κ).
            let slow = a * a / (gamma + k);
            let r = gamma / k;
            0.5 * ((-slow * t).exp() * (1.0 + r) + (-(gamma + k) * t).exp() * (1.0 - r))
        } else {
            (-gt).exp() * (kt.cosh() + gt * sinhc(kt))
        }
    } else {
        let k = ((a - gamma) * (a + gamma)).sqrt();
        let kt = k * t;
        (-gt).exp() * (kt.cos() + gt * sinc(kt))
    };
    d.clamp(-1.0, 1.0)
}

fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 * (1.0 + x2 / 20.0)
    } else {
        x.sinh() / x
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// Power spectral density `S(f) = 4γ / (4π²f² + γ²)` of a telegraph signal whose
/// autocorrelation is `e^{-γ|τ|}`.
///
/// A fluctuator flipping at rate `r` has autocorrelation `e^{-2r|τ|}`, so its
/// spectrum is `rtn_psd(2r, f)`.
pub fn rtn_psd(gamma: f64, f: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * f;
    4.0 * gamma / (w * w + gamma * gamma)
}

/// Phase density at a point: the weight of the atom sitting there (if any)
/// and the continuous density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDensity {
    pub atom_weight: f64,
    pub density: f64,
}

/// Law of `φ(t)` for a fluctuator with a uniformly random initial value.
///
/// Histories without a flip put mass `½e^{-γt}` on each of `φ = ±νt`; the rest
/// is spread over `(-νt, νt)` with density
/// `½(γ/ν)e^{-γt}[I₁(z)/s + I₀(z)]`, `s = √(1 - (φ/νt)²)`, `z = γts`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDistribution {
    gamma: f64,
    t: f64,
}

impl PhaseDistribution {
    pub fn new(gamma: f64, t: f64) -> Result<Self> {
        check_rate(gamma)?;
        check_time(t)?;
        Ok(Self { gamma, t })
    }

    /// Weight of each of the two atoms.
    pub fn atom_weight(&self) -> f64 {
        0.5 * (-self.gamma * self.t).exp()
    }

    /// `±νt`.
    pub fn atom_positions(&self) -> [f64; 2] {
        [-NU * self.t, NU * self.t]
    }

    pub fn continuous_density(&self, phi: f64) -> f64 {
        let edge = NU * self.t;
        if edge == 0.0 || phi.abs() >= edge {
            return 0.0;
        }
        let x = phi / edge;
        let s = ((1.0 - x) * (1.0 + x)).sqrt();
        let gt = self.gamma * self.t;
        let z = gt * s;
        // e^{-γt} I(z) = e^{-γt(1-s)} Ie(z), and 1 - s = x²/(1 + s).
        let scale = (-gt * x * x / (1.0 + s)).exp();
        // I₁(z)/s = γt · I₁(z)/z, finite as s → 0.
        let i1_over_s = if z > 0.0 { gt * i1e(z) / z } else { 0.5 * gt };
        0.5 * (self.gamma / NU) * scale * (i1_over_s + i0e(z))
    }

    pub fn at(&self, phi: f64) -> PhaseDensity {
        let atom_weight = if self.atom_positions().contains(&phi) {
            self.atom_weight()
        } else {
            0.0
        };
        PhaseDensity {
            atom_weight,
            density: self.continuous_density(phi),
        }
    }

    /// Integral of the continuous part over `(-νt, φ]`.
    pub fn continuous_cdf(&self, phi: f64) -> Result<f64> {
        let edge = NU * self.t;
        if phi <= -edge {
            return Ok(0.0);
        }
        let hi = phi.min(edge);
        let mut breaks = vec![-edge];
        if hi > 0.0 {
            breaks.push(0.0);
        }
        breaks.push(hi);
        Ok(integrate_with_breaks(|p| self.continuous_density(p), &breaks, tolerance())?.value)
    }

    /// Full distribution function, atoms included.
    pub fn cdf(&self, phi: f64) -> Result<f64> {
        let [lo, hi] = self.atom_positions();
        let mut c = self.continuous_cdf(phi)?;
        if phi >= lo {
            c += self.atom_weight();
        }
        if phi >= hi {
            c += self.atom_weight();
        }
        Ok(c.min(1.0))
    }

    /// `P(φ < x)`.
    pub fn cdf_left(&self, phi: f64) -> Result<f64> {
        let [lo, hi] = self.atom_positions();
        let mut c = self.continuous_cdf(phi)?;
        if phi > lo {
            c += self.atom_weight();
        }
        if phi > hi {
            c += self.atom_weight();
        }
        Ok(c.min(1.0))
    }

    /// `E[cos(mφ)]` by quadrature over the density; equals `D_{mν}(γ, t)`.
    pub fn cos_moment(&self, m: f64) -> Result<f64> {
        let edge = NU * self.t;
        let atoms = 2.0 * self.atom_weight() * (m * edge).cos();
        if edge == 0.0 {
            return Ok(atoms);
        }
        let cont = integrate_with_breaks(
            |p| (m * p).cos() * self.continuous_density(p),
            &[-edge, 0.0, edge],
            tolerance(),
        )?;
        Ok(atoms + cont.value)
    }
}

fn tolerance() -> Tolerance {
    Tolerance {
        abs: 1e-14,
        rel: 1e-11,
        max_intervals: 4000,
    }
}

/// Phase density at `φ` for rate `γ` and time `t`.
pub fn phase_pdf(gamma: f64, t: f64, phi: f64) -> Result<PhaseDensity> {
    Ok(PhaseDistribution::new(gamma, t)?.at(phi))
}

/// One sampled history: the initial value and the ordered flip times up to the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct RtnTrajectory {
    pub initial: f64,
    pub flip_times: Vec<f64>,
    pub horizon: f64,
}

/// Wrapper marking a sampled phase value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtnPhase(pub f64);

impl RtnPhase {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn sample_trajectory<R: Rng + ?Sized>(gamma: f64, horizon: f64, rng: &mut R) -> Result<RtnTrajectory> {
    check_rate(gamma)?;
    check_time(horizon)?;
    let initial = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let mut flip_times = Vec::new();
    let mut t = 0.0;
    loop {
        let wait: f64 = Exp1.sample(rng);
        t += wait / gamma;
        if t > horizon {
            break;
        }
        flip_times.push(t);
    }
    Ok(RtnTrajectory {
        initial,
        flip_times,
        horizon,
    })
}

impl RtnTrajectory {
    /// `c(t)`; right-continuous at flips.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.flip_times.partition_point(|&s| s <= t);
        if n % 2 == 0 {
            self.initial
        } else {
            -self.initial
        }
    }

    /// `φ` at each of the ascending `times`.
    pub fn phases(&self, times: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(times.len());
        let mut flips = self.flip_times.iter().peekable();
        let (mut last, mut c, mut integral) = (0.0, self.initial, 0.0);
        for &t in times {
            while let Some(&&s) = flips.peek() {
                if s > t {
                    break;
                }
                integral += c * (s - last);
                last = s;
                c = -c;
                flips.next();
            }
            out.push(-NU * (integral + c * (t - last)));
        }
        out
    }

    /// Mean of `c` over each of `n` consecutive bins of width `dt` starting at 0.
    pub fn bin_averages(&self, dt: f64, n: usize) -> Vec<f64> {
        let edges: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        let phi = self.phases(&edges);
        phi.windows(2).map(|w| -(w[1] - w[0]) / (NU * dt)).collect()
    }
}

pub fn phase_of(trajectory: &RtnTrajectory, t: f64) -> Result<RtnPhase> {
    check_time(t)?;
    if t > trajectory.horizon {
        return Err(domain("t", t, "[0, horizon]"));
    }
    Ok(RtnPhase(trajectory.phases(&[t])[0]))
}

/// Draws `φ(t_k)` on an ascending grid starting at 0 and adds it into `out`.
///
/// The law is exact. Sparse histories are walked flip by flip; dense ones
/// draw, per interval, the flip count (Poisson) and the fraction of time spent
/// in the initial state, which given `n` flips is
/// `Beta(⌊n/2⌋ + 1, ⌈n/2⌉)`.
pub fn accumulate_grid_phases<R: Rng + ?Sized>(gamma: f64, grid: &[f64], rng: &mut R, out: &mut [f64]) {
    debug_assert_eq!(grid.len(), out.len());
    let Some(&horizon) = grid.last() else {
        return;
    };
    let mut c = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let intervals = grid.len().saturating_sub(1).max(1) as f64;
    if gamma * horizon <= 4.0 * intervals {
        let first: f64 = Exp1.sample(rng);
        let mut next = grid[0] + first / gamma;
        let (mut last, mut integral) = (grid[0], 0.0);
        for (k, &t) in grid.iter().enumerate() {
            while next <= t {
                integral += c * (next - last);
                last = next;
                c = -c;
                let wait: f64 = Exp1.sample(rng);
                next += wait / gamma;
            }
            out[k] += -NU * (integral + c * (t - last));
        }
    } else {
        let mut phi = 0.0;
        for k in 0..grid.len() {
            if k > 0 {
                let dt = grid[k] - grid[k - 1];
                let lambda = gamma * dt;
                let n = if lambda > 0.0 {
                    Poisson::new(lambda).expect("positive mean").sample(rng) as u64
                } else {
                    0
                };
                let frac = if n == 0 {
                    1.0
                } else {
                    let a = (n / 2 + 1) as f64;
                    let b = n.div_ceil(2) as f64;
                    Beta::new(a, b).expect("positive shapes").sample(rng)
                };
                phi += -NU * c * dt * (2.0 * frac - 1.0);
                if n % 2 == 1 {
                    c = -c;
                }
            }
            out[k] += phi;
        }
    }
}

/// Bin means of `c` over `n` bins of width `dt`, drawn with the same exact
/// increment law as [`accumulate_grid_phases`], added into `out`.
pub fn accumulate_bin_averages<R: Rng + ?Sized>(gamma: f64, dt: f64, rng: &mut R, out: &mut [f64]) {
    let n = out.len();
    let grid: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let mut phi = vec![0.0; n + 1];
    accumulate_grid_phases(gamma, &grid, rng, &mut phi);
    for (o, w) in out.iter_mut().zip(phi.windows(2)) {
        *o += -(w[1] - w[0]) / (NU * dt);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};
    use approx::assert_relative_eq;

    #[test]
    fn known_values() {
        let p = RtnParams::new(1.0, Multiplier::Two).unwrap();
        assert_relative_eq!(d_coefficient(p, 1.0).unwrap(), 0.150_574_365_145_887_62, epsilon = 1e-14);
        assert_eq!(d_coefficient(p, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RtnParams::new(0.0, Multiplier::Two).is_err());
        assert!(RtnParams::new(f64::NAN, Multiplier::Four).is_err());
        let p = RtnParams::new(1.0, Multiplier::Four).unwrap();
        assert!(d_coefficient(p, -1.0).is_err());
        assert!(PhaseDistribution::new(1.0, -0.1).is_err());
    }

    #[test]
    fn continuous_across_critical_rate() {
        for &m in &[2.0, 4.0] {
            for &t in &[0.1, 1.0, 7.0, 40.0] {
                let c = dephasing_factor(m, m, t);
                for &eps in &[1e-7, 1e-5] {
                    let above = dephasing_factor(m * (1.0 + eps), m, t);
                    let below = dephasing_factor(m * (1.0 - eps), m, t);
                    assert!((above - c).abs() < 50.0 * eps * (1.0 + t * t), "{m} {t} {eps}");
                    assert!((below - c).abs() < 50.0 * eps * (1.0 + t * t), "{m} {t} {eps}");
                }
            }
        }
    }

    #[test]
    fn limits() {
        // Slow fluctuator: static random phase ±νt.
        assert_relative_eq!(dephasing_factor(1e-9, 2.0, 1.3), (2.6f64).cos(), epsilon = 1e-8);
        // Very fast fluctuator: motional narrowing, D ≈ exp(-m²ν²t/(2γ)).
        let (g, t) = (1e4, 50.0);
        assert_relative_eq!(dephasing_factor(g, 2.0, t), (-4.0 * t / (2.0 * g)).exp(), max_relative = 1e-6);
        // Long times in the overdamped branch stay finite and positive.
        let d = dephasing_factor(1e4, 4.0, 1e5);
        assert!(d > 0.0 && d.is_finite());
    }

    #[test]
    fn density_moments_match_closed_form() {
        for &(g, t) in &[(0.3, 2.0), (1.0, 1.0), (5.0, 3.0), (50.0, 2.0), (3.0, 0.01)] {
            let law = PhaseDistribution::new(g, t).unwrap();
            let mass = 2.0 * law.atom_weight() + law.continuous_cdf(t).unwrap();
            assert_relative_eq!(mass, 1.0, epsilon = 1e-10);
            for &m in &[2.0, 4.0] {
                assert_relative_eq!(law.cos_moment(m).unwrap(), dephasing_factor(g, m, t), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn pdf_reports_atoms_separately() {
        let p = phase_pdf(1.0, 2.0, 2.0).unwrap();
        assert_relative_eq!(p.atom_weight, 0.5 * (-2.0f64).exp());
        assert_eq!(p.density, 0.0);
        let q = phase_pdf(1.0, 2.0, 0.5).unwrap();
        assert_eq!(q.atom_weight, 0.0);
        assert!(q.density > 0.0);
    }

    #[test]
    fn monte_carlo_average_matches_d() {
        let n = 100_000;
        for &(g, m, t) in &[(1.0f64, 2.0f64, 1.0f64), (0.5, 4.0, 2.0), (8.0, 2.0, 1.5)] {
            let mut rng = stream(11, Domain::AUX, (g * 100.0) as u64);
            let xs: Vec<f64> = (0..n)
                .map(|_| {
                    let tr = sample_trajectory(g, t, &mut rng).unwrap();
                    (m * phase_of(&tr, t).unwrap().value()).cos()
                })
                .collect();
            let (mean, se) = crate::stats::mean_stderr(&xs);
            let d = dephasing_factor(g, m, t);
            assert!((mean - d).abs() < 4.0 * se + 1e-3, "{g} {m} {t}: {mean} vs {d}");
        }
    }

    #[test]
    fn autocorrelation_is_exponential() {
        let g = 1.5;
        let mut rng = stream(3, Domain::AUX, 0);
        for &tau in &[0.2, 0.5, 1.0] {
            let xs: Vec<f64> = (0..50_000)
                .map(|_| {
                    let tr = sample_trajectory(g, 2.0 + tau, &mut rng).unwrap();
                    tr.value_at(2.0) * tr.value_at(2.0 + tau)
                })
                .collect();
            let (mean, se) = crate::stats::mean_stderr(&xs);
            let want = (-2.0 * g * tau).exp();
            assert!((mean - want).abs() < 4.0 * se, "{tau}: {mean} vs {want}");
        }
    }

    #[test]
    fn sampled_phases_follow_the_density() {
        let (g, t) = (2.0, 1.5);
        let law = PhaseDistribution::new(g, t).unwrap();
        let mut rng = stream(5, Domain::AUX, 1);
        let n = 20_000;
        let mut inner = Vec::new();
        let mut atoms = 0usize;
        for _ in 0..n {
            let tr = sample_trajectory(g, t, &mut rng).unwrap();
            if tr.flip_times.is_empty() {
                atoms += 1;
            } else {
                inner.push(phase_of(&tr, t).unwrap().value());
            }
        }
        let p_atoms = 2.0 * law.atom_weight();
        let sd = (p_atoms * (1.0 - p_atoms) / n as f64).sqrt();
        assert!((atoms as f64 / n as f64 - p_atoms).abs() < 4.0 * sd);
        inner.sort_by(f64::total_cmp);
        let cont = 1.0 - p_atoms;
        let d = crate::stats::ks_statistic(&inner, |x| law.continuous_cdf(x).unwrap() / cont);
        assert!(crate::stats::ks_pvalue(d, inner.len()) > 1e-3, "D = {d}");
    }

    #[test]
    fn grid_sampler_matches_d_in_both_regimes() {
        let grid: Vec<f64> = (0..=10).map(|k| 0.3 * k as f64).collect();
        // Sparse walk (γT small) and per-interval draws (γT large).
        for &g in &[0.7, 300.0] {
            let mut rng = stream(9, Domain::AUX, g as u64);
            let n = 40_000;
            let mut acc = vec![Vec::with_capacity(n); grid.len()];
            for _ in 0..n {
                let mut phi = vec![0.0; grid.len()];
                accumulate_grid_phases(g, &grid, &mut rng, &mut phi);
                for (a, p) in acc.iter_mut().zip(&phi) {
                    a.push((2.0 * p).cos());
                }
            }
            for (k, xs) in acc.iter().enumerate() {
                let (mean, se) = crate::stats::mean_stderr(xs);
                let d = dephasing_factor(g, 2.0, grid[k]);
                assert!((mean - d).abs() <= 4.5 * se + 1e-12, "g={g} t={}: {mean} vs {d}", grid[k]);
            }
        }
    }

    #[test]
    fn welch_spectrum_matches_lorentzian() {
        let flip = 1.0;
        let fs = 100.0;
        let seg = 8192;
        let n = seg * 200;
        let mut rng = stream(21, Domain::AUX, 0);
        let tr = sample_trajectory(flip, n as f64 / fs, &mut rng).unwrap();
        let x = tr.bin_averages(1.0 / fs, n);
        let (freqs, psd) = crate::spectra::welch_psd(&x, fs, seg);
        let dt = 1.0 / fs;
        let mut f = flip / 10.0;
        while f <= 10.0 * flip {
            let (mut s, mut c) = (0.0, 0);
            for (fk, pk) in freqs.iter().zip(&psd) {
                if *fk >= f / 1.15 && *fk <= f * 1.15 {
                    s += pk / crate::spectra::hold_response(fk * dt);
                    c += 1;
                }
            }
            let est = s / c as f64;
            let want = rtn_psd(2.0 * flip, f);
            assert!((est / want - 1.0).abs() < 0.1, "f = {f}: {est} vs {want}");
            f *= 1.5;
        }
    }

    #[test]
    fn critical_bound_fails_once_overdamped() {
        // e^{-γt}(1+γt) bounds D only up to the critical rate; a fast fluctuator
        // is motionally narrowed and keeps D close to 1.
        assert!(dephasing_factor(100.0, 2.0, 1.0) > 0.9);
        assert!((-100.0f64).exp() * 101.0 < 1e-40);
    }

    #[test]
    fn phase_is_exact_under_refinement() {
        let mut rng = stream(13, Domain::AUX, 0);
        let tr = sample_trajectory(3.0, 10.0, &mut rng).unwrap();
        let coarse = [0.0, 2.5, 5.0, 7.5, 10.0];
        let fine: Vec<f64> = (0..=4000).map(|k| k as f64 * 0.0025).collect();
        let a = tr.phases(&coarse);
        let b = tr.phases(&fine);
        for (i, x) in a.iter().enumerate() {
            assert!((x - b[i * 1000]).abs() < 1e-12);
        }
        for (i, &t) in coarse.iter().enumerate() {
            assert!((phase_of(&tr, t).unwrap().value() - a[i]).abs() < 1e-12);
        }
        assert!(phase_of(&tr, 10.5).is_err());
    }

    #[test]
    fn same_stream_same_history() {
        let a = sample_trajectory(2.0, 5.0, &mut stream(4, Domain::AUX, 9)).unwrap();
        let b = sample_trajectory(2.0, 5.0, &mut stream(4, Domain::AUX, 9)).unwrap();
        assert_eq!(a, b);
        let grid = [0.0, 1.0, 2.0];
        let (mut x, mut y) = ([0.0; 3], [0.0; 3]);
        accumulate_grid_phases(50.0, &grid, &mut stream(4, Domain::AUX, 1), &mut x);
        accumulate_grid_phases(50.0, &grid, &mut stream(4, Domain::AUX, 1), &mut y);
        assert_eq!(x, y);
    }

    #[test]
    fn psd_examples() {
        assert_relative_eq!(rtn_psd(2.0, 0.0), 2.0);
        let g = 3.0;
        assert_relative_eq!(rtn_psd(g, g / (2.0 * std::f64::consts::PI)), 2.0 / g, epsilon = 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn d_is_bounded(lg in -4.0f64..4.0, t in 0.0f64..50.0, four in proptest::bool::ANY) {
            let (g, m) = (10f64.powf(lg), if four { 4.0 } else { 2.0 });
            let d = dephasing_factor(g, m, t);
            proptest::prop_assert!((-1.0..=1.0).contains(&d));
            if g <= m {
                proptest::prop_assert!(d.abs() <= (-g * t).exp() * (1.0 + g * t) + 1e-12);
            }
        }

        #[test]
        fn overdamped_decay_is_monotone(excess in 0.0f64..100.0, four in proptest::bool::ANY) {
            let m = if four { 4.0 } else { 2.0 };
            let g = m * (1.0 + excess);
            let mut last = 1.0;
            for k in 0..=400 {
                let d = dephasing_factor(g, m, 0.05 * k as f64);
                proptest::prop_assert!(d >= 0.0 && d <= last + 1e-15);
                last = d;
            }
        }
    }
}
