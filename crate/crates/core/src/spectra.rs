//! Power-law switching-rate laws and the `1/f^α` spectra they produce.

use std::f64::consts::PI;

use rand::Rng;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::quad::{integrate_with_breaks, Tolerance};
use crate::rng::{stream, Domain};
use crate::rtn::{accumulate_bin_averages, rtn_psd};
use crate::stats::log_log_slope;
use crate::{Error, Result};

/// `p_α(γ) ∝ γ^{-α}` on `[γ₁, γ₂]`, `α ∈ [1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateDistribution {
    alpha: f64,
    gamma_min: f64,
    gamma_max: f64,
}

pub const DEFAULT_GAMMA_MIN: f64 = 1e-4;
pub const DEFAULT_GAMMA_MAX: f64 = 1e4;

impl RateDistribution {
    pub fn new(alpha: f64, gamma_min: f64, gamma_max: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&alpha) {
            return Err(domain("alpha", alpha, "[1, 2]"));
        }
        if !(gamma_min.is_finite() && gamma_min > 0.0) {
            return Err(domain("gamma_min", gamma_min, "(0, inf)"));
        }
        if !(gamma_max.is_finite() && gamma_max > gamma_min) {
            return Err(domain("gamma_max", gamma_max, "(gamma_min, inf)"));
        }
        Ok(Self {
            alpha,
            gamma_min,
            gamma_max,
        })
    }

    /// Rates on `[10⁻⁴, 10⁴]`.
    pub fn with_default_range(alpha: f64) -> Result<Self> {
        Self::new(alpha, DEFAULT_GAMMA_MIN, DEFAULT_GAMMA_MAX)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma_min(&self) -> f64 {
        self.gamma_min
    }

    pub fn gamma_max(&self) -> f64 {
        self.gamma_max
    }

    fn log_span(&self) -> f64 {
        (self.gamma_max / self.gamma_min).ln()
    }

    // 1 - (γ₁/γ₂)^{α-1}
    fn tail_norm(&self) -> f64 {
        -((self.alpha - 1.0) * (self.gamma_min / self.gamma_max).ln()).exp_m1()
    }

    pub fn pdf(&self, gamma: f64) -> f64 {
        if !(gamma >= self.gamma_min && gamma <= self.gamma_max) {
            return 0.0;
        }
        self.log_density(gamma) / gamma
    }

    /// `γ p(γ)`, the density in `ln γ`.
    pub fn log_density(&self, gamma: f64) -> f64 {
        if !(gamma >= self.gamma_min && gamma <= self.gamma_max) {
            return 0.0;
        }
        if self.alpha == 1.0 {
            1.0 / self.log_span()
        } else {
            let b = self.alpha - 1.0;
            b * (self.gamma_min / gamma).powf(b) / self.tail_norm()
        }
    }

    pub fn cdf(&self, gamma: f64) -> f64 {
        if gamma <= self.gamma_min {
            return 0.0;
        }
        if gamma >= self.gamma_max {
            return 1.0;
        }
        if self.alpha == 1.0 {
            (gamma / self.gamma_min).ln() / self.log_span()
        } else {
            let b = self.alpha - 1.0;
            -((b * (self.gamma_min / gamma).ln()).exp_m1()) / self.tail_norm()
        }
    }

    /// Inverse of [`cdf`](Self::cdf) for `u ∈ [0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let g = if self.alpha == 1.0 {
            self.gamma_min * (u * self.log_span()).exp()
        } else {
            let b = self.alpha - 1.0;
            let d = self.tail_norm();
            // log of 1 - u·d, rewritten near u = 1 as (γ₁/γ₂)^b + (1 - u)·d
            let x = if u <= 0.5 {
                (-u * d).ln_1p()
            } else {
                ((b * (self.gamma_min / self.gamma_max).ln()).exp() + (1.0 - u) * d).ln()
            };
            self.gamma_min * (-x / b).exp()
        };
        g.clamp(self.gamma_min, self.gamma_max)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    /// `[10γ₁/2π, γ₂/20π]`: one decade inside the rate range on both sides.
    pub fn fit_band(&self) -> (f64, f64) {
        (10.0 * self.gamma_min / (2.0 * PI), self.gamma_max / (20.0 * PI))
    }
}

pub fn rate_pdf(dist: &RateDistribution, gamma: f64) -> f64 {
    dist.pdf(gamma)
}

pub fn sample_rate<R: Rng + ?Sized>(dist: &RateDistribution, rng: &mut R) -> f64 {
    dist.sample(rng)
}

fn check_frequency(f: f64) -> Result<()> {
    if f.is_finite() && f > 0.0 {
        Ok(())
    } else {
        Err(domain("f", f, "(0, inf)"))
    }
}

/// `∫ S_RTN(f, γ) p_α(γ) dγ`, integrated in `ln γ` with a break at `γ = 2πf`.
pub fn synthesized_spectrum(dist: &RateDistribution, f: f64) -> Result<f64> {
    check_frequency(f)?;
    let (lo, hi) = (dist.gamma_min.ln(), dist.gamma_max.ln());
    let corner = (2.0 * PI * f).ln();
    let mut breaks = vec![lo];
    if corner > lo && corner < hi {
        breaks.push(corner);
    }
    breaks.push(hi);
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-10,
        max_intervals: 4000,
    };
    let v = integrate_with_breaks(
        |u| {
            let g = u.exp();
            rtn_psd(g, f) * dist.log_density(g)
        },
        &breaks,
        tol,
    )?;
    Ok(v.value)
}

/// `Σ_j S_RTN(f, γ_j)`.
pub fn collection_spectrum(rates: &[f64], f: f64) -> Result<f64> {
    if rates.is_empty() {
        return Err(Error::Config("collection spectrum needs at least one rate".into()));
    }
    check_frequency(f)?;
    Ok(rates.iter().map(|&g| rtn_psd(g, f)).sum())
}

/// Log-log slope of `values` against `freqs`, using only points inside `band`.
pub fn fitted_slope(freqs: &[f64], values: &[f64], band: (f64, f64)) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) = freqs
        .iter()
        .zip(values)
        .filter(|(f, _)| **f >= band.0 && **f <= band.1)
        .map(|(f, v)| (*f, *v))
        .unzip();
    log_log_slope(&x, &y)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut out: Vec<f64> = (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect();
    out[0] = lo;
    out[n - 1] = hi;
    out
}

/// One-sided Welch estimate: Hann window, 50% overlap, bins `1..seg/2`.
pub fn welch_psd(x: &[f64], fs: f64, seg: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(seg >= 4 && x.len() >= seg, "signal shorter than one segment");
    let window: Vec<f64> = (0..seg)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / seg as f64).cos())
        .collect();
    let power: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(seg);
    let half = seg / 2;
    let mut acc = vec![0.0; half];
    let mut buf = vec![Complex::new(0.0, 0.0); seg];
    let mut count = 0usize;
    let mut start = 0;
    while start + seg <= x.len() {
        for (b, (v, w)) in buf.iter_mut().zip(x[start..start + seg].iter().zip(&window)) {
            *b = Complex::new(v * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf).skip(1) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += seg / 2;
    }
    let scale = 2.0 / (fs * power * count as f64);
    let freqs = (1..half).map(|k| k as f64 * fs / seg as f64).collect();
    let psd = acc[1..].iter().map(|a| a * scale).collect();
    (freqs, psd)
}

/// `sinc²(πx)`: power response of averaging over bins of width `dt`, at `x = f·dt`.
pub fn hold_response(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let s = (PI * x).sin() / (PI * x);
        s * s
    }
}

const DECADE_OVERSAMPLING: f64 = 200.0;
const DECADE_SEGMENT: usize = 2048;
const DECADE_SEGMENTS: usize = 256;

/// Welch estimate of `(1/N_f) Σ_j S_RTN(f, γ_j)` from simulated waveforms.
///
/// Each decade of `freqs` gets its own waveform sampled at 200 times the
/// decade's lower edge. Fluctuators flip at `γ_j/2`, so each has spectrum
/// `S_RTN(f, γ_j)`. Estimates average the Welch bins within ±12% of `f`.
pub fn collection_periodogram(rates: &[f64], freqs: &[f64], seed: u64) -> Result<Vec<f64>> {
    if rates.is_empty() {
        return Err(Error::Config("periodogram needs at least one rate".into()));
    }
    for &f in freqs {
        check_frequency(f)?;
    }
    let mut out = vec![0.0; freqs.len()];
    let mut decades: Vec<i32> = freqs.iter().map(|f| f.log10().floor() as i32).collect();
    decades.sort_unstable();
    decades.dedup();
    let n = DECADE_SEGMENT * (DECADE_SEGMENTS / 2 + 1);
    for d in decades {
        let fs = DECADE_OVERSAMPLING * 10f64.powi(d);
        let dt = 1.0 / fs;
        let mut x = vec![0.0; n];
        for (j, &g) in rates.iter().enumerate() {
            let index = ((d + 512) as u64) << 32 | j as u64;
            let mut rng = stream(seed, Domain::WAVEFORM, index);
            accumulate_bin_averages(0.5 * g, dt, &mut rng, &mut x);
        }
        let (bins, psd) = welch_psd(&x, fs, DECADE_SEGMENT);
        for (o, &f) in out.iter_mut().zip(freqs) {
            if f.log10().floor() as i32 != d {
                continue;
            }
            let (mut s, mut c) = (0.0, 0usize);
            for (fb, p) in bins.iter().zip(&psd) {
                if *fb >= f / 1.12 && *fb <= f * 1.12 {
                    s += p / hold_response(fb * dt);
                    c += 1;
                }
            }
            if c == 0 {
                let k = ((f / (fs / DECADE_SEGMENT as f64)).round() as usize).clamp(1, bins.len()) - 1;
                s = psd[k] / hold_response(bins[k] * dt);
                c = 1;
            }
            *o = s / c as f64 / rates.len() as f64;
        }
    }
    Ok(out)
}
