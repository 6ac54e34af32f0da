//! Small statistical helpers shared by the Monte Carlo engine and the tests.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Pairwise (cascade) sum of already-ordered terms.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Ordinary least-squares line through `(x, y)`: returns `(slope, intercept)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need at least two points for a fit");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).0
}

/// One-sample Kolmogorov–Smirnov statistic. `samples` must be sorted ascending.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = f - i as f64 / n;
            let hi = (i as f64 + 1.0) / n - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// KS statistic against a law with atoms. `cdf_left(x)` is `P(X < x)`.
///
/// Ties are collapsed, and the empirical and model laws are compared on both
/// sides of every distinct sample value.
pub fn ks_statistic_with_atoms<F, G>(samples: &[f64], cdf: F, cdf_left: G) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < samples.len() {
        let x = samples[i];
        let mut j = i;
        while j < samples.len() && samples[j] == x {
            j += 1;
        }
        d = d
            .max((cdf_left(x) - i as f64 / n).abs())
            .max((j as f64 / n - cdf(x)).abs());
        i = j;
    }
    d
}

/// Asymptotic p-value of the KS statistic `d` for `n` samples
/// (Kolmogorov series with Stephens' small-sample correction).
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..=100 {
        let k = f64::from(k);
        let term = (-2.0 * k * k * lambda * lambda).exp();
        p += if k as u32 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * p).clamp(0.0, 1.0)
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn fit_recovers_power_law() {
        let x: Vec<f64> = (1..50).map(|i| f64::from(i) * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-1.7)).collect();
        assert!((log_log_slope(&x, &y) + 1.7).abs() < 1e-12);
    }

    #[test]
    fn ks_pvalue_known_points() {
        // lambda = 1.358 is the 5% critical value, 1.628 the 1% one
        let n = 1_000_000usize;
        let sn = (n as f64).sqrt();
        let d = |lam: f64| lam / (sn + 0.12 + 0.11 / sn);
        assert!((ks_pvalue(d(1.358), n) - 0.05).abs() < 1e-3);
        assert!((ks_pvalue(d(1.628), n) - 0.01).abs() < 1e-3);
        assert_eq!(ks_pvalue(0.0, n), 1.0);
    }

    #[test]
    fn ks_statistic_of_exact_quantiles_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x);
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn ks_with_atoms_matches_plain_ks_without_ties() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.3) / 100.0).collect();
        let a = ks_statistic(&xs, |x| x);
        let b = ks_statistic_with_atoms(&xs, |x| x, |x| x);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn ks_with_atoms_accepts_exact_bernoulli_sample() {
        // half zeros, half ones against a fair coin
        let xs: Vec<f64> = (0..200).map(|i| if i < 100 { 0.0 } else { 1.0 }).collect();
        let cdf = |x: f64| if x < 0.0 { 0.0 } else if x < 1.0 { 0.5 } else { 1.0 };
        let left = |x: f64| if x <= 0.0 { 0.0 } else if x <= 1.0 { 0.5 } else { 1.0 };
        assert!(ks_statistic_with_atoms(&xs, cdf, left) < 1e-15);
        assert!(ks_statistic(&xs, cdf) > 0.4);
    }
}
