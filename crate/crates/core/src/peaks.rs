//! Revival peaks and sudden-death intervals of sampled time series.

/// Maxima below this height are treated as numerical noise.
pub const NOISE_FLOOR: f64 = 1e-3;

/// A peak must reach this fraction of each neighbouring maximum to count as a revival.
pub const DOMINANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub time: f64,
    pub height: f64,
}

/// Interior local maxima at or above `floor`. A flat top reports its first sample.
pub fn local_maxima(times: &[f64], values: &[f64], floor: f64) -> Vec<Peak> {
    assert_eq!(times.len(), values.len());
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i] >= floor)
        .map(|i| Peak {
            index: i,
            time: times[i],
            height: values[i],
        })
        .collect()
}

/// Local maxima above `floor` that are at least half as high as each
/// neighbouring maximum.
///
/// Small shoulders between two large revivals are dropped; a run of peaks
/// decaying by less than a factor two per step is kept intact.
pub fn revival_peaks(times: &[f64], values: &[f64], floor: f64) -> Vec<Peak> {
    let all = local_maxima(times, values, floor);
    (0..all.len())
        .filter(|&k| {
            let h = all[k].height;
            let left = k.checked_sub(1).map_or(true, |j| h >= DOMINANCE * all[j].height);
            let right = all.get(k + 1).map_or(true, |p| h >= DOMINANCE * p.height);
            left && right
        })
        .map(|k| all[k])
        .collect()
}

pub fn spacings(peaks: &[Peak]) -> Vec<f64> {
    peaks.windows(2).map(|w| w[1].time - w[0].time).collect()
}

/// Maximal runs of samples below `threshold` that end before the last sample,
/// as `(first time, last time)` of the run.
pub fn dead_intervals(times: &[f64], values: &[f64], threshold: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &v) in values.iter().enumerate() {
        match (v < threshold, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((times[s], times[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    out
}

/// True when no step increases by more than `tol`.
pub fn is_nonincreasing(values: &[f64], tol: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + tol)
}
