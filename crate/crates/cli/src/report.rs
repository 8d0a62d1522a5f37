//! Comparison of observable series between engines, and the machine-readable
//! run report.

use anyhow::{bail, Result};
use serde::Serialize;

use seplind_core::observables::TimeSeries;

/// Per-time comparison of two series on the same grid.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonPoint {
    pub time: f64,
    /// `mean_a - mean_b`.
    pub diff: f64,
    /// Three combined standard deviations, `3 sqrt(s_a^2 + s_b^2)`.
    pub threshold: f64,
    pub flagged: bool,
}

/// Comparison of one observable between two engines.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesComparison {
    pub observable: String,
    pub series_a: String,
    pub series_b: String,
    pub max_abs_diff: f64,
    /// Number of grid times where the difference exceeds the combined
    /// three-standard-deviation band.
    pub flagged_times: usize,
    pub significant: bool,
    pub points: Vec<ComparisonPoint>,
}

/// Point-by-point difference of two series, flagging times where it exceeds
/// the combined three-standard-deviation band. The grids must match.
pub fn compare(a: &TimeSeries, b: &TimeSeries) -> Result<SeriesComparison> {
    if a.times.len() != b.times.len()
        || a.times
            .iter()
            .zip(b.times.iter())
            .any(|(x, y)| (x - y).abs() > 1e-12)
    {
        bail!("time grids do not match ({} vs {})", a.label, b.label);
    }
    let mut points = Vec::with_capacity(a.times.len());
    let mut max_abs_diff: f64 = 0.0;
    let mut flagged_times = 0;
    for i in 0..a.times.len() {
        let diff = a.mean[i] - b.mean[i];
        let threshold =
            3.0 * (a.stddev[i] * a.stddev[i] + b.stddev[i] * b.stddev[i]).sqrt() + 1e-12;
        let flagged = diff.abs() > threshold;
        if flagged {
            flagged_times += 1;
        }
        max_abs_diff = max_abs_diff.max(diff.abs());
        points.push(ComparisonPoint {
            time: a.times[i],
            diff,
            threshold,
            flagged,
        });
    }
    Ok(SeriesComparison {
        observable: a.label.clone(),
        series_a: a.label.clone(),
        series_b: b.label.clone(),
        max_abs_diff,
        flagged_times,
        significant: flagged_times > 0,
        points,
    })
}

/// Top-level machine-readable report emitted next to the curve files.
#[derive(Debug, Serialize)]
pub struct RunReport {
    /// Whether the unrestricted engine's negativity leaves its zero band at
    /// any grid time.
    pub dynamical_entanglement_detected: Option<bool>,
    /// Whether the model's generator preserves separability (product-form
    /// jump operators and a local effective Hamiltonian).
    pub separable_generator: bool,
    pub comparisons: Vec<SeriesComparison>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(label: &str, mean: Vec<f64>, stddev: Vec<f64>) -> TimeSeries {
        let times = (0..mean.len()).map(|i| i as f64).collect();
        TimeSeries::new(times, mean, stddev, label.to_string()).unwrap()
    }

    #[test]
    fn identical_series_are_not_flagged() {
        let a = series("a", vec![0.0, 0.5, 1.0], vec![0.0, 0.01, 0.02]);
        let cmp = compare(&a, &a).unwrap();
        assert_eq!(cmp.max_abs_diff, 0.0);
        assert_eq!(cmp.flagged_times, 0);
        assert!(!cmp.significant);
    }

    #[test]
    fn large_differences_are_flagged() {
        let a = series("a", vec![0.0, 0.5], vec![0.0, 0.01]);
        let b = series("b", vec![0.0, 0.9], vec![0.0, 0.01]);
        let cmp = compare(&a, &b).unwrap();
        assert_eq!(cmp.flagged_times, 1);
        assert!(cmp.significant);
        assert!((cmp.max_abs_diff - 0.4).abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let a = series("a", vec![0.0, 0.5], vec![0.0, 0.0]);
        let b = series("b", vec![0.0, 0.5, 1.0], vec![0.0, 0.0, 0.0]);
        assert!(compare(&a, &b).is_err());
    }
}
