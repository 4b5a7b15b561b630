//! Gaussian-kernel density estimation on a uniform grid.

use super::{DensityEstimate, DiscretizeError, SampleSeries};

/// Minimum number of samples required for a density estimate.
pub const MIN_SAMPLES: usize = 8;

/// Default grid resolution for density estimates.
pub const DEFAULT_GRID_POINTS: usize = 256;

/// Relative spread below which a variable counts as single-valued.
pub(crate) fn is_degenerate(mean: f64, sd: f64) -> bool {
    sd < 1e-9 * mean.abs() + 1e-12
}

pub(crate) fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Linear-interpolation quantile of a sorted slice (q in [0, 1]).
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Silverman bandwidth: 0.9 * min(sd, IQR/1.34) * n^(-1/5).
///
/// Falls back to the standard deviation alone when the IQR collapses to zero
/// (heavily repeated values with a few outliers).
pub(crate) fn silverman_bandwidth(values: &[f64], sd: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (values.len() as f64).powf(-0.2)
}

/// Estimates the probability density of a sample series by Gaussian-kernel
/// KDE on a uniform grid spanning `[min - 3h, max + 3h]`.
pub fn estimate_density(
    samples: &SampleSeries,
    grid_points: usize,
) -> Result<DensityEstimate, DiscretizeError> {
    let values = &samples.values;
    if values.len() < MIN_SAMPLES {
        return Err(DiscretizeError::TooFewSamples {
            variable: samples.variable.clone(),
            needed: MIN_SAMPLES,
            got: values.len(),
        });
    }
    let (mean, sd) = mean_and_sd(values);
    if is_degenerate(mean, sd) {
        return Err(DiscretizeError::DegenerateSamples {
            variable: samples.variable.clone(),
        });
    }
    assert!(grid_points >= 2, "grid must have at least two points");

    let h = silverman_bandwidth(values, sd);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let step = (hi - lo) / (grid_points - 1) as f64;

    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * h * values.len() as f64);
    let mut grid = Vec::with_capacity(grid_points);
    let mut density = Vec::with_capacity(grid_points);
    for i in 0..grid_points {
        let x = lo + step * i as f64;
        let mut acc = 0.0;
        for &v in values {
            let z = (x - v) / h;
            acc += (-0.5 * z * z).exp();
        }
        grid.push(x);
        density.push(acc * norm);
    }

    Ok(DensityEstimate {
        grid,
        density,
        bandwidth: h,
    })
}

impl DensityEstimate {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.grid.len() {
            let dx = self.grid[i] - self.grid[i - 1];
            acc += 0.5 * (self.density[i] + self.density[i - 1]) * dx;
        }
        acc
    }
}
