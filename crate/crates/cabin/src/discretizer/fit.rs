//! Nonlinear least-squares fitting of a sum of Gaussian terms to a density
//! curve.
//!
//! The model is `f(x) = sum_i a_i * exp(-((x - b_i)/c_i)^2)`. Initialization
//! is a weighted k-means over the density grid (centers seed the means,
//! cluster spreads seed the widths, cluster peak densities seed the
//! amplitudes); refinement is Levenberg-Marquardt with analytic Jacobian.
//! Both stages are deterministic, so the fit is a pure function of the
//! density curve and `k`.

use super::{DensityEstimate, DiscretizeError, GaussianTerm};

const MAX_LM_ITERS: usize = 200;
const PARAM_TOL: f64 = 1e-8;
const PARAM_FLOOR: f64 = 1e-9;
const KMEANS_ITERS: usize = 100;

/// Fits `k` Gaussian terms to the density curve; returns the terms and the
/// root-mean-square residual over the grid.
pub fn fit_mixture(
    pd: &DensityEstimate,
    k: usize,
) -> Result<(Vec<GaussianTerm>, f64), DiscretizeError> {
    assert!(k >= 1, "component count must be positive");
    assert!(
        pd.grid.len() >= 4 * k,
        "grid must have at least 4k points for a k-component fit"
    );

    let mut params = init_params(pd, k);
    let n = pd.grid.len();
    let m = 3 * k;

    let mut sse = sum_squared_error(pd, &params);
    if !sse.is_finite() {
        return Err(DiscretizeError::FitDiverged { k });
    }

    let mut lambda = 1e-3;
    let mut rejected_in_a_row = 0usize;
    for _ in 0..MAX_LM_ITERS {
        let (jtj, jtr) = normal_equations(pd, &params);

        // Damped normal equations: (JtJ + lambda*diag(JtJ)) delta = -Jtr
        let mut lhs = jtj.clone();
        for i in 0..m {
            let d = jtj[i * m + i];
            lhs[i * m + i] = d + lambda * d.max(1e-12);
        }
        let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();

        let delta = match solve_linear(&lhs, &rhs, m) {
            Some(d) => d,
            None => {
                lambda *= 10.0;
                rejected_in_a_row += 1;
                if rejected_in_a_row > 30 {
                    return Err(DiscretizeError::FitDiverged { k });
                }
                continue;
            }
        };

        let mut trial = params.clone();
        for i in 0..m {
            trial[i] += delta[i];
        }
        clamp_params(&mut trial);

        let trial_sse = sum_squared_error(pd, &trial);
        if trial_sse.is_finite() && trial_sse <= sse {
            let converged = params
                .iter()
                .zip(&trial)
                .all(|(p, t)| (t - p).abs() <= PARAM_TOL * (1.0 + p.abs()));
            params = trial;
            sse = trial_sse;
            lambda = (lambda / 3.0).max(1e-12);
            rejected_in_a_row = 0;
            if converged {
                break;
            }
        } else {
            lambda *= 3.0;
            rejected_in_a_row += 1;
            if rejected_in_a_row > 30 || lambda > 1e14 {
                break; // keep the best parameters found so far
            }
        }
    }

    if !sse.is_finite() {
        return Err(DiscretizeError::FitDiverged { k });
    }
    let rmse = (sse / n as f64).sqrt();
    let terms: Vec<GaussianTerm> = (0..k)
        .map(|i| GaussianTerm {
            amplitude: params[3 * i],
            mean: params[3 * i + 1],
            width: params[3 * i + 2],
        })
        .collect();
    Ok((terms, rmse))
}

/// Parameter vector layout: [a_1, b_1, c_1, a_2, b_2, c_2, ...].
fn init_params(pd: &DensityEstimate, k: usize) -> Vec<f64> {
    let centers = weighted_kmeans(&pd.grid, &pd.density, k);
    let grid_step = pd.grid[1] - pd.grid[0];

    let mut params = Vec::with_capacity(3 * k);
    for &center in &centers {
        // Cluster membership by nearest center.
        let mut w_sum = 0.0;
        let mut sq_sum = 0.0;
        let mut peak: f64 = 0.0;
        for (x, w) in pd.grid.iter().zip(&pd.density) {
            let nearest = centers
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    let da = (x - a.1).abs();
                    let db = (x - b.1).abs();
                    da.partial_cmp(&db).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            if (centers[nearest] - center).abs() < f64::EPSILON {
                w_sum += w;
                sq_sum += w * (x - center) * (x - center);
                peak = peak.max(*w);
            }
        }
        let spread = if w_sum > 0.0 {
            (sq_sum / w_sum).sqrt()
        } else {
            0.0
        };
        params.push(peak.max(PARAM_FLOOR));
        params.push(center);
        params.push(spread.max(grid_step));
    }
    params
}

/// Deterministic 1-D weighted k-means: centers seeded at weighted quantiles,
/// refined by Lloyd iterations.
fn weighted_kmeans(xs: &[f64], weights: &[f64], k: usize) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut centers = Vec::with_capacity(k);
    // Seed at the (j + 0.5)/k weighted quantiles.
    let mut cum = 0.0;
    let mut targets: Vec<f64> = (0..k).map(|j| (j as f64 + 0.5) / k as f64 * total).collect();
    let mut ti = 0;
    for (x, w) in xs.iter().zip(weights) {
        cum += w;
        while ti < k && cum >= targets[ti] {
            centers.push(*x);
            ti += 1;
        }
    }
    while centers.len() < k {
        centers.push(*xs.last().unwrap());
    }
    targets.clear();

    for _ in 0..KMEANS_ITERS {
        let mut sums = vec![0.0; k];
        let mut wsums = vec![0.0; k];
        for (x, w) in xs.iter().zip(weights) {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (i, c) in centers.iter().enumerate() {
                let d = (x - c).abs();
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            sums[best] += w * x;
            wsums[best] += w;
        }
        let mut changed = false;
        for i in 0..k {
            if wsums[i] > 0.0 {
                let next = sums[i] / wsums[i];
                if (next - centers[i]).abs() > 1e-12 {
                    changed = true;
                }
                centers[i] = next;
            }
        }
        centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if !changed {
            break;
        }
    }
    centers
}

fn clamp_params(params: &mut [f64]) {
    for chunk in params.chunks_mut(3) {
        chunk[0] = chunk[0].max(PARAM_FLOOR); // amplitude
        chunk[2] = chunk[2].max(PARAM_FLOOR); // width
    }
}

fn model_value(params: &[f64], x: f64) -> f64 {
    params
        .chunks(3)
        .map(|t| {
            let z = (x - t[1]) / t[2];
            t[0] * (-z * z).exp()
        })
        .sum()
}

fn sum_squared_error(pd: &DensityEstimate, params: &[f64]) -> f64 {
    pd.grid
        .iter()
        .zip(&pd.density)
        .map(|(x, y)| {
            let r = model_value(params, *x) - y;
            r * r
        })
        .sum()
}

/// Accumulates J^T J and J^T r without materializing the Jacobian.
fn normal_equations(pd: &DensityEstimate, params: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = params.len();
    let mut jtj = vec![0.0; m * m];
    let mut jtr = vec![0.0; m];
    let mut row = vec![0.0; m];
    for (x, y) in pd.grid.iter().zip(&pd.density) {
        let mut f = 0.0;
        for (t, chunk) in params.chunks(3).enumerate() {
            let (a, b, c) = (chunk[0], chunk[1], chunk[2]);
            let z = (x - b) / c;
            let e = (-z * z).exp();
            f += a * e;
            row[3 * t] = e;
            row[3 * t + 1] = a * e * 2.0 * (x - b) / (c * c);
            row[3 * t + 2] = a * e * 2.0 * (x - b) * (x - b) / (c * c * c);
        }
        let r = f - y;
        for i in 0..m {
            jtr[i] += row[i] * r;
            for j in i..m {
                jtj[i * m + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..m {
        for j in 0..i {
            jtj[i * m + j] = jtj[j * m + i];
        }
    }
    (jtj, jtr)
}

/// Gaussian elimination with partial pivoting for the small LM systems
/// (at most 18x18 for k_max = 6).
fn solve_linear(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut aug = vec![0.0; n * (n + 1)];
    for i in 0..n {
        for j in 0..n {
            aug[i * (n + 1) + j] = a[i * n + j];
        }
        aug[i * (n + 1) + n] = b[i];
    }
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot = aug[col * (n + 1) + col].abs();
        for r in col + 1..n {
            let v = aug[r * (n + 1) + col].abs();
            if v > pivot {
                pivot = v;
                pivot_row = r;
            }
        }
        if pivot < 1e-300 {
            return None;
        }
        if pivot_row != col {
            for j in 0..=n {
                aug.swap(col * (n + 1) + j, pivot_row * (n + 1) + j);
            }
        }
        let div = aug[col * (n + 1) + col];
        for r in col + 1..n {
            let factor = aug[r * (n + 1) + col] / div;
            if factor == 0.0 {
                continue;
            }
            for j in col..=n {
                aug[r * (n + 1) + j] -= factor * aug[col * (n + 1) + j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = aug[i * (n + 1) + n];
        for j in i + 1..n {
            acc -= aug[i * (n + 1) + j] * x[j];
        }
        x[i] = acc / aug[i * (n + 1) + i];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}
