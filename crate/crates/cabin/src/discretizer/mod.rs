//! Adaptive discretization of continuous QoS/context variables.
//!
//! A variable's probability density is estimated by kernel density estimation
//! and fitted with a sum of Gaussian terms. Each fitted term acts as one
//! discrete value, and the term expression `a * exp(-((x - b)/c)^2)` doubles
//! as that value's membership function; a sample is labeled with its
//! maximal-membership term.

mod fit;
pub mod kde;

use std::collections::BTreeMap;

use serde::Deserialize;
use thiserror::Error;

use crate::fmt::{json_escape, sig12};

pub use fit::fit_mixture;
pub use kde::{estimate_density, DEFAULT_GRID_POINTS, MIN_SAMPLES};

/// Default cap on the number of mixture components tried.
pub const DEFAULT_K_MAX: usize = 6;

/// Default model-order slack: the smallest k whose RMSE is within
/// `(1 + epsilon)` of the best RMSE wins.
pub const DEFAULT_EPSILON: f64 = 0.05;

#[derive(Debug, Error)]
pub enum DiscretizeError {
    #[error("variable `{variable}`: need at least {needed} samples, got {got}")]
    TooFewSamples {
        variable: String,
        needed: usize,
        got: usize,
    },
    #[error("variable `{variable}`: samples are (near-)constant; treat as single-valued")]
    DegenerateSamples { variable: String },
    #[error("fit with {k} components diverged")]
    FitDiverged { k: usize },
    #[error("variable `{variable}`: no component count in 1..={k_max} produced a valid fit")]
    NoValidFit { variable: String, k_max: usize },
    #[error("label {label} out of range for a {terms}-term scheme")]
    LabelOutOfRange { label: usize, terms: usize },
    #[error("samples are for `{samples}` but the scheme is for `{scheme}`")]
    VariableMismatch { samples: String, scheme: String },
    #[error("variable `{variable}`: {reason}")]
    InvalidSamples { variable: String, reason: String },
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
}

/// A named series of raw continuous measurements.
#[derive(Debug, Clone)]
pub struct SampleSeries {
    pub variable: String,
    pub unit: String,
    pub values: Vec<f64>,
}

impl SampleSeries {
    pub fn new(
        variable: impl Into<String>,
        unit: impl Into<String>,
        values: Vec<f64>,
    ) -> Result<Self, DiscretizeError> {
        let variable = variable.into();
        if values.is_empty() {
            return Err(DiscretizeError::InvalidSamples {
                variable,
                reason: "empty sample set".into(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(DiscretizeError::InvalidSamples {
                variable,
                reason: format!("non-finite sample {bad}"),
            });
        }
        Ok(Self {
            variable,
            unit: unit.into(),
            values,
        })
    }
}

/// Kernel density estimate on a uniform grid.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

/// One Gaussian term `a * exp(-((x - b)/c)^2)` of a fitted mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTerm {
    pub amplitude: f64,
    pub mean: f64,
    pub width: f64,
}

impl GaussianTerm {
    pub fn eval(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.width;
        self.amplitude * (-z * z).exp()
    }
}

/// A per-variable discretization: fitted Gaussian terms sorted by mean, with
/// amplitudes normalized so the largest equals 1.
#[derive(Debug, Clone)]
pub struct DiscretizationScheme {
    pub variable: String,
    pub unit: String,
    pub terms: Vec<GaussianTerm>,
    pub normalized: bool,
    pub epsilon: f64,
    pub k_max: usize,
}

/// Discrete labels for a sample series, one label per sample.
#[derive(Debug, Clone)]
pub struct DiscreteSeries {
    pub variable: String,
    pub labels: Vec<usize>,
}

/// Builds a scheme with default `k_max` and `epsilon`.
pub fn build_scheme(
    samples: &SampleSeries,
    k_max: usize,
) -> Result<DiscretizationScheme, DiscretizeError> {
    build_scheme_with(samples, k_max, DEFAULT_EPSILON)
}

/// Fits mixtures of 1..=k_max components to the sample density and selects
/// the smallest component count whose RMSE is within `(1 + epsilon)` of the
/// minimum over all counts.
pub fn build_scheme_with(
    samples: &SampleSeries,
    k_max: usize,
    epsilon: f64,
) -> Result<DiscretizationScheme, DiscretizeError> {
    assert!(k_max >= 1, "k_max must be positive");
    let pd = estimate_density(samples, DEFAULT_GRID_POINTS)?;

    let mut fits: Vec<(usize, Vec<GaussianTerm>, f64)> = Vec::new();
    for k in 1..=k_max {
        if pd.grid.len() < 4 * k {
            break;
        }
        match fit_mixture(&pd, k) {
            Ok((terms, rmse)) => fits.push((k, terms, rmse)),
            Err(DiscretizeError::FitDiverged { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if fits.is_empty() {
        return Err(DiscretizeError::NoValidFit {
            variable: samples.variable.clone(),
            k_max,
        });
    }

    let min_rmse = fits
        .iter()
        .map(|(_, _, r)| *r)
        .fold(f64::INFINITY, f64::min);
    // Sub-noise RMSE differences must not force extra components: the slack
    // is floored at epsilon times the density's own RMS scale, so "within
    // epsilon of the best fit" is judged against the curve magnitude rather
    // than against the KDE noise floor.
    let rms_density = (pd.density.iter().map(|d| d * d).sum::<f64>()
        / pd.density.len() as f64)
        .sqrt();
    let threshold = (1.0 + epsilon) * min_rmse + epsilon * rms_density;
    let (_, mut terms, _) = fits
        .into_iter()
        .find(|(_, _, rmse)| *rmse <= threshold)
        .expect("at least the minimum-RMSE fit qualifies");

    let a_max = terms
        .iter()
        .map(|t| t.amplitude)
        .fold(f64::NEG_INFINITY, f64::max);
    for t in &mut terms {
        t.amplitude /= a_max;
    }
    terms.sort_by(|a, b| a.mean.partial_cmp(&b.mean).unwrap());

    Ok(DiscretizationScheme {
        variable: samples.variable.clone(),
        unit: samples.unit.clone(),
        terms,
        normalized: true,
        epsilon,
        k_max,
    })
}

/// Single-term scheme for a constant (degenerate) variable.
///
/// `build_scheme` refuses such variables; callers that want to keep them in a
/// model map every sample to one discrete value instead.
pub fn single_value_scheme(samples: &SampleSeries) -> DiscretizationScheme {
    let (mean, sd) = kde::mean_and_sd(&samples.values);
    let width = if sd > 0.0 { sd } else { 1.0 }.max(1e-9);
    DiscretizationScheme {
        variable: samples.variable.clone(),
        unit: samples.unit.clone(),
        terms: vec![GaussianTerm {
            amplitude: 1.0,
            mean,
            width,
        }],
        normalized: true,
        epsilon: DEFAULT_EPSILON,
        k_max: 1,
    }
}

/// Whether a sample series is (near-)constant per the degeneracy rule.
pub fn is_degenerate_series(samples: &SampleSeries) -> bool {
    let (mean, sd) = kde::mean_and_sd(&samples.values);
    kde::is_degenerate(mean, sd)
}

/// Evaluates every term's membership function at `x`.
pub fn membership(scheme: &DiscretizationScheme, x: f64) -> Vec<f64> {
    debug_assert!(scheme.normalized, "membership requires a normalized scheme");
    scheme.terms.iter().map(|t| t.eval(x)).collect()
}

/// Labels every sample with its maximal-membership term; ties go to the
/// lowest label.
pub fn discretize_series(
    scheme: &DiscretizationScheme,
    samples: &SampleSeries,
) -> Result<DiscreteSeries, DiscretizeError> {
    if scheme.variable != samples.variable {
        return Err(DiscretizeError::VariableMismatch {
            samples: samples.variable.clone(),
            scheme: scheme.variable.clone(),
        });
    }
    let labels = samples
        .values
        .iter()
        .map(|&x| discretize_value(scheme, x))
        .collect();
    Ok(DiscreteSeries {
        variable: samples.variable.clone(),
        labels,
    })
}

/// Label of a single value under the scheme.
pub fn discretize_value(scheme: &DiscretizationScheme, x: f64) -> usize {
    let mut best = 0;
    let mut best_m = f64::NEG_INFINITY;
    for (i, t) in scheme.terms.iter().enumerate() {
        let m = t.eval(x);
        if m > best_m {
            best_m = m;
            best = i;
        }
    }
    best
}

/// Maps a discrete label back to an actionable numeric setting (the term
/// mean, which is that label's membership peak).
pub fn label_to_value(
    scheme: &DiscretizationScheme,
    label: usize,
) -> Result<f64, DiscretizeError> {
    scheme
        .terms
        .get(label)
        .map(|t| t.mean)
        .ok_or(DiscretizeError::LabelOutOfRange {
            label,
            terms: scheme.terms.len(),
        })
}

impl DiscretizationScheme {
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Canonical JSON: fixed field order, floats with 12 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{{\"variable\":\"{}\",\"unit\":\"{}\",\"terms\":[",
            json_escape(&self.variable),
            json_escape(&self.unit)
        ));
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"a\":{},\"b\":{},\"c\":{}}}",
                sig12(t.amplitude),
                sig12(t.mean),
                sig12(t.width)
            ));
        }
        out.push_str(&format!(
            "],\"epsilon\":{},\"k_max\":{}}}",
            sig12(self.epsilon),
            self.k_max
        ));
        out
    }

    pub fn from_json(text: &str) -> Result<Self, DiscretizeError> {
        let file: SchemeFile = serde_json::from_str(text)
            .map_err(|e| DiscretizeError::InvalidScheme(e.to_string()))?;
        Self::from_file(file)
    }

    fn from_file(file: SchemeFile) -> Result<Self, DiscretizeError> {
        if file.terms.is_empty() {
            return Err(DiscretizeError::InvalidScheme(format!(
                "scheme for `{}` has no terms",
                file.variable
            )));
        }
        let mut terms = Vec::with_capacity(file.terms.len());
        for t in &file.terms {
            if !(t.a > 0.0) || !(t.c > 0.0) || !t.b.is_finite() {
                return Err(DiscretizeError::InvalidScheme(format!(
                    "scheme for `{}` has an invalid term (a={}, b={}, c={})",
                    file.variable, t.a, t.b, t.c
                )));
            }
            terms.push(GaussianTerm {
                amplitude: t.a,
                mean: t.b,
                width: t.c,
            });
        }
        Ok(Self {
            variable: file.variable,
            unit: file.unit,
            terms,
            normalized: true,
            epsilon: file.epsilon,
            k_max: file.k_max,
        })
    }

    pub(crate) fn from_file_value(
        value: &serde_json::Value,
    ) -> Result<Self, DiscretizeError> {
        let file: SchemeFile = serde_json::from_value(value.clone())
            .map_err(|e| DiscretizeError::InvalidScheme(e.to_string()))?;
        Self::from_file(file)
    }
}

#[derive(Deserialize)]
struct SchemeFile {
    variable: String,
    #[serde(default)]
    unit: String,
    terms: Vec<TermFile>,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_k_max")]
    k_max: usize,
}

#[derive(Deserialize)]
struct TermFile {
    a: f64,
    b: f64,
    c: f64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_k_max() -> usize {
    DEFAULT_K_MAX
}

/// Convenience map type for per-variable schemes.
pub type SchemeMap = BTreeMap<String, DiscretizationScheme>;
