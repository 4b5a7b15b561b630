//! Per-epoch rate controllers.

use crate::bayesnet::{BayesianNetworkModel, Evidence};
use crate::discretizer::{discretize_value, label_to_value};
use crate::tuner::{recommend_best, tunable_parents};

use super::config::{DonParams, ScenarioConfig, SimError};

/// Cross-participant feedback visible to a controller at an epoch boundary.
#[derive(Debug, Clone)]
pub struct EpochFeedback {
    /// Fresh bandwidth estimate per participant.
    pub est_bw_kbps: Vec<f64>,
    /// Current playback buffer per participant.
    pub buffer_ms: Vec<f64>,
    /// Previous epoch's mean loss fraction per participant.
    pub loss_frac: Vec<f64>,
    /// Previous epoch's mean RTT per participant.
    pub rtt_ms: Vec<f64>,
}

impl EpochFeedback {
    pub fn mean_est_bw(&self) -> f64 {
        mean(&self.est_bw_kbps)
    }

    pub fn min_est_bw(&self) -> f64 {
        self.est_bw_kbps
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_buffer_ms(&self) -> f64 {
        self.buffer_ms.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn mean_buffer_ms(&self) -> f64 {
        mean(&self.buffer_ms)
    }

    pub fn mean_loss_frac(&self) -> f64 {
        mean(&self.loss_frac)
    }

    pub fn mean_rtt_ms(&self) -> f64 {
        mean(&self.rtt_ms)
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Throughput-oriented baseline: the mean loss-free bandwidth estimate over
/// all participants, clamped to the rate bounds.
pub fn controller_ton(est_bw_kbps: &[f64], cfg: &ScenarioConfig) -> f64 {
    debug_assert!(!est_bw_kbps.is_empty());
    cfg.clamp_rate(mean(est_bw_kbps))
}

/// Delay-oriented baseline: proportional control on the minimum playback
/// buffer. The rate is never raised while any buffer sits below `low_ms`.
pub fn controller_don(
    prev_rate_kbps: f64,
    min_buffer_ms: f64,
    don: &DonParams,
    cfg: &ScenarioConfig,
) -> f64 {
    let error = (min_buffer_ms - don.target_ms) / don.target_ms;
    let mut factor = 1.0 + don.gain * error;
    if min_buffer_ms < don.low_ms {
        factor = factor.min(1.0);
    }
    cfg.clamp_rate(prev_rate_kbps * factor)
}

/// Outcome of one cabin decision.
#[derive(Debug, Clone)]
pub struct CabinDecision {
    pub rate_kbps: f64,
    /// Probability of the chosen QoS target under the recommendation.
    pub probability: f64,
    /// Set when the model exposes no tunable rate knob and the previous
    /// rate was kept.
    pub fallback: bool,
}

/// Model-driven controller: discretizes the observed untunable contexts,
/// asks the tuner for the rate class that best guarantees the preferred QoS
/// class, and maps the recommended label back to a numeric rate.
///
/// QoS classes are preferred in descending order of their term means, so the
/// highest-quality class is tried first.
pub fn controller_cabin(
    model: &BayesianNetworkModel,
    feedback: &EpochFeedback,
    prev_rate_kbps: f64,
    cfg: &ScenarioConfig,
) -> Result<CabinDecision, SimError> {
    let qos_node = model.qos_node().to_string();

    let tunables = tunable_parents(model, &qos_node)?;
    let rate_node = match tunables.first() {
        Some(name) => name.clone(),
        None => {
            return Ok(CabinDecision {
                rate_kbps: prev_rate_kbps,
                probability: 0.0,
                fallback: true,
            })
        }
    };

    // Observed untunable contexts, discretized through the model's schemes.
    // Only the bandwidth state is conditioned on (via its noisy estimate):
    // it is exogenous to the rate knob, whereas buffer, loss, and RTT are
    // consequences of the previous rate choice, and conditioning on children
    // of the knob turns the query into backwards inference about past rates.
    let observations = [(super::train::BANDWIDTH_VARIABLE, feedback.mean_est_bw())];
    let mut observed = Evidence::new();
    for (name, value) in observations {
        let Ok(idx) = model.dag().node_index(name) else {
            continue;
        };
        if model.dag().node(idx).tunable {
            continue;
        }
        let scheme = model
            .scheme(name)
            .ok_or_else(|| SimError::UntrainedModel(format!("no scheme for `{name}`")))?;
        observed.set(name, discretize_value(scheme, value));
    }

    // Highest class mean first; terms are sorted ascending by mean.
    let qos_cardinality = model
        .dag()
        .node(model.dag().node_index(&qos_node)?)
        .cardinality;
    let preference: Vec<usize> = (0..qos_cardinality).rev().collect();

    let rec = recommend_best(model, &qos_node, &preference, &observed, cfg.p_min)?;
    let label = rec
        .assignment
        .get(&rate_node)
        .copied()
        .expect("tunable parent present in the assignment");
    let scheme = model
        .scheme(&rate_node)
        .ok_or_else(|| SimError::UntrainedModel(format!("no scheme for `{rate_node}`")))?;
    let rate = label_to_value(scheme, label)?;
    Ok(CabinDecision {
        rate_kbps: cfg.clamp_rate(rate),
        probability: rec.probability,
        fallback: false,
    })
}
