//! Scenario configuration for conferencing sessions.

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("the cabin strategy requires a trained model: {0}")]
    UntrainedModel(String),
    #[error(transparent)]
    Tuner(#[from] crate::tuner::TunerError),
    #[error(transparent)]
    Discretize(#[from] crate::discretizer::DiscretizeError),
    #[error(transparent)]
    Bayes(#[from] crate::bayesnet::BayesNetError),
}

/// Rate-control strategy under evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Strategy {
    Cabin,
    Ton,
    Don,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Cabin => "cabin",
            Strategy::Ton => "ton",
            Strategy::Don => "don",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cabin" => Some(Strategy::Cabin),
            "ton" => Some(Strategy::Ton),
            "don" => Some(Strategy::Don),
            _ => None,
        }
    }
}

/// Logarithmic rate-quality curve plus loss-concealment behavior.
///
/// A delivered frame encoded at `rate` scores
/// `clamp(min_db, max_db, base_db + slope_db * ln(rate / ref_rate_kbps))`;
/// a lost or frozen frame repeats the previous one at a `conceal_step_db`
/// penalty, floored at `floor_db`.
#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct PsnrModel {
    pub base_db: f64,
    pub ref_rate_kbps: f64,
    pub slope_db: f64,
    pub min_db: f64,
    pub max_db: f64,
    pub conceal_step_db: f64,
    pub floor_db: f64,
}

impl Default for PsnrModel {
    fn default() -> Self {
        Self {
            base_db: 36.0,
            ref_rate_kbps: 700.0,
            slope_db: 2.5,
            min_db: 20.0,
            max_db: 48.0,
            conceal_step_db: 14.0,
            floor_db: 20.0,
        }
    }
}

/// Buffer-regulating controller constants.
#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct DonParams {
    /// Buffer level the controller steers toward; also the refill level
    /// after a starvation-triggered rebuffering pause.
    pub target_ms: f64,
    /// Below this level the rate is never raised.
    pub low_ms: f64,
    /// Proportional gain on the relative buffer error.
    pub gain: f64,
}

impl Default for DonParams {
    fn default() -> Self {
        Self {
            target_ms: 3000.0,
            low_ms: 500.0,
            gain: 0.2,
        }
    }
}

/// Round-trip-time model: fixed propagation plus queueing proportional to
/// bottleneck utilization.
#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct RttModel {
    pub base_ms: f64,
    pub queue_ms: f64,
}

impl Default for RttModel {
    fn default() -> Self {
        Self {
            base_ms: 20.0,
            queue_ms: 60.0,
        }
    }
}

/// Full configuration of one simulated session.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub participants: usize,
    pub duration_s: f64,
    pub tick_s: f64,
    /// Rate adaptation period; the controller runs once per epoch.
    pub epoch_s: f64,
    pub seed: u64,
    pub strategy: Strategy,
    pub base_capacity_kbps: f64,
    /// Relative half-width of the uniform bandwidth estimation error.
    pub bw_noise_frac: f64,
    pub rate_min_kbps: f64,
    pub rate_max_kbps: f64,
    pub frame_rate_fps: f64,
    pub startup_delay_s: f64,
    /// Rate used until the controller's first decision.
    pub initial_rate_kbps: f64,
    /// Disable to run a clean path with no cross traffic.
    pub background_traffic: bool,
    /// Piecewise capacity overrides: at `time_s`, capacity becomes
    /// `capacity_kbps`. Empty means constant `base_capacity_kbps`.
    pub capacity_steps: Vec<(f64, f64)>,
    pub psnr: PsnrModel,
    pub don: DonParams,
    pub rtt: RttModel,
    /// Guarantee threshold handed to the tuner by the cabin controller.
    pub p_min: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            participants: 4,
            duration_s: 300.0,
            tick_s: 0.1,
            epoch_s: 2.5,
            seed: 1,
            strategy: Strategy::Ton,
            base_capacity_kbps: 3000.0,
            bw_noise_frac: 0.10,
            rate_min_kbps: 100.0,
            rate_max_kbps: 2000.0,
            frame_rate_fps: 25.0,
            startup_delay_s: 1.0,
            initial_rate_kbps: 700.0,
            background_traffic: true,
            capacity_steps: Vec::new(),
            psnr: PsnrModel::default(),
            don: DonParams::default(),
            rtt: RttModel::default(),
            p_min: crate::tuner::DEFAULT_P_MIN,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |msg: String| Err(SimError::ConfigInvalid(msg));
        if self.participants == 0 {
            return fail("participants must be at least 1".into());
        }
        for (name, v) in [
            ("duration_s", self.duration_s),
            ("tick_s", self.tick_s),
            ("epoch_s", self.epoch_s),
            ("rate_min_kbps", self.rate_min_kbps),
            ("rate_max_kbps", self.rate_max_kbps),
            ("frame_rate_fps", self.frame_rate_fps),
            ("initial_rate_kbps", self.initial_rate_kbps),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if self.startup_delay_s < 0.0 || self.base_capacity_kbps < 0.0 {
            return fail("startup delay and capacity must be non-negative".into());
        }
        if self.rate_min_kbps >= self.rate_max_kbps {
            return fail(format!(
                "rate bounds must satisfy min < max, got [{}, {}]",
                self.rate_min_kbps, self.rate_max_kbps
            ));
        }
        if !(0.0..1.0).contains(&self.bw_noise_frac) {
            return fail(format!(
                "bw_noise_frac must be in [0, 1), got {}",
                self.bw_noise_frac
            ));
        }
        let ticks_per_epoch = self.epoch_s / self.tick_s;
        if (ticks_per_epoch - ticks_per_epoch.round()).abs() > 1e-9 {
            return fail(format!(
                "tick ({}) must divide the epoch ({})",
                self.tick_s, self.epoch_s
            ));
        }
        if !(0.0..=1.0).contains(&self.p_min) {
            return fail(format!("p_min must be in [0, 1], got {}", self.p_min));
        }
        for (t, c) in &self.capacity_steps {
            if !t.is_finite() || !c.is_finite() || *c < 0.0 {
                return fail(format!("invalid capacity step ({t}, {c})"));
            }
        }
        Ok(())
    }

    pub fn ticks_per_epoch(&self) -> usize {
        (self.epoch_s / self.tick_s).round() as usize
    }

    pub fn n_epochs(&self) -> usize {
        (self.duration_s / self.epoch_s).round().max(1.0) as usize
    }

    /// Bottleneck capacity at time `t`, honoring step overrides.
    pub fn capacity_at(&self, t: f64) -> f64 {
        let mut capacity = self.base_capacity_kbps;
        for &(step_t, step_c) in &self.capacity_steps {
            if t >= step_t {
                capacity = step_c;
            }
        }
        capacity
    }

    pub fn clamp_rate(&self, rate: f64) -> f64 {
        rate.clamp(self.rate_min_kbps, self.rate_max_kbps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        ScenarioConfig::default().validate().unwrap();
    }

    #[test]
    fn tick_must_divide_epoch() {
        let cfg = ScenarioConfig {
            tick_s: 0.4,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rate_bounds_must_be_ordered() {
        let cfg = ScenarioConfig {
            rate_min_kbps: 2000.0,
            rate_max_kbps: 100.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn capacity_steps_apply_in_order() {
        let cfg = ScenarioConfig {
            capacity_steps: vec![(100.0, 1500.0), (200.0, 2400.0)],
            ..Default::default()
        };
        assert_eq!(cfg.capacity_at(0.0), 3000.0);
        assert_eq!(cfg.capacity_at(150.0), 1500.0);
        assert_eq!(cfg.capacity_at(250.0), 2400.0);
    }
}
