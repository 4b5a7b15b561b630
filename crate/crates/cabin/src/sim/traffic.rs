//! Background cross-traffic and per-participant bottleneck paths.
//!
//! Each participant path carries one FTP, one CBR, and one Pareto on/off
//! flow with parameters drawn from fixed ranges. CBR and Pareto flows are
//! inelastic; the FTP flow is elastic and fair-shares the residual capacity
//! with the video stream until its transfer completes.

use rand::Rng;
use rand_distr::{Distribution, Pareto};

use super::config::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    Ftp,
    Cbr,
    Pareto,
}

/// One sampled background flow.
#[derive(Debug, Clone)]
pub struct BackgroundFlow {
    pub kind: FlowKind,
    pub start_s: f64,
    pub duration_s: f64,
    pub packet_bytes: u32,
    /// Fixed sending rate; `None` for FTP, which takes a fair share.
    pub rate_kbps: Option<f64>,
    /// Transfer size cap; `None` for Pareto, which is unbounded.
    pub data_bytes: Option<f64>,
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Draws one flow of each kind for a single participant path.
pub fn sample_background(rng: &mut impl Rng) -> Vec<BackgroundFlow> {
    let ftp = BackgroundFlow {
        kind: FlowKind::Ftp,
        start_s: uniform(rng, 0.0, 100.0),
        duration_s: uniform(rng, 0.0, 300.0),
        packet_bytes: 1500,
        rate_kbps: None,
        data_bytes: Some(uniform(rng, 10.0, 1500.0) * 1e3),
    };
    let cbr = BackgroundFlow {
        kind: FlowKind::Cbr,
        start_s: uniform(rng, 0.0, 50.0),
        duration_s: uniform(rng, 50.0, 200.0),
        packet_bytes: 500,
        rate_kbps: Some(uniform(rng, 1000.0, 1500.0)),
        data_bytes: Some(uniform(rng, 5.0, 50.0) * 1e6),
    };
    let pareto = BackgroundFlow {
        kind: FlowKind::Pareto,
        start_s: uniform(rng, 50.0, 150.0),
        duration_s: uniform(rng, 200.0, 300.0),
        packet_bytes: 1000,
        rate_kbps: Some(uniform(rng, 500.0, 1000.0)),
        data_bytes: None,
    };
    vec![ftp, cbr, pareto]
}

/// Precomputed on/off schedule for a Pareto flow: segment start times
/// relative to the flow start, beginning with an on-segment.
#[derive(Debug, Clone)]
struct OnOffSchedule {
    boundaries: Vec<f64>,
}

impl OnOffSchedule {
    /// Alternating Pareto(shape 1.5) segment lengths: on-segments average
    /// 1.5 s and off-segments 0.5 s, a 75% duty cycle.
    fn generate(duration_s: f64, rng: &mut impl Rng) -> Self {
        // mean = shape * scale / (shape - 1) = 3 * scale.
        let on = Pareto::new(0.5, 1.5).expect("valid parameters");
        let off = Pareto::new(0.5 / 3.0, 1.5).expect("valid parameters");
        let mut boundaries = vec![0.0];
        let mut t = 0.0;
        let mut is_on = true;
        while t < duration_s {
            let seg: f64 = if is_on { on.sample(rng) } else { off.sample(rng) };
            t += seg;
            boundaries.push(t);
            is_on = !is_on;
        }
        Self { boundaries }
    }

    /// Whether the flow is in an on-segment at offset `dt` from its start.
    fn is_on(&self, dt: f64) -> bool {
        match self
            .boundaries
            .partition_point(|b| *b <= dt)
        {
            0 => true, // dt < 0 cannot happen for active flows
            i => (i - 1) % 2 == 0,
        }
    }
}

/// Instantaneous view of one path at one tick.
#[derive(Debug, Clone, Copy)]
pub struct PathSample {
    pub avail_bw_kbps: f64,
    pub delivered_kbps: f64,
    pub loss_frac: f64,
    /// Bottleneck utilization in [0, 1], for the queueing-delay model.
    pub utilization: f64,
}

/// Mutable state of one participant's bottleneck path.
#[derive(Debug, Clone)]
pub struct PathState {
    flows: Vec<BackgroundFlow>,
    /// Remaining transfer bytes per flow (FTP/CBR); `f64::INFINITY` for
    /// unbounded flows.
    remaining_bytes: Vec<f64>,
    schedules: Vec<Option<OnOffSchedule>>,
}

impl PathState {
    pub fn new(flows: Vec<BackgroundFlow>, schedule_rng: &mut impl Rng) -> Self {
        let remaining_bytes = flows
            .iter()
            .map(|f| f.data_bytes.unwrap_or(f64::INFINITY))
            .collect();
        let schedules = flows
            .iter()
            .map(|f| {
                (f.kind == FlowKind::Pareto)
                    .then(|| OnOffSchedule::generate(f.duration_s, schedule_rng))
            })
            .collect();
        Self {
            flows,
            remaining_bytes,
            schedules,
        }
    }

    /// A path with no cross traffic.
    pub fn idle() -> Self {
        Self {
            flows: Vec::new(),
            remaining_bytes: Vec::new(),
            schedules: Vec::new(),
        }
    }

    fn is_active(&self, i: usize, t: f64) -> bool {
        let f = &self.flows[i];
        t >= f.start_s && t < f.start_s + f.duration_s && self.remaining_bytes[i] > 0.0
    }

    /// Advances the path by `dt` and returns what the video stream saw.
    ///
    /// With `dt = 0` this is a pure probe of the current state.
    pub fn step(&mut self, cfg: &ScenarioConfig, t: f64, dt: f64, video_rate_kbps: f64) -> PathSample {
        let capacity = cfg.capacity_at(t);

        let mut inelastic = 0.0;
        let mut ftp_active: Vec<usize> = Vec::new();
        for i in 0..self.flows.len() {
            if !self.is_active(i, t) {
                continue;
            }
            match self.flows[i].kind {
                FlowKind::Cbr => inelastic += self.flows[i].rate_kbps.expect("cbr has a rate"),
                FlowKind::Pareto => {
                    let on = self.schedules[i]
                        .as_ref()
                        .expect("pareto has a schedule")
                        .is_on(t - self.flows[i].start_s);
                    if on {
                        inelastic += self.flows[i].rate_kbps.expect("pareto has a rate");
                    }
                }
                FlowKind::Ftp => ftp_active.push(i),
            }
        }

        // The FTP transfer fair-shares the residual capacity with the video
        // stream, so n active FTP flows plus the video make n+1 sharers.
        let residual = (capacity - inelastic).max(0.0);
        let mut ftp_total = 0.0;
        if !ftp_active.is_empty() {
            let share = residual / (ftp_active.len() + 1) as f64;
            for &i in &ftp_active {
                let sent = share * dt * 125.0; // kbps * s -> bytes
                self.remaining_bytes[i] = (self.remaining_bytes[i] - sent).max(0.0);
                ftp_total += share;
            }
        }

        // CBR transfers also stop once their data size is exhausted.
        for i in 0..self.flows.len() {
            if self.flows[i].kind == FlowKind::Cbr && self.is_active(i, t) {
                let sent = self.flows[i].rate_kbps.expect("cbr has a rate") * dt * 125.0;
                self.remaining_bytes[i] = (self.remaining_bytes[i] - sent).max(0.0);
            }
        }

        let avail = (capacity - inelastic - ftp_total).max(0.0);
        let delivered = video_rate_kbps.min(avail);
        let loss_frac = if video_rate_kbps > 0.0 {
            ((video_rate_kbps - avail) / video_rate_kbps).max(0.0)
        } else {
            0.0
        };
        let utilization = if capacity > 0.0 {
            ((inelastic + ftp_total + delivered) / capacity).clamp(0.0, 1.0)
        } else {
            1.0
        };
        PathSample {
            avail_bw_kbps: avail,
            delivered_kbps: delivered,
            loss_frac,
            utilization,
        }
    }
}

/// Noisy observation of the true available bandwidth:
/// `est = true * (1 + u)` with `u ~ U[-noise_frac, +noise_frac]`.
pub fn estimate_bandwidth(true_bw_kbps: f64, rng: &mut impl Rng, noise_frac: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&noise_frac));
    let u = (2.0 * rng.random::<f64>() - 1.0) * noise_frac;
    (true_bw_kbps * (1.0 + u)).max(0.0)
}
