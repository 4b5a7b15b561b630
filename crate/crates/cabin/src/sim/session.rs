//! The discrete-time session loop: frame emission, loss, playback buffering,
//! starvation/rebuffering, and per-epoch rate adaptation.

use std::collections::VecDeque;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bayesnet::BayesianNetworkModel;
use crate::fmt::sig12;

use super::config::{ScenarioConfig, SimError, Strategy};
use super::controller::{controller_cabin, controller_don, controller_ton, EpochFeedback};
use super::derive_seed;
use super::quality::psnr_of_frame;
use super::traffic::{estimate_bandwidth, sample_background, PathState};

/// How the per-epoch rate is chosen.
#[derive(Debug, Clone, Copy)]
pub enum ControlMode {
    /// The strategy named in the scenario config.
    Strategy,
    /// A constant rate, for diagnostics and tests.
    FixedRate(f64),
    /// Uniform random rate per epoch within the bounds; used to collect
    /// exploratory training traces.
    ExploreUniform,
}

/// One participant's aggregated view of one adaptation epoch.
#[derive(Debug, Clone)]
pub struct EpochRecord {
    pub time_s: f64,
    pub participant: usize,
    pub video_rate_kbps: f64,
    /// Tick-averaged true available bandwidth.
    pub avail_bw_kbps: f64,
    /// The noisy estimate drawn at the epoch boundary.
    pub est_bw_kbps: f64,
    /// Tick-averaged playback buffer content.
    pub buffer_ms: f64,
    /// Tick-averaged loss fraction.
    pub loss_frac: f64,
    /// Tick-averaged round-trip time.
    pub rtt_ms: f64,
    /// Mean PSNR over the display slots of the epoch.
    pub frame_psnr_db: f64,
}

impl EpochRecord {
    /// Mean delivered rate over the epoch. The rate is constant within an
    /// epoch, so this is exact.
    pub fn throughput_kbps(&self) -> f64 {
        self.video_rate_kbps * (1.0 - self.loss_frac)
    }
}

/// Everything a session produced.
#[derive(Debug, Clone)]
pub struct SessionReport {
    pub strategy_label: String,
    pub participants: usize,
    pub seed: u64,
    pub duration_s: f64,
    /// Ordered by (epoch, participant).
    pub records: Vec<EpochRecord>,
    pub mean_psnr_db: f64,
    pub mean_playback_delay_ms: f64,
    pub mean_throughput_kbps: f64,
    pub starvation_count: u64,
    /// Epochs in which the cabin controller had no tunable knob and kept
    /// the previous rate.
    pub fallback_epochs: u64,
    pub frames_emitted_per_participant: u64,
}

impl SessionReport {
    /// Recomputes the three aggregate metrics from the per-epoch records.
    pub fn aggregates_from_records(records: &[EpochRecord]) -> (f64, f64, f64) {
        let n = records.len() as f64;
        let psnr = records.iter().map(|r| r.frame_psnr_db).sum::<f64>() / n;
        let delay = records.iter().map(|r| r.buffer_ms).sum::<f64>() / n;
        let throughput = records.iter().map(|r| r.throughput_kbps()).sum::<f64>() / n;
        (psnr, delay, throughput)
    }

    /// Epoch trace in the fixed CSV column order.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from(
            "time_s,participant_id,strategy,video_rate_kbps,avail_bw_kbps,est_bw_kbps,buffer_ms,loss_frac,rtt_ms,frame_psnr_db\n",
        );
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                sig12(r.time_s),
                r.participant,
                self.strategy_label,
                sig12(r.video_rate_kbps),
                sig12(r.avail_bw_kbps),
                sig12(r.est_bw_kbps),
                sig12(r.buffer_ms),
                sig12(r.loss_frac),
                sig12(r.rtt_ms),
                sig12(r.frame_psnr_db),
            ));
        }
        out
    }

    /// Session summary as canonical JSON.
    pub fn summary_json(&self) -> String {
        format!(
            "{{\"strategy\":\"{}\",\"participants\":{},\"seed\":{},\"duration_s\":{},\"mean_psnr_db\":{},\"mean_playback_delay_ms\":{},\"mean_throughput_kbps\":{},\"starvation_count\":{},\"fallback_epochs\":{},\"frames_emitted_per_participant\":{}}}",
            self.strategy_label,
            self.participants,
            self.seed,
            sig12(self.duration_s),
            sig12(self.mean_psnr_db),
            sig12(self.mean_playback_delay_ms),
            sig12(self.mean_throughput_kbps),
            self.starvation_count,
            self.fallback_epochs,
            self.frames_emitted_per_participant,
        )
    }
}

struct Participant {
    path: PathState,
    loss_rng: ChaCha8Rng,
    est_rng: ChaCha8Rng,
    /// Encoding rate of each buffered (delivered, unplayed) frame.
    buffer: VecDeque<f64>,
    frame_acc: f64,
    slot_acc: f64,
    playing: bool,
    rebuffering: bool,
    /// PSNR of the previous frame in the emission sequence; a lost frame is
    /// concealed by copying the last frame before it.
    prev_psnr_db: f64,
    est_bw_kbps: f64,
    emitted: u64,
    received: u64,
    lost: u64,
    played: u64,
    starvations: u64,
    last_loss_mean: f64,
    last_rtt_mean: f64,
    /// Peak tick bandwidth of the previous epoch, the basis of the next
    /// boundary probe.
    acc_prev_avail_max: f64,
    acc: EpochAcc,
}

#[derive(Default)]
struct EpochAcc {
    avail_sum: f64,
    avail_max: f64,
    buffer_sum: f64,
    loss_sum: f64,
    rtt_sum: f64,
    psnr_sum: f64,
    psnr_frames: u64,
    ticks: u64,
}

impl Participant {
    fn buffer_ms(&self, frame_ms: f64) -> f64 {
        self.buffer.len() as f64 * frame_ms
    }
}

/// Runs one session under the configured strategy. The cabin strategy
/// requires a trained model.
pub fn run_session(
    cfg: &ScenarioConfig,
    model: Option<&BayesianNetworkModel>,
) -> Result<SessionReport, SimError> {
    run_session_mode(cfg, ControlMode::Strategy, model)
}

/// Runs one warm-up session with a uniform-random rate per epoch.
pub fn run_session_explore(cfg: &ScenarioConfig) -> Result<SessionReport, SimError> {
    run_session_mode(cfg, ControlMode::ExploreUniform, None)
}

pub fn run_session_mode(
    cfg: &ScenarioConfig,
    mode: ControlMode,
    model: Option<&BayesianNetworkModel>,
) -> Result<SessionReport, SimError> {
    cfg.validate()?;
    if matches!(mode, ControlMode::Strategy)
        && cfg.strategy == Strategy::Cabin
        && model.is_none()
    {
        return Err(SimError::ConfigInvalid(
            "cabin strategy needs a model file; train one first".into(),
        ));
    }

    let frame_ms = 1000.0 / cfg.frame_rate_fps;
    let ticks_per_epoch = cfg.ticks_per_epoch();
    let n_epochs = cfg.n_epochs();
    let rebuffer_target_ms = cfg.don.target_ms;

    let mut participants: Vec<Participant> = (0..cfg.participants)
        .map(|p| {
            let flows = if cfg.background_traffic {
                let mut flow_rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[1, p as u64]));
                sample_background(&mut flow_rng)
            } else {
                Vec::new()
            };
            let mut schedule_rng =
                ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[2, p as u64]));
            Participant {
                path: PathState::new(flows, &mut schedule_rng),
                loss_rng: ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[3, p as u64])),
                est_rng: ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[4, p as u64])),
                buffer: VecDeque::new(),
                frame_acc: 0.0,
                slot_acc: 0.0,
                playing: false,
                rebuffering: false,
                prev_psnr_db: cfg.psnr.floor_db,
                est_bw_kbps: 0.0,
                emitted: 0,
                received: 0,
                lost: 0,
                played: 0,
                starvations: 0,
                last_loss_mean: 0.0,
                last_rtt_mean: cfg.rtt.base_ms,
                acc_prev_avail_max: cfg.base_capacity_kbps,
                acc: EpochAcc::default(),
            }
        })
        .collect();

    let mut explore_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[5]));
    let mut rate = match mode {
        ControlMode::FixedRate(r) => cfg.clamp_rate(r),
        _ => cfg.clamp_rate(cfg.initial_rate_kbps),
    };
    let mut records: Vec<EpochRecord> = Vec::with_capacity(n_epochs * cfg.participants);
    let mut fallback_epochs = 0u64;

    for epoch in 0..n_epochs {
        let t0 = epoch as f64 * cfg.epoch_s;

        // Fresh bandwidth estimates at the boundary. Chirp-style probing
        // rides the least-congested gaps of on/off cross traffic, so the
        // probe reports the peak bandwidth seen over the last adaptation
        // window, not its average.
        for p in participants.iter_mut() {
            let probe_bw = if epoch == 0 {
                p.path.step(cfg, t0, 0.0, rate).avail_bw_kbps
            } else {
                p.acc_prev_avail_max
            };
            p.est_bw_kbps = estimate_bandwidth(probe_bw, &mut p.est_rng, cfg.bw_noise_frac);
        }

        if epoch > 0 {
            rate = match mode {
                ControlMode::FixedRate(r) => cfg.clamp_rate(r),
                ControlMode::ExploreUniform => {
                    cfg.rate_min_kbps
                        + (cfg.rate_max_kbps - cfg.rate_min_kbps) * explore_rng.random::<f64>()
                }
                ControlMode::Strategy => {
                    let feedback = EpochFeedback {
                        est_bw_kbps: participants.iter().map(|p| p.est_bw_kbps).collect(),
                        buffer_ms: participants.iter().map(|p| p.buffer_ms(frame_ms)).collect(),
                        loss_frac: participants.iter().map(|p| p.last_loss_mean).collect(),
                        rtt_ms: participants.iter().map(|p| p.last_rtt_mean).collect(),
                    };
                    match cfg.strategy {
                        Strategy::Ton => controller_ton(&feedback.est_bw_kbps, cfg),
                        Strategy::Don => {
                            controller_don(rate, feedback.min_buffer_ms(), &cfg.don, cfg)
                        }
                        Strategy::Cabin => {
                            let decision = controller_cabin(
                                model.expect("checked above"),
                                &feedback,
                                rate,
                                cfg,
                            )?;
                            if decision.fallback {
                                fallback_epochs += 1;
                            }
                            decision.rate_kbps
                        }
                    }
                }
            };
        }

        for tick in 0..ticks_per_epoch {
            let t = t0 + tick as f64 * cfg.tick_s;
            for p in participants.iter_mut() {
                let sample = p.path.step(cfg, t, cfg.tick_s, rate);
                debug_assert!(sample.delivered_kbps <= rate + 1e-9);
                debug_assert!(sample.delivered_kbps <= sample.avail_bw_kbps + 1e-9);

                // Emit frames at the configured frame rate. Every frame is
                // scored at emission: delivered frames follow the quality
                // curve, lost ones repeat the previous frame at a penalty.
                p.frame_acc += cfg.frame_rate_fps * cfg.tick_s;
                while p.frame_acc >= 1.0 {
                    p.frame_acc -= 1.0;
                    p.emitted += 1;
                    let lost = p.loss_rng.random::<f64>() < sample.loss_frac;
                    let psnr = psnr_of_frame(&cfg.psnr, rate, lost, p.prev_psnr_db);
                    if lost {
                        p.lost += 1;
                    } else {
                        p.received += 1;
                        p.buffer.push_back(rate);
                    }
                    p.prev_psnr_db = psnr;
                    p.acc.psnr_sum += psnr;
                    p.acc.psnr_frames += 1;
                    debug_assert!(
                        psnr >= cfg.psnr.floor_db.min(cfg.psnr.min_db)
                            && psnr <= cfg.psnr.max_db
                    );
                }

                if !p.playing && t >= cfg.startup_delay_s - 1e-9 {
                    p.playing = true;
                }

                // Playback drains the buffer and drives the delay metric;
                // an empty buffer at a frame deadline freezes playback until
                // the buffer refills to the target level.
                if p.playing {
                    if p.rebuffering && p.buffer_ms(frame_ms) >= rebuffer_target_ms {
                        p.rebuffering = false;
                    }
                    p.slot_acc += cfg.frame_rate_fps * cfg.tick_s;
                    while p.slot_acc >= 1.0 {
                        p.slot_acc -= 1.0;
                        if p.rebuffering {
                            continue;
                        }
                        if p.buffer.pop_front().is_some() {
                            p.played += 1;
                        } else {
                            p.starvations += 1;
                            p.rebuffering = true;
                        }
                    }
                }

                let buffer_ms = p.buffer_ms(frame_ms);
                p.acc.avail_sum += sample.avail_bw_kbps;
                p.acc.avail_max = p.acc.avail_max.max(sample.avail_bw_kbps);
                p.acc.buffer_sum += buffer_ms;
                p.acc.loss_sum += sample.loss_frac;
                p.acc.rtt_sum += cfg.rtt.base_ms + cfg.rtt.queue_ms * sample.utilization;
                p.acc.ticks += 1;
            }
        }

        for (idx, p) in participants.iter_mut().enumerate() {
            let ticks = p.acc.ticks as f64;
            let loss_mean = p.acc.loss_sum / ticks;
            let rtt_mean = p.acc.rtt_sum / ticks;
            records.push(EpochRecord {
                time_s: t0,
                participant: idx,
                video_rate_kbps: rate,
                avail_bw_kbps: p.acc.avail_sum / ticks,
                est_bw_kbps: p.est_bw_kbps,
                buffer_ms: p.acc.buffer_sum / ticks,
                loss_frac: loss_mean,
                rtt_ms: rtt_mean,
                frame_psnr_db: p.acc.psnr_sum / p.acc.psnr_frames.max(1) as f64,
            });
            p.last_loss_mean = loss_mean;
            p.last_rtt_mean = rtt_mean;
            p.acc_prev_avail_max = p.acc.avail_max;
            p.acc = EpochAcc::default();
        }
    }

    let (mean_psnr_db, mean_playback_delay_ms, mean_throughput_kbps) =
        SessionReport::aggregates_from_records(&records);
    let strategy_label = match mode {
        ControlMode::Strategy => cfg.strategy.name().to_string(),
        ControlMode::FixedRate(_) => "fixed".to_string(),
        ControlMode::ExploreUniform => "explore".to_string(),
    };
    Ok(SessionReport {
        strategy_label,
        participants: cfg.participants,
        seed: cfg.seed,
        duration_s: cfg.duration_s,
        records,
        mean_psnr_db,
        mean_playback_delay_ms,
        mean_throughput_kbps,
        starvation_count: participants.iter().map(|p| p.starvations).sum(),
        fallback_epochs,
        frames_emitted_per_participant: participants
            .first()
            .map(|p| p.emitted)
            .unwrap_or(0),
    })
}
