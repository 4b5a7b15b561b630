//! Discrete-time multi-party conferencing simulator.
//!
//! Each participant has an independent bottleneck path carrying background
//! cross traffic. A single encoder rate, adapted once per epoch by the
//! selected controller, drives frame emission; delivered frames flow through
//! a per-participant playback buffer. Sessions report the three evaluation
//! metrics: frame PSNR, playback delay (buffered content), and throughput.

mod compare;
pub mod config;
pub mod controller;
mod quality;
mod session;
mod train;
pub mod traffic;

pub use compare::{run_comparison, CellSummary, CompareConfig, ComparisonReport, MetricSummary};
pub use config::{DonParams, PsnrModel, RttModel, ScenarioConfig, SimError, Strategy};
pub use controller::{controller_cabin, controller_don, controller_ton, EpochFeedback};
pub use quality::{psnr_concealed, psnr_delivered, psnr_of_frame};
pub use session::{
    run_session, run_session_explore, run_session_mode, ControlMode, EpochRecord, SessionReport,
};
pub use traffic::{estimate_bandwidth, sample_background, BackgroundFlow, FlowKind, PathState};
pub use train::{
    dataset_from_series, schemes_for_series, train_cabin, train_from_records, training_series,
    LearnKnobs, BANDWIDTH_VARIABLE, QOS_VARIABLE, TUNABLE_VARIABLE,
};

/// SplitMix64-style mixing for deriving independent per-stream seeds from a
/// session seed. Stable across platforms.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut z = base;
    for &t in tags {
        z = z
            .wrapping_add(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(t.wrapping_mul(0xbf58_476d_1ce4_e5b9));
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}
