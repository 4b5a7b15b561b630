//! CABIN: a context-aware QoS guarantee pipeline for multimedia conferencing.
//!
//! The pipeline has three stages plus an evaluation harness:
//!
//! 1. [`discretizer`] turns continuous context/QoS measurements into discrete
//!    values by fitting a sum of Gaussians to a kernel density estimate; the
//!    fitted terms double as membership functions.
//! 2. [`bayesnet`] learns a Bayesian network over the discretized variables
//!    with the K2 algorithm and answers exact marginal queries.
//! 3. [`tuner`] chooses values for the tunable parent contexts of a QoS node
//!    that maximize the probability of a target QoS value.
//! 4. [`sim`] is a discrete-time multi-party conferencing simulator that
//!    drives the CABIN controller against throughput-oriented (TON) and
//!    delay-oriented (DON) baselines and reports PSNR, playback delay, and
//!    throughput.

pub mod bayesnet;
pub mod cli;
pub mod discretizer;
pub mod fmt;
pub mod sim;
pub mod tuner;
