//! The evaluation grid: (participants x strategy x repetition) cells with
//! mean and 95% confidence intervals per metric.

use rayon::prelude::*;

use crate::bayesnet::BayesianNetworkModel;
use crate::fmt::sig12;

use super::config::{ScenarioConfig, SimError, Strategy};
use super::session::run_session;

/// Grid specification. Session seeds are `seed_base + rep` with `rep` in
/// `1..=reps`, identical across strategies and scenarios so comparisons are
/// paired.
#[derive(Debug, Clone)]
pub struct CompareConfig {
    pub scenarios: Vec<usize>,
    pub reps: usize,
    pub strategies: Vec<Strategy>,
    pub seed_base: u64,
    /// Worker threads for fanning out session cells; 1 = sequential.
    pub jobs: usize,
    /// Template for everything except participants, strategy, and seed.
    pub template: ScenarioConfig,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            scenarios: vec![4, 8, 12, 16],
            reps: 5,
            strategies: vec![Strategy::Cabin, Strategy::Ton, Strategy::Don],
            seed_base: 0,
            jobs: 1,
            template: ScenarioConfig::default(),
        }
    }
}

/// Mean with a normal-approximation 95% confidence interval; the interval
/// is absent when only one repetition ran.
#[derive(Debug, Clone, Copy)]
pub struct MetricSummary {
    pub mean: f64,
    pub ci95_lo: Option<f64>,
    pub ci95_hi: Option<f64>,
}

impl MetricSummary {
    fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        if samples.len() < 2 {
            return Self {
                mean,
                ci95_lo: None,
                ci95_hi: None,
            };
        }
        let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
        let half = 1.96 * (var / n).sqrt();
        Self {
            mean,
            ci95_lo: Some(mean - half),
            ci95_hi: Some(mean + half),
        }
    }

    pub fn ci_width(&self) -> Option<f64> {
        match (self.ci95_lo, self.ci95_hi) {
            (Some(lo), Some(hi)) => Some(hi - lo),
            _ => None,
        }
    }
}

/// One (participants, strategy) cell aggregated over its repetitions.
#[derive(Debug, Clone)]
pub struct CellSummary {
    pub participants: usize,
    pub strategy: Strategy,
    pub reps: usize,
    pub psnr_db: MetricSummary,
    pub playback_delay_ms: MetricSummary,
    pub throughput_kbps: MetricSummary,
}

/// The full grid, one row per (participants, strategy) cell, sorted by
/// participants and then by the strategy order given in the config.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub cells: Vec<CellSummary>,
}

impl ComparisonReport {
    pub fn cell(&self, participants: usize, strategy: Strategy) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.participants == participants && c.strategy == strategy)
    }

    /// Long-format CSV: one line per (cell, metric), metrics in the fixed
    /// order psnr_db, playback_delay_ms, throughput_kbps. CI fields are
    /// empty when undefined.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("participants,strategy,metric,mean,ci95_lo,ci95_hi,reps\n");
        for cell in &self.cells {
            for (metric, summary) in [
                ("psnr_db", &cell.psnr_db),
                ("playback_delay_ms", &cell.playback_delay_ms),
                ("throughput_kbps", &cell.throughput_kbps),
            ] {
                let fmt_opt = |v: Option<f64>| v.map(sig12).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    cell.participants,
                    cell.strategy.name(),
                    metric,
                    sig12(summary.mean),
                    fmt_opt(summary.ci95_lo),
                    fmt_opt(summary.ci95_hi),
                    cell.reps,
                ));
            }
        }
        out
    }
}

/// Runs every (scenario, strategy, rep) session and summarizes each cell.
pub fn run_comparison(
    cfg: &CompareConfig,
    model: Option<&BayesianNetworkModel>,
) -> Result<ComparisonReport, SimError> {
    if cfg.reps == 0 {
        return Err(SimError::ConfigInvalid("reps must be at least 1".into()));
    }
    if cfg.scenarios.is_empty() || cfg.strategies.is_empty() {
        return Err(SimError::ConfigInvalid(
            "compare needs at least one scenario and one strategy".into(),
        ));
    }
    if cfg.strategies.contains(&Strategy::Cabin) && model.is_none() {
        return Err(SimError::ConfigInvalid(
            "comparing the cabin strategy needs a model".into(),
        ));
    }

    let sessions: Vec<ScenarioConfig> = cfg
        .scenarios
        .iter()
        .flat_map(|&participants| {
            cfg.strategies.iter().flat_map(move |&strategy| {
                (1..=cfg.reps).map(move |rep| (participants, strategy, rep))
            })
        })
        .map(|(participants, strategy, rep)| ScenarioConfig {
            participants,
            strategy,
            seed: cfg.seed_base + rep as u64,
            ..cfg.template.clone()
        })
        .collect();

    let run_all = || -> Result<Vec<(f64, f64, f64)>, SimError> {
        sessions
            .par_iter()
            .map(|scenario| {
                let report = run_session(scenario, model)?;
                Ok((
                    report.mean_psnr_db,
                    report.mean_playback_delay_ms,
                    report.mean_throughput_kbps,
                ))
            })
            .collect()
    };
    // A local pool keeps the worker count configurable without touching the
    // global rayon state. Results come back in submission order, so the
    // report is byte-stable for any job count.
    let metrics: Vec<(f64, f64, f64)> = if cfg.jobs <= 1 {
        sessions
            .iter()
            .map(|scenario| {
                let report = run_session(scenario, model)?;
                Ok((
                    report.mean_psnr_db,
                    report.mean_playback_delay_ms,
                    report.mean_throughput_kbps,
                ))
            })
            .collect::<Result<_, SimError>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| SimError::ConfigInvalid(format!("worker pool: {e}")))?;
        pool.install(run_all)?
    };

    let mut cells = Vec::new();
    let mut cursor = 0;
    for &participants in &cfg.scenarios {
        for &strategy in &cfg.strategies {
            let slice = &metrics[cursor..cursor + cfg.reps];
            cursor += cfg.reps;
            cells.push(CellSummary {
                participants,
                strategy,
                reps: cfg.reps,
                psnr_db: MetricSummary::from_samples(
                    &slice.iter().map(|m| m.0).collect::<Vec<_>>(),
                ),
                playback_delay_ms: MetricSummary::from_samples(
                    &slice.iter().map(|m| m.1).collect::<Vec<_>>(),
                ),
                throughput_kbps: MetricSummary::from_samples(
                    &slice.iter().map(|m| m.2).collect::<Vec<_>>(),
                ),
            });
        }
    }
    Ok(ComparisonReport { cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid(reps: usize) -> CompareConfig {
        CompareConfig {
            scenarios: vec![4],
            reps,
            strategies: vec![Strategy::Ton, Strategy::Don],
            seed_base: 0,
            jobs: 1,
            template: ScenarioConfig {
                duration_s: 50.0,
                ..Default::default()
            },
        }
    }

    #[test]
    fn cell_and_row_counts() {
        let report = run_comparison(&small_grid(2), None).unwrap();
        assert_eq!(report.cells.len(), 2);
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 1 + 2 * 3);
    }

    #[test]
    fn identical_config_is_byte_identical() {
        let cfg = small_grid(2);
        let a = run_comparison(&cfg, None).unwrap().to_csv();
        let b = run_comparison(&cfg, None).unwrap().to_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn parallel_matches_sequential() {
        let mut cfg = small_grid(3);
        let seq = run_comparison(&cfg, None).unwrap().to_csv();
        cfg.jobs = 4;
        let par = run_comparison(&cfg, None).unwrap().to_csv();
        assert_eq!(seq, par);
    }

    #[test]
    fn single_rep_has_empty_ci() {
        let report = run_comparison(&small_grid(1), None).unwrap();
        assert!(report.cells[0].psnr_db.ci95_lo.is_none());
        let csv = report.to_csv();
        assert!(csv.lines().nth(1).unwrap().contains(",,"));
    }

    #[test]
    fn ci_shrinks_with_more_reps() {
        let narrow = run_comparison(&small_grid(10), None).unwrap();
        let wide = run_comparison(&small_grid(3), None).unwrap();
        let w_narrow = narrow.cells[0].throughput_kbps.ci_width().unwrap();
        let w_wide = wide.cells[0].throughput_kbps.ci_width().unwrap();
        assert!(
            w_narrow < w_wide,
            "ci width {w_narrow} (10 reps) vs {w_wide} (3 reps)"
        );
    }

    #[test]
    fn cabin_without_model_is_rejected() {
        let cfg = CompareConfig {
            strategies: vec![Strategy::Cabin],
            ..small_grid(1)
        };
        assert!(matches!(
            run_comparison(&cfg, None),
            Err(SimError::ConfigInvalid(_))
        ));
    }
}
