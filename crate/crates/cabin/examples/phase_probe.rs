use cabin::sim::*;

fn main() {
    let warmup: Vec<ScenarioConfig> = (0..8)
        .map(|i| ScenarioConfig { participants: 8, seed: derive_seed(0, &[100, i as u64]), ..Default::default() })
        .collect();
    let model = train_cabin(&warmup, &LearnKnobs::default()).unwrap();
    for strat in [Strategy::Cabin, Strategy::Ton] {
        let cfg = ScenarioConfig { participants: 4, seed: 1, strategy: strat, ..Default::default() };
        let r = run_session(&cfg, if strat == Strategy::Cabin { Some(&model) } else { None }).unwrap();
        println!("== {} mean_psnr={:.2} starvations={}", strat.name(), r.mean_psnr_db, r.starvation_count);
        // averages per 25s band, participant 0 records
        for band in 0..12 {
            let lo = band as f64 * 25.0;
            let recs: Vec<_> = r.records.iter().filter(|x| x.time_s >= lo && x.time_s < lo + 25.0).collect();
            let n = recs.len() as f64;
            let f = |g: &dyn Fn(&&&EpochRecord) -> f64| recs.iter().map(|x| g(&x)).sum::<f64>() / n;
            println!(
                "  t={lo:>3.0} rate={:>6.0} avail={:>6.0} est={:>6.0} loss={:>5.3} psnr={:>5.2}",
                f(&|x| x.video_rate_kbps), f(&|x| x.avail_bw_kbps), f(&|x| x.est_bw_kbps), f(&|x| x.loss_frac), f(&|x| x.frame_psnr_db)
            );
        }
    }
}
