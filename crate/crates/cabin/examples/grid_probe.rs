use cabin::sim::*;

fn main() {
    let t0 = std::time::Instant::now();
    let warmup: Vec<ScenarioConfig> = (0..8)
        .map(|i| ScenarioConfig {
            participants: 8,
            seed: derive_seed(0, &[100, i as u64]),
            ..Default::default()
        })
        .collect();
    let model = train_cabin(&warmup, &LearnKnobs::default()).unwrap();
    eprintln!("trained in {:?}", t0.elapsed());
    eprintln!("qos parents: {:?}", model.dag().parents_named(QOS_VARIABLE).unwrap());
    for (name, s) in model.schemes() {
        let means: Vec<String> = s.terms.iter().map(|t| format!("{:.1}", t.mean)).collect();
        eprintln!("scheme {name}: k={} means={:?}", s.term_count(), means);
    }
    let cfg = CompareConfig { jobs: 4, ..Default::default() };
    let report = run_comparison(&cfg, Some(&model)).unwrap();
    eprintln!("grid in {:?}", t0.elapsed());
    println!("scen strat   psnr    delay     thr");
    for c in &report.cells {
        println!(
            "{:4} {:5} {:7.2} {:8.1} {:7.1}",
            c.participants,
            c.strategy.name(),
            c.psnr_db.mean,
            c.playback_delay_ms.mean,
            c.throughput_kbps.mean
        );
    }
}
