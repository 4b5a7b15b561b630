use cabin::bayesnet::{infer_marginal, Evidence};
use cabin::sim::*;
use cabin::tuner::recommend_best;

fn main() {
    let warmup: Vec<ScenarioConfig> = (0..8)
        .map(|i| ScenarioConfig {
            participants: 8,
            seed: derive_seed(0, &[100, i as u64]),
            ..Default::default()
        })
        .collect();
    let model = train_cabin(&warmup, &LearnKnobs::default()).unwrap();
    let dag = model.dag();
    println!("edges: {:?}", dag.edges().iter().map(|&(p,c)| format!("{}->{}", dag.node(p).name, dag.node(c).name)).collect::<Vec<_>>());
    let rate_k = model.scheme("video_rate_kbps").unwrap().term_count();
    let psnr_scheme = model.scheme("frame_psnr_db").unwrap();
    println!("psnr terms: {:?}", psnr_scheme.terms.iter().map(|t| (t.amplitude, t.mean, t.width)).collect::<Vec<_>>());
    for bw_label in 0..model.scheme("avail_bw_kbps").unwrap().term_count() {
        println!("--- bw class {bw_label} ---");
        for rate_label in 0..rate_k {
            let mut ev = Evidence::new();
            ev.set("avail_bw_kbps", bw_label);
            ev.set("video_rate_kbps", rate_label);
            let p = infer_marginal(&model, &ev, "frame_psnr_db").unwrap();
            println!("  rate {rate_label}: P(psnr)= {:?}", p.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>());
        }
        let mut obs = Evidence::new();
        obs.set("avail_bw_kbps", bw_label);
        let pref: Vec<usize> = (0..psnr_scheme.term_count()).rev().collect();
        let rec = recommend_best(&model, "frame_psnr_db", &pref, &obs, 0.5).unwrap();
        println!("  recommend_best -> target {} p={:.3} assignment {:?}", rec.target_label, rec.probability, rec.assignment);
    }
}
