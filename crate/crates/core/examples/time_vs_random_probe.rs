//! Random probe versus time probe on a synthetic log with aging.
//!
//! Grows a log where item relevance decays exponentially, then compares
//! ProbS on random probes against ProbS, DI and TProbS on time probes.
//!
//! ```bash
//! cargo run --release --example time_vs_random_probe -- [seed]
//! ```

use netrec::experiment::{evaluate, DatasetSource, ExperimentConfig, MethodKind};
use netrec::recommenders::Method;
use netrec::GenParams;

fn main() -> netrec::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let config = ExperimentConfig {
        dataset: DatasetSource::Synthetic(GenParams::default().with_seed(seed)),
        methods: vec![MethodKind::ProbS, MethodKind::TProbS],
        probes: 20,
        random_probes: 20,
        seed,
        ..ExperimentConfig::default()
    };
    let log = config.dataset.load()?;
    println!(
        "synthetic log: {} users, {} items, {} links over {} steps",
        log.user_count(),
        log.item_count(),
        log.len(),
        log.max_time() + 1
    );

    let methods = [
        Method::ProbS,
        Method::DegreeIncrease { tau: 5 },
        Method::TProbS { tau: 5 },
    ];
    let report = evaluate(&config, &log, &methods)?;
    println!(
        "{:<8} {:<18} {:>8} {:>9} {:>8}",
        "probe", "method", "R(50)", "rankscore", "k_R(50)"
    );
    for row in &report.rows {
        println!(
            "{:<8} {:<18} {:>8.4} {:>9.4} {:>8.1}",
            row.probe_kind, row.label, row.recall.mean, row.ranking_score.mean, row.k_r.mean
        );
    }
    Ok(())
}
