//! Does recent degree increase predict the probe better than degree?
//!
//! Builds a time probe at 90% of a synthetic log and prints both
//! correlations with the probe degree for several windows.
//!
//! ```bash
//! cargo run --release --example aging_diagnostics -- [seed]
//! ```

use netrec::diagnostics::{popularity_half_life, probe_degree_correlations};
use netrec::{generate, time_probe, GenParams};

fn main() -> netrec::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let log = generate(&GenParams::default().with_seed(seed))?;
    let probe_time = log.max_time() * 9 / 10;
    let split = time_probe(&log, probe_time, 1)?;
    println!(
        "probe at step {probe_time}: {} links, cold fraction {:.3}",
        split.probe.len(),
        split.cold_fraction()
    );
    println!("{:>5} {:>12} {:>12}", "tau", "corr(k,kP)", "corr(dk,kP)");
    for tau in [1, 5, 20, 100] {
        let c = probe_degree_correlations(&split, tau)?;
        println!(
            "{tau:>5} {:>12.3} {:>12.3}",
            c.degree_vs_probe, c.increase_vs_probe
        );
    }
    let half = popularity_half_life(&log, 20);
    println!(
        "half-life over {} items with k >= 20: mean {:.1}, median {:.1}",
        half.items,
        half.mean.unwrap_or(f64::NAN),
        half.median.unwrap_or(f64::NAN)
    );
    Ok(())
}
