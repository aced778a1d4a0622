//! Growing synthetic logs with and without relevance decay.
//!
//! With aging, the items gaining links near the end of the run are
//! young; without aging the early items keep winning.
//!
//! ```bash
//! cargo run --release --example synth_generator
//! ```

use netrec::diagnostics::popularity_half_life;
use netrec::{generate, GenParams};

fn main() -> netrec::Result<()> {
    let base = GenParams {
        total_steps: 400,
        ..GenParams::default()
    };
    let window = 50;
    for (name, params) in [("aging", base.clone()), ("no aging", base.without_aging())] {
        let log = generate(&params)?;
        let end = log.max_time() + 1;
        let mut recent: Vec<(usize, u32)> = (0..log.item_count() as u32)
            .map(|a| (log.degree_increase(a, end, window), a))
            .collect();
        recent.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
        let births: Vec<i64> = recent[..10]
            .iter()
            .map(|&(_, a)| log.item_times(a)[0])
            .collect();
        let mean_birth = births.iter().sum::<i64>() as f64 / births.len() as f64;
        let half = popularity_half_life(&log, 10);
        println!(
            "{name:<9} {} links, {} items; the 10 items gaining most links in the last {window} \
             steps were born at step {mean_birth:.0} on average; median half-life {:.0} steps",
            log.len(),
            log.item_count(),
            half.median.unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
