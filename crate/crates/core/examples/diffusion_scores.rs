//! Diffusion scores on a four-link toy network.
//!
//! Users u1 and u2 share item b; u1 also holds a, u2 also holds c. The
//! program prints every time-unaware scorer for u1 and the resulting
//! top-2 list (collected items are never recommended).
//!
//! ```bash
//! cargo run --example diffusion_scores
//! ```

use netrec::recommenders::{heats_scores, hybrid_scores, probs_scores, sims_scores};
use netrec::{rank_items, EventLog, RawEvent, TimeUnit};

fn main() -> netrec::Result<()> {
    let log = EventLog::from_records(
        [
            RawEvent::new("u1", "a", 0),
            RawEvent::new("u1", "b", 0),
            RawEvent::new("u2", "b", 0),
            RawEvent::new("u2", "c", 0),
        ],
        TimeUnit::Step,
    )?;
    let snapshot = log.snapshot(1);
    let user = log.user_index("u1").expect("u1 is in the log");

    let rows = [
        ("probs", probs_scores(&snapshot, user)),
        ("heats", heats_scores(&snapshot, user)),
        ("hybrid(0.5)", hybrid_scores(&snapshot, user, 0.5)?),
        ("sims(theta=2)", sims_scores(&snapshot, user, 2.0, 0.5)?),
    ];
    println!("{:<14} {:>8} {:>8} {:>8}   top-2", "method", "a", "b", "c");
    for (name, scores) in &rows {
        let top = rank_items(scores, &snapshot, 2)?;
        let ids: Vec<&str> = top.items.iter().map(|&i| log.item_id(i)).collect();
        let s = scores.as_slice();
        println!(
            "{name:<14} {:>8.4} {:>8.4} {:>8.4}   {ids:?}",
            s[0], s[1], s[2]
        );
    }
    Ok(())
}
