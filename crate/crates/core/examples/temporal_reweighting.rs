//! Recent degree increase and the time-aware scorers built on it.
//!
//! Item "old" collected many links long ago, item "new" a few links
//! recently. ProbS prefers "old"; DI, TProbS and THybrid prefer "new".
//!
//! ```bash
//! cargo run --example temporal_reweighting
//! ```

use netrec::recommenders::{DegreeIncrease, DEFAULT_EPSILON};
use netrec::{EventLog, Method, RawEvent, TimeUnit};

fn main() -> netrec::Result<()> {
    let mut rows = vec![RawEvent::new("me", "seed", 0)];
    for k in 0..8 {
        let u = format!("old{k}");
        rows.push(RawEvent::new(u.as_str(), "seed", 1));
        rows.push(RawEvent::new(u.as_str(), "old", 2));
    }
    for k in 0..3 {
        let u = format!("new{k}");
        rows.push(RawEvent::new(u.as_str(), "seed", 1));
        rows.push(RawEvent::new(u.as_str(), "new", 18 + k));
    }
    let log = EventLog::from_records(rows, TimeUnit::Day)?;
    let cut = log.max_time() + 1;
    let snapshot = log.snapshot(cut);
    let me = log.user_index("me").expect("present");
    let tau = 5;

    let di = DegreeIncrease::compute(&snapshot, tau, DEFAULT_EPSILON)?;
    for id in ["old", "new"] {
        let a = log.item_index(id).expect("present");
        println!(
            "{id:>4}: k = {:>2}, dk(tau={tau}) = {}, weight = {:.3}",
            di.degree(a),
            di.increase(a),
            di.weight(a)
        );
    }
    println!();

    let methods = [
        Method::ProbS,
        Method::DegreeIncrease { tau },
        Method::TProbS { tau },
        Method::THybrid { tau, lambda: 0.5 },
    ];
    for m in methods {
        let scores = m.scores(&snapshot, me, DEFAULT_EPSILON)?;
        let top = netrec::rank_items(&scores, &snapshot, 1)?;
        println!("{:<24} recommends {}", m.label(), log.item_id(top.items[0]));
    }
    Ok(())
}
