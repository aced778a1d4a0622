//! Reading a ratings file into an event log.
//!
//! Parses comma-separated `user,item,rating,unix_seconds` rows, keeps
//! ratings of at least 4, and writes the canonical tab-separated log.
//!
//! ```bash
//! cargo run --example ingest_events
//! ```

use netrec::eventlog::read_events;
use netrec::{IngestConfig, TimeUnit};

const RATINGS: &str = "\
user,item,rating,time
alice,matrix,5,1000000000
alice,alien,3,1000086400
bob,matrix,4,1000172800
bob,heat,5,1000259200
# a duplicate keeps the earliest time
bob,heat,5,1000345600
carol,alien,4,1000432000
";

fn main() -> netrec::Result<()> {
    let config = IngestConfig {
        delimiter: ',',
        has_header: true,
        timestamp_column: 3,
        ..IngestConfig::default()
    }
    .with_rating(2, 4.0)
    .with_time_unit(TimeUnit::Second);

    let log = read_events(RATINGS.as_bytes(), &config)?;
    println!("{:#?}", log.summary());

    let day = 86_400;
    let snapshot = log.snapshot(3 * day);
    println!(
        "links before day 3: {} across {} items",
        snapshot.edge_count(),
        snapshot.active_items()
    );

    println!("\ncanonical log:");
    log.write_to(std::io::stdout().lock(), b'\t')
}
