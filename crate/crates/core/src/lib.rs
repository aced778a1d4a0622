//! Network-based recommendation on temporal bipartite user–item data.
//!
//! The crate covers the full path from a raw interaction log to an
//! evaluation report:
//!
//! * [`eventlog`] ingests timestamped links and freezes bipartite
//!   [`Snapshot`](eventlog::Snapshot)s at arbitrary cut times.
//! * [`probes`] hides part of the data, either uniformly at random or as
//!   the window `[T_P, T_P + delta_P)` right after the training cut.
//! * [`recommenders`] scores items by ProbS, HeatS, their hybrid, SimS,
//!   recent degree increase (DI), and the time-aware TProbS and THybrid.
//! * [`metrics`] computes recall@L, ranking score and the mean degree of
//!   recommended items.
//! * [`synthgen`] grows synthetic logs by preferential attachment with
//!   decaying relevance.
//! * [`diagnostics`] relates training degree and recent degree increase to
//!   probe degree, and measures how fast items age.
//! * [`experiment`] runs calibration sweeps and out-of-sample evaluation.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod eventlog;
pub mod experiment;
pub mod metrics;
pub mod probes;
pub mod recommenders;
pub mod synthgen;
pub mod time;

pub use error::{Error, Result};
pub use eventlog::{
    build_snapshot, load_events, Event, EventLog, IngestConfig, RawEvent, Snapshot,
};
pub use experiment::{calibrate, evaluate, run_pipeline, ExperimentConfig};
pub use metrics::EvalOptions;
pub use probes::{random_probe, sample_probe_times, time_probe, ProbeSampler, ProbeSplit};
pub use recommenders::{rank_items, Method, ScoreVector};
pub use synthgen::{generate, GenParams};
pub use time::{TimeUnit, Timestamp};
