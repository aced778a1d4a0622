//! Random and time probes.
//!
//! A random probe hides a uniformly drawn fraction of all links; the rest,
//! past and future alike, is training data. A time probe hides the links
//! created in `[T_P, T_P + delta_P)` and trains only on links older than
//! `T_P`; anything later is discarded.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventlog::{build_snapshot, Event, EventLog, ItemIdx, Snapshot, UserIdx};
use crate::time::Timestamp;

/// Derives an independent seed for draw `index` of a run seeded with `master`.
pub fn child_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finalizer over a golden-ratio stride
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProbeKind {
    Random {
        fraction: f64,
    },
    Time {
        probe_time: Timestamp,
        delta: Timestamp,
    },
}

impl ProbeKind {
    pub fn label(&self) -> &'static str {
        match self {
            ProbeKind::Random { .. } => "random",
            ProbeKind::Time { .. } => "time",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitStatus {
    Ok,
    /// No event fell into the probe; metrics on this split are undefined.
    EmptyProbe,
}

#[derive(Debug, Clone)]
pub struct ProbeSplit {
    pub training: Snapshot,
    pub probe: Vec<Event>,
    pub kind: ProbeKind,
    pub seed: Option<u64>,
    pub status: SplitStatus,
    cold_events: usize,
}

impl ProbeSplit {
    fn new(training: Snapshot, probe: Vec<Event>, kind: ProbeKind, seed: Option<u64>) -> Self {
        let cold_events = probe
            .iter()
            .filter(|e| training.item_degree(e.item) == 0)
            .count();
        let status = if probe.is_empty() {
            SplitStatus::EmptyProbe
        } else {
            SplitStatus::Ok
        };
        ProbeSplit {
            training,
            probe,
            kind,
            seed,
            status,
            cold_events,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.status == SplitStatus::EmptyProbe
    }

    /// Probe events whose item has no training link.
    pub fn cold_events(&self) -> usize {
        self.cold_events
    }

    pub fn cold_fraction(&self) -> f64 {
        if self.probe.is_empty() {
            0.0
        } else {
            self.cold_events as f64 / self.probe.len() as f64
        }
    }

    /// Time at which degrees and degree increases are read: `T_P` for a
    /// time probe, the training snapshot's cut for a random probe.
    pub fn reference_time(&self) -> Timestamp {
        self.training.cut_time()
    }

    /// Probe items grouped by user, both in ascending index order.
    pub fn probe_by_user(&self) -> BTreeMap<UserIdx, Vec<ItemIdx>> {
        let mut map: BTreeMap<UserIdx, Vec<ItemIdx>> = BTreeMap::new();
        for e in &self.probe {
            map.entry(e.user).or_default().push(e.item);
        }
        for items in map.values_mut() {
            items.sort_unstable();
        }
        map
    }

    pub fn descriptor(&self) -> SplitDescriptor {
        let (fraction, probe_time, delta) = match self.kind {
            ProbeKind::Random { fraction } => (Some(fraction), None, None),
            ProbeKind::Time { probe_time, delta } => (None, Some(probe_time), Some(delta)),
        };
        SplitDescriptor {
            kind: self.kind.label().to_string(),
            seed: self.seed,
            fraction,
            probe_time,
            delta_p: delta,
            training_events: self.training.edge_count(),
            probe_events: self.probe.len(),
            cold_events: self.cold_events,
            cold_fraction: self.cold_fraction(),
            status: self.status,
        }
    }
}

/// Serializable provenance record of a split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDescriptor {
    pub kind: String,
    pub seed: Option<u64>,
    pub fraction: Option<f64>,
    pub probe_time: Option<Timestamp>,
    pub delta_p: Option<Timestamp>,
    pub training_events: usize,
    pub probe_events: usize,
    pub cold_events: usize,
    pub cold_fraction: f64,
    pub status: SplitStatus,
}

/// Moves `round(fraction * E)` uniformly chosen links to the probe.
pub fn random_probe(log: &EventLog, fraction: f64, seed: u64) -> Result<ProbeSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!(
            "probe fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let events = log.events();
    let n_probe = (fraction * events.len() as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_probe = vec![false; events.len()];
    for idx in index::sample(&mut rng, events.len(), n_probe) {
        in_probe[idx] = true;
    }
    let mut probe = Vec::with_capacity(n_probe);
    let mut training = Vec::with_capacity(events.len() - n_probe);
    for (k, e) in events.iter().enumerate() {
        if in_probe[k] {
            probe.push(*e);
        } else {
            training.push(*e);
        }
    }
    let training = Snapshot::from_events(
        log.user_count(),
        log.item_count(),
        &training,
        log.max_time() + 1,
    );
    Ok(ProbeSplit::new(
        training,
        probe,
        ProbeKind::Random { fraction },
        Some(seed),
    ))
}

/// Hides the links created in `[probe_time, probe_time + delta)`.
///
/// An empty probe is not an error; the split comes back with
/// [`SplitStatus::EmptyProbe`].
pub fn time_probe(log: &EventLog, probe_time: Timestamp, delta: Timestamp) -> Result<ProbeSplit> {
    if delta <= 0 {
        return Err(Error::invalid("probe span must be positive"));
    }
    if probe_time <= 0 || probe_time > log.max_time() {
        return Err(Error::invalid(format!(
            "probe time {probe_time} outside (0, {}]",
            log.max_time()
        )));
    }
    let training = build_snapshot(log, probe_time);
    let events = log.events();
    let start = events.partition_point(|e| e.timestamp < probe_time);
    let end = events.partition_point(|e| e.timestamp < probe_time.saturating_add(delta));
    Ok(ProbeSplit::new(
        training,
        events[start..end].to_vec(),
        ProbeKind::Time { probe_time, delta },
        None,
    ))
}

/// Draws probe times uniformly from a fractional range of `[0, T_m]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSampler {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub seed: u64,
}

impl ProbeSampler {
    /// `T_P` in `[0.8 T_m, 0.9 T_m]`.
    pub fn calibration(count: usize, seed: u64) -> Self {
        ProbeSampler {
            lo: 0.8,
            hi: 0.9,
            count,
            seed,
        }
    }

    /// `T_P` in `[0.9 T_m, T_m - delta_P]`.
    pub fn evaluation(count: usize, seed: u64) -> Self {
        ProbeSampler {
            lo: 0.9,
            hi: 1.0,
            count,
            seed,
        }
    }

    /// Integer bounds of the feasible range for a log ending at `max_time`.
    pub fn bounds(&self, max_time: Timestamp, delta: Timestamp) -> Result<(Timestamp, Timestamp)> {
        if !(0.0..=1.0).contains(&self.lo) || !(0.0..=1.0).contains(&self.hi) || self.lo > self.hi {
            return Err(Error::invalid(format!(
                "invalid probe-time range [{}, {}]",
                self.lo, self.hi
            )));
        }
        let tm = max_time as f64;
        let lo = ((self.lo * tm) - 1e-9).ceil().max(1.0) as Timestamp;
        let hi = ((self.hi * tm) + 1e-9).floor() as Timestamp;
        let hi = hi.min(max_time - delta);
        if lo > hi {
            return Err(Error::invalid(format!(
                "no feasible probe time in [{}, {}] * {max_time} with span {delta}",
                self.lo, self.hi
            )));
        }
        Ok((lo, hi))
    }
}

/// `sampler.count` probe times, drawn with replacement; draw `k` uses
/// `child_seed(sampler.seed, k)`.
pub fn sample_probe_times(
    log: &EventLog,
    sampler: &ProbeSampler,
    delta: Timestamp,
) -> Result<Vec<Timestamp>> {
    if sampler.count == 0 {
        return Err(Error::invalid("probe count must be at least 1"));
    }
    let (lo, hi) = sampler.bounds(log.max_time(), delta)?;
    draw_times(lo, hi, sampler.count, sampler.seed)
}

/// `count` uniform integer draws from `[lo, hi]`, draw `k` seeded by
/// `child_seed(seed, k)`.
pub fn draw_times(lo: Timestamp, hi: Timestamp, count: usize, seed: u64) -> Result<Vec<Timestamp>> {
    if lo > hi {
        return Err(Error::invalid(format!(
            "empty probe-time range [{lo}, {hi}]"
        )));
    }
    Ok((0..count as u64)
        .map(|k| ChaCha8Rng::seed_from_u64(child_seed(seed, k)).gen_range(lo..=hi))
        .collect())
}
