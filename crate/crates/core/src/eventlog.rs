//! Canonical event log and immutable bipartite snapshots.
//!
//! An [`EventLog`] is the single source of truth: a time-ordered list of
//! user–item link creations. A [`Snapshot`] freezes the bipartite network
//! at a cut time, holding both adjacency orientations in CSR form.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{TimeUnit, Timestamp};

pub type UserIdx = u32;
pub type ItemIdx = u32;

/// A single link-creation event in dense index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub user: UserIdx,
    pub item: ItemIdx,
    pub timestamp: Timestamp,
}

/// An event as read from an input file, before interning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEvent {
    pub user: String,
    pub item: String,
    pub timestamp: Timestamp,
}

impl RawEvent {
    pub fn new(user: impl Into<String>, item: impl Into<String>, timestamp: Timestamp) -> Self {
        RawEvent {
            user: user.into(),
            item: item.into(),
            timestamp,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EventLog {
    users: Vec<String>,
    items: Vec<String>,
    user_lookup: HashMap<String, UserIdx>,
    item_lookup: HashMap<String, ItemIdx>,
    events: Vec<Event>,
    /// Sorted link timestamps of each item.
    item_times: Vec<Vec<Timestamp>>,
    time_unit: TimeUnit,
    origin: Timestamp,
}

impl EventLog {
    /// Builds a log from raw records.
    ///
    /// Duplicate (user, item) pairs keep their earliest timestamp; events are
    /// sorted by timestamp with input order as the tie-break. User and item
    /// indices follow the lexicographic order of their identifiers, so index
    /// order doubles as identifier order.
    pub fn from_records<I>(records: I, time_unit: TimeUnit) -> Result<Self>
    where
        I: IntoIterator<Item = RawEvent>,
    {
        Self::from_records_with_origin(records, time_unit, 0)
    }

    pub(crate) fn from_records_with_origin<I>(
        records: I,
        time_unit: TimeUnit,
        origin: Timestamp,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = RawEvent>,
    {
        let mut user_tmp: HashMap<String, u32> = HashMap::new();
        let mut item_tmp: HashMap<String, u32> = HashMap::new();
        // (user, item) -> (timestamp, input order)
        let mut first_seen: HashMap<(u32, u32), (Timestamp, usize)> = HashMap::new();

        for (order, rec) in records.into_iter().enumerate() {
            if rec.timestamp < 0 {
                return Err(Error::invalid(format!(
                    "negative timestamp {} for ({}, {})",
                    rec.timestamp, rec.user, rec.item
                )));
            }
            let next_user = user_tmp.len() as u32;
            let u = *user_tmp.entry(rec.user).or_insert(next_user);
            let next_item = item_tmp.len() as u32;
            let i = *item_tmp.entry(rec.item).or_insert(next_item);
            first_seen
                .entry((u, i))
                .and_modify(|slot| {
                    if rec.timestamp < slot.0 {
                        *slot = (rec.timestamp, order);
                    }
                })
                .or_insert((rec.timestamp, order));
        }
        if first_seen.is_empty() {
            return Err(Error::EmptyLog);
        }

        let (users, user_remap) = sorted_interning(user_tmp);
        let (items, item_remap) = sorted_interning(item_tmp);

        let mut keyed: Vec<(Timestamp, usize, Event)> = first_seen
            .into_iter()
            .map(|((u, i), (ts, order))| {
                (
                    ts,
                    order,
                    Event {
                        user: user_remap[u as usize],
                        item: item_remap[i as usize],
                        timestamp: ts,
                    },
                )
            })
            .collect();
        keyed.sort_unstable_by_key(|&(ts, order, _)| (ts, order));
        let events: Vec<Event> = keyed.into_iter().map(|(_, _, e)| e).collect();

        let mut item_times = vec![Vec::new(); items.len()];
        for e in &events {
            item_times[e.item as usize].push(e.timestamp);
        }

        let user_lookup = users
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as UserIdx))
            .collect();
        let item_lookup = items
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as ItemIdx))
            .collect();

        Ok(EventLog {
            users,
            items,
            user_lookup,
            item_lookup,
            events,
            item_times,
            time_unit,
            origin,
        })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    /// Largest timestamp in the log (`T_m`).
    pub fn max_time(&self) -> Timestamp {
        self.events.last().map_or(0, |e| e.timestamp)
    }

    pub fn time_unit(&self) -> TimeUnit {
        self.time_unit
    }

    /// Offset subtracted from the input timestamps at ingest.
    pub fn origin(&self) -> Timestamp {
        self.origin
    }

    pub fn user_id(&self, user: UserIdx) -> &str {
        &self.users[user as usize]
    }

    pub fn item_id(&self, item: ItemIdx) -> &str {
        &self.items[item as usize]
    }

    pub fn user_index(&self, id: &str) -> Option<UserIdx> {
        self.user_lookup.get(id).copied()
    }

    pub fn item_index(&self, id: &str) -> Option<ItemIdx> {
        self.item_lookup.get(id).copied()
    }

    /// Sorted link timestamps of an item; empty for unknown items.
    pub fn item_times(&self, item: ItemIdx) -> &[Timestamp] {
        self.item_times
            .get(item as usize)
            .map_or(&[][..], Vec::as_slice)
    }

    /// `k_alpha(t)`: number of links of `item` with timestamp < `t`.
    pub fn item_degree_at(&self, item: ItemIdx, t: Timestamp) -> usize {
        count_before(self.item_times(item), t)
    }

    /// Links of `item` with timestamps in `[t - tau, t)`.
    ///
    /// Unknown items yield 0; a window reaching below zero simply covers
    /// everything before `t`.
    pub fn degree_increase(&self, item: ItemIdx, t: Timestamp, tau: Timestamp) -> usize {
        window_count(self.item_times(item), t, tau)
    }

    /// Materializes the network formed by all events with timestamp < `t`.
    pub fn snapshot(&self, t: Timestamp) -> Snapshot {
        build_snapshot(self, t)
    }

    /// Writes the log as delimiter-separated `user, item, timestamp` lines,
    /// restoring the original timestamp offset.
    pub fn write_to<W: Write>(&self, writer: W, delimiter: u8) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .has_headers(false)
            .from_writer(writer);
        for e in &self.events {
            let ts = (e.timestamp + self.origin).to_string();
            w.write_record([self.user_id(e.user), self.item_id(e.item), ts.as_str()])?;
        }
        w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(())
    }

    pub fn write_file(&self, path: impl AsRef<Path>, delimiter: u8) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(io::BufWriter::new(file), delimiter)
    }

    /// Summary of the log's basic properties.
    pub fn summary(&self) -> LogSummary {
        LogSummary {
            users: self.user_count(),
            items: self.item_count(),
            events: self.len(),
            max_time: self.max_time(),
            time_unit: self.time_unit,
            origin: self.origin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogSummary {
    pub users: usize,
    pub items: usize,
    pub events: usize,
    pub max_time: Timestamp,
    pub time_unit: TimeUnit,
    pub origin: Timestamp,
}

fn sorted_interning(tmp: HashMap<String, u32>) -> (Vec<String>, Vec<u32>) {
    let mut pairs: Vec<(String, u32)> = tmp.into_iter().collect();
    pairs.sort_unstable();
    let mut remap = vec![0; pairs.len()];
    let mut names = Vec::with_capacity(pairs.len());
    for (new, (name, old)) in pairs.into_iter().enumerate() {
        remap[old as usize] = new as u32;
        names.push(name);
    }
    (names, remap)
}

fn count_before(times: &[Timestamp], t: Timestamp) -> usize {
    times.partition_point(|&x| x < t)
}

fn window_count(times: &[Timestamp], t: Timestamp, tau: Timestamp) -> usize {
    count_before(times, t) - count_before(times, t.saturating_sub(tau))
}

/// Column layout and filters for delimiter-separated event files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    /// Field delimiter, `'\t'` or `','` in practice.
    pub delimiter: char,
    pub has_header: bool,
    pub user_column: usize,
    pub item_column: usize,
    pub timestamp_column: usize,
    pub rating_column: Option<usize>,
    /// Records with rating below this value are dropped.
    pub rating_threshold: Option<f64>,
    pub time_unit: TimeUnit,
    /// Shift timestamps so the earliest event sits at time 0.
    pub rebase: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            delimiter: '\t',
            has_header: false,
            user_column: 0,
            item_column: 1,
            timestamp_column: 2,
            rating_column: None,
            rating_threshold: None,
            time_unit: TimeUnit::Step,
            rebase: true,
        }
    }
}

impl IngestConfig {
    pub fn with_time_unit(mut self, unit: TimeUnit) -> Self {
        self.time_unit = unit;
        self
    }

    /// Enables the rating column (fourth column by default) with a threshold.
    pub fn with_rating(mut self, column: usize, threshold: f64) -> Self {
        self.rating_column = Some(column);
        self.rating_threshold = Some(threshold);
        self
    }

    fn delimiter_byte(&self) -> Result<u8> {
        u8::try_from(self.delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| Error::Config(format!("delimiter {:?} is not ASCII", self.delimiter)))
    }
}

/// Reads events from any reader according to `config`.
pub fn read_events<R: Read>(reader: R, config: &IngestConfig) -> Result<EventLog> {
    if config.rating_threshold.is_some() && config.rating_column.is_none() {
        return Err(Error::Config(
            "rating threshold configured without a rating column".into(),
        ));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(config.delimiter_byte()?)
        .has_headers(config.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.iter().all(str::is_empty) {
            continue;
        }
        let field = |idx: usize, name: &str| -> Result<&str> {
            row.get(idx)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("missing {name} column (index {idx})"),
                })
        };
        let user = field(config.user_column, "user")?;
        let item = field(config.item_column, "item")?;
        let ts_raw = field(config.timestamp_column, "timestamp")?;
        let timestamp: Timestamp = ts_raw.parse().map_err(|_| Error::Parse {
            line,
            message: format!("timestamp '{ts_raw}' is not an integer"),
        })?;
        if let Some(col) = config.rating_column {
            let raw = field(col, "rating")?;
            let rating: f64 = raw.parse().map_err(|_| Error::Parse {
                line,
                message: format!("rating '{raw}' is not a number"),
            })?;
            if config.rating_threshold.is_some_and(|th| rating < th) {
                continue;
            }
        }
        records.push(RawEvent::new(user, item, timestamp));
    }

    let origin = if config.rebase {
        records.iter().map(|r| r.timestamp).min().unwrap_or(0)
    } else {
        0
    };
    if origin != 0 {
        for r in &mut records {
            r.timestamp -= origin;
        }
    }
    EventLog::from_records_with_origin(records, config.time_unit, origin)
}

/// Loads an event file from disk.
pub fn load_events(path: impl AsRef<Path>, config: &IngestConfig) -> Result<EventLog> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_events(BufReader::new(file), config)
}

/// Immutable bipartite network frozen at a cut time.
///
/// Node indices live in the index space of the originating [`EventLog`];
/// nodes without links in the snapshot simply have degree 0.
#[derive(Debug, Clone)]
pub struct Snapshot {
    cut_time: Timestamp,
    user_offsets: Vec<usize>,
    user_items: Vec<ItemIdx>,
    item_offsets: Vec<usize>,
    item_users: Vec<UserIdx>,
    /// Per-item link timestamps, sorted, sharing `item_offsets`.
    item_times: Vec<Timestamp>,
    active_users: usize,
    active_items: usize,
    max_item_degree: usize,
}

impl Snapshot {
    /// Builds a snapshot over `events` in a network of the given size.
    /// The caller decides which events belong; no filtering happens here.
    pub fn from_events<'a, I>(
        n_users: usize,
        n_items: usize,
        events: I,
        cut_time: Timestamp,
    ) -> Self
    where
        I: IntoIterator<Item = &'a Event>,
        I::IntoIter: Clone,
    {
        let events = events.into_iter();
        let mut user_deg = vec![0usize; n_users];
        let mut item_deg = vec![0usize; n_items];
        for e in events.clone() {
            user_deg[e.user as usize] += 1;
            item_deg[e.item as usize] += 1;
        }
        let user_offsets = prefix_offsets(&user_deg);
        let item_offsets = prefix_offsets(&item_deg);
        let nnz = *user_offsets.last().unwrap_or(&0);

        let mut user_items = vec![0; nnz];
        let mut item_users = vec![0; nnz];
        let mut item_times = vec![0; nnz];
        let mut ufill = user_offsets.clone();
        let mut ifill = item_offsets.clone();
        for e in events {
            let u = e.user as usize;
            let i = e.item as usize;
            user_items[ufill[u]] = e.item;
            ufill[u] += 1;
            item_users[ifill[i]] = e.user;
            item_times[ifill[i]] = e.timestamp;
            ifill[i] += 1;
        }
        for u in 0..n_users {
            user_items[user_offsets[u]..user_offsets[u + 1]].sort_unstable();
        }
        for i in 0..n_items {
            let range = item_offsets[i]..item_offsets[i + 1];
            item_users[range.clone()].sort_unstable();
            item_times[range].sort_unstable();
        }

        Snapshot {
            cut_time,
            active_users: user_deg.iter().filter(|&&d| d > 0).count(),
            active_items: item_deg.iter().filter(|&&d| d > 0).count(),
            max_item_degree: item_deg.iter().copied().max().unwrap_or(0),
            user_offsets,
            user_items,
            item_offsets,
            item_users,
            item_times,
        }
    }

    pub fn cut_time(&self) -> Timestamp {
        self.cut_time
    }

    /// Size of the user index space (including degree-0 users).
    pub fn n_users(&self) -> usize {
        self.user_offsets.len() - 1
    }

    /// Size of the item index space (including degree-0 items).
    pub fn n_items(&self) -> usize {
        self.item_offsets.len() - 1
    }

    /// Users with at least one link.
    pub fn active_users(&self) -> usize {
        self.active_users
    }

    /// Items with at least one link; the rankable item set.
    pub fn active_items(&self) -> usize {
        self.active_items
    }

    pub fn edge_count(&self) -> usize {
        self.user_items.len()
    }

    pub fn max_item_degree(&self) -> usize {
        self.max_item_degree
    }

    pub fn user_items(&self, user: UserIdx) -> &[ItemIdx] {
        let u = user as usize;
        if u >= self.n_users() {
            return &[];
        }
        &self.user_items[self.user_offsets[u]..self.user_offsets[u + 1]]
    }

    pub fn item_users(&self, item: ItemIdx) -> &[UserIdx] {
        let i = item as usize;
        if i >= self.n_items() {
            return &[];
        }
        &self.item_users[self.item_offsets[i]..self.item_offsets[i + 1]]
    }

    pub fn item_link_times(&self, item: ItemIdx) -> &[Timestamp] {
        let i = item as usize;
        if i >= self.n_items() {
            return &[];
        }
        &self.item_times[self.item_offsets[i]..self.item_offsets[i + 1]]
    }

    pub fn user_degree(&self, user: UserIdx) -> usize {
        self.user_items(user).len()
    }

    pub fn item_degree(&self, item: ItemIdx) -> usize {
        self.item_users(item).len()
    }

    pub fn has_edge(&self, user: UserIdx, item: ItemIdx) -> bool {
        self.user_items(user).binary_search(&item).is_ok()
    }

    /// Links of `item` in this snapshot with timestamps in `[t - tau, t)`.
    pub fn degree_increase(&self, item: ItemIdx, t: Timestamp, tau: Timestamp) -> usize {
        window_count(self.item_link_times(item), t, tau)
    }

    /// All (user, item) edges in user-major order.
    pub fn edges(&self) -> impl Iterator<Item = (UserIdx, ItemIdx)> + '_ {
        (0..self.n_users() as UserIdx)
            .flat_map(move |u| self.user_items(u).iter().map(move |&i| (u, i)))
    }
}

fn prefix_offsets(degrees: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(degrees.len() + 1);
    let mut acc = 0;
    offsets.push(0);
    for d in degrees {
        acc += d;
        offsets.push(acc);
    }
    offsets
}

/// Snapshot of all events with timestamp strictly below `t`.
pub fn build_snapshot(log: &EventLog, t: Timestamp) -> Snapshot {
    let end = log.events.partition_point(|e| e.timestamp < t);
    Snapshot::from_events(log.user_count(), log.item_count(), &log.events[..end], t)
}
