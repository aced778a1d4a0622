//! Probe degree correlations and popularity aging statistics.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventlog::{EventLog, ItemIdx};
use crate::probes::ProbeSplit;
use crate::time::Timestamp;

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::UndefinedCorrelation(
            "need two equal-length samples of size >= 2",
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// One item of the degree scatter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub item: ItemIdx,
    /// Time since the item's first training link.
    pub age: Timestamp,
    pub k_train: usize,
    pub delta_k: usize,
    pub k_probe: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeCorrelations {
    /// corr(k_train, k_P)
    pub degree_vs_probe: f64,
    /// corr(dk(T_P, tau), k_P)
    pub increase_vs_probe: f64,
    pub tau: Timestamp,
    pub items: usize,
}

/// Scatter data over every item with at least one training link; items
/// missing from the probe get `k_P = 0`.
pub fn probe_scatter(split: &ProbeSplit, tau: Timestamp) -> Result<Vec<ScatterRow>> {
    if tau <= 0 {
        return Err(Error::invalid("tau must be positive"));
    }
    let snap = &split.training;
    let t = split.reference_time();
    let mut k_probe = vec![0usize; snap.n_items()];
    for e in &split.probe {
        k_probe[e.item as usize] += 1;
    }
    Ok((0..snap.n_items() as ItemIdx)
        .filter(|&a| snap.item_degree(a) > 0)
        .map(|a| ScatterRow {
            item: a,
            age: t - snap.item_link_times(a)[0],
            k_train: snap.item_degree(a),
            delta_k: snap.degree_increase(a, t, tau),
            k_probe: k_probe[a as usize],
        })
        .collect())
}

/// Pearson correlations of training degree and of recent degree increase
/// with probe degree.
pub fn probe_degree_correlations(split: &ProbeSplit, tau: Timestamp) -> Result<ProbeCorrelations> {
    if split.probe.is_empty() {
        return Err(Error::UndefinedCorrelation("empty probe"));
    }
    let rows = probe_scatter(split, tau)?;
    let kp: Vec<f64> = rows.iter().map(|r| r.k_probe as f64).collect();
    let k: Vec<f64> = rows.iter().map(|r| r.k_train as f64).collect();
    let dk: Vec<f64> = rows.iter().map(|r| r.delta_k as f64).collect();
    Ok(ProbeCorrelations {
        degree_vs_probe: pearson(&k, &kp)?,
        increase_vs_probe: pearson(&dk, &kp)?,
        tau,
        items: rows.len(),
    })
}

pub fn write_scatter_csv<W: Write>(writer: W, log: &EventLog, rows: &[ScatterRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["item_id", "age", "k_train", "delta_k", "k_probe"])?;
    for r in rows {
        w.write_record([
            log.item_id(r.item),
            &r.age.to_string(),
            &r.k_train.to_string(),
            &r.delta_k.to_string(),
            &r.k_probe.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(())
}

/// Time from an item's first link to its `ceil(k/2)`-th link.
pub fn item_half_life(times: &[Timestamp]) -> Option<Timestamp> {
    let first = *times.first()?;
    let half = times.len().div_ceil(2);
    Some(times[half - 1] - first)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfLifeStats {
    pub items: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub min_degree: usize,
}

/// Half-life statistics over items with at least `min_degree` links.
pub fn popularity_half_life(log: &EventLog, min_degree: usize) -> HalfLifeStats {
    let mut lives: Vec<Timestamp> = (0..log.item_count() as ItemIdx)
        .map(|a| log.item_times(a))
        .filter(|t| !t.is_empty() && t.len() >= min_degree)
        .filter_map(item_half_life)
        .collect();
    lives.sort_unstable();
    let n = lives.len();
    let mean = (n > 0).then(|| lives.iter().map(|&x| x as f64).sum::<f64>() / n as f64);
    let median = (n > 0).then(|| {
        if n % 2 == 1 {
            lives[n / 2] as f64
        } else {
            (lives[n / 2 - 1] + lives[n / 2]) as f64 / 2.0
        }
    });
    HalfLifeStats {
        items: n,
        mean,
        median,
        min_degree,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventlog::RawEvent;
    use crate::probes::time_probe;
    use crate::time::TimeUnit;

    #[test]
    fn half_life_definition() {
        assert_eq!(item_half_life(&[0, 10, 20, 30]), Some(10));
        assert_eq!(item_half_life(&[7]), Some(0));
        assert_eq!(item_half_life(&[0, 4, 9]), Some(4));
        assert_eq!(item_half_life(&[]), None);
    }

    #[test]
    fn half_life_stats_with_floor() {
        let mut rows = Vec::new();
        for (k, t) in [0, 10, 20, 30].iter().enumerate() {
            rows.push(RawEvent::new(format!("u{k}"), "a", *t));
        }
        rows.push(RawEvent::new("u9", "b", 5));
        let log = EventLog::from_records(rows, TimeUnit::Step).unwrap();
        let all = popularity_half_life(&log, 1);
        assert_eq!(all.items, 2);
        assert_eq!(all.mean, Some(5.0));
        assert_eq!(all.median, Some(5.0));
        let popular = popularity_half_life(&log, 3);
        assert_eq!(popular.items, 1);
        assert_eq!(popular.mean, Some(10.0));
        assert_eq!(popularity_half_life(&log, 100).mean, None);
    }

    #[test]
    fn perfect_linearity_gives_unit_correlation() {
        // item i has i training links and 2i probe links
        let mut rows = Vec::new();
        let mut user = 0;
        for item in 1..=4 {
            for _ in 0..item {
                rows.push(RawEvent::new(format!("u{user:03}"), format!("i{item}"), 1));
                user += 1;
            }
            for _ in 0..2 * item {
                rows.push(RawEvent::new(format!("u{user:03}"), format!("i{item}"), 5));
                user += 1;
            }
        }
        let log = EventLog::from_records(rows, TimeUnit::Step).unwrap();
        let split = time_probe(&log, 5, 1).unwrap();
        let c = probe_degree_correlations(&split, 10).unwrap();
        assert!((c.degree_vs_probe - 1.0).abs() < 1e-12);
        assert!((c.increase_vs_probe - 1.0).abs() < 1e-12);
        assert_eq!(c.items, 4);
    }

    #[test]
    fn degenerate_inputs_are_errors() {
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0], &[1.0]).is_err());
        let log = EventLog::from_records(
            vec![RawEvent::new("u", "a", 1), RawEvent::new("v", "a", 9)],
            TimeUnit::Step,
        )
        .unwrap();
        let split = time_probe(&log, 2, 1).unwrap();
        assert!(probe_degree_correlations(&split, 1).is_err());
    }
}
