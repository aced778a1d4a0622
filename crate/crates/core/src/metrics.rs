//! Recall, ranking score and recommended-item popularity.
//!
//! Recall averages per-user hit fractions over users with at least one
//! probe entry. Ranking score averages `r / (I - k_i)` over probe entries,
//! where `I` counts the items present in the training snapshot. `k_R(L)`
//! averages the training degree of each user's top-L items, then over users.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventlog::{ItemIdx, Snapshot, UserIdx};
use crate::probes::SplitDescriptor;
use crate::recommenders::{Ranking, RecommendationList, ScoreVector};

pub const DEFAULT_LIST_LEN: usize = 50;

/// What to do with probe entries whose item has no training link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColdPolicy {
    /// Count them as misses with the worst relative rank 1.0.
    #[default]
    Keep,
    /// Remove them from the probe before evaluation.
    Drop,
}

/// What to do with probe users that have no training links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NewUserPolicy {
    /// Rank for them by tie-break alone and include them in the averages.
    #[default]
    Include,
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    pub list_len: usize,
    pub cold_items: ColdPolicy,
    pub new_users: NewUserPolicy,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            list_len: DEFAULT_LIST_LEN,
            cold_items: ColdPolicy::Keep,
            new_users: NewUserPolicy::Include,
        }
    }
}

impl EvalOptions {
    /// Probe items of `user` that take part in evaluation under these options;
    /// `None` when the user does not participate.
    pub fn filter_probe(
        &self,
        snapshot: &Snapshot,
        user: UserIdx,
        items: &[ItemIdx],
    ) -> Option<Vec<ItemIdx>> {
        if self.new_users == NewUserPolicy::Skip && snapshot.user_degree(user) == 0 {
            return None;
        }
        let kept: Vec<ItemIdx> = match self.cold_items {
            ColdPolicy::Keep => items.to_vec(),
            ColdPolicy::Drop => items
                .iter()
                .copied()
                .filter(|&a| snapshot.item_degree(a) > 0)
                .collect(),
        };
        (!kept.is_empty()).then_some(kept)
    }
}

/// Evaluation result for one user on one probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserOutcome {
    pub user: UserIdx,
    pub probe_item_count: usize,
    pub hits: usize,
    /// One entry per probe item, each in (0, 1].
    pub relative_ranks: Vec<f64>,
    /// Mean training degree of the top-L list; `None` when the list is empty.
    pub top_degree_mean: Option<f64>,
}

impl UserOutcome {
    pub fn recall(&self) -> f64 {
        self.hits as f64 / self.probe_item_count as f64
    }
}

/// Relative rank of every probe item; unrankable items count as 1.0.
fn relative_ranks(ranking: &Ranking<'_>, probe_items: &[ItemIdx]) -> Vec<f64> {
    let denom = ranking.len();
    ranking
        .positions(probe_items)
        .into_iter()
        .map(|pos| match pos {
            Some(p) => p as f64 / denom as f64,
            None => 1.0,
        })
        .collect()
}

fn mean_degree(list: &RecommendationList, snapshot: &Snapshot) -> Option<f64> {
    if list.is_empty() {
        return None;
    }
    let total: usize = list.items.iter().map(|&a| snapshot.item_degree(a)).sum();
    Some(total as f64 / list.len() as f64)
}

/// Scores one user against its (already filtered) probe items.
pub fn evaluate_user(
    scores: &ScoreVector,
    snapshot: &Snapshot,
    probe_items: &[ItemIdx],
    list_len: usize,
) -> UserOutcome {
    let ranking = Ranking::new(scores, snapshot);
    let list = ranking.top(list_len);
    let hits = probe_items
        .iter()
        .filter(|a| list.items.contains(a))
        .count();
    UserOutcome {
        user: scores.user,
        probe_item_count: probe_items.len(),
        hits,
        relative_ranks: relative_ranks(&ranking, probe_items),
        top_degree_mean: mean_degree(&list, snapshot),
    }
}

/// Aggregated metrics over the users of one probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub recall: f64,
    pub ranking_score: f64,
    pub avg_degree: f64,
    pub users: usize,
    pub probe_entries: usize,
}

/// Reduces per-user outcomes in slice order.
pub fn summarize(outcomes: &[UserOutcome]) -> Result<MetricSummary> {
    let participating: Vec<&UserOutcome> =
        outcomes.iter().filter(|o| o.probe_item_count > 0).collect();
    if participating.is_empty() {
        return Err(Error::UndefinedMetric("probe has no entries"));
    }
    let recall = participating.iter().map(|o| o.recall()).sum::<f64>() / participating.len() as f64;
    let entries: usize = participating.iter().map(|o| o.relative_ranks.len()).sum();
    let ranking_score = participating
        .iter()
        .flat_map(|o| o.relative_ranks.iter())
        .sum::<f64>()
        / entries as f64;
    let degrees: Vec<f64> = participating
        .iter()
        .filter_map(|o| o.top_degree_mean)
        .collect();
    let avg_degree = if degrees.is_empty() {
        0.0
    } else {
        degrees.iter().sum::<f64>() / degrees.len() as f64
    };
    Ok(MetricSummary {
        recall,
        ranking_score,
        avg_degree,
        users: participating.len(),
        probe_entries: entries,
    })
}

/// Mean over probe users of the fraction of their probe items in the top `list_len`.
pub fn recall_at_l(
    lists: &[RecommendationList],
    probe: &BTreeMap<UserIdx, Vec<ItemIdx>>,
    list_len: usize,
) -> Result<f64> {
    if list_len == 0 {
        return Err(Error::invalid("list length must be at least 1"));
    }
    if probe.values().all(Vec::is_empty) {
        return Err(Error::UndefinedMetric("probe has no entries"));
    }
    let by_user: BTreeMap<UserIdx, &RecommendationList> =
        lists.iter().map(|l| (l.user, l)).collect();
    let mut sum = 0.0;
    let mut users = 0usize;
    for (user, items) in probe.iter().filter(|(_, v)| !v.is_empty()) {
        let top: &[ItemIdx] = by_user
            .get(user)
            .map_or(&[][..], |l| &l.items[..l.items.len().min(list_len)]);
        let hits = items.iter().filter(|a| top.contains(a)).count();
        sum += hits as f64 / items.len() as f64;
        users += 1;
    }
    Ok(sum / users as f64)
}

/// Mean relative rank over all probe entries.
pub fn ranking_score(
    rankings: &[Ranking<'_>],
    probe: &BTreeMap<UserIdx, Vec<ItemIdx>>,
) -> Result<f64> {
    let by_user: BTreeMap<UserIdx, &Ranking<'_>> = rankings.iter().map(|r| (r.user(), r)).collect();
    let mut sum = 0.0;
    let mut entries = 0usize;
    for (user, items) in probe {
        let ranks = match by_user.get(user) {
            Some(r) => relative_ranks(r, items),
            None => vec![1.0; items.len()],
        };
        entries += ranks.len();
        sum += ranks.iter().sum::<f64>();
    }
    if entries == 0 {
        return Err(Error::UndefinedMetric("probe has no entries"));
    }
    Ok(sum / entries as f64)
}

/// `k_R(L)`: mean over users of the mean training degree of their top-L items.
pub fn avg_degree_top_l(lists: &[RecommendationList], snapshot: &Snapshot, list_len: usize) -> f64 {
    let per_user: Vec<f64> = lists
        .iter()
        .filter_map(|l| {
            let top = RecommendationList {
                user: l.user,
                items: l.items.iter().copied().take(list_len).collect(),
                scores: Vec::new(),
            };
            mean_degree(&top, snapshot)
        })
        .collect();
    if per_user.is_empty() {
        0.0
    } else {
        per_user.iter().sum::<f64>() / per_user.len() as f64
    }
}

/// One evaluated (method, parameters, probe) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: String,
    pub tau: Option<i64>,
    pub lambda: Option<f64>,
    pub theta: Option<f64>,
    pub list_len: usize,
    pub recall: f64,
    pub ranking_score: f64,
    pub k_r: f64,
    pub users: usize,
    pub probe: SplitDescriptor,
}

impl MetricsReport {
    pub const CSV_HEADER: [&'static str; 16] = [
        "method",
        "tau",
        "lambda",
        "theta",
        "list_len",
        "recall",
        "ranking_score",
        "k_r",
        "users",
        "probe_kind",
        "seed",
        "probe_time",
        "delta_p",
        "probe_events",
        "cold_fraction",
        "status",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        vec![
            self.method.clone(),
            opt(self.tau),
            opt(self.lambda),
            opt(self.theta),
            self.list_len.to_string(),
            self.recall.to_string(),
            self.ranking_score.to_string(),
            self.k_r.to_string(),
            self.users.to_string(),
            self.probe.kind.clone(),
            opt(self.probe.seed),
            opt(self.probe.probe_time),
            opt(self.probe.delta_p),
            self.probe.probe_events.to_string(),
            self.probe.cold_fraction.to_string(),
            serde_json::to_value(self.probe.status)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
        ]
    }
}

pub fn write_reports_csv<W: Write>(writer: W, reports: &[MetricsReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(MetricsReport::CSV_HEADER)?;
    for r in reports {
        w.write_record(r.csv_row())?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventlog::Event;

    fn snapshot(n_users: usize, n_items: usize, edges: &[(u32, u32)]) -> Snapshot {
        let events: Vec<Event> = edges
            .iter()
            .map(|&(user, item)| Event {
                user,
                item,
                timestamp: 0,
            })
            .collect();
        Snapshot::from_events(n_users, n_items, &events, 1)
    }

    #[test]
    fn half_recall_for_one_of_two_hits() {
        // 4 items, user 0 holds nothing, another user makes all items present
        let s = snapshot(2, 4, &[(1, 0), (1, 1), (1, 2), (1, 3)]);
        let scores = ScoreVector::from_dense(0, vec![4.0, 3.0, 2.0, 1.0]);
        let out = evaluate_user(&scores, &s, &[1, 3], 2);
        assert_eq!(out.hits, 1);
        assert!((out.recall() - 0.5).abs() < 1e-15);
        assert_eq!(out.relative_ranks, vec![0.5, 1.0]);
    }

    #[test]
    fn relative_rank_fifth_of_hundred() {
        let edges: Vec<(u32, u32)> = (0..100).map(|a| (1, a)).collect();
        let s = snapshot(2, 100, &edges);
        let scores = ScoreVector::from_dense(0, (0..100).map(|a| 100.0 - a as f64).collect());
        let out = evaluate_user(&scores, &s, &[4], 50);
        assert!((out.relative_ranks[0] - 0.05).abs() < 1e-15);
        let top = evaluate_user(&scores, &s, &[0], 50);
        assert!((top.relative_ranks[0] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn cold_item_is_a_worst_rank_miss() {
        let s = snapshot(2, 3, &[(1, 0), (1, 1)]);
        let scores = ScoreVector::zeros(0, 3);
        let out = evaluate_user(&scores, &s, &[2], 50);
        assert_eq!(out.hits, 0);
        assert_eq!(out.relative_ranks, vec![1.0]);

        let drop = EvalOptions {
            cold_items: ColdPolicy::Drop,
            ..EvalOptions::default()
        };
        assert_eq!(drop.filter_probe(&s, 0, &[2]), None);
        assert_eq!(drop.filter_probe(&s, 0, &[0, 2]), Some(vec![0]));
        let skip = EvalOptions {
            new_users: NewUserPolicy::Skip,
            ..EvalOptions::default()
        };
        assert_eq!(skip.filter_probe(&s, 0, &[0]), None);
        assert_eq!(skip.filter_probe(&s, 1, &[2]), Some(vec![2]));
    }

    #[test]
    fn avg_degree_of_top_items() {
        let mut edges = Vec::new();
        for u in 0..10 {
            edges.push((u, 0));
        }
        for u in 0..20 {
            edges.push((u, 1));
        }
        let s = snapshot(21, 2, &edges);
        let list = RecommendationList {
            user: 20,
            items: vec![0, 1],
            scores: vec![1.0, 0.5],
        };
        assert!((avg_degree_top_l(&[list], &s, 50) - 15.0).abs() < 1e-12);
    }

    #[test]
    fn summarize_rejects_empty_probe() {
        assert!(matches!(summarize(&[]), Err(Error::UndefinedMetric(_))));
        let probe = BTreeMap::new();
        assert!(recall_at_l(&[], &probe, 50).is_err());
        assert!(ranking_score(&[], &probe).is_err());
    }

    #[test]
    fn csv_row_matches_header() {
        let r = MetricsReport {
            method: "probs".into(),
            tau: None,
            lambda: None,
            theta: None,
            list_len: 50,
            recall: 0.1,
            ranking_score: 0.2,
            k_r: 3.0,
            users: 4,
            probe: SplitDescriptor {
                kind: "time".into(),
                seed: None,
                fraction: None,
                probe_time: Some(9),
                delta_p: Some(1),
                training_events: 10,
                probe_events: 2,
                cold_events: 0,
                cold_fraction: 0.0,
                status: crate::probes::SplitStatus::Ok,
            },
        };
        let row = r.csv_row();
        assert_eq!(row.len(), MetricsReport::CSV_HEADER.len());
        assert_eq!(row[15], "ok");
    }
}
