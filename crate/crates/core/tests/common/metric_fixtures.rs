//! Hand-computed metric fixtures, shared by the metric tests and the
//! acceptance run.

use std::collections::BTreeMap;

use netrec::eventlog::{Event, ItemIdx, UserIdx};
use netrec::metrics::{avg_degree_top_l, evaluate_user, ranking_score, recall_at_l, summarize};
use netrec::recommenders::{probs_scores, Ranking};
use netrec::{rank_items, ScoreVector, Snapshot};

use super::four_edge;

/// One checked quantity: name, computed value, hand value.
pub type Check = (String, f64, f64);

fn snapshot(users: usize, items: usize, edges: &[(UserIdx, ItemIdx)]) -> Snapshot {
    let events: Vec<Event> = edges
        .iter()
        .map(|&(user, item)| Event {
            user,
            item,
            timestamp: 0,
        })
        .collect();
    Snapshot::from_events(users, items, &events, 1)
}

/// 4-edge graph, ProbS. u1 can only be offered c, u2 only a.
fn four_edge_graph() -> Vec<Check> {
    let snap = four_edge().snapshot();
    let scores: Vec<ScoreVector> = (0..2).map(|u| probs_scores(&snap, u)).collect();
    let lists: Vec<_> = scores
        .iter()
        .map(|s| rank_items(s, &snap, 50).unwrap())
        .collect();
    let rankings: Vec<_> = scores.iter().map(|s| Ranking::new(s, &snap)).collect();
    let probe = BTreeMap::from([(0, vec![2]), (1, vec![0])]);
    vec![
        (
            "four-edge recall@50".into(),
            recall_at_l(&lists, &probe, 50).unwrap(),
            1.0,
        ),
        // single candidate each: rank 1 of I - k_i = 3 - 2 = 1
        (
            "four-edge ranking score".into(),
            ranking_score(&rankings, &probe).unwrap(),
            1.0,
        ),
        // c and a both have degree 1
        (
            "four-edge k_R(50)".into(),
            avg_degree_top_l(&lists, &snap, 50),
            1.0,
        ),
        (
            "four-edge u1 list length".into(),
            lists[0].len() as f64,
            1.0,
        ),
    ]
}

/// A user with two probe items, one inside the top-L list.
fn half_recall() -> Vec<Check> {
    // user 0 holds item 0; items 1..=4 exist through user 1
    let snap = snapshot(2, 5, &[(0, 0), (1, 0), (1, 1), (1, 2), (1, 3), (1, 4)]);
    let scores = ScoreVector::from_dense(0, vec![0.0, 0.9, 0.8, 0.7, 0.6]);
    let out = evaluate_user(&scores, &snap, &[1, 4], 2);
    vec![
        ("one of two probe items in top-2".into(), out.recall(), 0.5),
        // ranks 1 and 4 among 4 candidates
        (
            "its relative ranks".into(),
            out.relative_ranks.iter().sum::<f64>() / 2.0,
            (0.25 + 1.0) / 2.0,
        ),
    ]
}

/// Probe item in 5th place among 100 candidates.
fn fifth_of_hundred() -> Vec<Check> {
    let mut edges = vec![(0, 0)];
    edges.extend((0..101).map(|a| (1, a)));
    let snap = snapshot(2, 101, &edges);
    let dense: Vec<f64> = (0..101).map(|a| 1000.0 - a as f64).collect();
    let scores = ScoreVector::from_dense(0, dense);
    let out = evaluate_user(&scores, &snap, &[5], 50);
    let top = evaluate_user(&scores, &snap, &[1], 50);
    vec![
        ("5th of 100 uncollected".into(), out.relative_ranks[0], 0.05),
        ("top of 100 uncollected".into(), top.relative_ranks[0], 0.01),
    ]
}

/// Cold probe item: a miss with the worst relative rank.
fn cold_item() -> Vec<Check> {
    let snap = snapshot(2, 4, &[(0, 0), (1, 1), (1, 2)]);
    let scores = probs_scores(&snap, 0);
    let out = evaluate_user(&scores, &snap, &[3], 50);
    vec![
        ("cold item recall".into(), out.recall(), 0.0),
        ("cold item relative rank".into(), out.relative_ranks[0], 1.0),
    ]
}

/// Two items of degree 10 and 20 recommended.
fn degree_average() -> Vec<Check> {
    let mut edges = vec![(0, 2)];
    edges.extend((1..=10).map(|u| (u, 0)));
    edges.extend((1..=20).map(|u| (u, 1)));
    let snap = snapshot(21, 3, &edges);
    let scores = ScoreVector::from_dense(0, vec![0.5, 0.7, 0.0]);
    let list = rank_items(&scores, &snap, 2).unwrap();
    vec![(
        "k_R of degrees 10 and 20".into(),
        avg_degree_top_l(&[list], &snap, 2),
        15.0,
    )]
}

/// Recall averages over users, ranking score over probe entries.
fn aggregation_weights() -> Vec<Check> {
    // four candidates for both users; user 0 has one hit, user 1 three misses
    let snap = snapshot(
        3,
        5,
        &[(0, 0), (1, 0), (2, 0), (2, 1), (2, 2), (2, 3), (2, 4)],
    );
    let scores = ScoreVector::from_dense(0, vec![0.0, 0.4, 0.3, 0.2, 0.1]);
    let first = evaluate_user(&scores, &snap, &[1], 1);
    let scores = ScoreVector::from_dense(1, vec![0.0, 0.4, 0.3, 0.2, 0.1]);
    let second = evaluate_user(&scores, &snap, &[2, 3, 4], 1);
    let summary = summarize(&[first, second]).unwrap();
    vec![
        ("user-averaged recall".into(), summary.recall, 0.5),
        // entries: 1/4, 2/4, 3/4, 4/4
        (
            "entry-averaged ranking score".into(),
            summary.ranking_score,
            2.5 / 4.0,
        ),
        ("mean top-1 degree".into(), summary.avg_degree, 1.0),
    ]
}

pub fn all() -> Vec<(&'static str, Vec<Check>)> {
    vec![
        ("four-edge graph", four_edge_graph()),
        ("half recall", half_recall()),
        ("fifth of a hundred", fifth_of_hundred()),
        ("cold item", cold_item()),
        ("degree average", degree_average()),
        ("aggregation weights", aggregation_weights()),
    ]
}
