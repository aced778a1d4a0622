//! Diffusion-based and temporal recommendation scores.
//!
//! All diffusion scorers run two sparse propagation passes over the
//! training snapshot (items of the target user -> their users -> those
//! users' items) and never build an item-item or user-user matrix.
//!
//! | method  | first pass weight | user weight          | item weight       |
//! |---------|-------------------|----------------------|-------------------|
//! | ProbS   | `1/k_beta`        | `1/k_j`              | `1`               |
//! | HeatS   | `1`               | `1/k_j`              | `1/k_alpha`       |
//! | hybrid  | `k_beta^-l`       | `1/k_j`              | `k_alpha^(l-1)`   |
//! | SimS    | `1/k_beta`        | `s^theta / k_j^l`    | `k_alpha^(l-1)`   |
//!
//! HeatS and the ProbS-HeatS hybrid weight `W_ab = (k_a^(1-l) k_b^l)^-1
//! sum_j a_ja a_jb / k_j` are reconstructions of the standard heat-spreading
//! literature; SimS follows the similarity-preferential form exactly.
//!
//! The temporal methods multiply a diffusion score by `dk'_a / k_a` where
//! `dk'_a = dk_a(t, tau) + eps * k_a(t)` is the recent degree increase
//! regularized by popularity.

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventlog::{EventLog, ItemIdx, Snapshot, UserIdx};
use crate::time::Timestamp;

pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Per-user item scores over the snapshot's item index space.
///
/// Items with zero training degree always score 0 and are never ranked.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub user: UserIdx,
    scores: Vec<f64>,
}

impl ScoreVector {
    pub fn zeros(user: UserIdx, n_items: usize) -> Self {
        ScoreVector {
            user,
            scores: vec![0.0; n_items],
        }
    }

    pub fn from_dense(user: UserIdx, scores: Vec<f64>) -> Self {
        ScoreVector { user, scores }
    }

    pub fn get(&self, item: ItemIdx) -> f64 {
        self.scores.get(item as usize).copied().unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.scores.iter().sum()
    }

    /// Multiplies every score by `factor`.
    pub fn scale(&mut self, factor: f64) {
        for s in &mut self.scores {
            *s *= factor;
        }
    }
}

/// Parameters shared by the methods; unused fields are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodParams {
    pub tau: Timestamp,
    pub epsilon: f64,
    pub lambda: f64,
    pub theta: f64,
}

impl Default for MethodParams {
    fn default() -> Self {
        MethodParams {
            tau: 1,
            epsilon: DEFAULT_EPSILON,
            lambda: 1.0,
            theta: 1.0,
        }
    }
}

impl MethodParams {
    pub fn validate(&self, snapshot: &Snapshot) -> Result<()> {
        check_tau(self.tau)?;
        check_lambda(self.lambda)?;
        check_theta(self.theta)?;
        check_epsilon(self.epsilon, snapshot)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "lambda must lie in [0, 1], got {lambda}"
        )))
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "theta must be positive, got {theta}"
        )))
    }
}

fn check_tau(tau: Timestamp) -> Result<()> {
    if tau > 0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("tau must be positive, got {tau}")))
    }
}

fn check_epsilon(epsilon: f64, snapshot: &Snapshot) -> Result<()> {
    let kmax = snapshot.max_item_degree().max(1) as f64;
    if epsilon > 0.0 && epsilon * kmax < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "epsilon {epsilon} must be positive and below 1/max degree = {}",
            1.0 / kmax
        )))
    }
}

/// Reusable scratch space for the two-pass propagation.
#[derive(Debug, Default)]
pub struct Workspace {
    user_resource: Vec<f64>,
    touched: Vec<UserIdx>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Propagates from `user`'s items to their users and back.
    ///
    /// `first(k_beta)` weights the resource each item hands to each of its
    /// users, `middle(resource, k_j)` turns a user's collected resource into
    /// what every one of its items receives, and `last(k_alpha)` rescales
    /// the item totals.
    fn propagate(
        &mut self,
        snapshot: &Snapshot,
        user: UserIdx,
        first: impl Fn(usize) -> f64,
        middle: impl Fn(f64, usize) -> f64,
        last: impl Fn(usize) -> f64,
    ) -> ScoreVector {
        let mut out = ScoreVector::zeros(user, snapshot.n_items());
        let own = snapshot.user_items(user);
        if own.is_empty() {
            return out;
        }
        if self.user_resource.len() != snapshot.n_users() {
            self.user_resource.clear();
            self.user_resource.resize(snapshot.n_users(), 0.0);
        }
        self.touched.clear();

        for &beta in own {
            let users = snapshot.item_users(beta);
            let share = first(users.len());
            for &j in users {
                let slot = &mut self.user_resource[j as usize];
                if *slot == 0.0 {
                    self.touched.push(j);
                }
                *slot += share;
            }
        }
        self.touched.sort_unstable();

        for &j in &self.touched {
            let items = snapshot.user_items(j);
            let passed = middle(self.user_resource[j as usize], items.len());
            for &alpha in items {
                out.scores[alpha as usize] += passed;
            }
        }
        for &j in &self.touched {
            self.user_resource[j as usize] = 0.0;
        }
        for (alpha, s) in out.scores.iter_mut().enumerate() {
            if *s != 0.0 {
                *s *= last(snapshot.item_degree(alpha as ItemIdx));
            }
        }
        out
    }

    pub fn probs(&mut self, snapshot: &Snapshot, user: UserIdx) -> ScoreVector {
        self.propagate(
            snapshot,
            user,
            |k| 1.0 / k as f64,
            |r, k| r / k as f64,
            |_| 1.0,
        )
    }

    pub fn heats(&mut self, snapshot: &Snapshot, user: UserIdx) -> ScoreVector {
        self.propagate(
            snapshot,
            user,
            |_| 1.0,
            |r, k| r / k as f64,
            |k| 1.0 / k as f64,
        )
    }

    pub fn hybrid(
        &mut self,
        snapshot: &Snapshot,
        user: UserIdx,
        lambda: f64,
    ) -> Result<ScoreVector> {
        check_lambda(lambda)?;
        Ok(if lambda == 1.0 {
            self.probs(snapshot, user)
        } else if lambda == 0.0 {
            self.heats(snapshot, user)
        } else {
            self.propagate(
                snapshot,
                user,
                |k| (k as f64).powf(-lambda),
                |r, k| r / k as f64,
                |k| (k as f64).powf(lambda - 1.0),
            )
        })
    }

    pub fn sims(
        &mut self,
        snapshot: &Snapshot,
        user: UserIdx,
        theta: f64,
        lambda: f64,
    ) -> Result<ScoreVector> {
        check_theta(theta)?;
        check_lambda(lambda)?;
        let user_weight = move |k: usize| {
            if lambda == 1.0 {
                1.0 / k as f64
            } else {
                (k as f64).powf(-lambda)
            }
        };
        let item_weight = move |k: usize| {
            if lambda == 1.0 {
                1.0
            } else {
                (k as f64).powf(lambda - 1.0)
            }
        };
        Ok(self.propagate(
            snapshot,
            user,
            |k| 1.0 / k as f64,
            |s, k| {
                let s = if theta == 1.0 { s } else { s.powf(theta) };
                s * user_weight(k)
            },
            item_weight,
        ))
    }
}

/// ProbS: mass-conserving random walk item -> user -> item.
pub fn probs_scores(snapshot: &Snapshot, user: UserIdx) -> ScoreVector {
    Workspace::new().probs(snapshot, user)
}

/// HeatS: degree-averaging counterpart of ProbS; scores lie in `[0, 1]`.
pub fn heats_scores(snapshot: &Snapshot, user: UserIdx) -> ScoreVector {
    Workspace::new().heats(snapshot, user)
}

/// ProbS-HeatS hybrid; `lambda = 1` is ProbS, `lambda = 0` is HeatS.
pub fn hybrid_scores(snapshot: &Snapshot, user: UserIdx, lambda: f64) -> Result<ScoreVector> {
    Workspace::new().hybrid(snapshot, user, lambda)
}

/// Similarity-preferential diffusion.
///
/// `s_ij = sum_b a_ib a_jb / k_b` and
/// `h_a = sum_j a_ja s_ij^theta / (k_j^lambda k_a^(1-lambda))`.
pub fn sims_scores(
    snapshot: &Snapshot,
    user: UserIdx,
    theta: f64,
    lambda: f64,
) -> Result<ScoreVector> {
    Workspace::new().sims(snapshot, user, theta, lambda)
}

/// Recent degree increase `dk_a(t, tau)` and its popularity-regularized form,
/// read at the snapshot's cut time.
#[derive(Debug, Clone)]
pub struct DegreeIncrease {
    increase: Vec<usize>,
    degree: Vec<usize>,
    epsilon: f64,
    tau: Timestamp,
}

impl DegreeIncrease {
    pub fn compute(snapshot: &Snapshot, tau: Timestamp, epsilon: f64) -> Result<Self> {
        check_tau(tau)?;
        check_epsilon(epsilon, snapshot)?;
        let t = snapshot.cut_time();
        let n = snapshot.n_items();
        Ok(DegreeIncrease {
            increase: (0..n as ItemIdx)
                .map(|a| snapshot.degree_increase(a, t, tau))
                .collect(),
            degree: (0..n as ItemIdx).map(|a| snapshot.item_degree(a)).collect(),
            epsilon,
            tau,
        })
    }

    /// Same quantity computed from the full log at time `t`; matches
    /// [`DegreeIncrease::compute`] on `log.snapshot(t)`.
    pub fn from_log(log: &EventLog, t: Timestamp, tau: Timestamp, epsilon: f64) -> Result<Self> {
        check_tau(tau)?;
        let n = log.item_count();
        let degree: Vec<usize> = (0..n as ItemIdx)
            .map(|a| log.item_degree_at(a, t))
            .collect();
        let kmax = degree.iter().copied().max().unwrap_or(0).max(1) as f64;
        if !(epsilon > 0.0 && epsilon * kmax < 1.0) {
            return Err(Error::Config(format!(
                "epsilon {epsilon} must be positive and below 1/max degree = {}",
                1.0 / kmax
            )));
        }
        Ok(DegreeIncrease {
            increase: (0..n as ItemIdx)
                .map(|a| log.degree_increase(a, t, tau))
                .collect(),
            degree,
            epsilon,
            tau,
        })
    }

    pub fn tau(&self) -> Timestamp {
        self.tau
    }

    pub fn increase(&self, item: ItemIdx) -> usize {
        self.increase.get(item as usize).copied().unwrap_or(0)
    }

    pub fn degree(&self, item: ItemIdx) -> usize {
        self.degree.get(item as usize).copied().unwrap_or(0)
    }

    /// `dk'_a = dk_a + eps * k_a`.
    pub fn score(&self, item: ItemIdx) -> f64 {
        regularized_increase(self.increase(item), self.degree(item), self.epsilon)
    }

    /// `dk'_a / k_a`, or 0 for items without links.
    pub fn weight(&self, item: ItemIdx) -> f64 {
        match self.degree(item) {
            0 => 0.0,
            k => self.score(item) / k as f64,
        }
    }

    /// DI scores as seen by `user`; identical for every user.
    pub fn scores_for(&self, user: UserIdx) -> ScoreVector {
        ScoreVector::from_dense(
            user,
            (0..self.degree.len() as ItemIdx)
                .map(|a| self.score(a))
                .collect(),
        )
    }

    /// Multiplies `base` by `dk'_a / k_a` item by item.
    pub fn reweight(&self, mut base: ScoreVector) -> ScoreVector {
        for (a, s) in base.scores.iter_mut().enumerate() {
            if *s != 0.0 {
                *s *= self.weight(a as ItemIdx);
            }
        }
        base
    }
}

/// `dk + eps * k`; ordering by this value refines ordering by `dk` as long
/// as `eps * k < 1`.
pub fn regularized_increase(increase: usize, degree: usize, epsilon: f64) -> f64 {
    increase as f64 + epsilon * degree as f64
}

/// Non-personalized recent-degree-increase scores.
pub fn di_scores(
    snapshot: &Snapshot,
    user: UserIdx,
    tau: Timestamp,
    epsilon: f64,
) -> Result<ScoreVector> {
    Ok(DegreeIncrease::compute(snapshot, tau, epsilon)?.scores_for(user))
}

/// Multiplies `base` by `dk'_a(t, tau) / k_a(t)` with `t` the snapshot cut.
/// Over ProbS this is TProbS; over the hybrid it is THybrid.
pub fn temporal_reweight(
    base: ScoreVector,
    snapshot: &Snapshot,
    tau: Timestamp,
    epsilon: f64,
) -> Result<ScoreVector> {
    Ok(DegreeIncrease::compute(snapshot, tau, epsilon)?.reweight(base))
}

/// A recommendation method with its parameters bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    ProbS,
    HeatS,
    Hybrid {
        lambda: f64,
    },
    SimS {
        theta: f64,
        lambda: f64,
    },
    #[serde(rename = "di")]
    DegreeIncrease {
        tau: Timestamp,
    },
    TProbS {
        tau: Timestamp,
    },
    THybrid {
        tau: Timestamp,
        lambda: f64,
    },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::ProbS => "probs",
            Method::HeatS => "heats",
            Method::Hybrid { .. } => "hybrid",
            Method::SimS { .. } => "sims",
            Method::DegreeIncrease { .. } => "di",
            Method::TProbS { .. } => "tprobs",
            Method::THybrid { .. } => "thybrid",
        }
    }

    pub fn tau(&self) -> Option<Timestamp> {
        match *self {
            Method::DegreeIncrease { tau }
            | Method::TProbS { tau }
            | Method::THybrid { tau, .. } => Some(tau),
            _ => None,
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match *self {
            Method::Hybrid { lambda }
            | Method::SimS { lambda, .. }
            | Method::THybrid { lambda, .. } => Some(lambda),
            _ => None,
        }
    }

    pub fn theta(&self) -> Option<f64> {
        match *self {
            Method::SimS { theta, .. } => Some(theta),
            _ => None,
        }
    }

    pub fn is_temporal(&self) -> bool {
        self.tau().is_some()
    }

    /// Short label including parameters, e.g. `thybrid(tau=5,lambda=0.3)`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if let Some(t) = self.tau() {
            parts.push(format!("tau={t}"));
        }
        if let Some(l) = self.lambda() {
            parts.push(format!("lambda={l}"));
        }
        if let Some(t) = self.theta() {
            parts.push(format!("theta={t}"));
        }
        if parts.is_empty() {
            self.name().to_string()
        } else {
            format!("{}({})", self.name(), parts.join(","))
        }
    }

    pub fn validate(&self, snapshot: &Snapshot, epsilon: f64) -> Result<()> {
        if let Some(t) = self.tau() {
            check_tau(t)?;
            check_epsilon(epsilon, snapshot)?;
        }
        if let Some(l) = self.lambda() {
            check_lambda(l)?;
        }
        if let Some(t) = self.theta() {
            check_theta(t)?;
        }
        Ok(())
    }

    /// Scores for one user on `snapshot`.
    pub fn scores(&self, snapshot: &Snapshot, user: UserIdx, epsilon: f64) -> Result<ScoreVector> {
        let mut ws = Workspace::new();
        match *self {
            Method::ProbS => Ok(ws.probs(snapshot, user)),
            Method::HeatS => Ok(ws.heats(snapshot, user)),
            Method::Hybrid { lambda } => ws.hybrid(snapshot, user, lambda),
            Method::SimS { theta, lambda } => ws.sims(snapshot, user, theta, lambda),
            Method::DegreeIncrease { tau } => di_scores(snapshot, user, tau, epsilon),
            Method::TProbS { tau } => {
                temporal_reweight(ws.probs(snapshot, user), snapshot, tau, epsilon)
            }
            Method::THybrid { tau, lambda } => {
                temporal_reweight(ws.hybrid(snapshot, user, lambda)?, snapshot, tau, epsilon)
            }
        }
    }
}

/// Descending score, then ascending item index.
#[inline]
fn rank_order(a: (f64, ItemIdx), b: (f64, ItemIdx)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// Full ranking of a user's uncollected snapshot items.
#[derive(Debug, Clone)]
pub struct Ranking<'a> {
    scores: &'a ScoreVector,
    snapshot: &'a Snapshot,
}

impl<'a> Ranking<'a> {
    pub fn new(scores: &'a ScoreVector, snapshot: &'a Snapshot) -> Self {
        Ranking { scores, snapshot }
    }

    pub fn user(&self) -> UserIdx {
        self.scores.user
    }

    fn is_candidate(&self, item: ItemIdx) -> bool {
        self.snapshot.item_degree(item) > 0 && !self.snapshot.has_edge(self.scores.user, item)
    }

    fn candidates(&self) -> Vec<(f64, ItemIdx)> {
        (0..self.snapshot.n_items() as ItemIdx)
            .filter(|&a| self.is_candidate(a))
            .map(|a| (self.scores.get(a), a))
            .collect()
    }

    /// Number of rankable items, `I - k_i` with `I` the snapshot item count.
    pub fn len(&self) -> usize {
        self.snapshot.active_items() - self.snapshot.user_degree(self.scores.user)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every candidate in ranked order.
    pub fn full(&self) -> Vec<ItemIdx> {
        let mut c = self.candidates();
        c.sort_unstable_by(|&a, &b| rank_order(a, b));
        c.into_iter().map(|(_, a)| a).collect()
    }

    /// Top `limit` candidates with their scores.
    pub fn top(&self, limit: usize) -> RecommendationList {
        let mut c = self.candidates();
        if limit < c.len() {
            c.select_nth_unstable_by(limit, |&a, &b| rank_order(a, b));
            c.truncate(limit);
        }
        c.sort_unstable_by(|&a, &b| rank_order(a, b));
        RecommendationList {
            user: self.scores.user,
            items: c.iter().map(|&(_, a)| a).collect(),
            scores: c.iter().map(|&(s, _)| s).collect(),
        }
    }

    /// 1-based rank of `item`, or `None` when it is collected or not in
    /// the snapshot.
    pub fn position(&self, item: ItemIdx) -> Option<usize> {
        if !self.is_candidate(item) {
            return None;
        }
        let key = (self.scores.get(item), item);
        let ahead = (0..self.snapshot.n_items() as ItemIdx)
            .filter(|&a| a != item && self.is_candidate(a))
            .filter(|&a| rank_order((self.scores.get(a), a), key) == Ordering::Less)
            .count();
        Some(ahead + 1)
    }

    /// Ranks of several items; sorts once when there are many.
    pub fn positions(&self, items: &[ItemIdx]) -> Vec<Option<usize>> {
        if items.len() <= 8 {
            return items.iter().map(|&a| self.position(a)).collect();
        }
        let mut rank = vec![0usize; self.snapshot.n_items()];
        for (pos, a) in self.full().into_iter().enumerate() {
            rank[a as usize] = pos + 1;
        }
        items
            .iter()
            .map(|&a| rank.get(a as usize).copied().filter(|&r| r > 0))
            .collect()
    }
}

/// Top-L items for one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationList {
    pub user: UserIdx,
    pub items: Vec<ItemIdx>,
    pub scores: Vec<f64>,
}

impl RecommendationList {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Top-`limit` uncollected items by (score desc, item id asc).
pub fn rank_items(
    scores: &ScoreVector,
    snapshot: &Snapshot,
    limit: usize,
) -> Result<RecommendationList> {
    if limit == 0 {
        return Err(Error::invalid("list length must be at least 1"));
    }
    Ok(Ranking::new(scores, snapshot).top(limit))
}

/// Writes lists as `user_id, rank, item_id, score` rows.
pub fn write_recommendations<W: Write>(
    writer: W,
    log: &EventLog,
    lists: &[RecommendationList],
    delimiter: u8,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(writer);
    w.write_record(["user_id", "rank", "item_id", "score"])?;
    for list in lists {
        for (pos, (&item, &score)) in list.items.iter().zip(&list.scores).enumerate() {
            w.write_record([
                log.user_id(list.user),
                &(pos + 1).to_string(),
                log.item_id(item),
                &format!("{score:e}"),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(())
}
