//! Shared fixtures: random bipartite graphs and dense reference scorers.
//!
//! The dense scorers build the full item-item transfer matrix from the
//! adjacency matrix and never touch the crate's sparse propagation code.

#![allow(dead_code, clippy::needless_range_loop)]

pub mod metric_fixtures;

use netrec::eventlog::{Event, ItemIdx, UserIdx};
use netrec::Snapshot;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense 0/1 adjacency, users by items.
#[derive(Debug, Clone)]
pub struct Dense {
    pub adj: Vec<Vec<f64>>,
}

impl Dense {
    pub fn users(&self) -> usize {
        self.adj.len()
    }

    pub fn items(&self) -> usize {
        self.adj.first().map_or(0, Vec::len)
    }

    pub fn user_degree(&self, j: usize) -> f64 {
        self.adj[j].iter().sum()
    }

    pub fn item_degree(&self, a: usize) -> f64 {
        self.adj.iter().map(|row| row[a]).sum()
    }

    pub fn from_edges(users: usize, items: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![vec![0.0; items]; users];
        for &(u, a) in edges {
            adj[u][a] = 1.0;
        }
        Dense { adj }
    }

    pub fn snapshot(&self) -> Snapshot {
        let events = self.events();
        Snapshot::from_events(self.users(), self.items(), &events, 1)
    }

    pub fn events(&self) -> Vec<Event> {
        let mut events = Vec::new();
        for (u, row) in self.adj.iter().enumerate() {
            for (a, &x) in row.iter().enumerate() {
                if x > 0.0 {
                    events.push(Event {
                        user: u as UserIdx,
                        item: a as ItemIdx,
                        timestamp: 0,
                    });
                }
            }
        }
        events
    }

    /// `W[a][b] = (k_a^(1-lambda) k_b^lambda)^-1 sum_j a_ja a_jb / k_j`.
    pub fn hybrid_matrix(&self, lambda: f64) -> Vec<Vec<f64>> {
        let n = self.items();
        let mut w = vec![vec![0.0; n]; n];
        for a in 0..n {
            let ka = self.item_degree(a);
            for b in 0..n {
                let kb = self.item_degree(b);
                if ka == 0.0 || kb == 0.0 {
                    continue;
                }
                let mut sum = 0.0;
                for j in 0..self.users() {
                    let kj = self.user_degree(j);
                    if kj > 0.0 {
                        sum += self.adj[j][a] * self.adj[j][b] / kj;
                    }
                }
                w[a][b] = sum / (ka.powf(1.0 - lambda) * kb.powf(lambda));
            }
        }
        w
    }

    fn apply(&self, w: &[Vec<f64>], user: usize) -> Vec<f64> {
        w.iter()
            .map(|row| row.iter().zip(&self.adj[user]).map(|(x, y)| x * y).sum())
            .collect()
    }

    /// ProbS: `W[a][b] = (1/k_b) sum_j a_ja a_jb / k_j`.
    pub fn probs(&self, user: usize) -> Vec<f64> {
        let n = self.items();
        let mut w = vec![vec![0.0; n]; n];
        for (a, row) in w.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                let kb = self.item_degree(b);
                if kb == 0.0 {
                    continue;
                }
                for j in 0..self.users() {
                    let kj = self.user_degree(j);
                    if kj > 0.0 {
                        *cell += self.adj[j][a] * self.adj[j][b] / (kj * kb);
                    }
                }
            }
        }
        self.apply(&w, user)
    }

    /// HeatS: `h_a = (1/k_a) sum_j a_ja (1/k_j) sum_b a_jb a_ib`.
    pub fn heats(&self, user: usize) -> Vec<f64> {
        (0..self.items())
            .map(|a| {
                let ka = self.item_degree(a);
                if ka == 0.0 {
                    return 0.0;
                }
                let mut total = 0.0;
                for j in 0..self.users() {
                    let kj = self.user_degree(j);
                    if self.adj[j][a] == 0.0 || kj == 0.0 {
                        continue;
                    }
                    let overlap: f64 = (0..self.items())
                        .map(|b| self.adj[j][b] * self.adj[user][b])
                        .sum();
                    total += overlap / kj;
                }
                total / ka
            })
            .collect()
    }

    pub fn hybrid(&self, user: usize, lambda: f64) -> Vec<f64> {
        self.apply(&self.hybrid_matrix(lambda), user)
    }

    /// `s_ij = sum_b a_ib a_jb / k_b`, then
    /// `h_a = sum_j a_ja s_ij^theta / (k_j^lambda k_a^(1-lambda))`.
    pub fn sims(&self, user: usize, theta: f64, lambda: f64) -> Vec<f64> {
        let sim: Vec<f64> = (0..self.users())
            .map(|j| {
                (0..self.items())
                    .map(|b| {
                        let kb = self.item_degree(b);
                        if kb == 0.0 {
                            0.0
                        } else {
                            self.adj[user][b] * self.adj[j][b] / kb
                        }
                    })
                    .sum()
            })
            .collect();
        (0..self.items())
            .map(|a| {
                let ka = self.item_degree(a);
                if ka == 0.0 {
                    return 0.0;
                }
                let mut total = 0.0;
                for j in 0..self.users() {
                    let kj = self.user_degree(j);
                    if self.adj[j][a] == 0.0 || sim[j] == 0.0 {
                        continue;
                    }
                    total += sim[j].powf(theta) / (kj.powf(lambda) * ka.powf(1.0 - lambda));
                }
                total
            })
            .collect()
    }
}

/// Random graph with at most 20 users, 30 items and density in [0.1, 0.5].
pub fn random_graph(rng: &mut impl Rng) -> Dense {
    let users = rng.gen_range(1..=20);
    let items = rng.gen_range(1..=30);
    let density = rng.gen_range(0.1..=0.5);
    let adj = (0..users)
        .map(|_| {
            (0..items)
                .map(|_| if rng.gen_bool(density) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    Dense { adj }
}

/// The fixed corpus used by the oracle checks.
pub fn corpus(size: usize, seed: u64) -> Vec<Dense> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size).map(|_| random_graph(&mut rng)).collect()
}

/// u1-a, u1-b, u2-b, u2-c
pub fn four_edge() -> Dense {
    Dense::from_edges(2, 3, &[(0, 0), (0, 1), (1, 1), (1, 2)])
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}
