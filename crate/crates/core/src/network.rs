//! Time-varying communication graphs.
//!
//! A [`GraphSchedule`] is a periodic sequence of edge sets over a fixed node
//! set. Any single slot may be disconnected — even empty of a given node —
//! as long as the union over a window of `B` consecutive slots is connected.
//! Edge weights follow the Metropolis rule, which keeps per-node weight sums
//! within the unit simplex using only local degree information.

use crate::linalg::DenseMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightRule {
    Metropolis,
}

/// One active edge with its symmetric weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub i: usize,
    pub j: usize,
    pub h: f64,
}

/// All active edges of one schedule slot, weights included.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEdges {
    pub edges: Vec<WeightedEdge>,
}

impl WeightedEdges {
    pub fn iter(&self) -> impl Iterator<Item = &WeightedEdge> {
        self.edges.iter()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Periodic schedule of edge sets on nodes `0..n`.
///
/// Slots hold normalized edges (`i < j`) in ascending order. Construction
/// validates indices and self-loops only; window connectivity is a property
/// of how the schedule is used and is checked by [`GraphSchedule::verify_b_connectivity`].
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSchedule {
    n: usize,
    edge_sets: Vec<Vec<(usize, usize)>>,
    weight_rule: WeightRule,
}

impl GraphSchedule {
    pub fn new(
        n: usize,
        edge_sets: Vec<Vec<(usize, usize)>>,
        weight_rule: WeightRule,
    ) -> Result<Self, NetworkError> {
        if n < 2 {
            return Err(NetworkError::InvalidParams(format!("need n ≥ 2, got {n}")));
        }
        if edge_sets.is_empty() {
            return Err(NetworkError::InvalidParams("schedule has no slots".into()));
        }
        let mut normalized = Vec::with_capacity(edge_sets.len());
        for (t, slot) in edge_sets.into_iter().enumerate() {
            let mut seen = BTreeSet::new();
            for &(a, b) in &slot {
                if a == b {
                    return Err(NetworkError::InvalidParams(format!(
                        "slot {t} has self-loop at node {a}"
                    )));
                }
                if a >= n || b >= n {
                    return Err(NetworkError::InvalidParams(format!(
                        "slot {t} references node out of range: ({a}, {b})"
                    )));
                }
                seen.insert((a.min(b), a.max(b)));
            }
            normalized.push(seen.into_iter().collect());
        }
        Ok(GraphSchedule {
            n,
            edge_sets: normalized,
            weight_rule,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> usize {
        self.edge_sets.len()
    }

    pub fn weight_rule(&self) -> WeightRule {
        self.weight_rule
    }

    pub fn edge_sets(&self) -> &[Vec<(usize, usize)>] {
        &self.edge_sets
    }

    /// Active weighted edges at iteration `k` (slot `k mod period`).
    pub fn edges_at(&self, k: usize) -> WeightedEdges {
        let slot = &self.edge_sets[k % self.period()];
        let mut degree = vec![0usize; self.n];
        for &(i, j) in slot {
            degree[i] += 1;
            degree[j] += 1;
        }
        let edges = slot
            .iter()
            .map(|&(i, j)| WeightedEdge {
                i,
                j,
                h: match self.weight_rule {
                    WeightRule::Metropolis => 1.0 / degree[i].max(degree[j]) as f64,
                },
            })
            .collect::<Vec<_>>();
        if cfg!(debug_assertions) {
            let mut sums = vec![0.0; self.n];
            for e in &edges {
                sums[e.i] += e.h;
                sums[e.j] += e.h;
            }
            debug_assert!(sums.iter().all(|&s| s <= 1.0 + 1e-12));
        }
        WeightedEdges { edges }
    }

    /// Unweighted Laplacian of the union graph over slots `k..k+b`.
    pub fn union_laplacian(&self, k: usize, b: usize) -> DenseMatrix {
        let mut union = BTreeSet::new();
        for t in k..k + b {
            union.extend(self.edge_sets[t % self.period()].iter().copied());
        }
        let mut l = DenseMatrix::zeros(self.n, self.n);
        for (i, j) in union {
            l.add_assign_at(i, i, 1.0);
            l.add_assign_at(j, j, 1.0);
            l.add_assign_at(i, j, -1.0);
            l.add_assign_at(j, i, -1.0);
        }
        l
    }

    /// True when every window of `b` consecutive slots yields a connected
    /// union graph. Periodicity means only `period` window offsets matter.
    pub fn verify_b_connectivity(&self, b: usize) -> bool {
        if b == 0 {
            return false;
        }
        (0..self.period()).all(|offset| {
            let mut uf = UnionFind::new(self.n);
            for t in offset..offset + b {
                for &(i, j) in &self.edge_sets[t % self.period()] {
                    uf.union(i, j);
                }
            }
            uf.component_count() == 1
        })
    }

    pub fn to_document(&self) -> ScheduleDocument {
        ScheduleDocument {
            n: self.n,
            weight_rule: self.weight_rule,
            slots: self.edge_sets.clone(),
        }
    }

    pub fn from_document(doc: &ScheduleDocument) -> Result<GraphSchedule, NetworkError> {
        GraphSchedule::new(doc.n, doc.slots.clone(), doc.weight_rule)
    }
}

/// Replayable on-disk form of a schedule; edges are pairs of zero-based indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleDocument {
    pub n: usize,
    pub weight_rule: WeightRule,
    pub slots: Vec<Vec<(usize, usize)>>,
}

/// Builds a connected random base graph (uniform random spanning tree
/// attachment plus independent extra edges), then deals its edges round-robin
/// into `b` cyclic slots in random order. Every slot is nonempty.
pub fn generate_periodic_schedule(
    seed: u64,
    n: usize,
    b: usize,
    extra_edge_prob: f64,
) -> Result<GraphSchedule, NetworkError> {
    if n < 2 {
        return Err(NetworkError::InvalidParams(format!("need n ≥ 2, got {n}")));
    }
    if b == 0 {
        return Err(NetworkError::InvalidParams("period must be positive".into()));
    }
    if !(0.0..=1.0).contains(&extra_edge_prob) {
        return Err(NetworkError::InvalidParams(format!(
            "extra_edge_prob {extra_edge_prob} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut edges = BTreeSet::new();
    for idx in 1..n {
        let parent = order[rng.gen_range(0..idx)];
        let (a, c) = (order[idx].min(parent), order[idx].max(parent));
        edges.insert((a, c));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !edges.contains(&(i, j)) && rng.gen::<f64>() < extra_edge_prob {
                edges.insert((i, j));
            }
        }
    }

    let mut dealt: Vec<(usize, usize)> = edges.into_iter().collect();
    if b > dealt.len() {
        return Err(NetworkError::InvalidParams(format!(
            "period {b} exceeds base-graph edge count {}",
            dealt.len()
        )));
    }
    dealt.shuffle(&mut rng);
    let mut slots = vec![Vec::new(); b];
    for (t, e) in dealt.into_iter().enumerate() {
        slots[t % b].push(e);
    }
    GraphSchedule::new(n, slots, WeightRule::Metropolis)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    fn component_count(&mut self) -> usize {
        let n = self.parent.len();
        (0..n).filter(|&x| self.find(x) == x).count()
    }
}
