//! Cluster detection over the mutual friend graph.
//!
//! Nodes are agents in Decision or Action. An edge joins two such agents when
//! each holds the other as an acquaintance with proximity at or above the
//! threshold; its weight is the smaller of the two entries. Clusters are the
//! connected components (not cliques) with at least the minimum size.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::agent::{AgentId, AtnState, FactualAgent};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub tick: u64,
    /// Sorted ascending.
    pub members: Vec<AgentId>,
    /// Smallest edge weight inside the cluster.
    pub min_proximity: f64,
    /// Lowest member state.
    pub dominant_state: AtnState,
}

/// Weight of the mutual friend edge between two agents, if any.
pub fn mutual_edge(a: &FactualAgent, b: &FactualAgent, threshold: f64) -> Option<f64> {
    if !(a.state().is_advanced() && b.state().is_advanced()) {
        return None;
    }
    let ab = *a.acquaintances().get(b.id())?;
    let ba = *b.acquaintances().get(a.id())?;
    (ab >= threshold && ba >= threshold).then_some(ab.min(ba))
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index becomes the root
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

pub fn detect_clusters(
    agents: &BTreeMap<AgentId, FactualAgent>,
    threshold: f64,
    min_size: usize,
    tick: u64,
) -> Vec<ClusterReport> {
    let nodes: Vec<&FactualAgent> = agents.values().filter(|a| a.state().is_advanced()).collect();
    let index: BTreeMap<&AgentId, usize> = nodes.iter().enumerate().map(|(i, a)| (a.id(), i)).collect();
    let mut sets = DisjointSet::new(nodes.len());
    let mut edges = Vec::new();
    for (i, a) in nodes.iter().enumerate() {
        for (other, _) in a.friends() {
            let Some(&j) = index.get(other) else { continue };
            if j <= i {
                continue;
            }
            if let Some(w) = mutual_edge(a, nodes[j], threshold) {
                sets.union(i, j);
                edges.push((i, w));
            }
        }
    }

    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..nodes.len() {
        let root = sets.find(i);
        components.entry(root).or_default().push(i);
    }
    let mut min_weight: BTreeMap<usize, f64> = BTreeMap::new();
    for (i, w) in edges {
        let root = sets.find(i);
        let slot = min_weight.entry(root).or_insert(w);
        *slot = slot.min(w);
    }

    // roots are the smallest index, so BTreeMap order is smallest-member order
    components
        .into_iter()
        .filter(|(_, members)| members.len() >= min_size)
        .map(|(root, members)| ClusterReport {
            tick,
            dominant_state: members.iter().map(|&i| nodes[i].state()).min().expect("non-empty"),
            members: members.iter().map(|&i| nodes[i].id().clone()).collect(),
            min_proximity: min_weight[&root],
        })
        .collect()
}
