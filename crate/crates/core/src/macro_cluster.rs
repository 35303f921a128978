//! Grouping micro-clusters into macro-clusters of bounded edit-distance diameter.
//!
//! The nodes at one trie level are micro-clusters: each is a unique partial
//! route at a unique pace. Two micro-clusters whose routes differ by a shifted
//! step or one detour are far apart in the trie but close under Levenshtein
//! distance. A macro-cluster of diameter `q` holds micro-clusters whose routes
//! pairwise differ by at most `q` edits.
//!
//! Minimizing the number of clusters under a diameter bound is NP-hard; both
//! methods here guarantee the bound but not minimality.

use crate::error::{Error, Result};
use crate::grid::Symbol;
use crate::metrics::{levenshtein, strip_padding};
use crate::trie::{NodeId, Trie};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicroCluster {
    pub node: NodeId,
    /// Route of the node with trailing padding removed.
    pub representative: Vec<Symbol>,
    pub weight: u32,
}

pub fn micro_clusters(trie: &Trie, level: usize) -> Result<Vec<MicroCluster>> {
    if level == 0 || level > trie.len() {
        return Err(Error::Parameter(format!(
            "micro-cluster level must be in 1..={}, got {level}",
            trie.len()
        )));
    }
    trie.nodes_at_depth(level)
        .iter()
        .map(|&node| {
            let mut representative = trie.prefix(node)?;
            representative.truncate(strip_padding(&representative).len());
            Ok(MicroCluster {
                node,
                representative,
                weight: trie.node(node)?.trip_count(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MacroMethod {
    /// Agglomerative complete linkage, stopped before any merge would exceed
    /// the diameter. Quadratic memory in the number of micro-clusters.
    #[default]
    CompleteLinkage,
    /// Farthest-point seeding with greedy admission; no distance matrix.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroClustering {
    /// Macro label (`1..=k`) per micro-cluster, in input order.
    pub labels: Vec<u32>,
    pub q: usize,
    /// Achieved diameter per macro label, at index `label - 1`.
    pub diameters: Vec<usize>,
}

impl MacroClustering {
    pub fn num_clusters(&self) -> usize {
        self.diameters.len()
    }
}

pub fn macro_cluster(micros: &[MicroCluster], q: usize, method: MacroMethod) -> MacroClustering {
    let groups = match method {
        MacroMethod::CompleteLinkage => complete_linkage(micros, q),
        MacroMethod::Greedy => greedy(micros, q),
    };
    let mut labels = vec![0u32; micros.len()];
    // label clusters in order of their first member
    let mut ordered: Vec<Vec<usize>> = groups
        .into_iter()
        .map(|mut g| {
            g.sort_unstable();
            g
        })
        .collect();
    ordered.sort_by_key(|g| g[0]);
    for (label, group) in ordered.iter().enumerate() {
        for &m in group {
            labels[m] = label as u32 + 1;
        }
    }
    let diameters = cluster_diameters(micros, &labels);
    MacroClustering {
        labels,
        q,
        diameters,
    }
}

/// Exhaustive maximum pairwise distance within each labeled group.
pub fn cluster_diameters(micros: &[MicroCluster], labels: &[u32]) -> Vec<usize> {
    let k = labels.iter().copied().max().unwrap_or(0) as usize;
    let mut members = vec![Vec::new(); k];
    for (i, &label) in labels.iter().enumerate() {
        members[label as usize - 1].push(i);
    }
    members
        .iter()
        .map(|group| {
            let mut diameter = 0;
            for (a, &i) in group.iter().enumerate() {
                for &j in &group[a + 1..] {
                    let d = levenshtein(&micros[i].representative, &micros[j].representative);
                    diameter = diameter.max(d);
                }
            }
            diameter
        })
        .collect()
}

fn complete_linkage(micros: &[MicroCluster], q: usize) -> Vec<Vec<usize>> {
    let m = micros.len();
    let mut dist = vec![0usize; m * m];
    for i in 0..m {
        for j in i + 1..m {
            let d = levenshtein(&micros[i].representative, &micros[j].representative);
            dist[i * m + j] = d;
            dist[j * m + i] = d;
        }
    }
    let mut members: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
    let mut active = vec![true; m];

    let nearest = |dist: &[usize], active: &[bool], i: usize| -> Option<(usize, usize)> {
        (0..m)
            .filter(|&j| j != i && active[j])
            .map(|j| (dist[i * m + j], j))
            .min()
    };
    let mut nn: Vec<Option<(usize, usize)>> = (0..m).map(|i| nearest(&dist, &active, i)).collect();

    loop {
        let best = (0..m)
            .filter(|&i| active[i])
            .filter_map(|i| nn[i].map(|(d, j)| (d, i.min(j), i.max(j))))
            .min();
        let Some((d, keep, gone)) = best else { break };
        if d > q {
            break;
        }
        // complete linkage: the merged cluster's distance is the larger one
        for k in 0..m {
            if active[k] && k != keep && k != gone {
                let merged = dist[keep * m + k].max(dist[gone * m + k]);
                dist[keep * m + k] = merged;
                dist[k * m + keep] = merged;
            }
        }
        active[gone] = false;
        let moved = std::mem::take(&mut members[gone]);
        members[keep].extend(moved);
        nn[gone] = None;
        for k in 0..m {
            if !active[k] {
                continue;
            }
            let stale = match nn[k] {
                Some((_, j)) => k == keep || j == keep || j == gone,
                None => false,
            };
            if stale {
                nn[k] = nearest(&dist, &active, k);
            }
        }
    }
    members.into_iter().filter(|g| !g.is_empty()).collect()
}

fn greedy(micros: &[MicroCluster], q: usize) -> Vec<Vec<usize>> {
    let m = micros.len();
    let d = |i: usize, j: usize| levenshtein(&micros[i].representative, &micros[j].representative);
    let mut assigned = vec![false; m];
    // distance from each micro-cluster to its closest seed so far
    let mut to_seed = vec![usize::MAX; m];
    let mut groups = Vec::new();
    let mut remaining = m;
    while remaining > 0 {
        let seed = (0..m)
            .filter(|&i| !assigned[i])
            .max_by_key(|&i| (to_seed[i], micros[i].weight, std::cmp::Reverse(i)))
            .expect("unassigned micro-cluster");
        let mut candidates: Vec<(usize, usize)> = (0..m)
            .filter(|&i| !assigned[i] && i != seed)
            .map(|i| (d(seed, i), i))
            .filter(|&(dist, _)| dist <= q)
            .collect();
        candidates.sort_unstable();
        let mut group = vec![seed];
        for (_, c) in candidates {
            if group.iter().all(|&g| d(g, c) <= q) {
                group.push(c);
            }
        }
        for &g in &group {
            assigned[g] = true;
        }
        remaining -= group.len();
        for i in 0..m {
            if !assigned[i] {
                to_seed[i] = to_seed[i].min(d(seed, i));
            }
        }
        groups.push(group);
    }
    groups
}
