//! The trip trie.
//!
//! Every trip string of the corpus has the same (padded) length `l`. Depth `k`
//! of the trie holds one node per distinct length-`k` prefix, so each level is
//! a partition of the trips and the levels, read bottom-up, form a
//! single-linkage dendrogram under the weighted Hamming distance: dendrogram
//! level `i` corresponds to trie depth `l - i`.
//!
//! Node ids are dense indices into the node table. A node stores its trip
//! count and the smallest trip index passing through it; trip membership is
//! kept at the leaves (depth `l`) and gathered on demand for internal nodes.

mod snapshot;

use std::collections::HashMap;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::grid::Symbol;
use crate::ingest::TripString;
use crate::partition::Partition;

pub use snapshot::SNAPSHOT_MAGIC;

pub type NodeId = u32;

const NO_PARENT: NodeId = NodeId::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrieNode {
    symbol: Symbol,
    /// `NO_PARENT` for the root.
    parent: NodeId,
    depth: u32,
    trip_count: u32,
    /// Sorted by symbol.
    children: SmallVec<[(Symbol, NodeId); 1]>,
}

impl TrieNode {
    fn new(symbol: Symbol, parent: Option<NodeId>, depth: u32) -> Self {
        TrieNode {
            symbol,
            parent: parent.unwrap_or(NO_PARENT),
            depth,
            trip_count: 0,
            children: SmallVec::new(),
        }
    }

    pub fn symbol(&self) -> Symbol {
        self.symbol
    }

    pub fn parent(&self) -> Option<NodeId> {
        (self.parent != NO_PARENT).then_some(self.parent)
    }

    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    pub fn trip_count(&self) -> u32 {
        self.trip_count
    }

    pub fn children(&self) -> impl ExactSizeIterator<Item = (Symbol, NodeId)> + '_ {
        self.children.iter().copied()
    }

    pub fn child(&self, symbol: Symbol) -> Option<NodeId> {
        self.children
            .binary_search_by_key(&symbol, |&(s, _)| s)
            .ok()
            .map(|i| self.children[i].1)
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// One entry of a children distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NextStep {
    pub symbol: Symbol,
    pub node: NodeId,
    pub count: u32,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trie {
    nodes: Vec<TrieNode>,
    levels: Vec<Vec<NodeId>>,
    len: usize,
    trip_ids: Vec<u64>,
    trip_leaf: Vec<NodeId>,
    leaf_members: HashMap<NodeId, Vec<u32>>,
}

impl Default for Trie {
    fn default() -> Self {
        Trie::new()
    }
}

pub const ROOT: NodeId = 0;

impl Trie {
    /// Trie without trips. The string length is fixed by the first insertion.
    pub fn new() -> Trie {
        Trie {
            nodes: vec![TrieNode::new(Symbol::ROOT, None, 0)],
            levels: vec![vec![ROOT]],
            len: 0,
            trip_ids: Vec::new(),
            trip_leaf: Vec::new(),
            leaf_members: HashMap::new(),
        }
    }

    /// Builds the trie one level at a time. The trips are kept grouped by
    /// their node at the previous depth; each group is split by its next
    /// symbol with a bucket pass, which keeps the split stable, so every group
    /// stays sorted by trip index. `O(n * l)` time with no hashing.
    pub fn build(strings: &[TripString]) -> Result<Trie> {
        let mut trie = Trie::new();
        let Some(first) = strings.first() else {
            return Ok(trie);
        };
        let l = first.len();
        if l == 0 {
            return Err(Error::Precondition("trip strings must be non-empty".into()));
        }
        if let Some(bad) = strings.iter().find(|s| s.len() != l) {
            return Err(Error::Precondition(format!(
                "trip {} has length {}, expected {l}",
                bad.trip_id,
                bad.len()
            )));
        }
        let n = strings.len();
        if n >= u32::MAX as usize {
            return Err(Error::Capacity("too many trips".into()));
        }
        trie.len = l;
        trie.trip_ids = strings.iter().map(|s| s.trip_id).collect();
        trie.nodes[ROOT as usize].trip_count = n as u32;

        // column-major copy so each level reads one contiguous column
        let mut columns = vec![Symbol::ROOT; n * l];
        let mut max_raw = 0;
        for (block, chunk) in strings.chunks(256).enumerate() {
            let first = block * 256;
            for offset in 0..l {
                let row = &mut columns[offset * n + first..offset * n + first + chunk.len()];
                for (cell, s) in row.iter_mut().zip(chunk) {
                    *cell = s.symbols[offset];
                    max_raw = max_raw.max(cell.raw());
                }
            }
        }
        trie.nodes.reserve(n.saturating_mul(l).min(1 << 24));

        // slot[raw + 1] is the child created for that symbol in the current group
        const EMPTY: u32 = u32::MAX;
        let mut slot = vec![EMPTY; max_raw as usize + 2];
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut next_order = vec![0u32; n];
        // bounds[g]..bounds[g + 1] is the range of `order` held by group g
        let mut bounds: Vec<u32> = vec![0, n as u32];
        let mut next_bounds: Vec<u32> = Vec::new();
        let mut fill: Vec<u32> = Vec::new();
        for depth in 1..=l {
            let column = &columns[(depth - 1) * n..depth * n];
            let base = trie.nodes.len() as NodeId;
            next_bounds.clear();
            next_bounds.push(0);
            fill.clear();
            for (g, &parent) in trie.levels[depth - 1].iter().enumerate() {
                let group = &order[bounds[g] as usize..bounds[g + 1] as usize];
                let first_child = trie.nodes.len();
                for &trip in group {
                    let z = column[trip as usize];
                    let idx = (z.raw() + 1) as usize;
                    if slot[idx] == EMPTY {
                        slot[idx] = trie.nodes.len() as NodeId;
                        trie.nodes
                            .push(TrieNode::new(z, Some(parent), depth as u32));
                    }
                    trie.nodes[slot[idx] as usize].trip_count += 1;
                }
                // children of this group occupy ids first_child..; lay their
                // trips out in the same order
                let mut cursor = bounds[g];
                for id in first_child..trie.nodes.len() {
                    fill.push(cursor);
                    cursor += trie.nodes[id].trip_count;
                    next_bounds.push(cursor);
                }
                for &trip in group {
                    let idx = (column[trip as usize].raw() + 1) as usize;
                    let at = &mut fill[(slot[idx] - base) as usize];
                    next_order[*at as usize] = trip;
                    *at += 1;
                }
                let mut children: SmallVec<[(Symbol, NodeId); 1]> = (first_child..trie.nodes.len())
                    .map(|id| {
                        let z = trie.nodes[id].symbol;
                        slot[(z.raw() + 1) as usize] = EMPTY;
                        (z, id as NodeId)
                    })
                    .collect();
                children.sort_unstable_by_key(|&(z, _)| z);
                trie.nodes[parent as usize].children = children;
            }
            trie.levels
                .push((base..trie.nodes.len() as NodeId).collect());
            std::mem::swap(&mut order, &mut next_order);
            std::mem::swap(&mut bounds, &mut next_bounds);
        }
        trie.trip_leaf = vec![ROOT; n];
        for (g, &leaf) in trie.levels[l].iter().enumerate() {
            let members = order[bounds[g] as usize..bounds[g + 1] as usize].to_vec();
            for &trip in &members {
                trie.trip_leaf[trip as usize] = leaf;
            }
            trie.leaf_members.insert(leaf, members);
        }
        Ok(trie)
    }

    /// Adds one trip by walking its path from the root, creating at most `l`
    /// nodes. Returns the trip's leaf.
    pub fn insert(&mut self, s: &TripString) -> Result<NodeId> {
        if self.trip_ids.is_empty() && self.len == 0 {
            if s.is_empty() {
                return Err(Error::Precondition("trip strings must be non-empty".into()));
            }
            self.len = s.len();
            self.levels.resize_with(self.len + 1, Vec::new);
        } else if s.len() != self.len {
            return Err(Error::Precondition(format!(
                "trip {} has length {}, expected {}",
                s.trip_id,
                s.len(),
                self.len
            )));
        }
        let trip = self.trip_ids.len() as u32;
        if trip == u32::MAX {
            return Err(Error::Capacity("too many trips".into()));
        }

        let mut node = ROOT;
        self.nodes[ROOT as usize].trip_count += 1;
        for (offset, &symbol) in s.symbols.iter().enumerate() {
            let depth = offset + 1;
            let parent = &self.nodes[node as usize];
            node = match parent.children.binary_search_by_key(&symbol, |&(z, _)| z) {
                Ok(i) => parent.children[i].1,
                Err(i) => {
                    let id = self.nodes.len() as NodeId;
                    self.nodes[node as usize].children.insert(i, (symbol, id));
                    self.nodes
                        .push(TrieNode::new(symbol, Some(node), depth as u32));
                    self.levels[depth].push(id);
                    id
                }
            };
            self.nodes[node as usize].trip_count += 1;
        }
        self.trip_ids.push(s.trip_id);
        self.trip_leaf.push(node);
        self.leaf_members.entry(node).or_default().push(trip);
        Ok(node)
    }

    /// Padded string length `l`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.trip_ids.is_empty()
    }

    pub fn num_trips(&self) -> usize {
        self.trip_ids.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> NodeId {
        ROOT
    }

    /// External ids of the trips, indexed by trip position.
    pub fn trip_ids(&self) -> &[u64] {
        &self.trip_ids
    }

    pub fn leaf_of(&self, trip: usize) -> Option<NodeId> {
        self.trip_leaf.get(trip).copied()
    }

    pub fn node(&self, id: NodeId) -> Result<&TrieNode> {
        self.nodes.get(id as usize).ok_or(Error::UnknownNode(id))
    }

    pub(crate) fn node_unchecked(&self, id: NodeId) -> &TrieNode {
        &self.nodes[id as usize]
    }

    /// Node ids at a given depth, in creation order. Empty beyond `l`.
    pub fn nodes_at_depth(&self, depth: usize) -> &[NodeId] {
        self.levels.get(depth).map_or(&[], Vec::as_slice)
    }

    /// Height of the tree in levels below the root (equals `l` once non-empty).
    pub fn depth_count(&self) -> usize {
        self.levels.len() - 1
    }

    /// Symbols on the path from the root to `id`, root excluded.
    pub fn prefix(&self, id: NodeId) -> Result<Vec<Symbol>> {
        let mut node = self.node(id)?;
        let mut path = Vec::with_capacity(node.depth());
        while let Some(parent) = node.parent() {
            path.push(node.symbol);
            node = &self.nodes[parent as usize];
        }
        path.reverse();
        Ok(path)
    }

    /// Trip indices sharing the node's prefix, ascending.
    pub fn member_trips(&self, id: NodeId) -> Result<Vec<u32>> {
        self.node(id)?;
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if node.is_leaf() {
                if let Some(members) = self.leaf_members.get(&n) {
                    out.extend_from_slice(members);
                }
            } else {
                stack.extend(node.children.iter().map(|&(_, c)| c));
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Ancestor of `id` at `depth` (which must not exceed the node's depth).
    pub fn ancestor_at(&self, id: NodeId, depth: usize) -> Result<NodeId> {
        let mut node = id;
        let mut current = self.node(id)?.depth();
        if depth > current {
            return Err(Error::Precondition(format!(
                "node {id} at depth {current} has no ancestor at depth {depth}"
            )));
        }
        while current > depth {
            node = self.nodes[node as usize].parent().unwrap_or(ROOT);
            current -= 1;
        }
        Ok(node)
    }

    /// Partition of the trips by their node at trie depth `depth`.
    pub fn depth_partition(&self, depth: usize) -> Result<Partition> {
        if depth > self.len {
            return Err(Error::Parameter(format!(
                "depth {depth} exceeds string length {}",
                self.len
            )));
        }
        let steps = self.len - depth;
        Ok(Partition::from_keys(self.trip_leaf.iter().map(|&leaf| {
            let mut node = leaf;
            for _ in 0..steps {
                node = self.nodes[node as usize].parent().unwrap_or(ROOT);
            }
            node
        })))
    }

    /// Dendrogram level `i`: singletons at 0, the trie depth `l - i` classes
    /// for `1 <= i <= l`, and one block above `l`.
    pub fn level_partition(&self, level: usize) -> Partition {
        let n = self.num_trips();
        if level == 0 {
            Partition::singletons(n)
        } else if level > self.len {
            Partition::single_block(n)
        } else {
            self.depth_partition(self.len - level)
                .expect("depth within string length")
        }
    }

    /// Node whose root path spells `prefix`.
    pub fn locate(&self, prefix: &[Symbol]) -> Option<NodeId> {
        prefix.iter().try_fold(ROOT, |node, &symbol| {
            self.nodes[node as usize].child(symbol)
        })
    }

    /// Next-step distribution: children with their share of the node's trips.
    pub fn children_distribution(&self, id: NodeId) -> Result<Vec<NextStep>> {
        let node = self.node(id)?;
        let total = f64::from(node.trip_count);
        Ok(node
            .children
            .iter()
            .map(|&(symbol, child)| {
                let count = self.nodes[child as usize].trip_count;
                NextStep {
                    symbol,
                    node: child,
                    count,
                    probability: f64::from(count) / total,
                }
            })
            .collect())
    }

    /// Deepest node on both root paths.
    pub fn lca(&self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (da, db) = (self.node(a)?.depth(), self.node(b)?.depth());
        let common = da.min(db);
        let mut x = self.ancestor_at(a, common)?;
        let mut y = self.ancestor_at(b, common)?;
        while x != y {
            x = self.nodes[x as usize].parent().unwrap_or(ROOT);
            y = self.nodes[y as usize].parent().unwrap_or(ROOT);
        }
        Ok(x)
    }

    pub fn serialize(&self) -> String {
        snapshot::serialize(self)
    }

    pub fn deserialize(text: &str) -> Result<Trie> {
        snapshot::deserialize(text)
    }
}
