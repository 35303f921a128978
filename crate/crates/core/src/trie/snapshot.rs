//! Level-indexed text snapshot of a trie.
//!
//! ```text
//! triptrie-snapshot v1
//! length <l>
//! trips <n>
//! nodes <total>
//! level <depth> <count>
//! <node_id> <parent_id|-> <symbol> <trip_count>
//! ...
//! leaves
//! <trip_index> <trip_id> <leaf_node_id>
//! ...
//! end
//! ```
//!
//! Levels appear in ascending depth, nodes within a level in id order. The
//! per-trip leaf table fixes every level's trip-to-prefix index, since the
//! ancestors of a leaf are its prefixes. Counts are recomputed on load and must
//! match the stored ones.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{NodeId, Trie, TrieNode, ROOT};
use crate::error::{Error, Result};
use crate::grid::Symbol;

pub const SNAPSHOT_MAGIC: &str = "triptrie-snapshot v1";

pub(super) fn serialize(trie: &Trie) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SNAPSHOT_MAGIC}");
    let _ = writeln!(out, "length {}", trie.len);
    let _ = writeln!(out, "trips {}", trie.trip_ids.len());
    let _ = writeln!(out, "nodes {}", trie.nodes.len());
    for (depth, level) in trie.levels.iter().enumerate() {
        let _ = writeln!(out, "level {depth} {}", level.len());
        for &id in level {
            let node = &trie.nodes[id as usize];
            match node.parent() {
                Some(p) => {
                    let _ = writeln!(out, "{id} {p} {} {}", node.symbol.raw(), node.trip_count);
                }
                None => {
                    let _ = writeln!(out, "{id} - {} {}", node.symbol.raw(), node.trip_count);
                }
            }
        }
    }
    out.push_str("leaves\n");
    for (trip, (&tid, &leaf)) in trie.trip_ids.iter().zip(&trie.trip_leaf).enumerate() {
        let _ = writeln!(out, "{trip} {tid} {leaf}");
    }
    out.push_str("end\n");
    out
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::Format(format!("corrupt trie snapshot: {}", msg.into()))
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_fields(&mut self) -> Result<(usize, Vec<&'a str>)> {
        let (idx, line) = self
            .inner
            .next()
            .ok_or_else(|| corrupt("unexpected end of input"))?;
        Ok((idx + 1, line.split(' ').collect()))
    }

    fn keyed(&mut self, key: &str) -> Result<usize> {
        let (no, fields) = self.next_fields()?;
        match fields.as_slice() {
            [k, v] if *k == key => num(v, no),
            _ => Err(corrupt(format!("line {no}: expected `{key} <value>`"))),
        }
    }
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| corrupt(format!("line {line}: bad number {s:?}")))
}

pub(super) fn deserialize(text: &str) -> Result<Trie> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    match lines.inner.next() {
        Some((_, header)) if header == SNAPSHOT_MAGIC => {}
        Some((_, header)) => {
            return Err(Error::Format(format!(
                "unsupported trie snapshot header {header:?}"
            )))
        }
        None => return Err(Error::Format("empty trie snapshot".into())),
    }
    let len = lines.keyed("length")?;
    let n = lines.keyed("trips")?;
    let total = lines.keyed("nodes")?;
    if total == 0 || total > text.len() {
        return Err(corrupt("implausible node count"));
    }

    let mut slots: Vec<Option<(TrieNode, u32)>> = vec![None; total];
    let mut levels = Vec::with_capacity(len + 1);
    for depth in 0..=len {
        let (no, fields) = lines.next_fields()?;
        let count = match fields.as_slice() {
            ["level", d, c] if num::<usize>(d, no)? == depth => num::<usize>(c, no)?,
            _ => {
                return Err(corrupt(format!(
                    "line {no}: expected `level {depth} <count>`"
                )))
            }
        };
        let mut level = Vec::with_capacity(count.min(total));
        for _ in 0..count {
            let (no, fields) = lines.next_fields()?;
            let [id, parent, symbol, stored] = fields.as_slice() else {
                return Err(corrupt(format!("line {no}: expected 4 node fields")));
            };
            let id: NodeId = num(id, no)?;
            let parent = match *parent {
                "-" => None,
                p => Some(num::<NodeId>(p, no)?),
            };
            let symbol = Symbol::from_raw(num(symbol, no)?)?;
            let stored: u32 = num(stored, no)?;
            let slot = slots
                .get_mut(id as usize)
                .ok_or_else(|| corrupt(format!("line {no}: node id {id} out of range")))?;
            if slot.is_some() {
                return Err(corrupt(format!("line {no}: node {id} listed twice")));
            }
            let root_shaped = depth == 0 && id == ROOT && parent.is_none() && symbol.is_root();
            let child_shaped = depth > 0 && parent.is_some() && !symbol.is_root();
            if !(root_shaped || child_shaped) {
                return Err(corrupt(format!(
                    "line {no}: node {id} misplaced at depth {depth}"
                )));
            }
            *slot = Some((TrieNode::new(symbol, parent, depth as u32), stored));
            level.push(id);
        }
        if level.windows(2).any(|w| w[0] >= w[1]) {
            return Err(corrupt(format!("level {depth} is not in id order")));
        }
        levels.push(level);
    }
    if len == 0 && n > 0 {
        return Err(corrupt("trips present without a string length"));
    }

    let mut stored_counts = Vec::with_capacity(total);
    let mut nodes = Vec::with_capacity(total);
    for (id, slot) in slots.into_iter().enumerate() {
        let (node, stored) = slot.ok_or_else(|| corrupt(format!("node {id} missing")))?;
        stored_counts.push(stored);
        nodes.push(node);
    }
    for id in 0..nodes.len() {
        let Some(parent) = nodes[id].parent() else {
            continue;
        };
        let (symbol, depth) = (nodes[id].symbol, nodes[id].depth);
        let p = nodes
            .get_mut(parent as usize)
            .ok_or_else(|| corrupt(format!("node {id} has unknown parent {parent}")))?;
        if p.depth + 1 != depth {
            return Err(corrupt(format!(
                "node {id} is not one level below its parent"
            )));
        }
        p.children.push((symbol, id as NodeId));
    }
    for node in &mut nodes {
        node.children.sort_unstable_by_key(|&(s, _)| s);
        if node.children.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(corrupt("two children share a symbol"));
        }
    }

    let (no, fields) = lines.next_fields()?;
    if fields != ["leaves"] {
        return Err(corrupt(format!("line {no}: expected `leaves`")));
    }
    let mut trip_ids = Vec::with_capacity(n);
    let mut trip_leaf = Vec::with_capacity(n);
    let mut leaf_members: HashMap<NodeId, Vec<u32>> = HashMap::new();
    for trip in 0..n {
        let (no, fields) = lines.next_fields()?;
        let [index, tid, leaf] = fields.as_slice() else {
            return Err(corrupt(format!("line {no}: expected 3 leaf fields")));
        };
        if num::<usize>(index, no)? != trip {
            return Err(corrupt(format!("line {no}: trips out of order")));
        }
        let leaf: NodeId = num(leaf, no)?;
        match nodes.get(leaf as usize) {
            Some(node) if node.depth as usize == len && len > 0 => {}
            _ => return Err(corrupt(format!("line {no}: {leaf} is not a leaf"))),
        }
        trip_ids.push(num::<u64>(tid, no)?);
        trip_leaf.push(leaf);
        leaf_members.entry(leaf).or_default().push(trip as u32);

        let mut node = Some(leaf);
        while let Some(id) = node {
            let entry = &mut nodes[id as usize];
            entry.trip_count += 1;
            node = entry.parent();
        }
    }
    let (no, fields) = lines.next_fields()?;
    if fields != ["end"] {
        return Err(corrupt(format!("line {no}: expected `end`")));
    }
    if lines.inner.any(|(_, l)| !l.is_empty()) {
        return Err(corrupt("trailing data after `end`"));
    }

    for (id, node) in nodes.iter().enumerate() {
        if node.trip_count != stored_counts[id] {
            return Err(corrupt(format!(
                "node {id} stores {} trips but {} pass through it",
                stored_counts[id], node.trip_count
            )));
        }
        if node.trip_count == 0 && id as NodeId != ROOT {
            return Err(corrupt(format!("node {id} has no trips")));
        }
    }

    Ok(Trie {
        nodes,
        levels,
        len,
        trip_ids,
        trip_leaf,
        leaf_members,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::strings;
    use super::*;

    #[test]
    fn round_trip() {
        let trie = Trie::build(&strings(&["aa", "ab", "ba", "ab"])).unwrap();
        let text = trie.serialize();
        assert_eq!(Trie::deserialize(&text).unwrap(), trie);
        assert!(text
            .starts_with("triptrie-snapshot v1\nlength 2\ntrips 4\nnodes 6\nlevel 0 1\n0 - 0 4\n"));
    }

    #[test]
    fn round_trip_after_inserts() {
        let mut trie = Trie::build(&strings(&["ab_", "abc"])).unwrap();
        for s in strings(&["bcc", "a__", "abc"]) {
            trie.insert(&s).unwrap();
        }
        assert_eq!(Trie::deserialize(&trie.serialize()).unwrap(), trie);
    }

    #[test]
    fn empty_round_trip() {
        let trie = Trie::new();
        let text = trie.serialize();
        assert_eq!(
            text,
            "triptrie-snapshot v1\nlength 0\ntrips 0\nnodes 1\nlevel 0 1\n0 - 0 0\nleaves\nend\n"
        );
        assert_eq!(Trie::deserialize(&text).unwrap(), trie);
    }

    #[test]
    fn tampering_is_detected() {
        let text = Trie::build(&strings(&["aa", "ab", "ba"]))
            .unwrap()
            .serialize();
        let bad_header = text.replacen("v1", "v9", 1);
        assert!(matches!(
            Trie::deserialize(&bad_header),
            Err(Error::Format(_))
        ));
        assert!(Trie::deserialize("").is_err());
        // a leaf count that does not match the leaf table
        let bad_count = text.replacen("0 - 0 3", "0 - 0 4", 1);
        assert!(Trie::deserialize(&bad_count).is_err());
        let truncated = &text[..text.len() - 4];
        assert!(Trie::deserialize(truncated).is_err());
        let bad_leaf = text.replace("2 2 ", "2 2 1\n#");
        assert!(Trie::deserialize(&bad_leaf).is_err());
        let trailing = format!("{text}garbage\n");
        assert!(Trie::deserialize(&trailing).is_err());
    }
}
