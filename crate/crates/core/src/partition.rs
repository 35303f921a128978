use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

/// A clustering of `n` items as labels `1..=k`, every label used at least once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<u32>,
    num_blocks: u32,
}

impl Partition {
    /// Validates a labeling: labels must be surjective onto `1..=max`.
    pub fn from_labels(labels: Vec<u32>) -> Result<Partition> {
        let k = labels.iter().copied().max().unwrap_or(0);
        let mut seen = vec![false; k as usize + 1];
        for &label in &labels {
            if label == 0 {
                return Err(Error::InvalidPartition("labels start at 1".into()));
            }
            seen[label as usize] = true;
        }
        if let Some(missing) = seen.iter().skip(1).position(|s| !s) {
            return Err(Error::InvalidPartition(format!(
                "label {} of 1..={k} is never used",
                missing + 1
            )));
        }
        Ok(Partition {
            labels,
            num_blocks: k,
        })
    }

    /// Canonical labeling: blocks are numbered in order of their first item.
    pub fn from_keys<K, I>(keys: I) -> Partition
    where
        K: Eq + Hash,
        I: IntoIterator<Item = K>,
    {
        let mut ids: HashMap<K, u32> = HashMap::new();
        let labels = keys
            .into_iter()
            .map(|key| {
                let next = ids.len() as u32 + 1;
                *ids.entry(key).or_insert(next)
            })
            .collect();
        Partition {
            labels,
            num_blocks: ids.len() as u32,
        }
    }

    pub fn singletons(n: usize) -> Partition {
        Partition {
            labels: (1..=n as u32).collect(),
            num_blocks: n as u32,
        }
    }

    pub fn single_block(n: usize) -> Partition {
        Partition {
            labels: vec![1; n],
            num_blocks: u32::from(n > 0),
        }
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks as usize
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Relabels in first-occurrence order.
    pub fn canonical(&self) -> Partition {
        Partition::from_keys(self.labels.iter().copied())
    }

    /// Item indices per block, block `b` at position `b - 1`.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks()];
        for (item, &label) in self.labels.iter().enumerate() {
            blocks[label as usize - 1].push(item);
        }
        blocks
    }

    /// True when every block of `self` lies inside a single block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.len() != coarser.len() {
            return false;
        }
        let mut image = vec![0u32; self.num_blocks() + 1];
        self.labels
            .iter()
            .zip(&coarser.labels)
            .all(|(&fine, &coarse)| {
                let slot = &mut image[fine as usize];
                if *slot == 0 {
                    *slot = coarse;
                }
                *slot == coarse
            })
    }
}
