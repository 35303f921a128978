//! Brute-force single-linkage clustering under the weighted Hamming distance.
//!
//! This is the reference the trie is checked against: an `O(n^2)` distance
//! matrix, connected components under increasing thresholds, and a per-level
//! comparison of partitions up to relabeling. It is a verification tool for
//! samples of a few thousand strings, not a production path.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::ingest::TripString;
use crate::metrics::{weighted_hamming, Distance};
use crate::partition::Partition;
use crate::trie::Trie;

/// Default memory budget for the distance matrix (2 GiB).
pub const DEFAULT_MATRIX_BYTES: usize = 2 << 30;

/// Symmetric matrix of exact distances, upper triangle stored as fixed-width
/// little-endian 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    words: usize,
    data: Vec<u64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        // row i holds pairs (i, i+1..n)
        let before = i * (2 * self.n - i - 1) / 2;
        (before + (j - i - 1)) * self.words
    }

    fn raw(&self, i: usize, j: usize) -> &[u64] {
        let at = self.offset(i, j);
        &self.data[at..at + self.words]
    }

    pub fn get(&self, i: usize, j: usize) -> Distance {
        assert!(i < self.n && j < self.n, "index out of range");
        if i == j {
            return Distance::zero();
        }
        let digits: Vec<u32> = self
            .raw(i, j)
            .iter()
            .flat_map(|w| [*w as u32, (*w >> 32) as u32])
            .collect();
        Distance::from_digits(&digits)
    }

    fn cmp_pairs(&self, a: (usize, usize), b: (usize, usize)) -> Ordering {
        let (x, y) = (self.raw(a.0, a.1), self.raw(b.0, b.1));
        x.iter().rev().cmp(y.iter().rev())
    }

    /// Pairs `(i, j)` with `i < j`, ascending by distance.
    fn sorted_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .collect();
        pairs.sort_by(|&a, &b| self.cmp_pairs(a, b));
        pairs
    }
}

fn check_corpus(strings: &[TripString]) -> Result<usize> {
    let l = strings.first().map_or(0, TripString::len);
    if let Some(bad) = strings.iter().find(|s| s.len() != l) {
        return Err(Error::Precondition(format!(
            "trip {} has length {}, expected {l}",
            bad.trip_id,
            bad.len()
        )));
    }
    Ok(l)
}

/// All pairwise weighted Hamming distances. Fails with a capacity error when
/// the matrix would exceed `max_bytes`.
pub fn pairwise_distances(strings: &[TripString], max_bytes: usize) -> Result<DistanceMatrix> {
    let l = check_corpus(strings)?;
    let n = strings.len();
    let words = l.div_ceil(64).max(1);
    let pairs = n.saturating_mul(n.saturating_sub(1)) / 2;
    let bytes = pairs.saturating_mul(words).saturating_mul(8);
    if bytes > max_bytes {
        return Err(Error::Capacity(format!(
            "distance matrix for {n} strings of length {l} needs {bytes} bytes, limit is {max_bytes}"
        )));
    }
    let mut data = Vec::with_capacity(pairs * words);
    for i in 0..n {
        for j in i + 1..n {
            let d = weighted_hamming(&strings[i].symbols, &strings[j].symbols)?;
            let digits = d.as_biguint().to_u64_digits();
            data.extend(
                digits
                    .iter()
                    .copied()
                    .chain(std::iter::repeat(0))
                    .take(words),
            );
        }
    }
    Ok(DistanceMatrix { n, words, data })
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    sets: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
            sets: n,
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
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        self.sets -= 1;
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }

    fn partition(&mut self) -> Partition {
        let roots: Vec<usize> = (0..self.parent.len()).map(|x| self.find(x)).collect();
        Partition::from_keys(roots)
    }
}

/// One merge event. `threshold` is `None` for the initial all-singletons
/// step, which sits below every distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DendrogramStep {
    pub threshold: Option<Distance>,
    pub partition: Partition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdDendrogram {
    pub steps: Vec<DendrogramStep>,
}

impl ThresholdDendrogram {
    /// Partition in force at `threshold`: components of `{(i, j) : d <= threshold}`.
    pub fn partition_at(&self, threshold: &Distance) -> &Partition {
        let idx = self
            .steps
            .partition_point(|s| s.threshold.as_ref().is_none_or(|t| t <= threshold));
        &self.steps[idx.max(1) - 1].partition
    }
}

/// Single linkage with simultaneous merges: for every distinct distance `t`
/// in ascending order, all clusters within `t` of each other merge at once,
/// giving the connected components of the graph with edges `d <= t`. Steps at
/// which nothing merges are not recorded.
pub fn single_linkage_multi_merge(matrix: &DistanceMatrix) -> ThresholdDendrogram {
    let n = matrix.len();
    let mut uf = UnionFind::new(n);
    let mut steps = vec![DendrogramStep {
        threshold: None,
        partition: Partition::singletons(n),
    }];
    let pairs = matrix.sorted_pairs();
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && matrix.cmp_pairs(pairs[start], pairs[end]) == Ordering::Equal {
            end += 1;
        }
        let before = uf.sets;
        for &(i, j) in &pairs[start..end] {
            uf.union(i, j);
        }
        if uf.sets != before {
            let (i, j) = pairs[start];
            steps.push(DendrogramStep {
                threshold: Some(matrix.get(i, j)),
                partition: uf.partition(),
            });
        }
        start = end;
    }
    ThresholdDendrogram { steps }
}

/// Whether two labelings describe the same clustering. Both must be
/// surjective onto `1..=k`.
///
/// With equal block counts `k`, checking that every block of `c1` carries a
/// single `c2` label suffices: that defines a map from `c1` labels to `c2`
/// labels, onto because `c2` is surjective, hence a bijection between two
/// `k`-element sets, so the blocks coincide.
pub fn partitions_equal_up_to_relabeling(c1: &[u32], c2: &[u32]) -> Result<bool> {
    if c1.len() != c2.len() {
        return Err(Error::Precondition(format!(
            "labelings cover {} and {} items",
            c1.len(),
            c2.len()
        )));
    }
    let p1 = Partition::from_labels(c1.to_vec())?;
    let p2 = Partition::from_labels(c2.to_vec())?;
    if p1.num_blocks() != p2.num_blocks() {
        return Ok(false);
    }
    let mut image = vec![0u32; p1.num_blocks() + 1];
    for (&a, &b) in c1.iter().zip(c2) {
        let slot = &mut image[a as usize];
        if *slot == 0 {
            *slot = b;
        } else if *slot != b {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Build the full dendrogram at every distinct distance and read the levels
    /// off it, instead of sweeping only the level thresholds.
    pub full_sweep: bool,
    pub max_matrix_bytes: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            full_sweep: false,
            max_matrix_bytes: DEFAULT_MATRIX_BYTES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelCheck {
    pub level: usize,
    pub trie_blocks: usize,
    pub oracle_blocks: usize,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub n: usize,
    pub len: usize,
    pub levels: Vec<LevelCheck>,
}

impl EquivalenceReport {
    pub fn all_equal(&self) -> bool {
        self.levels.iter().all(|c| c.equal)
    }
}

/// Oracle partitions for dendrogram levels `0..=l+1`: singletons at level 0,
/// then the components of `{d <= 2^i - 1}` for level `i`.
pub fn oracle_level_partitions(
    matrix: &DistanceMatrix,
    len: usize,
    full_sweep: bool,
) -> Vec<Partition> {
    let n = matrix.len();
    let mut out = vec![Partition::singletons(n)];
    if full_sweep {
        let dendrogram = single_linkage_multi_merge(matrix);
        for level in 1..=len + 1 {
            out.push(dendrogram.partition_at(&Distance::all_ones(level)).clone());
        }
        return out;
    }
    let pairs = matrix.sorted_pairs();
    let mut uf = UnionFind::new(n);
    let mut next = 0;
    for level in 1..=len + 1 {
        let threshold = Distance::all_ones(level);
        while next < pairs.len() {
            let (i, j) = pairs[next];
            if matrix.get(i, j) > threshold {
                break;
            }
            uf.union(i, j);
            next += 1;
        }
        out.push(uf.partition());
    }
    out
}

/// Compares every level of `trie` with the single-linkage oracle over
/// `strings`, which must be the corpus the trie was built from.
pub fn verify_equivalence(
    trie: &Trie,
    strings: &[TripString],
    options: VerifyOptions,
) -> Result<EquivalenceReport> {
    if trie.num_trips() != strings.len() {
        return Err(Error::Precondition(format!(
            "trie holds {} trips but {} strings were given",
            trie.num_trips(),
            strings.len()
        )));
    }
    let len = check_corpus(strings)?;
    if !strings.is_empty() && len != trie.len() {
        return Err(Error::Precondition(format!(
            "strings have length {len} but the trie was built for {}",
            trie.len()
        )));
    }
    let matrix = pairwise_distances(strings, options.max_matrix_bytes)?;
    let oracle = oracle_level_partitions(&matrix, len, options.full_sweep);
    let levels = oracle
        .iter()
        .enumerate()
        .map(|(level, expected)| {
            let got = trie.level_partition(level);
            let equal = partitions_equal_up_to_relabeling(got.labels(), expected.labels())?;
            Ok(LevelCheck {
                level,
                trie_blocks: got.num_blocks(),
                oracle_blocks: expected.num_blocks(),
                equal,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquivalenceReport {
        n: strings.len(),
        len,
        levels,
    })
}
