//! Statistics and queries over a built trie.
//!
//! Depth `k` of the trie is time step `k - 1` of every trip, so a level of the
//! tree is a snapshot of where the trips were at that time. Padding nodes mark
//! trips that have already ended; they never count as a location.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{Grid, Symbol};
use crate::trie::{NodeId, Trie};

/// Default window for the "first levels" statistics: eleven levels cover the
/// first ten minutes at one-minute resolution.
pub const DEFAULT_FIRST_LEVELS: usize = 11;

#[derive(Debug, Clone, PartialEq)]
pub struct BranchingStats {
    /// Factor from depth `k` to `k + 1`, for `k = 0, 1, ...` while defined.
    pub per_depth: Vec<f64>,
    pub average: Option<f64>,
    pub first_levels_average: Option<f64>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Live-node branching factors. A node at depth `k` counts in the denominator
/// only when some trip through it continues to a region at depth `k + 1`; the
/// numerator counts the region nodes at depth `k + 1`.
pub fn branching_stats(trie: &Trie, first_levels: usize) -> BranchingStats {
    let mut per_depth = Vec::new();
    for depth in 0..trie.len() {
        let live_parents = trie
            .nodes_at_depth(depth)
            .iter()
            .filter(|&&id| {
                trie.node_unchecked(id)
                    .children()
                    .any(|(s, _)| s.is_region())
            })
            .count();
        if live_parents == 0 {
            break;
        }
        let live_children = trie
            .nodes_at_depth(depth + 1)
            .iter()
            .filter(|&&id| trie.node_unchecked(id).symbol().is_region())
            .count();
        per_depth.push(live_children as f64 / live_parents as f64);
    }
    BranchingStats {
        average: mean(per_depth.iter().copied()),
        first_levels_average: mean(per_depth.iter().take(first_levels).copied()),
        per_depth,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionClusterCounts {
    /// Region id to the number of nodes labeled with it, depths `1..=l`.
    pub all: BTreeMap<u32, usize>,
    /// Same, restricted to depths `1..=first_levels`.
    pub first_levels: BTreeMap<u32, usize>,
    pub average: Option<f64>,
    pub first_levels_average: Option<f64>,
}

pub fn region_cluster_counts(trie: &Trie, first_levels: usize) -> RegionClusterCounts {
    let mut all = BTreeMap::new();
    let mut first = BTreeMap::new();
    for depth in 1..=trie.len() {
        for &id in trie.nodes_at_depth(depth) {
            if let Some(region) = trie.node_unchecked(id).symbol().region_id() {
                *all.entry(region).or_insert(0) += 1;
                if depth <= first_levels {
                    *first.entry(region).or_insert(0) += 1;
                }
            }
        }
    }
    RegionClusterCounts {
        average: mean(all.values().map(|&c| c as f64)),
        first_levels_average: mean(first.values().map(|&c| c as f64)),
        all,
        first_levels: first,
    }
}

/// Mean trip count over all nodes at depths `1..=l`, and over `1..=first_levels`.
pub fn trips_per_cluster(trie: &Trie, first_levels: usize) -> (Option<f64>, Option<f64>) {
    let counts = |max_depth: usize| {
        mean(
            (1..=max_depth.min(trie.len()))
                .flat_map(|d| trie.nodes_at_depth(d))
                .map(|&id| f64::from(trie.node_unchecked(id).trip_count())),
        )
    };
    (counts(trie.len()), counts(first_levels))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrieStats {
    pub total_trips: usize,
    pub first_levels: usize,
    pub branching: BranchingStats,
    pub clusters_per_region: RegionClusterCounts,
    pub trips_per_cluster: Option<f64>,
    pub trips_per_cluster_first_levels: Option<f64>,
}

impl TrieStats {
    pub fn compute(trie: &Trie, first_levels: usize) -> TrieStats {
        let (tpc, tpc_first) = trips_per_cluster(trie, first_levels);
        TrieStats {
            total_trips: trie.num_trips(),
            first_levels,
            branching: branching_stats(trie, first_levels),
            clusters_per_region: region_cluster_counts(trie, first_levels),
            trips_per_cluster: tpc,
            trips_per_cluster_first_levels: tpc_first,
        }
    }

    /// Tab-separated `row name, value` lines; undefined averages print `NA`.
    pub fn to_report(&self) -> String {
        fn value(v: Option<f64>) -> String {
            v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4}"))
        }
        let k = self.first_levels;
        let rows = [
            (
                "Total number of trips".to_string(),
                self.total_trips.to_string(),
            ),
            (
                "Level-wise Average branching factor".to_string(),
                value(self.branching.average),
            ),
            (
                format!("Level-wise Average branching factor (first {k} levels)"),
                value(self.branching.first_levels_average),
            ),
            (
                "Average number of clusters per region".to_string(),
                value(self.clusters_per_region.average),
            ),
            (
                format!("Average number of clusters per region (first {k} levels)"),
                value(self.clusters_per_region.first_levels_average),
            ),
            (
                "Average number of trips per cluster".to_string(),
                value(self.trips_per_cluster),
            ),
            (
                format!("Average number of trips per cluster (first {k} levels)"),
                value(self.trips_per_cluster_first_levels),
            ),
        ];
        let mut out = String::from("#triptrie-stats v1\n");
        for (name, v) in rows {
            let _ = writeln!(out, "{name}\t{v}");
        }
        out
    }
}

/// Trip counts per grid cell at one trie depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Heatmap {
    pub depth: usize,
    pub n_rows: u32,
    pub n_cols: u32,
    /// Row-major, row `i_y = 1` (southernmost) first.
    pub counts: Vec<u64>,
}

impl Heatmap {
    pub fn get(&self, row: u32, col: u32) -> u64 {
        self.counts[((row - 1) * self.n_cols + (col - 1)) as usize]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `n_rows` lines of `n_cols` comma-separated counts, southernmost row first.
    pub fn to_csv(&self) -> String {
        grid_csv(self.n_cols as usize, self.counts.iter().map(u64::to_string))
    }
}

fn grid_csv(n_cols: usize, cells: impl Iterator<Item = String>) -> String {
    let mut out = String::new();
    for (i, cell) in cells.enumerate() {
        if i > 0 {
            out.push(if i % n_cols == 0 { '\n' } else { ',' });
        }
        out.push_str(&cell);
    }
    out.push('\n');
    out
}

/// `key=value` sidecar describing an exported grid.
pub fn grid_metadata(grid: &Grid, extra: &[(&str, String)]) -> String {
    let b = grid.bbox();
    let mut out = format!(
        "x_min={}\ny_min={}\nx_max={}\ny_max={}\nn_rows={}\nn_cols={}\nrow_order=south_to_north\n",
        b.x_min,
        b.y_min,
        b.x_max,
        b.y_max,
        grid.n_rows(),
        grid.n_cols()
    );
    for (k, v) in extra {
        let _ = writeln!(out, "{k}={v}");
    }
    out
}

/// Trips located in each cell at `depth` (time step `depth - 1`). Trips that
/// ended earlier are not counted.
pub fn heatmap(trie: &Trie, grid: &Grid, depth: usize) -> Result<Heatmap> {
    if depth == 0 || depth > trie.len() {
        return Err(Error::Parameter(format!(
            "heat map depth must be in 1..={}, got {depth}",
            trie.len()
        )));
    }
    let mut counts = vec![0u64; grid.num_regions() as usize];
    for &id in trie.nodes_at_depth(depth) {
        let node = trie.node_unchecked(id);
        if node.symbol().is_region() {
            let cell = grid.symbol_to_cell(node.symbol())?;
            counts[((cell.row - 1) * grid.n_cols() + cell.col - 1) as usize] +=
                u64::from(node.trip_count());
        }
    }
    Ok(Heatmap {
        depth,
        n_rows: grid.n_rows(),
        n_cols: grid.n_cols(),
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSummary {
    pub node: NodeId,
    /// Root path with trailing padding removed.
    pub route: Vec<Symbol>,
    pub trip_count: u32,
}

/// The `k` largest clusters at `depth`, largest first; ties are broken by
/// route.
pub fn top_k_clusters(trie: &Trie, depth: usize, k: usize) -> Result<Vec<ClusterSummary>> {
    if depth > trie.len() {
        return Err(Error::Parameter(format!(
            "depth {depth} exceeds {}",
            trie.len()
        )));
    }
    let mut nodes: Vec<NodeId> = trie.nodes_at_depth(depth).to_vec();
    nodes.sort_by_key(|&id| std::cmp::Reverse(trie.node_unchecked(id).trip_count()));
    // only the clusters tied with the k-th one need their routes compared
    let cutoff = match nodes.get(k.saturating_sub(1)) {
        Some(&id) if k > 0 => trie.node_unchecked(id).trip_count(),
        _ => 0,
    };
    let mut clusters = nodes
        .into_iter()
        .take_while(|&id| k > 0 && trie.node_unchecked(id).trip_count() >= cutoff)
        .map(|id| {
            let mut route = trie.prefix(id)?;
            route.truncate(crate::metrics::strip_padding(&route).len());
            Ok(ClusterSummary {
                node: id,
                route,
                trip_count: trie.node_unchecked(id).trip_count(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    clusters.sort_by(|a, b| {
        b.trip_count
            .cmp(&a.trip_count)
            .then_with(|| a.route.cmp(&b.route))
    });
    clusters.truncate(k);
    Ok(clusters)
}

/// Shallowest depth at which each region appears in any cluster.
pub fn first_occurrence_depth(trie: &Trie) -> BTreeMap<u32, usize> {
    let mut out = BTreeMap::new();
    for depth in 1..=trie.len() {
        for &id in trie.nodes_at_depth(depth) {
            if let Some(region) = trie.node_unchecked(id).symbol().region_id() {
                out.entry(region).or_insert(depth);
            }
        }
    }
    out
}

/// Grid of first-occurrence depths; regions never visited are left empty.
pub fn occurrence_csv(grid: &Grid, depths: &BTreeMap<u32, usize>) -> String {
    let cells = (1..=grid.num_regions())
        .map(|id| depths.get(&id).map_or_else(String::new, usize::to_string));
    grid_csv(grid.n_cols() as usize, cells)
}

fn start_node(trie: &Trie, start: Symbol) -> Result<NodeId> {
    trie.locate(&[start])
        .ok_or_else(|| Error::NotFound(format!("no trip starts in region {start}")))
}

/// Regions visited at `depth` by trips that start in `start`, ranked by trip
/// count (ties by region id), at most `top_k` of them.
pub fn subtree_distribution(
    trie: &Trie,
    start: Symbol,
    depth: usize,
    top_k: usize,
) -> Result<Vec<(Symbol, u64)>> {
    let origin = start_node(trie, start)?;
    if depth == 0 || depth > trie.len() {
        return Err(Error::Parameter(format!(
            "depth must be in 1..={}, got {depth}",
            trie.len()
        )));
    }
    let mut frontier = vec![origin];
    for _ in 1..depth {
        frontier = frontier
            .iter()
            .flat_map(|&id| trie.node_unchecked(id).children().map(|(_, c)| c))
            .collect();
    }
    let mut totals: HashMap<Symbol, u64> = HashMap::new();
    for id in frontier {
        let node = trie.node_unchecked(id);
        if node.symbol().is_region() {
            *totals.entry(node.symbol()).or_insert(0) += u64::from(node.trip_count());
        }
    }
    let mut ranked: Vec<(Symbol, u64)> = totals.into_iter().collect();
    ranked.sort_by_key(|&(s, c)| (std::cmp::Reverse(c), s));
    ranked.truncate(top_k);
    Ok(ranked)
}

fn last_region(trie: &Trie, leaf: NodeId) -> Option<Symbol> {
    let mut id = leaf;
    loop {
        let node = trie.node_unchecked(id);
        if node.symbol().is_region() {
            return Some(node.symbol());
        }
        id = node.parent()?;
    }
}

fn leaves_under(trie: &Trie, id: NodeId) -> Vec<NodeId> {
    let mut stack = vec![id];
    let mut leaves = Vec::new();
    while let Some(n) = stack.pop() {
        let node = trie.node_unchecked(n);
        if node.is_leaf() {
            leaves.push(n);
        } else {
            stack.extend(node.children().map(|(_, c)| c));
        }
    }
    leaves
}

/// Number of distinct trip types (root-to-leaf paths) that start in `start`
/// and end, before padding, in `end`.
pub fn route_diversity(trie: &Trie, start: Symbol, end: Symbol) -> usize {
    let Some(origin) = trie.locate(&[start]) else {
        return 0;
    };
    leaves_under(trie, origin)
        .into_iter()
        .filter(|&leaf| last_region(trie, leaf) == Some(end))
        .count()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionOutlier {
    pub region: u32,
    /// Nodes labeled with the region.
    pub node_count: usize,
    /// Distinct root-to-leaf paths through the region.
    pub trip_types: usize,
    pub first_depth: usize,
}

/// Per-region rarity. Regions involved in the fewest trip types come first;
/// among those, the ones first seen deepest in the tree.
pub fn outlier_report(trie: &Trie) -> Vec<RegionOutlier> {
    let mut leaves_below = vec![0usize; trie.num_nodes()];
    for depth in (0..=trie.depth_count()).rev() {
        for &id in trie.nodes_at_depth(depth) {
            let node = trie.node_unchecked(id);
            leaves_below[id as usize] = if node.is_leaf() {
                1
            } else {
                node.children().map(|(_, c)| leaves_below[c as usize]).sum()
            };
        }
    }

    let mut node_count: HashMap<u32, usize> = HashMap::new();
    let mut trip_types: HashMap<u32, usize> = HashMap::new();
    let mut on_path: HashMap<u32, usize> = HashMap::new();
    // (node, exiting)
    let mut stack = vec![(trie.root(), false)];
    while let Some((id, exiting)) = stack.pop() {
        let node = trie.node_unchecked(id);
        let region = node.symbol().region_id();
        if exiting {
            if let Some(r) = region {
                *on_path.get_mut(&r).expect("entered before exit") -= 1;
            }
            continue;
        }
        if let Some(r) = region {
            *node_count.entry(r).or_insert(0) += 1;
            let depth = on_path.entry(r).or_insert(0);
            if *depth == 0 {
                *trip_types.entry(r).or_insert(0) += leaves_below[id as usize];
            }
            *depth += 1;
        }
        stack.push((id, true));
        stack.extend(node.children().map(|(_, c)| (c, false)));
    }

    let first = first_occurrence_depth(trie);
    let mut report: Vec<RegionOutlier> = first
        .into_iter()
        .map(|(region, first_depth)| RegionOutlier {
            region,
            node_count: node_count[&region],
            trip_types: trip_types[&region],
            first_depth,
        })
        .collect();
    report.sort_by_key(|r| {
        (
            r.trip_types,
            std::cmp::Reverse(r.first_depth),
            r.node_count,
            r.region,
        )
    });
    report
}

/// Trip subsets by local start time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripCategory {
    All,
    /// Starts between 05:00 and 12:00.
    DayPeak,
    /// Starts between 15:00 and 22:00.
    NightPeak,
    Weekdays,
    Weekends,
}

impl TripCategory {
    pub fn parse(name: &str) -> Result<TripCategory> {
        match name {
            "all" => Ok(TripCategory::All),
            "day-peak" => Ok(TripCategory::DayPeak),
            "night-peak" => Ok(TripCategory::NightPeak),
            "weekdays" => Ok(TripCategory::Weekdays),
            "weekends" => Ok(TripCategory::Weekends),
            other => Err(Error::Parameter(format!("unknown trip category {other:?}"))),
        }
    }

    /// Whether a trip starting at Unix time `epoch` belongs to the category,
    /// with local time `epoch + utc_offset_secs`.
    pub fn matches(self, epoch: i64, utc_offset_secs: i64) -> bool {
        let local = epoch + utc_offset_secs;
        let hour = local.div_euclid(3600).rem_euclid(24);
        // 1970-01-01 was a Thursday; Monday = 0
        let weekday = (local.div_euclid(86_400) + 3).rem_euclid(7);
        match self {
            TripCategory::All => true,
            TripCategory::DayPeak => (5..12).contains(&hour),
            TripCategory::NightPeak => (15..22).contains(&hour),
            TripCategory::Weekdays => weekday < 5,
            TripCategory::Weekends => weekday >= 5,
        }
    }
}
