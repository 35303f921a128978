mod common;

use common::{syms, trip};
use triptrie::analytics::{route_diversity, subtree_distribution, top_k_clusters, TrieStats};
use triptrie::corpus::{encode_traces, write_corpus};
use triptrie::ingest::{pad_strings, parse_trace};
use triptrie::macro_cluster::{macro_cluster, micro_clusters, MacroMethod};
use triptrie::oracle::{verify_equivalence, VerifyOptions};
use triptrie::{levenshtein, BoundingBox, Error, Grid, Symbol, Trie};

#[test]
fn figure_path_on_six_by_four_grid() {
    let grid = Grid::new(BoundingBox::new(0.0, 0.0, 6.0, 4.0), 4, 6).unwrap();
    let path = [
        (2.5, 2.5),
        (3.5, 2.5),
        (3.5, 1.5),
        (2.5, 1.5),
        (2.5, 0.5),
        (1.5, 0.5),
    ];
    let ids: Vec<i32> = path
        .iter()
        .map(|&(x, y)| grid.coord_to_symbol(x, y).unwrap().raw())
        .collect();
    // bottom-up ids; the top-down labels are 9 10 16 15 21 20
    assert_eq!(ids, vec![15, 16, 10, 9, 3, 2]);
    let labels: Vec<u32> = ids
        .iter()
        .map(|&i| grid.top_down_label(Symbol::region(i as u32)).unwrap())
        .collect();
    assert_eq!(labels, vec![9, 10, 16, 15, 21, 20]);
}

#[test]
fn one_step_shift_is_one_edit() {
    assert_eq!(levenshtein(&syms(&[1, 2, 3, 4]), &syms(&[2, 2, 3, 4])), 1);
    // the same pair is far apart under the prefix-weighted distance
    let d = triptrie::weighted_hamming(&syms(&[1, 2, 3, 4]), &syms(&[2, 2, 3, 4])).unwrap();
    assert_eq!(d.to_u64(), Some(8));
}

#[test]
fn traces_to_verified_trie() {
    let grid = Grid::new(BoundingBox::new(0.0, 0.0, 4.0, 4.0), 4, 4).unwrap();
    // lat lon occupied epoch; x is longitude
    let a = parse_trace(
        [
            "0.5 0.5 1 0",
            "0.5 1.5 1 60",
            "0.5 2.5 1 120",
            "0.5 2.5 0 180",
            "3.5 3.5 1 600",
            "3.5 2.5 1 660",
        ],
        "a",
    )
    .unwrap();
    let b = parse_trace(["0.5 0.5 1 0", "0.5 1.5 1 60", "1.5 1.5 1 120"], "b").unwrap();
    let traces = vec![("a".to_string(), a), ("b".to_string(), b)];
    let (records, stats) = encode_traces(&traces, &grid, 60, 30.0).unwrap();
    assert_eq!(stats.trips_encoded, 3);
    let text = write_corpus(&records).unwrap();
    assert!(text
        .lines()
        .nth(2)
        .unwrap()
        .starts_with("0\ta\t0\t60\t1,2,3"));

    let strings = pad_strings(records.into_iter().map(|r| r.trip).collect())
        .unwrap()
        .0;
    let trie = Trie::build(&strings).unwrap();
    let report = verify_equivalence(&trie, &strings, VerifyOptions::default()).unwrap();
    assert!(report.all_equal());
    assert_eq!(trie.level_partition(trie.len() - 1).num_blocks(), 2);
}

#[test]
fn queries_on_small_trie() {
    let strings = vec![
        trip(0, &[1, 2, 3]),
        trip(1, &[1, 2, 4]),
        trip(2, &[1, 5, 4]),
        trip(3, &[6, 6, -1]),
    ];
    let trie = Trie::build(&strings).unwrap();

    let top = top_k_clusters(&trie, 2, 1).unwrap();
    assert_eq!(
        (top[0].route.clone(), top[0].trip_count),
        (syms(&[1, 2]), 2)
    );

    let reach = subtree_distribution(&trie, Symbol::region(1), 3, 10).unwrap();
    assert_eq!(reach, vec![(Symbol::region(4), 2), (Symbol::region(3), 1)]);
    assert_eq!(
        route_diversity(&trie, Symbol::region(1), Symbol::region(4)),
        2
    );
    assert_eq!(
        route_diversity(&trie, Symbol::region(6), Symbol::region(4)),
        0
    );

    let report = TrieStats::compute(&trie, 11).to_report();
    assert!(report.starts_with("#triptrie-stats v1\n"));

    let micros = micro_clusters(&trie, 3).unwrap();
    let mc = macro_cluster(&micros, 1, MacroMethod::CompleteLinkage);
    assert!(mc.diameters.iter().all(|&d| d <= 1));
}

#[test]
fn mismatched_lengths_are_rejected() {
    let err = Trie::build(&[trip(0, &[1, 2]), trip(1, &[1])]).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
    let mut trie = Trie::build(&[trip(0, &[1, 2])]).unwrap();
    assert!(trie.insert(&trip(1, &[1, 2, 3])).is_err());
    assert_eq!(trie.num_trips(), 1);
}
