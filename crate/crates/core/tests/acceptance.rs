//! Acceptance suite. Runs every criterion in sequence (timings are measured,
//! so nothing runs in parallel), prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.
//!
//! The dataset criterion needs the cabspotting traces; point
//! `TRIPTRIE_CABSPOTTING_DIR` at the directory of `new_*.txt` files to run it.
//! `TRIPTRIE_ACCEPTANCE_ONLY` takes a comma-separated list of criterion numbers.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use rand::Rng;

use common::{hamming_u128, levenshtein_oracle, syms, trip};
use triptrie::corpus::extract_all;
use triptrie::ingest::{
    encode_trip, filter_by_duration, pad_strings, parse_trace_file, resample_trip, ParsedTrace,
};
use triptrie::macro_cluster::{macro_cluster, micro_clusters, MacroMethod, MicroCluster};
use triptrie::oracle::{partitions_equal_up_to_relabeling, verify_equivalence, VerifyOptions};
use triptrie::synthetic::{self, WalkParams};
use triptrie::{
    levenshtein, shared_prefix_len, weighted_hamming, BoundingBox, Distance, Grid, Symbol, Trie,
    TripString,
};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn walk_corpus(n: usize, max_len: usize, seed: u64) -> Vec<TripString> {
    let params = WalkParams {
        max_len,
        ..WalkParams::default()
    };
    pad_strings(synthetic::random_walks(
        n,
        &params,
        &mut synthetic::rng(seed),
    ))
    .unwrap()
    .0
}

fn random_string(
    rng: &mut impl Rng,
    lens: std::ops::RangeInclusive<usize>,
    alphabet: i32,
) -> Vec<Symbol> {
    let len = rng.gen_range(lens);
    syms(
        &(0..len)
            .map(|_| rng.gen_range(1..=alphabet))
            .collect::<Vec<_>>(),
    )
}

fn trie_vs_oracle() -> Outcome {
    let pool = walk_corpus(20_000, 30, 2024);
    let uniform = {
        let mut rng = synthetic::rng(77);
        let mut s = synthetic::uniform_strings(5_000, 12, 3, &mut rng);
        // a few exact duplicates so ties occur at distance zero
        let dups: Vec<TripString> = s[..200].to_vec();
        s.extend(dups);
        s
    };
    let mut rng = synthetic::rng(1);
    let mut failures = Vec::new();
    let mut slowest = Duration::ZERO;
    for sample in 0..10 {
        let source = if sample % 2 == 0 { &pool } else { &uniform };
        let picked = synthetic::sample_indices(source.len(), 1000, &mut rng);
        let strings: Vec<TripString> = picked.iter().map(|&i| source[i].clone()).collect();
        let start = Instant::now();
        let trie = Trie::build(&strings).unwrap();
        let report = verify_equivalence(&trie, &strings, VerifyOptions::default()).unwrap();
        slowest = slowest.max(start.elapsed());
        if !report.all_equal() || report.levels.len() < report.len + 1 {
            failures.push(sample);
        }
    }
    check(
        failures.is_empty() && slowest < Duration::from_secs(60),
        format!("10 samples of 1000, failing samples {failures:?}, slowest {slowest:.2?}"),
    )
}

fn metric_axioms() -> Outcome {
    let mut rng = synthetic::rng(2);
    let mut violations = 0usize;
    let triples = 100_000;
    for _ in 0..triples {
        let l = rng.gen_range(0..=20);
        let a = random_string(&mut rng, l..=l, 3);
        let b = random_string(&mut rng, l..=l, 3);
        let c = if rng.gen_bool(0.1) {
            a.clone()
        } else {
            random_string(&mut rng, l..=l, 3)
        };
        let ab = weighted_hamming(&a, &b).unwrap();
        let ba = weighted_hamming(&b, &a).unwrap();
        let bc = weighted_hamming(&b, &c).unwrap();
        let ac = weighted_hamming(&a, &c).unwrap();
        let aa = weighted_hamming(&a, &a).unwrap();
        let ok = ab == ba
            && aa.is_zero()
            && (ab.is_zero() == (a == b))
            && ac <= &ab + &bc
            && ab.to_u64().map(u128::from) == Some(hamming_u128(&a, &b));
        violations += usize::from(!ok);
    }
    check(
        violations == 0,
        format!("{triples} triples, {violations} violations"),
    )
}

fn prefix_threshold() -> Outcome {
    let mut violations = 0usize;
    let mut pairs = 0usize;
    for l in 0..=6usize {
        let all: Vec<Vec<Symbol>> = (0..3usize.pow(l as u32))
            .map(|mut code| {
                let ids: Vec<i32> = (0..l)
                    .map(|_| {
                        let d = code % 3;
                        code /= 3;
                        d as i32 + 1
                    })
                    .collect();
                syms(&ids)
            })
            .collect();
        for a in &all {
            for b in &all {
                pairs += 1;
                let shared = shared_prefix_len(a, b).unwrap();
                let d = weighted_hamming(a, b).unwrap();
                for p in 0..=l {
                    if (shared >= p) != (d < Distance::pow2(l - p)) {
                        violations += 1;
                    }
                }
            }
        }
    }
    check(
        violations == 0,
        format!("{pairs} pairs, {violations} violations"),
    )
}

fn refinement() -> Outcome {
    let mut corpora = vec![
        vec![
            trip(0, &[1, 2, -1]),
            trip(1, &[1, 2, 3]),
            trip(2, &[1, 3, 3]),
            trip(3, &[2, 2, 2]),
        ],
        walk_corpus(3_000, 30, 5),
        walk_corpus(500, 8, 6),
    ];
    corpora.push(synthetic::uniform_strings(
        2_000,
        10,
        2,
        &mut synthetic::rng(7),
    ));
    let mut broken = 0usize;
    let mut checked = 0usize;
    for strings in &corpora {
        let trie = Trie::build(strings).unwrap();
        for level in 0..=trie.len() {
            checked += 1;
            if !trie
                .level_partition(level)
                .refines(&trie.level_partition(level + 1))
            {
                broken += 1;
            }
        }
    }
    check(
        broken == 0,
        format!(
            "{} tries, {checked} level pairs, {broken} broken",
            corpora.len()
        ),
    )
}

fn build_time(strings: &[TripString]) -> Duration {
    let start = Instant::now();
    let trie = Trie::build(strings).unwrap();
    let took = start.elapsed();
    assert_eq!(trie.num_trips(), strings.len());
    took
}

fn linear_scaling() -> Outcome {
    let params = WalkParams {
        n_rows: 100,
        n_cols: 100,
        hubs: 200,
        min_len: 30,
        max_len: 30,
        ..WalkParams::default()
    };
    let sizes = [50_000usize, 100_000, 200_000];
    let corpora: Vec<Vec<TripString>> = sizes
        .iter()
        .map(|&n| synthetic::random_walks(n, &params, &mut synthetic::rng(n as u64)))
        .collect();
    // one untimed build of the largest corpus maps in the memory, then the
    // sizes take turns so that background load hits them alike
    build_time(&corpora[2]);
    let mut times = vec![Duration::MAX; sizes.len()];
    for _ in 0..7 {
        for (best, strings) in times.iter_mut().zip(&corpora) {
            *best = (*best).min(build_time(strings));
        }
    }
    drop(corpora);
    let ratios: Vec<f64> = times
        .windows(2)
        .map(|w| w[1].as_secs_f64() / w[0].as_secs_f64())
        .collect();

    let big = synthetic::random_walks(430_000, &params, &mut synthetic::rng(430));
    let big_time = build_time(&big);
    drop(big);

    check(
        ratios.iter().all(|&r| r <= 2.5) && big_time < Duration::from_secs(600),
        format!(
            "build at 50k/100k/200k: {:.2?} {:.2?} {:.2?}, ratios {:.2} {:.2}, 430k x 30 in {big_time:.2?}",
            times[0], times[1], times[2], ratios[0], ratios[1]
        ),
    )
}

fn insert_matches_batch() -> Outcome {
    let mut rng = synthetic::rng(6);
    let mut mismatched = 0usize;
    for corpus in 0..100u64 {
        let n = rng.gen_range(1..=500);
        let params = WalkParams {
            n_rows: rng.gen_range(1..=6),
            n_cols: rng.gen_range(1..=6),
            hubs: rng.gen_range(1..=4),
            max_len: rng.gen_range(1..=15),
            ..WalkParams::default()
        };
        let strings = pad_strings(synthetic::random_walks(
            n,
            &params,
            &mut synthetic::rng(corpus),
        ))
        .unwrap()
        .0;
        let split = rng.gen_range(0..=n);
        let batch = Trie::build(&strings).unwrap();
        let mut grown = Trie::build(&strings[..split]).unwrap();
        for s in &strings[split..] {
            grown.insert(s).unwrap();
        }
        let same = grown.len() == batch.len()
            && grown.num_nodes() == batch.num_nodes()
            && (0..=batch.len() + 1).all(|level| {
                partitions_equal_up_to_relabeling(
                    grown.level_partition(level).labels(),
                    batch.level_partition(level).labels(),
                )
                .unwrap()
            });
        mismatched += usize::from(!same);
    }
    check(
        mismatched == 0,
        format!("100 corpora, {mismatched} mismatched"),
    )
}

fn levenshtein_agreement() -> Outcome {
    let fixture = levenshtein(&syms(&[1, 2, 3, 4]), &syms(&[2, 2, 3, 4]));
    let mut rng = synthetic::rng(7);
    let mut disagreements = 0usize;
    for _ in 0..10_000 {
        let mut a = random_string(&mut rng, 0..=8, 4);
        let b = random_string(&mut rng, 0..=8, 4);
        a.resize(a.len() + rng.gen_range(0..3), Symbol::NULL_PAD);
        disagreements += usize::from(levenshtein(&a, &b) != levenshtein_oracle(&a, &b));
    }
    check(
        fixture == 1 && disagreements == 0,
        format!("fixture distance {fixture}, 10000 pairs, {disagreements} disagreements"),
    )
}

fn grid_fixture() -> Outcome {
    // Six columns, four rows of unit cells. Region ids count rows from the
    // bottom; the figure numbers them from the top, which top_down_label maps.
    let grid = Grid::new(BoundingBox::new(0.0, 0.0, 6.0, 4.0), 4, 6).unwrap();
    let path = [
        (2.5, 2.5),
        (3.5, 2.5),
        (3.5, 1.5),
        (2.5, 1.5),
        (2.5, 0.5),
        (1.5, 0.5),
    ];
    let encoded = encode_trip(&grid, &path, 0, 60).unwrap();
    let labels: Vec<u32> = encoded
        .symbols
        .iter()
        .map(|&z| grid.top_down_label(z).unwrap())
        .collect();
    check(
        labels == [9, 10, 16, 15, 21, 20],
        format!("top-down labels {labels:?}"),
    )
}

fn independent_diameters(micros: &[MicroCluster], labels: &[u32]) -> usize {
    let mut worst = 0;
    for i in 0..micros.len() {
        for j in i + 1..micros.len() {
            if labels[i] == labels[j] {
                worst = worst.max(levenshtein_oracle(
                    &micros[i].representative,
                    &micros[j].representative,
                ));
            }
        }
    }
    worst
}

fn macro_diameters() -> Outcome {
    let mut rng = synthetic::rng(9);
    let mut violations = 0usize;
    for set in 0..100u64 {
        let micros: Vec<MicroCluster> = if set % 2 == 0 {
            (0..rng.gen_range(1..=40))
                .map(|i| MicroCluster {
                    node: i,
                    representative: random_string(&mut rng, 0..=7, 3),
                    weight: rng.gen_range(1..=5),
                })
                .collect()
        } else {
            let params = WalkParams {
                n_rows: 4,
                n_cols: 4,
                hubs: 3,
                max_len: 12,
                ..WalkParams::default()
            };
            let strings = pad_strings(synthetic::random_walks(
                150,
                &params,
                &mut synthetic::rng(set),
            ))
            .unwrap()
            .0;
            let trie = Trie::build(&strings).unwrap();
            let level = rng.gen_range(1..=trie.len());
            micro_clusters(&trie, level).unwrap()
        };
        let q = rng.gen_range(0..=4);
        for method in [MacroMethod::CompleteLinkage, MacroMethod::Greedy] {
            let mc = macro_cluster(&micros, q, method);
            let covered = mc
                .labels
                .iter()
                .all(|&l| l >= 1 && l as usize <= mc.num_clusters());
            if !covered || independent_diameters(&micros, &mc.labels) > q {
                violations += 1;
            }
        }
    }
    check(
        violations == 0,
        format!("100 sets x 2 methods, {violations} violations"),
    )
}

fn dataset_scale() -> Outcome {
    let Some(dir) = std::env::var_os("TRIPTRIE_CABSPOTTING_DIR") else {
        return Outcome::Skip("TRIPTRIE_CABSPOTTING_DIR not set; taxi traces not available".into());
    };
    let dir = Path::new(&dir);
    let mut traces: Vec<(String, ParsedTrace)> = Vec::new();
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) => return Outcome::Fail(format!("cannot read {}: {e}", dir.display())),
    };
    for entry in entries.flatten() {
        let name = entry.file_name().to_string_lossy().into_owned();
        let Some(taxi) = name
            .strip_prefix("new_")
            .and_then(|s| s.strip_suffix(".txt"))
        else {
            continue;
        };
        match parse_trace_file(&entry.path(), taxi) {
            Ok(parsed) => traces.push((taxi.to_string(), parsed)),
            Err(e) => return Outcome::Fail(format!("{name}: {e}")),
        }
    }
    let trips = extract_all(&traces);
    let extracted = trips.len();
    let (kept, report) = filter_by_duration(trips, 30.0);
    // every kept trip must also resample cleanly
    let resampled = kept.iter().filter(|t| resample_trip(t, 60).is_ok()).count();
    let count_ok = (extracted as f64 - 438_145.0).abs() <= 0.02 * 438_145.0;
    let fraction_ok = (report.kept_fraction() - 0.983).abs() <= 0.005;
    check(
        count_ok && fraction_ok && resampled == kept.len(),
        format!(
            "{} taxis, {extracted} trips, {:.2}% within 30 minutes",
            traces.len(),
            100.0 * report.kept_fraction()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        (
            "trie levels equal single-linkage partitions",
            trie_vs_oracle,
        ),
        ("weighted Hamming distance is a metric", metric_axioms),
        (
            "shared prefix length matches distance thresholds",
            prefix_threshold,
        ),
        ("each level refines the next", refinement),
        ("trie build scales linearly", linear_scaling),
        (
            "incremental insertion matches batch build",
            insert_matches_batch,
        ),
        (
            "edit distance fixture and reference agreement",
            levenshtein_agreement,
        ),
        ("grid encoding fixture", grid_fixture),
        ("macro-cluster diameters within bound", macro_diameters),
        ("taxi dataset trip counts", dataset_scale),
    ];
    // TRIPTRIE_ACCEPTANCE_ONLY=5,7 runs a subset
    let only: Option<Vec<usize>> = std::env::var("TRIPTRIE_ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|c| c.trim().parse().ok()).collect());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.as_ref().is_some_and(|o| !o.contains(&(i + 1))) {
            continue;
        }
        let start = Instant::now();
        let (status, detail) = match run() {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!(
            "criterion {:>2} {status}: {name} ({detail}) [{:.2?}]",
            i + 1,
            start.elapsed()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
