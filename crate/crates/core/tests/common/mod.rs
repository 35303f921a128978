#![allow(dead_code)]

use std::collections::HashMap;

use triptrie::{Symbol, TripString};

pub fn syms(ids: &[i32]) -> Vec<Symbol> {
    ids.iter().map(|&i| Symbol::from_raw(i).unwrap()).collect()
}

pub fn trip(id: u64, ids: &[i32]) -> TripString {
    TripString {
        trip_id: id,
        t_r: 60,
        symbols: syms(ids),
    }
}

/// Weighted Hamming distance as a plain integer, for strings up to 127 long.
pub fn hamming_u128(a: &[Symbol], b: &[Symbol]) -> u128 {
    assert_eq!(a.len(), b.len());
    let l = a.len();
    (1..=l)
        .filter(|&i| a[i - 1] != b[i - 1])
        .map(|i| 1u128 << (l - i))
        .sum()
}

fn trim(s: &[Symbol]) -> &[Symbol] {
    let mut end = s.len();
    while end > 0 && s[end - 1].is_null_pad() {
        end -= 1;
    }
    &s[..end]
}

/// Edit distance by the textbook recursion with memoization on suffix pairs.
pub fn levenshtein_oracle(a: &[Symbol], b: &[Symbol]) -> usize {
    fn go(a: &[Symbol], b: &[Symbol], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        if let Some(&v) = memo.get(&(a.len(), b.len())) {
            return v;
        }
        let v = if a[0] == b[0] {
            go(&a[1..], &b[1..], memo)
        } else {
            1 + go(&a[1..], b, memo)
                .min(go(a, &b[1..], memo))
                .min(go(&a[1..], &b[1..], memo))
        };
        memo.insert((a.len(), b.len()), v);
        v
    }
    go(trim(a), trim(b), &mut HashMap::new())
}

/// Single linkage by repeated pairwise merging: while two clusters have a
/// cross pair within `threshold`, merge them. Returns a canonical labeling
/// (first occurrence order, starting at 1).
pub fn naive_single_linkage(strings: &[TripString], threshold: u128) -> Vec<u32> {
    let mut clusters: Vec<Vec<usize>> = (0..strings.len()).map(|i| vec![i]).collect();
    loop {
        let mut merge = None;
        'search: for x in 0..clusters.len() {
            for y in x + 1..clusters.len() {
                for &i in &clusters[x] {
                    for &j in &clusters[y] {
                        if hamming_u128(&strings[i].symbols, &strings[j].symbols) <= threshold {
                            merge = Some((x, y));
                            break 'search;
                        }
                    }
                }
            }
        }
        let Some((x, y)) = merge else { break };
        let moved = clusters.remove(y);
        clusters[x].extend(moved);
    }
    let mut owner = vec![0usize; strings.len()];
    for (c, members) in clusters.iter().enumerate() {
        for &m in members {
            owner[m] = c;
        }
    }
    canonical(&owner)
}

pub fn canonical<T: Eq + std::hash::Hash + Copy>(keys: &[T]) -> Vec<u32> {
    let mut seen = HashMap::new();
    keys.iter()
        .map(|k| {
            let next = seen.len() as u32 + 1;
            *seen.entry(*k).or_insert(next)
        })
        .collect()
}
