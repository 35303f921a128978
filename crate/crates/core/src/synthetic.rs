//! Seeded synthetic trip corpora.
//!
//! Trips are lazy random walks on a grid: each starts at one of a few hubs
//! (popular hubs are picked more often), then at every step either dwells or
//! moves to a 4-neighbour cell. That gives corpora with shared prefixes near
//! the root and quickly diverging tails, like real pickups. The generator is
//! ChaCha8 seeded from a `u64`, so a seed fixes the corpus on every platform.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::Symbol;
use crate::ingest::TripString;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    pub n_rows: u32,
    pub n_cols: u32,
    pub hubs: u32,
    /// Probability of staying in the same cell for one step.
    pub dwell: f64,
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams {
            n_rows: 20,
            n_cols: 20,
            hubs: 8,
            dwell: 0.3,
            min_len: 1,
            max_len: 30,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` unpadded trip strings with ids `0..n`.
pub fn random_walks(n: usize, params: &WalkParams, rng: &mut impl Rng) -> Vec<TripString> {
    assert!(params.n_rows > 0 && params.n_cols > 0 && params.hubs > 0);
    assert!(params.min_len >= 1 && params.min_len <= params.max_len);
    let cells = params.n_rows * params.n_cols;
    let hubs: Vec<(u32, u32)> = (0..params.hubs)
        .map(|_| {
            (
                rng.gen_range(0..params.n_rows),
                rng.gen_range(0..params.n_cols),
            )
        })
        .collect();
    // hub h is picked with weight 1 / (h + 1)
    let weights: Vec<f64> = (0..hubs.len()).map(|h| 1.0 / (h as f64 + 1.0)).collect();
    let total: f64 = weights.iter().sum();

    (0..n)
        .map(|trip| {
            let mut pick = rng.gen::<f64>() * total;
            let mut hub = hubs.len() - 1;
            for (h, w) in weights.iter().enumerate() {
                if pick < *w {
                    hub = h;
                    break;
                }
                pick -= w;
            }
            let (mut row, mut col) = hubs[hub];
            let len = rng.gen_range(params.min_len..=params.max_len);
            let mut symbols = Vec::with_capacity(len);
            for step in 0..len {
                if step > 0 && !rng.gen_bool(params.dwell) {
                    match rng.gen_range(0..4) {
                        0 => row = (row + 1).min(params.n_rows - 1),
                        1 => row = row.saturating_sub(1),
                        2 => col = (col + 1).min(params.n_cols - 1),
                        _ => col = col.saturating_sub(1),
                    }
                }
                let id = row * params.n_cols + col + 1;
                debug_assert!(id <= cells);
                symbols.push(Symbol::region(id));
            }
            TripString {
                trip_id: trip as u64,
                t_r: 60,
                symbols,
            }
        })
        .collect()
}

/// Uniform strings of exactly `len` symbols over regions `1..=alphabet`.
pub fn uniform_strings(n: usize, len: usize, alphabet: u32, rng: &mut impl Rng) -> Vec<TripString> {
    (0..n)
        .map(|trip| TripString {
            trip_id: trip as u64,
            t_r: 60,
            symbols: (0..len)
                .map(|_| Symbol::region(rng.gen_range(1..=alphabet)))
                .collect(),
        })
        .collect()
}

/// `size` distinct indices out of `0..n`, ascending.
pub fn sample_indices(n: usize, size: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut picked = index::sample(rng, n, size.min(n)).into_vec();
    picked.sort_unstable();
    picked
}
