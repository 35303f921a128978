//! Shared inputs for the benchmarks.

use triptrie::ingest::pad_strings;
use triptrie::synthetic::{random_walks, rng, WalkParams};
use triptrie::TripString;

/// `n` padded random walks of up to 30 steps on a 100 x 100 grid.
pub fn corpus(n: usize, seed: u64) -> Vec<TripString> {
    let params = WalkParams {
        n_rows: 100,
        n_cols: 100,
        hubs: 50,
        ..WalkParams::default()
    };
    let walks = random_walks(n, &params, &mut rng(seed));
    pad_strings(walks).expect("walks are non-empty").0
}
