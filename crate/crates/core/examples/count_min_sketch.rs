//! Count-Min Sketch estimates against exact counts.
//!
//! cargo run --example count_min_sketch

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ztedge::sketch::DEFAULT_EXT_SEEDS;
use ztedge::CountMinSketch;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for width in [64usize, 512, 4096] {
        let mut cms = CountMinSketch::new(width, DEFAULT_EXT_SEEDS).expect("power-of-two width");
        let mut exact: HashMap<u32, u32> = HashMap::new();
        for _ in 0..50_000 {
            // Heavy hitter 0..10, long tail up to 2000.
            let key: u32 = if rng.random_bool(0.5) { rng.random_range(0..10) } else { rng.random_range(0..2000) };
            cms.increment(&key.to_be_bytes());
            *exact.entry(key).or_default() += 1;
        }
        let mut max_err = 0;
        let mut exact_keys = 0;
        for (k, n) in &exact {
            let err = cms.estimate(&k.to_be_bytes()) - n;
            max_err = max_err.max(err);
            exact_keys += usize::from(err == 0);
        }
        println!("w={width:<5} keys={} exact={exact_keys:<5} max overcount={max_err}", exact.len());
    }
}
