//! Approximate counting and membership: a depth-3 Count-Min Sketch and a
//! three-bitmap Bloom filter.
//!
//! Both structures index their rows with XXH64 under a per-row seed, masked
//! down to a power-of-two width. XXH64 is stable across platforms, so fixed
//! seeds give bit-identical indices everywhere.

use xxhash_rust::xxh64::xxh64;

/// Rows per sketch and bitmaps per filter.
pub const DEPTH: usize = 3;

pub const DEFAULT_CMS_WIDTH: usize = 4096;
pub const DEFAULT_BLOOM_BITS: usize = 65536;

pub const DEFAULT_EXT_SEEDS: [u64; DEPTH] = [0x9e37_79b9_7f4a_7c15, 0xc2b2_ae3d_27d4_eb4f, 0x1656_67b1_9e37_79f9];
pub const DEFAULT_INT_SEEDS: [u64; DEPTH] = [0x85eb_ca77_c2b2_ae63, 0x27d4_eb2f_1656_67c5, 0x94d0_49bb_1331_11eb];
pub const DEFAULT_BLOOM_SEEDS: [u64; DEPTH] = [0xbf58_476d_1ce4_e5b9, 0x6a09_e667_f3bc_c908, 0xbb67_ae85_84ca_a73b];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SketchError {
    #[error("width {0} must be a nonzero power of two")]
    Width(usize),
    #[error("row seeds must be pairwise distinct")]
    DuplicateSeeds,
}

/// Seeded 64-bit row hash.
pub fn hash_row(seed: u64, key: &[u8]) -> u64 {
    xxh64(key, seed)
}

fn check_params(width: usize, seeds: &[u64; DEPTH]) -> Result<(), SketchError> {
    if width == 0 || !width.is_power_of_two() {
        return Err(SketchError::Width(width));
    }
    if seeds[0] == seeds[1] || seeds[0] == seeds[2] || seeds[1] == seeds[2] {
        return Err(SketchError::DuplicateSeeds);
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CountMinSketch {
    width: usize,
    seeds: [u64; DEPTH],
    counters: Vec<u32>,
    generation: u64,
    increments: u64,
}

impl CountMinSketch {
    pub fn new(width: usize, seeds: [u64; DEPTH]) -> Result<Self, SketchError> {
        check_params(width, &seeds)?;
        Ok(CountMinSketch { width, seeds, counters: vec![0; width * DEPTH], generation: 0, increments: 0 })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn seeds(&self) -> [u64; DEPTH] {
        self.seeds
    }

    /// Window generation; bumped on every reset.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Lifetime number of `increment` calls, unaffected by resets.
    pub fn total_increments(&self) -> u64 {
        self.increments
    }

    /// Flat counter indices (row-major) addressed by `key`.
    pub fn cells(&self, key: &[u8]) -> [usize; DEPTH] {
        let m = (self.width - 1) as u64;
        std::array::from_fn(|row| row * self.width + (hash_row(self.seeds[row], key) & m) as usize)
    }

    pub fn increment(&mut self, key: &[u8]) {
        for cell in self.cells(key) {
            self.counters[cell] = self.counters[cell].saturating_add(1);
        }
        self.increments += 1;
    }

    /// Minimum over the key's three counters.
    pub fn estimate(&self, key: &[u8]) -> u32 {
        self.cells(key).iter().map(|&c| self.counters[c]).min().unwrap_or(0)
    }

    pub fn reset(&mut self) {
        self.counters.fill(0);
        self.generation += 1;
    }

    /// Sum of all counters across all rows.
    pub fn counter_sum(&self) -> u64 {
        self.counters.iter().map(|&c| u64::from(c)).sum()
    }
}

#[derive(Debug, Clone)]
pub struct BloomFilter {
    bits_per_map: usize,
    seeds: [u64; DEPTH],
    words: Vec<u64>,
}

impl BloomFilter {
    pub fn new(bits_per_map: usize, seeds: [u64; DEPTH]) -> Result<Self, SketchError> {
        check_params(bits_per_map, &seeds)?;
        let words_per_map = bits_per_map.div_ceil(64);
        Ok(BloomFilter { bits_per_map, seeds, words: vec![0; words_per_map * DEPTH] })
    }

    fn bit_positions(&self, key: &[u8]) -> [usize; DEPTH] {
        let m = (self.bits_per_map - 1) as u64;
        let words_per_map = self.bits_per_map.div_ceil(64);
        std::array::from_fn(|map| map * words_per_map * 64 + (hash_row(self.seeds[map], key) & m) as usize)
    }

    pub fn insert(&mut self, key: &[u8]) {
        for pos in self.bit_positions(key) {
            self.words[pos / 64] |= 1 << (pos % 64);
        }
    }

    /// True iff all three bitmaps have the key's bit set.
    pub fn check(&self, key: &[u8]) -> bool {
        self.bit_positions(key).iter().all(|&pos| self.words[pos / 64] & (1 << (pos % 64)) != 0)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn xxh64_reference_vectors() {
        assert_eq!(hash_row(0, b""), 0xef46_db37_51d8_e999);
        assert_eq!(hash_row(0, b"a"), 0xd24e_c4f1_a98c_6e5b);
        assert_eq!(hash_row(0, b"abc"), 0x44bc_2cf5_ad77_0999);
    }

    #[test]
    fn hash_is_deterministic_and_seeded() {
        assert_eq!(hash_row(7, b"key"), hash_row(7, b"key"));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let differs = (0..100).any(|_| {
            let k: [u8; 16] = rng.random();
            hash_row(1, &k) != hash_row(2, &k)
        });
        assert!(differs);
        let _ = hash_row(DEFAULT_EXT_SEEDS[0], &[]);
    }

    #[test]
    fn rejects_bad_params() {
        assert_eq!(CountMinSketch::new(1000, DEFAULT_EXT_SEEDS).unwrap_err(), SketchError::Width(1000));
        assert_eq!(CountMinSketch::new(0, DEFAULT_EXT_SEEDS).unwrap_err(), SketchError::Width(0));
        assert_eq!(CountMinSketch::new(64, [1, 1, 2]).unwrap_err(), SketchError::DuplicateSeeds);
        assert!(BloomFilter::new(100, DEFAULT_BLOOM_SEEDS).is_err());
    }

    #[test]
    fn increment_and_estimate() {
        let mut cms = CountMinSketch::new(DEFAULT_CMS_WIDTH, DEFAULT_EXT_SEEDS).unwrap();
        assert_eq!(cms.estimate(b"k"), 0);
        cms.increment(b"k");
        assert_eq!(cms.estimate(b"k"), 1);
        for _ in 1..100 {
            cms.increment(b"k");
        }
        assert_eq!(cms.estimate(b"k"), 100);
        assert_eq!(cms.total_increments(), 100);
    }

    #[test]
    fn estimate_is_minimum_cell() {
        let mut cms = CountMinSketch::new(64, DEFAULT_EXT_SEEDS).unwrap();
        let cells = cms.cells(b"k");
        for (cell, v) in cells.iter().zip([5u32, 3, 9]) {
            cms.counters[*cell] = v;
        }
        assert_eq!(cms.estimate(b"k"), 3);
    }

    #[test]
    fn narrow_sketch_never_undercounts() {
        let mut cms = CountMinSketch::new(64, DEFAULT_EXT_SEEDS).unwrap();
        for i in 0u32..1000 {
            cms.increment(&i.to_be_bytes());
        }
        for i in 0u32..1000 {
            assert!(cms.estimate(&i.to_be_bytes()) >= 1);
        }
    }

    #[test]
    fn random_workload_vs_exact_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut cms = CountMinSketch::new(256, DEFAULT_INT_SEEDS).unwrap();
        let mut exact: HashMap<u32, u32> = HashMap::new();
        for _ in 0..20_000 {
            let k: u32 = rng.random_range(0..2000);
            cms.increment(&k.to_be_bytes());
            *exact.entry(k).or_default() += 1;
        }
        for (k, n) in exact {
            assert!(cms.estimate(&k.to_be_bytes()) >= n);
        }
    }

    #[test]
    fn counters_saturate() {
        let mut cms = CountMinSketch::new(64, DEFAULT_EXT_SEEDS).unwrap();
        for cell in cms.cells(b"k") {
            cms.counters[cell] = u32::MAX - 1;
        }
        cms.increment(b"k");
        cms.increment(b"k");
        assert_eq!(cms.estimate(b"k"), u32::MAX);
    }

    #[test]
    fn reset_semantics() {
        let mut cms = CountMinSketch::new(64, DEFAULT_EXT_SEEDS).unwrap();
        cms.increment(b"k");
        cms.reset();
        assert_eq!(cms.estimate(b"k"), 0);
        assert_eq!(cms.counter_sum(), 0);
        assert_eq!(cms.generation(), 1);
        cms.reset();
        assert_eq!(cms.counter_sum(), 0);
        assert_eq!(cms.generation(), 2);
        assert_eq!(cms.total_increments(), 1);
    }

    #[test]
    fn bloom_basics() {
        let mut bf = BloomFilter::new(DEFAULT_BLOOM_BITS, DEFAULT_BLOOM_SEEDS).unwrap();
        assert!(!bf.check(b"k"));
        bf.insert(b"k");
        assert!(bf.check(b"k"));
    }

    #[test]
    fn bloom_false_positive_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut bf = BloomFilter::new(DEFAULT_BLOOM_BITS, DEFAULT_BLOOM_SEEDS).unwrap();
        let inserted: Vec<[u8; 16]> = (0..100).map(|_| rng.random()).collect();
        for k in &inserted {
            bf.insert(k);
        }
        assert!(inserted.iter().all(|k| bf.check(k)));
        let fp = (0..10_000)
            .map(|_| rng.random::<[u8; 16]>())
            .filter(|k| !inserted.contains(k) && bf.check(k))
            .count();
        assert!((fp as f64) / 10_000.0 < 0.01, "false positives: {fp}");
    }
}
