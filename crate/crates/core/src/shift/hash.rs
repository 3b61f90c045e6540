//! Coordinate hashing and seed splitting.
//!
//! The mixer is the SplitMix64 finalizer. A coordinate hash absorbs the
//! seed, then the canonical element bytes in little-endian 8-byte blocks
//! (zero padded), then the byte length.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer: a bijective 64-bit avalanche mix.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash of `(seed ‖ bytes)`.
pub fn coordinate_hash(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = mix64(seed.wrapping_add(GOLDEN));
    for chunk in bytes.chunks(8) {
        let mut block = [0u8; 8];
        block[..chunk.len()].copy_from_slice(chunk);
        h = mix64(h.wrapping_add(GOLDEN) ^ u64::from_le_bytes(block));
    }
    mix64(h ^ bytes.len() as u64)
}

/// Child seed number `stream` of `seed`. Distinct streams give unrelated seeds.
pub fn split_seed(seed: u64, stream: u64) -> u64 {
    mix64(mix64(seed ^ 0x5851_f42d_4c95_7f2d).wrapping_add(mix64(stream.wrapping_add(GOLDEN))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn avalanche() {
        // Flipping any single input bit flips about half of the output bits.
        let mut total = 0u64;
        let mut trials = 0u64;
        for s in 0..64u64 {
            let bytes = s.to_le_bytes();
            let base = coordinate_hash(7, &bytes);
            for bit in 0..64 {
                let flipped = (s ^ (1 << bit)).to_le_bytes();
                total += (coordinate_hash(7, &flipped) ^ base).count_ones() as u64;
                trials += 1;
            }
            for bit in 0..64 {
                total += (coordinate_hash(7 ^ (1 << bit), &bytes) ^ base).count_ones() as u64;
                trials += 1;
            }
        }
        let mean = total as f64 / trials as f64;
        assert!((mean - 32.0).abs() < 1.0, "mean flipped bits {mean}");
    }

    #[test]
    fn length_is_absorbed() {
        assert_ne!(coordinate_hash(1, &[0]), coordinate_hash(1, &[0, 0]));
        assert_ne!(coordinate_hash(1, &[]), coordinate_hash(1, &[0]));
    }

    #[test]
    fn streams_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| split_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(split_seed(1, 2), split_seed(2, 1));
    }
}
