//! Seed-to-stream mapping.
//!
//! Every seeded stream in this crate is ChaCha20 (RFC 8439 block function, as
//! implemented by `rand_chacha`) keyed with the 64-bit seed in little-endian
//! order in the first 8 key bytes and zeros in the remaining 24, stream 0,
//! word position 0. This mapping is frozen: stored seeds regenerate the same
//! matrices, codewords and salts on any build.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub fn seeded(seed: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    ChaCha20Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn stream_is_frozen() {
        // First output word of ChaCha20 with an all-zero key and nonce
        // (RFC 8439 / draft-agl test vector: 76 b8 e0 ad ...).
        let mut rng = seeded(0);
        assert_eq!(rng.next_u32(), 0xade0b876);
        assert_ne!(seeded(1).next_u64(), seeded(0).next_u64());
    }
}
