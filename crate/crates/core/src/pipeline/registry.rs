//! Seeded target registry: slot `i` holds the `i`-th distinct target drawn
//! from the registry stream, so distinct slots always hold distinct codewords.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bch::CodeParams;
use crate::bits::BitString;
use crate::rng::seeded;

use super::cohort::random_target;
use super::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetRegistry {
    pub seed: u64,
}

impl TargetRegistry {
    pub fn new(seed: u64) -> Self {
        TargetRegistry { seed }
    }

    /// Number of distinct targets: `2^(blocks * k_msg)`, saturating.
    pub fn capacity(code: &CodeParams, blocks: usize) -> u64 {
        let bits = code.k_msg() * blocks;
        if bits >= 64 {
            u64::MAX
        } else {
            1u64 << bits
        }
    }

    pub fn target_at(&self, code: &CodeParams, blocks: usize, slot: u64) -> Result<BitString, PipelineError> {
        let capacity = Self::capacity(code, blocks);
        if slot >= capacity {
            return Err(PipelineError::RegistryFull { capacity });
        }
        let mut rng = seeded(self.seed);
        let mut seen = HashSet::new();
        loop {
            let t = random_target(code, blocks, &mut rng);
            if seen.insert(t.clone()) && seen.len() as u64 == slot + 1 {
                return Ok(t);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bch::build_code;

    #[test]
    fn slots_are_distinct_until_capacity() {
        let code = build_code(3, 1).unwrap();
        let reg = TargetRegistry::new(4);
        let all: HashSet<_> = (0..16).map(|s| reg.target_at(&code, 1, s).unwrap()).collect();
        assert_eq!(all.len(), 16);
        assert!(matches!(
            reg.target_at(&code, 1, 16),
            Err(PipelineError::RegistryFull { capacity: 16 })
        ));
        assert_eq!(
            reg.target_at(&code, 1, 3).unwrap(),
            reg.target_at(&code, 1, 3).unwrap()
        );
    }

    #[test]
    fn multi_block_targets_are_blockwise_codewords() {
        let code = build_code(4, 2).unwrap();
        let t = TargetRegistry::new(1).target_at(&code, 3, 5).unwrap();
        assert_eq!(t.len(), 45);
        for block in t.chunks(15) {
            assert!(code.is_codeword(&block).unwrap());
        }
    }
}
