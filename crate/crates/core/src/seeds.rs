//! Master-seed fan-out into independent sub-streams.

use serde::{Deserialize, Serialize};

/// Sub-seeds derived from one master seed by fixed offsets.
///
/// Each consumer owns its own stream, so e.g. changing the evaluation sample
/// count never perturbs training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubSeeds {
    pub data: u64,
    pub generator_init: u64,
    pub discriminator_init: u64,
    pub noise: u64,
    pub eval: u64,
}

impl SubSeeds {
    pub fn from_master(master: u64) -> Self {
        Self {
            data: master.wrapping_add(1),
            generator_init: master.wrapping_add(2),
            discriminator_init: master.wrapping_add(3),
            noise: master.wrapping_add(4),
            eval: master.wrapping_add(5),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sub_seeds_are_distinct() {
        let s = SubSeeds::from_master(u64::MAX);
        let all = [s.data, s.generator_init, s.discriminator_init, s.noise, s.eval];
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                assert_ne!(all[i], all[j]);
            }
        }
    }
}
