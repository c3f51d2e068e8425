//! Per-stage seed derivation.
//!
//! Every randomized stage draws its seed from the master seed and a stage
//! tag, so any stage can be reproduced in isolation:
//!
//! ```text
//! stage_seed(master, tag) = fnv1a64(tag) XOR (master * 0x9e3779b97f4a7c15)
//! ```
//!
//! Tags used by the pipeline: `split`, `net/init`, `net/shuffle`, and
//! `sampler/<method>` (for example `sampler/enn`).

/// Derive a stage seed from the master seed and a stage tag.
pub fn stage_seed(master: u64, tag: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &byte in tag.as_bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash ^ master.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}
