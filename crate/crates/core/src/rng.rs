//! Counter-based random streams. Every sample index owns three independent
//! ChaCha8 streams derived from the master seed, so the draws of a sample do
//! not depend on which worker produces it or in what order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Purpose of a per-sample stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Gaussian vertex values.
    Field = 0,
    /// One uniform per edge for the cable crossing rule.
    Crossing = 1,
    /// Positions of cluster endpoints inside cables.
    Stubs = 2,
}

/// Words (32-bit) reserved for each stub slot.
pub const STUB_SLOT_WORDS: u128 = 64;

pub fn sample_stream(master: u64, sample: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(3 * sample + stream as u64);
    rng
}

/// Converts 64 random bits to a uniform in `[0, 1)` with 53-bit resolution.
pub fn unit_uniform(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform for edge `id` is the `id`-th 64-bit word of the crossing stream,
/// whatever order edges are queried in.
pub struct EdgeUniforms {
    rng: ChaCha8Rng,
    next_edge: usize,
}

impl EdgeUniforms {
    pub fn new(master: u64, sample: u64) -> Self {
        Self {
            rng: sample_stream(master, sample, Stream::Crossing),
            next_edge: 0,
        }
    }

    pub fn get(&mut self, edge: usize) -> f64 {
        if edge != self.next_edge {
            self.rng.set_word_pos(2 * edge as u128);
        }
        self.next_edge = edge + 1;
        unit_uniform(self.rng.next_u64())
    }

    /// Uniforms of edges `0..count`, drawn in bulk.
    pub fn first(master: u64, sample: u64, count: usize) -> Vec<f64> {
        let mut rng = sample_stream(master, sample, Stream::Crossing);
        let mut bytes = vec![0u8; 8 * count];
        rng.fill_bytes(&mut bytes);
        bytes
            .chunks_exact(8)
            .map(|w| unit_uniform(u64::from_le_bytes(w.try_into().expect("8 bytes"))))
            .collect()
    }
}

/// Independent generator for stub slot `slot` of a sample.
pub fn stub_rng(master: u64, sample: u64, slot: usize) -> ChaCha8Rng {
    let mut rng = sample_stream(master, sample, Stream::Stubs);
    rng.set_word_pos(STUB_SLOT_WORDS * slot as u128);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_uniforms_are_order_independent() {
        let mut forward = EdgeUniforms::new(5, 9);
        let a: Vec<f64> = (0..50).map(|e| forward.get(e)).collect();
        let mut scattered = EdgeUniforms::new(5, 9);
        for e in [31, 2, 49, 0, 17] {
            assert_eq!(scattered.get(e), a[e]);
        }
        assert!(a.iter().all(|&u| (0.0..1.0).contains(&u)));
    }

    #[test]
    fn bulk_uniforms_match_single_draws() {
        let mut single = EdgeUniforms::new(3, 4);
        let bulk = EdgeUniforms::first(3, 4, 101);
        for (e, u) in bulk.iter().enumerate() {
            assert_eq!(*u, single.get(e));
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = sample_stream(1, 0, Stream::Field);
        let mut b = sample_stream(1, 0, Stream::Crossing);
        let mut c = sample_stream(1, 1, Stream::Field);
        let x = a.next_u64();
        assert_ne!(x, b.next_u64());
        assert_ne!(x, c.next_u64());
    }
}
