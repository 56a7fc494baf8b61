//! Deterministic randomness: AES-CTR bit stream, uniform rejection sampling
//! into `Z_q`, and an inverse-CDF discrete Gaussian.

mod gaussian;
mod uniform;
mod xof;

pub use gaussian::{analytic_pmf, build_cdf_table, sample_discrete_gaussian, CdfTable};
pub use uniform::{rejection_sample_uniform, UniformSampler, MAX_ATTEMPTS};
pub use xof::{xof_init, xof_squeeze_bits, DomainTag, XofStream, BLOCK_BITS, SEED_BYTES};

use serde::{Deserialize, Serialize};

/// Anything that yields bits most-significant first.
pub trait BitSource {
    /// Next `nbits <= 128` bits packed into the low end of the result.
    fn next_bits(&mut self, nbits: u32) -> u128;
}

impl BitSource for XofStream {
    fn next_bits(&mut self, nbits: u32) -> u128 {
        XofStream::next_bits(self, nbits)
    }
}

/// Replays a fixed bit string, then zeros. Handy for driving the samplers by hand.
#[derive(Debug, Clone, Default)]
pub struct FixedBits {
    bits: Vec<bool>,
    pos: usize,
}

impl FixedBits {
    /// Parses `'0'`/`'1'`; any other character (spaces, underscores) is ignored.
    pub fn from_str_bits(s: &str) -> Self {
        let bits = s
            .chars()
            .filter_map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        Self { bits, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl BitSource for FixedBits {
    fn next_bits(&mut self, nbits: u32) -> u128 {
        let mut out = 0u128;
        for _ in 0..nbits {
            let b = self.bits.get(self.pos).copied().unwrap_or(false);
            self.pos += 1;
            out = (out << 1) | b as u128;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerStats {
    pub draws_attempted: u64,
    pub draws_accepted: u64,
    pub bits_consumed: u64,
}

impl SamplerStats {
    pub fn merge(&mut self, other: &SamplerStats) {
        self.draws_attempted += other.draws_attempted;
        self.draws_accepted += other.draws_accepted;
        self.bits_consumed += other.bits_consumed;
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.draws_attempted == 0 {
            0.0
        } else {
            self.draws_accepted as f64 / self.draws_attempted as f64
        }
    }
}
