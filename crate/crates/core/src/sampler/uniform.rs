use super::{BitSource, SamplerStats};
use crate::error::{Error, Result};
use crate::zq::{Modulus, ZqElement};

pub const MAX_ATTEMPTS: u64 = 1_000_000;

/// Draw `ceil(log2 q)`-bit candidates until one lands in the admitted set.
pub fn rejection_sample_uniform<S: BitSource + ?Sized>(
    s: &mut S,
    m: Modulus,
    exclude_zero: bool,
    stats: &mut SamplerStats,
) -> Result<ZqElement> {
    let bits = m.bits();
    for _ in 0..MAX_ATTEMPTS {
        let c = s.next_bits(bits) as u64;
        stats.draws_attempted += 1;
        stats.bits_consumed += bits as u64;
        if c >= m.value() || (exclude_zero && c == 0) {
            continue;
        }
        stats.draws_accepted += 1;
        return ZqElement::new(c, m);
    }
    Err(Error::StreamFault(MAX_ATTEMPTS))
}

/// A stream bound to a modulus and exclusion policy, with running stats.
#[derive(Debug, Clone)]
pub struct UniformSampler<S> {
    source: S,
    modulus: Modulus,
    exclude_zero: bool,
    stats: SamplerStats,
}

impl<S: BitSource> UniformSampler<S> {
    pub fn new(source: S, modulus: Modulus, exclude_zero: bool) -> Self {
        Self { source, modulus, exclude_zero, stats: SamplerStats::default() }
    }

    pub fn sample(&mut self) -> Result<ZqElement> {
        rejection_sample_uniform(&mut self.source, self.modulus, self.exclude_zero, &mut self.stats)
    }

    pub fn sample_n(&mut self, n: usize) -> Result<Vec<u64>> {
        (0..n).map(|_| self.sample().map(|e| e.value())).collect()
    }

    pub fn stats(&self) -> SamplerStats {
        self.stats
    }

    pub fn into_inner(self) -> S {
        self.source
    }

    /// Expected candidates per accepted value: `2^bits / |admitted|`.
    pub fn expected_attempts(&self) -> f64 {
        let admitted = self.modulus.value() - self.exclude_zero as u64;
        (1u64 << self.modulus.bits()) as f64 / admitted as f64
    }
}
