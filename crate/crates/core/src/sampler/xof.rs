use aes::cipher::{generic_array::GenericArray, BlockEncrypt, KeyInit};
use aes::Aes128;

use crate::error::{Error, Result};

pub const SEED_BYTES: usize = 16;
pub const BLOCK_BITS: u64 = 128;

/// Domain separator written into the last seed byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum DomainTag {
    RoundConstants = 0x01,
    Noise = 0x02,
    KeyDerivation = 0x03,
}

/// AES-128 in counter mode: block `i` is `AES(seed, i as u128 big-endian)`.
/// Bits leave each block most-significant first.
#[derive(Clone)]
pub struct XofStream {
    cipher: Aes128,
    seed: [u8; SEED_BYTES],
    block_counter: u128,
    current: u128,
    remaining: u32,
    bits_consumed: u64,
}

impl std::fmt::Debug for XofStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("XofStream")
            .field("seed", &hex::encode(self.seed))
            .field("block_counter", &self.block_counter)
            .field("bits_consumed", &self.bits_consumed)
            .finish()
    }
}

impl XofStream {
    pub fn seed(&self) -> [u8; SEED_BYTES] {
        self.seed
    }

    pub fn block_counter(&self) -> u128 {
        self.block_counter
    }

    pub fn bits_consumed(&self) -> u64 {
        self.bits_consumed
    }

    fn refill(&mut self) {
        let mut block = GenericArray::from(self.block_counter.to_be_bytes());
        self.cipher.encrypt_block(&mut block);
        self.current = u128::from_be_bytes(block.into());
        self.remaining = 128;
        self.block_counter += 1;
    }

    /// Next `nbits <= 128` bits as an unsigned integer, first bit most significant.
    pub fn next_bits(&mut self, nbits: u32) -> u128 {
        assert!(nbits <= 128, "at most 128 bits per call");
        let mut out: u128 = 0;
        let mut need = nbits;
        while need > 0 {
            if self.remaining == 0 {
                self.refill();
            }
            let take = need.min(self.remaining);
            let shift = self.remaining - take;
            let chunk = if take == 128 {
                self.current
            } else {
                (self.current >> shift) & ((1u128 << take) - 1)
            };
            out = if take == 128 { chunk } else { (out << take) | chunk };
            self.remaining -= take;
            need -= take;
        }
        self.bits_consumed += nbits as u64;
        out
    }

    /// Next `nbits` bits as a bit vector (`true` = 1).
    pub fn squeeze_bits(&mut self, nbits: usize) -> Vec<bool> {
        let mut out = Vec::with_capacity(nbits);
        let mut left = nbits;
        while left > 0 {
            let take = left.min(128) as u32;
            let v = self.next_bits(take);
            for i in (0..take).rev() {
                out.push((v >> i) & 1 == 1);
            }
            left -= take as usize;
        }
        out
    }
}

pub fn xof_init(nonce: &[u8], tag: DomainTag) -> Result<XofStream> {
    if nonce.len() > SEED_BYTES {
        return Err(Error::NonceTooLong(nonce.len(), SEED_BYTES));
    }
    let mut seed = [0u8; SEED_BYTES];
    seed[..nonce.len()].copy_from_slice(nonce);
    seed[SEED_BYTES - 1] = tag as u8;
    Ok(XofStream {
        cipher: Aes128::new(&GenericArray::from(seed)),
        seed,
        block_counter: 0,
        current: 0,
        remaining: 0,
        bits_consumed: 0,
    })
}

pub fn xof_squeeze_bits(s: &mut XofStream, nbits: usize) -> Vec<bool> {
    s.squeeze_bits(nbits)
}
