use serde::{Deserialize, Serialize};

use super::layers::{agn, ark_prefix, cube, feistel, truncate};
use super::mixing::mrmc;
use super::params::{CipherParams, Scheme};
use super::state::{Order, StateMatrix};
use crate::error::{Error, Result};
use crate::sampler::{
    build_cdf_table, sample_discrete_gaussian, xof_init, CdfTable, DomainTag, SamplerStats,
    UniformSampler, XofStream,
};
use crate::zq::{Modulus, ZqElement};

/// Nonce bytes that fit in front of the 8-byte block index.
pub const MAX_NONCE_BYTES: usize = 7;

/// One step of the round structure, in application order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layer {
    /// `round` counts ARK invocations from 0; `len` constants are drawn.
    Ark { round: usize, len: usize },
    Mrmc,
    Cube,
    Feistel,
    Truncate,
    Agn,
}

impl Layer {
    pub fn is_nonlinear(&self) -> bool {
        matches!(self, Layer::Cube | Layer::Feistel)
    }
}

/// The layer sequence for a parameter set.
pub fn program(p: &CipherParams) -> Vec<Layer> {
    let nonlin = match p.scheme {
        Scheme::Hera => Layer::Cube,
        Scheme::Rubato => Layer::Feistel,
    };
    let mut out = vec![Layer::Ark { round: 0, len: p.n }];
    for round in 1..p.r {
        out.extend([Layer::Mrmc, nonlin, Layer::Ark { round, len: p.n }]);
    }
    out.extend([Layer::Mrmc, nonlin, Layer::Mrmc, Layer::Ark { round: p.r, len: p.final_ark_len() }]);
    if p.scheme == Scheme::Rubato {
        out.extend([Layer::Truncate, Layer::Agn]);
    }
    out
}

/// Supplies round constants in draw order.
pub trait ConstantSource {
    fn next_constant(&mut self) -> Result<u64>;
    fn stats(&self) -> SamplerStats {
        SamplerStats::default()
    }
}

pub trait NoiseSource {
    fn next_noise(&mut self) -> i64;
    fn stats(&self) -> SamplerStats {
        SamplerStats::default()
    }
}

impl ConstantSource for UniformSampler<XofStream> {
    fn next_constant(&mut self) -> Result<u64> {
        self.sample().map(|e| e.value())
    }
    fn stats(&self) -> SamplerStats {
        UniformSampler::stats(self)
    }
}

/// Every constant equals `value`.
#[derive(Debug, Clone, Copy)]
pub struct FixedConstants(pub u64);

impl ConstantSource for FixedConstants {
    fn next_constant(&mut self) -> Result<u64> {
        Ok(self.0)
    }
}

/// Replays a list; errors when exhausted.
#[derive(Debug, Clone)]
pub struct ListConstants {
    values: Vec<u64>,
    pos: usize,
}

impl ListConstants {
    pub fn new(values: Vec<u64>) -> Self {
        Self { values, pos: 0 }
    }
}

impl ConstantSource for ListConstants {
    fn next_constant(&mut self) -> Result<u64> {
        let v = self.values.get(self.pos).copied().ok_or(Error::StreamFault(self.pos as u64))?;
        self.pos += 1;
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroNoise;

impl NoiseSource for ZeroNoise {
    fn next_noise(&mut self) -> i64 {
        0
    }
}

pub struct GaussianNoise<'a> {
    stream: XofStream,
    table: &'a CdfTable,
    stats: SamplerStats,
}

impl<'a> GaussianNoise<'a> {
    pub fn new(stream: XofStream, table: &'a CdfTable) -> Self {
        Self { stream, table, stats: SamplerStats::default() }
    }
}

impl NoiseSource for GaussianNoise<'_> {
    fn next_noise(&mut self) -> i64 {
        sample_discrete_gaussian(&mut self.stream, self.table, &mut self.stats)
    }
    fn stats(&self) -> SamplerStats {
        self.stats
    }
}

/// Secret key: `n` elements of `Z_q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Key {
    values: Vec<u64>,
}

impl Key {
    pub fn new(values: Vec<u64>, p: &CipherParams) -> Result<Self> {
        if values.len() != p.n {
            return Err(Error::LengthMismatch { expected: p.n, got: values.len() });
        }
        if let Some(&x) = values.iter().find(|&&x| x >= p.q.value()) {
            return Err(Error::NonCanonical { value: x, q: p.q.value() });
        }
        Ok(Self { values })
    }

    pub fn zero(p: &CipherParams) -> Self {
        Self { values: vec![0; p.n] }
    }

    /// Uniform key expanded from up to 16 seed bytes.
    pub fn derive(seed: &[u8], p: &CipherParams) -> Result<Self> {
        let xof = xof_init(seed, DomainTag::KeyDerivation)?;
        let mut s = UniformSampler::new(xof, p.q, false);
        Ok(Self { values: s.sample_n(p.n)? })
    }

    /// Either `4n` bytes of big-endian `u32` elements, or a seed of at most
    /// 16 bytes passed to [`Key::derive`].
    pub fn from_hex(hex_str: &str, p: &CipherParams) -> Result<Self> {
        let bytes = parse_hex(hex_str)?;
        if bytes.len() == 4 * p.n {
            let values = bytes
                .chunks_exact(4)
                .map(|c| u32::from_be_bytes(c.try_into().unwrap()) as u64)
                .collect();
            Self::new(values, p)
        } else if bytes.len() <= 16 {
            Self::derive(&bytes, p)
        } else {
            Err(Error::InvalidParameter(format!(
                "key is {} bytes; expected {} (raw) or at most 16 (seed)",
                bytes.len(),
                4 * p.n
            )))
        }
    }

    pub fn to_hex(&self) -> String {
        self.values.iter().map(|&v| format!("{:08x}", v as u32)).collect()
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }
}

/// Hex string to bytes; accepts an optional `0x` prefix.
pub fn parse_hex(s: &str) -> Result<Vec<u8>> {
    let s = s.trim();
    let s = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    hex::decode(s).map_err(|e| Error::InvalidParameter(format!("bad hex `{s}`: {e}")))
}

/// `nonce` zero-padded to 7 bytes, then the block index as a big-endian `u64`.
pub fn stream_material(nonce: &[u8], block_index: u64) -> Result<Vec<u8>> {
    if nonce.len() > MAX_NONCE_BYTES {
        return Err(Error::NonceTooLong(nonce.len(), MAX_NONCE_BYTES));
    }
    let mut m = vec![0u8; MAX_NONCE_BYTES];
    m[..nonce.len()].copy_from_slice(nonce);
    m.extend_from_slice(&block_index.to_be_bytes());
    Ok(m)
}

/// State after a layer, as produced by the reference model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerState {
    pub layer: Layer,
    pub values: Vec<u64>,
    pub order: Order,
}

/// One keystream block and everything that went into it.
#[derive(Debug, Clone, PartialEq)]
pub struct Keystream {
    pub values: Vec<u64>,
    pub round_constants: Vec<u64>,
    pub noise: Vec<i64>,
    pub layers: Vec<LayerState>,
    pub rc_stats: SamplerStats,
    pub noise_stats: SamplerStats,
}

impl Keystream {
    pub fn elements(&self, q: Modulus) -> Vec<ZqElement> {
        self.values.iter().map(|&x| q.element(x).expect("canonical")).collect()
    }
}

/// A validated parameter set with its precomputed noise table.
#[derive(Debug, Clone)]
pub struct Cipher {
    params: CipherParams,
    table: Option<CdfTable>,
}

impl Cipher {
    pub fn new(params: CipherParams) -> Result<Self> {
        params.validate()?;
        let table = match (params.scheme, params.sigma) {
            (Scheme::Rubato, Some(s)) => Some(build_cdf_table(s, params.precision_bits(), params.tail_cut)?),
            _ => None,
        };
        Ok(Self { params, table })
    }

    pub fn params(&self) -> &CipherParams {
        &self.params
    }

    pub fn cdf_table(&self) -> Option<&CdfTable> {
        self.table.as_ref()
    }

    /// Keystream block `block_index` under `nonce`, with constants and noise
    /// drawn from their own XOF streams.
    pub fn keystream(&self, key: &Key, nonce: &[u8], block_index: u64) -> Result<Keystream> {
        let material = stream_material(nonce, block_index)?;
        let mut rc = UniformSampler::new(
            xof_init(&material, DomainTag::RoundConstants)?,
            self.params.q,
            self.params.exclude_zero,
        );
        match &self.table {
            Some(t) => {
                let mut noise = GaussianNoise::new(xof_init(&material, DomainTag::Noise)?, t);
                self.keystream_with(key, &mut rc, &mut noise)
            }
            None => self.keystream_with(key, &mut rc, &mut ZeroNoise),
        }
    }

    pub fn keystream_with(
        &self,
        key: &Key,
        rc: &mut dyn ConstantSource,
        noise: &mut dyn NoiseSource,
    ) -> Result<Keystream> {
        let p = &self.params;
        if key.values.len() != p.n {
            return Err(Error::LengthMismatch { expected: p.n, got: key.values.len() });
        }
        let q = p.q;
        let mut state = StateMatrix::new(p.ic.clone(), q, Order::Row)?;
        let mut out: Option<Vec<u64>> = None;
        let mut constants = Vec::with_capacity(p.constants_per_block());
        let mut noise_vals = Vec::new();
        let mut layers = Vec::new();
        for layer in program(p) {
            match layer {
                Layer::Ark { len, .. } => {
                    let block = (0..len).map(|_| rc.next_constant()).collect::<Result<Vec<_>>>()?;
                    state = ark_prefix(&state, &key.values, &block)?;
                    constants.extend(block);
                }
                Layer::Mrmc => state = mrmc(&state, &p.mixing)?,
                Layer::Cube => state = cube(&state),
                Layer::Feistel => state = feistel(&state),
                Layer::Truncate => out = Some(truncate(&state, p.l)?),
                Layer::Agn => {
                    let cur = out.take().expect("truncate precedes AGN");
                    noise_vals = (0..cur.len()).map(|_| noise.next_noise()).collect();
                    out = Some(agn(&cur, &noise_vals, q)?);
                }
            }
            let values = out.clone().unwrap_or_else(|| state.values().to_vec());
            layers.push(LayerState { layer, values, order: state.order() });
        }
        Ok(Keystream {
            values: out.unwrap_or_else(|| state.into_values()),
            round_constants: constants,
            noise: noise_vals,
            layers,
            rc_stats: rc.stats(),
            noise_stats: noise.stats(),
        })
    }
}

fn expect_scheme(p: &CipherParams, s: Scheme) -> Result<()> {
    if p.scheme != s {
        return Err(Error::InvalidParameter(format!("expected {s} parameters, got {}", p.scheme)));
    }
    Ok(())
}

pub fn hera_keystream(p: &CipherParams, key: &Key, nonce: &[u8], block_index: u64) -> Result<Vec<ZqElement>> {
    expect_scheme(p, Scheme::Hera)?;
    Ok(Cipher::new(p.clone())?.keystream(key, nonce, block_index)?.elements(p.q))
}

pub fn rubato_keystream(p: &CipherParams, key: &Key, nonce: &[u8], block_index: u64) -> Result<Vec<ZqElement>> {
    expect_scheme(p, Scheme::Rubato)?;
    Ok(Cipher::new(p.clone())?.keystream(key, nonce, block_index)?.elements(p.q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::mixing::{mix_columns, mix_rows, MixingMatrix};

    fn q17() -> Modulus {
        Modulus::new(17).unwrap()
    }

    #[test]
    fn program_shapes() {
        let h = program(&CipherParams::hera_par128a());
        assert_eq!(h.len(), 1 + 3 * 4 + 4);
        let arks: usize = h.iter().filter_map(|l| match l { Layer::Ark { len, .. } => Some(*len), _ => None }).sum();
        assert_eq!(arks, 96);
        let r = program(&CipherParams::rubato_par128l());
        let arks: Vec<usize> = r.iter().filter_map(|l| match l { Layer::Ark { len, .. } => Some(*len), _ => None }).collect();
        assert_eq!(arks, vec![64, 64, 60]);
        assert_eq!(r.last(), Some(&Layer::Agn));
    }

    // rc = 1, k = 0: ARK is the identity, leaving only the linear and
    // nonlinear layers, unrolled here with plain loops.
    fn naive_mix(x: &[u64], m: &MixingMatrix, q: u64) -> Vec<u64> {
        let v = m.dim();
        let mut t = vec![0u64; v * v];
        for r in 0..v {
            for c in 0..v {
                t[r * v + c] = (0..v).map(|k| m.get(r, k) * x[k * v + c]).sum::<u64>() % q;
            }
        }
        let mut y = vec![0u64; v * v];
        for r in 0..v {
            for c in 0..v {
                y[r * v + c] = (0..v).map(|k| t[r * v + k] * m.get(c, k)).sum::<u64>() % q;
            }
        }
        y
    }

    #[test]
    fn hera_degenerate_ark_matches_unrolled() {
        let p = CipherParams::hera(q17(), 5);
        let c = Cipher::new(p.clone()).unwrap();
        let ks = c.keystream_with(&Key::zero(&p), &mut FixedConstants(1), &mut ZeroNoise).unwrap();
        let cube = |x: Vec<u64>| x.into_iter().map(|a| a * a * a % 17).collect::<Vec<_>>();
        let mut x: Vec<u64> = (1..=16).collect();
        for _ in 0..4 {
            x = cube(naive_mix(&x, &p.mixing, 17));
        }
        x = naive_mix(&cube(naive_mix(&x, &p.mixing, 17)), &p.mixing, 17);
        assert_eq!(ks.values, x);
        assert_eq!(ks.round_constants.len(), 96);
    }

    #[test]
    fn rubato_degenerate_ark_matches_unrolled() {
        let p = CipherParams::rubato(q17(), 16, 12, 3);
        let c = Cipher::new(p.clone()).unwrap();
        let ks = c.keystream_with(&Key::zero(&p), &mut FixedConstants(1), &mut ZeroNoise).unwrap();
        let fst = |x: Vec<u64>| {
            let mut y = x.clone();
            for i in 1..x.len() {
                y[i] = (x[i] + x[i - 1] * x[i - 1]) % 17;
            }
            y
        };
        let mut x: Vec<u64> = (1..=16).collect();
        for _ in 0..2 {
            x = fst(naive_mix(&x, &p.mixing, 17));
        }
        x = naive_mix(&fst(naive_mix(&x, &p.mixing, 17)), &p.mixing, 17);
        x.truncate(12);
        assert_eq!(ks.values, x);
        assert_eq!(ks.round_constants.len(), 3 * 16 + 12);
    }

    #[test]
    fn layer_states_track_golden() {
        let p = CipherParams::hera(q17(), 2);
        let c = Cipher::new(p.clone()).unwrap();
        let ks = c.keystream_with(&Key::zero(&p), &mut FixedConstants(1), &mut ZeroNoise).unwrap();
        let id = StateMatrix::new(p.ic.clone(), p.q, Order::Row).unwrap();
        let mc = mix_rows(&mix_columns(&id, &p.mixing).unwrap(), &p.mixing).unwrap();
        assert_eq!(ks.layers[1].values, mc.values());
        assert_eq!(ks.layers[1].order, Order::Col);
        assert_eq!(ks.layers[0].order, Order::Row);
    }

    #[test]
    fn par128_counts_and_determinism() {
        let p = CipherParams::rubato_par128l();
        let c = Cipher::new(p.clone()).unwrap();
        let key = Key::derive(b"k", &p).unwrap();
        let a = c.keystream(&key, b"n", 0).unwrap();
        assert_eq!(a.values.len(), 60);
        assert_eq!(a.round_constants.len(), 188);
        assert_eq!(a.noise.len(), 60);
        assert!(a.round_constants.iter().all(|&x| x != 0));
        assert_eq!(a.rc_stats.draws_accepted, 188);
        assert_eq!(a.rc_stats.bits_consumed, 25 * a.rc_stats.draws_attempted);
        assert!(a.rc_stats.bits_consumed >= 4700);
        assert_eq!(c.keystream(&key, b"n", 0).unwrap(), a);
        let b = c.keystream(&key, b"n", 1).unwrap();
        assert_ne!(a.round_constants, b.round_constants);

        let h = CipherParams::hera_par128a();
        let hk = Key::derive(b"k", &h).unwrap();
        let z = hera_keystream(&h, &hk, b"n", 0).unwrap();
        assert_eq!(z.len(), 16);
        assert!(rubato_keystream(&h, &hk, b"n", 0).is_err());
    }

    #[test]
    fn key_parsing() {
        let p = CipherParams::hera_par128a();
        let k = Key::derive(b"seed", &p).unwrap();
        assert_eq!(Key::from_hex(&k.to_hex(), &p).unwrap(), k);
        assert_eq!(Key::from_hex("0x73656564", &p).unwrap(), k);
        assert!(Key::from_hex("zz", &p).is_err());
        assert!(Key::from_hex(&"00".repeat(20), &p).is_err());
        assert!(Key::from_hex(&"ff".repeat(64), &p).is_err());
    }

    #[test]
    fn nonce_limits() {
        assert_eq!(stream_material(b"abc", 1).unwrap().len(), 15);
        assert_eq!(stream_material(&[0; 8], 0).unwrap_err(), Error::NonceTooLong(8, 7));
    }
}
