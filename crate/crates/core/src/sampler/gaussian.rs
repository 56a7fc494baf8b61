use std::io::{Read, Write};
use std::path::Path;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{BitSource, SamplerStats};
use crate::error::{Error, Result};

const MAGIC: &[u8; 6] = b"HHECDF";
const FILE_VERSION: u16 = 1;
/// Fractional bits carried through the exp/normalisation arithmetic.
const WORK_BITS: u64 = 320;
const MAX_TAIL: u32 = 4096;

/// Cumulative distribution of `|e|` for the discrete Gaussian, as fixed-point
/// integers of `precision_bits` bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfTable {
    sigma: f64,
    precision_bits: u32,
    tail_cut: u32,
    entries: Vec<u128>,
}

impl CdfTable {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn tail_cut(&self) -> u32 {
        self.tail_cut
    }

    pub fn entries(&self) -> &[u128] {
        &self.entries
    }

    fn max_value(&self) -> u128 {
        max_fixed(self.precision_bits)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[0] < w[1])
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[0] <= w[1])
    }

    /// `P(e = 0)` as seen by the sampler.
    pub fn probability_zero(&self) -> f64 {
        self.entries[0] as f64 / 2f64.powi(self.precision_bits as i32)
    }

    /// Magnitude for a uniform draw `u`: the smallest `i` with `u < entries[i]`.
    pub fn invert(&self, u: u128) -> u32 {
        self.entries
            .iter()
            .position(|&e| u < e)
            .map_or(self.tail_cut, |i| i as u32)
    }

    /// Implied pmf over `-tail_cut..=tail_cut` (index `x + tail_cut`).
    pub fn implied_pmf(&self) -> Vec<f64> {
        let scale = 2f64.powi(self.precision_bits as i32);
        let t = self.tail_cut as usize;
        let mut pmf = vec![0.0; 2 * t + 1];
        let mut prev = 0u128;
        for (i, &e) in self.entries.iter().enumerate() {
            let mass = (e - prev) as f64 / scale;
            prev = e;
            if i == 0 {
                pmf[t] = mass;
            } else {
                pmf[t + i] = mass / 2.0;
                pmf[t - i] = mass / 2.0;
            }
        }
        // u = 2^p - 1 falls through to the tail
        let rest = 1.0 - self.entries[t] as f64 / scale;
        pmf[2 * t] += rest / 2.0;
        pmf[0] += rest / 2.0;
        pmf
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FILE_VERSION.to_be_bytes())?;
        w.write_all(&self.sigma.to_be_bytes())?;
        w.write_all(&self.precision_bits.to_be_bytes())?;
        w.write_all(&self.tail_cut.to_be_bytes())?;
        let width = entry_width(self.precision_bits);
        for e in &self.entries {
            w.write_all(&e.to_be_bytes()[16 - width..])?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let bad = |msg: &str| Error::Parse { line: 0, msg: msg.to_string() };
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("not a CDF table file"));
        }
        let mut b2 = [0u8; 2];
        r.read_exact(&mut b2)?;
        if u16::from_be_bytes(b2) != FILE_VERSION {
            return Err(bad("unsupported CDF table version"));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let sigma = f64::from_be_bytes(b8);
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let precision_bits = u32::from_be_bytes(b4);
        r.read_exact(&mut b4)?;
        let tail_cut = u32::from_be_bytes(b4);
        validate(sigma, precision_bits, tail_cut)?;
        let width = entry_width(precision_bits);
        let mut entries = Vec::with_capacity(tail_cut as usize + 1);
        for _ in 0..=tail_cut {
            let mut buf = [0u8; 16];
            r.read_exact(&mut buf[16 - width..])?;
            entries.push(u128::from_be_bytes(buf));
        }
        let t = CdfTable { sigma, precision_bits, tail_cut, entries };
        if !t.is_non_decreasing() || *t.entries.last().unwrap() != t.max_value() {
            return Err(bad("CDF entries malformed"));
        }
        Ok(t)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn entry_width(precision_bits: u32) -> usize {
    precision_bits.div_ceil(8) as usize
}

fn max_fixed(precision_bits: u32) -> u128 {
    if precision_bits == 128 {
        u128::MAX
    } else {
        (1u128 << precision_bits) - 1
    }
}

fn validate(sigma: f64, precision_bits: u32, tail_cut: u32) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    if !(16..=128).contains(&precision_bits) {
        return Err(Error::InvalidParameter(format!(
            "precision_bits must be in [16, 128], got {precision_bits}"
        )));
    }
    let min_tail = (8.0 * sigma).ceil();
    if (tail_cut as f64) < min_tail || tail_cut > MAX_TAIL {
        return Err(Error::InvalidParameter(format!(
            "tail_cut must be in [{min_tail}, {MAX_TAIL}], got {tail_cut}"
        )));
    }
    Ok(())
}

/// Exact `(mantissa, exponent)` with `x = mantissa * 2^exponent`.
fn decompose(x: f64) -> (u64, i64) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    }
}

fn one() -> BigUint {
    BigUint::from(1u8) << WORK_BITS
}

fn fmul(a: &BigUint, b: &BigUint) -> BigUint {
    (a * b) >> WORK_BITS
}

/// `e^f` for fixed-point `0 <= f <= 1`, by Taylor series.
fn exp_small(f: &BigUint) -> BigUint {
    let mut term = one();
    let mut sum = term.clone();
    let mut i = 1u32;
    loop {
        term = fmul(&term, f) / i;
        if term == BigUint::ZERO {
            return sum;
        }
        sum += &term;
        i += 1;
    }
}

/// `e^{-t}` for fixed-point `t >= 0`; flushes to zero far below one ulp.
fn exp_neg(t: &BigUint) -> BigUint {
    let k = t >> WORK_BITS;
    if k > BigUint::from(WORK_BITS) {
        return BigUint::ZERO;
    }
    let k: u64 = k.try_into().expect("bounded above");
    let frac = t - (BigUint::from(k) << WORK_BITS);
    let unit = one();
    let sq = &unit * &unit;
    let mut acc = &sq / exp_small(&frac);
    let mut base = &sq / exp_small(&unit);
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = fmul(&acc, &base);
        }
        base = fmul(&base, &base);
        e >>= 1;
    }
    acc
}

/// Unnormalised `rho(x) = exp(-x^2 / (2 sigma^2))` for `x = 0..=tail`.
fn rho_table(sigma: f64, tail: u32) -> Vec<BigUint> {
    let (m, e) = decompose(sigma);
    // t = x^2 * 2^W / (2 m^2 2^{2e})
    let den_base = BigUint::from(m) * BigUint::from(m) * 2u8;
    (0..=tail)
        .map(|x| {
            let mut num = BigUint::from(x as u64 * x as u64) << WORK_BITS;
            let mut den = den_base.clone();
            let shift = 2 * e;
            if shift >= 0 {
                den <<= shift as u64;
            } else {
                num <<= (-shift) as u64;
            }
            exp_neg(&(num / den))
        })
        .collect()
}

pub fn build_cdf_table(sigma: f64, precision_bits: u32, tail_cut: u32) -> Result<CdfTable> {
    validate(sigma, precision_bits, tail_cut)?;
    let rho = rho_table(sigma, tail_cut);
    let total: BigUint = rho.iter().skip(1).sum::<BigUint>() * 2u8 + &rho[0];
    let cap = max_fixed(precision_bits);
    let mut cum = BigUint::ZERO;
    let mut entries = Vec::with_capacity(rho.len());
    for (i, r) in rho.iter().enumerate() {
        cum += if i == 0 { r.clone() } else { r * 2u8 };
        // round(2^p * cum / total)
        let scaled = ((&cum << (precision_bits as u64 + 1)) + &total) / (&total * 2u8);
        let v: u128 = scaled.try_into().unwrap_or(u128::MAX);
        entries.push(v.min(cap));
    }
    *entries.last_mut().unwrap() = cap;
    Ok(CdfTable { sigma, precision_bits, tail_cut, entries })
}

pub fn sample_discrete_gaussian<S: BitSource + ?Sized>(
    s: &mut S,
    t: &CdfTable,
    stats: &mut SamplerStats,
) -> i64 {
    let u = s.next_bits(t.precision_bits);
    let mag = t.invert(u) as i64;
    stats.draws_attempted += 1;
    stats.draws_accepted += 1;
    stats.bits_consumed += t.precision_bits as u64;
    if mag == 0 {
        return 0;
    }
    stats.bits_consumed += 1;
    if s.next_bits(1) == 1 {
        -mag
    } else {
        mag
    }
}

/// Analytic pmf of the truncated discrete Gaussian over `-tail..=tail`.
pub fn analytic_pmf(sigma: f64, tail: u32) -> Vec<f64> {
    let w: Vec<f64> = (-(tail as i64)..=tail as i64)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}
