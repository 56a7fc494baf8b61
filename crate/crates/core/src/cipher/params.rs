use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mixing::MixingMatrix;
use crate::error::{Error, Result};
use crate::zq::Modulus;

/// Default HERA modulus: the largest 28-bit prime with `q = 2 mod 3`.
pub const HERA_DEFAULT_Q: u64 = 268_435_367;
/// 25-bit Rubato modulus, `0x1fc0001`.
pub const RUBATO_DEFAULT_Q: u64 = 33_292_289;
pub const DEFAULT_SIGMA: f64 = 1.6;
pub const DEFAULT_TAIL_CUT: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Hera,
    Rubato,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Hera => "hera",
            Scheme::Rubato => "rubato",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hera" => Ok(Scheme::Hera),
            "rubato" => Ok(Scheme::Rubato),
            other => Err(Error::InvalidParameter(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Full parameter bundle for one cipher instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CipherParams {
    pub scheme: Scheme,
    pub q: Modulus,
    pub n: usize,
    pub v: usize,
    pub l: usize,
    pub r: usize,
    pub lambda: u32,
    pub sigma: Option<f64>,
    pub tail_cut: u32,
    pub mixing: MixingMatrix,
    pub ic: Vec<u64>,
    pub exclude_zero: bool,
}

fn isqrt(n: usize) -> Option<usize> {
    let v = (n as f64).sqrt().round() as usize;
    (v * v == n).then_some(v)
}

impl CipherParams {
    /// HERA with `n = 16`, `r = 5`.
    pub fn hera_par128a() -> Self {
        Self::hera(Modulus::new(HERA_DEFAULT_Q).expect("prime"), 5)
    }

    /// Rubato Par-128L: `n = 64`, `l = 60`, `r = 2`, 25-bit `q`.
    pub fn rubato_par128l() -> Self {
        Self::rubato(Modulus::new(RUBATO_DEFAULT_Q).expect("prime"), 64, 60, 2)
    }

    pub fn hera(q: Modulus, r: usize) -> Self {
        let n = 16;
        Self {
            scheme: Scheme::Hera,
            q,
            n,
            v: 4,
            l: n,
            r,
            lambda: 128,
            sigma: None,
            tail_cut: DEFAULT_TAIL_CUT,
            mixing: MixingMatrix::default_for(4).expect("v = 4"),
            ic: default_ic(n, q),
            exclude_zero: true,
        }
    }

    pub fn rubato(q: Modulus, n: usize, l: usize, r: usize) -> Self {
        let v = isqrt(n).unwrap_or(0);
        Self {
            scheme: Scheme::Rubato,
            q,
            n,
            v,
            l,
            r,
            lambda: 128,
            sigma: Some(DEFAULT_SIGMA),
            tail_cut: DEFAULT_TAIL_CUT,
            mixing: MixingMatrix::default_for(v).unwrap_or_else(|_| MixingMatrix::identity(v)),
            ic: default_ic(n, q),
            exclude_zero: true,
        }
    }

    pub fn for_scheme(scheme: Scheme) -> Self {
        match scheme {
            Scheme::Hera => Self::hera_par128a(),
            Scheme::Rubato => Self::rubato_par128l(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self.scheme {
            Scheme::Hera => {
                if self.n != 16 {
                    return bad(format!("HERA requires n = 16, got {}", self.n));
                }
                if self.l != self.n {
                    return bad("HERA requires l = n".into());
                }
                if self.sigma.is_some() {
                    return bad("HERA takes no sigma".into());
                }
            }
            Scheme::Rubato => {
                if ![16, 36, 64].contains(&self.n) {
                    return bad(format!("Rubato requires n in {{16, 36, 64}}, got {}", self.n));
                }
                match self.sigma {
                    Some(s) if s.is_finite() && s > 0.0 => {}
                    _ => return bad("Rubato requires a positive sigma".into()),
                }
            }
        }
        if isqrt(self.n) != Some(self.v) {
            return bad(format!("v = {} is not sqrt(n = {})", self.v, self.n));
        }
        if self.l == 0 || self.l > self.n {
            return bad(format!("l = {} outside [1, {}]", self.l, self.n));
        }
        if self.r == 0 {
            return bad("r must be at least 1".into());
        }
        if self.mixing.dim() != self.v {
            return bad(format!("mixing matrix is {0}x{0}, state needs v = {1}", self.mixing.dim(), self.v));
        }
        if self.ic.len() != self.n {
            return bad(format!("ic has {} entries, need {}", self.ic.len(), self.n));
        }
        if let Some(&x) = self.ic.iter().find(|&&x| x >= self.q.value()) {
            return Err(Error::NonCanonical { value: x, q: self.q.value() });
        }
        if self.lambda < 32 || self.lambda > 256 || self.lambda % 2 != 0 {
            return bad(format!("lambda = {} unsupported", self.lambda));
        }
        Ok(())
    }

    /// Round constants drawn per keystream block.
    pub fn constants_per_block(&self) -> usize {
        match self.scheme {
            Scheme::Hera => (self.r + 1) * self.n,
            Scheme::Rubato => self.r * self.n + self.l,
        }
    }

    /// Length of the final ARK (constants for truncated positions are never drawn).
    pub fn final_ark_len(&self) -> usize {
        match self.scheme {
            Scheme::Hera => self.n,
            Scheme::Rubato => self.l,
        }
    }

    /// Fixed-point width of the Gaussian CDF table, `lambda / 2`.
    pub fn precision_bits(&self) -> u32 {
        (self.lambda / 2).clamp(16, 128)
    }

    /// Expected uniform-sampling bits per block: `count * bits * 2^bits / |admitted|`.
    pub fn expected_rc_bits(&self) -> f64 {
        let bits = self.q.bits();
        let admitted = self.q.value() - self.exclude_zero as u64;
        self.constants_per_block() as f64 * bits as f64 * (1u64 << bits) as f64 / admitted as f64
    }
}

/// `(1, 2, ..., n) mod q`.
pub fn default_ic(n: usize, q: Modulus) -> Vec<u64> {
    (1..=n as u64).map(|i| q.reduce(i)).collect()
}
