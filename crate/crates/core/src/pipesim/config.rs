use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cipher::{CipherParams, Scheme};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Scalar lanes; every round constant is sampled before computation starts.
    D1Baseline,
    /// Scalar lanes; the sampler fills a small FIFO while ARK drains it.
    D2Decoupled,
    /// Vector lanes with function overlap and the transposed MRMC schedule.
    D3Full,
    /// Vector lanes with overlap and MRMC scheduling chosen freely.
    Vectorized,
}

impl Variant {
    pub fn label(&self) -> &'static str {
        match self {
            Variant::D1Baseline => "d1",
            Variant::D2Decoupled => "d2",
            Variant::D3Full => "d3",
            Variant::Vectorized => "vec",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d1" | "baseline" => Ok(Variant::D1Baseline),
            "d2" | "decoupled" => Ok(Variant::D2Decoupled),
            "d3" | "full" => Ok(Variant::D3Full),
            "vec" | "vectorized" => Ok(Variant::Vectorized),
            other => Err(Error::InvalidParameter(format!("unknown variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionModel {
    /// Each AES block yields its candidates times the acceptance probability.
    ExpectedRate,
    /// Accept/reject decisions replayed from the real XOF.
    StreamExact,
}

/// Result latency (issue to first use) per unit, and issue occupancy of
/// the scalar cube, which needs two dependent multiplications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitTiming {
    pub ark: u64,
    pub mrmc: u64,
    pub nonlin: u64,
    pub agn: u64,
    pub scalar_cube_occupancy: u64,
}

impl Default for UnitTiming {
    fn default() -> Self {
        Self { ark: 3, mrmc: 3, nonlin: 3, agn: 2, scalar_cube_occupancy: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TraceLevel {
    None,
    /// Final-layer and truncation events only.
    #[default]
    Outputs,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HwConfig {
    pub variant: Variant,
    pub params: CipherParams,
    pub lanes: usize,
    pub vector_width: usize,
    /// Per-lane FIFO depth in entries of `vector_width` constants.
    pub fifo_depth: usize,
    pub rng_bits_per_cycle: u32,
    pub rejection_model: RejectionModel,
    pub function_overlap: bool,
    pub mrmc_opt: bool,
    pub timing: UnitTiming,
    /// Lane `k` may start its first block at cycle `k * lane_stagger`.
    pub lane_stagger: u64,
    pub noise_samples_per_cycle: u32,
    pub trace_level: TraceLevel,
}

impl HwConfig {
    pub fn new(variant: Variant, params: CipherParams) -> Self {
        let v = params.v;
        let (lanes, vw, depth, overlap, opt, stagger) = match variant {
            Variant::D1Baseline => (8, 1, params.constants_per_block(), false, false, 0),
            Variant::D2Decoupled => (8, 1, 8, false, false, params.n as u64),
            Variant::D3Full | Variant::Vectorized => {
                let lanes = if params.scheme == Scheme::Hera { 2 } else { 1 };
                let on = variant == Variant::D3Full;
                (lanes, v, 8, on, on, 0)
            }
        };
        Self {
            variant,
            params,
            lanes,
            vector_width: vw,
            fifo_depth: depth,
            rng_bits_per_cycle: 128,
            rejection_model: RejectionModel::ExpectedRate,
            function_overlap: overlap,
            mrmc_opt: opt,
            timing: UnitTiming::default(),
            lane_stagger: stagger,
            noise_samples_per_cycle: 1,
            trace_level: TraceLevel::Outputs,
        }
    }

    pub fn for_scheme(variant: Variant, scheme: Scheme) -> Self {
        Self::new(variant, CipherParams::for_scheme(scheme))
    }

    /// Pre-sample all constants (and noise) of a block before it starts.
    pub fn presample(&self) -> bool {
        self.variant == Variant::D1Baseline
    }

    /// Successive blocks of a lane may overlap in the pipeline.
    pub fn pipelined_blocks(&self) -> bool {
        self.function_overlap
    }

    pub fn fifo_capacity(&self) -> usize {
        self.fifo_depth * self.vector_width
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.lanes == 0 {
            return bad("at least one lane required".into());
        }
        if self.vector_width != 1 && self.vector_width != self.params.v {
            return bad(format!("vector width must be 1 or v = {}", self.params.v));
        }
        match self.variant {
            Variant::D1Baseline | Variant::D2Decoupled => {
                if self.vector_width != 1 {
                    return bad(format!("{} is scalar; vector width must be 1", self.variant));
                }
                if self.function_overlap || self.mrmc_opt {
                    return bad(format!("{} has neither function overlap nor the MRMC schedule", self.variant));
                }
            }
            Variant::D3Full => {
                if !(self.function_overlap && self.mrmc_opt) {
                    return bad("d3 requires function overlap and the MRMC schedule".into());
                }
            }
            Variant::Vectorized => {}
        }
        if self.fifo_depth == 0 {
            return bad("FIFO depth must be positive".into());
        }
        if self.rng_bits_per_cycle < self.params.q.bits() {
            return bad("RNG must deliver at least one candidate per cycle".into());
        }
        if self.noise_samples_per_cycle == 0 {
            return bad("noise sampler rate must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_design_points() {
        let h3 = HwConfig::for_scheme(Variant::D3Full, Scheme::Hera);
        assert_eq!((h3.lanes, h3.vector_width), (2, 4));
        let r3 = HwConfig::for_scheme(Variant::D3Full, Scheme::Rubato);
        assert_eq!((r3.lanes, r3.vector_width), (1, 8));
        let r1 = HwConfig::for_scheme(Variant::D1Baseline, Scheme::Rubato);
        assert_eq!((r1.lanes, r1.vector_width, r1.fifo_depth), (8, 1, 188));
        for v in [Variant::D1Baseline, Variant::D2Decoupled, Variant::D3Full, Variant::Vectorized] {
            for s in [Scheme::Hera, Scheme::Rubato] {
                HwConfig::for_scheme(v, s).validate().unwrap();
            }
        }
    }

    #[test]
    fn invariants_enforced() {
        let mut c = HwConfig::for_scheme(Variant::D2Decoupled, Scheme::Rubato);
        c.vector_width = 8;
        assert!(c.validate().is_err());
        let mut c = HwConfig::for_scheme(Variant::D3Full, Scheme::Rubato);
        c.mrmc_opt = false;
        assert!(c.validate().is_err());
        let mut c = HwConfig::for_scheme(Variant::Vectorized, Scheme::Rubato);
        c.vector_width = 4;
        assert!(c.validate().is_err());
    }

    #[test]
    fn variant_names() {
        assert_eq!("D3".parse::<Variant>().unwrap(), Variant::D3Full);
        assert_eq!("vectorized".parse::<Variant>().unwrap(), Variant::Vectorized);
        assert!("d4".parse::<Variant>().is_err());
    }
}
