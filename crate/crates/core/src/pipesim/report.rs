use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::HwConfig;

/// Latency of one keystream block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockTiming {
    pub lane: u32,
    pub block: u32,
    pub global_index: u64,
    /// Cycle the latency is measured from: the request (pre-sampling designs)
    /// or the first ARK issue.
    pub start: u64,
    pub finish: u64,
    pub latency: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Msps {
    /// Keystream elements (`l` per block).
    pub keystream: f64,
    /// State elements (`n` per block).
    pub state: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub latency_cycles: u64,
    pub initiation_interval_cycles: f64,
    pub elements_per_cycle: f64,
    pub state_elements_per_cycle: f64,
    pub total_cycles: u64,
    pub stall_cycles_by_unit: BTreeMap<String, u64>,
    pub bubble_count: u64,
    /// Peak FIFO fill, in constants, over all lanes.
    pub fifo_max_occupancy: u64,
    pub fifo_max_entries: u64,
    pub rng_stall_cycles: u64,
    pub constants_consumed: u64,
    pub noise_consumed: u64,
    pub blocks: Vec<BlockTiming>,
    pub config: HwConfig,
    pub version: String,
}

impl SimReport {
    /// Throughput at a user-supplied clock, in mega-samples per second.
    pub fn msps_at(&self, freq_mhz: f64) -> Msps {
        Msps {
            keystream: self.elements_per_cycle * freq_mhz,
            state: self.state_elements_per_cycle * freq_mhz,
        }
    }

    pub fn to_json(&self, freq_mhz: Option<f64>) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("serializable");
        if let Some(f) = freq_mhz {
            v["freq_mhz"] = f.into();
            v["msps"] = serde_json::to_value(self.msps_at(f)).expect("serializable");
        }
        v
    }
}
