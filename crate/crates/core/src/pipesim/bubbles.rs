use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::schedule::{PassKind, Unit};
use super::trace::{PassSpan, Trace};

/// Timing of one MRMC activation (a MixColumns pass and its MixRows pass).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MrmcActivation {
    pub lane: u32,
    pub block: u32,
    /// 0 for the first MRMC of the block.
    pub activation: u32,
    pub start: u64,
    /// Cycle the first element of its input became usable.
    pub input_ready: u64,
    /// Idle cycles between usable input (and a free unit) and the start.
    pub pre_mrmc_bubble: u64,
    /// Idle cycles since the previous activation's last issue; `None` for the first.
    pub inter_round_stall: Option<u64>,
}

pub fn count_bubbles(trace: &Trace) -> Vec<MrmcActivation> {
    let mut by_block: BTreeMap<(u32, u32), BTreeMap<u16, PassSpan>> = BTreeMap::new();
    for s in &trace.spans {
        by_block.entry((s.lane, s.block)).or_default().insert(s.pass, *s);
    }
    let mut out = Vec::new();
    for ((lane, block), spans) in by_block {
        let mut prev_end: Option<u64> = None;
        let mut activation = 0;
        for (pi, meta) in trace.passes.iter().enumerate() {
            let Some(span) = spans.get(&(pi as u16)) else { continue };
            match meta.kind {
                PassKind::MixColumns => {
                    let input_ready = if pi == 0 {
                        0
                    } else {
                        let prev = &trace.passes[pi - 1];
                        spans
                            .get(&(pi as u16 - 1))
                            .map_or(0, |s| s.first_issue + trace.latency_of(prev.unit))
                    };
                    let free = prev_end.map_or(0, |e| e + 1);
                    let start = span.first_issue;
                    out.push(MrmcActivation {
                        lane,
                        block,
                        activation,
                        start,
                        input_ready,
                        pre_mrmc_bubble: start.saturating_sub(input_ready.max(free)),
                        inter_round_stall: prev_end.map(|e| start.saturating_sub(e + 1)),
                    });
                    activation += 1;
                }
                PassKind::MixRows => prev_end = Some(span.last_issue),
                _ => {}
            }
            debug_assert!(meta.unit != Unit::Rng);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{Key, Scheme};
    use crate::pipesim::{simulate, HwConfig, TraceLevel, Variant};

    fn acts(v: Variant, s: Scheme) -> Vec<MrmcActivation> {
        let mut cfg = HwConfig::for_scheme(v, s);
        cfg.trace_level = TraceLevel::Full;
        count_bubbles(&simulate(&cfg, &Key::zero(&cfg.params), b"", 1).unwrap().1)
    }

    #[test]
    fn one_activation_per_mrmc() {
        // r + 1 MRMC layers per block, per lane
        assert_eq!(acts(Variant::D3Full, Scheme::Rubato).len(), 3);
        assert_eq!(acts(Variant::D3Full, Scheme::Hera).len(), 2 * 6);
    }

    #[test]
    fn naive_vectorized_waits_for_a_column() {
        for a in acts(Variant::Vectorized, Scheme::Hera) {
            assert_eq!(a.pre_mrmc_bubble, 3);
            assert!(a.start >= a.input_ready);
        }
    }

    #[test]
    fn first_activation_has_no_inter_round_stall() {
        let a = acts(Variant::D3Full, Scheme::Hera);
        assert!(a.iter().filter(|x| x.activation == 0).all(|x| x.inter_round_stall.is_none()));
        assert!(a.iter().filter(|x| x.activation > 0).all(|x| x.inter_round_stall.is_some()));
    }
}
