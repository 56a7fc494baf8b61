use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::schedule::{PassKind, Unit};
use super::trace::Trace;
use crate::cipher::Keystream;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub blocks_checked: usize,
    pub elements_checked: usize,
}

/// Cycle, unit, lane and value of an output element.
type Seen = (u64, Unit, u32, u64);

fn global_index(trace: &Trace, lane: u32, block: u32) -> usize {
    block as usize * trace.lanes + lane as usize
}

/// Rebuilds every block's keystream from final-layer events and compares it
/// with `golden[global block index]`. The earliest mismatching event is
/// reported; a missing element counts as a mismatch.
pub fn verify_trace(trace: &Trace, golden: &[Vec<u64>]) -> Result<VerifySummary> {
    let final_layer = trace
        .final_layer()
        .ok_or_else(|| Error::InvalidParameter("trace has no passes".into()))?;
    let final_unit = trace.passes[final_layer as usize].unit;
    // (cycle, unit, lane, element, got) per block
    let mut rebuilt: BTreeMap<usize, Vec<Option<Seen>>> = BTreeMap::new();
    let outputs = trace
        .events
        .iter()
        .filter(|e| e.layer == Some(final_layer) && !matches!(e.unit, Unit::Fifo | Unit::Rng));
    for e in outputs {
        let g = global_index(trace, e.lane, e.block);
        let slot = rebuilt.entry(g).or_insert_with(|| vec![None; trace.l]);
        for (&i, &v) in e.indices.iter().zip(&e.values) {
            let i = i as usize - 1;
            if i < trace.l {
                slot[i] = Some((e.cycle, e.unit, e.lane, v));
            }
        }
    }
    if rebuilt.is_empty() {
        return Err(Error::InvalidParameter("trace holds no output events".into()));
    }
    let mut first: Option<Error> = None;
    let mut first_cycle = u64::MAX;
    let mut elements = 0;
    for (&g, vals) in &rebuilt {
        let gold = golden
            .get(g)
            .ok_or_else(|| Error::InvalidParameter(format!("no reference keystream for block {g}")))?;
        for (i, slot) in vals.iter().enumerate() {
            elements += 1;
            let want = gold.get(i).copied().unwrap_or(u64::MAX);
            match slot {
                Some((.., got)) if *got == want => {}
                Some((cycle, unit, lane, got)) => {
                    if *cycle < first_cycle {
                        first_cycle = *cycle;
                        first = Some(Error::Divergence {
                            cycle: *cycle,
                            unit: unit.to_string(),
                            lane: *lane as usize,
                            element: i + 1,
                            expected: want,
                            got: *got,
                        });
                    }
                }
                None => {
                    if first.is_none() {
                        first = Some(Error::Divergence {
                            cycle: u64::MAX,
                            unit: final_unit.to_string(),
                            lane: g % trace.lanes,
                            element: i + 1,
                            expected: want,
                            got: u64::MAX,
                        });
                    }
                }
            }
        }
    }
    match first {
        Some(e) => Err(e),
        None => Ok(VerifySummary { blocks_checked: rebuilt.len(), elements_checked: elements }),
    }
}

/// Checks every recorded intermediate state against the reference model's
/// layer states. Needs a full trace.
pub fn verify_layers(trace: &Trace, golden: &[Keystream]) -> Result<VerifySummary> {
    let mut blocks = std::collections::BTreeSet::new();
    let mut elements = 0;
    let mut events: Vec<_> = trace.events.iter().filter(|e| e.layer.is_some()).collect();
    events.sort_by_key(|e| e.cycle);
    for e in events {
        let pi = e.layer.unwrap() as usize;
        let meta = &trace.passes[pi];
        if e.unit == Unit::Fifo || meta.kind == PassKind::MixColumns {
            continue;
        }
        let Some(gl) = meta.golden_layer else { continue };
        let g = global_index(trace, e.lane, e.block);
        let gold = golden
            .get(g)
            .ok_or_else(|| Error::InvalidParameter(format!("no reference keystream for block {g}")))?;
        let state = &gold.layers[gl].values;
        blocks.insert(g);
        for (&i, &v) in e.indices.iter().zip(&e.values) {
            let i = i as usize - 1;
            elements += 1;
            if state[i] != v {
                return Err(Error::Divergence {
                    cycle: e.cycle,
                    unit: e.unit.to_string(),
                    lane: e.lane as usize,
                    element: i + 1,
                    expected: state[i],
                    got: v,
                });
            }
        }
    }
    Ok(VerifySummary { blocks_checked: blocks.len(), elements_checked: elements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{Cipher, Key, Scheme};
    use crate::pipesim::{simulate, HwConfig, TraceLevel, Variant};

    fn run() -> (Trace, Vec<Keystream>) {
        let mut cfg = HwConfig::for_scheme(Variant::D2Decoupled, Scheme::Hera);
        cfg.lanes = 2;
        cfg.trace_level = TraceLevel::Full;
        let key = Key::derive(b"v", &cfg.params).unwrap();
        let (_, t) = simulate(&cfg, &key, b"n", 1).unwrap();
        let c = Cipher::new(cfg.params.clone()).unwrap();
        let gold = (0..2).map(|g| c.keystream(&key, b"n", g).unwrap()).collect();
        (t, gold)
    }

    #[test]
    fn clean_run_verifies() {
        let (t, gold) = run();
        let outs: Vec<Vec<u64>> = gold.iter().map(|k| k.values.clone()).collect();
        assert_eq!(verify_trace(&t, &outs).unwrap(), VerifySummary { blocks_checked: 2, elements_checked: 32 });
        assert!(verify_layers(&t, &gold).unwrap().elements_checked > 32);
    }

    #[test]
    fn injected_fault_is_localized() {
        let (mut t, gold) = run();
        let outs: Vec<Vec<u64>> = gold.iter().map(|k| k.values.clone()).collect();
        let fl = t.final_layer();
        let i = t.events.iter().position(|e| e.layer == fl && e.lane == 1 && e.unit == Unit::Ark).unwrap();
        t.events[i].values[0] ^= 1;
        let (cycle, elem) = (t.events[i].cycle, t.events[i].indices[0] as usize);
        match verify_trace(&t, &outs) {
            Err(Error::Divergence { cycle: c, lane, element, .. }) => assert_eq!((c, lane, element), (cycle, 1, elem)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_output_is_an_error() {
        let (mut t, gold) = run();
        let outs: Vec<Vec<u64>> = gold.iter().map(|k| k.values.clone()).collect();
        let fl = t.final_layer();
        let i = t.events.iter().position(|e| e.layer == fl && e.unit == Unit::Ark).unwrap();
        t.events.remove(i);
        assert!(matches!(verify_trace(&t, &outs), Err(Error::Divergence { .. })));
        assert!(verify_trace(&t, &outs[..1]).is_err());
    }
}
