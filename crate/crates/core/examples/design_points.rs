//! Prints latency, throughput and MRMC stalls for every design point.

use hhe_core::cipher::{Key, Scheme};
use hhe_core::pipesim::{count_bubbles, simulate, HwConfig, TraceLevel, Variant};

fn main() -> hhe_core::Result<()> {
    for scheme in [Scheme::Hera, Scheme::Rubato] {
        let mut points: Vec<(String, HwConfig)> = [Variant::D1Baseline, Variant::D2Decoupled, Variant::D3Full]
            .into_iter()
            .map(|v| (v.to_string(), HwConfig::for_scheme(v, scheme)))
            .collect();
        let mut fo = HwConfig::for_scheme(Variant::Vectorized, scheme);
        points.push(("vec".into(), fo.clone()));
        fo.function_overlap = true;
        points.push(("vec+fo".into(), fo));

        println!("{scheme}");
        for (name, mut cfg) in points {
            cfg.trace_level = TraceLevel::Full;
            let key = Key::zero(&cfg.params);
            let (rep, trace) = simulate(&cfg, &key, b"", 4)?;
            let acts: Vec<_> = count_bubbles(&trace).into_iter().filter(|a| a.lane == 0 && a.block == 0).collect();
            let bubbles: Vec<u64> = acts.iter().map(|a| a.pre_mrmc_bubble).collect();
            let stalls: Vec<u64> = acts.iter().filter_map(|a| a.inter_round_stall).collect();
            println!(
                "  {name:7} latency {:5}  II {:7.1}  elems/cycle {:.3}  bubbles {bubbles:?}  inter-round {stalls:?}",
                rep.latency_cycles, rep.initiation_interval_cycles, rep.elements_per_cycle
            );
        }
    }
    Ok(())
}
