use hhe_core::cipher::{Cipher, Key, Keystream, Scheme};
use hhe_core::pipesim::{
    count_bubbles, parse_csv, simulate, verify_layers, verify_trace, HwConfig, RejectionModel, TraceLevel, Variant,
};
use hhe_core::Error;

const ALL: [Variant; 4] = [Variant::D1Baseline, Variant::D2Decoupled, Variant::D3Full, Variant::Vectorized];

fn golden(cfg: &HwConfig, key: &Key, nonce: &[u8], count: usize) -> Vec<Keystream> {
    let c = Cipher::new(cfg.params.clone()).unwrap();
    (0..count as u64).map(|g| c.keystream(key, nonce, g).unwrap()).collect()
}

fn outputs(ks: &[Keystream]) -> Vec<Vec<u64>> {
    ks.iter().map(|k| k.values.clone()).collect()
}

#[test]
fn every_design_point_matches_reference() {
    for scheme in [Scheme::Hera, Scheme::Rubato] {
        for v in ALL {
            let mut cfg = HwConfig::for_scheme(v, scheme);
            cfg.trace_level = TraceLevel::Full;
            let key = Key::derive(b"pipesim", &cfg.params).unwrap();
            let blocks = 2;
            let (rep, trace) = simulate(&cfg, &key, b"n1", blocks).unwrap();
            trace.check_well_formed().unwrap();
            let gold = golden(&cfg, &key, b"n1", blocks * cfg.lanes);
            let s = verify_trace(&trace, &outputs(&gold)).unwrap();
            assert_eq!(s.blocks_checked, blocks * cfg.lanes, "{scheme} {v}");
            verify_layers(&trace, &gold).unwrap();
            assert_eq!(rep.constants_consumed, (cfg.params.constants_per_block() * blocks * cfg.lanes) as u64);
        }
    }
}

#[test]
fn stream_exact_model_also_matches() {
    let mut cfg = HwConfig::for_scheme(Variant::D2Decoupled, Scheme::Rubato);
    cfg.rejection_model = RejectionModel::StreamExact;
    let key = Key::zero(&cfg.params);
    let (_, trace) = simulate(&cfg, &key, b"x", 1).unwrap();
    let gold = golden(&cfg, &key, b"x", cfg.lanes);
    verify_trace(&trace, &outputs(&gold)).unwrap();
}

#[test]
fn corrupted_reference_is_reported() {
    let cfg = HwConfig::for_scheme(Variant::D3Full, Scheme::Hera);
    let key = Key::zero(&cfg.params);
    let (_, trace) = simulate(&cfg, &key, b"x", 1).unwrap();
    let mut gold = outputs(&golden(&cfg, &key, b"x", cfg.lanes));
    gold[1][5] ^= 1;
    match verify_trace(&trace, &gold) {
        Err(Error::Divergence { lane, element, .. }) => assert_eq!((lane, element), (1, 6)),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn calibrated_latencies() {
    let cases = [
        (Scheme::Rubato, Variant::D3Full, 66),
        (Scheme::Rubato, Variant::Vectorized, 109),
        (Scheme::Rubato, Variant::D2Decoupled, 761),
        (Scheme::Hera, Variant::D3Full, 90),
        (Scheme::Hera, Variant::D2Decoupled, 520),
    ];
    for (s, v, want) in cases {
        let cfg = HwConfig::for_scheme(v, s);
        let (rep, _) = simulate(&cfg, &Key::zero(&cfg.params), b"", 1).unwrap();
        assert_eq!(rep.latency_cycles, want, "{s} {v}");
    }
}

#[test]
fn full_design_has_no_pre_mrmc_bubbles() {
    for s in [Scheme::Hera, Scheme::Rubato] {
        let mut cfg = HwConfig::for_scheme(Variant::D3Full, s);
        cfg.trace_level = TraceLevel::Full;
        let (_, trace) = simulate(&cfg, &Key::zero(&cfg.params), b"", 2).unwrap();
        let acts = count_bubbles(&trace);
        assert!(!acts.is_empty());
        assert!(acts.iter().all(|a| a.pre_mrmc_bubble == 0), "{s}");
    }
    let mut cfg = HwConfig::for_scheme(Variant::Vectorized, Scheme::Rubato);
    cfg.trace_level = TraceLevel::Full;
    let (_, trace) = simulate(&cfg, &Key::zero(&cfg.params), b"", 1).unwrap();
    assert!(count_bubbles(&trace).iter().all(|a| a.pre_mrmc_bubble == 7));
}

#[test]
fn small_fifo_has_no_rng_stalls() {
    for s in [Scheme::Hera, Scheme::Rubato] {
        for v in [Variant::D2Decoupled, Variant::D3Full] {
            let cfg = HwConfig::for_scheme(v, s);
            let (rep, _) = simulate(&cfg, &Key::zero(&cfg.params), b"", 3).unwrap();
            assert_eq!(rep.rng_stall_cycles, 0, "{s} {v}");
            assert!(rep.fifo_max_occupancy <= cfg.fifo_capacity() as u64);
        }
    }
}

#[test]
fn presampling_needs_a_whole_block_of_storage() {
    let mut cfg = HwConfig::for_scheme(Variant::D1Baseline, Scheme::Rubato);
    cfg.fifo_depth = 187;
    match simulate(&cfg, &Key::zero(&cfg.params), b"", 1) {
        Err(Error::Deadlock { .. }) => {}
        other => panic!("expected deadlock, got {:?}", other.map(|r| r.0.latency_cycles)),
    }
}

#[test]
fn csv_round_trip() {
    let cfg = HwConfig::for_scheme(Variant::D3Full, Scheme::Rubato);
    let (_, trace) = simulate(&cfg, &Key::zero(&cfg.params), b"", 1).unwrap();
    let parsed = parse_csv(&trace.to_csv()).unwrap();
    assert_eq!(parsed.len(), trace.events.len());
    for (a, b) in parsed.iter().zip(&trace.events) {
        assert_eq!((a.cycle, a.unit, a.lane, &a.indices, a.order, &a.values), (b.cycle, b.unit, b.lane, &b.indices, b.order, &b.values));
    }
}

#[test]
fn report_json_has_msps() {
    let cfg = HwConfig::for_scheme(Variant::D3Full, Scheme::Rubato);
    let (rep, _) = simulate(&cfg, &Key::zero(&cfg.params), b"", 4).unwrap();
    let j = rep.to_json(Some(100.0));
    assert!(j["msps"]["keystream"].as_f64().unwrap() > 50.0);
    assert_eq!(j["latency_cycles"], 66);
}
