use proptest::prelude::*;

use hhe_core::cipher::{
    decrypt_with_keystream, encrypt_with_keystream, feistel, feistel_inverse, format_params, mix_columns, mix_rows,
    mrmc, parse_params, Cipher, CipherParams, Key, MixingMatrix, Order, Scheme, StateMatrix,
};
use hhe_core::pipesim::{fifo_model, parse_csv, simulate, verify_trace, HwConfig, PassKind, TraceLevel, Unit, Variant};
use hhe_core::sampler::build_cdf_table;
use hhe_core::Modulus;

fn modulus() -> impl Strategy<Value = Modulus> {
    prop_oneof![Just(17u64), Just(33_292_289), Just(268_435_367), Just((1u64 << 61) - 1)]
        .prop_map(|q| Modulus::new(q).unwrap())
}

fn state(v: usize, q: u64) -> impl Strategy<Value = StateMatrix> {
    prop::collection::vec(0..q, v * v).prop_map(move |x| StateMatrix::new(x, Modulus::new(q).unwrap(), Order::Row).unwrap())
}

proptest! {
    #[test]
    fn ring_laws(q in modulus(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (a, b, c) = (q.reduce(a), q.reduce(b), q.reduce(c));
        prop_assert!(a < q.value());
        prop_assert_eq!(q.mul(a, q.add(b, c)), q.add(q.mul(a, b), q.mul(a, c)));
        prop_assert_eq!(q.mul(q.mul(a, b), c), q.mul(a, q.mul(b, c)));
        prop_assert_eq!(q.sub(q.add(a, b), b), a);
        prop_assert_eq!(q.cube(a), q.mul(a, q.mul(a, a)));
        let z = q.center(a);
        prop_assert!(2 * z.unsigned_abs() <= q.value());
        prop_assert_eq!(q.reduce_i64(z), a);
    }

    #[test]
    fn mrmc_commutes_with_transpose_v4(x in state(4, 268_435_367)) {
        let m = MixingMatrix::default_for(4).unwrap();
        let y = mrmc(&x, &m).unwrap();
        prop_assert_eq!(mrmc(&x.transpose(), &m).unwrap().into_values(), y.transpose().into_values());
        prop_assert_eq!(mix_rows(&mix_columns(&x, &m).unwrap(), &m).unwrap().into_values(), y.values().to_vec());
        prop_assert_eq!(y.order(), Order::Col);
    }

    #[test]
    fn mrmc_commutes_with_transpose_v8(x in state(8, 33_292_289)) {
        let m = MixingMatrix::default_for(8).unwrap();
        let y = mrmc(&x, &m).unwrap();
        prop_assert_eq!(mrmc(&x.transpose(), &m).unwrap().into_values(), y.transpose().into_values());
    }

    #[test]
    fn mix_columns_is_linear(x in state(4, 17), y in state(4, 17), a in 0u64..17, b in 0u64..17) {
        let q = Modulus::new(17).unwrap();
        let m = MixingMatrix::default_for(4).unwrap();
        let comb = |u: &[u64], w: &[u64]| -> Vec<u64> {
            u.iter().zip(w).map(|(&s, &t)| q.add(q.mul(a, s), q.mul(b, t))).collect()
        };
        let lhs = mix_columns(&StateMatrix::new(comb(x.values(), y.values()), q, Order::Row).unwrap(), &m).unwrap();
        let (mx, my) = (mix_columns(&x, &m).unwrap(), mix_columns(&y, &m).unwrap());
        prop_assert_eq!(lhs.values().to_vec(), comb(mx.values(), my.values()));
    }

    #[test]
    fn mrmc_tag_parity(x in state(4, 17), k in 0usize..6) {
        let m = MixingMatrix::default_for(4).unwrap();
        let mut y = x.clone();
        for _ in 0..k {
            y = mrmc(&y, &m).unwrap();
        }
        prop_assert_eq!(y.order(), if k % 2 == 1 { Order::Col } else { Order::Row });
    }

    #[test]
    fn feistel_round_trip(x in state(8, 33_292_289)) {
        prop_assert_eq!(feistel_inverse(&feistel(&x)).into_values(), x.values().to_vec());
    }

    #[test]
    fn encoding_round_trip(
        z in prop::collection::vec(0u64..33_292_289, 60),
        m in prop::collection::vec(-100.0f64..100.0, 60),
    ) {
        let delta = 1024.0;
        let c = encrypt_with_keystream(&z, &m, delta, 33_292_289).unwrap();
        let back = decrypt_with_keystream(&z, &c, delta, 33_292_289).unwrap();
        for (a, b) in m.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 0.5 / delta + 1e-12);
        }
    }

    #[test]
    fn paramfile_round_trip(r in 1usize..8, ic_shift in 0u64..1000, rubato in any::<bool>()) {
        let mut p = if rubato { CipherParams::rubato_par128l() } else { CipherParams::hera_par128a() };
        p.r = r;
        p.ic.iter_mut().for_each(|x| *x += ic_shift);
        prop_assert_eq!(parse_params(&format_params(&p)).unwrap(), p);
    }

    #[test]
    fn cdf_inversion_is_monotone(a in any::<u64>(), b in any::<u64>()) {
        let t = build_cdf_table(1.6, 64, 16).unwrap();
        let (lo, hi) = (a.min(b) as u128, a.max(b) as u128);
        prop_assert!(t.invert(lo) <= t.invert(hi));
        prop_assert!(t.invert(hi) <= 16);
    }

    #[test]
    fn fifo_never_exceeds_depth(
        rate in 1.0f64..200.0,
        demand in prop::collection::vec(0.0f64..150.0, 1..200),
        depth in 150.0f64..2000.0,
        prefill in any::<bool>(),
    ) {
        let s = fifo_model(rate, &demand, depth, prefill);
        prop_assert!(s.max_occupancy <= depth + 1e-6);
        if rate >= 150.0 && prefill {
            prop_assert_eq!(s.consumer_stall_cycles, 0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulator_matches_reference(
        seed in prop::collection::vec(any::<u8>(), 0..16),
        nonce in prop::collection::vec(any::<u8>(), 0..7),
        hera in any::<bool>(),
        variant in prop_oneof![Just(Variant::D1Baseline), Just(Variant::D2Decoupled), Just(Variant::D3Full), Just(Variant::Vectorized)],
    ) {
        let scheme = if hera { Scheme::Hera } else { Scheme::Rubato };
        let cfg = HwConfig::for_scheme(variant, scheme);
        let key = Key::derive(&seed, &cfg.params).unwrap();
        let (_, trace) = simulate(&cfg, &key, &nonce, 1).unwrap();
        let c = Cipher::new(cfg.params.clone()).unwrap();
        let gold: Vec<Vec<u64>> = (0..cfg.lanes as u64).map(|g| c.keystream(&key, &nonce, g).unwrap().values).collect();
        prop_assert!(verify_trace(&trace, &gold).is_ok());
    }
}

#[test]
fn mrmc_tags_alternate_in_full_design() {
    for s in [Scheme::Hera, Scheme::Rubato] {
        let mut cfg = HwConfig::for_scheme(Variant::D3Full, s);
        cfg.trace_level = TraceLevel::Full;
        let (_, trace) = simulate(&cfg, &Key::zero(&cfg.params), b"", 1).unwrap();
        let mut tags: Vec<Order> = trace
            .events
            .iter()
            .filter(|e| e.lane == 0 && e.layer.is_some_and(|l| trace.passes[l as usize].kind == PassKind::MixRows))
            .map(|e| (e.cycle, e.order))
            .collect::<Vec<_>>()
            .chunks(cfg.params.v)
            .map(|ch| {
                assert!(ch.iter().all(|x| x.1 == ch[0].1));
                ch[0].1
            })
            .collect();
        tags.dedup();
        assert_eq!(tags.len(), cfg.params.r + 1, "{s}: MRMC outputs must alternate");
    }
}

#[test]
fn mrmc_event_conservation() {
    for s in [Scheme::Hera, Scheme::Rubato] {
        for v in [Variant::D2Decoupled, Variant::D3Full] {
            let mut cfg = HwConfig::for_scheme(v, s);
            cfg.trace_level = TraceLevel::Full;
            let (_, trace) = simulate(&cfg, &Key::zero(&cfg.params), b"", 1).unwrap();
            let p = &cfg.params;
            let per_pass = p.n / cfg.vector_width;
            let got = trace.events.iter().filter(|e| e.lane == 0 && e.unit == Unit::Mrmc).count();
            assert_eq!(got, 2 * (p.r + 1) * per_pass, "{s} {v}");
            let elems: usize = trace
                .events
                .iter()
                .filter(|e| e.lane == 0 && e.unit == Unit::Fifo)
                .map(|e| e.values.len())
                .sum();
            assert_eq!(elems, p.constants_per_block(), "{s} {v}");
        }
    }
}

#[test]
fn latency_ordering() {
    for s in [Scheme::Hera, Scheme::Rubato] {
        let lat = |v| {
            let cfg = HwConfig::for_scheme(v, s);
            simulate(&cfg, &Key::zero(&cfg.params), b"", 1).unwrap().0.latency_cycles
        };
        let (d1, d2, d3) = (lat(Variant::D1Baseline), lat(Variant::D2Decoupled), lat(Variant::D3Full));
        assert!(d3 < d2 && d2 < d1, "{s}: {d1} {d2} {d3}");
    }
}

/// Decoupling hides the pre-sampling phase: the D2 latency is at most the D1
/// latency minus (1 - 0.1) times the cycles D1 spends sampling up front.
#[test]
fn decoupling_hides_sampling() {
    for s in [Scheme::Hera, Scheme::Rubato] {
        let mut c1 = HwConfig::for_scheme(Variant::D1Baseline, s);
        c1.trace_level = TraceLevel::Full;
        let (r1, t1) = simulate(&c1, &Key::zero(&c1.params), b"", 1).unwrap();
        let first_ark = t1.spans.iter().filter(|sp| sp.lane == 7).map(|sp| sp.first_issue).min().unwrap();
        let c2 = HwConfig::for_scheme(Variant::D2Decoupled, s);
        let (r2, _) = simulate(&c2, &Key::zero(&c2.params), b"", 1).unwrap();
        assert_eq!(r2.rng_stall_cycles, 0);
        let presample = first_ark as f64;
        assert!((r2.latency_cycles as f64) < r1.latency_cycles as f64 - presample * 0.9, "{s}: {} vs {} - {presample}", r2.latency_cycles, r1.latency_cycles);
    }
}

#[test]
fn trace_csv_parses() {
    let mut cfg = HwConfig::for_scheme(Variant::D2Decoupled, Scheme::Hera);
    cfg.trace_level = TraceLevel::Full;
    let (_, trace) = simulate(&cfg, &Key::zero(&cfg.params), b"", 1).unwrap();
    trace.check_well_formed().unwrap();
    assert_eq!(parse_csv(&trace.to_csv()).unwrap().len(), trace.events.len());
}
