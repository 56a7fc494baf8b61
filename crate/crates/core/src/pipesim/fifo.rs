use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FifoStats {
    /// Cycles a consumer demand could not be met.
    pub consumer_stall_cycles: u64,
    /// Cycles the producer had to hold back because the FIFO was full.
    pub producer_full_cycles: u64,
    pub max_occupancy: f64,
    /// Cycles until the whole schedule was served.
    pub cycles: u64,
}

/// Cycle-stepped FIFO between a constant-rate producer and a consumer that
/// asks for `consumer_schedule[i]` bits in its `i`-th active cycle. Unmet
/// demand stalls the consumer, shifting the rest of its schedule. Anything
/// produced in cycle `t` is visible from `t + 1`. The FIFO starts empty
/// unless `prefill` is set.
pub fn fifo_model(
    producer_bits_per_cycle: f64,
    consumer_schedule: &[f64],
    depth_bits: f64,
    prefill: bool,
) -> FifoStats {
    let mut occ = if prefill { depth_bits } else { 0.0 };
    let mut stats = FifoStats {
        consumer_stall_cycles: 0,
        producer_full_cycles: 0,
        max_occupancy: occ,
        cycles: 0,
    };
    let mut i = 0;
    let limit = consumer_schedule.len() as u64 * 1000 + 1000;
    while i < consumer_schedule.len() && stats.cycles < limit {
        let demand = consumer_schedule[i];
        if demand <= occ + 1e-9 {
            occ -= demand;
            i += 1;
        } else {
            stats.consumer_stall_cycles += 1;
        }
        let room = depth_bits - occ;
        if room + 1e-9 < producer_bits_per_cycle {
            stats.producer_full_cycles += 1;
        }
        occ += producer_bits_per_cycle.min(room.max(0.0));
        stats.max_occupancy = stats.max_occupancy.max(occ);
        stats.cycles += 1;
    }
    stats
}

/// Per-cycle demand (in bits) of the ARK unit of one lane, from a full trace.
pub fn ark_demand_schedule(trace: &super::trace::Trace, lane: u32, bits_per_constant: u32) -> Vec<f64> {
    use super::schedule::Unit;
    let fifo: Vec<_> = trace.events.iter().filter(|e| e.unit == Unit::Fifo && e.lane == lane).collect();
    let (Some(first), Some(last)) = (fifo.first(), fifo.last()) else { return vec![] };
    let (t0, t1) = (first.cycle, last.cycle);
    let mut sched = vec![0.0; (t1 - t0 + 1) as usize];
    for e in fifo {
        sched[(e.cycle - t0) as usize] += (e.values.len() as u32 * bits_per_constant) as f64;
    }
    sched
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_producer_never_starves_steady_consumer() {
        let s = fifo_model(128.0, &vec![84.0; 10_000], 8.0 * 200.0, true);
        assert_eq!(s.consumer_stall_cycles, 0);
        assert!(s.max_occupancy <= 1600.0 + 1e-9);
    }

    #[test]
    fn slow_producer_stalls() {
        let s = fifo_model(50.0, &vec![100.0; 100], 400.0, false);
        assert!(s.consumer_stall_cycles >= 100);
    }

    #[test]
    fn burst_absorbed_by_prefill() {
        // eight 200-bit bursts back to back, then idle
        let mut sched = vec![200.0; 8];
        sched.extend(vec![0.0; 20]);
        assert_eq!(fifo_model(128.0, &sched, 1600.0, true).consumer_stall_cycles, 0);
        assert!(fifo_model(128.0, &sched, 1600.0, false).consumer_stall_cycles > 0);
    }
}
