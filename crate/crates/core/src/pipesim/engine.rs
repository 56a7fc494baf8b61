use std::collections::{BTreeMap, VecDeque};

use super::bubbles::count_bubbles;
use super::config::{HwConfig, RejectionModel, TraceLevel};
use super::report::{BlockTiming, SimReport};
use super::schedule::{build_schedule, PassKind, Schedule, Unit};
use super::trace::{PassSpan, Trace, TraceEvent};
use crate::cipher::{stream_material, Key, Scheme};
use crate::error::{Error, Result};
use crate::sampler::{
    build_cdf_table, rejection_sample_uniform, sample_discrete_gaussian, xof_init, DomainTag,
    SamplerStats,
};
use crate::zq::Modulus;

const INF: u64 = u64::MAX;
const EPS: f64 = 1e-9;
/// Hard stop, far beyond any sane configuration.
const MAX_CYCLES: u64 = 50_000_000;

struct BlockRun {
    global: u64,
    rc: Vec<u64>,
    noise: Vec<i64>,
    avail: Vec<u64>,
    vals: Vec<u64>,
    done: Vec<Vec<bool>>,
    remaining: Vec<usize>,
    first_issue: Vec<u64>,
    last_issue: Vec<u64>,
    started: bool,
    base: u64,
    fin: Option<u64>,
}

struct Lane {
    blocks: Vec<BlockRun>,
    programs: [VecDeque<(usize, usize)>; 4],
    busy: [u64; 4],
    /// Constants delivered so far (fractional in the expected-rate model).
    produced: f64,
    consumed: u64,
    accept_flags: Vec<bool>,
    flag_pos: usize,
    noise_produced: u64,
    noise_consumed: u64,
    completed: usize,
    rc_stall: u64,
    unit_stall: [u64; 4],
}

impl Lane {
    fn rc_available(&self) -> u64 {
        ((self.produced + EPS).floor() as u64).saturating_sub(self.consumed)
    }
}

struct Engine<'a> {
    cfg: &'a HwConfig,
    sched: Schedule,
    key: &'a Key,
    q: Modulus,
    lanes: Vec<Lane>,
    blocks: usize,
    total_rc: usize,
    total_noise: usize,
    cap: f64,
    candidates_per_cycle: u32,
    accept_prob: f64,
    trace: Trace,
    horizon: u64,
    max_occ: u64,
    aes_rr: usize,
    noise_rr: usize,
}

fn unit_latency(cfg: &HwConfig, u: Unit) -> u64 {
    match u {
        Unit::Ark => cfg.timing.ark,
        Unit::Mrmc => cfg.timing.mrmc,
        Unit::Nonlin => cfg.timing.nonlin,
        Unit::Agn => cfg.timing.agn,
        _ => 1,
    }
}

/// Runs `blocks` keystream blocks on every lane. Lane `k` computes global
/// blocks `k, k + lanes, k + 2 lanes, ...` under the same key and nonce.
pub fn simulate(cfg: &HwConfig, key: &Key, nonce: &[u8], blocks: usize) -> Result<(SimReport, Trace)> {
    cfg.validate()?;
    if blocks == 0 {
        return Err(Error::InvalidParameter("at least one block required".into()));
    }
    let p = &cfg.params;
    if key.values().len() != p.n {
        return Err(Error::LengthMismatch { expected: p.n, got: key.values().len() });
    }
    let sched = build_schedule(p, cfg.vector_width, cfg.mrmc_opt, cfg.timing.scalar_cube_occupancy);
    let table = match (p.scheme, p.sigma) {
        (Scheme::Rubato, Some(s)) => Some(build_cdf_table(s, p.precision_bits(), p.tail_cut)?),
        _ => None,
    };
    let total_rc = sched.constants_per_block();
    let total_noise = sched.noise_per_block();
    let n = p.n;
    let stages = sched.stages;

    let mut lanes = Vec::with_capacity(cfg.lanes);
    for ln in 0..cfg.lanes {
        let mut runs = Vec::with_capacity(blocks);
        let mut flags = Vec::new();
        for j in 0..blocks {
            let global = (j * cfg.lanes + ln) as u64;
            let material = stream_material(nonce, global)?;
            let mut xof = xof_init(&material, DomainTag::RoundConstants)?;
            let mut st = SamplerStats::default();
            let mut rc = Vec::with_capacity(total_rc);
            for _ in 0..total_rc {
                let before = st.draws_attempted;
                rc.push(rejection_sample_uniform(&mut xof, p.q, p.exclude_zero, &mut st)?.value());
                flags.extend(std::iter::repeat_n(false, (st.draws_attempted - before - 1) as usize));
                flags.push(true);
            }
            let noise = match &table {
                Some(t) => {
                    let mut nx = xof_init(&material, DomainTag::Noise)?;
                    let mut ns = SamplerStats::default();
                    (0..total_noise).map(|_| sample_discrete_gaussian(&mut nx, t, &mut ns)).collect()
                }
                None => vec![0; total_noise],
            };
            let mut vals = vec![0u64; stages * n];
            vals[..n].copy_from_slice(&p.ic);
            let mut avail = vec![INF; stages * n];
            avail[..n].fill(0);
            runs.push(BlockRun {
                global,
                rc,
                noise,
                avail,
                vals,
                done: sched.passes.iter().map(|x| vec![false; x.ops.len()]).collect(),
                remaining: sched.passes.iter().map(|x| x.ops.len()).collect(),
                first_issue: vec![INF; sched.passes.len()],
                last_issue: vec![INF; sched.passes.len()],
                started: false,
                base: 0,
                fin: None,
            });
        }
        let mut programs: [VecDeque<(usize, usize)>; 4] = Default::default();
        for b in 0..blocks {
            for (pi, pass) in sched.passes.iter().enumerate() {
                programs[pass.unit.compute_index()].push_back((b, pi));
            }
        }
        lanes.push(Lane {
            blocks: runs,
            programs,
            busy: [0; 4],
            produced: 0.0,
            consumed: 0,
            accept_flags: flags,
            flag_pos: 0,
            noise_produced: 0,
            noise_consumed: 0,
            completed: 0,
            rc_stall: 0,
            unit_stall: [0; 4],
        });
    }

    let bits = p.q.bits();
    let admitted = p.q.value() - p.exclude_zero as u64;
    let trace = Trace {
        events: Vec::new(),
        spans: Vec::new(),
        passes: sched.metas(),
        timing: cfg.timing,
        n,
        l: p.l,
        lanes: cfg.lanes,
    };
    let mut eng = Engine {
        cfg,
        key,
        q: p.q,
        lanes,
        blocks,
        total_rc,
        total_noise,
        cap: cfg.fifo_capacity() as f64,
        candidates_per_cycle: cfg.rng_bits_per_cycle / bits,
        accept_prob: admitted as f64 / (1u64 << bits) as f64,
        trace,
        horizon: cfg.lane_stagger * cfg.lanes as u64,
        max_occ: 0,
        aes_rr: 0,
        noise_rr: 0,
        sched,
    };
    eng.run()?;
    Ok(eng.finish())
}

impl Engine<'_> {
    fn rc_limit(&self, lane: &Lane) -> f64 {
        if self.cfg.presample() {
            ((lane.completed + 1).min(self.blocks) * self.total_rc) as f64
        } else {
            (self.blocks * self.total_rc) as f64
        }
    }

    fn noise_limit(&self, lane: &Lane) -> u64 {
        let blocks = if self.cfg.presample() { (lane.completed + 1).min(self.blocks) } else { self.blocks };
        (blocks * self.total_noise) as u64
    }

    fn emit(&mut self, ev: TraceEvent, final_layer: bool) {
        match self.cfg.trace_level {
            TraceLevel::Full => self.trace.events.push(ev),
            TraceLevel::Outputs if final_layer || ev.unit == Unit::Tr => self.trace.events.push(ev),
            _ => {}
        }
    }

    /// Round-constant and noise production during cycle `t`.
    fn produce(&mut self, t: u64) -> bool {
        let mut activity = false;
        let nl = self.lanes.len();
        let presample = self.cfg.presample();

        // one AES block per cycle, handed to the next lane that can take it
        for k in 0..nl {
            let ln = (self.aes_rr + k) % nl;
            let lane = &self.lanes[ln];
            if lane.completed >= self.blocks {
                continue;
            }
            let limit = self.rc_limit(lane);
            let room = self.cap - (lane.produced - lane.consumed as f64);
            if lane.produced >= limit - EPS || room <= EPS {
                continue;
            }
            let ceiling = (lane.consumed as f64 + self.cap).min(limit);
            let before = lane.produced;
            let lane = &mut self.lanes[ln];
            match self.cfg.rejection_model {
                RejectionModel::ExpectedRate => {
                    let gain = self.candidates_per_cycle as f64 * self.accept_prob;
                    lane.produced = (lane.produced + gain).min(ceiling);
                }
                RejectionModel::StreamExact => {
                    for _ in 0..self.candidates_per_cycle {
                        if lane.produced + 1.0 > ceiling + EPS || lane.flag_pos >= lane.accept_flags.len() {
                            break;
                        }
                        if lane.accept_flags[lane.flag_pos] {
                            lane.produced += 1.0;
                        }
                        lane.flag_pos += 1;
                    }
                }
            }
            let occ = lane.rc_available();
            self.max_occ = self.max_occ.max(occ);
            let delivered = (lane.produced + EPS).floor() as u64 - (before + EPS).floor() as u64;
            self.aes_rr = ln + 1;
            activity = true;
            let order = crate::cipher::Order::Row;
            self.emit(
                TraceEvent {
                    cycle: t,
                    unit: Unit::Rng,
                    lane: ln as u32,
                    block: lane_block(&self.lanes[ln]),
                    layer: None,
                    indices: vec![],
                    order,
                    values: vec![delivered],
                },
                false,
            );
            break;
        }

        let noise_phase = !presample
            || self.lanes.iter().all(|l| {
                l.completed >= self.blocks || l.produced >= self.rc_limit(l) - EPS
            });
        if noise_phase && self.total_noise > 0 {
            for _ in 0..self.cfg.noise_samples_per_cycle {
                let mut served = false;
                for k in 0..nl {
                    let ln = (self.noise_rr + k) % nl;
                    let lim = self.noise_limit(&self.lanes[ln]);
                    let lane = &mut self.lanes[ln];
                    if lane.completed < self.blocks
                        && lane.noise_produced < lim
                        && lane.noise_produced - lane.noise_consumed < self.sched.l as u64
                    {
                        lane.noise_produced += 1;
                        self.noise_rr = ln + 1;
                        served = true;
                        break;
                    }
                }
                if !served {
                    break;
                }
                activity = true;
            }
        }
        activity
    }

    /// Whether block `b` of lane `ln` may issue its first operation at `t`.
    fn may_start(&self, ln: usize, b: usize, t: u64) -> bool {
        let lane = &self.lanes[ln];
        if b == 0 && t < ln as u64 * self.cfg.lane_stagger {
            return false;
        }
        if b > 0 && !self.cfg.pipelined_blocks() {
            match lane.blocks[b - 1].fin {
                Some(f) if f <= t => {}
                _ => return false,
            }
        }
        if self.cfg.presample() {
            let need = ((b + 1) * self.total_rc) as f64;
            let need_noise = ((b + 1) * self.total_noise) as u64;
            lane.produced >= need - EPS && lane.noise_produced >= need_noise
        } else if b == 0 {
            lane.rc_available() as f64 >= self.cap.min(self.total_rc as f64) - EPS
        } else {
            true
        }
    }

    fn step_lane(&mut self, ln: usize, t: u64) -> Result<bool> {
        let mut activity = false;
        for u in Unit::COMPUTE {
            let ui = u.compute_index();
            if self.lanes[ln].busy[ui] > t {
                continue;
            }
            let Some(&(b, pi)) = self.lanes[ln].programs[ui].front() else { continue };
            if !self.cfg.function_overlap && pi > 0 {
                let prev = self.lanes[ln].blocks[b].last_issue[pi - 1];
                if prev == INF || prev >= t {
                    if self.lanes[ln].blocks[b].started {
                        self.lanes[ln].unit_stall[ui] += 1;
                    }
                    continue;
                }
            }
            if !self.lanes[ln].blocks[b].started {
                if pi != 0 || !self.may_start(ln, b, t) {
                    continue;
                }
                let base = if self.cfg.presample() {
                    if b == 0 { 0 } else { self.lanes[ln].blocks[b - 1].fin.unwrap_or(0) }
                } else {
                    t
                };
                let run = &mut self.lanes[ln].blocks[b];
                run.started = true;
                run.base = base;
                activity = true;
            }
            if self.try_issue(ln, b, pi, t)? {
                activity = true;
            } else {
                self.lanes[ln].unit_stall[ui] += 1;
            }
        }
        Ok(activity)
    }

    fn try_issue(&mut self, ln: usize, b: usize, pi: usize, t: u64) -> Result<bool> {
        let n = self.sched.n;
        let pass = &self.sched.passes[pi];
        let lane = &self.lanes[ln];
        let run = &lane.blocks[b];
        let mut chosen = None;
        for (oi, op) in pass.ops.iter().enumerate() {
            if run.done[pi][oi] {
                continue;
            }
            if op.deps.iter().all(|&(s, e)| run.avail[s * n + e] <= t) {
                chosen = Some(oi);
                break;
            }
        }
        let Some(oi) = chosen else { return Ok(false) };
        let op = &pass.ops[oi];
        if op.constants > 0 && lane.rc_available() < op.constants as u64 {
            self.lanes[ln].rc_stall += 1;
            return Ok(false);
        }
        if op.noise > 0 && lane.noise_produced - lane.noise_consumed < op.noise as u64 {
            return Ok(false);
        }

        let q = self.q;
        let key = self.key.values();
        let m = &self.cfg.params.mixing;
        let (ins, outs) = (pass.in_stage * n, pass.out_stage * n);
        let lat = unit_latency(self.cfg, pass.unit);
        let unit = pass.unit;
        let kind = pass.kind;
        let order = pass.order;
        let final_pass = pi + 1 == self.sched.passes.len();
        let lane = &mut self.lanes[ln];
        let run = &mut lane.blocks[b];
        let mut produced = Vec::with_capacity(op.outs.len());
        let mut used_rc = Vec::new();
        for (k, &e) in op.outs.iter().enumerate() {
            let x = match kind {
                PassKind::Ark { offset, .. } => {
                    let c = run.rc[offset + e];
                    used_rc.push(c);
                    q.add(run.vals[ins + e], q.mul(key[e], c))
                }
                PassKind::MixColumns | PassKind::MixRows => {
                    let row = &m.rows()[op.m_rows[k]];
                    let acc: u128 = op
                        .src
                        .iter()
                        .zip(row)
                        .map(|(&s, &c)| c as u128 * run.vals[ins + s] as u128)
                        .sum();
                    (acc % q.value() as u128) as u64
                }
                PassKind::Cube => q.cube(run.vals[ins + e]),
                PassKind::Feistel => {
                    if e == 0 {
                        run.vals[ins]
                    } else {
                        q.add(run.vals[ins + e], q.square(run.vals[ins + e - 1]))
                    }
                }
                PassKind::Agn => q.add(run.vals[ins + e], q.reduce_i64(run.noise[e])),
            };
            run.vals[outs + e] = x;
            run.avail[outs + e] = t + lat;
            produced.push(x);
        }
        run.done[pi][oi] = true;
        run.remaining[pi] -= 1;
        if run.first_issue[pi] == INF {
            run.first_issue[pi] = t;
        }
        let pass_done = run.remaining[pi] == 0;
        if pass_done {
            run.last_issue[pi] = t;
        }
        lane.busy[unit.compute_index()] = t + op.occupancy;
        lane.consumed += op.constants as u64;
        lane.noise_consumed += op.noise as u64;
        self.horizon = self.horizon.max(t + lat).max(t + op.occupancy);

        let indices: Vec<u16> = op.outs.iter().map(|&e| e as u16 + 1).collect();
        if !used_rc.is_empty() {
            self.emit(
                TraceEvent {
                    cycle: t,
                    unit: Unit::Fifo,
                    lane: ln as u32,
                    block: b as u32,
                    layer: Some(pi as u16),
                    indices: indices.clone(),
                    order,
                    values: used_rc,
                },
                false,
            );
        }
        self.emit(
            TraceEvent {
                cycle: t,
                unit,
                lane: ln as u32,
                block: b as u32,
                layer: Some(pi as u16),
                indices,
                order,
                values: produced,
            },
            final_pass,
        );

        if pass_done {
            let lane = &mut self.lanes[ln];
            lane.programs[unit.compute_index()].pop_front();
            let run = &lane.blocks[b];
            self.trace.spans.push(PassSpan {
                lane: ln as u32,
                block: b as u32,
                pass: pi as u16,
                first_issue: run.first_issue[pi],
                last_issue: t,
            });
            let final_ark = matches!(kind, PassKind::Ark { round, .. } if round == self.cfg.params.r);
            if final_ark && self.sched.l < n {
                self.emit(
                    TraceEvent {
                        cycle: t,
                        unit: Unit::Tr,
                        lane: ln as u32,
                        block: b as u32,
                        layer: None,
                        indices: (self.sched.l + 1..=n).map(|e| e as u16).collect(),
                        order,
                        values: vec![],
                    },
                    false,
                );
            }
            self.finish_block_if_done(ln, b);
        }
        Ok(true)
    }

    fn finish_block_if_done(&mut self, ln: usize, b: usize) {
        let n = self.sched.n;
        let fs = self.sched.final_stage();
        let lane = &mut self.lanes[ln];
        let run = &mut lane.blocks[b];
        if run.remaining.iter().any(|&r| r > 0) {
            return;
        }
        let fin = run.avail[fs * n..(fs + 1) * n].iter().copied().filter(|&a| a != INF).max().unwrap_or(0);
        run.fin = Some(fin);
        lane.completed += 1;
        self.horizon = self.horizon.max(fin);
    }

    fn run(&mut self) -> Result<()> {
        let mut t: u64 = 0;
        loop {
            let mut activity = self.produce(t);
            t += 1;
            let mut all_done = true;
            for ln in 0..self.lanes.len() {
                if self.lanes[ln].completed >= self.blocks {
                    continue;
                }
                all_done = false;
                if self.step_lane(ln, t)? {
                    activity = true;
                }
            }
            if all_done {
                return Ok(());
            }
            if !activity && t > self.horizon {
                return Err(self.deadlock(t));
            }
            if t > MAX_CYCLES {
                return Err(self.deadlock(t));
            }
        }
    }

    fn deadlock(&self, t: u64) -> Error {
        let detail = self
            .lanes
            .iter()
            .enumerate()
            .filter(|(_, l)| l.completed < self.blocks)
            .map(|(i, l)| {
                format!(
                    "lane {i}: block {} waiting, fifo {}/{} constants, {} of {} produced",
                    l.completed,
                    l.rc_available(),
                    self.cap,
                    (l.produced + EPS).floor(),
                    self.rc_limit(l)
                )
            })
            .collect::<Vec<_>>()
            .join("; ");
        Error::Deadlock { cycle: t, detail }
    }

    fn finish(self) -> (SimReport, Trace) {
        let cfg = self.cfg;
        let mut blocks = Vec::new();
        for (ln, lane) in self.lanes.iter().enumerate() {
            for (j, run) in lane.blocks.iter().enumerate() {
                let fin = run.fin.unwrap_or(0);
                blocks.push(BlockTiming {
                    lane: ln as u32,
                    block: j as u32,
                    global_index: run.global,
                    start: run.base,
                    finish: fin,
                    latency: fin - run.base,
                });
            }
        }
        let latency = blocks.iter().filter(|b| b.block == 0).map(|b| b.latency).max().unwrap_or(0);
        let lane0: Vec<&BlockTiming> = blocks.iter().filter(|b| b.lane == 0).collect();
        let ii = if lane0.len() >= 2 {
            (lane0[lane0.len() - 1].finish - lane0[0].finish) as f64 / (lane0.len() - 1) as f64
        } else {
            latency as f64
        };
        let lanes = cfg.lanes as f64;
        let mut stalls = BTreeMap::new();
        for u in Unit::COMPUTE {
            let s: u64 = self.lanes.iter().map(|l| l.unit_stall[u.compute_index()]).sum();
            stalls.insert(u.name().to_string(), s);
        }
        let rng_stall: u64 = self.lanes.iter().map(|l| l.rc_stall).sum();
        stalls.insert(Unit::Fifo.name().to_string(), rng_stall);
        let bubbles: u64 = count_bubbles(&self.trace).iter().map(|b| b.pre_mrmc_bubble).sum();
        let report = SimReport {
            latency_cycles: latency,
            initiation_interval_cycles: ii,
            elements_per_cycle: self.sched.l as f64 * lanes / ii,
            state_elements_per_cycle: self.sched.n as f64 * lanes / ii,
            total_cycles: blocks.iter().map(|b| b.finish).max().unwrap_or(0),
            stall_cycles_by_unit: stalls,
            bubble_count: bubbles,
            fifo_max_occupancy: self.max_occ,
            fifo_max_entries: self.max_occ.div_ceil(cfg.vector_width as u64),
            rng_stall_cycles: rng_stall,
            constants_consumed: self.lanes.iter().map(|l| l.consumed).sum(),
            noise_consumed: self.lanes.iter().map(|l| l.noise_consumed).sum(),
            blocks,
            config: cfg.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        (report, self.trace)
    }
}

fn lane_block(lane: &Lane) -> u32 {
    lane.completed as u32
}
