//! Turns the round structure into per-unit passes of vector operations,
//! following the streaming order of the state through each layer.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cipher::{program, CipherParams, Layer, Order};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Unit {
    Rng,
    Fifo,
    Ark,
    Mrmc,
    Nonlin,
    Tr,
    Agn,
}

impl Unit {
    pub const COMPUTE: [Unit; 4] = [Unit::Ark, Unit::Mrmc, Unit::Nonlin, Unit::Agn];

    pub fn name(&self) -> &'static str {
        match self {
            Unit::Rng => "RNG",
            Unit::Fifo => "FIFO",
            Unit::Ark => "ARK",
            Unit::Mrmc => "MRMC",
            Unit::Nonlin => "NONLIN",
            Unit::Tr => "TR",
            Unit::Agn => "AGN",
        }
    }

    pub(crate) fn compute_index(&self) -> usize {
        match self {
            Unit::Ark => 0,
            Unit::Mrmc => 1,
            Unit::Nonlin => 2,
            Unit::Agn => 3,
            _ => unreachable!("not a compute unit"),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Unit {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "RNG" => Unit::Rng,
            "FIFO" => Unit::Fifo,
            "ARK" => Unit::Ark,
            "MRMC" => Unit::Mrmc,
            "NONLIN" => Unit::Nonlin,
            "TR" => Unit::Tr,
            "AGN" => Unit::Agn,
            _ => return Err(format!("unknown unit `{s}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassKind {
    /// `offset` is the position of this ARK's first constant in the block's draw order.
    Ark { round: usize, offset: usize },
    MixColumns,
    MixRows,
    Cube,
    Feistel,
    Agn,
}

/// One operation: reads `deps`, writes `outs` of the pass's output stage.
#[derive(Debug, Clone)]
pub struct Op {
    /// `(stage, element)` pairs that must be available.
    pub deps: Vec<(usize, usize)>,
    pub outs: Vec<usize>,
    /// Mixing: input vector (elements of the input stage) and the matrix row per output.
    pub src: Vec<usize>,
    pub m_rows: Vec<usize>,
    pub constants: usize,
    pub noise: usize,
    pub occupancy: u64,
}

#[derive(Debug, Clone)]
pub struct Pass {
    pub unit: Unit,
    pub kind: PassKind,
    pub ops: Vec<Op>,
    pub in_stage: usize,
    pub out_stage: usize,
    pub order: Order,
    /// Index into the reference model's layer list, when the pass output is a
    /// state the reference model also records.
    pub golden_layer: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PassMeta {
    pub unit: Unit,
    pub kind: PassKind,
    pub order: Order,
    pub ops: usize,
    pub golden_layer: Option<usize>,
}

impl Pass {
    pub fn meta(&self) -> PassMeta {
        PassMeta {
            unit: self.unit,
            kind: self.kind,
            order: self.order,
            ops: self.ops.len(),
            golden_layer: self.golden_layer,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Schedule {
    pub passes: Vec<Pass>,
    pub n: usize,
    pub v: usize,
    pub l: usize,
    pub stages: usize,
}

impl Schedule {
    pub fn final_stage(&self) -> usize {
        self.stages - 1
    }

    pub fn constants_per_block(&self) -> usize {
        self.passes.iter().flat_map(|p| &p.ops).map(|o| o.constants).sum()
    }

    pub fn noise_per_block(&self) -> usize {
        self.passes.iter().flat_map(|p| &p.ops).map(|o| o.noise).sum()
    }

    pub fn metas(&self) -> Vec<PassMeta> {
        self.passes.iter().map(Pass::meta).collect()
    }
}

fn row(v: usize, i: usize) -> Vec<usize> {
    (0..v).map(|j| i * v + j).collect()
}

fn col(v: usize, j: usize) -> Vec<usize> {
    (0..v).map(|i| i * v + j).collect()
}

/// Vectors in streaming order: rows or columns, or single elements when scalar.
fn stream_vectors(v: usize, order: Order, scalar: bool) -> Vec<Vec<usize>> {
    let vecs: Vec<Vec<usize>> = match order {
        Order::Row => (0..v).map(|i| row(v, i)).collect(),
        Order::Col => (0..v).map(|j| col(v, j)).collect(),
    };
    if scalar {
        vecs.into_iter().flatten().map(|e| vec![e]).collect()
    } else {
        vecs
    }
}

pub fn build_schedule(
    p: &CipherParams,
    vector_width: usize,
    mrmc_opt: bool,
    scalar_cube_occupancy: u64,
) -> Schedule {
    let v = p.v;
    let n = p.n;
    let scalar = vector_width == 1;
    let mut order = Order::Row;
    let mut passes = Vec::new();
    let mut stage = 0usize;
    let mut ark_offset = 0usize;

    for (gi, layer) in program(p).into_iter().enumerate() {
        match layer {
            Layer::Truncate => continue,
            Layer::Ark { round, len } => {
                let mut ops = Vec::new();
                for vec in stream_vectors(v, order, scalar) {
                    let outs: Vec<usize> = vec.into_iter().filter(|&e| e < len).collect();
                    if outs.is_empty() {
                        continue;
                    }
                    let deps = if round == 0 { vec![] } else { outs.iter().map(|&e| (stage, e)).collect() };
                    ops.push(Op {
                        deps,
                        constants: outs.len(),
                        outs,
                        src: vec![],
                        m_rows: vec![],
                        noise: 0,
                        occupancy: 1,
                    });
                }
                passes.push(Pass {
                    unit: Unit::Ark,
                    kind: PassKind::Ark { round, offset: ark_offset },
                    ops,
                    in_stage: stage,
                    out_stage: stage + 1,
                    order,
                    golden_layer: Some(gi),
                });
                ark_offset += len;
                stage += 1;
            }
            Layer::Cube | Layer::Feistel | Layer::Agn => {
                let (unit, kind) = match layer {
                    Layer::Cube => (Unit::Nonlin, PassKind::Cube),
                    Layer::Feistel => (Unit::Nonlin, PassKind::Feistel),
                    _ => (Unit::Agn, PassKind::Agn),
                };
                let limit = if kind == PassKind::Agn { p.l } else { n };
                let occupancy = if scalar && kind == PassKind::Cube { scalar_cube_occupancy } else { 1 };
                let mut ops = Vec::new();
                for vec in stream_vectors(v, order, scalar) {
                    let outs: Vec<usize> = vec.into_iter().filter(|&e| e < limit).collect();
                    if outs.is_empty() {
                        continue;
                    }
                    let mut deps: Vec<(usize, usize)> = outs.iter().map(|&e| (stage, e)).collect();
                    if kind == PassKind::Feistel {
                        deps.extend(outs.iter().filter(|&&e| e > 0).map(|&e| (stage, e - 1)));
                    }
                    ops.push(Op {
                        deps,
                        noise: if kind == PassKind::Agn { outs.len() } else { 0 },
                        outs,
                        src: vec![],
                        m_rows: vec![],
                        constants: 0,
                        occupancy,
                    });
                }
                passes.push(Pass {
                    unit,
                    kind,
                    ops,
                    in_stage: stage,
                    out_stage: stage + 1,
                    order,
                    golden_layer: Some(gi),
                });
                stage += 1;
            }
            Layer::Mrmc => {
                // First pass: frame column t = M * srcs[t]. Naively the
                // sources are the true columns; with the transposed schedule
                // they are whatever vectors arrive, and the output order flips.
                let transposed = mrmc_opt && order == Order::Row;
                let srcs: Vec<Vec<usize>> = if transposed {
                    (0..v).map(|i| row(v, i)).collect()
                } else {
                    (0..v).map(|j| col(v, j)).collect()
                };
                let out_order = if transposed { Order::Col } else { Order::Row };
                let mut mc_ops = Vec::new();
                for (t, s) in srcs.iter().enumerate() {
                    let deps: Vec<(usize, usize)> = s.iter().map(|&e| (stage, e)).collect();
                    let rows: Vec<usize> = if scalar { (0..v).collect() } else { vec![] };
                    if scalar {
                        for i in rows {
                            mc_ops.push(Op {
                                deps: deps.clone(),
                                outs: vec![i * v + t],
                                src: s.clone(),
                                m_rows: vec![i],
                                constants: 0,
                                noise: 0,
                                occupancy: 1,
                            });
                        }
                    } else {
                        mc_ops.push(Op {
                            deps,
                            outs: col(v, t),
                            src: s.clone(),
                            m_rows: (0..v).collect(),
                            constants: 0,
                            noise: 0,
                            occupancy: 1,
                        });
                    }
                }
                passes.push(Pass {
                    unit: Unit::Mrmc,
                    kind: PassKind::MixColumns,
                    ops: mc_ops,
                    in_stage: stage,
                    out_stage: stage + 1,
                    order: out_order,
                    golden_layer: None,
                });
                stage += 1;

                // Second pass: frame row i times M^T lands in output row i
                // (naive) or output column i (transposed).
                let mut mr_ops = Vec::new();
                for i in 0..v {
                    let deps: Vec<(usize, usize)> = row(v, i).into_iter().map(|e| (stage, e)).collect();
                    let outs = if transposed { col(v, i) } else { row(v, i) };
                    if scalar {
                        for (j, &e) in outs.iter().enumerate() {
                            mr_ops.push(Op {
                                deps: deps.clone(),
                                outs: vec![e],
                                src: row(v, i),
                                m_rows: vec![j],
                                constants: 0,
                                noise: 0,
                                occupancy: 1,
                            });
                        }
                    } else {
                        mr_ops.push(Op {
                            deps,
                            outs,
                            src: row(v, i),
                            m_rows: (0..v).collect(),
                            constants: 0,
                            noise: 0,
                            occupancy: 1,
                        });
                    }
                }
                passes.push(Pass {
                    unit: Unit::Mrmc,
                    kind: PassKind::MixRows,
                    ops: mr_ops,
                    in_stage: stage,
                    out_stage: stage + 1,
                    order: out_order,
                    golden_layer: Some(gi),
                });
                stage += 1;
                order = out_order;
            }
        }
    }
    Schedule { passes, n, v, l: p.l, stages: stage + 1 }
}
