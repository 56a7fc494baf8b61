use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::UnitTiming;
use super::schedule::{PassMeta, Unit};
use crate::cipher::Order;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "cycle,unit,lane,indices,order,values_hex";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub cycle: u64,
    pub unit: Unit,
    pub lane: u32,
    /// Block counter within the lane.
    pub block: u32,
    /// Pass index into [`Trace::passes`]; `None` for RNG/FIFO/TR bookkeeping.
    pub layer: Option<u16>,
    /// 1-based element positions.
    pub indices: Vec<u16>,
    pub order: Order,
    pub values: Vec<u64>,
}

/// Issue window of one pass of one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassSpan {
    pub lane: u32,
    pub block: u32,
    pub pass: u16,
    pub first_issue: u64,
    pub last_issue: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    pub spans: Vec<PassSpan>,
    pub passes: Vec<PassMeta>,
    pub timing: UnitTiming,
    pub n: usize,
    pub l: usize,
    pub lanes: usize,
}

impl Trace {
    pub fn final_layer(&self) -> Option<u16> {
        self.passes.len().checked_sub(1).map(|x| x as u16)
    }

    pub fn latency_of(&self, unit: Unit) -> u64 {
        match unit {
            Unit::Ark => self.timing.ark,
            Unit::Mrmc => self.timing.mrmc,
            Unit::Nonlin => self.timing.nonlin,
            Unit::Agn => self.timing.agn,
            _ => 1,
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for e in &self.events {
            let idx: Vec<String> = e.indices.iter().map(u16::to_string).collect();
            let vals: Vec<String> = e.values.iter().map(|v| format!("{v:x}")).collect();
            writeln!(w, "{},{},{},{},{},{}", e.cycle, e.unit, e.lane, idx.join(" "), e.order, vals.join(" "))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("ascii")
    }

    /// Per unit and lane, at most one event per cycle; indices within `1..=n`.
    pub fn check_well_formed(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for e in &self.events {
            if !seen.insert((e.cycle, e.unit, e.lane)) {
                return Err(Error::InvalidParameter(format!(
                    "two {} events on lane {} in cycle {}",
                    e.unit, e.lane, e.cycle
                )));
            }
            if let Some(&i) = e.indices.iter().find(|&&i| i == 0 || i as usize > self.n) {
                return Err(Error::InvalidParameter(format!("element index {i} outside 1..={}", self.n)));
            }
        }
        Ok(())
    }
}

/// Parses a CSV trace back into events (layer and block are not part of the CSV).
pub fn parse_csv(text: &str) -> Result<Vec<TraceEvent>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(CSV_HEADER) {
        return Err(Error::Parse { line: 1, msg: "missing trace header".into() });
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let err = |m: &str| Error::Parse { line: i + 2, msg: m.to_string() };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(err("expected 6 fields"));
            }
            let order = match f[4] {
                "ROW" => Order::Row,
                "COL" => Order::Col,
                _ => return Err(err("bad order tag")),
            };
            Ok(TraceEvent {
                cycle: f[0].parse().map_err(|_| err("bad cycle"))?,
                unit: f[1].parse().map_err(|m: String| err(&m))?,
                lane: f[2].parse().map_err(|_| err("bad lane"))?,
                block: 0,
                layer: None,
                indices: f[3]
                    .split_whitespace()
                    .map(|x| x.parse().map_err(|_| err("bad index")))
                    .collect::<Result<_>>()?,
                order,
                values: f[5]
                    .split_whitespace()
                    .map(|x| u64::from_str_radix(x, 16).map_err(|_| err("bad value")))
                    .collect::<Result<_>>()?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(cycle: u64, unit: Unit, idx: &[u16]) -> TraceEvent {
        TraceEvent {
            cycle,
            unit,
            lane: 0,
            block: 0,
            layer: None,
            indices: idx.to_vec(),
            order: Order::Col,
            values: idx.iter().map(|&i| i as u64 * 255).collect(),
        }
    }

    #[test]
    fn csv_format() {
        let t = Trace { events: vec![ev(3, Unit::Ark, &[1, 9, 17])], n: 64, ..Default::default() };
        assert_eq!(t.to_csv(), "cycle,unit,lane,indices,order,values_hex\n3,ARK,0,1 9 17,COL,ff 8f7 10ef\n");
        let back = parse_csv(&t.to_csv()).unwrap();
        assert_eq!(back[0].values, vec![255, 2295, 4335]);
    }

    #[test]
    fn parse_errors_carry_line() {
        let text = format!("{CSV_HEADER}\n1,ARK,0,1,ROW,0\n2,XYZ,0,1,ROW,0\n");
        assert!(matches!(parse_csv(&text), Err(Error::Parse { line: 3, .. })));
        assert!(parse_csv("nope\n").is_err());
    }

    #[test]
    fn well_formedness() {
        let mut t = Trace { events: vec![ev(1, Unit::Ark, &[1]), ev(1, Unit::Mrmc, &[1])], n: 16, ..Default::default() };
        t.check_well_formed().unwrap();
        t.events.push(ev(1, Unit::Ark, &[2]));
        assert!(t.check_well_formed().is_err());
        t.events = vec![ev(2, Unit::Ark, &[17])];
        assert!(t.check_well_formed().is_err());
    }
}
