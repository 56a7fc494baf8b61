//! Cycle-level model of the keystream accelerator design points.

mod bubbles;
mod config;
mod engine;
mod fifo;
mod report;
mod schedule;
mod trace;
mod verify;

pub use bubbles::{count_bubbles, MrmcActivation};
pub use config::{HwConfig, RejectionModel, TraceLevel, UnitTiming, Variant};
pub use engine::simulate;
pub use fifo::{ark_demand_schedule, fifo_model, FifoStats};
pub use report::{BlockTiming, Msps, SimReport};
pub use schedule::{build_schedule, Op, Pass, PassKind, PassMeta, Schedule, Unit};
pub use trace::{parse_csv, PassSpan, Trace, TraceEvent, CSV_HEADER};
pub use verify::{verify_trace, verify_layers, VerifySummary};

/// Cycle counts reported for the three design points, `[d1, d2, d3]`.
pub fn reference_cycles(scheme: crate::cipher::Scheme) -> [u64; 3] {
    match scheme {
        crate::cipher::Scheme::Hera => [729, 512, 90],
        crate::cipher::Scheme::Rubato => [1478, 800, 66],
    }
}
