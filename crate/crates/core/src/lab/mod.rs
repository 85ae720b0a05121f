//! JSON configuration, escalating point classification, parallel sweeps and
//! the CSV/SVG writers.

mod config;
mod probes;
mod svg;
mod sweep;

pub use config::{from_json, CriteriaConfig, InitialData, SimConfigSpec};
pub use probes::{
    run_decay_probe, run_kernel_probe, write_kernel_csv, DecayProbeReport, DecayProbeSpec,
    KernelProbeSpec,
};
pub use svg::render_svg;
pub use sweep::{
    classify_point, decays_over_last_decade, default_ladder, read_csv, run_sweep, write_csv, Axis,
    AxisKind, ClassTag, Classification, EscalationLevel, PhasePoint, SweepRow, SweepSpec,
    CSV_HEADER,
};
