//! The linear weighted heat flow `v_t = div(w grad v)` on a truncated domain
//! and the semigroup `S(t)` it generates.

mod evolve;
mod grid;
mod operator;
mod probes;

pub use evolve::{
    apply_semigroup, apply_semigroup_with, evolve_batch, kernel_column, sample_semigroup,
    Evolution, EvolveOptions, TimeScheme,
};
pub(crate) use evolve::{check_grid, Stepper};
pub(crate) use grid::{dot, sup_norm};
pub use grid::{Field, GeometryKind, GridSpec};
pub use operator::{build_operator, DiffusionOperator};
pub use probes::{
    jensen_gap, kernel_probe, local_loglog_slopes, lower_bound_ratio, semigroup_defect,
    smoothing_norm_check, KernelSample,
};
