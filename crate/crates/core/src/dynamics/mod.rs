//! The semilinear problem `u_t - div(w grad u) = sum_i h_i(t) f_i(u)` as a
//! mild solution: implicit diffusion, explicit source integrated against the
//! exact time primitive of each `h_i`.

mod compare;
mod forcing;
mod monotone;
mod simulate;

pub use compare::{compare_configs, compare_runs, ComparisonReport};
pub use forcing::{ForcingTerm, Nonlinearity, TimeProfile};
pub use monotone::{monotone_iterates, IterateRecord, MonotoneOptions, MonotoneReport};
pub use simulate::{simulate, simulate_observed, HistorySample, SimConfig, SimResult, SimStatus};
