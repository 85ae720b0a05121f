//! Analytic decision machinery: Osgood tails, blow-up certificates, the
//! global-existence smallness index, decay envelopes and critical exponents.

mod exponents;
mod index;
mod osgood;
mod report;

pub use exponents::{fujita_exponents, second_critical_exponent, TermExponents};
pub use index::{
    blowup_certificate, decay_fit, smallness_certificate, smallness_index, DecayEnvelope,
    SmallnessCertificate, SmallnessIndex,
};
pub use osgood::{forcing_primitive, osgood_tail, osgood_tail_quadrature};
pub use report::{
    critical_exponents, evaluate, linear_sup_trace, mass_growth_diagnostic, trace_times,
    CriteriaOptions, CriteriaReport, MassGrowth, Verdict,
};
