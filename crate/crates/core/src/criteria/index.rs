use serde::{Deserialize, Serialize};

use super::osgood::osgood_tail;
use crate::dynamics::{ForcingTerm, Nonlinearity, TimeProfile};
use crate::fit::fit_loglog;
use crate::{Error, Result};

fn check_trace(trace: &[(f64, f64)]) -> Result<()> {
    if trace.is_empty() {
        return Err(Error::input("empty sup trace"));
    }
    if trace
        .iter()
        .any(|p| !(p.0 >= 0.0 && p.1.is_finite() && p.1 >= 0.0))
    {
        return Err(Error::input(
            "sup trace needs t >= 0 and finite nonnegative values",
        ));
    }
    if trace.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::input("sup trace times must increase"));
    }
    Ok(())
}

/// First trace time `tau` at which some single term satisfies
/// `integral_{|S(tau) u0|}^inf ds / f_i(s) <= integral_0^tau h_i`.
pub fn blowup_certificate(trace: &[(f64, f64)], forcings: &[ForcingTerm]) -> Result<Option<f64>> {
    check_trace(trace)?;
    if trace.iter().any(|p| p.1 <= 0.0) {
        return Err(Error::input("certificate needs a positive sup trace"));
    }
    for &(tau, sup) in trace {
        for term in forcings {
            if term.profile.is_zero() {
                continue;
            }
            if osgood_tail(term.nonlinearity, sup)? <= term.profile.primitive(tau) {
                return Ok(Some(tau));
            }
        }
    }
    Ok(None)
}

/// Power-law envelope `|S(t) u0|_inf ~ C t^{-theta}` fitted on a window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEnvelope {
    pub theta: f64,
    pub constant: f64,
    pub window: (f64, f64),
    /// RMS residual of the log-log fit.
    pub residual: f64,
}

impl DecayEnvelope {
    pub fn eval(&self, t: f64) -> f64 {
        self.constant * t.powf(-self.theta)
    }

    /// Envelope of the trace scaled by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            constant: self.constant * lambda,
            ..*self
        }
    }
}

/// Least-squares fit of `ln sup` against `ln t` over `window`, which must
/// span at least one decade.
pub fn decay_fit(trace: &[(f64, f64)], window: (f64, f64)) -> Result<DecayEnvelope> {
    check_trace(trace)?;
    let (t0, t1) = window;
    if !(t0 > 0.0 && t1 >= 10.0 * t0 * (1.0 - 1e-12)) {
        return Err(Error::input(format!(
            "fit window [{t0}, {t1}] must start above 0 and span a decade"
        )));
    }
    let pts: Vec<(f64, f64)> = trace
        .iter()
        .copied()
        .filter(|p| p.0 >= t0 * (1.0 - 1e-12) && p.0 <= t1 * (1.0 + 1e-12))
        .collect();
    if pts.len() < 3 {
        return Err(Error::input(format!(
            "fit window [{t0}, {t1}] holds {} trace points, need 3",
            pts.len()
        )));
    }
    let fit = fit_loglog(&pts).ok_or_else(|| Error::input("degenerate decay fit"))?;
    if fit.slope > 0.0 {
        return Err(Error::input(format!(
            "trace grows over the fit window (slope {})",
            fit.slope
        )));
    }
    Ok(DecayEnvelope {
        theta: -fit.slope,
        constant: fit.intercept.exp(),
        window,
        residual: fit.residual,
    })
}

/// Value of the integral `sum_i integral_0^inf h_i f_i(|S v0|) / |S v0|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmallnessIndex {
    Finite {
        value: f64,
        /// Part from the numeric trace on `[0, T_num]`.
        numeric: f64,
        /// Part from the envelope on `[T_num, inf)`; an upper bound for
        /// log-power terms.
        tail: f64,
    },
    /// Some term's tail integrand decays like `t^exponent` with
    /// `exponent >= -1`.
    Divergent { term: usize, exponent: f64 },
}

impl SmallnessIndex {
    pub fn value(&self) -> Option<f64> {
        match *self {
            SmallnessIndex::Finite { value, .. } => Some(value),
            SmallnessIndex::Divergent { .. } => None,
        }
    }
}

fn profile_scale(profile: TimeProfile) -> Option<(f64, f64)> {
    match profile {
        TimeProfile::PowerLaw(r) => Some((1.0, r)),
        TimeProfile::Constant(c) if c > 0.0 => Some((c, 0.0)),
        _ => None,
    }
}

/// Trapezoid rule on the trace up to `t_num`, then the envelope beyond.
///
/// The trace must start at `t = 0`. A singular profile (`r < 0`) is
/// integrated exactly against the mean of the endpoint ratios on the first
/// panel.
pub fn smallness_index(
    trace: &[(f64, f64)],
    envelope: &DecayEnvelope,
    forcings: &[ForcingTerm],
    t_num: f64,
) -> Result<SmallnessIndex> {
    check_trace(trace)?;
    if trace[0].0 != 0.0 {
        return Err(Error::input("sup trace must start at t = 0"));
    }
    let used: Vec<(f64, f64)> = trace.iter().copied().filter(|p| p.0 <= t_num).collect();
    if used.len() < 2 {
        return Err(Error::input(format!(
            "trace has no panel below T_num = {t_num}"
        )));
    }
    let t_end = used[used.len() - 1].0;
    let active: Vec<(usize, &ForcingTerm, f64, f64)> = forcings
        .iter()
        .enumerate()
        .filter_map(|(i, f)| profile_scale(f.profile).map(|(c, r)| (i, f, c, r)))
        .collect();

    let mut tail = 0.0;
    for &(i, term, c, r) in &active {
        let e = r - envelope.theta * (term.nonlinearity.exponent() - 1.0);
        if e >= -1.0 {
            return Ok(SmallnessIndex::Divergent {
                term: i,
                exponent: e,
            });
        }
        let k = envelope.constant.powf(term.nonlinearity.exponent() - 1.0);
        let base = c * k * t_end.powf(e + 1.0) / -(e + 1.0);
        tail += match term.nonlinearity {
            Nonlinearity::Power(_) => base,
            Nonlinearity::LogPower(_) => base * (1.0 + envelope.eval(t_end)),
        };
    }

    let mut numeric = 0.0;
    for &(_, term, _, _) in &active {
        let g: Vec<f64> = used.iter().map(|p| term.nonlinearity.ratio(p.1)).collect();
        for k in 0..used.len() - 1 {
            let (ta, tb) = (used[k].0, used[k + 1].0);
            numeric += match term.profile {
                TimeProfile::PowerLaw(r) if r < 0.0 && ta == 0.0 => {
                    term.profile.primitive(tb) * 0.5 * (g[k] + g[k + 1])
                }
                p => 0.5 * (tb - ta) * (p.eval(ta) * g[k] + p.eval(tb) * g[k + 1]),
            };
        }
    }
    Ok(SmallnessIndex::Finite {
        value: numeric + tail,
        numeric,
        tail,
    })
}

/// A witness `beta` for global existence of the data whose trace is given.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallnessCertificate {
    pub beta: f64,
    /// Index of `v0 = (1 + beta)(1 + margin) u0`.
    pub index: f64,
    /// `u0 = delta v0`.
    pub delta: f64,
}

/// Searches `beta` on a log grid for which `v0 = (1+beta)(1+margin) u0`
/// satisfies `I(v0) < beta / (1 + beta)`, so that `u0 = delta v0` with
/// `delta < 1 / (1 + beta)`.
pub fn smallness_certificate(
    trace: &[(f64, f64)],
    envelope: &DecayEnvelope,
    forcings: &[ForcingTerm],
    t_num: f64,
    margin: f64,
) -> Result<Option<SmallnessCertificate>> {
    if !(margin > 0.0) {
        return Err(Error::input("margin must be positive"));
    }
    let mut best: Option<SmallnessCertificate> = None;
    for k in 0..=80 {
        let beta = 10f64.powf(-4.0 + 0.1 * k as f64);
        let kappa = (1.0 + beta) * (1.0 + margin);
        let scaled: Vec<(f64, f64)> = trace.iter().map(|p| (p.0, kappa * p.1)).collect();
        let index = smallness_index(&scaled, &envelope.scaled(kappa), forcings, t_num)?;
        if let Some(i) = index.value() {
            let target = beta / (1.0 + beta);
            if i < target {
                let slack = target - i;
                let better = best.is_none_or(|b| slack > b.beta / (1.0 + b.beta) - b.index);
                if better {
                    best = Some(SmallnessCertificate {
                        beta,
                        index: i,
                        delta: 1.0 / kappa,
                    });
                }
            }
        }
    }
    Ok(best)
}
