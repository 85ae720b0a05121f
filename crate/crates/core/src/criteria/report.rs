use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::exponents::{fujita_exponents, second_critical_exponent, TermExponents};
use super::index::{
    blowup_certificate, decay_fit, smallness_certificate, smallness_index, DecayEnvelope,
    SmallnessCertificate, SmallnessIndex,
};
use super::osgood::osgood_tail;
use crate::dynamics::{simulate_observed, ForcingTerm, Nonlinearity, SimConfig};
use crate::fit::fit_line;
use crate::semigroup::{sample_semigroup, EvolveOptions, GridSpec};
use crate::weight::WeightSpec;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    GlobalBySmallness,
    BlowupCertified,
    Undetermined,
}

/// Knobs for [`evaluate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriteriaOptions {
    /// End of the numeric part of the linear trace.
    pub t_num: f64,
    /// Envelope fit window; defaults to `[t_num / 10, t_num]`.
    #[serde(default)]
    pub fit_window: Option<(f64, f64)>,
    #[serde(default = "default_points")]
    pub trace_points: usize,
    #[serde(default = "default_tol")]
    pub evolve_tol: f64,
    /// Relative margin in `v0 = (1 + beta)(1 + margin) u0`.
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_points() -> usize {
    240
}

fn default_tol() -> f64 {
    1e-6
}

fn default_margin() -> f64 {
    1e-3
}

impl CriteriaOptions {
    pub fn new(t_num: f64) -> Self {
        Self {
            t_num,
            fit_window: None,
            trace_points: default_points(),
            evolve_tol: default_tol(),
            margin: default_margin(),
        }
    }

    pub fn window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or((0.1 * self.t_num, self.t_num))
    }
}

/// Everything the analytic criteria say about one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub weight: WeightSpec,
    pub grid: GridSpec,
    pub forcings: Vec<ForcingTerm>,
    pub options: CriteriaOptions,
    pub u0_sup: f64,
    pub u0_mass: f64,
    /// Largest `|S(t) u0|` next to the outer boundary relative to the sup.
    pub boundary_leak: f64,
    pub envelope: Option<DecayEnvelope>,
    pub index: Option<SmallnessIndex>,
    pub smallness_index: Option<f64>,
    pub self_certificate: Option<SmallnessCertificate>,
    pub certificate_tau: Option<f64>,
    /// Tail `integral_{|u0|}^inf ds / f` per nonlinearity.
    pub osgood_tails: BTreeMap<String, f64>,
    pub p_star: Option<f64>,
    pub q_star: Option<f64>,
    pub rho_star: Option<f64>,
    pub verdict: Verdict,
}

/// Geometric sample times on `(0, t_end]` with `t = 0` prepended.
pub fn trace_times(t_end: f64, points: usize) -> Vec<f64> {
    let t_first = (1e-4f64).min(t_end * 1e-6);
    let mut out = vec![0.0];
    for k in 0..points {
        let t = if k + 1 == points {
            t_end
        } else {
            t_first * (t_end / t_first).powf(k as f64 / (points - 1) as f64)
        };
        out.push(t);
    }
    out
}

/// `(t, |S(t) u0|_inf)` and the relative boundary leak along the way.
pub fn linear_sup_trace(
    config: &SimConfig,
    times: &[f64],
    tol: f64,
) -> Result<(Vec<(f64, f64)>, f64)> {
    let op = config.operator()?;
    let fields = sample_semigroup(&op, &config.u0, times, EvolveOptions::with_tol(tol))?;
    let mut leak: f64 = 0.0;
    let trace = times
        .iter()
        .zip(&fields)
        .map(|(&t, f)| {
            let s = f.sup_norm();
            if s > 0.0 {
                leak = leak.max(f.boundary_leak() / s);
            }
            (t, s)
        })
        .collect();
    Ok((trace, leak))
}

/// Critical exponents of the active terms of `forcings`.
pub fn critical_exponents(
    weight: &WeightSpec,
    forcings: &[ForcingTerm],
) -> (Option<f64>, Option<f64>, Option<f64>) {
    let mut p_star: Option<f64> = None;
    let mut q_star: Option<f64> = None;
    let mut rho: Option<f64> = Some(0.0);
    let mut any = false;
    for term in forcings {
        let Some(r) = term.profile.exponent() else {
            continue;
        };
        let Ok((star, _)) = fujita_exponents(weight, r, r) else {
            continue;
        };
        any = true;
        let ex = Some(TermExponents::new(term.nonlinearity.exponent(), r));
        let single = match term.nonlinearity {
            Nonlinearity::Power(_) => {
                p_star = Some(p_star.map_or(star, |p| p.max(star)));
                second_critical_exponent(weight, ex, None)
            }
            Nonlinearity::LogPower(_) => {
                q_star = Some(q_star.map_or(star, |q| q.max(star)));
                second_critical_exponent(weight, None, ex)
            }
        };
        rho = match (rho, single) {
            (Some(a), Ok(b)) => Some(a.max(b)),
            _ => None,
        };
    }
    (p_star, q_star, if any { rho } else { None })
}

/// Runs the linear trace, the blow-up certificate, the smallness index and
/// the exponent formulas for `config`.
pub fn evaluate(config: &SimConfig, opts: &CriteriaOptions) -> Result<CriteriaReport> {
    config.validate()?;
    if !(opts.t_num > 0.0) || opts.trace_points < 4 {
        return Err(Error::input(
            "criteria need t_num > 0 and at least 4 trace points",
        ));
    }
    let times = trace_times(opts.t_num, opts.trace_points);
    let (trace, boundary_leak) = linear_sup_trace(config, &times, opts.evolve_tol)?;
    let u0_sup = config.u0.sup_norm();

    let positive = trace.iter().all(|p| p.1 > 0.0);
    let certificate_tau = if positive {
        blowup_certificate(&trace, &config.forcings)?
    } else {
        None
    };
    let envelope = if positive {
        decay_fit(&trace, opts.window()).ok()
    } else {
        None
    };
    let (index, self_certificate) = match (&envelope, positive, u0_sup > 0.0) {
        (Some(env), true, _) => (
            Some(smallness_index(&trace, env, &config.forcings, opts.t_num)?),
            smallness_certificate(&trace, env, &config.forcings, opts.t_num, opts.margin)?,
        ),
        (_, _, false) => (
            Some(SmallnessIndex::Finite {
                value: 0.0,
                numeric: 0.0,
                tail: 0.0,
            }),
            None,
        ),
        _ => (None, None),
    };
    let mut osgood_tails = BTreeMap::new();
    if u0_sup > 0.0 {
        for term in &config.forcings {
            osgood_tails.insert(
                term.nonlinearity.label(),
                osgood_tail(term.nonlinearity, u0_sup)?,
            );
        }
    }
    let (p_star, q_star, rho_star) = critical_exponents(&config.weight, &config.forcings);
    let smallness = index.and_then(|i| i.value());
    let verdict = if certificate_tau.is_some() {
        Verdict::BlowupCertified
    } else if self_certificate.is_some() || u0_sup == 0.0 {
        Verdict::GlobalBySmallness
    } else {
        Verdict::Undetermined
    };
    Ok(CriteriaReport {
        weight: config.weight,
        grid: *config.grid(),
        forcings: config.forcings.clone(),
        options: *opts,
        u0_sup,
        u0_mass: config.u0.mass(),
        boundary_leak,
        envelope,
        index,
        smallness_index: smallness,
        self_certificate,
        certificate_tau,
        osgood_tails,
        p_star,
        q_star,
        rho_star,
        verdict,
    })
}

/// Regression of the mass in the parabolic window `|x| <= t^{1/(2-alpha)}`
/// against `ln t` along a nonlinear run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MassGrowth {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// `residual` divided by the mean sampled mass.
    pub relative_residual: f64,
    pub samples: Vec<(f64, f64)>,
    pub t_end: f64,
    pub blew_up: bool,
}

/// Samples the windowed mass at log-spaced times from `t_min` until blow-up
/// or the horizon and fits it against `ln t`.
pub fn mass_growth_diagnostic(config: &SimConfig, t_min: f64) -> Result<MassGrowth> {
    if !(t_min > 0.0 && t_min < config.horizon) {
        return Err(Error::input("t_min must lie inside (0, horizon)"));
    }
    let grid = *config.grid();
    let coords = grid.coordinates();
    let vols = grid.cell_volumes();
    let power = 1.0 / config.weight.scaling_exponent();
    let mut samples = Vec::new();
    let mut next = t_min;
    let result = simulate_observed(config, |t, u| {
        if t >= next {
            let radius = t.powf(power);
            let mass: f64 = coords
                .iter()
                .zip(vols.iter().zip(u))
                .filter(|(x, _)| x.abs() <= radius)
                .map(|(_, (w, v))| w * v)
                .sum();
            samples.push((t, mass));
            next = t * 1.02;
        }
    })?;
    let logs: Vec<(f64, f64)> = samples.iter().map(|&(t, m)| (t.ln(), m)).collect();
    let fit = fit_line(&logs).ok_or_else(|| Error::input("too few samples for mass growth"))?;
    let mean = samples.iter().map(|s| s.1).sum::<f64>() / samples.len() as f64;
    Ok(MassGrowth {
        slope: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
        relative_residual: if mean > 0.0 {
            fit.residual / mean
        } else {
            f64::INFINITY
        },
        samples,
        t_end: result.history.last().map_or(0.0, |h| h.t),
        blew_up: result.blew_up(),
    })
}
