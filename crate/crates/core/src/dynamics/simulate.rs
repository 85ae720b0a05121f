use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::forcing::ForcingTerm;
use crate::semigroup::{
    build_operator, dot, sup_norm, DiffusionOperator, Field, GridSpec, Stepper,
};
use crate::weight::WeightSpec;
use crate::{Error, Result};

const TRACE_LEN: usize = 32;
const MAX_FORCED_STEPS: usize = 100_000;

/// Full description of one run of `u_t - div(w grad u) = sum_i h_i(t) f_i(u)`.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub weight: WeightSpec,
    pub forcings: Vec<ForcingTerm>,
    /// Initial data; its grid is the computational grid.
    pub u0: Field,
    pub horizon: f64,
    /// Sup norm treated as blow-up.
    pub blowup_threshold: f64,
    /// Smallest step the controller may request.
    pub dt_floor: f64,
    /// Steps whose relative sup-change exceeds `tol` are halved; steps whose
    /// change is below `tol / 10` let the next step double.
    pub tol: f64,
    /// Drop the diffusion and integrate the pointwise ODE.
    pub diffusionless: bool,
    pub dt_initial: Option<f64>,
    pub max_steps: usize,
}

impl SimConfig {
    /// Config with the default controller: threshold `max(1e8, 1e3 |u0|)`,
    /// floor `1e-12`, tolerance `0.1`.
    pub fn new(weight: WeightSpec, forcings: Vec<ForcingTerm>, u0: Field, horizon: f64) -> Self {
        let blowup_threshold = f64::max(1e8, 1e3 * u0.sup_norm());
        Self {
            weight,
            forcings,
            u0,
            horizon,
            blowup_threshold,
            dt_floor: 1e-12,
            tol: 0.1,
            diffusionless: false,
            dt_initial: None,
            max_steps: 5_000_000,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.u0.grid()
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn diffusionless(mut self) -> Self {
        self.diffusionless = true;
        self
    }

    /// Same config started from `u0`, threshold raised if needed.
    pub fn with_initial(&self, u0: Field) -> Self {
        let mut c = self.clone();
        c.blowup_threshold = c.blowup_threshold.max(1e3 * u0.sup_norm());
        c.u0 = u0;
        c
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::input(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.dt_floor > 0.0) {
            return Err(Error::input("dt_floor must be positive"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::input("tol must be positive"));
        }
        if !(self.blowup_threshold >= 1e3 * self.u0.sup_norm()) {
            return Err(Error::input(format!(
                "blowup_threshold {} is below 1e3 times the initial sup norm",
                self.blowup_threshold
            )));
        }
        if self.u0.min_value() < 0.0 {
            return Err(Error::input("initial data must be nonnegative"));
        }
        if let Some(dt) = self.dt_initial {
            if !(dt > 0.0) {
                return Err(Error::input("dt_initial must be positive"));
            }
        }
        Ok(())
    }

    pub(crate) fn operator(&self) -> Result<DiffusionOperator> {
        build_operator(*self.grid(), self.weight)
    }

    pub(crate) fn first_dt(&self) -> f64 {
        self.dt_initial.unwrap_or(1e-6).min(self.horizon)
    }
}

/// One recorded sample of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistorySample {
    pub t: f64,
    pub sup: f64,
    pub mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SimStatus {
    Completed(f64),
    BlownUp(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum StatusTag {
    Completed,
    BlownUp,
}

#[derive(Serialize, Deserialize)]
struct RawResult {
    status: StatusTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_star: Option<f64>,
    horizon: f64,
    history: Vec<HistorySample>,
    steps: usize,
}

/// Outcome and sup/mass history of [`simulate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawResult", into = "RawResult")]
pub struct SimResult {
    pub status: SimStatus,
    pub horizon: f64,
    pub history: Vec<HistorySample>,
    pub steps: usize,
}

impl TryFrom<RawResult> for SimResult {
    type Error = Error;

    fn try_from(raw: RawResult) -> Result<Self> {
        let status = match (raw.status, raw.t_star) {
            (StatusTag::Completed, None) => SimStatus::Completed(raw.horizon),
            (StatusTag::BlownUp, Some(t)) => SimStatus::BlownUp(t),
            (StatusTag::Completed, Some(_)) => {
                return Err(Error::input("completed run cannot carry t_star"))
            }
            (StatusTag::BlownUp, None) => return Err(Error::input("blown_up run needs t_star")),
        };
        Ok(SimResult {
            status,
            horizon: raw.horizon,
            history: raw.history,
            steps: raw.steps,
        })
    }
}

impl From<SimResult> for RawResult {
    fn from(r: SimResult) -> Self {
        let (status, t_star) = match r.status {
            SimStatus::Completed(_) => (StatusTag::Completed, None),
            SimStatus::BlownUp(t) => (StatusTag::BlownUp, Some(t)),
        };
        RawResult {
            status,
            t_star,
            horizon: r.horizon,
            history: r.history,
            steps: r.steps,
        }
    }
}

impl SimResult {
    pub fn t_star(&self) -> Option<f64> {
        match self.status {
            SimStatus::BlownUp(t) => Some(t),
            SimStatus::Completed(_) => None,
        }
    }

    pub fn blew_up(&self) -> bool {
        self.t_star().is_some()
    }

    pub fn sup_trace(&self) -> Vec<(f64, f64)> {
        self.history.iter().map(|h| (h.t, h.sup)).collect()
    }
}

/// One IMEX step: `out = R (base + sum_i [H_i(t+dt) - H_i(t)] f_i(src))` with
/// `R = (I - dt A)^{-1}`, or `R = I` without diffusion.
pub(crate) struct ImexStep<'a> {
    stepper: Option<Stepper<'a>>,
    forcings: &'a [ForcingTerm],
}

impl<'a> ImexStep<'a> {
    pub(crate) fn new(op: Option<&'a DiffusionOperator>, forcings: &'a [ForcingTerm]) -> Self {
        Self {
            stepper: op.map(Stepper::new),
            forcings,
        }
    }

    pub(crate) fn apply(&mut self, base: &[f64], src: &[f64], t: f64, dt: f64, out: &mut [f64]) {
        out.copy_from_slice(base);
        for term in self.forcings {
            let inc = term.profile.increment(t, dt);
            if inc == 0.0 {
                continue;
            }
            for (o, &u) in out.iter_mut().zip(src) {
                *o += inc * term.nonlinearity.eval(u);
            }
        }
        if let Some(s) = self.stepper.as_mut() {
            s.implicit_solve(out, dt);
        }
    }
}

pub(crate) fn relative_change(old: &[f64], new: &[f64]) -> f64 {
    let scale = sup_norm(old);
    let diff = old
        .iter()
        .zip(new)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if diff == 0.0 {
        0.0
    } else if scale > 0.0 && diff.is_finite() {
        diff / scale
    } else {
        f64::INFINITY
    }
}

/// Runs the IMEX march to the horizon or to blow-up.
pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    simulate_observed(config, |_, _| {})
}

/// [`simulate`], calling `observer(t, state)` at `t = 0` and after every
/// accepted step.
pub fn simulate_observed(
    config: &SimConfig,
    mut observer: impl FnMut(f64, &[f64]),
) -> Result<SimResult> {
    config.validate()?;
    let op = if config.diffusionless {
        None
    } else {
        Some(config.operator()?)
    };
    let mut imex = ImexStep::new(op.as_ref(), &config.forcings);
    let vols = config.grid().cell_volumes();
    let horizon = config.horizon;

    let mut u = config.u0.values().to_vec();
    let mut next = vec![0.0; u.len()];
    let mut t = 0.0;
    let mut dt = config.first_dt();
    let mut steps = 0usize;
    let mut attempts = 0usize;
    let mut history = vec![HistorySample {
        t,
        sup: sup_norm(&u),
        mass: dot(&u, &vols),
    }];
    observer(t, &u);
    let mut trace: VecDeque<(f64, f64, f64)> = VecDeque::with_capacity(TRACE_LEN);
    let mut forced: Vec<f64> = Vec::new();

    let fail = |msg: String, trace: &VecDeque<(f64, f64, f64)>| Error::Numeric {
        message: msg,
        trace: trace.iter().copied().collect(),
    };

    while t < horizon {
        if attempts >= config.max_steps {
            return Err(fail(format!("step budget exhausted at t = {t}"), &trace));
        }
        attempts += 1;
        let remaining = horizon - t;
        let landing = dt >= remaining * (1.0 - 1e-12);
        let step = if landing { remaining } else { dt };
        imex.apply(&u, &u, t, step, &mut next);
        let change = relative_change(&u, &next);
        let at_floor = step <= config.dt_floor;
        if change > config.tol && !at_floor {
            dt = (0.5 * step).max(config.dt_floor);
            continue;
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(fail(
                format!("non-finite state at t = {t}, dt = {step}"),
                &trace,
            ));
        }
        std::mem::swap(&mut u, &mut next);
        t = if landing { horizon } else { t + step };
        steps += 1;
        let sup = sup_norm(&u);
        history.push(HistorySample {
            t,
            sup,
            mass: dot(&u, &vols),
        });
        observer(t, &u);
        if trace.len() == TRACE_LEN {
            trace.pop_front();
        }
        trace.push_back((t, step, sup));

        if sup >= config.blowup_threshold {
            return Ok(finish(SimStatus::BlownUp(t), horizon, history, steps));
        }
        if change > config.tol {
            forced.push(sup);
            let n = forced.len();
            if n >= 4 && forced[n - 4..].windows(2).all(|w| w[1] >= 10.0 * w[0]) {
                return Ok(finish(SimStatus::BlownUp(t), horizon, history, steps));
            }
            if n > MAX_FORCED_STEPS {
                return Err(fail(
                    format!("controller stuck at the step floor near t = {t}"),
                    &trace,
                ));
            }
        } else {
            forced.clear();
            if change < 0.1 * config.tol && !landing {
                dt = 2.0 * step;
            } else if !landing {
                dt = step;
            }
        }
    }
    Ok(finish(
        SimStatus::Completed(horizon),
        horizon,
        history,
        steps,
    ))
}

fn finish(status: SimStatus, horizon: f64, history: Vec<HistorySample>, steps: usize) -> SimResult {
    SimResult {
        status,
        horizon,
        history,
        steps,
    }
}
