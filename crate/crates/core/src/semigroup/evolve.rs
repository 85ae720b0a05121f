use serde::{Deserialize, Serialize};

use super::grid::{sup_norm, Field, GridSpec};
use super::operator::DiffusionOperator;
use crate::tridiag::solve_in_place;
use crate::{Error, Result};

/// Implicit time discretization of the linear flow.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    /// Unconditionally positivity preserving, first order.
    #[default]
    BackwardEuler,
    /// Second order; steps are capped at `1 / max|diag A|` so the explicit
    /// half stays a nonnegative matrix.
    CrankNicolson,
}

/// Step control for [`Evolution`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub scheme: TimeScheme,
    /// Target local error per step, relative to the sup norm of the state.
    pub tol: f64,
    pub dt_initial: Option<f64>,
    pub dt_max: Option<f64>,
    pub max_steps: usize,
    /// When set, every `advance_to` call takes exactly this many equal steps
    /// with no error control. Used for refinement studies.
    pub fixed_steps: Option<usize>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            scheme: TimeScheme::BackwardEuler,
            tol: 1e-6,
            dt_initial: None,
            dt_max: None,
            max_steps: 10_000_000,
            fixed_steps: None,
        }
    }
}

impl EvolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn fixed(scheme: TimeScheme, steps: usize) -> Self {
        Self {
            scheme,
            fixed_steps: Some(steps),
            ..Self::default()
        }
    }
}

/// Workspace for the implicit solves `(I - c A) x = b` on one operator.
pub(crate) struct Stepper<'a> {
    op: &'a DiffusionOperator,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    scratch: Vec<f64>,
    tmp: Vec<f64>,
    dirichlet: Vec<usize>,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(op: &'a DiffusionOperator) -> Self {
        let m = op.grid().nodes();
        Self {
            op,
            lower: vec![0.0; m],
            diag: vec![0.0; m],
            upper: vec![0.0; m],
            scratch: vec![0.0; m],
            tmp: vec![0.0; m],
            dirichlet: op.grid().dirichlet_nodes(),
        }
    }

    /// Overwrites `rhs` with `(I - c A)^{-1} rhs`, Dirichlet nodes forced to zero.
    pub(crate) fn implicit_solve(&mut self, rhs: &mut [f64], c: f64) {
        let (l, d, u) = (&self.op.lower, &self.op.diag, &self.op.upper);
        for i in 0..rhs.len() {
            self.lower[i] = -c * l[i];
            self.diag[i] = 1.0 - c * d[i];
            self.upper[i] = -c * u[i];
        }
        for &b in &self.dirichlet {
            rhs[b] = 0.0;
        }
        solve_in_place(&self.lower, &self.diag, &self.upper, rhs, &mut self.scratch);
    }

    /// One step of `scheme` from `u` into `out`.
    pub(crate) fn step(&mut self, scheme: TimeScheme, u: &[f64], dt: f64, out: &mut [f64]) {
        match scheme {
            TimeScheme::BackwardEuler => {
                out.copy_from_slice(u);
                self.implicit_solve(out, dt);
            }
            TimeScheme::CrankNicolson => {
                let mut tmp = std::mem::take(&mut self.tmp);
                self.op.apply(u, &mut tmp);
                for i in 0..u.len() {
                    out[i] = u[i] + 0.5 * dt * tmp[i];
                }
                self.tmp = tmp;
                self.implicit_solve(out, 0.5 * dt);
            }
        }
    }
}

/// Adaptive evolution of one or more fields under the linear flow.
///
/// All members advance on one shared step sequence, so order and convexity
/// relations between them are inherited exactly from the discrete operator.
/// Step size is chosen by step doubling.
pub struct Evolution<'a> {
    op: &'a DiffusionOperator,
    opts: EvolveOptions,
    stepper: Stepper<'a>,
    t: f64,
    dt: f64,
    states: Vec<Vec<f64>>,
    full: Vec<f64>,
    half: Vec<f64>,
    halves: Vec<Vec<f64>>,
    steps: usize,
    rejections: usize,
}

impl<'a> Evolution<'a> {
    pub fn new(op: &'a DiffusionOperator, initial: &[&Field], opts: EvolveOptions) -> Result<Self> {
        if initial.is_empty() {
            return Err(Error::input("nothing to evolve"));
        }
        for f in initial {
            check_grid(op.grid(), f.grid())?;
        }
        if opts.fixed_steps == Some(0) {
            return Err(Error::input("fixed step count must be positive"));
        }
        if !(opts.tol > 0.0) {
            return Err(Error::input(format!(
                "tolerance must be positive, got {}",
                opts.tol
            )));
        }
        let m = op.grid().nodes();
        let rate = op.max_rate().max(f64::MIN_POSITIVE);
        let dt = opts.dt_initial.unwrap_or(0.1 / rate);
        Ok(Self {
            op,
            opts,
            stepper: Stepper::new(op),
            t: 0.0,
            dt,
            states: initial.iter().map(|f| f.values().to_vec()).collect(),
            full: vec![0.0; m],
            half: vec![0.0; m],
            halves: vec![vec![0.0; m]; initial.len()],
            steps: 0,
            rejections: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn rejections(&self) -> usize {
        self.rejections
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k]
    }

    pub fn field(&self, k: usize) -> Field {
        Field::from_vec_unchecked(*self.op.grid(), self.states[k].clone())
    }

    fn order(&self) -> f64 {
        match self.opts.scheme {
            TimeScheme::BackwardEuler => 1.0,
            TimeScheme::CrankNicolson => 2.0,
        }
    }

    fn dt_cap(&self) -> f64 {
        let mut cap = self.opts.dt_max.unwrap_or(f64::INFINITY);
        if self.opts.scheme == TimeScheme::CrankNicolson {
            cap = cap.min(1.0 / self.op.max_rate().max(f64::MIN_POSITIVE));
        }
        cap
    }

    /// Advances every member to time `target >= self.time()`.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        if target < self.t {
            return Err(Error::input(format!(
                "cannot evolve backwards from {} to {target}",
                self.t
            )));
        }
        let scheme = self.opts.scheme;
        if let Some(n) = self.opts.fixed_steps {
            if target > self.t {
                let dt = (target - self.t) / n as f64;
                for _ in 0..n {
                    for k in 0..self.states.len() {
                        self.stepper
                            .step(scheme, &self.states[k], dt, &mut self.halves[k]);
                    }
                    std::mem::swap(&mut self.states, &mut self.halves);
                    self.steps += 1;
                }
                if self.states.iter().any(|s| s.iter().any(|v| !v.is_finite())) {
                    return Err(Error::numeric(format!("non-finite state at t = {target}")));
                }
                self.t = target;
            }
            return Ok(());
        }
        let exponent = 1.0 / (self.order() + 1.0);
        let cap = self.dt_cap();
        while self.t < target {
            if self.steps + self.rejections >= self.opts.max_steps {
                return Err(Error::numeric(format!(
                    "step budget exhausted at t = {}",
                    self.t
                )));
            }
            self.dt = self.dt.min(cap);
            let remaining = target - self.t;
            let landing = self.dt >= remaining * (1.0 - 1e-12);
            let dt = if landing { remaining } else { self.dt };

            let mut err: f64 = 0.0;
            for k in 0..self.states.len() {
                let u = &self.states[k];
                self.stepper.step(scheme, u, dt, &mut self.full);
                self.stepper.step(scheme, u, 0.5 * dt, &mut self.half);
                let out = &mut self.halves[k];
                self.stepper.step(scheme, &self.half, 0.5 * dt, out);
                let scale = sup_norm(out);
                if scale > 0.0 {
                    let diff = self
                        .full
                        .iter()
                        .zip(out.iter())
                        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                    err = err.max(diff / scale);
                }
            }
            if !err.is_finite() {
                return Err(Error::numeric(format!(
                    "non-finite state at t = {}",
                    self.t
                )));
            }
            let factor = if err == 0.0 {
                4.0
            } else {
                (0.9 * (self.opts.tol / err).powf(exponent)).clamp(0.2, 4.0)
            };
            if err <= self.opts.tol || dt < 1e-300 {
                std::mem::swap(&mut self.states, &mut self.halves);
                self.t = if landing { target } else { self.t + dt };
                self.steps += 1;
                if !landing || factor < 1.0 {
                    self.dt = dt * factor;
                }
            } else {
                self.rejections += 1;
                self.dt = dt * factor;
            }
        }
        Ok(())
    }

    pub fn into_fields(self) -> Vec<Field> {
        let grid = *self.op.grid();
        self.states
            .into_iter()
            .map(|v| Field::from_vec_unchecked(grid, v))
            .collect()
    }
}

pub(crate) fn check_grid(expected: &GridSpec, got: &GridSpec) -> Result<()> {
    if expected != got {
        return Err(Error::input("field grid does not match the operator grid"));
    }
    Ok(())
}

/// `S(t) u0` with step-doubling control at local tolerance `tol`.
pub fn apply_semigroup(op: &DiffusionOperator, u0: &Field, t: f64, tol: f64) -> Result<Field> {
    apply_semigroup_with(op, u0, t, EvolveOptions::with_tol(tol))
}

pub fn apply_semigroup_with(
    op: &DiffusionOperator,
    u0: &Field,
    t: f64,
    opts: EvolveOptions,
) -> Result<Field> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::input(format!("time must be nonnegative, got {t}")));
    }
    check_grid(op.grid(), u0.grid())?;
    if t == 0.0 {
        return Ok(u0.clone());
    }
    let mut ev = Evolution::new(op, &[u0], opts)?;
    ev.advance_to(t)?;
    Ok(ev.into_fields().remove(0))
}

/// `S(t) u` for several fields on a shared step sequence.
pub fn evolve_batch(
    op: &DiffusionOperator,
    fields: &[&Field],
    t: f64,
    opts: EvolveOptions,
) -> Result<Vec<Field>> {
    if t == 0.0 {
        return Ok(fields.iter().map(|f| (*f).clone()).collect());
    }
    let mut ev = Evolution::new(op, fields, opts)?;
    ev.advance_to(t)?;
    Ok(ev.into_fields())
}

/// `S(t_k) u0` for increasing sample times.
pub fn sample_semigroup(
    op: &DiffusionOperator,
    u0: &Field,
    times: &[f64],
    opts: EvolveOptions,
) -> Result<Vec<Field>> {
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::input("sample times must be nondecreasing"));
    }
    let mut ev = Evolution::new(op, &[u0], opts)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t == 0.0 {
            out.push(u0.clone());
            continue;
        }
        ev.advance_to(t)?;
        out.push(ev.field(0));
    }
    Ok(out)
}

/// Approximates `Gamma(., y, t)` by evolving a mass-one spike at node `y_index`.
pub fn kernel_column(op: &DiffusionOperator, y_index: usize, t: f64) -> Result<Field> {
    if !(t > 0.0) {
        return Err(Error::input(format!("time must be positive, got {t}")));
    }
    let delta = Field::delta(*op.grid(), y_index)?;
    apply_semigroup(op, &delta, t, 1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::operator::build_operator;
    use crate::weight::{WeightCase, WeightSpec};

    fn line_op(alpha: f64, half_width: f64, nodes: usize) -> DiffusionOperator {
        let g = GridSpec::line(half_width, nodes).unwrap();
        build_operator(g, WeightSpec::new(WeightCase::AxisPower, alpha, 1).unwrap()).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let op = line_op(0.3, 5.0, 101);
        let u0 = Field::from_fn(*op.grid(), |x| (-x * x).exp()).unwrap();
        assert_eq!(apply_semigroup(&op, &u0, 0.0, 1e-6).unwrap(), u0);
    }

    #[test]
    fn rejects_negative_time_and_grid_mismatch() {
        let op = line_op(0.0, 5.0, 101);
        let u0 = Field::zeros(*op.grid());
        assert!(apply_semigroup(&op, &u0, -1.0, 1e-6).is_err());
        let other = Field::zeros(GridSpec::line(5.0, 51).unwrap());
        assert!(apply_semigroup(&op, &other, 1.0, 1e-6).is_err());
        assert!(kernel_column(&op, 50, 0.0).is_err());
    }

    #[test]
    fn gaussian_matches_exact_evolution() {
        // u0 = exp(-x^2 / (2 s0^2)) evolves to s0/s exp(-x^2/(2 s^2)), s^2 = s0^2 + 2t.
        let op = line_op(0.0, 30.0, 1201);
        let s0: f64 = 1.0;
        let u0 = Field::from_fn(*op.grid(), |x| (-x * x / (2.0 * s0 * s0)).exp()).unwrap();
        let t = 2.0;
        let u = apply_semigroup(&op, &u0, t, 1e-6).unwrap();
        let s = (s0 * s0 + 2.0 * t).sqrt();
        let err = op
            .grid()
            .coordinates()
            .iter()
            .zip(u.values())
            .map(|(x, v)| (v - s0 / s * (-x * x / (2.0 * s * s)).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "sup error {err}");
    }

    #[test]
    fn crank_nicolson_is_more_accurate_per_tolerance() {
        let op = line_op(0.0, 20.0, 401);
        let u0 = Field::from_fn(*op.grid(), |x| (-x * x / 2.0).exp()).unwrap();
        let opts = EvolveOptions {
            scheme: TimeScheme::CrankNicolson,
            ..EvolveOptions::with_tol(1e-7)
        };
        let u = apply_semigroup_with(&op, &u0, 1.0, opts).unwrap();
        let s = 3f64.sqrt();
        let err = op
            .grid()
            .coordinates()
            .iter()
            .zip(u.values())
            .map(|(x, v)| (v - (-x * x / (2.0 * s * s)).exp() / s).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-3, "sup error {err}");
        assert!(u.min_value() >= -1e-12);
    }

    #[test]
    fn positivity_of_spike() {
        for alpha in [0.0, 0.5, 0.9] {
            let op = line_op(alpha, 10.0, 201);
            let k = kernel_column(&op, 100, 0.7).unwrap();
            assert!(k.min_value() >= -1e-12 * k.sup_norm());
            assert!((k.mass() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn sampled_times_agree_with_direct_runs() {
        let op = line_op(0.25, 20.0, 401);
        let u0 = Field::from_fn(*op.grid(), |x| (-x * x).exp()).unwrap();
        let samples =
            sample_semigroup(&op, &u0, &[0.0, 0.5, 2.0], EvolveOptions::with_tol(1e-7)).unwrap();
        assert_eq!(samples[0], u0);
        let direct = apply_semigroup(&op, &u0, 2.0, 1e-7).unwrap();
        let diff = samples[2]
            .values()
            .iter()
            .zip(direct.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-3 * direct.sup_norm());
    }
}
