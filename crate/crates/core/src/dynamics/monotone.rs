use serde::Serialize;

use super::simulate::{ImexStep, SimConfig};
use crate::semigroup::{check_grid, sup_norm, Field};
use crate::{Error, Result};

/// Settings for [`monotone_iterates`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotoneOptions {
    pub beta: f64,
    pub k_max: usize,
    /// Data scale `u0 = delta v0`; defaults to `0.99 / (1 + beta)`.
    pub delta: Option<f64>,
    /// Number of positive mesh times, geometrically spaced.
    pub mesh_points: usize,
    /// First mesh time as a fraction of the horizon.
    pub first_fraction: f64,
}

impl MonotoneOptions {
    pub fn new(beta: f64, k_max: usize) -> Self {
        Self {
            beta,
            k_max,
            delta: None,
            mesh_points: 400,
            first_fraction: 1e-5,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }
}

/// Diagnostics for iterate `k >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterateRecord {
    pub k: usize,
    /// `max_t |u^k - u^{k-1}|_inf`.
    pub sup_distance: f64,
    /// `max_t max_x (u^{k-1} - u^k)^+`, relative to `max_t |u^0|_inf`.
    pub monotone_violation: f64,
    /// `max_t max_x (u^k - (1+beta) u^0)`, relative to `|u^0(t)|_inf`.
    pub cap_excess: f64,
    /// `max u^k / u^0` over nodes where `u^0` exceeds `1e-8 |u^0(t)|_inf`;
    /// the cap asks for at most `1 + beta`.
    pub cap_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub beta: f64,
    pub delta: f64,
    pub mesh: Vec<f64>,
    pub iterates: Vec<IterateRecord>,
    /// First `k` whose iterate exceeds the cap by more than round-off.
    pub cap_violated_at: Option<usize>,
    pub monotone: bool,
}

impl MonotoneReport {
    /// `d_{k+1} / d_k` for successive sup-distances.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.iterates
            .windows(2)
            .filter(|w| w[0].sup_distance > 0.0)
            .map(|w| w[1].sup_distance / w[0].sup_distance)
            .collect()
    }
}

const ROUNDOFF: f64 = 1e-12;

/// Picard iterates of the mild formulation from `u0 = delta v0` on a fixed
/// time mesh, each using the same implicit step as [`super::simulate`].
pub fn monotone_iterates(
    config: &SimConfig,
    v0: &Field,
    opts: &MonotoneOptions,
) -> Result<MonotoneReport> {
    check_grid(config.grid(), v0.grid())?;
    if !(opts.beta > 0.0 && opts.beta.is_finite()) {
        return Err(Error::input(format!(
            "beta must be positive, got {}",
            opts.beta
        )));
    }
    if opts.mesh_points < 2 || !(opts.first_fraction > 0.0 && opts.first_fraction < 1.0) {
        return Err(Error::input(
            "mesh needs >= 2 points and a first fraction in (0, 1)",
        ));
    }
    let delta = opts.delta.unwrap_or(0.99 / (1.0 + opts.beta));
    if !(delta > 0.0) {
        return Err(Error::input("delta must be positive"));
    }
    let config = config.with_initial(v0.scaled(delta));
    config.validate()?;
    let op = if config.diffusionless {
        None
    } else {
        Some(config.operator()?)
    };
    let mut imex = ImexStep::new(op.as_ref(), &config.forcings);
    let mut free = ImexStep::new(op.as_ref(), &[]);

    let n = opts.mesh_points;
    let t_first = opts.first_fraction * config.horizon;
    let ratio = (config.horizon / t_first).powf(1.0 / (n - 1) as f64);
    let mut mesh = Vec::with_capacity(n + 1);
    mesh.push(0.0);
    for j in 0..n {
        mesh.push(if j == n - 1 {
            config.horizon
        } else {
            t_first * ratio.powi(j as i32)
        });
    }

    let m = config.u0.values().len();
    let mut linear = vec![config.u0.values().to_vec()];
    for j in 0..n {
        let mut next = vec![0.0; m];
        free.apply(
            &linear[j],
            &linear[j],
            mesh[j],
            mesh[j + 1] - mesh[j],
            &mut next,
        );
        linear.push(next);
    }
    let scales: Vec<f64> = linear.iter().map(|u| sup_norm(u)).collect();
    let top = scales.iter().copied().fold(0.0, f64::max);

    let mut previous = linear.clone();
    let mut report = MonotoneReport {
        beta: opts.beta,
        delta,
        mesh: mesh.clone(),
        iterates: Vec::new(),
        cap_violated_at: None,
        monotone: true,
    };
    let cap = 1.0 + opts.beta;
    for k in 1..=opts.k_max {
        let mut current = vec![config.u0.values().to_vec()];
        for j in 0..n {
            let mut next = vec![0.0; m];
            imex.apply(
                &current[j],
                &previous[j],
                mesh[j],
                mesh[j + 1] - mesh[j],
                &mut next,
            );
            current.push(next);
        }
        let mut rec = IterateRecord {
            k,
            sup_distance: 0.0,
            monotone_violation: 0.0,
            cap_excess: f64::NEG_INFINITY,
            cap_ratio: 0.0,
        };
        let mut finite = true;
        for j in 0..=n {
            let scale = scales[j];
            for i in 0..m {
                let (a, b) = (current[j][i], previous[j][i]);
                if !a.is_finite() {
                    finite = false;
                }
                rec.sup_distance = rec.sup_distance.max((a - b).abs());
                if top > 0.0 {
                    rec.monotone_violation = rec.monotone_violation.max((b - a) / top);
                }
                if scale > 0.0 {
                    let lin = linear[j][i];
                    rec.cap_excess = rec.cap_excess.max((a - cap * lin) / scale);
                    if lin > 1e-8 * scale {
                        rec.cap_ratio = rec.cap_ratio.max(a / lin);
                    }
                }
            }
        }
        if !finite {
            rec.sup_distance = f64::INFINITY;
            rec.cap_excess = f64::INFINITY;
            rec.cap_ratio = f64::INFINITY;
        }
        if rec.cap_excess == f64::NEG_INFINITY {
            rec.cap_excess = 0.0;
        }
        if rec.monotone_violation > ROUNDOFF {
            report.monotone = false;
        }
        if rec.cap_excess > ROUNDOFF && report.cap_violated_at.is_none() {
            report.cap_violated_at = Some(k);
        }
        report.iterates.push(rec);
        if !finite {
            break;
        }
        previous = current;
    }
    Ok(report)
}
