//! Numerical probes of the kernel properties: semigroup law, smoothing
//! estimates, the lower bound on centred balls and the Jensen inequality.

use serde::Serialize;

use super::evolve::{check_grid, evolve_batch, sample_semigroup, Evolution, EvolveOptions};
use super::grid::{sup_norm, Field};
use super::operator::DiffusionOperator;
use crate::{Error, Result};

/// `||S(t-s) S(s) u0 - S(t) u0||_inf / ||S(t) u0||_inf`.
pub fn semigroup_defect(
    op: &DiffusionOperator,
    u0: &Field,
    t: f64,
    s: f64,
    opts: EvolveOptions,
) -> Result<f64> {
    if !(s > 0.0 && s < t) {
        return Err(Error::input(format!(
            "need 0 < s < t, got s = {s}, t = {t}"
        )));
    }
    let mut direct = Evolution::new(op, &[u0], opts)?;
    direct.advance_to(t)?;
    let mut first = Evolution::new(op, &[u0], opts)?;
    first.advance_to(s)?;
    let mid = first.field(0);
    let mut second = Evolution::new(op, &[&mid], opts)?;
    second.advance_to(t - s)?;
    let a = direct.state(0);
    let b = second.state(0);
    let diff = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(diff / sup_norm(a))
}

/// `||S(t) u0||_{q2} / (t^{-(N/(2-alpha))(1/q1 - 1/q2)} ||u0||_{q1})`.
///
/// Use `f64::INFINITY` for the sup norm.
pub fn smoothing_norm_check(
    op: &DiffusionOperator,
    u0: &Field,
    t: f64,
    q1: f64,
    q2: f64,
    opts: EvolveOptions,
) -> Result<f64> {
    if !(q1 >= 1.0 && q2 >= q1) {
        return Err(Error::input(format!("need 1 <= q1 <= q2, got {q1}, {q2}")));
    }
    if !(t > 0.0) {
        return Err(Error::input("time must be positive"));
    }
    let evolved = super::evolve::apply_semigroup_with(op, u0, t, opts)?;
    let rate = op.weight().kernel_decay_rate();
    let gap = 1.0 / q1 - if q2.is_infinite() { 0.0 } else { 1.0 / q2 };
    Ok(evolved.lq_norm(q2) / (t.powf(-rate * gap) * u0.lq_norm(q1)))
}

/// Ratio in the lower kernel bound on the parabolic ball `|x| <= t^(1/(2-alpha))`:
///
/// `min_{|x| <= rho} S(t) u0(x) / (t^{-N/(2-alpha)} integral_{|y| <= rho} u0)`.
pub fn lower_bound_ratio(
    op: &DiffusionOperator,
    u0: &Field,
    t: f64,
    opts: EvolveOptions,
) -> Result<f64> {
    let rho = t.powf(1.0 / op.weight().scaling_exponent());
    if rho >= op.grid().extent() {
        return Err(Error::input(format!(
            "parabolic radius {rho} exceeds the computational domain"
        )));
    }
    let local_mass = u0.window_mass(rho);
    if local_mass <= 0.0 {
        return Err(Error::input("initial data vanishes on the parabolic ball"));
    }
    let evolved = super::evolve::apply_semigroup_with(op, u0, t, opts)?;
    let grid = op.grid();
    let min = (0..grid.nodes())
        .filter(|&i| grid.coordinate(i).abs() <= rho)
        .map(|i| evolved.values()[i])
        .fold(f64::INFINITY, f64::min);
    Ok(min / (t.powf(-op.weight().kernel_decay_rate()) * local_mass))
}

/// `max_i [ f(S(t) u0)_i - (S(t) f(u0))_i ]`, computed on one shared step
/// sequence. Nonpositive (up to rounding) for convex `f` with `f(0) = 0`.
pub fn jensen_gap(
    op: &DiffusionOperator,
    u0: &Field,
    t: f64,
    f: impl Fn(f64) -> f64,
    opts: EvolveOptions,
) -> Result<f64> {
    check_grid(op.grid(), u0.grid())?;
    let fu0 = u0.map(&f)?;
    let out = evolve_batch(op, &[u0, &fu0], t, opts)?;
    Ok(out[0]
        .values()
        .iter()
        .zip(out[1].values())
        .map(|(s, sf)| f(*s) - sf)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// One row of a kernel probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelSample {
    pub t: f64,
    pub sup_value: f64,
    pub mass: f64,
    /// Local log-log slope of `sup_value` against `t` from neighbouring samples.
    pub slope_window_estimate: Option<f64>,
}

/// Evolves a mass-one spike at `y_index` and records sup norm and mass at
/// each time.
pub fn kernel_probe(
    op: &DiffusionOperator,
    y_index: usize,
    times: &[f64],
    opts: EvolveOptions,
) -> Result<Vec<KernelSample>> {
    if times.iter().any(|&t| t <= 0.0) {
        return Err(Error::input("probe times must be positive"));
    }
    let delta = Field::delta(*op.grid(), y_index)?;
    let fields = sample_semigroup(op, &delta, times, opts)?;
    let trace: Vec<(f64, f64)> = times
        .iter()
        .zip(&fields)
        .map(|(&t, f)| (t, f.sup_norm()))
        .collect();
    let slopes = local_loglog_slopes(&trace);
    Ok(trace
        .iter()
        .zip(fields.iter())
        .zip(slopes)
        .map(|((&(t, sup), f), slope)| KernelSample {
            t,
            sup_value: sup,
            mass: f.mass(),
            slope_window_estimate: slope,
        })
        .collect())
}

/// Log-log slope at each sample from its neighbours (one-sided at the ends).
pub fn local_loglog_slopes(trace: &[(f64, f64)]) -> Vec<Option<f64>> {
    let n = trace.len();
    let slope = |a: (f64, f64), b: (f64, f64)| {
        if a.0 > 0.0 && b.0 > 0.0 && a.1 > 0.0 && b.1 > 0.0 && a.0 != b.0 {
            Some((b.1.ln() - a.1.ln()) / (b.0.ln() - a.0.ln()))
        } else {
            None
        }
    };
    (0..n)
        .map(|i| {
            if n < 2 {
                None
            } else if i == 0 {
                slope(trace[0], trace[1])
            } else if i == n - 1 {
                slope(trace[n - 2], trace[n - 1])
            } else {
                slope(trace[i - 1], trace[i + 1])
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::fit_loglog;
    use crate::semigroup::evolve::TimeScheme;
    use crate::semigroup::grid::GridSpec;
    use crate::semigroup::operator::build_operator;
    use crate::weight::{WeightCase, WeightSpec};

    fn op(alpha: f64, half_width: f64, dx: f64) -> DiffusionOperator {
        build_operator(
            GridSpec::line_with_spacing(half_width, dx).unwrap(),
            WeightSpec::new(WeightCase::AxisPower, alpha, 1).unwrap(),
        )
        .unwrap()
    }

    fn gaussian(op: &DiffusionOperator, s: f64) -> Field {
        Field::from_fn(*op.grid(), |x| (-x * x / (2.0 * s * s)).exp()).unwrap()
    }

    #[test]
    fn contraction_in_every_lq() {
        let o = op(0.4, 20.0, 0.05);
        let u0 = Field::from_fn(
            *o.grid(),
            |x| if x.abs() < 2.0 { 1.0 + x.sin() } else { 0.0 },
        )
        .unwrap();
        for q in [1.0, 2.0, 3.5, f64::INFINITY] {
            for t in [0.1, 1.0, 5.0] {
                let r = smoothing_norm_check(&o, &u0, t, q, q, EvolveOptions::default()).unwrap();
                assert!(r <= 1.0 + 1e-6, "q={q} t={t} ratio={r}");
            }
        }
    }

    #[test]
    fn classical_l1_to_sup_constant() {
        // Spike data: ||S(t) delta||_inf = (4 pi t)^{-1/2}.
        let o = op(0.0, 30.0, 0.05);
        let d = Field::delta(*o.grid(), o.grid().center_index()).unwrap();
        let r = smoothing_norm_check(
            &o,
            &d,
            4.0,
            1.0,
            f64::INFINITY,
            EvolveOptions::with_tol(1e-7),
        )
        .unwrap();
        let expect = (4.0 * std::f64::consts::PI).powf(-0.5);
        assert!((r / expect - 1.0).abs() < 0.01, "ratio {r} vs {expect}");
    }

    #[test]
    fn smoothing_ratio_flat_for_degenerate_weight() {
        let o = op(0.5, 150.0, 0.25);
        let d = Field::delta(*o.grid(), o.grid().center_index()).unwrap();
        let times = [1.0, 3.0, 10.0, 30.0, 100.0];
        let fields = sample_semigroup(&o, &d, &times, EvolveOptions::with_tol(1e-6)).unwrap();
        let pts: Vec<(f64, f64)> = times
            .iter()
            .zip(&fields)
            .map(|(&t, f)| (t, f.sup_norm() / t.powf(-1.0 / 1.5)))
            .collect();
        let fit = fit_loglog(&pts).unwrap();
        assert!(fit.slope.abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn jensen_holds_for_convex_nonlinearities() {
        let o = op(0.5, 20.0, 0.1);
        let u0 = Field::from_fn(*o.grid(), |x| {
            2.0 * (-x * x).exp() + if x > 1.0 && x < 3.0 { 1.0 } else { 0.0 }
        })
        .unwrap();
        let scale = u0.sup_norm().powi(2);
        let gap = jensen_gap(&o, &u0, 1.5, |s| s * s, EvolveOptions::default()).unwrap();
        assert!(gap <= 1e-8 * scale, "gap {gap}");
        let g = |s: f64| (1.0 + s) * (1.0 + s).ln().powi(2);
        let gap = jensen_gap(&o, &u0, 1.5, g, EvolveOptions::default()).unwrap();
        assert!(gap <= 1e-8 * g(u0.sup_norm()), "gap {gap}");
    }

    #[test]
    fn lower_bound_ratio_levels_off() {
        for alpha in [0.0, 0.5] {
            let o = op(alpha, 200.0, 0.25);
            let u0 = Field::from_fn(*o.grid(), |x| if x.abs() <= 1.0 { 1.0 } else { 0.0 }).unwrap();
            let pts: Vec<(f64, f64)> = [10.0, 30.0, 100.0]
                .iter()
                .map(|&t| {
                    (
                        t,
                        lower_bound_ratio(&o, &u0, t, EvolveOptions::default()).unwrap(),
                    )
                })
                .collect();
            assert!(pts.iter().all(|p| p.1 > 0.0));
            let fit = fit_loglog(&pts).unwrap();
            assert!(fit.slope.abs() < 0.1, "alpha={alpha} slope {}", fit.slope);
        }
    }

    #[test]
    fn defect_small_at_reference_resolution() {
        let o = op(0.0, 25.0, 0.05);
        let u0 = gaussian(&o, 1.0);
        let reference = EvolveOptions::fixed(TimeScheme::CrankNicolson, 64);
        let d = semigroup_defect(&o, &u0, 2.0, 1.0, reference).unwrap();
        // Measured 1.46e-5 on this configuration.
        assert!(d <= 1e-4, "defect {d}");
        let d4 = semigroup_defect(&o, &u0, 2.0, 0.5, reference).unwrap();
        assert!(d4 / d < 2.0 && d / d4 < 2.0, "s=t/2: {d}, s=t/4: {d4}");
        assert!(semigroup_defect(&o, &u0, 2.0, 2.0, EvolveOptions::default()).is_err());
        assert!(
            semigroup_defect(&o, &u0, 2.0, 1.0, EvolveOptions::with_tol(1e-7)).unwrap() <= 1e-4
        );
    }

    #[test]
    fn defect_halves_under_step_refinement() {
        let o = op(0.0, 25.0, 0.05);
        let u0 = gaussian(&o, 1.0);
        let ds: Vec<f64> = [32, 64, 128, 256]
            .iter()
            .map(|&n| {
                semigroup_defect(
                    &o,
                    &u0,
                    2.0,
                    1.0,
                    EvolveOptions::fixed(TimeScheme::BackwardEuler, n),
                )
                .unwrap()
            })
            .collect();
        for w in ds.windows(2) {
            assert!((w[0] / w[1]).log2() >= 0.9, "{ds:?}");
        }
    }

    #[test]
    fn slopes_of_power_trace() {
        let trace: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0]
            .iter()
            .map(|&t| (t, t.powf(-0.5)))
            .collect();
        for s in local_loglog_slopes(&trace) {
            assert!((s.unwrap() + 0.5).abs() < 1e-12);
        }
        assert_eq!(local_loglog_slopes(&trace[..1]), vec![None]);
    }
}
