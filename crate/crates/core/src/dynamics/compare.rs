use serde::Serialize;

use super::simulate::{relative_change, ImexStep, SimConfig};
use crate::semigroup::{check_grid, sup_norm, Field};
use crate::{Error, Result};

/// Order check between two co-advanced runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// `max_t max_x (u - v)^+`.
    pub max_defect: f64,
    /// `max_t |v|_inf`.
    pub scale: f64,
    pub final_time: f64,
    pub steps: usize,
    /// False when the march stopped early at the blow-up threshold or the
    /// step floor.
    pub reached_horizon: bool,
}

/// Runs `config` from `u0` and from `v0` on one shared step sequence.
pub fn compare_runs(config: &SimConfig, u0: &Field, v0: &Field) -> Result<ComparisonReport> {
    check_grid(config.grid(), u0.grid())?;
    check_grid(config.grid(), v0.grid())?;
    if u0.values().iter().zip(v0.values()).any(|(a, b)| a > b) {
        return Err(Error::input("compare_runs needs u0 <= v0 at every node"));
    }
    let low = config.with_initial(u0.clone());
    let high = config.with_initial(v0.clone());
    compare_configs(&low, &high)
}

/// Co-advances `low` and `high`, which must share geometry, weight and
/// horizon but may differ in data and forcings. Step control follows the
/// larger of the two relative changes and the settings of `high`.
pub fn compare_configs(low: &SimConfig, high: &SimConfig) -> Result<ComparisonReport> {
    low.validate()?;
    high.validate()?;
    check_grid(low.grid(), high.grid())?;
    if low.weight != high.weight
        || low.horizon != high.horizon
        || low.diffusionless != high.diffusionless
    {
        return Err(Error::input(
            "compared runs must share weight, horizon and mode",
        ));
    }
    let op = if high.diffusionless {
        None
    } else {
        Some(high.operator()?)
    };
    let mut step_low = ImexStep::new(op.as_ref(), &low.forcings);
    let mut step_high = ImexStep::new(op.as_ref(), &high.forcings);
    let mut u = low.u0.values().to_vec();
    let mut v = high.u0.values().to_vec();
    let mut nu = vec![0.0; u.len()];
    let mut nv = vec![0.0; v.len()];
    let defect = |u: &[f64], v: &[f64]| u.iter().zip(v).fold(0.0f64, |m, (a, b)| m.max(a - b));

    let horizon = high.horizon;
    let threshold = low.blowup_threshold.min(high.blowup_threshold);
    let mut report = ComparisonReport {
        max_defect: defect(&u, &v),
        scale: sup_norm(&v),
        final_time: 0.0,
        steps: 0,
        reached_horizon: false,
    };
    let mut t = 0.0;
    let mut dt = high.first_dt();
    let mut attempts = 0usize;
    while t < horizon {
        if attempts >= high.max_steps {
            return Err(Error::numeric(format!("step budget exhausted at t = {t}")));
        }
        attempts += 1;
        let remaining = horizon - t;
        let landing = dt >= remaining * (1.0 - 1e-12);
        let step = if landing { remaining } else { dt };
        step_low.apply(&u, &u, t, step, &mut nu);
        step_high.apply(&v, &v, t, step, &mut nv);
        let change = relative_change(&u, &nu).max(relative_change(&v, &nv));
        if change > high.tol {
            if step <= high.dt_floor {
                return Ok(report);
            }
            dt = (0.5 * step).max(high.dt_floor);
            continue;
        }
        std::mem::swap(&mut u, &mut nu);
        std::mem::swap(&mut v, &mut nv);
        t = if landing { horizon } else { t + step };
        report.steps += 1;
        report.final_time = t;
        report.max_defect = report.max_defect.max(defect(&u, &v));
        let sv = sup_norm(&v);
        report.scale = report.scale.max(sv);
        if sv >= threshold || sup_norm(&u) >= threshold {
            return Ok(report);
        }
        if !landing {
            dt = if change < 0.1 * high.tol {
                2.0 * step
            } else {
                step
            };
        }
    }
    report.reached_horizon = true;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{ForcingTerm, Nonlinearity, TimeProfile};
    use crate::semigroup::GridSpec;
    use crate::weight::{WeightCase, WeightSpec};

    fn setup() -> (SimConfig, Field) {
        let grid = GridSpec::line_with_spacing(15.0, 0.1).unwrap();
        let v0 = Field::from_fn(grid, |x| 2.0 * (-x * x).exp()).unwrap();
        let w = WeightSpec::new(WeightCase::AxisPower, 0.5, 1).unwrap();
        let term = ForcingTerm::new(TimeProfile::Constant(1.0), Nonlinearity::Power(2.0));
        (SimConfig::new(w, vec![term], v0.clone(), 1.0), v0)
    }

    #[test]
    fn identical_data_give_zero_defect() {
        let (c, v0) = setup();
        let r = compare_runs(&c, &v0, &v0).unwrap();
        assert_eq!(r.max_defect, 0.0);
        assert!(r.steps > 0);
    }

    #[test]
    fn ordered_data_stay_ordered() {
        let (c, v0) = setup();
        let half = v0.scaled(0.5);
        let r = compare_runs(&c, &half, &v0).unwrap();
        assert!(r.max_defect <= 1e-10 * r.scale, "{r:?}");
        let bump = Field::from_fn(*v0.grid(), |x| if x.abs() < 0.5 { 1.0 } else { 0.0 }).unwrap();
        let r = compare_runs(&c, &bump, &v0).unwrap();
        assert!(r.max_defect <= 1e-10 * r.scale, "{r:?}");
    }

    #[test]
    fn rejects_unordered_pair() {
        let (c, v0) = setup();
        assert!(compare_runs(&c, &v0, &v0.scaled(0.5)).is_err());
    }
}
