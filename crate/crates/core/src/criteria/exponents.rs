use serde::{Deserialize, Serialize};

use crate::weight::WeightSpec;
use crate::{Error, Result};

fn check_time_exponent(r: f64) -> Result<()> {
    if !(r > -1.0 && r.is_finite()) {
        return Err(Error::input(format!(
            "time exponent must exceed -1, got {r}"
        )));
    }
    Ok(())
}

/// `1 + (2 - alpha)(r + 1) / N`.
fn critical_power(weight: &WeightSpec, r: f64) -> f64 {
    1.0 + weight.scaling_exponent() * (r + 1.0) / weight.dim() as f64
}

/// `(p_star, q_star)` for time exponents `r` (power term) and `s`
/// (log-power term).
pub fn fujita_exponents(weight: &WeightSpec, r: f64, s: f64) -> Result<(f64, f64)> {
    check_time_exponent(r)?;
    check_time_exponent(s)?;
    Ok((critical_power(weight, r), critical_power(weight, s)))
}

/// Exponent pair of one active source term: `h ~ t^time`, growth `nonlinear`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermExponents {
    pub nonlinear: f64,
    pub time: f64,
}

impl TermExponents {
    pub fn new(nonlinear: f64, time: f64) -> Self {
        Self { nonlinear, time }
    }
}

/// `max{(2-alpha)(r+1)/(p-1), (2-alpha)(s+1)/(q-1)}` over the active terms.
///
/// Applies only in the supercritical regime: every active term must exceed
/// its Fujita exponent.
pub fn second_critical_exponent(
    weight: &WeightSpec,
    power: Option<TermExponents>,
    log_power: Option<TermExponents>,
) -> Result<f64> {
    let terms: Vec<TermExponents> = power.into_iter().chain(log_power).collect();
    if terms.is_empty() {
        return Err(Error::input(
            "second critical exponent needs an active term",
        ));
    }
    let mut rho: f64 = 0.0;
    for t in terms {
        check_time_exponent(t.time)?;
        let star = critical_power(weight, t.time);
        if !(t.nonlinear > star) {
            return Err(Error::input(format!(
                "second critical exponent is defined for supercritical growth only: \
                 exponent {} does not exceed the critical value {star}",
                t.nonlinear
            )));
        }
        rho = rho.max(weight.scaling_exponent() * (t.time + 1.0) / (t.nonlinear - 1.0));
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::WeightCase;

    fn w(alpha: f64, n: usize) -> WeightSpec {
        WeightSpec::new(WeightCase::AxisPower, alpha, n).unwrap()
    }

    #[test]
    fn fujita_examples() {
        assert_eq!(fujita_exponents(&w(0.0, 1), 0.0, 0.0).unwrap().0, 3.0);
        for (a, n) in [(0.3, 1), (0.5, 2), (0.6, 3)] {
            let (p, _) = fujita_exponents(&w(a, n), 0.0, 0.0).unwrap();
            assert!((p - (1.0 + (2.0 - a) / n as f64)).abs() < 1e-15);
        }
        assert_eq!(fujita_exponents(&w(0.5, 1), 0.0, 1.0).unwrap().1, 4.0);
        assert!(fujita_exponents(&w(0.0, 1), -1.0, 0.0).is_err());
    }

    #[test]
    fn second_exponent_examples() {
        let c = w(0.0, 1);
        for p in [3.5, 4.0, 7.0] {
            let rho = second_critical_exponent(&c, Some(TermExponents::new(p, 0.0)), None).unwrap();
            assert!((rho - 2.0 / (p - 1.0)).abs() < 1e-15);
        }
        let a = w(0.5, 1);
        let rho = second_critical_exponent(&a, None, Some(TermExponents::new(5.0, 1.0))).unwrap();
        assert!((rho - 1.5 * 2.0 / 4.0).abs() < 1e-15);
        let rho = second_critical_exponent(
            &c,
            Some(TermExponents::new(5.0, 0.0)),
            Some(TermExponents::new(1e12, 0.0)),
        )
        .unwrap();
        assert!((rho - 0.5).abs() < 1e-12);
        assert!(second_critical_exponent(&c, Some(TermExponents::new(2.0, 0.0)), None).is_err());
        assert!(second_critical_exponent(&c, None, None).is_err());
    }

    #[test]
    fn monotone_on_grids() {
        let mut prev_p = f64::INFINITY;
        let mut prev_rho = f64::INFINITY;
        for k in 0..10 {
            let a = 0.095 * k as f64;
            let (p, q) = fujita_exponents(&w(a, 1), 0.0, 0.5).unwrap();
            assert!(p < prev_p && q > p);
            prev_p = p;
            let rho = second_critical_exponent(&w(a, 1), Some(TermExponents::new(4.0, 0.0)), None)
                .unwrap();
            assert!(rho < prev_rho);
            prev_rho = rho;
        }
        let mut prev = 0.0;
        for k in 0..10 {
            let r = -0.9 + 0.3 * k as f64;
            let (p, _) = fujita_exponents(&w(0.2, 2), r, 0.0).unwrap();
            assert!(p > prev);
            prev = p;
        }
    }
}
