use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawProfile {
    PowerLaw { exponent: f64 },
    Constant { value: f64 },
    Zero,
}

/// Time factor `h(t)` of a forcing term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub enum TimeProfile {
    /// `h(t) = t^r` for all `t > 0`, `r > -1`.
    PowerLaw(f64),
    /// `h(t) = c`, `c >= 0`.
    Constant(f64),
    Zero,
}

impl TryFrom<RawProfile> for TimeProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        match raw {
            RawProfile::PowerLaw { exponent } => TimeProfile::power_law(exponent),
            RawProfile::Constant { value } => TimeProfile::constant(value),
            RawProfile::Zero => Ok(TimeProfile::Zero),
        }
    }
}

impl From<TimeProfile> for RawProfile {
    fn from(p: TimeProfile) -> Self {
        match p {
            TimeProfile::PowerLaw(exponent) => RawProfile::PowerLaw { exponent },
            TimeProfile::Constant(value) => RawProfile::Constant { value },
            TimeProfile::Zero => RawProfile::Zero,
        }
    }
}

impl TimeProfile {
    pub fn power_law(exponent: f64) -> Result<Self> {
        if !(exponent > -1.0 && exponent.is_finite()) {
            return Err(Error::input(format!(
                "time exponent must exceed -1 so h is integrable at 0, got {exponent}"
            )));
        }
        Ok(TimeProfile::PowerLaw(exponent))
    }

    pub fn constant(value: f64) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::input(format!(
                "constant profile must be >= 0, got {value}"
            )));
        }
        Ok(TimeProfile::Constant(value))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::PowerLaw(r) => t.powf(r),
            TimeProfile::Constant(c) => c,
            TimeProfile::Zero => 0.0,
        }
    }

    /// `integral_0^t h`.
    pub fn primitive(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::PowerLaw(r) => t.powf(r + 1.0) / (r + 1.0),
            TimeProfile::Constant(c) => c * t,
            TimeProfile::Zero => 0.0,
        }
    }

    /// `integral_t^{t+dt} h`, without cancellation for `dt << t`.
    pub fn increment(&self, t: f64, dt: f64) -> f64 {
        match *self {
            TimeProfile::PowerLaw(r) if t > 0.0 => {
                let k = r + 1.0;
                t.powf(k) * (k * (dt / t).ln_1p()).exp_m1() / k
            }
            TimeProfile::PowerLaw(_) => self.primitive(dt),
            TimeProfile::Constant(c) => c * dt,
            TimeProfile::Zero => 0.0,
        }
    }

    /// Growth exponent: `r` for a power law, `0` for a positive constant.
    pub fn exponent(&self) -> Option<f64> {
        match *self {
            TimeProfile::PowerLaw(r) => Some(r),
            TimeProfile::Constant(c) if c > 0.0 => Some(0.0),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(*self, TimeProfile::Zero | TimeProfile::Constant(0.0))
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawNonlinearity {
    Power { p: f64 },
    LogPower { q: f64 },
}

/// Source nonlinearity: `u^p` or `(1+u) ln(1+u)^q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNonlinearity", into = "RawNonlinearity")]
pub enum Nonlinearity {
    Power(f64),
    LogPower(f64),
}

impl TryFrom<RawNonlinearity> for Nonlinearity {
    type Error = Error;

    fn try_from(raw: RawNonlinearity) -> Result<Self> {
        match raw {
            RawNonlinearity::Power { p } => Nonlinearity::power(p),
            RawNonlinearity::LogPower { q } => Nonlinearity::log_power(q),
        }
    }
}

impl From<Nonlinearity> for RawNonlinearity {
    fn from(n: Nonlinearity) -> Self {
        match n {
            Nonlinearity::Power(p) => RawNonlinearity::Power { p },
            Nonlinearity::LogPower(q) => RawNonlinearity::LogPower { q },
        }
    }
}

impl Nonlinearity {
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::input(format!(
                "power exponent must exceed 1, got {p}"
            )));
        }
        Ok(Nonlinearity::Power(p))
    }

    pub fn log_power(q: f64) -> Result<Self> {
        if !(q > 1.0 && q.is_finite()) {
            return Err(Error::input(format!(
                "log-power exponent must exceed 1, got {q}"
            )));
        }
        Ok(Nonlinearity::LogPower(q))
    }

    pub fn exponent(&self) -> f64 {
        match *self {
            Nonlinearity::Power(p) | Nonlinearity::LogPower(p) => p,
        }
    }

    /// Value at `u`; negative round-off is treated as zero.
    pub fn eval(&self, u: f64) -> f64 {
        let u = u.max(0.0);
        match *self {
            Nonlinearity::Power(p) => u.powf(p),
            Nonlinearity::LogPower(q) => (1.0 + u) * u.ln_1p().powf(q),
        }
    }

    /// `f(s) / s`, continued by `0` at `s = 0`.
    pub fn ratio(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match *self {
            Nonlinearity::Power(p) => s.powf(p - 1.0),
            Nonlinearity::LogPower(_) => self.eval(s) / s,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Nonlinearity::Power(p) => format!("power({p})"),
            Nonlinearity::LogPower(q) => format!("log_power({q})"),
        }
    }
}

/// One term `h(t) f(u)` of the source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForcingTerm {
    pub profile: TimeProfile,
    pub nonlinearity: Nonlinearity,
}

impl ForcingTerm {
    pub fn new(profile: TimeProfile, nonlinearity: Nonlinearity) -> Self {
        Self {
            profile,
            nonlinearity,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primitives() {
        assert_eq!(TimeProfile::PowerLaw(0.0).primitive(3.0), 3.0);
        assert_eq!(TimeProfile::PowerLaw(1.0).primitive(2.0), 2.0);
        assert!((TimeProfile::PowerLaw(-0.5).primitive(4.0) - 4.0).abs() < 1e-15);
        assert_eq!(TimeProfile::Constant(2.5).primitive(2.0), 5.0);
        assert_eq!(TimeProfile::Zero.primitive(7.0), 0.0);
    }

    #[test]
    fn increment_matches_difference_of_primitives() {
        for r in [-0.5, 0.0, 1.0, 2.5] {
            let h = TimeProfile::power_law(r).unwrap();
            for (t, dt) in [(0.0, 0.3), (1.0, 0.5), (10.0, 1e-3)] {
                let want = h.primitive(t + dt) - h.primitive(t);
                assert!((h.increment(t, dt) - want).abs() <= 1e-13 * h.primitive(t + dt));
            }
        }
        // Far from the origin the increment keeps full precision.
        let h = TimeProfile::PowerLaw(1.0);
        assert!((h.increment(1e6, 1e-9) - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TimeProfile::power_law(-1.0).is_err());
        assert!(TimeProfile::constant(-0.1).is_err());
        assert!(Nonlinearity::power(1.0).is_err());
        assert!(Nonlinearity::log_power(0.5).is_err());
        assert!(serde_json::from_str::<Nonlinearity>(r#"{"kind":"power","p":0.9}"#).is_err());
    }

    #[test]
    fn json_shape() {
        let term = ForcingTerm::new(TimeProfile::PowerLaw(0.5), Nonlinearity::LogPower(2.0));
        let s = serde_json::to_string(&term).unwrap();
        assert_eq!(
            s,
            r#"{"profile":{"kind":"power_law","exponent":0.5},"nonlinearity":{"kind":"log_power","q":2.0}}"#
        );
        assert_eq!(serde_json::from_str::<ForcingTerm>(&s).unwrap(), term);
        assert_eq!(
            serde_json::from_str::<TimeProfile>(r#"{"kind":"zero"}"#).unwrap(),
            TimeProfile::Zero
        );
    }

    #[test]
    fn vanish_at_zero() {
        for n in [Nonlinearity::Power(2.0), Nonlinearity::LogPower(1.5)] {
            assert_eq!(n.eval(0.0), 0.0);
            assert_eq!(n.ratio(0.0), 0.0);
        }
    }

    proptest! {
        #[test]
        fn nondecreasing_convex_with_growing_ratio(
            e in 1.01f64..5.0, a in 0.0f64..50.0, b in 0.0f64..50.0, log in any::<bool>()
        ) {
            let n = if log { Nonlinearity::LogPower(e) } else { Nonlinearity::Power(e) };
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(n.eval(lo) <= n.eval(hi));
            prop_assert!(n.ratio(lo) <= n.ratio(hi) * (1.0 + 1e-12));
            let mid = 0.5 * (lo + hi);
            prop_assert!(n.eval(mid) <= 0.5 * (n.eval(lo) + n.eval(hi)) * (1.0 + 1e-12) + 1e-300);
        }
    }
}
