//! Power weights `w(x) = |x_1|^a` (axis case) and `w(x) = |x|^b` (radial
//! case), together with the scale function
//!
//! ```text
//! h_x(r) = ( integral over B_r(x) of w(y)^(-N/2) dy )^(2/N)
//! ```
//!
//! and its inverse, which set the space-time scaling of the heat kernel.

use serde::{Deserialize, Serialize};

use crate::quad::adaptive_simpson;
use crate::{Error, Result};

/// Which coordinate the weight degenerates along.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightCase {
    /// `w(x) = |x_1|^alpha`, degenerate on the hyperplane `{x_1 = 0}`.
    AxisPower,
    /// `w(x) = |x|^alpha`, degenerate at the origin.
    RadialPower,
}

#[derive(Deserialize)]
struct RawWeightSpec {
    case: WeightCase,
    alpha: f64,
    dim: usize,
}

/// An admissible weight: case, exponent and spatial dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeightSpec")]
pub struct WeightSpec {
    case: WeightCase,
    alpha: f64,
    dim: usize,
}

impl TryFrom<RawWeightSpec> for WeightSpec {
    type Error = Error;

    fn try_from(raw: RawWeightSpec) -> Result<Self> {
        WeightSpec::new(raw.case, raw.alpha, raw.dim)
    }
}

/// Upper (exclusive) bound on the exponent for a case and dimension.
pub fn alpha_limit(case: WeightCase, dim: usize) -> f64 {
    match case {
        WeightCase::AxisPower if dim >= 3 => 2.0 / dim as f64,
        _ => 1.0,
    }
}

impl WeightSpec {
    pub fn new(case: WeightCase, alpha: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("spatial dimension must be positive"));
        }
        let limit = alpha_limit(case, dim);
        if !(alpha >= 0.0 && alpha < limit) {
            return Err(Error::input(format!(
                "exponent {alpha} outside [0, {limit}) for {case:?} in dimension {dim}"
            )));
        }
        Ok(Self { case, alpha, dim })
    }

    /// The unweighted heat equation in dimension `dim`.
    pub fn classical(dim: usize) -> Result<Self> {
        Self::new(WeightCase::RadialPower, 0.0, dim)
    }

    pub fn case(&self) -> WeightCase {
        self.case
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Returns a copy with a different exponent, re-validated.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.case, alpha, self.dim)
    }

    /// `2 - alpha`: the parabolic scaling exponent, `h_0(r) ~ r^(2 - alpha)`.
    pub fn scaling_exponent(&self) -> f64 {
        2.0 - self.alpha
    }

    /// `N / (2 - alpha)`, the on-diagonal decay rate of the kernel.
    pub fn kernel_decay_rate(&self) -> f64 {
        self.dim as f64 / self.scaling_exponent()
    }

    /// `w(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::input(format!(
                "point has dimension {}, weight expects {}",
                x.len(),
                self.dim
            )));
        }
        let base = match self.case {
            WeightCase::AxisPower => x[0].abs(),
            WeightCase::RadialPower => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        };
        Ok(self.eval_distance(base))
    }

    /// `s^alpha` for a nonnegative distance `s` to the degeneracy set.
    pub(crate) fn eval_distance(&self, s: f64) -> f64 {
        if self.alpha == 0.0 {
            1.0
        } else {
            s.abs().powf(self.alpha)
        }
    }
}

/// `w(x)` for a weight and a point. Fails on a dimension mismatch.
pub fn eval_weight(spec: &WeightSpec, x: &[f64]) -> Result<f64> {
    spec.eval(x)
}

/// Surface area of the unit sphere in `R^n`, `2 pi^(n/2) / Gamma(n/2)`.
pub fn unit_sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    // Gamma(n/2) by the half-integer recursion.
    let mut gamma = if n.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut k = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while k < n as f64 / 2.0 - 1e-12 {
        gamma *= k;
        k += 1.0;
    }
    2.0 * PI.powf(n as f64 / 2.0) / gamma
}

/// `integral_a^b |y|^(-e) dy` for `0 <= e < 1`.
///
/// A small core next to the singularity is integrated exactly; the rest goes
/// through adaptive Simpson.
fn abs_power_integral(a: f64, b: f64, e: f64) -> Result<f64> {
    debug_assert!(a <= b);
    if e == 0.0 {
        return Ok(b - a);
    }
    if a < 0.0 && b > 0.0 {
        return Ok(half_line_power_integral(0.0, -a, e)? + half_line_power_integral(0.0, b, e)?);
    }
    if b <= 0.0 {
        return half_line_power_integral(-b, -a, e);
    }
    half_line_power_integral(a, b, e)
}

fn half_line_power_integral(c: f64, d: f64, e: f64) -> Result<f64> {
    let exact = |lo: f64, hi: f64| (hi.powf(1.0 - e) - lo.powf(1.0 - e)) / (1.0 - e);
    if d <= c {
        return Ok(0.0);
    }
    let core = 1e-3 * d;
    let f = |y: f64| y.powf(-e);
    if c < core {
        Ok(exact(c, core) + adaptive_simpson(f, core, d, 1e-13, 0.0)?)
    } else {
        adaptive_simpson(f, c, d, 1e-13, 0.0)
    }
}

/// The scale function `h_x` centred at a fixed point.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleFunction {
    spec: WeightSpec,
    center: Vec<f64>,
}

impl ScaleFunction {
    pub fn new(spec: WeightSpec, center: Vec<f64>) -> Result<Self> {
        if center.len() != spec.dim() {
            return Err(Error::input(format!(
                "center has dimension {}, weight expects {}",
                center.len(),
                spec.dim()
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("center must be finite"));
        }
        Ok(Self { spec, center })
    }

    /// Scale function centred on the degeneracy set (the origin).
    pub fn at_origin(spec: WeightSpec) -> Self {
        Self {
            spec,
            center: vec![0.0; spec.dim()],
        }
    }

    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    fn on_degeneracy_set(&self) -> bool {
        match self.spec.case() {
            WeightCase::AxisPower => self.center[0] == 0.0,
            WeightCase::RadialPower => self.center.iter().all(|&c| c == 0.0),
        }
    }

    /// `integral over B_r(center) of w^(-N/2)`.
    pub fn ball_measure(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::input(format!("radius must be positive, got {r}")));
        }
        let n = self.spec.dim();
        let e = self.spec.alpha() * n as f64 / 2.0;
        if n == 1 {
            let c = self.center[0];
            if c == 0.0 {
                return Ok(2.0 * r.powf(1.0 - e) / (1.0 - e));
            }
            return abs_power_integral(c - r, c + r, e);
        }
        if self.spec.alpha() == 0.0 {
            return Ok(unit_sphere_area(n) * r.powi(n as i32) / n as f64);
        }
        if self.spec.case() == WeightCase::RadialPower && self.on_degeneracy_set() {
            let k = n as f64 - e;
            return Ok(unit_sphere_area(n) * r.powf(k) / k);
        }
        Err(Error::Unsupported(
            "ball measure off the degeneracy set in dimension >= 2".into(),
        ))
    }

    /// `h_x(r)`.
    pub fn h(&self, r: f64) -> Result<f64> {
        let n = self.spec.dim() as f64;
        Ok(self.ball_measure(r)?.powf(2.0 / n))
    }

    /// `h_x^{-1}(t)`: bracketing bisection on the increasing map `r -> h_x(r)`.
    pub fn h_inverse(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::input(format!("argument must be positive, got {t}")));
        }
        let guess = t.powf(1.0 / self.spec.scaling_exponent());
        let mut lo = guess * 1e-3;
        let mut hi = guess * 1e3;
        let mut expansions = 0;
        while self.h(lo)? > t {
            lo *= 1e-3;
            expansions += 1;
            if expansions > 50 {
                return Err(bracket_error(lo, hi, t));
            }
        }
        while self.h(hi)? < t {
            hi *= 1e3;
            expansions += 1;
            if expansions > 50 {
                return Err(bracket_error(lo, hi, t));
            }
        }
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            let value = self.h(mid)?;
            if (value - t).abs() <= 1e-10 * t {
                return Ok(mid);
            }
            if value < t {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        let mid = 0.5 * (lo + hi);
        if (self.h(mid)? - t).abs() <= 1e-10 * t {
            return Ok(mid);
        }
        Err(bracket_error(lo, hi, t))
    }
}

fn bracket_error(lo: f64, hi: f64, t: f64) -> Error {
    Error::numeric(format!(
        "inverse scale function did not converge for t = {t}; bracket [{lo}, {hi}]"
    ))
}

/// `h_x(r)`.
pub fn h_ball(sf: &ScaleFunction, r: f64) -> Result<f64> {
    sf.h(r)
}

/// `h_x^{-1}(t)`.
pub fn h_ball_inverse(sf: &ScaleFunction, t: f64) -> Result<f64> {
    sf.h_inverse(t)
}

/// Doubling ratios of the measure `w^(-N/2) dy` at `(x, R)` for dilation `s`
/// and order `mu`:
///
/// `m(B_{sR}) / (s^(mu N) m(B_R))` and its reciprocal.
pub fn doubling_defect(
    spec: &WeightSpec,
    x: &[f64],
    radius: f64,
    s: f64,
    mu: f64,
) -> Result<(f64, f64)> {
    if !(s > 1.0) {
        return Err(Error::input(format!("dilation must exceed 1, got {s}")));
    }
    if !(radius > 0.0) {
        return Err(Error::input(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let sf = ScaleFunction::new(*spec, x.to_vec())?;
    let big = sf.ball_measure(s * radius)?;
    let small = sf.ball_measure(radius)?;
    let forward = big / (s.powf(mu * spec.dim() as f64) * small);
    Ok((forward, 1.0 / forward))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(alpha: f64) -> WeightSpec {
        WeightSpec::new(WeightCase::AxisPower, alpha, 1).unwrap()
    }

    #[test]
    fn weight_examples() {
        let w0 = WeightSpec::new(WeightCase::AxisPower, 0.0, 2).unwrap();
        assert_eq!(w0.eval(&[3.0, -7.0]).unwrap(), 1.0);
        let w = WeightSpec::new(WeightCase::AxisPower, 0.5, 2).unwrap();
        assert!((w.eval(&[4.0, 7.0]).unwrap() - 2.0).abs() < 1e-15);
        let r = WeightSpec::new(WeightCase::RadialPower, 0.5, 1).unwrap();
        assert!((r.eval(&[4.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!(w.eval(&[1.0]).is_err());
    }

    #[test]
    fn zero_set() {
        let a = WeightSpec::new(WeightCase::AxisPower, 0.3, 3).unwrap();
        assert_eq!(a.eval(&[0.0, 5.0, -2.0]).unwrap(), 0.0);
        assert!(a.eval(&[1e-9, 0.0, 0.0]).unwrap() > 0.0);
        let b = WeightSpec::new(WeightCase::RadialPower, 0.3, 3).unwrap();
        assert_eq!(b.eval(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(b.eval(&[0.0, 1.0, 0.0]).unwrap() > 0.0);
    }

    #[test]
    fn h_examples() {
        let sf = ScaleFunction::at_origin(line(0.0));
        assert!((sf.h(1.0).unwrap() - 4.0).abs() < 1e-14);
        let sf = ScaleFunction::at_origin(line(0.5));
        assert!((sf.h(1.0).unwrap() - 64.0 / 9.0).abs() < 1e-13);
        for r in [0.01, 0.3, 7.0, 250.0] {
            let expect = 64.0 / 9.0 * f64::powf(r, 1.5);
            assert!((sf.h(r).unwrap() / expect - 1.0).abs() < 1e-13);
        }
        assert!(sf.h(0.0).is_err());
        assert!(sf.h(-1.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        let sf = ScaleFunction::at_origin(line(0.0));
        for t in [1e-4, 0.5, 3.0, 1e5] {
            let r = sf.h_inverse(t).unwrap();
            assert!((r / (t.sqrt() / 2.0) - 1.0).abs() < 1e-9);
        }
        let sf = ScaleFunction::at_origin(line(0.5));
        for t in [1e-4, 0.5, 3.0, 1e5] {
            let r = sf.h_inverse(t).unwrap();
            assert!((r / (9.0 * t / 64.0).powf(2.0 / 3.0) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn roundtrip_log_grid() {
        for center in [0.0, 0.37, -12.0] {
            for alpha in [0.0, 0.25, 0.5, 0.9] {
                let sf = ScaleFunction::new(line(alpha), vec![center]).unwrap();
                let mut r = 1e-3;
                while r <= 1e3 {
                    let back = sf.h_inverse(sf.h(r).unwrap()).unwrap();
                    assert!(
                        (back / r - 1.0).abs() < 1e-9,
                        "alpha={alpha} c={center} r={r}"
                    );
                    r *= 3.7;
                }
            }
        }
    }

    #[test]
    fn scaling_law_at_degenerate_center() {
        for alpha in [0.0, 0.25, 0.5, 0.75] {
            let sf = ScaleFunction::at_origin(line(alpha));
            for r in [0.1, 1.0, 13.0] {
                for lambda in [0.5, 2.0, 10.0] {
                    let lhs = sf.h(lambda * r).unwrap();
                    let rhs = lambda.powf(2.0 - alpha) * sf.h(r).unwrap();
                    assert!((lhs / rhs - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn off_center_quadrature_matches_antiderivative() {
        // Independent check: explicit antiderivative of |y|^(-e) on each side.
        let alpha = 0.5;
        let e: f64 = alpha / 2.0;
        let anti = |y: f64| y.signum() * y.abs().powf(1.0 - e) / (1.0 - e);
        for center in [0.3_f64, -2.0, 40.0] {
            let sf = ScaleFunction::new(line(alpha), vec![center]).unwrap();
            for r in [0.01, 0.29, 0.31, 5.0, 100.0] {
                let exact = (anti(center + r) - anti(center - r)).powi(2);
                let got = sf.h(r).unwrap();
                assert!((got / exact - 1.0).abs() < 1e-8, "c={center} r={r}");
            }
        }
    }

    #[test]
    fn strictly_increasing() {
        for center in [0.0, 1.5] {
            let sf = ScaleFunction::new(line(0.6), vec![center]).unwrap();
            let mut r = 1e-3;
            let mut prev = sf.h(r).unwrap();
            while r < 1e3 {
                r *= 1.3;
                let next = sf.h(r).unwrap();
                assert!(next > prev);
                prev = next;
            }
        }
    }

    #[test]
    fn radial_ball_in_higher_dimension() {
        // N = 3, alpha = 0: h(r) = (4 pi r^3 / 3)^(2/3)
        let sf = ScaleFunction::at_origin(WeightSpec::classical(3).unwrap());
        let v = 4.0 * std::f64::consts::PI / 3.0;
        assert!((sf.h(2.0).unwrap() / (v * 8.0).powf(2.0 / 3.0) - 1.0).abs() < 1e-13);
        // Radial weights keep the r^(2 - alpha) law at the origin.
        let sf =
            ScaleFunction::at_origin(WeightSpec::new(WeightCase::RadialPower, 0.4, 2).unwrap());
        let ratio = sf.h(4.0).unwrap() / sf.h(1.0).unwrap();
        assert!((ratio / 4f64.powf(1.6) - 1.0).abs() < 1e-12);
        let axis = WeightSpec::new(WeightCase::AxisPower, 0.4, 2).unwrap();
        assert!(matches!(
            ScaleFunction::at_origin(axis).h(1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn doubling_exact_cases() {
        let (f, _) = doubling_defect(&line(0.0), &[3.0], 2.0, 2.0, 1.0).unwrap();
        assert_eq!(f, 1.0);
        let (f, b) = doubling_defect(&line(0.5), &[0.0], 1.3, 2.0, 0.75).unwrap();
        assert!((f - 1.0).abs() < 1e-13 && (b - 1.0).abs() < 1e-13);
        assert!(doubling_defect(&line(0.5), &[0.0], 1.0, 1.0, 0.75).is_err());
        assert!(doubling_defect(&line(0.5), &[0.0], 0.0, 2.0, 0.75).is_err());
    }

    #[test]
    fn doubling_far_from_origin_within_bruteforce_constants() {
        // Brute-force midpoint rule for the measure, independent of the
        // split/closed-form path.
        let alpha = 0.5;
        let brute = |c: f64, r: f64| {
            let n = 200_000;
            let h = 2.0 * r / n as f64;
            (0..n)
                .map(|k| {
                    let y: f64 = c - r + (k as f64 + 0.5) * h;
                    y.abs().powf(-alpha / 2.0) * h
                })
                .sum::<f64>()
        };
        let mu = 0.75;
        let mut samples = Vec::new();
        for c in [5.0, 20.0, 100.0] {
            for r in [0.1, 1.0, 3.0] {
                let bf = brute(c, 2.0 * r) / (2f64.powf(mu) * brute(c, r));
                let (f, _) = doubling_defect(&line(alpha), &[c], r, 2.0, mu).unwrap();
                assert!((f / bf - 1.0).abs() < 1e-4, "c={c} r={r} f={f} bf={bf}");
                samples.push((f, bf));
            }
        }
        let c1 = samples.iter().map(|s| s.1).fold(f64::MIN, f64::max);
        let c2 = samples.iter().map(|s| s.1).fold(f64::MAX, f64::min);
        for (f, _) in samples {
            assert!(f <= c1 * (1.0 + 1e-4) && f >= c2 * (1.0 - 1e-4));
        }
    }

    proptest! {
        #[test]
        fn constructor_accepts_exactly_admissible(alpha in -0.5f64..1.5, dim in 1usize..6, radial in any::<bool>()) {
            let case = if radial { WeightCase::RadialPower } else { WeightCase::AxisPower };
            let admissible = match case {
                WeightCase::AxisPower if dim <= 2 => (0.0..1.0).contains(&alpha),
                WeightCase::AxisPower => alpha >= 0.0 && alpha < 2.0 / dim as f64,
                WeightCase::RadialPower => (0.0..1.0).contains(&alpha),
            };
            prop_assert_eq!(WeightSpec::new(case, alpha, dim).is_ok(), admissible);
        }

        #[test]
        fn weight_nonnegative(alpha in 0.0f64..0.99, x in -50.0f64..50.0, y in -50.0f64..50.0) {
            let w = WeightSpec::new(WeightCase::AxisPower, alpha, 2).unwrap();
            prop_assert!(w.eval(&[x, y]).unwrap() >= 0.0);
        }
    }
}
