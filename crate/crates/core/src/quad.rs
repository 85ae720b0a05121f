//! Adaptive Simpson quadrature.

use crate::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` by adaptive Simpson with Richardson correction.
///
/// The tolerance is `max(abs_tol, rel_tol * |I|)` where `I` is a coarse
/// first estimate of the integral.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::input(format!("non-finite bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    // A 16-panel composite rule gives a scale for the relative tolerance that
    // is not fooled by a lucky three-point estimate.
    let n = 16;
    let h = (b - a) / n as f64;
    let mut coarse = 0.0;
    for k in 0..n {
        let x0 = a + k as f64 * h;
        coarse += h / 6.0 * (f(x0) + 4.0 * f(x0 + 0.5 * h) + f(x0 + h));
    }
    let eps = abs_tol.max(rel_tol * coarse.abs());
    let mut failed = false;
    let value = recurse(&f, a, b, fa, fm, fb, whole, eps, MAX_DEPTH, &mut failed);
    if !value.is_finite() {
        return Err(Error::numeric(format!(
            "quadrature over [{a}, {b}] produced {value}"
        )));
    }
    if failed {
        return Err(Error::numeric(format!(
            "quadrature over [{a}, {b}] hit the depth limit"
        )));
    }
    Ok(value)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
    failed: &mut bool,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *failed = true;
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1, failed)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1, failed)
}
