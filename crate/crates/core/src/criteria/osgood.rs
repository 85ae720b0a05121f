use crate::dynamics::{Nonlinearity, TimeProfile};
use crate::quad::adaptive_simpson;
use crate::{Error, Result};

/// `integral_z^inf ds / f(s)` in closed form.
pub fn osgood_tail(nl: Nonlinearity, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::input(format!("tail needs z > 0, got {z}")));
    }
    Ok(match nl {
        Nonlinearity::Power(p) => z.powf(1.0 - p) / (p - 1.0),
        Nonlinearity::LogPower(q) => z.ln_1p().powf(1.0 - q) / (q - 1.0),
    })
}

/// The same tail by adaptive quadrature.
///
/// With `s = e^w - 1` and `w = w0 e^x` the integral becomes
/// `integral_0^inf w e^w / f(e^w - 1) dx`, which is integrated on unit
/// panels in `x` until the panels stop contributing.
pub fn osgood_tail_quadrature(nl: Nonlinearity, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::input(format!("tail needs z > 0, got {z}")));
    }
    let w0 = z.ln_1p();
    // ln f(e^w - 1) - w, arranged so that no large terms cancel.
    let reduced_log_f = move |w: f64| -> f64 {
        match nl {
            Nonlinearity::Power(p) => {
                if w < 30.0 {
                    p * w.exp_m1().ln() - w
                } else {
                    (p - 1.0) * w + p * (-(-w).exp()).ln_1p()
                }
            }
            Nonlinearity::LogPower(q) => q * w.ln(),
        }
    };
    let integrand = move |x: f64| -> f64 {
        let w = w0 * x.exp();
        (w.ln() - reduced_log_f(w)).exp()
    };
    let mut total = 0.0;
    let mut k = 0.0;
    loop {
        let piece = adaptive_simpson(integrand, k, k + 1.0, 1e-14, 1e-16 * total)?;
        total += piece;
        k += 1.0;
        if piece <= 1e-18 * total || k > 4000.0 {
            break;
        }
    }
    Ok(total)
}

/// `integral_0^t h` for `t >= 0`.
pub fn forcing_primitive(profile: TimeProfile, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::input(format!("primitive needs t >= 0, got {t}")));
    }
    Ok(profile.primitive(t))
}
