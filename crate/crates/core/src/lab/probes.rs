use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::criteria::{decay_fit, DecayEnvelope};
use crate::semigroup::{
    build_operator, kernel_probe, sample_semigroup, EvolveOptions, Field, GridSpec, KernelSample,
};
use crate::weight::{WeightCase, WeightSpec};
use crate::{Error, Result};

/// Kernel probe in one dimension with the weight `|x|^alpha`, spike at the
/// degenerate point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelProbeSpec {
    pub alpha: f64,
    pub times: Vec<f64>,
    /// Half width of the domain; by default ten diffusion lengths at the
    /// last time.
    #[serde(default)]
    pub half_width: Option<f64>,
    #[serde(default)]
    pub spacing: Option<f64>,
    #[serde(default = "default_probe_tol")]
    pub tol: f64,
}

fn default_probe_tol() -> f64 {
    1e-6
}

impl KernelProbeSpec {
    pub fn new(alpha: f64, times: Vec<f64>) -> Self {
        Self {
            alpha,
            times,
            half_width: None,
            spacing: None,
            tol: default_probe_tol(),
        }
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::input("probe needs at least one time"));
    }
    if times.iter().any(|t| !(*t > 0.0 && t.is_finite())) || times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::input("probe times must be positive and increasing"));
    }
    Ok(())
}

pub fn run_kernel_probe(spec: &KernelProbeSpec) -> Result<Vec<KernelSample>> {
    check_times(&spec.times)?;
    let weight = WeightSpec::new(WeightCase::AxisPower, spec.alpha, 1)?;
    let a = weight.scaling_exponent();
    let t_min = spec.times[0];
    let t_max = spec.times[spec.times.len() - 1];
    let l = spec.half_width.unwrap_or(10.0 * t_max.powf(1.0 / a) + 10.0);
    let h = spec
        .spacing
        .unwrap_or((0.25 * t_min.powf(1.0 / a)).min(0.1).max(l / 20_000.0));
    let grid = GridSpec::line_with_spacing(l, h)?;
    let op = build_operator(grid, weight)?;
    kernel_probe(
        &op,
        grid.center_index(),
        &spec.times,
        EvolveOptions::with_tol(spec.tol),
    )
}

pub fn write_kernel_csv<W: Write>(rows: &[KernelSample], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(["t", "sup_value", "mass", "slope_window_estimate"])?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Decay of `|S(t) (1+|x|)^(-rho)|_inf` in one dimension with weight
/// `|x|^alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProbeSpec {
    pub rho: f64,
    pub alpha: f64,
    #[serde(default = "default_window")]
    pub window: (f64, f64),
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_probe_tol")]
    pub tol: f64,
}

fn default_window() -> (f64, f64) {
    (1e4, 1e5)
}

fn default_nodes() -> usize {
    4001
}

fn default_samples() -> usize {
    41
}

impl DecayProbeSpec {
    pub fn new(rho: f64, alpha: f64) -> Self {
        Self {
            rho,
            alpha,
            window: default_window(),
            radius: None,
            nodes: default_nodes(),
            samples: default_samples(),
            tol: default_probe_tol(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayProbeReport {
    pub rho: f64,
    pub alpha: f64,
    /// `min(rho, 1) / (2 - alpha)`.
    pub predicted_theta: f64,
    pub envelope: DecayEnvelope,
    pub boundary_leak: f64,
    pub trace: Vec<(f64, f64)>,
}

pub fn run_decay_probe(spec: &DecayProbeSpec) -> Result<DecayProbeReport> {
    if !(spec.rho > 0.0 && spec.rho.is_finite()) {
        return Err(Error::input(format!(
            "rho must be positive, got {}",
            spec.rho
        )));
    }
    if spec.samples < 3 {
        return Err(Error::input("decay probe needs at least three samples"));
    }
    let weight = WeightSpec::new(WeightCase::RadialPower, spec.alpha, 1)?;
    let a = weight.scaling_exponent();
    let (t0, t1) = spec.window;
    let radius = spec.radius.unwrap_or(10.0 * t1.powf(1.0 / a));
    let grid = GridSpec::radial(radius, spec.nodes, 1)?;
    let op = build_operator(grid, weight)?;
    let rho = spec.rho;
    let u0 = Field::from_fn(grid, |x| (1.0 + x.abs()).powf(-rho))?;
    let times: Vec<f64> = (0..spec.samples)
        .map(|k| t0 * (t1 / t0).powf(k as f64 / (spec.samples - 1) as f64))
        .collect();
    let fields = sample_semigroup(&op, &u0, &times, EvolveOptions::with_tol(spec.tol))?;
    let mut leak: f64 = 0.0;
    let trace: Vec<(f64, f64)> = times
        .iter()
        .zip(&fields)
        .map(|(&t, f)| {
            let s = f.sup_norm();
            leak = leak.max(f.boundary_leak() / s);
            (t, s)
        })
        .collect();
    let envelope = decay_fit(&trace, spec.window)?;
    Ok(DecayProbeReport {
        rho,
        alpha: spec.alpha,
        predicted_theta: rho.min(1.0) / a,
        envelope,
        boundary_leak: leak,
        trace,
    })
}
